"""
Command-line interface for chemotaxis-waves.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from .config import (
    SolverSettings,
    load_config,
    parse_sweep_spec,
    resolve_settings,
    validate_sweep_spec,
)
from .constants import DEFAULT_HYP_TOL, DEFAULT_LINE_TOL, REGIME_ROWS
from .diagnostics import CHECK_NAMES, run_suite
from .errors import DomainError, StudyError
from .hyperbolic_wave import construct_discontinuous_wave, hyp_to_pme_limit, jump_check, oracle_gap
from .pme_wave import pm_min_speed, pme_residual, pme_wave_solve, shoot_wave
from .plotting import emit_plot
from .profile_io import emit_profile, load_profile
from .speed_selector import extend_to_line, hyp_limit_study, pm_limit_study, select_speed
from .sweep import check_output_dir, regime_table, run_sweep, write_csv, write_json

logger = logging.getLogger(__name__)

REGIME_COLUMNS = ['regime', 'description', 'chi', 'nu', 'c', 'c_unscaled', 'predicted',
                  'deviation', 'passed', 'status']


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar='PATH', help='INI configuration file')
    parser.add_argument('--out', metavar='DIR', help='Output directory (default: results)')
    parser.add_argument('--jobs', type=int, metavar='N', help='Worker processes')
    parser.add_argument('--tol', type=float, metavar='X', help='Speed tolerance')
    parser.add_argument('--L', type=float, metavar='X', help='Slab half-length')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Debug logging and tracebacks on errors')


def create_argument_parser() -> argparse.ArgumentParser:
    """
    Create command-line argument parser.

    Returns:
        Configured ArgumentParser instance
    """
    parser = argparse.ArgumentParser(
        prog='chemotaxis-waves',
        description='Traveling waves of a nonlocal chemotaxis model - speeds, profiles and checks',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Select the wave speed on a slab and store the profile
  chemotaxis-waves solve-tw --chi=-16 --nu 0.001
  chemotaxis-waves solve-tw --chi=-16 --nu 0.001 --extend

  # Discontinuous wave and porous-medium wave
  chemotaxis-waves solve-hyp --nu 1
  chemotaxis-waves solve-pme --eps 0.25

  # Diagnostics on a stored profile
  chemotaxis-waves verify results/tw_chi-16_nu0.001.dat

  # Sweeps, the regime table and limit studies
  chemotaxis-waves sweep --chi=-1e4 --nu 0.01,0.001 --jobs 4
  chemotaxis-waves regime-table
  chemotaxis-waves limits-pm --eps 0 --nus 0.01,0.001
  chemotaxis-waves limits-hyp --nu 1 --chis=-100,-1000
  chemotaxis-waves limits-hyp --to-pme --nus 0.1,0.01

  # Plot stored profiles
  chemotaxis-waves plot results/hyp_nu1.dat

Configuration:
  --config FILE reads an INI file; [defaults] applies to every subcommand and a section
  named after the subcommand overrides it. Flags override both.
  CHEMOTAXIS_WAVES_JOBS sets the default worker count.
        """
    )
    parser.add_argument('--version', action='store_true', help='Show version information')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')

    p = sub.add_parser('solve-tw', help='Select the wave speed on a slab')
    _add_common(p)
    p.add_argument('--chi', type=float, help='Chemotaxis strength (< 0)')
    p.add_argument('--nu', type=float, help='Kernel length-scale (> 0)')
    p.add_argument('--delta', type=float, help='Normalization level u(0)')
    p.add_argument('--extend', action='store_const', const='yes',
                   help='Double L until the wave stabilizes')
    p.add_argument('--line-tol', dest='line_tol', type=float,
                   help='Stabilization tolerance of --extend')

    p = sub.add_parser('solve-hyp', help='Construct the discontinuous wave')
    _add_common(p)
    p.add_argument('--nu', type=float, help='Kernel length-scale (> 0)')

    p = sub.add_parser('solve-pme', help='Porous-medium traveling wave')
    _add_common(p)
    p.add_argument('--eps', type=float, help='Linear diffusion (>= 0)')
    p.add_argument('--c', type=float, help='Speed (default: minimal speed)')

    p = sub.add_parser('verify', help='Run the diagnostics suite on a stored profile')
    _add_common(p)
    p.add_argument('profile', help='Profile file')
    p.add_argument('--checks', help=f"Comma-separated subset of {', '.join(CHECK_NAMES)}")
    p.add_argument('--phi-route', dest='phi_route', action='store_const', const='yes',
                   help='Also evaluate the kernel term through the phi convolution')

    p = sub.add_parser('sweep', help='Speeds and diagnostics over parameter points')
    _add_common(p)
    p.add_argument('--chi', help='Comma-separated chi values')
    p.add_argument('--nu', help='Comma-separated nu values')
    p.add_argument('--delta', type=float, help='Normalization level for every point')
    p.add_argument('--points', help="Explicit points 'chi, nu[, delta]; ...'")
    p.add_argument('--checks', help='Comma-separated checks or "all"')
    p.add_argument('--extend', action='store_const', const='yes',
                   help='Extend every point to the line')
    p.add_argument('--no-json', dest='json', action='store_const', const='no',
                   help='Skip the JSON mirror of the CSV')

    p = sub.add_parser('regime-table', help='Measured speeds against the asymptotic table')
    _add_common(p)
    p.add_argument('--rows', help='Comma-separated rows among '
                   + ', '.join(key for key, _ in REGIME_ROWS))

    p = sub.add_parser('limits-pm', help='Porous-medium limit as nu -> 0')
    _add_common(p)
    p.add_argument('--eps', type=float, help='eps = 1/|chi|; 0 runs at chi = -1e4')
    p.add_argument('--nus', help='Comma-separated decreasing nu values')

    p = sub.add_parser('limits-hyp', help='Hyperbolic limit as chi -> -inf')
    _add_common(p)
    p.add_argument('--nu', type=float, help='Kernel length-scale (> 0)')
    p.add_argument('--chis', help='Comma-separated chi values of growing modulus')
    p.add_argument('--to-pme', dest='to_pme', action='store_true',
                   help='Discontinuous waves as nu -> 0 against the sharp wave instead')
    p.add_argument('--nus', help='nu values of --to-pme')

    p = sub.add_parser('plot', help='Render stored profiles to SVG')
    _add_common(p)
    p.add_argument('profiles', nargs='+', help='Profile files')
    p.add_argument('--jump', type=float, help='Mark a discontinuity at this x')
    p.add_argument('-o', '--output', help='SVG file name inside --out')

    return parser


def _profile_path(out: Path, kind: str, **params: float) -> Path:
    tag = '_'.join(f"{key}{value:g}" for key, value in params.items())
    return out / f"{kind}_{tag}.dat"


def _print_checks(checks: Dict[str, Any]) -> None:
    for name, result in checks.items():
        mark = '✅' if result['passed'] else ('➖' if result['status'] == 'skipped' else '⚠️')
        print(f"   {mark} {name}: {result['status']}")


def cmd_solve_tw(args: argparse.Namespace, settings: SolverSettings) -> None:
    chi, nu = settings.get_float('chi'), settings.get_float('nu')
    if chi is None or nu is None:
        raise DomainError("solve-tw needs --chi and --nu")
    delta = settings.get_float('delta')
    print(f"📊 Selecting speed: chi={chi:g}, nu={nu:g}, L={settings.L:g}")
    if settings.get_bool('extend'):
        line_tol = settings.get_float('line_tol') or DEFAULT_LINE_TOL
        wave: Any = extend_to_line(chi, nu, delta, tol=line_tol, L=settings.L,
                                   speed_tol=settings.tol)
        print(f"✅ c = {wave.c:.10g} (stabilized at L = {wave.L_final:g})")
        for step in wave.history:
            print(f"   L={step['L']:g}  c={step['c']:.10g}")
    else:
        selection = select_speed(chi, nu, delta, L=settings.L, tol=settings.tol)
        wave = selection.solution
        print(f"✅ c = {selection.c:.10g} ({selection.termination}, "
              f"{len(selection.history)} bisection steps)")
    path = emit_profile(wave, _profile_path(settings.out, 'tw', chi=chi, nu=nu)).path
    print(f"💾 Profile saved to: {path}")


def cmd_solve_hyp(args: argparse.Namespace, settings: SolverSettings) -> None:
    nu = settings.get_float('nu')
    if nu is None:
        raise DomainError("solve-hyp needs --nu")
    hyp_tol = settings.tol
    print(f"📊 Constructing discontinuous wave: nu={nu:g}")
    wave = construct_discontinuous_wave(nu, tol=hyp_tol)
    print(f"✅ c = {wave.c:.10g}, u(0-) = {wave.jump_value:.10g}, "
          f"{wave.iterations} iterations (gap {wave.fixed_point_gap:.2e})")
    checks = jump_check(wave)
    _print_checks(checks)
    gap = oracle_gap(wave)
    print(f"   explicit-solution oracle gap: {gap:.3e}")
    path = emit_profile(wave, _profile_path(settings.out, 'hyp', nu=nu)).path
    write_json({'nu': nu, 'c': wave.c, 'jump_value': wave.jump_value, 'checks': checks,
                'oracle_gap': gap}, settings.out / f"hyp_nu{nu:g}.json")
    print(f"💾 Profile saved to: {path}")


def cmd_solve_pme(args: argparse.Namespace, settings: SolverSettings) -> None:
    eps = settings.get_float('eps')
    if eps is None:
        raise DomainError("solve-pme needs --eps")
    c = settings.get_float('c')
    if c is None:
        c = pm_min_speed(eps)
    print(f"📊 Porous-medium wave: eps={eps:g}, c={c:.10g}")
    wave = pme_wave_solve(eps, c) if eps > 0 else shoot_wave(eps, c)
    defect = pme_residual(wave.u, c, eps)
    print(f"✅ {wave.meta.get('method', 'solved')}: distributional defect {defect:.3e}")
    path = emit_profile(wave, _profile_path(settings.out, 'pme', eps=eps, c=c)).path
    print(f"💾 Profile saved to: {path}")


def _selected_checks(settings: SolverSettings) -> Optional[List[str]]:
    text = settings.get_str('checks') or 'all'
    return None if text == 'all' else [c.strip() for c in text.split(',') if c.strip()]


def cmd_verify(args: argparse.Namespace, settings: SolverSettings) -> None:
    profile = load_profile(args.profile)
    fields = profile.fields()
    params: Dict[str, Any] = dict(profile.params)
    params['phi_route'] = settings.get_bool('phi_route')
    print(f"📊 Verifying {profile.kind} profile {args.profile} ({len(profile.x)} rows)")
    report = run_suite(profile.kind, fields['u'], fields.get('v'), params,
                       checks=_selected_checks(settings))
    _print_checks(report.checks)
    path = write_json(report.to_dict(), settings.out / f"{Path(args.profile).stem}.verify.json")
    status = '✅ All checks passed' if report.passed else '⚠️ Some checks failed'
    print(f"{status}; report saved to: {path}")


def cmd_sweep(args: argparse.Namespace, settings: SolverSettings) -> None:
    spec = parse_sweep_spec(settings)
    valid, message = validate_sweep_spec(spec)
    if not valid:
        raise DomainError(message)
    print(f"📊 Sweep of {message} on {spec.jobs} worker(s)")
    rows = run_sweep(spec)
    failed = sum(1 for row in rows if row['status'] != 'ok')
    csv_path = write_csv(rows, spec.out / 'sweep.csv')
    print(f"✅ {len(rows) - failed} ok, {failed} with findings; table saved to: {csv_path}")
    if spec.json:
        print(f"💾 JSON mirror saved to: {write_json(rows, spec.out / 'sweep.json')}")


def cmd_regime_table(args: argparse.Namespace, settings: SolverSettings) -> None:
    rows_wanted = [r.strip() for r in settings.get_str('rows').split(',') if r.strip()]
    print(f"📊 Regime table: {', '.join(rows_wanted)}")
    rows = regime_table(rows_wanted, tol=settings.tol, L=settings.L, jobs=settings.jobs)
    print(f"{'Regime':<12}{'chi':>10}{'nu':>10}{'c_bar':>14}{'deviation':>12}  Predicted")
    print("-" * 80)
    for row in rows:
        print(f"{row['regime']:<12}{row['chi']:>10g}{row['nu']:>10g}{row['c_unscaled']:>14.6g}"
              f"{row['deviation']:>12.3g}  {row['predicted']}  "
              f"{'✅' if row['passed'] else '⚠️ ' + row['status']}")
    write_csv(rows, settings.out / 'regime_table.csv', columns=REGIME_COLUMNS)
    path = write_json(rows, settings.out / 'regime_table.json')
    print(f"💾 Table saved to: {path}")


def _report_study(name: str, run: Callable[[], Any], out: Path) -> None:
    try:
        report = run()
    except StudyError as e:
        if e.partial is not None:
            write_json(e.partial.to_dict(), out / f"{name}.partial.json")
            print(f"💾 Partial report saved to: {out / f'{name}.partial.json'}")
        raise
    for p, c, d in zip(report.parameters, report.speeds, report.distances):
        print(f"   {p:<10g} c={c:<14.8g} distance={d:.3e}")
    path = write_json(report.to_dict(), out / f"{name}.json")
    verdict = '✅ Converging' if report.verdict else '⚠️ Not converging'
    print(f"{verdict} toward c = {report.target:.6g}; report saved to: {path}")


def cmd_limits_pm(args: argparse.Namespace, settings: SolverSettings) -> None:
    eps = settings.get_float('eps') or 0.0
    nus = settings.get_floats('nus')
    print(f"📊 Porous-medium limit: eps={eps:g}, nu in {nus}")
    _report_study('limits_pm', lambda: pm_limit_study(
        eps, nus, L=settings.L, tol=settings.tol, jobs=settings.jobs), settings.out)


def cmd_limits_hyp(args: argparse.Namespace, settings: SolverSettings) -> None:
    hyp_tol = settings.get_float('hyp_tol') or DEFAULT_HYP_TOL
    if args.to_pme:
        nus = settings.get_floats('nus')
        print(f"📊 Discontinuous waves toward the sharp wave: nu in {nus}")
        _report_study('limits_hyp_to_pme', lambda: hyp_to_pme_limit(
            nus, tol=hyp_tol, jobs=settings.jobs), settings.out)
        return
    nu = settings.get_float('nu')
    if nu is None:
        raise DomainError("limits-hyp needs --nu")
    chis = settings.get_floats('chis')
    print(f"📊 Hyperbolic limit: nu={nu:g}, chi in {chis}")
    _report_study('limits_hyp', lambda: hyp_limit_study(
        nu, chis, L=settings.L, tol=settings.tol, jobs=settings.jobs), settings.out)


def cmd_plot(args: argparse.Namespace, settings: SolverSettings) -> None:
    fields = []
    jump = settings.get_float('jump')
    for name in args.profiles:
        profile = load_profile(name)
        stem = Path(name).stem
        for column, f in profile.fields().items():
            fields.append((f"{stem}: {column}", f))
        if jump is None:
            jump = profile.jump
    output = args.output or f"{Path(args.profiles[0]).stem}.svg"
    path = emit_plot(fields, settings.out / output, jump=jump)
    print(f"💾 Plot saved to: {path}")


COMMANDS: Dict[str, Callable[[argparse.Namespace, SolverSettings], None]] = {
    'solve-tw': cmd_solve_tw,
    'solve-hyp': cmd_solve_hyp,
    'solve-pme': cmd_solve_pme,
    'verify': cmd_verify,
    'sweep': cmd_sweep,
    'regime-table': cmd_regime_table,
    'limits-pm': cmd_limits_pm,
    'limits-hyp': cmd_limits_hyp,
    'plot': cmd_plot,
}

# Namespace entries that are not settings
_NOT_SETTINGS = ('command', 'config', 'verbose', 'version', 'profile', 'profiles', 'output',
                 'to_pme')


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True,
    )


def fail(exc: BaseException, verbose: bool) -> None:
    """Print one error line to stderr and exit 1."""
    message = str(exc).replace('\n', ' ')
    print(f"❌ Error [{type(exc).__name__}]: {message}", file=sys.stderr)
    if verbose:
        import traceback
        traceback.print_exc()
    sys.exit(1)


def main(argv: Optional[List[str]] = None) -> None:
    """Program entry point."""
    parser = create_argument_parser()
    args = parser.parse_args(argv)

    if args.version:
        from .provenance import provenance
        print(provenance())
        return

    if args.command is None:
        parser.print_help()
        print("\n💡 Quick Start:")
        print("   chemotaxis-waves solve-tw --chi=-16 --nu 0.001")
        print("   chemotaxis-waves regime-table")
        return

    verbose = bool(getattr(args, 'verbose', False))
    setup_logging(verbose)
    try:
        overrides = {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS}
        settings = resolve_settings(args.command, overrides, load_config(args.config))
        ok, message = check_output_dir(settings.out)
        if not ok:
            raise DomainError(message)
        print(f"📌 {args.command} → {settings.out}")
        COMMANDS[args.command](args, settings)
        print("\n🎉 Done!")
    except Exception as e:
        fail(e, verbose)


if __name__ == '__main__':
    main()
