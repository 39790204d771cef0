"""
Wave-speed selection by the normalization u(0) = delta, extension to the line, and limit studies.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterator, List, NoReturn, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    DEFAULT_BISECTION_MAX_ITER,
    DEFAULT_BRACKET_COLLAPSE_ULPS,
    DEFAULT_LINE_TOL,
    DEFAULT_LINE_WINDOW,
    DEFAULT_MAX_DOUBLINGS,
    DEFAULT_PRESCAN_POINTS,
    DEFAULT_SLAB_HALF_LENGTH,
    DEFAULT_SPEED_TOL,
    PM_LIMIT_CHI,
)
from .errors import ConvergenceError, DomainError, SlabTooShortError, StudyError, WaveError
from .grid_kernel import Field, UniformGrid, default_grid
from .hyperbolic_wave import HypWave, check_speed_bracket, construct_discontinuous_wave
from .pme_wave import pm_min_speed, pme_wave_solve, pushed_wave_profile
from .slab_solver import (
    SlabSolution,
    WaveParams,
    quasi_singular_point,
    solve_pinned_slab,
    solve_slab,
    speed_bracket,
)
from .types import BisectionStep, ConvergenceReport, ScanPoint, SignChanges, StudyPoint
from .workers import ordered_map

logger = logging.getLogger(__name__)

PM_LIMIT_REL_TOL = 0.1


def linear_speed_floor(chi: float) -> float:
    """FKPP minimal speed 2/sqrt(|chi|) of the diffusion-reaction part."""
    if not chi < 0:
        raise DomainError(f"chi must be negative, got {chi}")
    return 2.0 / math.sqrt(abs(chi))


@dataclass
class SpeedSelection:
    """Result of select_speed; unpacks as (c, solution)."""

    c: float
    solution: SlabSolution
    scan: List[ScanPoint] = field(default_factory=list)
    sign_changes: SignChanges = field(default_factory=list)
    history: List[BisectionStep] = field(default_factory=list)
    termination: str = 'tolerance'
    bracket: Tuple[float, float] = (0.0, 0.0)

    def __iter__(self) -> Iterator[Any]:
        return iter((self.c, self.solution))


@dataclass
class TravelingWave:
    """Slab solution stabilized under L-doubling."""

    params: WaveParams
    u: Field
    v: Field
    L_final: float
    history: List[Dict[str, float]] = field(default_factory=list)
    solution: Optional[SlabSolution] = None
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def c(self) -> float:
        return self.params.c


def _mismatch(sol: SlabSolution) -> float:
    return sol.u_at_origin - float(sol.params.delta)


def _solve_at(params: WaveParams, c: float, grid: UniformGrid,
              warm: Optional[SlabSolution]) -> SlabSolution:
    """
    Slab solve at speed c: both couplings from the warm start (the previous scan point or
    bisection midpoint), then both from the ramp.

    Raises:
        ConvergenceError: every attempt failed
    """
    p = params.with_speed(c)
    attempts: List[Tuple[Optional[SlabSolution], str]] = []
    if warm is not None:
        attempts += [(warm, 'newton'), (warm, 'picard')]
    attempts += [(None, 'newton'), (None, 'picard')]
    failures = []
    for init, coupling in attempts:
        sol = solve_slab(p, init=init, grid=grid, coupling=coupling)
        if sol.converged:
            return sol
        failures.append({'init': sol.meta.get('init'), 'coupling': coupling,
                         'residual': sol.residual})
        logger.warning("slab solve at c=%.8g failed (%s from %s, residual %.3e)",
                       c, coupling, sol.meta.get('init'), sol.residual)
    raise ConvergenceError(f"slab solver did not converge at c={c:.8g}", failures)


def _prescan(params: WaveParams, grid: UniformGrid, lower: float, upper: float, points: int,
             init: Optional[SlabSolution]) -> Tuple[List[ScanPoint], List[Optional[SlabSolution]]]:
    scan: List[ScanPoint] = []
    solutions: List[Optional[SlabSolution]] = []
    warm = init
    cs = np.linspace(lower, upper, points)
    for k, c in enumerate(cs):
        endpoint = k == 0 or k == points - 1
        try:
            sol: Optional[SlabSolution] = _solve_at(params, float(c), grid, warm)
        except ConvergenceError:
            if endpoint:
                raise
            sol = None
        if sol is not None:
            warm = sol
        scan.append({'c': float(c), 'phi': None if sol is None else _mismatch(sol),
                     'converged': sol is not None})
        solutions.append(sol)
        logger.debug("pre-scan c=%.6g phi=%s", c, scan[-1]['phi'])
    return scan, solutions


def _sign_changes(scan: List[ScanPoint]) -> SignChanges:
    valid = [p for p in scan if p['phi'] is not None]
    changes = []
    for a, b in zip(valid, valid[1:]):
        if (a['phi'] > 0) != (b['phi'] > 0):  # type: ignore[operator]
            changes.append([a['c'], b['c']])
    return changes


def select_speed(chi: float, nu: float, delta: Optional[float] = None,
                 L: float = DEFAULT_SLAB_HALF_LENGTH, tol: float = DEFAULT_SPEED_TOL,
                 grid: Optional[UniformGrid] = None, init: Optional[SlabSolution] = None,
                 prescan_points: int = DEFAULT_PRESCAN_POINTS,
                 max_iter: int = DEFAULT_BISECTION_MAX_ITER) -> SpeedSelection:
    """
    Find c with u_c(0) = delta by bisection on Phi(c) = u_c(0) - delta inside the speed bracket.

    A coarse scan of Phi across the bracket runs first; every sign change it finds is reported
    and bisection starts in the first one. When the bracket collapses to a few ulps before
    |Phi| < tol (Phi is too steep for pushed fronts), the pinned slab problem polishes the speed.

    Args:
        chi: Chemotaxis strength, < 0
        nu: Kernel length-scale, > 0
        delta: Normalization level; defaults to nu/(2(nu+1))
        L: Slab half-length
        tol: Tolerance on |Phi|
        grid: Grid on [-L, L]; defaults to default_grid(L, nu, chi)
        init: Warm start for the first scan point
        prescan_points: Number of scan points, endpoints included
        max_iter: Bisection cap

    Returns:
        SpeedSelection

    Raises:
        SlabTooShortError: Phi does not change sign across the bracket
        ConvergenceError: the slab solver fails at a bisection point or the polish fails
    """
    params = WaveParams(chi=chi, nu=nu, c=0.0, delta=delta, L=L)
    lower, upper = speed_bracket(chi, nu)
    if grid is None:
        grid = default_grid(L, nu, chi)
    scan, solutions = _prescan(params, grid, lower, upper, max(prescan_points, 2), init)
    phi_lower, phi_upper = scan[0]['phi'], scan[-1]['phi']
    if not (phi_lower > 0 > phi_upper):  # type: ignore[operator]
        raise SlabTooShortError(
            f"u(0) - delta does not change sign across [{lower:.6g}, {upper:.6g}] at L={L:g}: "
            f"{phi_lower:.3e} at c_lower, {phi_upper:.3e} at c_upper",
            phi_lower=float(phi_lower), phi_upper=float(phi_upper),  # type: ignore[arg-type]
        )
    changes = _sign_changes(scan)
    if len(changes) > 1:
        logger.warning("u(0) - delta changes sign %d times across the bracket", len(changes))

    # first pair of converged scan points with a + to - change
    valid = [k for k, p in enumerate(scan) if p['phi'] is not None]
    k_lo, k_hi = next((a, b) for a, b in zip(valid, valid[1:])
                      if scan[a]['phi'] > 0 >= scan[b]['phi'])  # type: ignore[operator]
    lo, hi = scan[k_lo]['c'], scan[k_hi]['c']
    sol_lo, sol_hi = solutions[k_lo], solutions[k_hi]
    assert sol_lo is not None and sol_hi is not None

    history: List[BisectionStep] = []
    best = sol_lo if abs(_mismatch(sol_lo)) <= abs(_mismatch(sol_hi)) else sol_hi
    termination = 'tolerance' if abs(_mismatch(best)) < tol else 'max-iterations'
    if termination != 'tolerance':
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if hi - lo <= DEFAULT_BRACKET_COLLAPSE_ULPS * np.spacing(mid):
                termination = 'bracket-collapsed'
                break
            warm = sol_lo if abs(_mismatch(sol_lo)) <= abs(_mismatch(sol_hi)) else sol_hi
            sol = _solve_at(params, mid, grid, warm)
            phi = _mismatch(sol)
            history.append({'c': mid, 'phi': phi, 'bracket_low': lo, 'bracket_high': hi})
            logger.debug("bisection c=%.12g phi=%.3e width %.3e", mid, phi, hi - lo)
            if abs(phi) < abs(_mismatch(best)):
                best = sol
            if abs(phi) < tol:
                termination = 'tolerance'
                break
            if phi > 0:
                lo, sol_lo = mid, sol
            else:
                hi, sol_hi = mid, sol

    if termination != 'tolerance':
        polished = solve_pinned_slab(params, best, c_guess=best.params.c, grid=grid)
        c = polished.params.c
        if polished.converged and lower - tol <= c <= upper + tol:
            best = polished
            termination = 'pinned-polish'
        elif termination == 'bracket-collapsed':
            logger.warning("bracket collapsed at c=%.12g with |phi|=%.3e; pinned polish %s",
                           best.params.c, abs(_mismatch(best)), polished.meta.get('newton_status'))
        else:
            raise ConvergenceError(
                f"speed selection stalled at c={best.params.c:.12g} with |phi|="
                f"{abs(_mismatch(best)):.3e}; pinned polish {polished.meta.get('newton_status')}",
                history,
            )
    logger.debug("selected c=%.12g (%s)", best.params.c, termination)
    return SpeedSelection(
        c=best.params.c, solution=best, scan=scan, sign_changes=changes, history=history,
        termination=termination, bracket=(lower, upper),
    )


def _window_gap(coarse: SlabSolution, fine: SlabSolution, window: Tuple[float, float]) -> float:
    u_fine = fine.u.window(*window)
    return float(np.max(np.abs(u_fine.values - coarse.u.at(u_fine.x))))


def _next_length(previous: SlabSolution, L: float, tol: float) -> SlabSolution:
    """Pinned continuation to the doubled slab, with a full selection as fallback."""
    params = previous.params
    grid = default_grid(L, params.nu, params.chi)
    stretched = WaveParams(chi=params.chi, nu=params.nu, c=params.c, delta=params.delta, L=L)
    sol = solve_pinned_slab(stretched, previous.u, grid=grid)
    if sol.converged:
        return sol
    logger.warning("pinned continuation to L=%g failed (%s); reselecting the speed",
                   L, sol.meta.get('newton_status'))
    return select_speed(params.chi, params.nu, params.delta, L=L, tol=tol, grid=grid).solution


def extend_to_line(chi: float, nu: float, delta: Optional[float] = None,
                   tol: float = DEFAULT_LINE_TOL, L: float = DEFAULT_SLAB_HALF_LENGTH,
                   max_doublings: int = DEFAULT_MAX_DOUBLINGS,
                   window: Tuple[float, float] = DEFAULT_LINE_WINDOW,
                   speed_tol: float = DEFAULT_SPEED_TOL) -> TravelingWave:
    """
    Double L until the speed and the profile on a fixed window stop changing.

    Args:
        chi: Chemotaxis strength
        nu: Kernel length-scale
        delta: Normalization level
        tol: Stabilization tolerance on |dc| and on the window sup distance
        L: Initial half-length
        max_doublings: Doubling cap
        window: Comparison window
        speed_tol: Tolerance passed to select_speed

    Returns:
        TravelingWave

    Raises:
        ConvergenceError: not stabilized within max_doublings; carries the (L, c) history
    """
    current = select_speed(chi, nu, delta, L=L, tol=speed_tol).solution
    history: List[Dict[str, float]] = [{'L': L, 'c': current.params.c}]
    for _ in range(max_doublings):
        L *= 2.0
        nxt = _next_length(current, L, speed_tol)
        dc = abs(nxt.params.c - current.params.c)
        gap = _window_gap(current, nxt, window)
        history.append({'L': L, 'c': nxt.params.c, 'dc': dc, 'window_gap': gap})
        logger.debug("L=%g: c=%.10g dc=%.3e window gap %.3e", L, nxt.params.c, dc, gap)
        current = nxt
        if dc < tol and gap < tol:
            c = current.params.c
            lower, upper = speed_bracket(chi, nu)
            return TravelingWave(
                params=current.params, u=current.u, v=current.v, L_final=L, history=history,
                solution=current,
                checks={
                    'normalized': abs(_mismatch(current)) < max(speed_tol, 1e-6),
                    'in_bracket': lower - speed_tol <= c <= upper + speed_tol,
                    'above_linear_floor': c >= linear_speed_floor(chi) - tol,
                },
            )
    raise ConvergenceError(
        f"speed did not stabilize within {max_doublings} doublings (last L={L:g})", history,
    )


def _half_crossing(u: Field) -> float:
    """Leftmost position where u drops through 1/2."""
    values = u.values
    below = np.nonzero(values <= 0.5)[0]
    if below.size == 0 or below[0] == 0:
        raise DomainError("profile does not cross 1/2 inside the grid")
    i = int(below[0])
    x0, x1 = u.x[i - 1], u.x[i]
    u0, u1 = values[i - 1], values[i]
    return float(x0 + (u0 - 0.5) * (x1 - x0) / (u0 - u1))


def pme_reference(eps: float) -> Callable[[np.ndarray], np.ndarray]:
    """Minimal PME wave with u(0) = 1/2, as a function of position."""
    if eps < 0.5:
        return partial(pushed_wave_profile, eps)
    wave = pme_wave_solve(eps, pm_min_speed(eps))
    return wave.u.at  # type: ignore[return-value]


def _pm_point(nu: float, eps: float, chi: float, L: float, tol: float,
              window: Tuple[float, float]) -> Dict[str, Any]:
    try:
        selection = select_speed(chi, nu, L=L, tol=tol)
        sol = selection.solution
        reference = pme_reference(eps)
        x_half = _half_crossing(sol.u)
        u_win = sol.u.window(x_half + window[0], x_half + window[1])
        distance = float(np.max(np.abs(u_win.values - reference(u_win.x - x_half))))
        c = selection.c
        sup_gap = float(np.max(np.abs(sol.u.values - sol.v.values)))
        scale = (math.sqrt(c) + 1.0) * nu ** 0.125
        return {'nu': nu, 'c': c, 'distance': distance, 'sup_gap': sup_gap,
                'oscillation_C': sup_gap / scale, 'shift': x_half}
    except WaveError as exc:
        return {'nu': nu, 'error': f"{type(exc).__name__}: {exc}"}


def _monotone_approach(errors: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(errors, errors[1:]))


def _check_decreasing(values: Sequence[float], what: str) -> None:
    values = list(values)
    if any(b >= a for a, b in zip(values, values[1:])):
        raise DomainError(f"{what} must be strictly decreasing")


def _raise_partial(study: str, parameters: List[float], speeds: List[float], target: float,
                   distances: List[float], points: List[StudyPoint], failure: Dict[str, Any],
                   parameter: float) -> NoReturn:
    partial_report = ConvergenceReport(
        study=study, parameters=parameters, speeds=speeds, target=target, distances=distances,
        verdict=False, points=points, status=f"failed at {parameter:g}",
    )
    raise StudyError(f"{study} failed at {parameter:g}: {failure['error']}", partial_report)


def pm_limit_study(eps: float, nus: Sequence[float], L: float = DEFAULT_SLAB_HALF_LENGTH,
                   tol: float = DEFAULT_SPEED_TOL, jobs: int = 1,
                   window: Tuple[float, float] = DEFAULT_LINE_WINDOW) -> ConvergenceReport:
    """
    Selected speeds and profiles as nu decreases at |chi| = 1/eps, against the PME minimal wave.

    eps = 0 runs at chi = -1e4. Profiles are aligned at their u = 1/2 crossing and compared on
    the window around it.

    Args:
        eps: PME linear diffusion, >= 0
        nus: Strictly decreasing nu values
        L: Slab half-length
        tol: Speed tolerance
        jobs: Worker count
        window: Comparison window relative to the crossing

    Returns:
        ConvergenceReport; points carry the sup gap |u - v| and its fitted oscillation constant

    Raises:
        StudyError: a point failed; carries the report of the points before it
    """
    if not (eps >= 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be nonnegative, got {eps}")
    nus = [float(nu) for nu in nus]
    _check_decreasing(nus, "nu sequence")
    chi = PM_LIMIT_CHI if eps == 0 else -1.0 / eps
    target = pm_min_speed(eps)
    results = ordered_map(partial(_pm_point, eps=eps, chi=chi, L=L, tol=tol, window=window),
                          nus, jobs)
    parameters: List[float] = []
    speeds: List[float] = []
    distances: List[float] = []
    points: List[StudyPoint] = []
    for r in results:
        if 'error' in r:
            _raise_partial('pm-limit', parameters, speeds, target, distances, points, r, r['nu'])
        parameters.append(r['nu'])
        speeds.append(r['c'])
        distances.append(r['distance'])
        points.append({
            'parameter': r['nu'], 'c': r['c'], 'distance': r['distance'], 'shift': r['shift'],
            'sup_gap': r['sup_gap'], 'oscillation_C': r['oscillation_C'], 'status': 'ok',
        })
    errors = [abs(c - target) for c in speeds]
    verdict = bool(errors and _monotone_approach(errors)
                   and errors[-1] < PM_LIMIT_REL_TOL * target)
    return ConvergenceReport(
        study='pm-limit', parameters=parameters, speeds=speeds, target=target,
        distances=distances, verdict=verdict, points=points,
    )


def _hyp_point(chi: float, nu: float, wave: HypWave, L: float, tol: float,
               window: Tuple[float, float]) -> Dict[str, Any]:
    try:
        selection = select_speed(chi, nu, L=L, tol=tol)
        sol = selection.solution
        qsp = quasi_singular_point(sol)
        radius = max(10.0 * sol.grid.dx, 5.0 / math.sqrt(abs(chi)))
        x = sol.u.x
        keep = ((x >= qsp.location + window[0]) & (x <= qsp.location + window[1])
                & (np.abs(x - qsp.location) > radius))
        if not keep.any():
            raise DomainError("comparison window lies inside the jump neighborhood")
        reference = wave.u_full().at(x[keep] - qsp.location)
        distance = float(np.max(np.abs(sol.u.values[keep] - reference)))
        bracket = check_speed_bracket(nu, selection.c)
        return {
            'chi': chi, 'c': selection.c, 'distance': distance, 'gap': qsp.gap,
            'gap_bound': qsp.bound, 'location': qsp.location, 'qsp_status': qsp.status,
            'checks': {
                'gap_within_bound': qsp.gap <= qsp.bound + sol.grid.dx,
                'interior_maximum': qsp.status == 'ok',
                'in_hyperbolic_bracket': bracket['passed'],
            },
        }
    except WaveError as exc:
        return {'chi': chi, 'error': f"{type(exc).__name__}: {exc}"}


def hyp_limit_study(nu: float, chis: Sequence[float], L: float = DEFAULT_SLAB_HALF_LENGTH,
                    tol: float = DEFAULT_SPEED_TOL, jobs: int = 1,
                    window: Tuple[float, float] = DEFAULT_LINE_WINDOW,
                    wave: Optional[HypWave] = None) -> ConvergenceReport:
    """
    Selected speeds and profiles as chi -> -inf at fixed nu, against the discontinuous wave.

    Each slab profile is aligned at its quasi-singular point and compared with the hyperbolic
    wave off a neighborhood of the jump of radius max(10 dx, 5/sqrt|chi|).

    Args:
        nu: Kernel length-scale
        chis: Values of chi with strictly increasing |chi|
        L: Slab half-length
        tol: Speed tolerance
        jobs: Worker count
        window: Comparison window relative to the quasi-singular point
        wave: Precomputed hyperbolic wave at nu

    Returns:
        ConvergenceReport with target the hyperbolic wave speed

    Raises:
        StudyError: a point failed; carries the report of the points before it
    """
    chis = [float(chi) for chi in chis]
    if any(not chi < 0 for chi in chis):
        raise DomainError("chi values must be negative")
    _check_decreasing(chis, "chi sequence")
    if wave is None:
        wave = construct_discontinuous_wave(nu)
    results = ordered_map(partial(_hyp_point, nu=nu, wave=wave, L=L, tol=tol, window=window),
                          chis, jobs)
    parameters: List[float] = []
    speeds: List[float] = []
    distances: List[float] = []
    points: List[StudyPoint] = []
    for r in results:
        if 'error' in r:
            _raise_partial('hyp-limit', parameters, speeds, wave.c, distances, points, r,
                           r['chi'])
        parameters.append(r['chi'])
        speeds.append(r['c'])
        distances.append(r['distance'])
        points.append({
            'parameter': r['chi'], 'c': r['c'], 'distance': r['distance'], 'gap': r['gap'],
            'gap_bound': r['gap_bound'], 'location': r['location'], 'checks': r['checks'],
            'status': 'ok' if all(r['checks'].values()) else 'check failed',
        })
    verdict = bool(
        distances
        and all(b <= a for a, b in zip(distances, distances[1:]))
        and _monotone_approach([abs(c - wave.c) for c in speeds])
        and all(p['checks']['gap_within_bound'] for p in points)
    )
    return ConvergenceReport(
        study='hyp-limit', parameters=parameters, speeds=speeds, target=wave.c,
        distances=distances, verdict=verdict, points=points,
    )

