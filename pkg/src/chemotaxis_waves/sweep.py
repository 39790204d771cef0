"""
Parameter sweeps, the regime table and deterministic CSV/JSON emission.
"""

import csv
import io
import json
import logging
import math
import uuid
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .config import SweepSpec
from .constants import DEFAULT_LINE_TOL, REGIME_PROBES, REGIME_ROWS, SWEEP_COLUMNS
from .diagnostics import DiagnosticsReport, run_suite
from .errors import DomainError, WaveError
from .hyperbolic_wave import hyp_speed_bracket
from .profile_io import atomic_write_text, format_number
from .slab_solver import default_delta, quasi_singular_point
from .speed_selector import extend_to_line, select_speed
from .types import RegimeRow, SweepRow
from .workers import ordered_map

logger = logging.getLogger(__name__)

# Relative deviation allowed per regime row; the hyperbolic row is an open interval test
REGIME_TOLERANCES: Dict[str, float] = {'pushed': 0.15, 'pulled': 0.10}

SweepTask = Tuple[float, float, Optional[float], float, float, Tuple[str, ...], bool]


def check_output_dir(path: Union[str, Path]) -> Tuple[bool, str]:
    """
    Make sure the output directory exists and accepts files.

    Args:
        path: Output directory

    Returns:
        Tuple of (writable, message)
    """
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return False, f"cannot create output directory {path}: {e.strerror or e}"
    if not path.is_dir():
        return False, f"output path {path} is not a directory"
    probe = path / f".write-test-{uuid.uuid4().hex}"
    try:
        probe.write_text('', encoding='utf-8')
        probe.unlink()
    except OSError as e:
        return False, f"output directory {path} is not writable: {e.strerror or e}"
    return True, f"output directory {path}"


def _failed_row(chi: float, nu: float, delta: Optional[float], status: str) -> SweepRow:
    nan = math.nan
    return {
        'chi': chi, 'nu': nu, 'delta': delta if delta is not None else default_delta(nu),
        'c': nan, 'L_final': nan, 'residual': nan, 'energy_gap': nan, 'oscillation_C': nan,
        'decay_violations': -1, 'structure_violations': -1, 'holder_ok': False,
        'quasi_gap': nan, 'status': status,
    }


def _sweep_point(task: SweepTask) -> SweepRow:
    """Solve and check one point; failures come back as a row with a status."""
    chi, nu, delta, tol, L, checks, extend = task
    try:
        if extend:
            wave = extend_to_line(chi, nu, delta, tol=DEFAULT_LINE_TOL, L=L, speed_tol=tol)
            sol, kind, L_final = wave.solution, 'line', wave.L_final
        else:
            sol, kind, L_final = select_speed(chi, nu, delta, L=L, tol=tol).solution, 'slab', L
        assert sol is not None
        p = sol.params
        report = run_suite(kind, sol.u, sol.v, {'chi': chi, 'nu': nu, 'c': p.c},
                           checks=list(checks))
        failed = [name for name, r in report.checks.items()
                  if r['status'] not in ('skipped', 'measured') and not r['passed']]
        holder = report.checks['holder_l2']
        return {
            'chi': chi, 'nu': nu, 'delta': float(p.delta), 'c': p.c, 'L_final': L_final,
            'residual': sol.residual,
            'energy_gap': _or_nan(report.value('energy_identity', 'gap')),
            'oscillation_C': _or_nan(report.value('oscillation_decay', 'fitted_C')),
            'decay_violations': _count(report, 'exp_decay', 'violations'),
            'structure_violations': _count(report, 'structure', 'monotonicity_violations',
                                           'extremum_violations'),
            'holder_ok': holder['status'] != 'skipped' and holder['passed'],
            'quasi_gap': quasi_singular_point(sol).gap,
            'status': 'ok' if not failed else 'checks failed: ' + ','.join(failed),
        }
    except (WaveError, ArithmeticError, ValueError) as e:
        logger.warning("sweep point chi=%g nu=%g failed: %s", chi, nu, e)
        status = f"{type(e).__name__}: {e}".replace('\n', ' ')
        return _failed_row(chi, nu, delta, status)


def _or_nan(value: Any) -> float:
    return math.nan if value is None else float(value)


def _count(report: DiagnosticsReport, check: str, *keys: str) -> int:
    """Sum of integer measurements, -1 when the check did not run."""
    measured = report.checks[check]['measured']
    if any(measured.get(key) is None for key in keys):
        return -1
    return sum(int(measured[key]) for key in keys)


def run_sweep(spec: SweepSpec) -> List[SweepRow]:
    """
    Select the speed and run the diagnostics at every point of a sweep.

    Args:
        spec: Validated sweep specification; spec.extend doubles L until the wave stabilizes

    Returns:
        One row per point, in the order given
    """
    tasks: List[SweepTask] = [
        (chi, nu, delta, spec.tol, spec.L, tuple(spec.checks), spec.extend)
        for chi, nu, delta in spec.points
    ]
    logger.debug("sweep of %d points on %d workers", len(tasks), spec.jobs)
    return ordered_map(_sweep_point, tasks, spec.jobs)


def predicted_speed(regime: str, chi: float, nu: float) -> Tuple[str, float, float]:
    """
    Predicted unscaled speed of a regime-table row.

    Returns:
        Tuple of (expression, low, high); low == high for the point predictions
    """
    a = abs(chi)
    if regime == 'pushed':
        value = math.sqrt(a) / math.sqrt(2.0) + math.sqrt(2.0) / math.sqrt(a)
        return 'sqrt|chi|/sqrt2 + sqrt2/sqrt|chi|', value, value
    if regime == 'pulled':
        return '2', 2.0, 2.0
    if regime == 'hyperbolic':
        low, high = hyp_speed_bracket(nu)
        s = math.sqrt(a)
        return 'sqrt|chi| (sqrt(nu)/(2nu+1), 1/(2sqrt(nu)))', low * s, high * s
    raise DomainError(f"unknown regime row '{regime}'")


def _regime_point(task: Tuple[str, float, float, float, float]) -> RegimeRow:
    regime, chi, nu, tol, L = task
    description = dict(REGIME_ROWS)[regime]
    expression, low, high = predicted_speed(regime, chi, nu)
    row: RegimeRow = {
        'regime': regime, 'description': description, 'chi': chi, 'nu': nu, 'c': math.nan,
        'c_unscaled': math.nan, 'predicted': expression, 'deviation': math.nan,
        'passed': False, 'status': 'ok',
    }
    try:
        c = select_speed(chi, nu, L=L, tol=tol).c
    except WaveError as e:
        row['status'] = f"{type(e).__name__}: {e}".replace('\n', ' ')
        return row
    c_bar = c * math.sqrt(abs(chi))
    if regime == 'hyperbolic':
        # Distance outside the open bracket, relative to its upper end
        deviation = max(low - c_bar, c_bar - high, 0.0) / high
        passed = low < c_bar < high
    else:
        deviation = abs(c_bar - low) / low
        passed = deviation <= REGIME_TOLERANCES[regime]
    row.update({'c': c, 'c_unscaled': c_bar, 'deviation': deviation, 'passed': passed})
    return row


def regime_table(rows: Sequence[str], tol: float, L: float, jobs: int = 1,
                 probes: Optional[Dict[str, Tuple[float, float]]] = None) -> List[RegimeRow]:
    """
    Measure the unscaled speed c * sqrt(|chi|) at one probe point per regime row.

    Args:
        rows: Regime keys among REGIME_ROWS
        tol: Speed tolerance
        L: Slab half-length
        jobs: Worker count
        probes: (chi, nu) per row; defaults to REGIME_PROBES

    Returns:
        Rows in the order requested
    """
    known = [key for key, _ in REGIME_ROWS]
    unknown = [r for r in rows if r not in known]
    if unknown:
        raise DomainError(f"unknown regime rows: {', '.join(unknown)} (expected {known})")
    probes = dict(REGIME_PROBES, **(probes or {}))
    tasks = [(r, probes[r][0], probes[r][1], tol, L) for r in rows]
    return ordered_map(_regime_point, tasks, jobs)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format_number(value) if math.isfinite(value) else ''
    if value is None:
        return ''
    return str(value)


def rows_to_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str] = SWEEP_COLUMNS) -> str:
    """CSV text with a fixed column order and round-trip number formatting."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    return buffer.getvalue()


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, 'item'):
        return _json_safe(obj.item())
    return obj


def to_json(obj: Any) -> str:
    """Sorted-key JSON with non-finite numbers as null."""
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True, allow_nan=False) + '\n'


def write_csv(rows: Sequence[Dict[str, Any]], path: Union[str, Path],
              columns: Sequence[str] = SWEEP_COLUMNS) -> Path:
    atomic_write_text(path, rows_to_csv(rows, columns))
    return Path(path)


def write_json(obj: Any, path: Union[str, Path]) -> Path:
    atomic_write_text(path, to_json(obj))
    return Path(path)
