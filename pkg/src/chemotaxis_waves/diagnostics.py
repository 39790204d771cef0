"""
Quantitative identities, bounds and structural properties of wave profiles as named checks.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .constants import (
    DECAY_A0,
    DECAY_FIT_FLOOR,
    DECAY_SLACK,
    HOLDER_LAG_COUNT,
    HOLDER_MAX_DISTANCE,
    MIN_WINDOW_POINTS,
    OSCILLATION_C_THRESHOLD,
    PLATEAU_TOL,
    STRUCTURE_TOL,
    U_FLOOR,
)
from .errors import DomainError, InsufficientResolutionError, WaveError
from .grid_kernel import Field, convolve_phi
from .pme_wave import pme_residual
from .slab_solver import tw_residual
from .types import CheckResult

logger = logging.getLogger(__name__)

CHECK_NAMES = ['energy_identity', 'oscillation_decay', 'exp_decay', 'structure', 'holder_l2',
               'residual']
PROFILE_KINDS = ('slab', 'line', 'hyperbolic', 'pme')
ENERGY_GAP_TOL = 1e-2
PHI_ROUTE_TOL = 1e-3


class EnergyIdentity(NamedTuple):
    """Terms of the energy identity and its gap to the speed."""

    lhs: float
    c: float
    gap: float
    kernel_term: float
    diffusion_term: float
    reaction_term: float
    kernel_term_phi: Optional[float]
    relative: bool


class OscillationDecay(NamedTuple):
    worst_oscillation: float
    location: float
    sup_gap: float
    scale: float
    fitted_C: float


class ExpDecay(NamedTuple):
    violations: List[float]
    checked: int
    A: float
    mu: float
    theta: Optional[float]
    implied_rate: float
    status: str


class Structure(NamedTuple):
    x_d: Optional[float]
    monotonicity_violations: List[int]
    extremum_violations: List[int]
    max_violation: float


class HolderL2(NamedTuple):
    seminorm: float
    slope_l2: float
    bound_seminorm: float
    bound_l2: float


def _slope(f: Field) -> np.ndarray:
    return np.gradient(f.values, f.grid.dx)


def _integral(values: np.ndarray, dx: float) -> float:
    return float(trapezoid(values, dx=dx))


def energy_identity(u: Field, v: Field, chi: Optional[float], nu: float, c: float,
                    phi_route: bool = False) -> EnergyIdentity:
    """
    int (phi*u_x)^2 + (1/|chi|) int u_x^2/u + int |u (1-u) log u| against c.

    The first term is computed as int v_x u_x; with phi_route it is also computed by
    convolving u_x with the phi kernel. chi=None drops the diffusion term.

    Returns:
        EnergyIdentity; the gap is relative to c unless c = 0
    """
    if u.grid != v.grid:
        raise DomainError("u and v must share a grid")
    dx = u.grid.dx
    ux = _slope(u)
    kernel = _integral(_slope(v) * ux, dx)
    diffusion = 0.0
    if chi is not None:
        root = np.sqrt(np.clip(u.values, 0.0, None))
        diffusion = 4.0 * _integral(np.gradient(root, dx) ** 2, dx) / abs(chi)
    uu = u.values
    reaction = _integral(np.abs(uu * (1.0 - uu) * np.log(np.maximum(uu, U_FLOOR))), dx)
    lhs = kernel + diffusion + reaction
    relative = c != 0
    gap = abs(lhs - c) / abs(c) if relative else abs(lhs - c)
    kernel_phi = None
    if phi_route:
        w = convolve_phi(Field(u.grid, ux), nu, 0.0, 0.0, margin=True)
        kernel_phi = _integral(w.values ** 2, dx)
    return EnergyIdentity(lhs, c, gap, kernel, diffusion, reaction, kernel_phi, relative)


def oscillation_decay(u: Field, v: Field, nu: float, c: float) -> OscillationDecay:
    """
    Worst oscillation of u over windows of half-width nu^(1/4), the sup gap |u - v| and the
    smallest C with both below C (sqrt(c) + 1) nu^(1/8).

    Raises:
        InsufficientResolutionError: a window holds fewer than 8 nodes
    """
    if u.grid != v.grid:
        raise DomainError("u and v must share a grid")
    dx = u.grid.dx
    r = int(math.floor(nu ** 0.25 / dx + 1e-9))
    if 2 * r + 1 < MIN_WINDOW_POINTS:
        raise InsufficientResolutionError(
            f"window of half-width nu^(1/4) = {nu ** 0.25:.3g} holds {2 * r + 1} nodes "
            f"at dx = {dx:.3g}; need {MIN_WINDOW_POINTS}"
        )
    sup_gap = float(np.max(np.abs(u.values - v.values)))
    scale = (math.sqrt(max(c, 0.0)) + 1.0) * nu ** 0.125
    n = u.grid.n
    if n < 2 * r + 1:
        osc = np.array([np.ptp(u.values)])
        centres = np.array([n // 2])
    else:
        size = 2 * r + 1
        osc = (maximum_filter1d(u.values, size) - minimum_filter1d(u.values, size))[r:n - r]
        centres = np.arange(r, n - r)
    k = int(np.argmax(osc))
    worst = float(osc[k])
    return OscillationDecay(worst, float(u.x[centres[k]]), sup_gap, scale,
                            max(worst, sup_gap) / scale)


def oscillation_slope(nus: Sequence[float], gaps: Sequence[float]) -> float:
    """Least-squares slope of log |u - v|_inf against log nu."""
    nus_a = np.asarray(nus, dtype=float)
    gaps_a = np.asarray(gaps, dtype=float)
    if nus_a.size < 2 or nus_a.size != gaps_a.size:
        raise DomainError("need at least two (nu, gap) pairs of equal count")
    if np.any(nus_a <= 0) or np.any(gaps_a <= 0):
        raise DomainError("nu values and gaps must be positive")
    return float(np.polyfit(np.log(nus_a), np.log(gaps_a), 1)[0])


def decay_constants(chi: Optional[float], nu: float, c: float) -> Dict[str, float]:
    """
    Step length A sqrt(nu) and contraction mu of the exponential decay estimate.

    A = max(4 log 8, 1/nu, 64 c (2 nu + 1)/nu)
    mu = min(1/8, 1/(16 c (2 nu + 1)), |chi| A nu / 2), the last one dropped when chi is None
    """
    A = max(DECAY_A0, 1.0 / nu, 64.0 * c * (2.0 * nu + 1.0) / nu)
    candidates = [0.125]
    if c > 0:
        candidates.append(1.0 / (16.0 * c * (2.0 * nu + 1.0)))
    if chi is not None:
        candidates.append(abs(chi) * A * nu / 2.0)
    return {'A': A, 'mu': min(candidates), 'step': A * math.sqrt(nu)}


def _crossing(u: Field, level: float) -> Optional[float]:
    """First position where u drops below level, interpolated."""
    below = np.nonzero(u.values < level)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(u.x[0])
    u0, u1 = u.values[i - 1], u.values[i]
    x0 = u.x[i - 1]
    return float(x0 + (u0 - level) / (u0 - u1) * u.grid.dx)


def fit_decay_rate(u: Field, start: float = -math.inf) -> Optional[float]:
    """Exponential rate fitted to log u on x >= start where u exceeds the fit floor."""
    mask = (u.x >= start) & (u.values > DECAY_FIT_FLOOR)
    if np.count_nonzero(mask) < 3:
        return None
    slope = np.polyfit(u.x[mask], np.log(u.values[mask]), 1)[0]
    return float(-slope)


def exp_decay_check(u: Field, v: Optional[Field], chi: Optional[float], nu: float, c: float,
                    far_right: Optional[float] = 0.0) -> ExpDecay:
    """
    Step inequality u(x0 + A sqrt(nu)) <= (1 - mu) u(x0) for every node x0 right of the point
    where u = nu/(nu + 1), plus the fitted tail rate.

    Args:
        u: Profile
        v: Signal (unused by the inequality; kept for a uniform check signature)
        chi: Chemotaxis strength, None for hyperbolic profiles
        nu: Kernel length-scale
        c: Speed
        far_right: Value of u right of the grid; None when undeclared

    Returns:
        ExpDecay with violating positions, relative to the normalization point
    """
    constants = decay_constants(chi, nu, c)
    A, mu, step = constants['A'], constants['mu'], constants['step']
    implied = -math.log1p(-mu) / step
    x_t = _crossing(u, nu / (nu + 1.0))
    if x_t is None:
        return ExpDecay([], 0, A, mu, None, implied, 'no crossing of nu/(nu+1)')
    x = u.x
    idx = np.nonzero(x >= x_t)[0]
    if far_right is None and u.grid.x_max - x_t < 3.0 * step:
        return ExpDecay([], 0, A, mu, fit_decay_rate(u, x_t), implied, 'insufficient-domain')
    targets = x[idx] + step
    if far_right is None:
        inside = targets <= u.grid.x_max
        idx, targets = idx[inside], targets[inside]
        ahead = np.interp(targets, x, u.values)
    else:
        ahead = np.interp(targets, x, u.values, right=far_right)
    here = u.values[idx]
    bad = ahead > (1.0 - mu) * here + DECAY_SLACK
    violations = [float(xi - x_t) for xi in x[idx][bad]]
    theta = fit_decay_rate(u, x_t)
    status = 'ok' if not violations else f'{len(violations)} violations'
    return ExpDecay(violations, int(idx.size), A, mu, theta, implied, status)


def _extrema(u: np.ndarray) -> Dict[str, np.ndarray]:
    """Turning nodes: steps within PLATEAU_TOL carry no sign, so plateaus never turn."""
    step = np.diff(u)
    moving = np.nonzero(np.abs(step) > PLATEAU_TOL)[0]
    signs = np.sign(step[moving])
    turns = np.nonzero(signs[1:] != signs[:-1])[0]
    # the extremum sits where the new direction starts
    nodes = moving[turns + 1]
    falling = signs[turns] < 0
    return {'min': nodes[falling], 'max': nodes[~falling]}


def structure_checks(u: Field, v: Field, nu: float, tol: float = STRUCTURE_TOL) -> Structure:
    """
    Monotonicity right of x_d = inf{u < 2 nu/(2 nu + 1)} and the local extremum constraints:
    minima satisfy u >= (nu + v)/(nu + 1), maxima u <= (nu + v)/(nu + 1).

    Returns:
        Structure with offending node indices and the largest violation
    """
    if u.grid != v.grid:
        raise DomainError("u and v must share a grid")
    uu, vv = u.values, v.values
    level = 2.0 * nu / (2.0 * nu + 1.0)
    below = np.nonzero(uu < level)[0]
    worst = 0.0
    mono: List[int] = []
    x_d = None
    if below.size:
        i_d = int(below[0])
        x_d = float(u.x[i_d])
        rises = np.diff(uu[i_d:])
        bad = np.nonzero(rises > tol)[0]
        mono = [int(i_d + k + 1) for k in bad]
        if rises.size:
            worst = max(worst, float(rises.max()))
    carrying = (nu + vv) / (nu + 1.0)
    ext = _extrema(uu)
    excess = np.concatenate([carrying[ext['min']] - uu[ext['min']],
                             uu[ext['max']] - carrying[ext['max']]])
    indices = np.concatenate([ext['min'], ext['max']])
    flagged = sorted(int(i) for i in indices[excess > tol])
    if excess.size:
        worst = max(worst, float(excess.max()))
    return Structure(x_d, mono, flagged, max(worst, 0.0))


def holder_l2_check(v: Field, c: float, max_distance: float = HOLDER_MAX_DISTANCE,
                    lags: int = HOLDER_LAG_COUNT) -> HolderL2:
    """
    Discrete C^(1/2) seminorm over pairs within max_distance and int v_x^2, against sqrt(c)
    and c.

    Pair separations are sampled geometrically between dx and max_distance.
    """
    dx = v.grid.dx
    values = v.values
    n_max = min(int(max_distance / dx), v.grid.n - 1)
    seminorm = 0.0
    if n_max >= 1:
        for k in np.unique(np.geomspace(1, n_max, num=min(lags, n_max)).astype(int)):
            ratio = np.abs(values[k:] - values[:-k]) / math.sqrt(k * dx)
            seminorm = max(seminorm, float(ratio.max()))
    slope_l2 = _integral(_slope(v) ** 2, dx)
    return HolderL2(seminorm, slope_l2, math.sqrt(max(c, 0.0)), c)


@dataclass
class DiagnosticsReport:
    """Every check of one run, each present exactly once."""

    kind: str
    params: Dict[str, Any]
    checks: Dict[str, CheckResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r['passed'] for r in self.checks.values() if r['status'] != 'skipped')

    def value(self, check: str, key: str) -> Any:
        return self.checks[check]['measured'].get(key)

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'params': dict(self.params), 'passed': self.passed,
                'checks': {name: dict(r) for name, r in self.checks.items()}}


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _result(name: str, passed: bool, status: str, measured: Dict[str, Any],
            bound: Dict[str, Any]) -> CheckResult:
    return {
        'name': name, 'passed': bool(passed), 'status': status,
        'measured': {k: _finite(v) for k, v in measured.items()},
        'bound': {k: _finite(v) for k, v in bound.items()},
    }


def _skipped(name: str, reason: str) -> CheckResult:
    return {'name': name, 'passed': False, 'status': 'skipped',
            'measured': {'reason': reason}, 'bound': {}}


def _energy(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if v is None:
        return _skipped('energy_identity', 'no signal field')
    chi = None if kind == 'hyperbolic' else p['chi']
    e = energy_identity(u, v, chi, p['nu'], p['c'], phi_route=bool(p.get('phi_route', False)))
    passed = e.gap < ENERGY_GAP_TOL
    measured: Dict[str, Any] = {'lhs': e.lhs, 'gap': e.gap, 'kernel_term': e.kernel_term,
                                'diffusion_term': e.diffusion_term,
                                'reaction_term': e.reaction_term, 'relative': e.relative}
    if e.kernel_term_phi is not None:
        route_gap = abs(e.kernel_term_phi - e.kernel_term)
        measured.update({'kernel_term_phi': e.kernel_term_phi, 'route_gap': route_gap})
        passed = passed and route_gap < PHI_ROUTE_TOL
    return _result('energy_identity', passed, 'ok' if passed else 'violated', measured,
                   {'gap': ENERGY_GAP_TOL, 'c': e.c, 'route_gap': PHI_ROUTE_TOL})


def _oscillation(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if v is None:
        return _skipped('oscillation_decay', 'no signal field')
    try:
        o = oscillation_decay(u, v, p['nu'], p['c'])
    except InsufficientResolutionError as exc:
        return _skipped('oscillation_decay', str(exc))
    passed = o.fitted_C <= OSCILLATION_C_THRESHOLD
    return _result('oscillation_decay', passed, 'ok' if passed else 'violated',
                   {'worst_oscillation': o.worst_oscillation, 'location': o.location,
                    'sup_gap': o.sup_gap, 'fitted_C': o.fitted_C},
                   {'scale': o.scale, 'C_max': OSCILLATION_C_THRESHOLD,
                    'C_max_is_convention': True})


def _decay(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if kind == 'pme':
        return _skipped('exp_decay', 'not defined for porous-medium profiles')
    chi = None if kind == 'hyperbolic' else p['chi']
    d = exp_decay_check(u, v, chi, p['nu'], p['c'], far_right=p.get('far_right', 0.0))
    if d.status == 'insufficient-domain':
        return _result('exp_decay', False, d.status, {'checked': 0},
                       {'A': d.A, 'mu': d.mu})
    theta_ok = d.theta is None or d.theta > 0
    passed = not d.violations and theta_ok
    return _result('exp_decay', passed, d.status,
                   {'violations': len(d.violations), 'checked': d.checked, 'theta': d.theta,
                    'first_violation': d.violations[0] if d.violations else None},
                   {'A': d.A, 'mu': d.mu, 'implied_rate': d.implied_rate})


def _structure(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if v is None:
        return _skipped('structure', 'no signal field')
    s = structure_checks(u, v, p['nu'])
    count = len(s.monotonicity_violations) + len(s.extremum_violations)
    return _result('structure', count == 0, 'ok' if count == 0 else f'{count} violations',
                   {'x_d': s.x_d, 'monotonicity_violations': len(s.monotonicity_violations),
                    'extremum_violations': len(s.extremum_violations),
                    'max_violation': s.max_violation},
                   {'tol': STRUCTURE_TOL})


def _holder(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if v is None:
        return _skipped('holder_l2', 'no signal field')
    h = holder_l2_check(v, p['c'])
    passed = h.seminorm <= h.bound_seminorm and h.slope_l2 <= h.bound_l2
    return _result('holder_l2', passed, 'ok' if passed else 'violated',
                   {'seminorm': h.seminorm, 'slope_l2': h.slope_l2},
                   {'seminorm': h.bound_seminorm, 'slope_l2': h.bound_l2})


def _residual(kind: str, u: Field, v: Optional[Field], p: Mapping[str, Any]) -> CheckResult:
    if kind == 'pme':
        defect = pme_residual(u, p['c'], p['eps'])
        passed = defect < 1e-6
        return _result('residual', passed, 'ok' if passed else 'violated',
                       {'distributional_defect': defect}, {'tol': 1e-6})
    if kind == 'hyperbolic' or v is None:
        return _skipped('residual', 'no second-order equation for this profile kind')
    tw, poisson = tw_residual(u, v, p['chi'], p['nu'], p['c'])
    return _result('residual', True, 'measured',
                   {'tw': float(np.max(np.abs(tw.values))),
                    'poisson': float(np.max(np.abs(poisson.values)))}, {})


_CHECKS: Dict[str, Callable[[str, Field, Optional[Field], Mapping[str, Any]], CheckResult]] = {
    'energy_identity': _energy,
    'oscillation_decay': _oscillation,
    'exp_decay': _decay,
    'structure': _structure,
    'holder_l2': _holder,
    'residual': _residual,
}


def run_suite(kind: str, u: Field, v: Optional[Field], params: Mapping[str, Any],
              checks: Optional[Sequence[str]] = None) -> DiagnosticsReport:
    """
    Apply every check that makes sense for the profile kind.

    Args:
        kind: 'slab', 'line', 'hyperbolic' or 'pme'
        u: Profile
        v: Signal, None for porous-medium profiles
        params: chi, nu, c (eps for 'pme'); optional far_right and phi_route
        checks: Subset of CHECK_NAMES to run; the others are recorded as skipped

    Returns:
        DiagnosticsReport with one entry per check name
    """
    if kind not in PROFILE_KINDS:
        raise DomainError(f"unknown profile kind '{kind}' (expected one of {PROFILE_KINDS})")
    selected = list(CHECK_NAMES) if checks is None else list(checks)
    unknown = [name for name in selected if name not in _CHECKS]
    if unknown:
        raise DomainError(f"unknown checks: {', '.join(unknown)}")
    report = DiagnosticsReport(kind=kind, params=dict(params))
    for name in CHECK_NAMES:
        if name not in selected:
            report.checks[name] = _skipped(name, 'not selected')
            continue
        try:
            report.checks[name] = _CHECKS[name](kind, u, v, params)
        except WaveError as exc:
            logger.warning("check %s failed: %s", name, exc)
            report.checks[name] = _result(name, False, f'error: {exc}', {}, {})
    return report
