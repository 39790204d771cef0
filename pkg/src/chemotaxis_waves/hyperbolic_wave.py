"""
Discontinuous traveling waves of the hyperbolic chemotaxis FKPP model.

Left of the jump at x = 0 the profile solves the first-order equation

    u' = -u ((nu + v)/nu - ((nu + 1)/nu) u) / (c + v'),   v = K * u_bar,

with u(0-) = (nu + v(0))/(nu + 1), c = v(0)/sqrt(nu) and u = 0 on (0, inf).
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .constants import (
    DEFAULT_HYP_DAMPING,
    DEFAULT_HYP_ETA,
    DEFAULT_HYP_GRID_DIVISOR,
    DEFAULT_HYP_MAX_ITER,
    DEFAULT_HYP_TOL,
    DEFAULT_ODE_ATOL,
    DEFAULT_ODE_RTOL,
    HYP_DOMAIN_SCALE,
)
from .errors import ConvergenceError, DomainError, SingularInteriorPointError, WaveError
from .grid_kernel import Field, UniformGrid, convolve_K_with_slope
from .pme_wave import sharp_wave
from .types import CheckResult, ConvergenceReport, StudyPoint
from .workers import ordered_map

logger = logging.getLogger(__name__)

PME_LIMIT_SPEED = 1.0 / math.sqrt(2.0)
LIMIT_TOLERANCE = 0.05


@dataclass
class HypWave:
    """Discontinuous wave with its jump at x = 0."""

    nu: float
    c: float
    u_left: Field
    v: Field
    v_x: Field
    jump_value: float
    fixed_point_gap: float
    iterations: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def X(self) -> float:
        return -self.u_left.grid.x_min

    @property
    def v0(self) -> float:
        return float(self.v.values[self.u_left.grid.n - 1])

    def v_tail(self, x: np.ndarray) -> np.ndarray:
        """Closed-form signal c sqrt(nu) exp(-x/sqrt(nu)) right of the jump."""
        return self.c * math.sqrt(self.nu) * np.exp(-np.asarray(x) / math.sqrt(self.nu))

    def u_full(self) -> Field:
        """Profile on the grid of v, zero right of the jump."""
        values = np.zeros(self.v.grid.n)
        values[:self.u_left.grid.n] = self.u_left.values
        return Field(self.v.grid, values, {'jump': 0.0})


def hyp_speed_bracket(nu: float) -> Tuple[float, float]:
    """Open interval (sqrt(nu)/(2 nu + 1), 1/(2 sqrt(nu))) holding the wave speed."""
    if not nu > 0:
        raise DomainError(f"nu must be positive, got {nu}")
    s = math.sqrt(nu)
    return s / (2.0 * nu + 1.0), 0.5 / s


def hyp_speed_floor() -> float:
    """Speed floor sqrt(log(4/3)/48) valid uniformly as nu -> 0."""
    return math.sqrt(math.log(4.0 / 3.0) / 48.0)


def check_speed_bracket(nu: float, c: float) -> CheckResult:
    """
    Strict membership of c in the hyperbolic speed interval.

    Returns:
        CheckResult with the two margins
    """
    lower, upper = hyp_speed_bracket(nu)
    inside = lower < c < upper
    return {
        'name': 'speed_bracket',
        'passed': inside,
        'status': 'inside' if inside else 'outside',
        'measured': {'c': c, 'margin_lower': c - lower, 'margin_upper': upper - c},
        'bound': {'lower': lower, 'upper': upper},
    }


def _hyp_grid(nu: float) -> UniformGrid:
    s = math.sqrt(nu)
    X = HYP_DOMAIN_SCALE * (s + 1.0)
    dx = min(s, 1.0) / DEFAULT_HYP_GRID_DIVISOR
    n = int(math.ceil(X / dx)) + 1
    return UniformGrid(-(n - 1) * dx, dx, n)


def _initial_profile(nu: float, grid: UniformGrid) -> np.ndarray:
    """Exponential approach to 1 from a jump at the guessed carrying value."""
    lower, upper = hyp_speed_bracket(nu)
    c_guess = PME_LIMIT_SPEED if lower < PME_LIMIT_SPEED < upper else 0.5 * (lower + upper)
    s = math.sqrt(nu)
    j0 = (nu + c_guess * s) / (nu + 1.0)
    length = max(1.0 / math.sqrt(2.0), 4.0 * s * (1.0 - j0) / j0)
    return 1.0 - (1.0 - j0) * np.exp(grid.x / length)


class _Sweep:
    """One backward integration of the left profile for a frozen signal."""

    def __init__(self, nu: float, grid: UniformGrid, u: np.ndarray, eta: float):
        self.nu = nu
        self.grid = grid
        s = math.sqrt(nu)
        v, v_x = convolve_K_with_slope(Field(grid, u), nu, 1.0, 0.0)
        self.v, self.v_x = v, v_x
        self.v0 = float(v.values[-1])
        self.c = self.v0 / s
        self.jump_value = (nu + self.v0) / (nu + 1.0)
        x = grid.x
        d = self.c + v_x.values
        bad = np.nonzero(d[:-1] <= 0.0)[0]
        if bad.size:
            raise SingularInteriorPointError(
                f"c + v_x vanishes at x = {x[bad[-1]]:.6g} inside the left profile",
                location=float(x[bad[-1]]),
            )
        d[-1] = 0.0
        self.d = CubicSpline(x, d)
        self.g = CubicSpline(x, (nu + v.values) / (nu + 1.0))
        self.eta = eta

    def integrate(self) -> np.ndarray:
        k = (self.nu + 1.0) / self.nu
        d, g = self.d, self.g

        def rhs(x: float, y: np.ndarray) -> np.ndarray:
            return -k * y * (g(x) - y) / d(x)

        x = self.grid.x
        start = -min(1e-3 * self.grid.dx, 1e-6)
        sol = solve_ivp(rhs, (start, x[0]), [self.jump_value - self.eta], method='RK45',
                        t_eval=x[:-1][::-1], rtol=DEFAULT_ODE_RTOL, atol=DEFAULT_ODE_ATOL)
        if not sol.success or sol.y.shape[1] != self.grid.n - 1:
            raise ConvergenceError(f"backward integration failed: {sol.message}")
        out = np.empty(self.grid.n)
        out[:-1] = sol.y[0][::-1]
        out[-1] = self.jump_value
        return out


def _assemble(nu: float, sweep: _Sweep, u_left: np.ndarray, gap: float, iterations: int,
              history: List[float], tol: float) -> HypWave:
    grid = sweep.grid
    s = math.sqrt(nu)
    n = grid.n
    full = UniformGrid(grid.x_min, grid.dx, 2 * n - 1)
    right = grid.dx * np.arange(1, n)
    v = np.concatenate([sweep.v.values, sweep.v0 * np.exp(-right / s)])
    v_x = np.concatenate([sweep.v_x.values, -sweep.c * np.exp(-right / s)])
    return HypWave(
        nu=nu, c=sweep.c, u_left=Field(grid, u_left), v=Field(full, v), v_x=Field(full, v_x),
        jump_value=sweep.jump_value, fixed_point_gap=gap, iterations=iterations,
        meta={'tol': tol, 'gap_history': history, 'eta': sweep.eta},
    )


def construct_discontinuous_wave(nu: float, tol: float = DEFAULT_HYP_TOL,
                                 max_iter: int = DEFAULT_HYP_MAX_ITER,
                                 damping: float = DEFAULT_HYP_DAMPING,
                                 eta: float = DEFAULT_HYP_ETA,
                                 grid: Optional[UniformGrid] = None) -> HypWave:
    """
    Damped fixed point on the left profile of the discontinuous wave.

    Each sweep computes v = K * u_bar (u_bar = 1 left of the grid, 0 right of the jump), sets
    c = v(0)/sqrt(nu) and the jump value, and integrates the profile equation backward from
    the jump. The returned profile is the last sweep output and v is the field it was built on.

    Args:
        nu: Kernel length-scale
        tol: Sup-norm tolerance on the sweep change
        max_iter: Sweep cap
        damping: Initial relaxation weight, halved whenever the change grows
        eta: Offset below the jump value where integration starts
        grid: Grid on [-X, 0]; defaults to X = 40 sqrt(nu) + 40, dx = min(sqrt(nu), 1)/40

    Returns:
        HypWave

    Raises:
        SingularInteriorPointError: c + v_x <= 0 inside the left profile
        ConvergenceError: no fixed point within max_iter sweeps
    """
    if not (nu > 0 and math.isfinite(nu)):
        raise DomainError(f"nu must be positive, got {nu}")
    if grid is None:
        grid = _hyp_grid(nu)
    u = _initial_profile(nu, grid)
    omega = damping
    previous = math.inf
    history: List[float] = []
    for iteration in range(1, max_iter + 1):
        sweep = _Sweep(nu, grid, u, eta)
        u_new = sweep.integrate()
        gap = float(np.max(np.abs(u_new - u)))
        history.append(gap)
        logger.debug("hyp sweep %d: c=%.8f gap %.3e omega %.3g", iteration, sweep.c, gap, omega)
        if gap < tol:
            return _assemble(nu, sweep, u_new, gap, iteration, history, tol)
        if gap > previous:
            omega *= 0.5
        previous = gap
        u = (1.0 - omega) * u + omega * u_new
    raise ConvergenceError(
        f"hyperbolic wave did not converge in {max_iter} sweeps (gap {history[-1]:.3e})",
        history,
    )


def jump_check(wave: HypWave, tol: Optional[float] = None) -> Dict[str, CheckResult]:
    """
    Jump relation, speed identities, right tail, v(0) floor, left limit and the sign of c + v_x.

    The signal is recomputed from the returned left profile, so the identities test that
    profile and not the signal of the sweep that produced it.

    Args:
        wave: Constructed wave
        tol: Identity tolerance; defaults to 10 times the construction tolerance

    Returns:
        Check results keyed by name
    """
    if tol is None:
        tol = 10.0 * float(wave.meta.get('tol', DEFAULT_HYP_TOL))
    nu, c = wave.nu, wave.c
    s = math.sqrt(nu)
    n_left = wave.u_left.grid.n
    v, v_x = convolve_K_with_slope(wave.u_left, nu, 1.0, 0.0)
    v0 = float(v.values[-1])
    x_right = wave.v.x[n_left:]
    d_left = c + v_x.values[:-1]

    def result(name: str, passed: bool, measured: Dict[str, Any],
               bound: Dict[str, Any]) -> CheckResult:
        return {'name': name, 'passed': bool(passed), 'status': 'ok' if passed else 'violated',
                'measured': measured, 'bound': bound}

    jump_gap = abs(wave.u_left.values[-1] - (nu + v0) / (nu + 1.0))
    speed_gap = abs(c * s - v0)
    slope_gap = abs(v_x.values[-1] + c)
    # u = 0 right of the jump, so v decays there as v(0) exp(-x/sqrt(nu))
    tail_gap = float(np.max(np.abs(v0 * np.exp(-x_right / s) - wave.v_tail(x_right)))) \
        if x_right.size else 0.0
    left_gap = abs(wave.u_left.values[0] - 1.0)
    min_drift = float(d_left.min())
    return {
        'jump_relation': result('jump_relation', jump_gap < tol,
                                {'gap': jump_gap}, {'tol': tol}),
        'speed_identity': result('speed_identity', speed_gap < tol,
                                 {'gap': speed_gap, 'v0': v0}, {'tol': tol}),
        'slope_at_jump': result('slope_at_jump', slope_gap < tol,
                                {'gap': slope_gap}, {'tol': tol}),
        'right_tail': result('right_tail', tail_gap < tol, {'gap': tail_gap}, {'tol': tol}),
        'v0_lower_bound': result('v0_lower_bound', v0 >= nu / (2.0 * nu + 1.0),
                                 {'v0': v0}, {'lower': nu / (2.0 * nu + 1.0)}),
        'left_limit': result('left_limit', left_gap < 1e-3, {'gap': left_gap}, {'tol': 1e-3}),
        'no_interior_singularity': result('no_interior_singularity', min_drift > 0.0,
                                          {'min_drift': min_drift}, {'lower': 0.0}),
    }


@dataclass
class OracleTrace:
    """Output of the explicit-formula integration."""

    u: Field
    status: str
    limits: Dict[str, str]
    t_range: Tuple[float, float]


def _leave_left(x_lo: float, _: float, y: np.ndarray) -> float:
    return y[0] - x_lo


def _leave_right(x_hi: float, _: float, y: np.ndarray) -> float:
    return y[0] - x_hi


def explicit_solution_oracle(v: Field, c: float, x_m: float, u_m: float,
                             t_span: Tuple[float, float], nu: float,
                             v_x: Optional[Field] = None) -> OracleTrace:
    """
    Evaluate the logistic-type closed form of the profile along the characteristic tau(t).

    With tau' = -c - v'(tau), tau(0) = x_m, a = (nu + v(tau))/nu and b = (nu + 1)/nu,

        t >= 0:  u = u_m / (exp(-I) + u_m b J),      I' = a, J' = 1 - a J,
        t <= 0:  u = u_m exp(I) / (1 - u_m b K),     K' = -exp(I),

    which is the explicit solution written without overflowing exponentials.

    Args:
        v: Signal samples
        c: Speed
        x_m: Starting position, interior to the grid of v
        u_m: Profile value at x_m, >= 0
        t_span: (t_min <= 0, t_max >= 0)
        nu: Kernel length-scale
        v_x: Slope samples; defaults to the derivative of the spline of v

    Returns:
        OracleTrace with the profile resampled on the grid nodes the trajectory visits
    """
    if u_m < 0:
        raise DomainError(f"u_m must be nonnegative, got {u_m}")
    x_lo, x_hi = v.grid.x_min, v.grid.x_max
    if not x_lo < x_m < x_hi:
        raise DomainError(f"x_m = {x_m} is not interior to [{x_lo}, {x_hi}]")
    t_min, t_max = t_span
    if t_min > 0 or t_max < 0:
        raise DomainError("t_span must contain 0")
    v_spline = CubicSpline(v.x, v.values)
    slope = CubicSpline(v_x.x, v_x.values) if v_x is not None else v_spline.derivative()
    b = (nu + 1.0) / nu

    def drift(tau: float) -> float:
        return -(c + float(slope(tau)))

    def forward(_: float, y: np.ndarray) -> List[float]:
        a = (nu + float(v_spline(y[0]))) / nu
        return [drift(y[0]), a, 1.0 - a * y[2]]

    def backward(_: float, y: np.ndarray) -> List[float]:
        a = (nu + float(v_spline(y[0]))) / nu
        return [drift(y[0]), a, -math.exp(y[1])]

    def blow_up(_: float, y: np.ndarray) -> float:
        return 1.0 - u_m * b * y[2]

    left = partial(_leave_left, x_lo)
    right = partial(_leave_right, x_hi)
    for event in (left, right, blow_up):
        event.terminal = True  # type: ignore[attr-defined]

    status = 'complete'
    pieces = []
    for span, rhs, events in (((0.0, t_max), forward, (left, right)),
                              ((0.0, t_min), backward, (left, right, blow_up))):
        if span[1] == 0.0:
            continue
        sol = solve_ivp(rhs, span, [x_m, 0.0, 0.0], method='RK45', events=events,
                        dense_output=True, rtol=DEFAULT_ODE_RTOL, atol=DEFAULT_ODE_ATOL)
        if not sol.success:
            raise WaveError(f"oracle integration failed: {sol.message}")
        if sol.status == 1:
            fired = [k for k, te in enumerate(sol.t_events) if te.size]
            status = 'blow-up' if 2 in fired else 'truncated'
        pieces.append((sol, rhs is forward))

    def profile(state: np.ndarray, is_forward: bool) -> np.ndarray:
        tau, I, Q = state
        if is_forward:
            return u_m / (np.exp(-I) + u_m * b * Q)
        return u_m * np.exp(I) / (1.0 - u_m * b * Q)

    nodes: Dict[int, float] = {}
    grid_x = v.x
    ends: Dict[str, Tuple[float, float]] = {}
    t_lo = t_hi = 0.0
    for sol, is_forward in pieces:
        taus = sol.y[0]
        ts = sol.t
        t_lo, t_hi = min(t_lo, ts.min()), max(t_hi, ts.max())
        end_tau = float(taus[-1])
        ends['left' if end_tau < x_m else 'right'] = (end_tau, float(profile(sol.y[:, -1],
                                                                            is_forward)))
        lo, hi = min(taus.min(), x_m), max(taus.max(), x_m)
        idx = np.nonzero((grid_x >= lo) & (grid_x <= hi))[0]
        order = np.argsort(taus)
        for i in idx:
            t = float(np.interp(grid_x[i], taus[order], ts[order]))
            for _ in range(4):
                tau_t = float(sol.sol(t)[0])
                rate = drift(tau_t)
                if rate == 0.0:
                    break
                t -= (tau_t - grid_x[i]) / rate
                t = min(max(t, ts.min()), ts.max())
            nodes[int(i)] = float(profile(sol.sol(t), is_forward))

    if not nodes:
        raise WaveError("oracle trajectory visits no grid node")
    i_lo, i_hi = min(nodes), max(nodes)
    values = np.array([nodes.get(i, np.nan) for i in range(i_lo, i_hi + 1)])
    if np.any(~np.isfinite(values)):
        raise WaveError("oracle trajectory left gaps between grid nodes")
    limits = {}
    for side, (tau_end, u_end) in ends.items():
        carrying = (nu + float(v_spline(tau_end))) / (nu + 1.0)
        if abs(u_end - carrying) < 1e-3:
            limits[side] = 'carrying'
        elif abs(u_end) < 1e-3:
            limits[side] = 'zero'
        else:
            limits[side] = 'undetermined'
    sub = v.grid.sub_grid(i_lo, i_hi + 1)
    return OracleTrace(u=Field(sub, values), status=status, limits=limits, t_range=(t_lo, t_hi))


def oracle_gap(wave: HypWave) -> float:
    """
    Sup gap between the explicit formula and the backward integrator on the left profile.

    The formula is run leftward from x_m = -min(1, X/10), where the characteristic is stable.
    """
    grid = wave.u_left.grid
    i_m = grid.index_of(-min(1.0, wave.X / 10.0))
    x_m = float(grid.x[i_m])
    u_m = float(wave.u_left.values[i_m])
    horizon = 2.0 * wave.X / max(wave.c, 1e-3)
    trace = explicit_solution_oracle(wave.v, wave.c, x_m, u_m, (0.0, horizon), wave.nu,
                                     v_x=wave.v_x)
    reference = wave.u_left.at(trace.u.x)
    return float(np.max(np.abs(trace.u.values - reference)))


def _sharp_distance(u_left: Field, shift: float) -> float:
    return float(np.max(np.abs(u_left.values - sharp_wave(u_left.x - shift))))


def _pme_point(nu: float, tol: float) -> Dict[str, Any]:
    wave = construct_discontinuous_wave(nu, tol=tol)
    edge = _sharp_distance(wave.u_left, 0.0)
    fit = minimize_scalar(lambda s: _sharp_distance(wave.u_left, s), bounds=(0.0, 1.0),
                          method='bounded', options={'xatol': 1e-6})
    shift = float(fit.x)
    c = wave.c
    v_half = float(wave.v.at(-0.5 * c))
    checks = {
        'c_at_most_2': c <= 2.0,
        'c_above_floor': c >= hyp_speed_floor(),
        'v_lower_envelope': v_half >= 0.25 * c * c,
    }
    return {'nu': nu, 'c': c, 'edge': edge, 'fitted': min(float(fit.fun), edge),
            'shift': shift, 'checks': checks}


def hyp_to_pme_limit(nus: Sequence[float], tol: float = DEFAULT_HYP_TOL,
                     jobs: int = 1) -> ConvergenceReport:
    """
    Speeds and profiles of discontinuous waves as nu decreases, against the sharp wave.

    The distance to (1 - exp(x/sqrt(2)))_+ is measured on [-X, 0] twice: with the jump at the
    sharp wave's edge, and after the best shift in [0, 1]. The verdict uses the shifted one.

    Args:
        nus: Decreasing values in (0, 1]
        tol: Construction tolerance
        jobs: Worker count

    Returns:
        ConvergenceReport toward (1/sqrt(2), sharp wave)
    """
    nus = [float(nu) for nu in nus]
    if any(not 0.0 < nu <= 1.0 for nu in nus):
        raise DomainError("nu values must lie in (0, 1]")
    if any(b >= a for a, b in zip(nus, nus[1:])):
        raise DomainError("nu sequence must be strictly decreasing")
    results = ordered_map(partial(_pme_point, tol=tol), nus, jobs)
    points: List[StudyPoint] = []
    for r in results:
        status = 'ok' if all(r['checks'].values()) else 'check failed'
        points.append({
            'parameter': r['nu'], 'c': r['c'], 'distance': r['fitted'],
            'distance_edge': r['edge'], 'shift': r['shift'], 'checks': r['checks'],
            'status': status,
        })
    speeds = [r['c'] for r in results]
    errors = [abs(c - PME_LIMIT_SPEED) for c in speeds]
    distances = [r['fitted'] for r in results]
    verdict = bool(
        errors
        and all(b < a for a, b in zip(errors, errors[1:]))
        and errors[-1] < LIMIT_TOLERANCE
        and distances[-1] < LIMIT_TOLERANCE
        and all(p['status'] == 'ok' for p in points)
    )
    return ConvergenceReport(
        study='hyp-to-pme', parameters=nus, speeds=speeds, target=PME_LIMIT_SPEED,
        distances=distances, verdict=verdict, points=points,
    )
