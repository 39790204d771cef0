"""
Finite-slab traveling-wave problem for the repulsive chemotaxis Fisher-KPP system.

On [-L, L] the profile u and the signal v solve

    (1/|chi|) u'' + (c + tau v') u' + tau u (v - u)/nu + u (1 - u) = 0,   u(-L) = 1, u(L) = 0,
    -nu v'' = u_bar - v,

where u_bar extends u by 1 on the left and 0 on the right. The homotopy parameter tau scales
both chemotactic terms; tau = 0 is the classical FKPP slab.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .constants import (
    DEFAULT_CONTINUATION_STEPS,
    DEFAULT_INNER_MAX_ITER,
    DEFAULT_NEWTON_MAX_ITER,
    DEFAULT_OUTER_DAMPING,
    DEFAULT_OUTER_MAX_ITER,
    DEFAULT_PECLET_SWITCH,
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_SLAB_HALF_LENGTH,
    DEFAULT_UPDATE_TOL,
    STRUCTURE_TOL,
)
from .errors import DomainError
from .grid_kernel import (
    Field,
    UniformGrid,
    convolve_K,
    convolve_K_with_slope,
    default_grid,
)
from .newton import BandedNewtonSolver, NewtonResult, band_add, sup_norm

logger = logging.getLogger(__name__)

Reaction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class WaveParams:
    """Parameters of one slab problem."""

    chi: float
    nu: float
    c: float
    delta: Optional[float] = None
    L: float = DEFAULT_SLAB_HALF_LENGTH
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not (self.chi < 0 and math.isfinite(self.chi)):
            raise DomainError(f"chi must be negative, got {self.chi}")
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise DomainError(f"nu must be positive, got {self.nu}")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise DomainError(f"c must be nonnegative, got {self.c}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise DomainError(f"L must be positive, got {self.L}")
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")
        if self.delta is None:
            object.__setattr__(self, 'delta', default_delta(self.nu))
        elif not 0.0 < self.delta < self.nu / (self.nu + 1.0):
            raise DomainError(
                f"delta must lie in (0, nu/(nu+1)) = (0, {self.nu / (self.nu + 1.0):.6g}), "
                f"got {self.delta}"
            )

    @property
    def diffusion(self) -> float:
        return 1.0 / abs(self.chi)

    def with_speed(self, c: float) -> 'WaveParams':
        return replace(self, c=c)


def default_delta(nu: float) -> float:
    """Normalization level nu/(2(nu+1)), the middle of the admissible interval."""
    return nu / (2.0 * (nu + 1.0))


@dataclass
class SlabSolution:
    """Converged (or last) iterate of a slab solve."""

    params: WaveParams
    u: Field
    v: Field
    residual: float
    outer_iters: int
    converged: bool
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def grid(self) -> UniformGrid:
        return self.u.grid

    @property
    def u_at_origin(self) -> float:
        return float(self.u.values[self.grid.origin_index])


class QuasiSingularPoint(NamedTuple):
    """Interior maximum of the transformed profile and the slope gap there."""

    location: float
    gap: float
    bound: float
    status: str


def speed_bracket(chi: float, nu: float) -> Tuple[float, float]:
    """
    Speeds between which the normalization u(0) = delta is attained on a long slab.

    Returns:
        (c_lower, c_upper) with c_lower = (1/sqrt|chi|) sqrt(nu/(nu+1)) and
        c_upper = 1/sqrt(nu) + (2/sqrt|chi|) sqrt((nu+1)/nu)
    """
    if not (chi < 0 and nu > 0):
        raise DomainError(f"need chi < 0 and nu > 0, got chi={chi}, nu={nu}")
    root = math.sqrt(abs(chi))
    lower = math.sqrt(nu / (nu + 1.0)) / root
    upper = 1.0 / math.sqrt(nu) + 2.0 * math.sqrt((nu + 1.0) / nu) / root
    return lower, upper


def slab_bounds(params: WaveParams, eps: float = 0.1) -> Dict[str, Dict[str, Any]]:
    """
    Explicit bounds on u(0) for long slabs and the speeds at which they apply.

    Args:
        params: Slab parameters
        eps: Slack in the lower bound (1 - eps) nu/(1+nu)

    Returns:
        {'lower': {...}, 'upper': {...}}, each with 'value', 'applies' and 'threshold'
    """
    chi, nu, c, L = params.chi, params.nu, params.c, params.L
    root = math.sqrt(abs(chi))
    lower_threshold = 2.0 * math.sqrt(nu / (nu + 1.0)) / root
    drift = c - 1.0 / math.sqrt(nu)
    upper_threshold = 2.0 * math.sqrt((nu + 1.0) / nu) / root
    upper_applies = drift >= upper_threshold
    upper_value = 1.0
    if upper_applies:
        disc = max(drift * drift - 4.0 * (nu + 1.0) / (nu * abs(chi)), 0.0)
        upper_value = math.exp(-0.5 * L * abs(chi) * (drift + math.sqrt(disc)))
    return {
        'lower': {
            'value': (1.0 - eps) * nu / (1.0 + nu),
            'applies': c < lower_threshold,
            'threshold': lower_threshold,
        },
        'upper': {
            'value': upper_value,
            'applies': upper_applies,
            'threshold': 1.0 / math.sqrt(nu) + upper_threshold,
        },
    }


def _advection_weights(b: np.ndarray, h: float, diffusion: float,
                       peclet: float = DEFAULT_PECLET_SWITCH
                       ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Stencil weights (left, centre, right) of the first derivative at interior nodes.

    Central differences unless the cell Peclet number |b| h / diffusion exceeds the switch,
    then one-sided upwinding: forward for b > 0, backward for b < 0.
    """
    wm = np.full(b.shape, -0.5 / h)
    w0 = np.zeros(b.shape)
    wp = np.full(b.shape, 0.5 / h)
    upwind = np.abs(b) * h > peclet * diffusion
    fwd = upwind & (b > 0)
    bwd = upwind & (b < 0)
    wm[fwd], w0[fwd], wp[fwd] = 0.0, -1.0 / h, 1.0 / h
    wm[bwd], w0[bwd], wp[bwd] = -1.0 / h, 1.0 / h, 0.0
    return wm, w0, wp


def _central_slope(v: np.ndarray, h: float) -> np.ndarray:
    return (v[2:] - v[:-2]) / (2.0 * h)


def _resample(profile: Field, grid: UniformGrid, far_left: float, far_right: float) -> np.ndarray:
    if profile.grid == grid:
        return np.array(profile.values)
    return np.interp(grid.x, profile.x, profile.values, left=far_left, right=far_right)


def ramp_profile(grid: UniformGrid, left: float = 1.0, right: float = 0.0) -> Field:
    """Linear profile joining the boundary values."""
    t = (grid.x - grid.x_min) / (grid.x_max - grid.x_min)
    return Field(grid, left + (right - left) * t)


class _SlabSystem:
    """Discrete slab equations with interleaved unknowns (u_i, v_i[, c_i])."""

    def __init__(self, params: WaveParams, grid: UniformGrid, stride: int = 2):
        self.params = params
        self.grid = grid
        self.stride = stride
        self.n = grid.n
        self.h = grid.dx
        self.d = params.diffusion
        self.nu = params.nu
        self.s = math.sqrt(params.nu)
        self.tau = params.tau
        self.scale = 1.0 + 2.0 * params.nu / self.h ** 2
        # u rows are divided by their stencil magnitude; |v'| <= 1/sqrt(nu)
        self.u_scale = (1.0 + 2.0 * self.d / self.h ** 2
                        + (abs(params.c) + self.tau / self.s) / self.h)
        self.interior = np.arange(1, self.n - 1)

    def split(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Union[float, np.ndarray]]:
        u = z[0::self.stride]
        v = z[1::self.stride]
        c: Union[float, np.ndarray] = self.params.c
        if self.stride == 3:
            c = z[2::3][1:-1]
        return u, v, c

    def u_rows(self, u: np.ndarray, v: np.ndarray, vx: np.ndarray,
               c: Union[float, np.ndarray]) -> np.ndarray:
        """u-equation at every node; boundary rows carry the Dirichlet data."""
        h, tau = self.h, self.tau
        b = c + tau * vx
        wm, w0, wp = _advection_weights(np.asarray(b, dtype=float) * np.ones(self.n - 2), h, self.d)
        um, ui, up = u[:-2], u[1:-1], u[2:]
        out = np.empty(self.n)
        out[1:-1] = (
            self.d * (um - 2.0 * ui + up) / h ** 2
            + b * (wm * um + w0 * ui + wp * up)
            + tau * ui * (v[1:-1] - ui) / self.nu
            + ui * (1.0 - ui)
        )
        out[0] = u[0] - 1.0
        out[-1] = u[-1]
        return out

    def v_rows(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Screened-Poisson equation with the exact exponential far-field closure."""
        h, nu, s = self.h, self.nu, self.s
        out = np.empty(self.n)
        out[1:-1] = -nu * (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h ** 2 + v[1:-1] - u[1:-1]
        out[0] = -nu * (2.0 * v[1] - 2.0 * v[0] - 2.0 * h * (v[0] - 1.0) / s) / h ** 2 + v[0] - u[0]
        out[-1] = -nu * (2.0 * v[-2] - 2.0 * v[-1] - 2.0 * h * v[-1] / s) / h ** 2 + v[-1] - u[-1]
        return out

    def residual(self, z: np.ndarray) -> np.ndarray:
        u, v, c = self.split(z)
        vx = _central_slope(v, self.h)
        out = np.empty_like(z)
        ru = self.u_rows(u, v, vx, c)
        ru[1:-1] /= self.u_scale
        out[0::self.stride] = ru
        out[1::self.stride] = self.v_rows(u, v) / self.scale
        if self.stride == 3:
            out[2::3] = self._phase_rows(u, z[2::3])
        return out

    @property
    def bands(self) -> Tuple[int, int]:
        return (2, 3) if self.stride == 2 else (3, 4)

    @property
    def pin_index(self) -> int:
        return self.grid.origin_index

    def _phase_rows(self, u: np.ndarray, c: np.ndarray) -> np.ndarray:
        i0 = self.pin_index
        out = np.empty(self.n)
        out[:i0] = c[:i0] - c[1:i0 + 1]
        out[i0 + 1:] = c[i0 + 1:] - c[i0:-1]
        out[i0] = u[i0] - self.params.delta
        return out

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        st = self.stride
        lower, upper = self.bands
        u, v, c = self.split(z)
        h, tau, nu = self.h, self.tau, self.nu
        vx = _central_slope(v, h)
        b = np.asarray(c + tau * vx, dtype=float) * np.ones(self.n - 2)
        wm, w0, wp = _advection_weights(b, h, self.d)
        um, ui, up = u[:-2], u[1:-1], u[2:]
        du = wm * um + w0 * ui + wp * up

        J = np.zeros((lower + upper + 1, st * self.n))
        I = self.interior
        rows = st * I
        diff = self.d / h ** 2
        su = 1.0 / self.u_scale
        band_add(J, upper, rows, st * (I - 1), su * (diff + b * wm))
        band_add(J, upper, rows, st * I,
                 su * (-2.0 * diff + b * w0 + tau * (v[1:-1] - 2.0 * ui) / nu + 1.0 - 2.0 * ui))
        band_add(J, upper, rows, st * (I + 1), su * (diff + b * wp))
        band_add(J, upper, rows, st * I + 1, su * tau * ui / nu)
        band_add(J, upper, rows, st * (I + 1) + 1, su * tau * du / (2.0 * h))
        band_add(J, upper, rows, st * (I - 1) + 1, -su * tau * du / (2.0 * h))
        if st == 3:
            band_add(J, upper, rows, st * I + 2, su * du)
        ends = np.array([0, self.n - 1])
        band_add(J, upper, st * ends, st * ends, np.ones(2))

        vrows = st * I + 1
        off = -nu / h ** 2 / self.scale
        band_add(J, upper, vrows, st * I + 1,
                 np.full(I.size, (2.0 * nu / h ** 2 + 1.0) / self.scale))
        band_add(J, upper, vrows, st * (I - 1) + 1, np.full(I.size, off))
        band_add(J, upper, vrows, st * (I + 1) + 1, np.full(I.size, off))
        band_add(J, upper, vrows, st * I, np.full(I.size, -1.0 / self.scale))
        edge = (nu * (2.0 + 2.0 * h / self.s) / h ** 2 + 1.0) / self.scale
        last = self.n - 1
        band_add(J, upper, np.array([1, st * last + 1]), np.array([1, st * last + 1]),
                 np.full(2, edge))
        band_add(J, upper, np.array([1, st * last + 1]), np.array([st + 1, st * (last - 1) + 1]),
                 np.full(2, 2.0 * off))
        band_add(J, upper, np.array([1, st * last + 1]), np.array([0, st * last]),
                 np.full(2, -1.0 / self.scale))

        if st == 3:
            i0 = self.pin_index
            left = np.arange(0, i0)
            right = np.arange(i0 + 1, self.n)
            band_add(J, upper, 3 * left + 2, 3 * left + 2, np.ones(left.size))
            band_add(J, upper, 3 * left + 2, 3 * (left + 1) + 2, -np.ones(left.size))
            band_add(J, upper, 3 * right + 2, 3 * right + 2, np.ones(right.size))
            band_add(J, upper, 3 * right + 2, 3 * (right - 1) + 2, -np.ones(right.size))
            band_add(J, upper, np.array([3 * i0 + 2]), np.array([3 * i0]), np.ones(1))
        return J

    def mass(self) -> np.ndarray:
        m = np.zeros(self.stride * self.n)
        m[self.stride * self.interior] = 1.0 / self.u_scale
        return m

    def pack(self, u: np.ndarray, v: np.ndarray, c: Optional[float] = None) -> np.ndarray:
        z = np.empty(self.stride * self.n)
        z[0::self.stride] = u
        z[1::self.stride] = v
        if self.stride == 3:
            z[2::3] = self.params.c if c is None else c
        return z


def _initial_fields(params: WaveParams, grid: UniformGrid,
                    init: Union[None, Field, SlabSolution]) -> Tuple[np.ndarray, np.ndarray, str]:
    if init is None:
        u0 = ramp_profile(grid).values
        label = 'ramp'
    elif isinstance(init, SlabSolution):
        u0 = _resample(init.u, grid, 1.0, 0.0)
        if init.grid == grid:
            return u0, np.array(init.v.values), 'warm-start'
        label = 'warm-start'
    else:
        u0 = _resample(init, grid, 1.0, 0.0)
        label = str(init.meta.get('label', 'field'))
    u0 = np.array(u0, dtype=float)
    u0[0], u0[-1] = 1.0, 0.0
    v0 = convolve_K(Field(grid, u0), params.nu, 1.0, 0.0).values
    return u0, v0, label


def _finish(params: WaveParams, system: _SlabSystem, u: np.ndarray, v: np.ndarray,
            outer_iters: int, converged: bool, meta: Dict[str, Any],
            vx: Optional[np.ndarray] = None) -> SlabSolution:
    grid = system.grid
    if vx is None:
        vx = _central_slope(v, grid.dx)
    else:
        vx = vx[1:-1]
    c = meta.pop('c_field', params.c)
    raw = sup_norm(system.u_rows(u, v, vx, c)[1:-1])
    residual = raw / system.u_scale
    poisson = sup_norm(system.v_rows(u, v)[1:-1])
    interior = u[1:-1]
    u_min = float(interior.min()) if interior.size else 0.0
    u_max = float(interior.max()) if interior.size else 0.0
    meta.update({
        'residual_unscaled': raw,
        'residual_poisson': poisson,
        'u_min': u_min,
        'u_max': u_max,
        'bound_violation': bool(u_min < -STRUCTURE_TOL or u_max > 1.0 + STRUCTURE_TOL),
    })
    if meta['bound_violation']:
        logger.warning("slab iterate leaves [0, 1]: min %.3g max %.3g", u_min, u_max)
    return SlabSolution(
        params=params, u=Field(grid, u), v=Field(grid, v), residual=residual,
        outer_iters=outer_iters, converged=converged, meta=meta,
    )


def _coupled_newton(params: WaveParams, grid: UniformGrid, u0: np.ndarray, v0: np.ndarray,
                    maxiter: int, rtol: float, xtol: float) -> Tuple[NewtonResult, _SlabSystem]:
    system = _SlabSystem(params, grid)
    solver = BandedNewtonSolver(
        system.residual, system.jacobian, system.pack(u0, v0), system.bands, system.mass(),
    )
    return solver.solve(maxiter=maxiter, rtol=rtol, xtol=xtol), system


def _solve_coupled(params: WaveParams, grid: UniformGrid, u0: np.ndarray, v0: np.ndarray,
                   meta: Dict[str, Any], maxiter: int, rtol: float, xtol: float) -> SlabSolution:
    result, system = _coupled_newton(params, grid, u0, v0, maxiter, rtol, xtol)
    path: List[float] = [params.tau]
    iterations = result.iterations
    if not result.converged and params.tau > 0.0:
        logger.warning("coupled Newton %s at c=%.6g; falling back to tau-continuation",
                       result.status, params.c)
        u, v = u0, v0
        path = []
        for tau in DEFAULT_CONTINUATION_STEPS:
            if tau > params.tau:
                break
            step = replace(params, tau=tau)
            result, system = _coupled_newton(step, grid, u, v, maxiter, rtol, xtol)
            iterations += result.iterations
            path.append(tau)
            if not result.converged:
                break
            u, v = result.x[0::2], result.x[1::2]
        if result.converged and path[-1] != params.tau:
            result, system = _coupled_newton(params, grid, u, v, maxiter, rtol, xtol)
            iterations += result.iterations
            path.append(params.tau)
    meta.update({
        'coupling': 'newton',
        'continuation_path': path,
        'newton_status': result.status,
        'update': result.update,
    })
    z = result.x
    return _finish(params, system, z[0::2], z[1::2], iterations, result.converged, meta)


def _scalar_bvp(grid: UniformGrid, diffusion: float, advection: Union[float, np.ndarray],
                reaction: Reaction, left: float, right: float, u0: np.ndarray,
                maxiter: int = DEFAULT_NEWTON_MAX_ITER, rtol: float = DEFAULT_RESIDUAL_TOL,
                xtol: float = DEFAULT_UPDATE_TOL) -> Tuple[NewtonResult, Callable]:
    """
    Solve diffusion u'' + advection u' + f(u) = 0 with Dirichlet data.

    Returns:
        (Newton result, residual function over all nodes)
    """
    n, h = grid.n, grid.dx
    b = np.asarray(advection, dtype=float) * np.ones(n - 2)
    wm, w0, wp = _advection_weights(b, h, diffusion)
    diff = diffusion / h ** 2

    def residual(u: np.ndarray) -> np.ndarray:
        f, _ = reaction(u[1:-1])
        out = np.empty(n)
        out[1:-1] = (diff * (u[:-2] - 2.0 * u[1:-1] + u[2:])
                     + b * (wm * u[:-2] + w0 * u[1:-1] + wp * u[2:]) + f)
        out[0] = u[0] - left
        out[-1] = u[-1] - right
        return out

    def jacobian(u: np.ndarray) -> np.ndarray:
        _, df = reaction(u[1:-1])
        J = np.zeros((3, n))
        J[1, 1:-1] = -2.0 * diff + b * w0 + df
        J[0, 2:] = diff + b * wp
        J[2, :-2] = diff + b * wm
        J[1, 0] = J[1, -1] = 1.0
        return J

    mass = np.ones(n)
    mass[0] = mass[-1] = 0.0
    solver = BandedNewtonSolver(residual, jacobian, u0, (1, 1), mass)
    return solver.solve(maxiter=maxiter, rtol=rtol, xtol=xtol), residual


def _solve_picard(params: WaveParams, grid: UniformGrid, u0: np.ndarray, meta: Dict[str, Any],
                  maxiter: int, rtol: float, xtol: float) -> SlabSolution:
    nu, tau = params.nu, params.tau
    u = u0.copy()
    v_field, vx_field = convolve_K_with_slope(Field(grid, u), nu, 1.0, 0.0)
    v, vx = np.array(v_field.values), np.array(vx_field.values)
    system = _SlabSystem(params, grid)
    omega = DEFAULT_OUTER_DAMPING
    previous = np.inf
    v_last = v
    converged = False
    outer = 0
    history: List[float] = []
    for outer in range(1, maxiter + 1):
        vi = v[1:-1]

        def reaction(w: np.ndarray, vi: np.ndarray = vi) -> Tuple[np.ndarray, np.ndarray]:
            return (w * (1.0 - w) + tau * w * (vi - w) / nu,
                    1.0 - 2.0 * w + tau * (vi - 2.0 * w) / nu)

        inner, _ = _scalar_bvp(grid, params.diffusion, params.c + tau * vx[1:-1], reaction,
                               1.0, 0.0, u, maxiter=DEFAULT_INNER_MAX_ITER,
                               rtol=0.01 * rtol * system.u_scale, xtol=0.01 * xtol)
        u = inner.x
        v_new_field, vx_new_field = convolve_K_with_slope(Field(grid, u), nu, 1.0, 0.0)
        v_new, vx_new = v_new_field.values, vx_new_field.values
        # undamped: successive images of the convolution, not the relaxed iterate
        update = sup_norm(v_new - v_last)
        v_last = v_new
        residual = sup_norm(
            system.u_rows(u, v_new, vx_new[1:-1], params.c)[1:-1]) / system.u_scale
        history.append(residual)
        logger.debug("picard %d: residual %.3e update %.3e omega %.3g",
                     outer, residual, update, omega)
        if residual < rtol and update < xtol:
            v, vx = np.array(v_new), np.array(vx_new)
            converged = True
            break
        if residual > max(previous, rtol):
            omega *= 0.5
        previous = residual
        v = (1.0 - omega) * v + omega * v_new
        vx = (1.0 - omega) * vx + omega * vx_new
    meta.update({'coupling': 'picard', 'continuation_path': [tau], 'damping': omega,
                 'outer_history': history})
    return _finish(params, system, u, v, outer, converged, meta, vx=vx)


def solve_slab(params: WaveParams, init: Union[None, Field, SlabSolution] = None,
               grid: Optional[UniformGrid] = None, coupling: str = 'newton',
               maxiter: Optional[int] = None, rtol: float = DEFAULT_RESIDUAL_TOL,
               xtol: float = DEFAULT_UPDATE_TOL) -> SlabSolution:
    """
    Solve the slab problem at fixed speed.

    Args:
        params: Slab parameters
        init: Initial profile or previous solution; defaults to the linear ramp
        grid: Grid on [-L, L]; defaults to default_grid(L, nu, chi)
        coupling: 'newton' (u and v together) or 'picard' (damped fixed point on v)
        maxiter: Iteration cap (Newton steps or outer iterations)
        rtol: Residual tolerance
        xtol: Update tolerance

    Returns:
        SlabSolution; converged=False carries the last iterate
    """
    if grid is None:
        grid = default_grid(params.L, params.nu, params.chi)
    u0, v0, label = _initial_fields(params, grid, init)
    meta: Dict[str, Any] = {'init': label}
    if coupling == 'newton':
        return _solve_coupled(params, grid, u0, v0, meta, maxiter or DEFAULT_NEWTON_MAX_ITER,
                              rtol, xtol)
    if coupling == 'picard':
        return _solve_picard(params, grid, u0, meta, maxiter or DEFAULT_OUTER_MAX_ITER, rtol, xtol)
    raise DomainError(f"unknown coupling '{coupling}' (expected 'newton' or 'picard')")


def solve_pinned_slab(params: WaveParams, init: Union[Field, SlabSolution],
                      c_guess: Optional[float] = None, grid: Optional[UniformGrid] = None,
                      maxiter: int = DEFAULT_NEWTON_MAX_ITER, rtol: float = DEFAULT_RESIDUAL_TOL,
                      xtol: float = DEFAULT_UPDATE_TOL) -> SlabSolution:
    """
    Solve the slab problem with the speed as an unknown and the phase condition u(0) = delta.

    Args:
        params: Slab parameters; params.c is the starting speed unless c_guess is given
        init: Starting profile
        c_guess: Starting speed
        grid: Grid on [-L, L]; defaults to the grid of init when it is a SlabSolution

    Returns:
        SlabSolution whose params carry the solved speed
    """
    if grid is None:
        grid = init.grid if isinstance(init, SlabSolution) else default_grid(
            params.L, params.nu, params.chi)
    if c_guess is not None:
        params = params.with_speed(c_guess)
    u0, v0, label = _initial_fields(params, grid, init)
    system = _SlabSystem(params, grid, stride=3)
    solver = BandedNewtonSolver(
        system.residual, system.jacobian, system.pack(u0, v0), system.bands, system.mass(),
    )
    result = solver.solve(maxiter=maxiter, rtol=rtol, xtol=xtol)
    z = result.x
    c = float(z[3 * system.pin_index + 2])
    solved = params.with_speed(max(c, 0.0))
    meta: Dict[str, Any] = {
        'init': label, 'coupling': 'pinned', 'continuation_path': [params.tau],
        'newton_status': result.status, 'update': result.update,
        'c_field': z[2::3][1:-1],
    }
    return _finish(solved, system, z[0::3], z[1::3], result.iterations, result.converged, meta)


def fkpp_slab(kind: str, params: WaveParams, grid: Optional[UniformGrid] = None) -> Field:
    """
    Bracketing FKPP slab problems.

    sub:   (1/|chi|) phi'' + c phi' + phi (1 - ((nu+1)/nu) phi) = 0, phi(-L) = nu/(nu+1), phi(L) = 0
    super: (1/|chi|) phi'' + (c - 1/sqrt(nu)) phi' + ((nu+1)/nu) phi (1 - phi) = 0,
           phi(-L) = 1, phi(L) = 0

    Args:
        kind: 'sub' or 'super'
        params: Slab parameters
        grid: Grid on [-L, L]

    Returns:
        Field with meta 'converged', 'residual' and 'status'
    """
    if grid is None:
        grid = default_grid(params.L, params.nu, params.chi)
    nu = params.nu
    k = (nu + 1.0) / nu
    if kind == 'sub':
        left = nu / (nu + 1.0)
        advection = params.c

        def reaction(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return w * (1.0 - k * w), 1.0 - 2.0 * k * w
    elif kind == 'super':
        left = 1.0
        advection = params.c - 1.0 / math.sqrt(nu)

        def reaction(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return k * w * (1.0 - w), k * (1.0 - 2.0 * w)
    else:
        raise DomainError(f"kind must be 'sub' or 'super', got '{kind}'")

    u0 = ramp_profile(grid, left, 0.0).values
    result, residual_fn = _scalar_bvp(grid, params.diffusion, advection, reaction, left, 0.0, u0)
    residual = sup_norm(residual_fn(result.x)[1:-1])
    status = 'ok' if result.converged else f'error: {result.status}'
    if not result.converged:
        logger.warning("%s FKPP slab did not converge (%s)", kind, result.status)
    return Field(grid, result.x, {
        'kind': kind, 'converged': result.converged, 'residual': residual, 'status': status,
    })


def quasi_singular_point(sol: SlabSolution) -> QuasiSingularPoint:
    """
    Interior maximum of u(x) exp(|chi| (c x + v(x)) / 2), located in log space.

    Returns:
        QuasiSingularPoint with the location, (v_x + c)^2 there and the bound (4/|chi|)(nu+1)/nu
    """
    params = sol.params
    chi, nu, c = params.chi, params.nu, params.c
    x = sol.u.x
    u = sol.u.values
    with np.errstate(divide='ignore'):
        log_u = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), -np.inf)
    log_tilde = log_u + 0.5 * abs(chi) * (c * x + sol.v.values)
    i = int(np.argmax(log_tilde))
    bound = 4.0 * (nu + 1.0) / (nu * abs(chi))
    vx = np.gradient(sol.v.values, sol.grid.dx)
    gap = float((vx[i] + c) ** 2)
    status = 'ok'
    if i == 0 or i == sol.grid.n - 1:
        status = 'no interior maximum'
    return QuasiSingularPoint(location=float(x[i]), gap=gap, bound=bound, status=status)


def tw_residual(u: Field, v: Field, chi: float, nu: float, c: float) -> Tuple[Field, Field]:
    """
    Pointwise residuals of a stored profile pair at interior nodes.

    Returns:
        (-(c+v_x)u_x - (1/|chi|)u_xx - u((nu+v)/nu - ((nu+1)/nu)u),  -nu v'' - u + v)
    """
    if u.grid != v.grid:
        raise DomainError("u and v must share a grid")
    if u.grid.n < 3:
        raise DomainError("residual needs at least 3 nodes")
    h = u.grid.dx
    uu, vv = u.values, v.values
    ux = _central_slope(uu, h)
    vx = _central_slope(vv, h)
    uxx = np.diff(uu, 2) / h ** 2
    vxx = np.diff(vv, 2) / h ** 2
    ui, vi = uu[1:-1], vv[1:-1]
    tw = -(c + vx) * ux - uxx / abs(chi) - ui * ((nu + vi) / nu - (nu + 1.0) / nu * ui)
    poisson = -nu * vxx - ui + vi
    inner = u.grid.sub_grid(1, u.grid.n - 1)
    return Field(inner, tw), Field(inner, poisson)
