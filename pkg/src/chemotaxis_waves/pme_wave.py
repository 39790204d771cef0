"""
Traveling waves of the porous-medium Fisher-KPP equation

    ((eps + u) u')' + c u' + u (1 - u) = 0,   u(-inf) = 1, u(+inf) = 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import solve_ivp, trapezoid
from scipy.special import expit

from .constants import (
    BUMP_HALF_WIDTHS,
    BUMPS_PER_WIDTH,
    DEFAULT_NEWTON_MAX_ITER,
    DEFAULT_ODE_ATOL,
    DEFAULT_ODE_RTOL,
    DEFAULT_PME_DX,
    DEFAULT_PME_HALF_LENGTH,
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_SHOOT_ETA,
    DEFAULT_UPDATE_TOL,
    NO_WAVE_UNDERSHOOT,
)
from .errors import DomainError, NoWaveError
from .grid_kernel import Field, UniformGrid
from .newton import BandedNewtonSolver, band_add, sup_norm

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass
class PmeWave:
    """Porous-medium traveling wave sampled on a grid."""

    eps: float
    c: float
    u: Field
    support_edge: float = math.inf
    meta: Dict[str, Any] = field(default_factory=dict)


def pm_min_speed(eps: float) -> float:
    """
    Minimal wave speed: 1/sqrt(2) + sqrt(2) eps if 2 eps < 1, else 2 sqrt(eps).

    Raises:
        DomainError: eps < 0
    """
    if not (eps >= 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be nonnegative, got {eps}")
    if 2.0 * eps < 1.0:
        return 1.0 / SQRT2 + SQRT2 * eps
    return 2.0 * math.sqrt(eps)


def sharp_wave(x: ArrayLike):
    """Sharp minimal wave (1 - exp(x/sqrt(2)))_+ of the degenerate equation, support (-inf, 0)."""
    xa = np.asarray(x, dtype=float)
    out = -np.expm1(np.minimum(xa, 0.0) / SQRT2)
    return float(out) if out.ndim == 0 else out


def pushed_wave_profile(eps: float, x: ArrayLike):
    """
    Minimal wave for 0 <= eps < 1/2, normalized so that u(0) = 1/2.

    It solves u' = -u (1 - u) / (sqrt(2) (eps + u)) at c = 1/sqrt(2) + sqrt(2) eps, i.e.
    x = -sqrt(2) (eps log u - (1 + eps) log(1 - u)) + sqrt(2) log 2.

    Args:
        eps: Linear diffusion, in [0, 1/2)
        x: Position(s)

    Returns:
        u(x)
    """
    if not 0.0 <= eps < 0.5:
        raise DomainError(f"pushed closed form needs 0 <= eps < 1/2, got {eps}")
    xa = np.asarray(x, dtype=float)
    shift = SQRT2 * math.log(2.0)
    if eps == 0.0:
        return sharp_wave(xa - shift)

    def position(t: np.ndarray) -> np.ndarray:
        log_u = -np.logaddexp(0.0, -t)
        log_1mu = -np.logaddexp(0.0, t)
        return -SQRT2 * (eps * log_u - (1.0 + eps) * log_1mu) + shift

    # position() decreases in the logit t = log(u / (1 - u))
    target = np.atleast_1d(xa)
    lo = np.full(target.shape, -1e4)
    hi = np.full(target.shape, 1e3)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        right = position(mid) > target
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    out = expit(0.5 * (lo + hi)).reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BumpFunction:
    """Test function (1 - r^2)^4, r = (x - center)/half_width, supported on |r| < 1."""

    center: float
    half_width: float

    @property
    def support(self) -> Tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def _r(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r = (np.asarray(x, dtype=float) - self.center) / self.half_width
        return r, np.where(np.abs(r) < 1.0, 1.0 - r * r, 0.0)

    def value(self, x: ArrayLike) -> np.ndarray:
        _, s = self._r(x)
        return s ** 4

    def d1(self, x: ArrayLike) -> np.ndarray:
        r, s = self._r(x)
        return -8.0 * r * s ** 3 / self.half_width

    def d2(self, x: ArrayLike) -> np.ndarray:
        r, s = self._r(x)
        return -8.0 * s ** 2 * (1.0 - 7.0 * r * r) * (s > 0) / self.half_width ** 2


def standard_test_functions(grid: UniformGrid) -> List[BumpFunction]:
    """
    Twelve bumps, four per half-width in (1, 2, 4), tiled across the grid.

    The centres of one width run evenly from x_min + w to x_max - w, so the outer bumps touch
    the grid ends.

    Raises:
        DomainError: the grid is shorter than the widest bump
    """
    bumps = []
    for w in BUMP_HALF_WIDTHS:
        if grid.x_max - grid.x_min < 2.0 * w:
            raise DomainError(
                f"grid [{grid.x_min:g}, {grid.x_max:g}] is shorter than a bump of half-width {w:g}"
            )
        centres = np.linspace(grid.x_min + w, grid.x_max - w, BUMPS_PER_WIDTH)
        bumps.extend(BumpFunction(float(x0), float(w)) for x0 in centres)
    return bumps


def distributional_defects(u: Field, c: float, eps: float,
                           test_functions: Sequence[BumpFunction]) -> np.ndarray:
    """
    Defects c<u,psi'> - 1/2 <u^2,psi''> - eps <u,psi''> - <u(1-u),psi> per test function.

    The flux term <u u', psi'> is integrated by parts, so no derivative of u is taken and
    the support edge of a sharp wave needs no special treatment.
    """
    x = u.x
    uu = u.values
    out = np.empty(len(test_functions))
    for k, psi in enumerate(test_functions):
        a, b = psi.support
        if a < u.grid.x_min - 1e-12 or b > u.grid.x_max + 1e-12:
            raise DomainError(
                f"test function support [{a:g}, {b:g}] exceeds grid "
                f"[{u.grid.x_min:g}, {u.grid.x_max:g}]"
            )
        integrand = (c * uu * psi.d1(x) - 0.5 * uu * uu * psi.d2(x)
                     - eps * uu * psi.d2(x) - uu * (1.0 - uu) * psi.value(x))
        out[k] = trapezoid(integrand, dx=u.grid.dx)
    return out


def pme_residual(u: Field, c: float, eps: float,
                 test_functions: Optional[Sequence[BumpFunction]] = None) -> float:
    """
    Largest distributional defect of u over a set of test functions.

    Args:
        u: Sampled profile
        c: Speed
        eps: Linear diffusion
        test_functions: Defaults to standard_test_functions(u.grid)

    Returns:
        max |defect|
    """
    if test_functions is None:
        test_functions = standard_test_functions(u.grid)
    return float(np.max(np.abs(distributional_defects(u, c, eps, test_functions))))


def _left_rate(eps: float, c: float) -> float:
    """Growth rate of u - 1 on the unstable manifold of u = 1."""
    return (-c + math.sqrt(c * c + 4.0 * (eps + 1.0))) / (2.0 * (eps + 1.0))


def pme_grid(L: float = DEFAULT_PME_HALF_LENGTH, dx: float = DEFAULT_PME_DX) -> UniformGrid:
    half = int(math.ceil(L / dx))
    return UniformGrid(-L, L / half, 2 * half + 1)


class _PinnedPmeSystem:
    """
    Conservative discretization on [-L, L] with unknowns u_0..u_{n-1}.

    Row 0 is the unstable-manifold condition at -L, row i0 pins u(0) = 1/2 and the remaining
    rows hold the interior equations, shifted past the pin to keep the band at (2, 1). Right of
    the pin the rows form a forward recurrence whose modes both decay, so the system is solved
    by undamped Newton; a pseudo-time mass would add a growing mode.
    """

    def __init__(self, eps: float, c: float, grid: UniformGrid):
        self.eps, self.c, self.grid = eps, c, grid
        self.n, self.h = grid.n, grid.dx
        self.i0 = grid.origin_index
        self.rate = _left_rate(eps, c)
        nodes = np.arange(1, self.n - 1)
        self.rows = np.where(nodes < self.i0, nodes, nodes + 1)

    def interior(self, u: np.ndarray) -> np.ndarray:
        h, eps = self.h, self.eps
        flux = (eps + 0.5 * (u[1:] + u[:-1])) * np.diff(u) / h
        return (np.diff(flux) / h + self.c * (u[2:] - u[:-2]) / (2.0 * h)
                + u[1:-1] * (1.0 - u[1:-1]))

    def residual(self, u: np.ndarray) -> np.ndarray:
        out = np.empty(self.n)
        out[self.rows] = self.interior(u)
        out[0] = (u[1] - u[0]) / self.h - self.rate * (0.5 * (u[0] + u[1]) - 1.0)
        out[self.i0] = u[self.i0] - 0.5
        return out

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        h, eps, c = self.h, self.eps, self.c
        J = np.zeros((4, self.n))
        um, ui, up = u[:-2], u[1:-1], u[2:]
        k_minus = eps + 0.5 * (um + ui)
        k_plus = eps + 0.5 * (ui + up)
        d_minus = (ui - um) / h
        d_plus = (up - ui) / h
        col = np.arange(1, self.n - 1)
        band_add(J, 1, self.rows, col - 1,
                 (-0.5 * d_minus + k_minus / h) / h - c / (2.0 * h))
        band_add(J, 1, self.rows, col,
                 (0.5 * d_plus - k_plus / h - 0.5 * d_minus - k_minus / h) / h + 1.0 - 2.0 * ui)
        band_add(J, 1, self.rows, col + 1, (0.5 * d_plus + k_plus / h) / h + c / (2.0 * h))
        band_add(J, 1, np.array([0, 0]), np.array([0, 1]),
                 np.array([-1.0 / h - 0.5 * self.rate, 1.0 / h - 0.5 * self.rate]))
        band_add(J, 1, np.array([self.i0]), np.array([self.i0]), np.ones(1))
        return J


def _starting_profile(eps: float, c: float, grid: UniformGrid) -> Tuple[np.ndarray, str]:
    """Shooting profile at (eps, c); the minimal wave or a logistic front when shooting fails."""
    try:
        return np.array(shoot_wave(eps, c, grid).u.values), 'shooting'
    except NoWaveError as exc:
        logger.debug("shooting start at eps=%g c=%.6g failed: %s", eps, c, exc)
    if eps < 0.5:
        return np.asarray(pushed_wave_profile(eps, grid.x), dtype=float), 'minimal-wave'
    return expit(-grid.x / max(1.0, math.sqrt(eps + 1.0))), 'logistic'


def pme_wave_solve(eps: float, c: float, grid: Optional[UniformGrid] = None,
                   maxiter: int = DEFAULT_NEWTON_MAX_ITER,
                   rtol: float = DEFAULT_RESIDUAL_TOL) -> PmeWave:
    """
    Wave of speed c for eps > 0 on a long slab.

    The left end carries the linearized unstable-manifold condition u' = rate (u - 1), the
    phase is fixed by u(0) = 1/2 and the right end is left free. Newton starts from the
    shooting profile at the same speed.

    Args:
        eps: Linear diffusion, > 0
        c: Speed, >= pm_min_speed(eps) for a wave to exist
        grid: Grid containing 0; defaults to pme_grid()

    Returns:
        PmeWave with meta 'residual' and 'iterations'

    Raises:
        NoWaveError: the profile undershoots zero or Newton fails
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"pme_wave_solve needs eps > 0, got {eps}")
    if c < 0:
        raise DomainError(f"speed must be nonnegative, got {c}")
    if grid is None:
        grid = pme_grid()
    system = _PinnedPmeSystem(eps, c, grid)
    u0, start = _starting_profile(eps, c, grid)
    solver = BandedNewtonSolver(system.residual, system.jacobian, u0, (2, 1))
    result = solver.solve(maxiter=maxiter, rtol=rtol, xtol=DEFAULT_UPDATE_TOL)
    c_min = pm_min_speed(eps)
    if not result.converged:
        raise NoWaveError(
            f"no wave at speed {c:.6g} for eps={eps:g} (minimal speed {c_min:.6g}): "
            f"Newton {result.status}"
        )
    u = result.x
    if u.min() < -NO_WAVE_UNDERSHOOT:
        raise NoWaveError(
            f"no wave at speed {c:.6g} for eps={eps:g} (minimal speed {c_min:.6g}): "
            f"profile undershoots to {u.min():.3g}"
        )
    residual = sup_norm(system.interior(u))
    logger.debug("pme wave eps=%g c=%.6g: residual %.3e in %d iterations",
                 eps, c, residual, result.iterations)
    return PmeWave(eps=eps, c=c, u=Field(grid, u), meta={
        'residual': residual, 'iterations': result.iterations, 'method': 'newton',
        'start': start,
    })


def shoot_wave(eps: float, c: float, grid: Optional[UniformGrid] = None,
               eta: float = DEFAULT_SHOOT_ETA) -> PmeWave:
    """
    Wave from the unstable manifold of u = 1, integrated in (u, q = (eps + u) u').

    Args:
        eps: Linear diffusion, >= 0
        c: Speed
        grid: Output grid containing 0; defaults to pme_grid()
        eta: Initial offset from u = 1

    Returns:
        PmeWave shifted so that u(0) = 1/2

    Raises:
        NoWaveError: the trajectory crosses u = 0
    """
    if not (eps >= 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be nonnegative, got {eps}")
    if grid is None:
        grid = pme_grid()
    if c < 2.0 * math.sqrt(eps):
        raise NoWaveError(f"no wave at speed {c:.6g} for eps={eps:g}: below 2 sqrt(eps)")
    rate = _left_rate(eps, c)

    def rhs(_: float, y: np.ndarray) -> List[float]:
        u, q = y
        du = q / (eps + u)
        return [du, -c * du - u * (1.0 - u)]

    def small(_: float, y: np.ndarray) -> float:
        return y[0] - 1e-8

    def turned(_: float, y: np.ndarray) -> float:
        return y[1]

    small.terminal = True  # type: ignore[attr-defined]
    small.direction = -1  # type: ignore[attr-defined]
    turned.terminal = True  # type: ignore[attr-defined]
    turned.direction = 1  # type: ignore[attr-defined]

    y0 = [1.0 - eta, -(eps + 1.0) * rate * eta]
    sol = solve_ivp(rhs, (0.0, 1e3), y0, method='RK45', events=(small, turned),
                    dense_output=True, rtol=DEFAULT_ODE_RTOL, atol=DEFAULT_ODE_ATOL)
    if sol.status != 1 or sol.t_events[1].size:
        raise NoWaveError(
            f"no wave at speed {c:.6g} for eps={eps:g}: trajectory turns before reaching 0"
        )
    if eps > 0:
        u_end, q_end = sol.y_events[0][0]
        fast = (c + math.sqrt(c * c - 4.0 * eps)) / (2.0 * eps)
        if -q_end / ((eps + u_end) * u_end) > 10.0 * fast:
            raise NoWaveError(
                f"no wave at speed {c:.6g} for eps={eps:g}: trajectory crosses u = 0"
            )
    t, u_traj = sol.t, sol.y[0]
    # u is decreasing along the trajectory
    t_half = float(np.interp(0.5, u_traj[::-1], t[::-1]))
    span = t[-1] - t_half
    x = grid.x
    inside = (x >= -t_half) & (x <= span)
    values = np.zeros(grid.n)
    values[inside] = sol.sol(x[inside] + t_half)[0]
    left = x < -t_half
    values[left] = 1.0 - eta * np.exp(rate * (x[left] + t_half))
    return PmeWave(eps=eps, c=c, u=Field(grid, values), meta={'method': 'shooting', 'eta': eta})
