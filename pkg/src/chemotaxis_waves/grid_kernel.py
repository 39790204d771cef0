"""
Uniform grids, sampled fields, the exponential kernel and its Bessel factor.

The screened-Poisson kernel K(x) = exp(-|x|/s) / (2s), s = sqrt(nu), is applied through the
left and right exponential sums

    lam(x) = int_{-inf}^{x} exp(-(x-y)/s) u(y) dy,    rho(x) = int_{x}^{inf} exp(-(y-x)/s) u(y) dy,

so that K*u = (lam + rho)/(2s) and (K*u)' = (rho - lam)/(2 nu). Both sums obey a one-step
recursion on a uniform grid, which makes the convolution O(n) and exact for the piecewise-linear
interpolant of the samples. The constant far-field extension enters through closed-form tails.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, linalg, signal

from .constants import DEFAULT_GRID_DIVISOR, GAUSS_LEGENDRE_POINTS, PHI_TRUNCATION
from .errors import DomainError, SingularityError, WaveError
from .special import bessel_k0

logger = logging.getLogger(__name__)

FloatOrArray = Union[float, np.ndarray]


@dataclass(frozen=True)
class UniformGrid:
    """Uniform sample grid x(i) = x_min + i*dx, i = 0..n-1."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self) -> None:
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise DomainError(f"grid spacing must be positive, got {self.dx}")
        if self.n < 2:
            raise DomainError(f"grid needs at least 2 samples, got {self.n}")
        if not math.isfinite(self.x_min):
            raise DomainError("grid origin must be finite")

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def x_max(self) -> float:
        return self.x_min + self.dx * (self.n - 1)

    def index_of(self, x: float) -> int:
        """Nearest grid index to x, clipped to the grid."""
        i = int(round((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n - 1)

    @property
    def origin_index(self) -> int:
        """Index of the node at x = 0; the grid must contain the origin."""
        i = self.index_of(0.0)
        if abs(self.x_min + i * self.dx) > 0.5 * self.dx:
            raise DomainError("grid does not contain the origin")
        return i

    def sub_grid(self, start: int, stop: int) -> 'UniformGrid':
        """Grid of nodes start..stop-1."""
        return UniformGrid(self.x_min + start * self.dx, self.dx, stop - start)


@dataclass(frozen=True)
class Field:
    """Real samples on a uniform grid."""

    grid: UniformGrid
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise DomainError(f"field has {values.size} samples for a grid of {self.grid.n}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return self.grid.n

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def at(self, x: ArrayLike) -> FloatOrArray:
        """Linear interpolation; constant continuation outside the grid."""
        return np.interp(x, self.grid.x, self.values)

    def with_values(self, values: ArrayLike, **meta: Any) -> 'Field':
        return Field(self.grid, np.asarray(values, dtype=float), dict(meta))

    def window(self, a: float, b: float) -> 'Field':
        """Restriction to the nodes inside [a, b]."""
        x = self.grid.x
        idx = np.nonzero((x >= a - 1e-12) & (x <= b + 1e-12))[0]
        if idx.size < 2:
            raise DomainError(f"window [{a}, {b}] holds fewer than two nodes")
        grid = self.grid.sub_grid(int(idx[0]), int(idx[-1]) + 1)
        return Field(grid, self.values[idx[0]:idx[-1] + 1])


@dataclass(frozen=True)
class KernelParams:
    """Length-scale of the screened-Poisson kernel."""

    nu: float

    def __post_init__(self) -> None:
        _require_positive_nu(self.nu)

    @property
    def sqrt_nu(self) -> float:
        return math.sqrt(self.nu)


def _require_positive_nu(nu: float) -> None:
    if not (nu > 0 and math.isfinite(nu)):
        raise DomainError(f"nu must be positive, got {nu}")


def default_grid(L: float, nu: float, chi: Optional[float] = None,
                 divisor: int = DEFAULT_GRID_DIVISOR) -> UniformGrid:
    """
    Grid on [-L, L] resolving both the kernel and the diffusive layer.

    Args:
        L: Slab half-length
        nu: Kernel length-scale
        chi: Chemotaxis strength (None for the hyperbolic limit)
        divisor: Points per resolved length

    Returns:
        Grid with an odd node count and a node at x = 0
    """
    _require_positive_nu(nu)
    if not L > 0:
        raise DomainError(f"slab half-length must be positive, got {L}")
    scale = math.sqrt(nu)
    if chi is not None:
        scale = min(scale, 1.0 / math.sqrt(abs(chi)))
    half = int(math.ceil(L * divisor / scale))
    return UniformGrid(-L, L / half, 2 * half + 1)


def eval_K(nu: float, x: ArrayLike) -> FloatOrArray:
    """Screened-Poisson kernel exp(-|x|/sqrt(nu)) / (2 sqrt(nu))."""
    _require_positive_nu(nu)
    s = math.sqrt(nu)
    return np.exp(-np.abs(x) / s) / (2.0 * s)


def eval_phi(nu: float, x: ArrayLike) -> FloatOrArray:
    """
    Square-root factor of the kernel, K0(|x|/sqrt(nu)) / (pi sqrt(nu)).

    Raises:
        SingularityError: at x = 0 (logarithmic singularity)
    """
    _require_positive_nu(nu)
    xa = np.abs(np.asarray(x, dtype=float))
    if np.any(xa == 0.0):
        raise SingularityError("phi kernel is singular at x = 0")
    s = math.sqrt(nu)
    out = bessel_k0(xa / s) / (math.pi * s)
    return float(out) if out.ndim == 0 else out


def _partial_cell_weights(a: ArrayLike, s: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Weights of int_0^a exp(-(a-t)/s) p(t) dt for p linear from p(0) to p(a).

    Returns:
        (decay exp(-a/s), weight of the far end p(0), weight of the near end p(a))
    """
    a = np.asarray(a, dtype=float)
    decay = np.exp(-a / s)
    one_minus = -np.expm1(-a / s)
    safe = np.where(a > 0, a, 1.0)
    q = np.where(a > 0, s * one_minus / safe, 1.0)
    return decay, s * (q - decay), s * (1.0 - q)


def _exponential_sums(values: np.ndarray, dx: float, s: float,
                      far_left: float, far_right: float) -> Tuple[np.ndarray, np.ndarray]:
    """Left and right exponential sums at the grid nodes."""
    decay, w_far, w_near = (float(w) for w in _partial_cell_weights(dx, s))
    forcing = np.empty_like(values)
    forcing[0] = far_left * s
    forcing[1:] = w_far * values[:-1] + w_near * values[1:]
    lam = signal.lfilter([1.0], [1.0, -decay], forcing)
    forcing[-1] = far_right * s
    forcing[:-1] = w_far * values[1:] + w_near * values[:-1]
    rho = signal.lfilter([1.0], [1.0, -decay], forcing[::-1])[::-1]
    return lam, rho


def _coarse_grid_meta(grid: UniformGrid, s: float) -> Dict[str, Any]:
    if grid.dx > s:
        logger.warning("grid spacing %.3g exceeds sqrt(nu) = %.3g", grid.dx, s)
        return {'status': 'warning: grid too coarse (dx > sqrt(nu))'}
    return {'status': 'ok'}


def convolve_K_with_slope(u: Field, nu: float, far_left: float,
                          far_right: float) -> Tuple[Field, Field]:
    """
    v = K*u_bar and v_x from one pass of the exponential sums.

    Args:
        u: Sampled profile
        nu: Kernel length-scale
        far_left: Constant value of u_bar left of the grid
        far_right: Constant value of u_bar right of the grid

    Returns:
        (v, v_x) on the grid of u
    """
    _require_positive_nu(nu)
    s = math.sqrt(nu)
    lam, rho = _exponential_sums(u.values, u.grid.dx, s, far_left, far_right)
    meta = _coarse_grid_meta(u.grid, s)
    v = Field(u.grid, (lam + rho) / (2.0 * s), dict(meta))
    v_x = Field(u.grid, (rho - lam) / (2.0 * nu), dict(meta))
    return v, v_x


def convolve_K(u: Field, nu: float, far_left: float, far_right: float) -> Field:
    """
    Convolve u, extended by constants, with the screened-Poisson kernel.

    Args:
        u: Sampled profile
        nu: Kernel length-scale
        far_left: Constant extension on the left
        far_right: Constant extension on the right

    Returns:
        K*u_bar on the same grid; meta['status'] flags coarse grids
    """
    return convolve_K_with_slope(u, nu, far_left, far_right)[0]


def _sums_at(u: Field, nu: float, far_left: float, far_right: float,
             x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Exponential sums at arbitrary positions."""
    s = math.sqrt(nu)
    grid = u.grid
    lam_n, rho_n = _exponential_sums(u.values, grid.dx, s, far_left, far_right)
    lam = np.empty_like(x)
    rho = np.empty_like(x)

    left = x < grid.x_min
    right = x > grid.x_max
    inside = ~(left | right)

    gap = grid.x_min - x[left]
    decay = np.exp(-gap / s)
    lam[left] = far_left * s
    rho[left] = decay * rho_n[0] + far_left * s * (1.0 - decay)

    gap = x[right] - grid.x_max
    decay = np.exp(-gap / s)
    rho[right] = far_right * s
    lam[right] = decay * lam_n[-1] + far_right * s * (1.0 - decay)

    xi = x[inside]
    cell = np.clip(np.floor((xi - grid.x_min) / grid.dx).astype(int), 0, grid.n - 2)
    t = np.clip(xi - (grid.x_min + cell * grid.dx), 0.0, grid.dx)
    ua = u.values[cell]
    ub = u.values[cell + 1]
    ux = ua + (ub - ua) * t / grid.dx
    decay, w_far, w_near = _partial_cell_weights(t, s)
    lam[inside] = decay * lam_n[cell] + w_far * ua + w_near * ux
    decay, w_far, w_near = _partial_cell_weights(grid.dx - t, s)
    rho[inside] = decay * rho_n[cell + 1] + w_far * ub + w_near * ux
    return lam, rho


def v_slope(u: Field, nu: float, far_left: float, far_right: float,
            x: ArrayLike) -> FloatOrArray:
    """
    Slope of K*u_bar at x,

        v_x(x) = 1/(2 nu) int_0^inf exp(-y/sqrt(nu)) (u(x+y) - u(x-y)) dy.

    Args:
        u: Sampled profile
        nu: Kernel length-scale
        far_left: Constant extension on the left
        far_right: Constant extension on the right
        x: Position(s), inside or outside the grid

    Returns:
        v_x at x
    """
    _require_positive_nu(nu)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    lam, rho = _sums_at(u, nu, far_left, far_right, xa)
    out = (rho - lam) / (2.0 * nu)
    return float(out[0]) if np.ndim(x) == 0 else out


def screened_poisson(u: Field, nu: float, far_left: float, far_right: float) -> Field:
    """
    Solve -nu v'' + v = u with second-order differences.

    Boundary values come from the convolution, so the two routes agree to O(dx^2).

    Returns:
        v on the grid of u; meta['residual'] is the sup-norm of the discrete equation
    """
    _require_positive_nu(nu)
    n = u.grid.n
    if n < 3:
        raise DomainError("screened Poisson solve needs at least 3 nodes")
    boundary = convolve_K(u, nu, far_left, far_right)
    off = -nu / u.grid.dx ** 2
    bands = np.zeros((3, n))
    bands[0, 2:] = off
    bands[1, :] = 1.0 - 2.0 * off
    bands[2, :-2] = off
    bands[1, 0] = bands[1, -1] = 1.0
    rhs = np.array(u.values, dtype=float)
    rhs[0] = boundary.values[0]
    rhs[-1] = boundary.values[-1]
    try:
        v = linalg.solve_banded((1, 1), bands, rhs)
    except linalg.LinAlgError as e:
        raise WaveError(f"screened Poisson system is singular: {e}") from e
    residual = -nu * np.diff(v, 2) / u.grid.dx ** 2 + v[1:-1] - u.values[1:-1]
    meta = dict(boundary.meta)
    meta['residual'] = float(np.max(np.abs(residual))) if residual.size else 0.0
    return Field(u.grid, v, meta)


def phi_cell_weights(nu: float, dx: float) -> np.ndarray:
    """
    Cell integrals of the phi kernel over [(k-1/2)dx, (k+1/2)dx], k = -m..m.

    The centre cell holds the logarithmic singularity and is integrated adaptively;
    the others use Gauss-Legendre quadrature.
    """
    _require_positive_nu(nu)
    s = math.sqrt(nu)
    a = dx / s
    m = max(1, int(math.ceil(PHI_TRUNCATION / a)))
    centre, _ = integrate.quad(lambda t: float(bessel_k0(t)), 0.0, 0.5 * a, limit=200)
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_LEGENDRE_POINTS)
    k = np.arange(1, m + 1, dtype=float)[:, None]
    t = k * a + 0.5 * a * nodes[None, :]
    side = 0.5 * a * (bessel_k0(t) @ weights) / math.pi
    return np.concatenate([side[::-1], [2.0 * centre / math.pi], side])


def convolve_phi(u: Field, nu: float, far_left: float, far_right: float,
                 margin: bool = False) -> Field:
    """
    Convolve u, extended by constants, with the phi kernel.

    Args:
        u: Sampled profile
        nu: Kernel length-scale
        far_left: Constant extension on the left
        far_right: Constant extension on the right
        margin: Also return the kernel half-width beyond each end of the grid

    Returns:
        phi*u_bar on the grid of u, or on the grid widened by the kernel half-width
    """
    weights = phi_cell_weights(nu, u.grid.dx)
    m = (weights.size - 1) // 2
    pad = 2 * m if margin else m
    padded = np.concatenate([np.full(pad, far_left), u.values, np.full(pad, far_right)])
    out = signal.fftconvolve(padded, weights, mode='valid')
    grid = u.grid
    if margin:
        grid = UniformGrid(grid.x_min - m * grid.dx, grid.dx, grid.n + 2 * m)
    return Field(grid, out, _coarse_grid_meta(u.grid, math.sqrt(nu)))
