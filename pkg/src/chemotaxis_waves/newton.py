"""
Newton's method for banded nonlinear systems, globalized by pseudo-transient continuation.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .constants import (
    DEFAULT_NEWTON_MAX_ITER,
    DEFAULT_PTC_BLOWUP,
    DEFAULT_PTC_CUT,
    DEFAULT_PTC_INITIAL_STEP,
    DEFAULT_PTC_MAX_GROWTH,
    DEFAULT_PTC_MIN_GROWTH,
    DEFAULT_PTC_MIN_STEP,
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_STALL_RATIO,
    DEFAULT_UPDATE_TOL,
)

logger = logging.getLogger(__name__)

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], np.ndarray]

CONVERGED_STATUSES = ('converged', 'residual-floor')


def sup_norm(x: np.ndarray) -> float:
    """Maximum absolute entry, 0 for empty input."""
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def banded_to_dense(bands: np.ndarray, lower: int, upper: int) -> np.ndarray:
    """Expand a matrix stored in solve_banded layout."""
    n = bands.shape[1]
    dense = np.zeros((n, n))
    for row in range(lower + upper + 1):
        k = upper - row
        if k >= 0:
            idx = np.arange(0, n - k)
            dense[idx, idx + k] = bands[row, k:]
        else:
            idx = np.arange(-k, n)
            dense[idx, idx + k] = bands[row, :n + k]
    return dense


@dataclass
class NewtonResult:
    """Outcome of a Newton solve."""

    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    update: float
    status: str
    rnorms: List[float] = field(default_factory=list)


class BandedNewtonSolver:
    """
    Solve R(x) = 0 where the Jacobian is banded.

    Each step solves (J - M/dt) dx = -R with a diagonal pseudo-mass M. The pseudo-time step dt
    grows with the residual reduction, so the iteration starts as a damped implicit time march
    and ends as plain Newton.
    """

    def __init__(self, residual: ResidualFn, jacobian: JacobianFn, x0: np.ndarray,
                 bands: Tuple[int, int], mass: Optional[np.ndarray] = None):
        """
        Args:
            residual: R(x)
            jacobian: J(x) in solve_banded layout, shape (lower + upper + 1, n)
            x0: Initial guess (copied)
            bands: (lower, upper) band widths
            mass: Pseudo-mass diagonal, or a full matrix in solve_banded layout;
                None for undamped Newton
        """
        self.rfun = residual
        self.jfun = jacobian
        self.x = np.array(x0, dtype=float)
        self.lower, self.upper = bands
        self.mass = None if mass is None else np.asarray(mass, dtype=float)
        self.i = 0
        self.rnorms: List[float] = []
        self.fluct: List[float] = []

    def _direction(self, r: np.ndarray, dt: float) -> np.ndarray:
        bands = np.array(self.jfun(self.x), dtype=float)
        if self.mass is not None and np.isfinite(dt):
            if self.mass.ndim == 1:
                bands[self.upper] -= self.mass / dt
            else:
                bands -= self.mass / dt
        return linalg.solve_banded((self.lower, self.upper), bands, -r, check_finite=False)

    def solve(self, maxiter: int = DEFAULT_NEWTON_MAX_ITER,
              rtol: float = DEFAULT_RESIDUAL_TOL, xtol: float = DEFAULT_UPDATE_TOL,
              dt0: float = DEFAULT_PTC_INITIAL_STEP) -> NewtonResult:
        """
        Iterate until the residual and the last update are both below tolerance.

        A residual below rtol that stops decreasing (round-off floor of an ill-conditioned
        Jacobian) also ends the iteration, with status 'residual-floor'.

        Args:
            maxiter: Iteration cap (accepted and rejected steps)
            rtol: Sup-norm residual tolerance
            xtol: Sup-norm update tolerance
            dt0: Initial pseudo-time step (ignored without a mass)

        Returns:
            NewtonResult with the last accepted iterate
        """
        dt = dt0 if self.mass is not None else np.inf
        r = self.rfun(self.x)
        rn = sup_norm(r)
        self.rnorms.append(rn)
        dxn = np.inf
        floor = False
        status = 'max-iterations'

        for _ in range(maxiter):
            if rn < rtol and dxn < xtol:
                status = 'converged'
                break
            if floor:
                status = 'residual-floor'
                break
            self.i += 1
            try:
                dx = self._direction(r, dt)
            except (linalg.LinAlgError, ValueError):
                dx = None
            if dx is None or not np.all(np.isfinite(dx)):
                if not self._cut(dt):
                    status = 'singular-jacobian'
                    break
                dt *= DEFAULT_PTC_CUT
                continue

            x_new = self.x + dx
            r_new = self.rfun(x_new)
            rn_new = sup_norm(r_new)
            if not np.isfinite(rn_new) or rn_new > DEFAULT_PTC_BLOWUP * max(rn, rtol):
                if not self._cut(dt):
                    status = 'diverged'
                    break
                dt *= DEFAULT_PTC_CUT
                logger.debug("newton %d: rejected step, residual %.3e -> %.3e", self.i, rn, rn_new)
                continue

            ratio = rn / rn_new if rn_new > 0 else DEFAULT_PTC_MAX_GROWTH
            if ratio < 1.0:
                dt *= max(ratio, DEFAULT_PTC_CUT)
            else:
                dt *= min(max(ratio, DEFAULT_PTC_MIN_GROWTH), DEFAULT_PTC_MAX_GROWTH)
            floor = rn < rtol and DEFAULT_STALL_RATIO * rn < rn_new < rtol
            self.x, r, rn = x_new, r_new, rn_new
            dxn = sup_norm(dx)
            self.rnorms.append(rn)
            self.fluct.append(dxn)
            logger.debug("newton %d: residual %.3e update %.3e dt %.3g", self.i, rn, dxn, dt)
        else:
            if rn < rtol and dxn < xtol:
                status = 'converged'
            elif floor:
                status = 'residual-floor'

        return NewtonResult(
            x=self.x.copy(), converged=status in CONVERGED_STATUSES, iterations=self.i,
            residual=rn, update=float(dxn), status=status, rnorms=list(self.rnorms),
        )

    def _cut(self, dt: float) -> bool:
        """Whether dt may still be reduced."""
        return self.mass is not None and dt * DEFAULT_PTC_CUT >= DEFAULT_PTC_MIN_STEP


def band_add(bands: np.ndarray, upper: int, rows: np.ndarray, cols: np.ndarray,
             values: np.ndarray) -> None:
    """Accumulate J[rows, cols] += values into solve_banded layout."""
    np.add.at(bands, (upper + rows - cols, cols), values)
