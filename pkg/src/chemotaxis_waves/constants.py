"""
Constants and default numerical parameters for chemotaxis-waves.
"""

import math
from typing import Dict, List, Tuple

# Grid resolution: dx <= min(sqrt(nu), 1/sqrt(|chi|)) / DEFAULT_GRID_DIVISOR
DEFAULT_GRID_DIVISOR = 20
DEFAULT_HYP_GRID_DIVISOR = 40
DEFAULT_SLAB_HALF_LENGTH = 40.0

# Newton / pseudo-transient continuation
DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_UPDATE_TOL = 1e-8
DEFAULT_NEWTON_MAX_ITER = 400
DEFAULT_PTC_INITIAL_STEP = 0.5
DEFAULT_PTC_MIN_GROWTH = 1.2
DEFAULT_PTC_MAX_GROWTH = 10.0
DEFAULT_PTC_CUT = 0.25
DEFAULT_PTC_MIN_STEP = 1e-10
DEFAULT_PTC_BLOWUP = 10.0  # reject steps that grow the residual by more than this
DEFAULT_STALL_RATIO = 0.5  # below rtol, a step reducing the residual less than this hit the floor
DEFAULT_PECLET_SWITCH = 2.0
DEFAULT_CONTINUATION_STEPS: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)

# Outer damped fixed point on v (picard coupling)
DEFAULT_OUTER_DAMPING = 0.5
DEFAULT_OUTER_MAX_ITER = 200
DEFAULT_INNER_MAX_ITER = 60

# Speed selection
DEFAULT_SPEED_TOL = 1e-6
DEFAULT_PRESCAN_POINTS = 8
DEFAULT_BISECTION_MAX_ITER = 60
DEFAULT_BRACKET_COLLAPSE_ULPS = 8
DEFAULT_LINE_TOL = 1e-3
DEFAULT_MAX_DOUBLINGS = 3
DEFAULT_LINE_WINDOW: Tuple[float, float] = (-10.0, 10.0)
PM_LIMIT_CHI = -1e4  # eps = 0 surrogate

# Hyperbolic wave construction
DEFAULT_HYP_TOL = 1e-7
DEFAULT_HYP_DAMPING = 0.3
DEFAULT_HYP_MAX_ITER = 400
DEFAULT_HYP_ETA = 1e-8
DEFAULT_ODE_RTOL = 1e-10
DEFAULT_ODE_ATOL = 1e-12
HYP_DOMAIN_SCALE = 40.0  # X = 40 sqrt(nu) + 40

# PME waves
DEFAULT_PME_HALF_LENGTH = 30.0
DEFAULT_PME_DX = 5e-3
DEFAULT_SHOOT_ETA = 1e-6
NO_WAVE_UNDERSHOOT = 1e-4
BUMP_HALF_WIDTHS: Tuple[float, ...] = (1.0, 2.0, 4.0)
BUMPS_PER_WIDTH = 4

# Kernels
PHI_TRUNCATION = 40.0  # phi kernel support in units of sqrt(nu)
GAUSS_LEGENDRE_POINTS = 8
EULER_GAMMA = 0.5772156649015329

# Diagnostics
U_FLOOR = 1e-14
PLATEAU_TOL = 1e-10
STRUCTURE_TOL = 1e-6
OSCILLATION_C_THRESHOLD = 10.0  # convention, the universal constant is never valued
MIN_WINDOW_POINTS = 8
HOLDER_MAX_DISTANCE = 5.0
HOLDER_LAG_COUNT = 200
DECAY_A0 = 4.0 * math.log(8.0)
DECAY_SLACK = 1e-12
DECAY_FIT_FLOOR = 1e-12

# Output
PROFILE_FORMAT_VERSION = 1
SUPPORTED_PROFILE_VERSIONS: List[int] = [1]
SWEEP_COLUMNS: List[str] = [
    'chi', 'nu', 'delta', 'c', 'L_final', 'residual',
    'energy_gap', 'oscillation_C', 'decay_violations', 'structure_violations',
    'holder_ok', 'quasi_gap', 'status',
]
DEFAULT_OUTPUT_DIR = 'results'
DEFAULT_JOBS = 1

# Regime table rows: (key, description)
REGIME_ROWS: List[Tuple[str, str]] = [
    ('pushed', 'd << -chi, -chi >~ 2'),
    ('pulled', 'd << -chi, -chi <~ 2'),
    ('hyperbolic', '1 << -chi ~ d'),
]

# Default probe parameters per regime row: (chi, nu)
REGIME_PROBES: Dict[str, Tuple[float, float]] = {
    'pushed': (-16.0, 1e-3),
    'pulled': (-1.0, 1e-3),
    'hyperbolic': (-1e3, 1.0),
}
