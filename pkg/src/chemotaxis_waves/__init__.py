"""
Chemotaxis Waves - traveling waves of a nonlocal chemotaxis model

Speed selection on slabs, discontinuous and porous-medium waves, limit studies and
property checks of computed profiles.
"""

__version__ = "0.1.0"
__author__ = "chemotaxis-waves developers"

from .diagnostics import run_suite
from .hyperbolic_wave import construct_discontinuous_wave, hyp_to_pme_limit
from .pme_wave import pme_residual, pme_wave_solve
from .profile_io import emit_profile, load_profile
from .slab_solver import WaveParams, solve_slab
from .speed_selector import extend_to_line, hyp_limit_study, pm_limit_study, select_speed

__all__ = [
    "__version__",
    "WaveParams",
    "solve_slab",
    "select_speed",
    "extend_to_line",
    "pm_limit_study",
    "hyp_limit_study",
    "construct_discontinuous_wave",
    "hyp_to_pme_limit",
    "pme_wave_solve",
    "pme_residual",
    "run_suite",
    "emit_profile",
    "load_profile",
]
