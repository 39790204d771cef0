"""
Configuration management for chemotaxis-waves.

Settings resolve in four layers: built-in defaults, the [defaults] section of an INI file,
the section named after the subcommand, and command-line flags.
"""

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .constants import (
    DEFAULT_HYP_TOL,
    DEFAULT_JOBS,
    DEFAULT_LINE_TOL,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SLAB_HALF_LENGTH,
    DEFAULT_SPEED_TOL,
    REGIME_ROWS,
)
from .diagnostics import CHECK_NAMES
from .errors import DomainError
from .slab_solver import WaveParams

JOBS_ENV = 'CHEMOTAXIS_WAVES_JOBS'

COMMON_DEFAULTS: Dict[str, str] = {
    'out': DEFAULT_OUTPUT_DIR,
    'jobs': str(DEFAULT_JOBS),
    'tol': repr(DEFAULT_SPEED_TOL),
    'L': repr(DEFAULT_SLAB_HALF_LENGTH),
}

# Per-subcommand defaults, as the strings an INI file would hold
SUBCOMMAND_DEFAULTS: Dict[str, Dict[str, str]] = {
    'solve-tw': {'chi': '-16', 'nu': '0.001', 'delta': '', 'extend': 'no',
                 'line_tol': repr(DEFAULT_LINE_TOL)},
    'solve-hyp': {'nu': '1', 'tol': repr(DEFAULT_HYP_TOL)},
    'solve-pme': {'eps': '0.25', 'c': ''},
    'verify': {'checks': 'all', 'phi_route': 'no'},
    'sweep': {'chi': '-1e4', 'nu': '0.01', 'delta': '', 'points': '', 'checks': 'all',
              'json': 'yes', 'extend': 'no'},
    'regime-table': {'rows': ','.join(key for key, _ in REGIME_ROWS)},
    'limits-pm': {'eps': '0', 'nus': '0.1,0.01,0.001'},
    'limits-hyp': {'nu': '1', 'chis': '-100,-1000,-10000', 'nus': '0.1,0.01',
                   'hyp_tol': repr(DEFAULT_HYP_TOL)},
    'plot': {'jump': ''},
}


class SolverSettings:
    """Resolved settings of one subcommand, stored as strings with typed getters"""

    def __init__(self, subcommand: str, values: Mapping[str, str]):
        self.subcommand = subcommand
        self.values = dict(values)

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def get_str(self, key: str) -> str:
        return self.values.get(key, '').strip()

    def get_float(self, key: str) -> Optional[float]:
        text = self.get_str(key)
        if not text:
            return None
        try:
            return float(text)
        except ValueError as e:
            raise DomainError(f"setting '{key}' must be a number, got '{text}'") from e

    def get_int(self, key: str) -> Optional[int]:
        value = self.get_float(key)
        if value is None:
            return None
        if value != int(value):
            raise DomainError(f"setting '{key}' must be an integer, got '{self.get_str(key)}'")
        return int(value)

    def get_bool(self, key: str) -> bool:
        return self.get_str(key).lower() in ('1', 'yes', 'true', 'on')

    def get_floats(self, key: str) -> List[float]:
        text = self.get_str(key)
        try:
            return [float(item) for item in text.replace(';', ',').split(',') if item.strip()]
        except ValueError as e:
            raise DomainError(f"setting '{key}' must be a list of numbers, got '{text}'") from e

    @property
    def tol(self) -> float:
        value = self.get_float('tol')
        return DEFAULT_SPEED_TOL if value is None else value

    @property
    def L(self) -> float:
        value = self.get_float('L')
        return DEFAULT_SLAB_HALF_LENGTH if value is None else value

    @property
    def jobs(self) -> int:
        value = self.get_int('jobs')
        return DEFAULT_JOBS if value is None else value

    @property
    def out(self) -> Path:
        return Path(self.get_str('out') or DEFAULT_OUTPUT_DIR)


def get_subcommand_defaults(name: str) -> Optional[Dict[str, str]]:
    """
    Get built-in defaults of a subcommand, common keys included.

    Args:
        name: Subcommand name

    Returns:
        Dict of defaults or None if the subcommand is unknown
    """
    if name not in SUBCOMMAND_DEFAULTS:
        return None
    defaults = dict(COMMON_DEFAULTS)
    env_jobs = os.environ.get(JOBS_ENV, '').strip()
    if env_jobs:
        defaults['jobs'] = env_jobs
    defaults.update(SUBCOMMAND_DEFAULTS[name])
    return defaults


def get_available_subcommands() -> List[str]:
    """
    Get list of subcommands.

    Returns:
        List of subcommand names
    """
    return list(SUBCOMMAND_DEFAULTS.keys())


def load_config(path: Optional[Union[str, Path]]) -> configparser.ConfigParser:
    """
    Read an INI configuration file.

    Args:
        path: File path; None gives an empty configuration

    Returns:
        ConfigParser with case-preserving keys
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    if path is None:
        return parser
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            parser.read_file(f)
    except configparser.Error as e:
        raise DomainError(f"cannot parse config file {path}: {e}") from e
    return parser


def resolve_settings(section: str, overrides: Optional[Mapping[str, object]] = None,
                     config: Optional[configparser.ConfigParser] = None) -> SolverSettings:
    """
    Layer built-in defaults, the [defaults] section, the subcommand section and overrides.

    Args:
        section: Subcommand name
        overrides: Command-line values; None entries are ignored
        config: Parsed configuration file

    Returns:
        SolverSettings
    """
    defaults = get_subcommand_defaults(section)
    if defaults is None:
        raise DomainError(f"unknown subcommand '{section}'")
    values = dict(defaults)
    if config is not None:
        for name in ('defaults', section):
            if config.has_section(name):
                values.update(dict(config.items(name)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ','.join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        values[key] = str(value)
    return SolverSettings(section, values)


Triple = Tuple[float, float, Optional[float]]


@dataclass
class SweepSpec:
    """Parameter points and run options of a sweep."""

    points: List[Triple] = field(default_factory=list)
    tol: float = DEFAULT_SPEED_TOL
    L: float = DEFAULT_SLAB_HALF_LENGTH
    out: Path = Path(DEFAULT_OUTPUT_DIR)
    checks: List[str] = field(default_factory=lambda: list(CHECK_NAMES))
    jobs: int = DEFAULT_JOBS
    json: bool = True
    extend: bool = False


def _parse_points(text: str) -> List[Triple]:
    points: List[Triple] = []
    for k, item in enumerate(p for p in text.split(';') if p.strip()):
        parts = [s.strip() for s in item.split(',')]
        if len(parts) not in (2, 3):
            raise DomainError(f"sweep point {k + 1} must be 'chi, nu[, delta]', got '{item}'")
        try:
            chi, nu = float(parts[0]), float(parts[1])
            delta = float(parts[2]) if len(parts) == 3 and parts[2] else None
        except ValueError as e:
            raise DomainError(f"sweep point {k + 1} is not numeric: '{item}'") from e
        points.append((chi, nu, delta))
    return points


def parse_sweep_spec(settings: SolverSettings) -> SweepSpec:
    """
    Build a SweepSpec from resolved settings.

    Explicit 'points' ("chi, nu[, delta]; ...") win over the chi x nu grid.
    """
    if settings.get_str('points'):
        points = _parse_points(settings.get_str('points'))
    else:
        delta = settings.get_float('delta')
        points = [(chi, nu, delta) for chi in settings.get_floats('chi')
                  for nu in settings.get_floats('nu')]
    checks_text = settings.get_str('checks') or 'all'
    checks = list(CHECK_NAMES) if checks_text == 'all' else [
        c.strip() for c in checks_text.split(',') if c.strip()]
    return SweepSpec(
        points=points, tol=settings.tol, L=settings.L, out=settings.out, checks=checks,
        jobs=settings.jobs, json=settings.get_bool('json'), extend=settings.get_bool('extend'),
    )


def validate_sweep_spec(spec: SweepSpec) -> Tuple[bool, str]:
    """
    Check every point and option of a sweep.

    Returns:
        Tuple of (valid, message)
    """
    if not spec.tol > 0:
        return False, f"tolerance must be positive, got {spec.tol}"
    if not spec.L > 0:
        return False, f"L must be positive, got {spec.L}"
    if spec.jobs < 1:
        return False, f"jobs must be at least 1, got {spec.jobs}"
    unknown = [c for c in spec.checks if c not in CHECK_NAMES]
    if unknown:
        return False, f"unknown checks: {', '.join(unknown)}"
    for k, (chi, nu, delta) in enumerate(spec.points, 1):
        try:
            WaveParams(chi=chi, nu=nu, c=0.0, delta=delta, L=spec.L)
        except DomainError as e:
            return False, f"point {k} (chi={chi:g}, nu={nu:g}): {e}"
    return True, f"{len(spec.points)} points"
