"""
Profile files: '#'-prefixed "key = value" header lines, then whitespace-separated columns.

Numbers are written as shortest round-trip decimals, so load_profile(emit_profile(w)) is exact.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .constants import PROFILE_FORMAT_VERSION, SUPPORTED_PROFILE_VERSIONS
from .errors import DomainError, ProfileFormatError, UnsupportedVersionError
from .grid_kernel import Field, UniformGrid
from .hyperbolic_wave import HypWave
from .pme_wave import PmeWave
from .slab_solver import SlabSolution
from .speed_selector import TravelingWave

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Header keys in emission order; absent values are skipped
HEADER_KEYS = [
    'format_version', 'kind', 'chi', 'nu', 'delta', 'eps', 'L', 'c', 'jump', 'support_edge',
    'far_left', 'far_right', 'x_min', 'dx', 'rows', 'columns', 'provenance', 'timestamp',
]
REQUIRED_KEYS = ['format_version', 'kind', 'c', 'x_min', 'dx', 'rows', 'columns']
NUMERIC_KEYS = ['chi', 'nu', 'delta', 'eps', 'L', 'c', 'jump', 'support_edge', 'far_left',
                'far_right']


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write text through a temporary sibling file and os.replace."""
    path = Path(path)
    tmp = path.with_name(path.name + '.tmp')
    with tmp.open('w', encoding='utf-8', newline='\n') as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(str(tmp), str(path))


def format_number(value: float) -> str:
    """Shortest decimal text that reads back to the same double."""
    return repr(float(value))


@dataclass
class ProfileFile:
    """Header and sampled columns of one stored profile."""

    header: Dict[str, str]
    x: np.ndarray
    u: np.ndarray
    v: Optional[np.ndarray] = None
    path: Optional[Path] = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return self.header['kind']

    @property
    def version(self) -> int:
        return int(self.header['format_version'])

    @property
    def c(self) -> float:
        return float(self.header['c'])

    @property
    def jump(self) -> Optional[float]:
        text = self.header.get('jump')
        return float(text) if text else None

    @property
    def grid(self) -> UniformGrid:
        return UniformGrid(float(self.header['x_min']), float(self.header['dx']), len(self.x))

    @property
    def params(self) -> Dict[str, float]:
        """Numeric header values, as run_suite expects them."""
        return {key: float(self.header[key]) for key in NUMERIC_KEYS if self.header.get(key)}

    def fields(self) -> Dict[str, Field]:
        grid = self.grid
        meta = {'jump': self.jump} if self.jump is not None else {}
        out = {'u': Field(grid, self.u, dict(meta))}
        if self.v is not None:
            out['v'] = Field(grid, self.v)
        return out


def _header_for(kind: str, c: float, grid: UniformGrid, **values: Any) -> Dict[str, str]:
    header = {'format_version': str(PROFILE_FORMAT_VERSION), 'kind': kind, 'c': format_number(c),
              'x_min': format_number(grid.x_min), 'dx': format_number(grid.dx),
              'rows': str(grid.n)}
    for key, value in values.items():
        if value is None or (isinstance(value, float) and not math.isfinite(value)):
            continue
        header[key] = format_number(value) if isinstance(value, (int, float)) else str(value)
    return header


def to_profile(wave: Any) -> ProfileFile:
    """
    Convert a solver result to a ProfileFile.

    Args:
        wave: SlabSolution, TravelingWave, HypWave, PmeWave or ProfileFile

    Returns:
        ProfileFile without provenance or timestamp
    """
    if isinstance(wave, ProfileFile):
        return ProfileFile(dict(wave.header), wave.x, wave.u, wave.v)
    if isinstance(wave, (SlabSolution, TravelingWave)):
        p = wave.params
        kind = 'slab' if isinstance(wave, SlabSolution) else 'line'
        L = p.L if isinstance(wave, SlabSolution) else wave.L_final
        header = _header_for(kind, p.c, wave.u.grid, chi=p.chi, nu=p.nu, delta=p.delta, L=L,
                             far_left=1.0, far_right=0.0, columns='x u v')
        return ProfileFile(header, wave.u.x, wave.u.values, wave.v.values)
    if isinstance(wave, HypWave):
        u = wave.u_full()
        header = _header_for('hyperbolic', wave.c, u.grid, nu=wave.nu, L=wave.X, jump=0.0,
                             far_left=1.0, far_right=0.0, columns='x u v')
        return ProfileFile(header, u.x, u.values, wave.v.values)
    if isinstance(wave, PmeWave):
        header = _header_for('pme', wave.c, wave.u.grid, eps=wave.eps,
                             support_edge=wave.support_edge, far_left=1.0, far_right=0.0,
                             columns='x u')
        return ProfileFile(header, wave.u.x, wave.u.values, None)
    raise DomainError(f"cannot store a profile of type {type(wave).__name__}")


def emit_profile(wave: Any, path: PathLike, provenance: Optional[str] = None,
                 timestamp: Optional[str] = None) -> ProfileFile:
    """
    Write a wave to a profile file.

    Args:
        wave: Anything to_profile accepts
        path: Output file path
        provenance: Source description; defaults to provenance()
        timestamp: ISO-8601 time; defaults to now (UTC)

    Returns:
        The ProfileFile written
    """
    profile = to_profile(wave)
    if provenance is None:
        from .provenance import provenance as current_provenance
        provenance = current_provenance()
    profile.header['provenance'] = provenance
    profile.header['timestamp'] = timestamp or datetime.now(timezone.utc).isoformat(
        timespec='seconds')

    lines = [f"# {key} = {profile.header[key]}" for key in HEADER_KEYS if key in profile.header]
    columns = [profile.x, profile.u] + ([profile.v] if profile.v is not None else [])
    for row in zip(*columns):
        lines.append(' '.join(format_number(value) for value in row))
    atomic_write_text(path, '\n'.join(lines) + '\n')
    profile.path = Path(path)
    logger.debug("wrote %d rows to %s", len(profile.x), path)
    return profile


def _parse_header_line(line: str, line_number: int) -> Tuple[str, str]:
    body = line[1:].strip()
    key, sep, value = body.partition('=')
    if not sep or not key.strip():
        raise ProfileFormatError(f"header line must read '# key = value', got '{line}'",
                                 line_number)
    return key.strip(), value.strip()


def _check_version(text: str, line_number: int) -> None:
    try:
        version = int(text)
    except ValueError:
        raise ProfileFormatError(f"format_version must be an integer, got '{text}'",
                                 line_number) from None
    if version not in SUPPORTED_PROFILE_VERSIONS:
        supported = ', '.join(str(v) for v in SUPPORTED_PROFILE_VERSIONS)
        raise UnsupportedVersionError(
            f"unsupported version {version} (supported: {supported})", line_number)


def load_profile(path: PathLike) -> ProfileFile:
    """
    Read a profile file.

    Args:
        path: File written by emit_profile

    Returns:
        ProfileFile

    Raises:
        ProfileFormatError: Malformed header or row, or a row count mismatch
        UnsupportedVersionError: format_version not supported
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DomainError(f"cannot read profile {path}: {e}") from e
    lines = text.splitlines()

    header: Dict[str, str] = {}
    rows: List[List[float]] = []
    width = 0
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.startswith('#'):
            if rows:
                raise ProfileFormatError("header line after data rows", number)
            key, value = _parse_header_line(line, number)
            if not header and key != 'format_version':
                raise ProfileFormatError("first header line must be format_version", number)
            if key == 'format_version':
                _check_version(value, number)
            header[key] = value
            continue
        if not rows:
            missing = [key for key in REQUIRED_KEYS if key not in header]
            if missing:
                raise ProfileFormatError(f"missing header keys: {', '.join(missing)}", number)
            width = len(header['columns'].split())
            if header['columns'].split()[:2] != ['x', 'u'] or width not in (2, 3):
                raise ProfileFormatError(f"unsupported columns '{header['columns']}'", number)
        parts = line.split()
        if len(parts) != width:
            raise ProfileFormatError(f"expected {width} columns, got {len(parts)}", number)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ProfileFormatError(f"non-numeric value in row '{line}'", number) from None

    end = len(lines) + 1
    if not header:
        raise ProfileFormatError("empty profile file", end)
    missing = [key for key in REQUIRED_KEYS if key not in header]
    if missing:
        raise ProfileFormatError(f"missing header keys: {', '.join(missing)}", end)
    try:
        expected = int(header['rows'])
    except ValueError:
        raise ProfileFormatError(f"rows must be an integer, got '{header['rows']}'", end) from None
    if len(rows) != expected:
        raise ProfileFormatError(f"header declares {expected} rows, file holds {len(rows)}", end)

    data = np.array(rows, dtype=float).reshape(len(rows), max(width, 2))
    x = data[:, 0]
    if x.size < 2 or np.any(np.diff(x) <= 0):
        raise ProfileFormatError("x column must be strictly increasing", end)
    try:
        grid = UniformGrid(float(header['x_min']), float(header['dx']), x.size)
    except (ValueError, DomainError) as e:
        raise ProfileFormatError(f"invalid grid header: {e}", end) from None
    if not np.allclose(x, grid.x, rtol=1e-12, atol=1e-9 * grid.dx):
        raise ProfileFormatError("x column is not the uniform grid the header declares", end)

    v = data[:, 2].copy() if width == 3 else None
    return ProfileFile(header, x.copy(), data[:, 1].copy(), v, path)
