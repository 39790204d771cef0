"""
SVG rendering of sampled profiles.
"""

import io
import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use('Agg')

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .errors import DomainError  # noqa: E402
from .grid_kernel import Field  # noqa: E402
from .profile_io import atomic_write_text  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed id salt so repeated renders are byte-identical
SVG_HASH_SALT = 'chemotaxis-waves'

NamedFields = Union[Mapping[str, Field], Sequence[Tuple[str, Field]]]


def _broken_at(f: Field, jump: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Samples with a NaN inserted after the jump node, so the polyline shows a gap."""
    x, y = f.x, np.asarray(f.values, dtype=float)
    if jump is None or not (x[0] <= jump < x[-1]):
        return x, y
    k = int(np.searchsorted(x, jump, side='right'))
    return np.insert(x, k, np.nan), np.insert(y, k, np.nan)


def render_svg(fields: NamedFields, jump: Optional[float] = None,
               title: Optional[str] = None) -> str:
    """
    Render named fields into a standalone SVG document.

    Args:
        fields: Legend name to Field, as a mapping or (name, Field) pairs
        jump: Location of a declared discontinuity, marked by a vertical line
        title: Optional axes title

    Returns:
        SVG text
    """
    items = list(fields.items()) if isinstance(fields, Mapping) else list(fields)
    if not items:
        raise DomainError("emit_plot needs at least one field")

    matplotlib.rcParams['svg.hashsalt'] = SVG_HASH_SALT
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.add_subplot(1, 1, 1)
    for name, f in items:
        # Only fields that carry the discontinuity get a break
        x, y = _broken_at(f, jump if f.meta.get('jump') is not None else None)
        ax.plot(x, y, label=name, linewidth=1.2)
    if jump is not None:
        ax.axvline(jump, color='0.4', linestyle='--', linewidth=0.8, label='jump')
    ax.set_xlabel('x')
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()

    buffer = io.StringIO()
    fig.savefig(buffer, format='svg', metadata={'Date': None, 'Creator': None})
    return buffer.getvalue()


def emit_plot(fields: NamedFields, path: Union[str, Path], jump: Optional[float] = None,
              title: Optional[str] = None) -> Path:
    """
    Write an SVG plot with one polyline per field and a legend.

    Returns:
        Path written
    """
    svg = render_svg(fields, jump=jump, title=title)
    atomic_write_text(path, svg)
    logger.debug("wrote plot %s", path)
    return Path(path)
