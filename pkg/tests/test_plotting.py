import numpy as np
import pytest

from chemotaxis_waves.errors import DomainError
from chemotaxis_waves.grid_kernel import Field, UniformGrid
from chemotaxis_waves.plotting import _broken_at, emit_plot, render_svg


@pytest.fixture
def front():
    grid = UniformGrid(-2.0, 0.5, 9)
    u = Field(grid, np.where(grid.x < 0.0, 1.0, 0.0), {'jump': 0.0})
    v = Field(grid, np.exp(-np.abs(grid.x)))
    return u, v


def test_render_is_deterministic(front):
    u, v = front
    first = render_svg({'u': u, 'v': v}, jump=0.0, title='front')
    second = render_svg({'u': u, 'v': v}, jump=0.0, title='front')
    assert first == second
    assert first.lstrip().startswith('<?xml')


def test_legend_names_appear(front):
    u, v = front
    svg = render_svg([('density', u), ('signal', v)])
    assert 'density' in svg
    assert 'signal' in svg


def test_no_fields_is_rejected():
    with pytest.raises(DomainError):
        render_svg({})


def test_emit_plot_writes_file(tmp_path, front):
    u, _ = front
    path = emit_plot({'u': u}, tmp_path / 'u.svg')
    assert path.exists()
    assert '</svg>' in path.read_text(encoding='utf-8')
    assert not (tmp_path / 'u.svg.tmp').exists()


def test_break_is_inserted_after_jump_node(front):
    u, _ = front
    x, y = _broken_at(u, 0.0)
    assert x.size == u.x.size + 1
    k = int(np.flatnonzero(np.isnan(x))[0])
    assert x[k - 1] == 0.0
    assert np.isnan(y[k])


def test_no_break_without_jump_or_outside_grid(front):
    _, v = front
    x, _ = _broken_at(v, None)
    assert x.size == v.x.size
    x, _ = _broken_at(v, 5.0)
    assert not np.any(np.isnan(x))
