import math
from dataclasses import replace

import numpy as np
import pytest

from chemotaxis_waves.errors import DomainError
from chemotaxis_waves.grid_kernel import default_grid
from chemotaxis_waves.slab_solver import (
    WaveParams,
    default_delta,
    fkpp_slab,
    quasi_singular_point,
    ramp_profile,
    slab_bounds,
    solve_pinned_slab,
    solve_slab,
    speed_bracket,
    tw_residual,
)


@pytest.mark.parametrize('kwargs', [
    {'chi': 1.0, 'nu': 1.0, 'c': 0.5},
    {'chi': -1.0, 'nu': 0.0, 'c': 0.5},
    {'chi': -1.0, 'nu': 1.0, 'c': -0.1},
    {'chi': -1.0, 'nu': 1.0, 'c': 0.5, 'delta': 0.5},
    {'chi': -1.0, 'nu': 1.0, 'c': 0.5, 'L': 0.0},
    {'chi': -1.0, 'nu': 1.0, 'c': 0.5, 'tau': 1.5},
])
def test_wave_params_validation(kwargs):
    with pytest.raises(DomainError):
        WaveParams(**kwargs)


def test_default_delta_is_mid_interval():
    p = WaveParams(chi=-2.0, nu=0.5, c=1.0)
    assert p.delta == pytest.approx(default_delta(0.5))
    assert p.delta == pytest.approx(0.5 * 0.5 / 1.5)
    assert p.diffusion == pytest.approx(0.5)


def test_speed_bracket_formulas():
    lower, upper = speed_bracket(-4.0, 1.0)
    assert lower == pytest.approx(math.sqrt(0.5) / 2.0)
    assert upper == pytest.approx(1.0 + math.sqrt(2.0))
    with pytest.raises(DomainError):
        speed_bracket(1.0, 1.0)


def test_slab_bounds_thresholds():
    bounds = slab_bounds(WaveParams(chi=-4.0, nu=1.0, c=0.1, L=30.0))
    assert bounds['lower']['applies']
    assert bounds['lower']['value'] == pytest.approx(0.9 * 0.5)
    assert not bounds['upper']['applies']
    assert bounds['upper']['value'] == 1.0
    fast = slab_bounds(WaveParams(chi=-4.0, nu=1.0, c=3.0, L=30.0))
    assert fast['upper']['applies']
    assert 0.0 < fast['upper']['value'] < 1e-10


def test_slab_solution_converges_with_exact_boundary_data(slab_solution):
    sol = slab_solution
    assert sol.converged
    assert sol.meta['coupling'] == 'newton'
    assert sol.meta['init'] == 'ramp'
    assert sol.residual < 1e-6
    assert sol.meta['residual_poisson'] < 1e-4
    assert sol.u.values[0] == pytest.approx(1.0, abs=1e-12)
    assert sol.u.values[-1] == pytest.approx(0.0, abs=1e-12)
    assert not sol.meta['bound_violation']
    assert 0.0 < sol.v.values.min() and sol.v.values.max() <= 1.0 + 1e-12
    assert sol.meta['residual_unscaled'] >= sol.residual


def test_slab_solution_lies_between_fkpp_brackets(slab_params, slab_solution):
    grid = slab_solution.grid
    sub = fkpp_slab('sub', slab_params, grid)
    sup = fkpp_slab('super', slab_params, grid)
    assert sub.meta['converged'] and sup.meta['converged']
    assert sub.values[0] == pytest.approx(0.5)
    assert sup.values[0] == pytest.approx(1.0) and sup.values[-1] == pytest.approx(0.0)
    u = slab_solution.u.values
    assert np.all(sub.values <= u + 1e-4)
    assert np.all(u <= sup.values + 1e-4)


def test_fkpp_slab_rejects_unknown_kind(slab_params):
    with pytest.raises(DomainError):
        fkpp_slab('middle', slab_params)


def test_zero_coupling_reduces_to_classical_fkpp():
    params = WaveParams(chi=-4.0, nu=1.0, c=0.0, L=10.0, tau=0.0)
    grid = default_grid(params.L, params.nu, params.chi)
    coupled = solve_slab(params, grid=grid)
    decoupled = solve_slab(params, grid=grid, coupling='picard')
    assert coupled.converged and decoupled.converged
    np.testing.assert_allclose(coupled.u.values, decoupled.u.values, atol=1e-6)
    assert coupled.meta['continuation_path'] == [0.0]


def test_newton_and_picard_couplings_agree():
    params = WaveParams(chi=-4.0, nu=1.0, c=0.5, L=10.0)
    grid = default_grid(params.L, params.nu, params.chi)
    newton = solve_slab(params, grid=grid)
    picard = solve_slab(params, grid=grid, coupling='picard', rtol=1e-7, xtol=1e-7)
    assert newton.converged and picard.converged
    assert picard.meta['coupling'] == 'picard'
    np.testing.assert_allclose(newton.u.values, picard.u.values, atol=1e-5)


def test_unknown_coupling_is_rejected(slab_params):
    with pytest.raises(DomainError):
        solve_slab(slab_params, coupling='jacobi')


def test_warm_start_from_previous_solution(slab_params, slab_solution):
    nearby = solve_slab(replace(slab_params, c=0.41), init=slab_solution,
                        grid=slab_solution.grid)
    assert nearby.converged
    assert nearby.meta['init'] == 'warm-start'


def test_ramp_start_leaves_shared_profiles_untouched():
    params = WaveParams(chi=-4.0, nu=1.0, c=0.5, L=5.0)
    grid = default_grid(params.L, params.nu, params.chi)
    sol = solve_slab(params, grid=grid, maxiter=1)
    assert sol.meta['init'] == 'ramp'
    assert sol.u.values[0] == 1.0 and sol.u.values[-1] == 0.0
    picard = solve_slab(params, grid=grid, coupling='picard', maxiter=1)
    assert picard.meta['init'] == 'ramp'


def test_pinned_slab_starts_from_a_plain_field():
    params = WaveParams(chi=-4.0, nu=1.0, c=1.0, L=5.0)
    grid = default_grid(params.L, params.nu, params.chi)
    start = ramp_profile(grid)
    sol = solve_pinned_slab(params, start, grid=grid, maxiter=1)
    assert sol.meta['init'] == 'field'
    assert sol.meta['coupling'] == 'pinned'
    assert not start.values.flags.writeable


def test_picard_stops_on_the_self_consistent_residual():
    params = WaveParams(chi=-4.0, nu=1.0, c=1.0, L=10.0)
    grid = default_grid(params.L, params.nu, params.chi)
    sol = solve_slab(params, grid=grid, coupling='picard')
    assert sol.converged
    assert sol.meta['outer_history'][-1] < 1e-8
    assert sol.residual < 1e-8


def test_pinned_slab_attains_normalization(slab_params):
    params = replace(slab_params, L=10.0)
    grid = default_grid(params.L, params.nu, params.chi)
    start = solve_slab(params, grid=grid)
    pinned = solve_pinned_slab(params, start)
    assert pinned.converged
    assert pinned.meta['coupling'] == 'pinned'
    assert pinned.u_at_origin == pytest.approx(params.delta, abs=1e-8)
    lower, upper = speed_bracket(params.chi, params.nu)
    assert lower < pinned.params.c < upper


def test_quasi_singular_point_respects_bound(slab_solution):
    q = quasi_singular_point(slab_solution)
    assert q.bound == pytest.approx(4.0 * 2.0 / 4.0)
    assert q.status == 'ok'
    assert slab_solution.grid.x_min < q.location < slab_solution.grid.x_max
    assert q.gap <= q.bound + slab_solution.grid.dx


def test_tw_residual_lives_on_interior_nodes(slab_solution):
    p = slab_solution.params
    tw, poisson = tw_residual(slab_solution.u, slab_solution.v, p.chi, p.nu, p.c)
    assert tw.grid.n == slab_solution.grid.n - 2
    assert tw.grid.x_min == pytest.approx(slab_solution.grid.x_min + slab_solution.grid.dx)
    assert np.max(np.abs(poisson.values)) < 1e-4


def test_ramp_profile_joins_boundary_values():
    grid = default_grid(2.0, 1.0)
    ramp = ramp_profile(grid, 0.5, 0.0)
    assert ramp.values[0] == 0.5 and ramp.values[-1] == 0.0
    assert np.all(np.diff(ramp.values) < 0)


@pytest.mark.slow
def test_fast_speed_obeys_explicit_upper_bound():
    params = WaveParams(chi=-1e4, nu=1.0, c=1.2, L=40.0)
    sol = solve_slab(params)
    bound = slab_bounds(params)['upper']
    assert bound['applies']
    assert sol.converged
    assert sol.u_at_origin <= bound['value'] + 1e-12
