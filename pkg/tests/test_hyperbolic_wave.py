import math
from dataclasses import replace

import numpy as np
import pytest

from chemotaxis_waves.diagnostics import structure_checks
from chemotaxis_waves.errors import DomainError
from chemotaxis_waves.grid_kernel import Field, UniformGrid
from chemotaxis_waves.hyperbolic_wave import (
    check_speed_bracket,
    construct_discontinuous_wave,
    explicit_solution_oracle,
    hyp_speed_bracket,
    hyp_speed_floor,
    hyp_to_pme_limit,
    jump_check,
    oracle_gap,
)


def logistic(t, u_m, a, b):
    """Solution of u' = u (a - b u), u(0) = u_m."""
    k = a / b
    return k / (1.0 + (k / u_m - 1.0) * math.exp(-a * t))


@pytest.fixture(scope='module')
def coarse_wave():
    return construct_discontinuous_wave(1.0, tol=1e-6, grid=UniformGrid(-20.0, 0.1, 201))


def test_speed_bracket_and_floor():
    assert hyp_speed_bracket(1.0) == pytest.approx((1.0 / 3.0, 0.5))
    lower, upper = hyp_speed_bracket(0.01)
    assert lower == pytest.approx(0.1 / 1.02)
    assert upper == pytest.approx(5.0)
    assert hyp_speed_floor() == pytest.approx(math.sqrt(math.log(4.0 / 3.0) / 48.0))
    with pytest.raises(DomainError):
        hyp_speed_bracket(0.0)


def test_speed_bracket_is_open():
    assert check_speed_bracket(1.0, 0.4)['status'] == 'inside'
    edge = check_speed_bracket(1.0, 0.5)
    assert edge['status'] == 'outside'
    assert not edge['passed']
    assert edge['measured']['margin_upper'] == pytest.approx(0.0)


def test_oracle_with_constant_signal_is_logistic():
    grid = UniformGrid(-10.0, 0.1, 201)
    nu, v0, c, u_m = 1.0, 0.5, 0.5, 0.2
    trace = explicit_solution_oracle(Field(grid, np.full(grid.n, v0)), c, 0.0, u_m,
                                     (0.0, 16.05), nu)
    a, b = (nu + v0) / nu, (nu + 1.0) / nu
    expected = [logistic(-x / c, u_m, a, b) for x in trace.u.x]
    np.testing.assert_allclose(trace.u.values, expected, atol=1e-7)
    assert trace.u.x[0] == pytest.approx(-8.0)
    assert trace.u.x[-1] == pytest.approx(0.0, abs=1e-12)
    assert trace.status == 'complete'
    assert trace.limits == {'left': 'carrying'}
    assert trace.t_range == pytest.approx((0.0, 16.05))


def test_oracle_leaving_the_grid_is_truncated():
    grid = UniformGrid(-10.0, 0.1, 201)
    trace = explicit_solution_oracle(Field(grid, np.full(grid.n, 0.5)), 0.5, 0.0, 0.2,
                                     (0.0, 40.0), 1.0)
    assert trace.status == 'truncated'
    assert trace.u.x[0] <= -9.8


def test_oracle_from_zero_stays_zero():
    grid = UniformGrid(-10.0, 0.1, 201)
    trace = explicit_solution_oracle(Field(grid, np.full(grid.n, 0.5)), 0.5, 0.0, 0.0,
                                     (0.0, 10.0), 1.0)
    assert np.all(trace.u.values == 0.0)
    assert trace.limits['left'] == 'zero'


@pytest.mark.parametrize('x_m, u_m, t_span', [
    (0.0, -0.1, (0.0, 1.0)),
    (-10.0, 0.2, (0.0, 1.0)),
    (0.0, 0.2, (1.0, 2.0)),
])
def test_oracle_rejects_bad_input(x_m, u_m, t_span):
    grid = UniformGrid(-10.0, 0.1, 201)
    with pytest.raises(DomainError):
        explicit_solution_oracle(Field(grid, np.full(grid.n, 0.5)), 0.5, x_m, u_m, t_span, 1.0)


def test_constructed_wave_satisfies_jump_conditions(coarse_wave):
    wave = coarse_wave
    assert wave.c == pytest.approx(wave.v0)
    assert wave.jump_value == pytest.approx((1.0 + wave.v0) / 2.0)
    assert check_speed_bracket(1.0, wave.c)['passed']
    checks = jump_check(wave)
    assert set(checks) == {'jump_relation', 'speed_identity', 'slope_at_jump', 'right_tail',
                           'v0_lower_bound', 'left_limit', 'no_interior_singularity'}
    failed = [name for name, r in checks.items() if not r['passed']]
    assert failed == []


def test_jump_identities_are_measured_on_the_returned_profile(coarse_wave):
    checks = jump_check(coarse_wave)
    v0 = checks['speed_identity']['measured']['v0']
    assert v0 == pytest.approx(coarse_wave.v0, abs=1e-5)
    u_left = coarse_wave.u_left
    damaged = replace(coarse_wave, u_left=Field(u_left.grid, 0.98 * u_left.values))
    broken = jump_check(damaged)
    assert not broken['jump_relation']['passed']
    assert not broken['speed_identity']['passed']
    assert broken['speed_identity']['measured']['gap'] > 1e-3


def test_constructed_wave_profile_shape(coarse_wave):
    u = coarse_wave.u_full()
    assert u.meta['jump'] == 0.0
    assert u.grid == coarse_wave.v.grid
    left = coarse_wave.u_left.values
    assert np.all(np.diff(left) <= 1e-12)
    assert np.all(u.values[coarse_wave.u_left.grid.n:] == 0.0)


def test_explicit_formula_matches_constructed_wave(coarse_wave):
    assert oracle_gap(coarse_wave) < 1e-6


def test_limit_rejects_unordered_nus():
    with pytest.raises(DomainError):
        hyp_to_pme_limit([0.1, 0.5])
    with pytest.raises(DomainError):
        hyp_to_pme_limit([2.0])


@pytest.mark.slow
def test_default_construction_at_unit_nu():
    wave = construct_discontinuous_wave(1.0)
    assert all(r['passed'] for r in jump_check(wave).values())
    assert 1.0 / 3.0 < wave.c < 0.5


@pytest.fixture(scope='module')
def pme_limit_report():
    return hyp_to_pme_limit([0.1, 0.01])


@pytest.mark.slow
def test_limit_speeds_stay_in_bracket(pme_limit_report):
    nus = [0.1, 0.01]
    report = pme_limit_report
    assert report.parameters == nus
    for nu, c, point in zip(nus, report.speeds, report.points):
        lower, upper = hyp_speed_bracket(nu)
        assert lower < c < upper
        assert point['checks']['c_at_most_2'] and point['checks']['c_above_floor']


@pytest.mark.slow
def test_limit_approaches_the_sharp_wave(pme_limit_report):
    report = pme_limit_report
    errors = [abs(c - 1.0 / math.sqrt(2.0)) for c in report.speeds]
    assert errors[1] < errors[0]
    assert errors[-1] < 0.05
    assert report.distances[-1] < 0.05
    assert report.verdict


@pytest.fixture(scope='module')
def default_waves():
    return {nu: construct_discontinuous_wave(nu) for nu in (0.25, 1.0, 4.0)}


@pytest.mark.slow
@pytest.mark.parametrize('nu', [0.25, 1.0, 4.0])
def test_default_waves_satisfy_their_identities(default_waves, nu):
    wave = default_waves[nu]
    lower, upper = hyp_speed_bracket(nu)
    assert lower < wave.c < upper
    checks = jump_check(wave, tol=1e-4)
    assert checks['jump_relation']['passed'] and checks['speed_identity']['passed']
    assert oracle_gap(wave) < 1e-6
    structure = structure_checks(wave.u_full(), wave.v, nu)
    assert structure.max_violation < 1e-6
    assert structure.extremum_violations == []
