import math

import numpy as np
import pytest

from chemotaxis_waves.errors import DomainError, NoWaveError
from chemotaxis_waves.grid_kernel import Field, UniformGrid
from chemotaxis_waves.pme_wave import (
    BumpFunction,
    pm_min_speed,
    pme_residual,
    pme_wave_solve,
    pushed_wave_profile,
    sharp_wave,
    shoot_wave,
    standard_test_functions,
)


@pytest.mark.parametrize('eps, expected', [
    (0.0, 1.0 / math.sqrt(2.0)),
    (0.25, 1.0 / math.sqrt(2.0) + math.sqrt(2.0) / 4.0),
    (0.5, math.sqrt(2.0)),
    (1.0, 2.0),
])
def test_minimal_speed(eps, expected):
    assert pm_min_speed(eps) == pytest.approx(expected)


def test_minimal_speed_rejects_negative_eps():
    with pytest.raises(DomainError):
        pm_min_speed(-0.1)


def test_sharp_wave_support():
    x = np.array([-50.0, -1.0, 0.0, 0.5, 3.0])
    u = sharp_wave(x)
    assert u[0] == pytest.approx(1.0)
    assert u[1] == pytest.approx(1.0 - math.exp(-1.0 / math.sqrt(2.0)))
    assert np.all(u[2:] == 0.0)


@pytest.mark.parametrize('eps', [0.0, 0.1, 0.3])
def test_pushed_profile_is_normalized_and_monotone(eps):
    x = np.linspace(-8.0, 8.0, 161)
    u = pushed_wave_profile(eps, x)
    assert pushed_wave_profile(eps, 0.0) == pytest.approx(0.5, abs=1e-9)
    assert np.all(np.diff(u) <= 1e-15)
    assert u[0] > 0.98


def test_pushed_profile_rejects_pulled_range():
    with pytest.raises(DomainError):
        pushed_wave_profile(0.5, 0.0)


def test_bump_derivatives_match_finite_differences():
    psi = BumpFunction(0.3, 1.5)
    x = np.linspace(-1.0, 1.6, 27)
    h = 1e-5
    np.testing.assert_allclose(psi.d1(x), (psi.value(x + h) - psi.value(x - h)) / (2 * h),
                               atol=1e-6)
    np.testing.assert_allclose(psi.d2(x), (psi.d1(x + h) - psi.d1(x - h)) / (2 * h), atol=1e-5)
    assert psi.value(np.array([2.0]))[0] == 0.0


def test_standard_test_functions_fit_the_grid(sharp_grid):
    bumps = standard_test_functions(sharp_grid)
    assert len(bumps) == 12
    for psi in bumps:
        a, b = psi.support
        assert sharp_grid.x_min - 1e-12 <= a and b <= sharp_grid.x_max + 1e-12


def test_standard_test_functions_span_the_grid(sharp_grid):
    bumps = standard_test_functions(sharp_grid)
    for w in (1.0, 2.0, 4.0):
        family = [psi for psi in bumps if psi.half_width == w]
        assert len(family) == 4
        assert family[0].support[0] == pytest.approx(sharp_grid.x_min)
        assert family[-1].support[1] == pytest.approx(sharp_grid.x_max)
        gaps = np.diff([psi.center for psi in family])
        np.testing.assert_allclose(gaps, gaps[0])
    shifted = standard_test_functions(UniformGrid(0.0, 1e-2, 2401))
    assert shifted[0].support[0] == pytest.approx(0.0)
    assert shifted[-1].support[1] == pytest.approx(24.0)


def test_standard_test_functions_need_room_for_the_widest_bump():
    with pytest.raises(DomainError):
        standard_test_functions(UniformGrid(-3.0, 0.1, 61))


def test_sharp_wave_is_a_distributional_solution(sharp_grid):
    u = Field(sharp_grid, sharp_wave(sharp_grid.x))
    assert pme_residual(u, 1.0 / math.sqrt(2.0), 0.0) < 1e-6


def test_wrong_speed_has_a_large_defect(sharp_grid):
    u = Field(sharp_grid, sharp_wave(sharp_grid.x))
    assert pme_residual(u, 1.0, 0.0) > 1e-2


def test_zero_profile_has_no_defect(sharp_grid):
    u = Field(sharp_grid, np.zeros(sharp_grid.n))
    assert pme_residual(u, 0.7, 0.2) == 0.0


def test_test_function_outside_grid_is_rejected():
    grid = UniformGrid(-1.0, 0.01, 201)
    u = Field(grid, sharp_wave(grid.x))
    with pytest.raises(DomainError):
        pme_residual(u, 0.7, 0.0, [BumpFunction(0.5, 1.0)])


def test_shooting_reproduces_the_closed_form_pushed_wave():
    grid = UniformGrid(-15.0, 0.01, 3001)
    wave = shoot_wave(0.25, pm_min_speed(0.25), grid)
    assert wave.meta['method'] == 'shooting'
    assert wave.u.at(0.0) == pytest.approx(0.5, abs=2e-3)
    np.testing.assert_allclose(wave.u.values, pushed_wave_profile(0.25, grid.x), atol=5e-3)


def test_shooting_below_linear_speed_has_no_wave():
    with pytest.raises(NoWaveError):
        shoot_wave(1.0, 1.5)


def test_newton_wave_above_minimal_speed():
    grid = UniformGrid(-20.0, 0.01, 4001)
    wave = pme_wave_solve(0.25, 1.3, grid)
    assert wave.meta['method'] == 'newton'
    assert wave.meta['residual'] < 1e-6
    assert wave.u.values[grid.origin_index] == pytest.approx(0.5)
    assert wave.u.values[0] == pytest.approx(1.0, abs=1e-3)
    assert wave.u.values.min() > -1e-4


@pytest.mark.parametrize('eps, c', [(0.25, 1.3), (0.25, 1.5), (0.25, 2.0), (1.0, 2.0), (1.0, 2.5)])
def test_newton_wave_is_a_monotone_front(eps, c):
    grid = UniformGrid(-20.0, 0.01, 4001)
    wave = pme_wave_solve(eps, c, grid)
    u = wave.u.values
    assert wave.meta['residual'] < 1e-6
    assert u[grid.origin_index] == pytest.approx(0.5, abs=1e-8)
    assert np.all(np.diff(u) <= 1e-9)
    assert u.min() > -1e-4 and u.max() < 1.0 + 1e-9


def test_newton_wave_below_minimal_speed_is_rejected():
    with pytest.raises(NoWaveError):
        pme_wave_solve(1.0, 1.5, UniformGrid(-20.0, 0.01, 4001))


def test_newton_wave_needs_linear_diffusion():
    with pytest.raises(DomainError):
        pme_wave_solve(0.0, 1.0)


@pytest.mark.slow
def test_newton_wave_at_minimal_speed_matches_closed_form():
    wave = pme_wave_solve(0.25, pm_min_speed(0.25))
    x = wave.u.x
    window = np.abs(x) <= 8.0
    np.testing.assert_allclose(wave.u.values[window], pushed_wave_profile(0.25, x[window]),
                               atol=1e-2)
