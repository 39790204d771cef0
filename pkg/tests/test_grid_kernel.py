import math

import numpy as np
import pytest
from scipy import integrate

from chemotaxis_waves.errors import DomainError, SingularityError
from chemotaxis_waves.grid_kernel import (
    Field,
    KernelParams,
    UniformGrid,
    convolve_K,
    convolve_K_with_slope,
    convolve_phi,
    default_grid,
    eval_K,
    eval_phi,
    phi_cell_weights,
    screened_poisson,
    v_slope,
)


def _front(y):
    return 0.5 * (1.0 - np.tanh(y))


def _front_slope(y):
    return -0.5 / np.cosh(y) ** 2


def _kernel_integral(f, nu, x):
    value, _ = integrate.quad(lambda y: eval_K(nu, x - y) * f(y), x - 60.0, x + 60.0,
                              points=[x], limit=400)
    return value


def test_default_grid_resolves_both_scales():
    grid = default_grid(10.0, 1.0, chi=-4.0)
    assert grid.n % 2 == 1
    assert grid.x_min == -10.0
    assert grid.x_max == pytest.approx(10.0)
    assert grid.dx <= 0.5 / 20 + 1e-15
    assert grid.x[grid.origin_index] == pytest.approx(0.0, abs=1e-12)


def test_default_grid_without_chi_uses_kernel_scale():
    grid = default_grid(1.0, 0.01)
    assert grid.dx <= 0.1 / 20 + 1e-15


def test_default_grid_rejects_bad_input():
    with pytest.raises(DomainError):
        default_grid(-1.0, 1.0)
    with pytest.raises(DomainError):
        default_grid(1.0, 0.0)


def test_field_validation():
    grid = UniformGrid(0.0, 0.5, 5)
    with pytest.raises(DomainError):
        Field(grid, np.zeros(4))
    with pytest.raises(DomainError):
        Field(grid, np.array([0.0, 1.0, np.nan, 0.0, 0.0]))
    with pytest.raises(DomainError):
        UniformGrid(0.0, 0.0, 5)


def test_field_window_and_interpolation(line_grid, tanh_front):
    w = tanh_front.window(-1.0, 1.0)
    assert w.grid.n == 201
    assert w.x[0] == pytest.approx(-1.0)
    assert tanh_front.at(0.005) == pytest.approx(0.5 * (tanh_front.values[1000]
                                                        + tanh_front.values[1001]))
    assert tanh_front.at(50.0) == tanh_front.values[-1]


def test_eval_K_values_and_mass():
    assert eval_K(1.0, 0.0) == pytest.approx(0.5)
    assert eval_K(4.0, 0.0) == pytest.approx(0.25)
    half, _ = integrate.quad(lambda x: eval_K(0.25, x), 0.0, np.inf)
    assert 2.0 * half == pytest.approx(1.0, abs=1e-6)


def test_eval_phi_mass_and_symmetry():
    near, _ = integrate.quad(lambda x: eval_phi(0.5, x), 0.0, 1.0, limit=200)
    far, _ = integrate.quad(lambda x: eval_phi(0.5, x), 1.0, np.inf, limit=200)
    assert 2.0 * (near + far) == pytest.approx(1.0, abs=1e-5)
    x = np.array([0.1, 0.7, 3.0])
    np.testing.assert_allclose(eval_phi(0.5, -x), eval_phi(0.5, x))


def test_eval_phi_is_singular_at_origin():
    with pytest.raises(SingularityError):
        eval_phi(1.0, np.array([-1.0, 0.0, 1.0]))


def test_constant_field_is_reproduced():
    grid = UniformGrid(-5.0, 0.1, 101)
    u = Field(grid, np.full(grid.n, 0.3))
    v, v_x = convolve_K_with_slope(u, 0.7, 0.3, 0.3)
    np.testing.assert_allclose(v.values, 0.3, atol=1e-14)
    np.testing.assert_allclose(v_x.values, 0.0, atol=1e-13)


def test_convolve_K_matches_quadrature(tanh_front):
    v, v_x = convolve_K_with_slope(tanh_front, 1.0, 1.0, 0.0)
    for x in (-9.0, -2.0, 0.0, 0.5, 3.0, 9.5):
        i = tanh_front.grid.index_of(x)
        assert v.values[i] == pytest.approx(_kernel_integral(_front, 1.0, x), abs=1e-4)
        assert v_x.values[i] == pytest.approx(_kernel_integral(_front_slope, 1.0, x), abs=1e-4)
    assert v.meta['status'] == 'ok'


def test_coarse_grid_is_flagged():
    grid = UniformGrid(-5.0, 0.5, 21)
    v = convolve_K(Field(grid, _front(grid.x)), 0.01, 1.0, 0.0)
    assert v.meta['status'].startswith('warning')


def test_v_slope_off_grid_and_outside(tanh_front):
    xs = np.array([-12.0, -0.37, 0.0051, 2.222, 13.0])
    got = v_slope(tanh_front, 1.0, 1.0, 0.0, xs)
    want = [_kernel_integral(_front_slope, 1.0, x) for x in xs]
    np.testing.assert_allclose(got, want, atol=1e-4)
    assert isinstance(v_slope(tanh_front, 1.0, 1.0, 0.0, 0.0), float)


def test_screened_poisson_agrees_with_convolution(tanh_front):
    v = screened_poisson(tanh_front, 1.0, 1.0, 0.0)
    direct = convolve_K(tanh_front, 1.0, 1.0, 0.0)
    np.testing.assert_allclose(v.values, direct.values, atol=1e-4)
    assert v.meta['residual'] < 1e-9


def test_phi_cell_weights_sum_to_one():
    weights = phi_cell_weights(1.0, 0.05)
    assert weights.size % 2 == 1
    assert weights.sum() == pytest.approx(1.0, abs=1e-5)
    np.testing.assert_allclose(weights, weights[::-1])
    assert np.argmax(weights) == weights.size // 2


def test_phi_composed_with_itself_is_K():
    grid = UniformGrid(-10.0, 0.02, 1001)
    u = Field(grid, _front(grid.x))
    once = convolve_phi(u, 1.0, 1.0, 0.0)
    twice = convolve_phi(once, 1.0, 1.0, 0.0)
    direct = convolve_K(u, 1.0, 1.0, 0.0)
    inner = slice(100, -100)
    np.testing.assert_allclose(twice.values[inner], direct.values[inner], atol=1e-3)


def test_convolve_phi_margin_widens_grid():
    grid = UniformGrid(-2.0, 0.1, 41)
    u = Field(grid, _front(grid.x))
    wide = convolve_phi(u, 0.01, 1.0, 0.0, margin=True)
    m = (phi_cell_weights(0.01, 0.1).size - 1) // 2
    assert wide.grid.n == grid.n + 2 * m
    assert wide.grid.x_min == pytest.approx(grid.x_min - m * grid.dx)
    assert math.isclose(wide.values[0], 1.0, abs_tol=1e-5)


def test_kernel_params():
    assert KernelParams(0.25).sqrt_nu == 0.5
    for nu in (0.0, -1.0, math.inf):
        with pytest.raises(DomainError):
            KernelParams(nu)
