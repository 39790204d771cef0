import math

import pytest

from chemotaxis_waves.diagnostics import exp_decay_check, oscillation_slope, structure_checks
from chemotaxis_waves.errors import DomainError
from chemotaxis_waves.slab_solver import quasi_singular_point, speed_bracket
from chemotaxis_waves.speed_selector import (
    extend_to_line,
    hyp_limit_study,
    linear_speed_floor,
    pm_limit_study,
    select_speed,
)


@pytest.fixture(scope='module')
def selection():
    return select_speed(-4.0, 1.0, L=10.0, tol=1e-6)


def test_linear_speed_floor():
    assert linear_speed_floor(-4.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        linear_speed_floor(0.0)


def test_selected_speed_normalizes_the_profile(selection):
    c, sol = selection
    lower, upper = speed_bracket(-4.0, 1.0)
    assert selection.bracket == (lower, upper)
    assert lower < c < upper
    assert sol.params.c == c
    assert sol.converged
    assert selection.termination in ('tolerance', 'pinned-polish', 'bracket-collapsed')
    if selection.termination == 'tolerance':
        assert abs(sol.u_at_origin - sol.params.delta) < 1e-6


def test_prescan_is_reported(selection):
    assert len(selection.scan) == 8
    assert selection.scan[0]['c'] == pytest.approx(selection.bracket[0])
    assert selection.scan[-1]['c'] == pytest.approx(selection.bracket[1])
    assert selection.scan[0]['phi'] > 0 > selection.scan[-1]['phi']
    assert len(selection.sign_changes) >= 1
    low, high = selection.sign_changes[0]
    assert low < high


def test_bisection_history_stays_in_bracket(selection):
    for step in selection.history:
        assert step['bracket_low'] <= step['c'] <= step['bracket_high']


def test_limit_studies_validate_their_sequences():
    with pytest.raises(DomainError):
        pm_limit_study(-1.0, [0.1, 0.01])
    with pytest.raises(DomainError):
        pm_limit_study(0.5, [0.01, 0.1])
    with pytest.raises(DomainError):
        hyp_limit_study(1.0, [10.0, 100.0])
    with pytest.raises(DomainError):
        hyp_limit_study(1.0, [-1000.0, -100.0])


@pytest.mark.slow
def test_extension_to_the_line_stabilizes():
    wave = extend_to_line(-4.0, 1.0, L=10.0, tol=1e-3, max_doublings=3)
    assert wave.L_final >= 20.0
    assert wave.history[0]['L'] == 10.0
    assert all(wave.checks.values())
    assert wave.u.grid.x_max == pytest.approx(wave.L_final)


@pytest.mark.slow
def test_pushed_regime_speed():
    c = select_speed(-16.0, 1e-3, L=40.0, tol=1e-6).c
    c_bar = c * math.sqrt(16.0)
    predicted = math.sqrt(16.0) / math.sqrt(2.0) + math.sqrt(2.0) / math.sqrt(16.0)
    assert abs(c_bar - predicted) / predicted < 0.15


@pytest.mark.slow
def test_pm_limit_report_shape():
    report = pm_limit_study(0.5, [0.1, 0.01], L=20.0)
    assert report.study == 'pm-limit'
    assert report.parameters == [0.1, 0.01]
    assert report.target == pytest.approx(math.sqrt(2.0))
    assert all(p['status'] == 'ok' for p in report.points)


@pytest.fixture(scope='module')
def strong_chemotaxis_report():
    return pm_limit_study(0.0, [1e-1, 1e-2, 1e-3, 1e-4])


@pytest.fixture(scope='module')
def unit_nu_selections():
    return {chi: select_speed(chi, 1.0) for chi in (-1e2, -1e3, -1e4)}


@pytest.mark.slow
def test_strong_chemotaxis_speed_approaches_the_pme_limit(strong_chemotaxis_report):
    report = strong_chemotaxis_report
    target = 1.0 / math.sqrt(2.0)
    assert report.target == pytest.approx(target)
    errors = []
    for nu, c, point in zip(report.parameters[1:3], report.speeds[1:3], report.points[1:3]):
        assert nu in (1e-2, 1e-3)
        assert point['status'] == 'ok'
        assert abs(c - target) < 0.1 * target
        errors.append(abs(c - target))
    assert errors[1] <= errors[0]


@pytest.mark.slow
@pytest.mark.parametrize('eps, target', [(0.25, 1.0 / math.sqrt(2.0) + math.sqrt(2.0) / 4.0),
                                         (1.0, 2.0)])
def test_pm_limit_speed_with_linear_diffusion(eps, target):
    report = pm_limit_study(eps, [1e-2, 1e-3])
    assert report.target == pytest.approx(target)
    assert all(p['status'] == 'ok' for p in report.points)
    assert abs(report.speeds[-1] - target) < 0.1 * target


@pytest.mark.slow
def test_signal_gap_shrinks_like_an_eighth_power_of_nu(strong_chemotaxis_report):
    report = strong_chemotaxis_report
    gaps = [p['sup_gap'] for p in report.points]
    assert report.parameters == [1e-1, 1e-2, 1e-3, 1e-4]
    assert all(p['oscillation_C'] <= 10.0 for p in report.points)
    assert oscillation_slope(report.parameters, gaps) >= 0.125


@pytest.mark.slow
def test_quasi_singular_point_obeys_its_bound(unit_nu_selections):
    locations = []
    for chi, selection in unit_nu_selections.items():
        sol = selection.solution
        qsp = quasi_singular_point(sol)
        assert qsp.status == 'ok'
        assert qsp.bound == pytest.approx(8.0 / abs(chi))
        assert qsp.gap <= qsp.bound + sol.grid.dx
        locations.append(qsp.location)
    assert max(locations) - min(locations) <= 10.0


@pytest.mark.slow
def test_selected_waves_decay_and_keep_their_structure(unit_nu_selections):
    for chi, selection in unit_nu_selections.items():
        sol = selection.solution
        decay = exp_decay_check(sol.u, sol.v, chi, 1.0, selection.c)
        assert decay.violations == []
        assert decay.checked > 0
        assert decay.theta is not None and decay.theta > 0
        structure = structure_checks(sol.u, sol.v, 1.0)
        assert structure.max_violation < 1e-6
        assert structure.monotonicity_violations == []
        assert structure.extremum_violations == []
