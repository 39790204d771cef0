from pathlib import Path

import pytest

from chemotaxis_waves.config import (
    JOBS_ENV,
    SweepSpec,
    get_available_subcommands,
    get_subcommand_defaults,
    load_config,
    parse_sweep_spec,
    resolve_settings,
    validate_sweep_spec,
)
from chemotaxis_waves.diagnostics import CHECK_NAMES
from chemotaxis_waves.errors import DomainError


@pytest.fixture
def ini_file(tmp_path):
    path = tmp_path / 'waves.ini'
    path.write_text(
        "[defaults]\n"
        "out = from-defaults\n"
        "L = 20\n"
        "\n"
        "[sweep]\n"
        "out = from-section\n"
        "nu = 0.1,0.01\n",
        encoding='utf-8',
    )
    return path


def test_every_subcommand_has_defaults():
    for name in get_available_subcommands():
        defaults = get_subcommand_defaults(name)
        assert defaults is not None
        assert {'out', 'jobs', 'tol', 'L'} <= set(defaults)
    assert get_subcommand_defaults('unknown') is None


def test_settings_layering(ini_file):
    config = load_config(ini_file)
    settings = resolve_settings('sweep', {'L': 30.0, 'chi': None}, config)
    assert settings.get_str('out') == 'from-section'
    assert settings.get_floats('nu') == [0.1, 0.01]
    assert settings.L == 30.0
    assert settings.get_floats('chi') == [-1e4]
    other = resolve_settings('regime-table', None, config)
    assert other.out == Path('from-defaults')
    assert other.L == 20.0


def test_list_overrides_are_joined():
    settings = resolve_settings('limits-pm', {'nus': [0.1, 0.05]})
    assert settings.get_floats('nus') == [0.1, 0.05]


def test_jobs_from_environment(monkeypatch):
    monkeypatch.setenv(JOBS_ENV, '3')
    assert resolve_settings('sweep').jobs == 3
    assert resolve_settings('sweep', {'jobs': 2}).jobs == 2


def test_typed_getters_reject_bad_values():
    settings = resolve_settings('sweep', {'jobs': '1.5', 'tol': 'tight', 'nu': '0.1,x'})
    with pytest.raises(DomainError):
        settings.jobs
    with pytest.raises(DomainError):
        settings.tol
    with pytest.raises(DomainError):
        settings.get_floats('nu')


def test_missing_or_broken_config(tmp_path):
    with pytest.raises(DomainError):
        load_config(tmp_path / 'absent.ini')
    broken = tmp_path / 'broken.ini'
    broken.write_text("no section header\n", encoding='utf-8')
    with pytest.raises(DomainError):
        load_config(broken)
    with pytest.raises(DomainError):
        resolve_settings('no-such-command')


def test_sweep_grid_of_points():
    spec = parse_sweep_spec(resolve_settings('sweep', {'chi': '-100,-1000', 'nu': '0.1',
                                                       'delta': 0.02, 'json': 'no'}))
    assert spec.points == [(-100.0, 0.1, 0.02), (-1000.0, 0.1, 0.02)]
    assert spec.checks == CHECK_NAMES
    assert not spec.json
    assert not spec.extend


def test_explicit_points_win():
    spec = parse_sweep_spec(resolve_settings('sweep', {
        'points': '-16, 0.001; -1, 0.001, 0.0004', 'checks': 'structure,residual',
        'extend': 'yes'}))
    assert spec.points == [(-16.0, 0.001, None), (-1.0, 0.001, 0.0004)]
    assert spec.checks == ['structure', 'residual']
    assert spec.extend


def test_malformed_points_are_rejected():
    with pytest.raises(DomainError):
        parse_sweep_spec(resolve_settings('sweep', {'points': '-16'}))
    with pytest.raises(DomainError):
        parse_sweep_spec(resolve_settings('sweep', {'points': '-16, small'}))


@pytest.mark.parametrize('spec, fragment', [
    (SweepSpec(points=[(-1.0, 1.0, None)], tol=0.0), 'tolerance'),
    (SweepSpec(points=[(-1.0, 1.0, None)], jobs=0), 'jobs'),
    (SweepSpec(points=[(-1.0, 1.0, None)], checks=['energy']), 'unknown checks'),
    (SweepSpec(points=[(-1.0, 1.0, None), (2.0, 1.0, None)]), 'point 2'),
    (SweepSpec(points=[(-1.0, 1.0, 0.9)]), 'delta'),
])
def test_sweep_validation(spec, fragment):
    valid, message = validate_sweep_spec(spec)
    assert not valid
    assert fragment in message


def test_valid_sweep():
    assert validate_sweep_spec(SweepSpec(points=[(-1.0, 1.0, None)])) == (True, '1 points')
