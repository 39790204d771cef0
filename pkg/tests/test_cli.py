import json
import math

import pytest

from chemotaxis_waves.cli import create_argument_parser, main
from chemotaxis_waves.grid_kernel import Field
from chemotaxis_waves.pme_wave import PmeWave, sharp_wave
from chemotaxis_waves.profile_io import emit_profile


@pytest.fixture
def sharp_profile(tmp_path, sharp_grid):
    wave = PmeWave(eps=0.0, c=1.0 / math.sqrt(2.0), u=Field(sharp_grid, sharp_wave(sharp_grid.x)),
                   support_edge=0.0)
    return emit_profile(wave, tmp_path / 'sharp.dat').path


def test_version(capsys):
    main(['--version'])
    assert capsys.readouterr().out.startswith('chemotaxis-waves 0.1.0')


def test_no_command_prints_quick_start(capsys):
    main([])
    out = capsys.readouterr().out
    assert 'Quick Start' in out
    assert 'solve-tw' in out


def test_every_subcommand_is_registered():
    parser = create_argument_parser()
    for command in ('solve-tw', 'solve-hyp', 'solve-pme', 'verify', 'sweep', 'regime-table',
                    'limits-pm', 'limits-hyp', 'plot'):
        args = parser.parse_args([command] + (['p.dat'] if command in ('verify', 'plot') else []))
        assert args.command == command


def test_solve_pme_writes_profile(tmp_path, capsys):
    main(['solve-pme', '--eps', '0.25', '--c', '1.3', '--out', str(tmp_path)])
    assert (tmp_path / 'pme_eps0.25_c1.3.dat').exists()
    out = capsys.readouterr().out
    assert '💾 Profile saved to' in out
    assert '🎉 Done!' in out


def test_verify_writes_report(tmp_path, sharp_profile, capsys):
    main(['verify', str(sharp_profile), '--out', str(tmp_path / 'reports')])
    report = json.loads((tmp_path / 'reports' / 'sharp.verify.json').read_text(encoding='utf-8'))
    assert report['kind'] == 'pme'
    assert report['checks']['energy_identity']['status'] == 'skipped'
    assert report['checks']['residual']['measured']['distributional_defect'] < 1e-6
    assert 'residual' in capsys.readouterr().out


def test_plot_writes_svg(tmp_path, sharp_profile):
    main(['plot', str(sharp_profile), '--out', str(tmp_path / 'plots')])
    svg = (tmp_path / 'plots' / 'sharp.svg').read_text(encoding='utf-8')
    assert 'sharp: u' in svg


def test_domain_error_exits_with_one_line(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(['solve-tw', '--chi', '1', '--nu', '1', '--out', str(tmp_path)])
    assert info.value.code == 1
    err = capsys.readouterr().err
    assert err.startswith('❌ Error [DomainError]')
    assert 'chi must be negative' in err


def test_limit_study_input_is_validated(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(['limits-pm', '--nus', '0.01,0.1', '--out', str(tmp_path)])
    assert info.value.code == 1
    assert capsys.readouterr().err.startswith('❌ Error [DomainError]')
    assert not (tmp_path / 'limits_pm.json').exists()


def test_missing_config_file(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(['regime-table', '--config', str(tmp_path / 'absent.ini')])
    assert info.value.code == 1
    assert '❌ Error' in capsys.readouterr().err


def test_output_path_that_is_a_file(tmp_path, capsys):
    target = tmp_path / 'taken'
    target.write_text('', encoding='utf-8')
    with pytest.raises(SystemExit) as info:
        main(['solve-pme', '--eps', '0.25', '--out', str(target)])
    assert info.value.code == 1
    assert 'taken' in capsys.readouterr().err


def test_invalid_sweep_is_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(['sweep', '--points', '-4, 1', '--tol', '-1', '--out', str(tmp_path)])
    assert info.value.code == 1
    assert 'tolerance must be positive' in capsys.readouterr().err
