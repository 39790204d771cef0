import pytest

from chemotaxis_waves.errors import (
    ConvergenceError,
    DomainError,
    ProfileFormatError,
    StudyError,
    UnsupportedVersionError,
    WaveError,
)
from chemotaxis_waves.types import ConvergenceReport


def test_domain_errors_are_value_errors():
    with pytest.raises(ValueError):
        raise DomainError("nu must be positive")
    assert issubclass(UnsupportedVersionError, ProfileFormatError)
    assert issubclass(ProfileFormatError, WaveError)


def test_profile_errors_carry_line_number():
    e = ProfileFormatError("bad row", 7)
    assert e.line_number == 7
    assert str(e) == "line 7: bad row"


def test_convergence_error_keeps_history():
    assert ConvergenceError("stalled", [1.0, 0.5]).history == [1.0, 0.5]
    assert ConvergenceError("stalled").history == []


def test_study_error_carries_partial_report():
    report = ConvergenceReport(study='limits_pm', parameters=[0.1], speeds=[0.8], target=0.75,
                               distances=[0.02], status='failed at 0.01')
    e = StudyError("limits_pm failed at 0.01", report)
    assert e.partial.to_dict()['parameters'] == [0.1]
    assert e.partial.to_dict()['status'] == 'failed at 0.01'


def test_report_sequences_must_match():
    with pytest.raises(ValueError):
        ConvergenceReport(study='s', parameters=[0.1, 0.01], speeds=[0.8], target=0.7,
                          distances=[0.1])
    with pytest.raises(ValueError):
        ConvergenceReport(study='s', parameters=[0.1], speeds=[0.8], target=0.7,
                          distances=[-1.0])
