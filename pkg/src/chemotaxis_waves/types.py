"""
Type definitions for chemotaxis-waves.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, TypedDict, Union

Scalar = Union[float, int, str, bool, None]


class CheckResult(TypedDict):
    """Outcome of one named diagnostic check"""
    name: str
    passed: bool
    status: str
    measured: Dict[str, Scalar]
    bound: Dict[str, Scalar]


class SweepRow(TypedDict):
    """One row of a sweep table"""
    chi: float
    nu: float
    delta: float
    c: float
    L_final: float
    residual: float
    energy_gap: float
    oscillation_C: float
    decay_violations: int
    structure_violations: int
    holder_ok: bool
    quasi_gap: float
    status: str


class RegimeRow(TypedDict):
    """One probed row of the asymptotic regime table"""
    regime: str
    description: str
    chi: float
    nu: float
    c: float
    c_unscaled: float
    predicted: str
    deviation: float
    passed: bool
    status: str


class StudyPoint(TypedDict, total=False):
    """Per-parameter record of a limit study"""
    parameter: float
    c: float
    distance: float
    distance_edge: float
    shift: float
    gap: float
    gap_bound: float
    location: float
    sup_gap: float
    oscillation_C: float
    checks: Dict[str, bool]
    status: str


class BisectionStep(TypedDict):
    """One bisection iterate of the speed selector"""
    c: float
    phi: float
    bracket_low: float
    bracket_high: float


class ScanPoint(TypedDict):
    """Pre-scan sample of the normalization mismatch"""
    c: float
    phi: Optional[float]
    converged: bool


SignChanges = List[List[float]]


@dataclass
class ConvergenceReport:
    """Speeds and profile distances along a parameter sequence of a limit study"""
    study: str
    parameters: List[float]
    speeds: List[float]
    target: float
    distances: List[float]
    verdict: bool = False
    points: List[StudyPoint] = field(default_factory=list)
    status: str = 'ok'

    def __post_init__(self) -> None:
        if not len(self.parameters) == len(self.speeds) == len(self.distances):
            raise ValueError("report sequences must have equal length")
        if any(d < 0 for d in self.distances):
            raise ValueError("profile distances must be nonnegative")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
