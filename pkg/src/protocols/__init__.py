"""애니온 프로토콜 패키지 (군 일반 양자 이중 + ℤ₂ 토릭 코드)"""

from src.protocols.quantum_double import CorrectionPolicy, InterferenceResult, QuantumDouble
from src.protocols.records import (
    AnyonKind,
    AnyonRecord,
    FusionDistribution,
    LogEntry,
    PhaseLedger,
    ProtocolLog,
    wrap_phase,
)
from src.protocols.toric_code import (
    InterferometryResult,
    Pauli,
    PauliError,
    ReferencePhaseResult,
    ToricCode,
)

__all__ = [
    "AnyonKind",
    "AnyonRecord",
    "CorrectionPolicy",
    "FusionDistribution",
    "InterferenceResult",
    "InterferometryResult",
    "LogEntry",
    "Pauli",
    "PauliError",
    "PhaseLedger",
    "ProtocolLog",
    "QuantumDouble",
    "ReferencePhaseResult",
    "ToricCode",
    "wrap_phase",
]
