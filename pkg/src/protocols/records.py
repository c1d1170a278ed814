"""
프로토콜 기록 타입

애니온 장부(AnyonRecord), 융합 분포, 위상 장부(PhaseLedger), 프로토콜 로그를 정의합니다.
로그 항목은 결과 문서로 직렬화되므로 Pydantic 모델로 둡니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field

from src.exceptions import ValidationError


# ─────────────────────────────────────────────
# 애니온 장부
# ─────────────────────────────────────────────

class AnyonKind(str, Enum):
    MAGNETIC = "magnetic"
    ELECTRIC = "electric"


@dataclass(frozen=True, slots=True)
class AnyonRecord:
    """상태와 별개로 유지하는 고전 메타데이터 (단일 진실 원천은 상태 자체)"""

    kind: AnyonKind
    location: tuple[Any, ...]  # 자기: (꼭짓점, 면), 전기: (꼭짓점,)
    label: str  # 자기: 켤레류 대표 원소 이름, 전기: 기약표현 라벨
    pair_id: int = 0


@dataclass(slots=True)
class FusionDistribution:
    """융합 채널 → 확률"""

    channels: dict[str, float] = field(default_factory=dict)
    vacuum_channel: str = "vacuum"

    def __post_init__(self) -> None:
        total = sum(self.channels.values())
        if self.channels and abs(total - 1.0) > 1e-10:
            raise ValidationError(
                "융합 확률의 합이 1이 아닙니다.",
                detail={"channels": self.channels, "total": total},
            )

    def probability(self, channel: str) -> float:
        return self.channels.get(channel, 0.0)

    @property
    def vacuum(self) -> float:
        return self.probability(self.vacuum_channel)


# ─────────────────────────────────────────────
# 위상 장부
# ─────────────────────────────────────────────

def wrap_phase(phi: float) -> float:
    """[0, 2π) 로 접기 (2π 근처 수치 오차는 0 으로)"""
    wrapped = math.fmod(phi, 2 * math.pi)
    if wrapped < 0:
        wrapped += 2 * math.pi
    if abs(wrapped - 2 * math.pi) < 1e-12:
        wrapped = 0.0
    return wrapped


@dataclass(slots=True)
class PhaseLedger:
    """간섭계 위상 성분: 통계 φ_s, 동역학 φ_d, 기하 φ_g(모형상 0)"""

    statistical: float = 0.0
    dynamical: float = 0.0
    geometric: float = 0.0
    coupling: float = 0.0  # 배경 해밀토니언 결합 U
    elapsed: float = 0.0  # 경과 시간 t

    @property
    def total(self) -> float:
        return self.statistical + self.dynamical + self.geometric

    def as_dict(self) -> dict[str, float]:
        return {
            "phi_s": self.statistical,
            "phi_d": self.dynamical,
            "phi_g": self.geometric,
            "U": self.coupling,
            "t": self.elapsed,
            "total": self.total,
        }


# ─────────────────────────────────────────────
# 프로토콜 로그
# ─────────────────────────────────────────────

class LogEntry(BaseModel):
    """프로토콜 로그 항목"""

    operation: str = Field(description="연산 이름")
    sites: list[str] = Field(default_factory=list, description="관련 사이트 라벨")
    parameters: dict[str, Any] = Field(default_factory=dict, description="연산 파라미터")
    outcome: int | None = Field(default=None, description="측정 결과 인덱스")
    probability: float | None = Field(default=None, description="결과 확률 또는 생존 확률")
    values: dict[str, Any] = Field(default_factory=dict, description="부가 수치 (분포, 기댓값 등)")


class ProtocolLog(BaseModel):
    """추가만 가능한 프로토콜 로그"""

    entries: list[LogEntry] = Field(default_factory=list)

    def append(self, operation: str, **kwargs: Any) -> LogEntry:
        entry = LogEntry(operation=operation, **kwargs)
        self.entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self.entries)

    def operations(self) -> list[str]:
        return [e.operation for e in self.entries]
