"""측정 드라이버.

프로토콜은 측정 결과를 직접 고르지 않고 :class:`Measurer` 에 위임합니다.

* :class:`SampleMeasurer` - 시드 고정 PCG64 생성기로 Born 규칙 샘플링
* :class:`BranchMeasurer` - 지정한 결과 열을 따르고, 소진되면 가장 확률이 큰
  결과(동률이면 작은 인덱스)를 선택
* :func:`enumerate_outcome_paths` - 0 이 아닌 확률의 모든 결과 열을 깊이 우선으로
  재실행하며 열거
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Generic, Sequence, TypeVar

import numpy as np

from config.simulation import simulation_settings
from src.engine.state import (
    BranchMode,
    MeasurementOutcome,
    SampleMode,
    SparseState,
    measure,
    measurement_distribution,
)
from src.exceptions import ProtocolError
from src.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class MeasurementRecord:
    label: str
    outcome: int
    probability: float
    distribution: tuple[float, ...]
    forced: bool = False


class Measurer(ABC):
    """측정 결과 선택 전략"""

    def __init__(self) -> None:
        self.trace: list[MeasurementRecord] = []

    @property
    @abstractmethod
    def mode_name(self) -> str: ...

    @abstractmethod
    def _choose(self, state: SparseState, site: int, basis: np.ndarray) -> MeasurementOutcome: ...

    def measure(
        self,
        state: SparseState,
        site: int,
        basis: np.ndarray,
        *,
        label: str = "",
        force: int | None = None,
    ) -> MeasurementOutcome:
        """측정 후 기록을 남깁니다. ``force`` 가 있으면 그 결과로 사후 선택합니다."""
        if force is not None:
            result = measure(state, site, basis, BranchMode(force))
        else:
            result = self._choose(state, site, basis)
        self.trace.append(
            MeasurementRecord(
                label, result.outcome, result.probability, result.distribution, force is not None
            )
        )
        logger.debug(
            "측정 %s",
            label or state.registry.labels[site],
            extra={
                "site": state.registry.labels[site],
                "outcome": result.outcome,
                "probability": round(result.probability, 12),
            },
        )
        return result

    @property
    def path_probability(self) -> float:
        """지금까지 선택한 결과 열의 결합 확률"""
        return float(np.prod([r.probability for r in self.trace])) if self.trace else 1.0


class SampleMeasurer(Measurer):
    """시드 고정 Born 규칙 샘플링"""

    def __init__(self, seed: int) -> None:
        super().__init__()
        self.seed = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))

    @property
    def mode_name(self) -> str:
        return "sample"

    def _choose(self, state: SparseState, site: int, basis: np.ndarray) -> MeasurementOutcome:
        return measure(state, site, basis, SampleMode(self._rng))


class BranchMeasurer(Measurer):
    """결정적 분기 선택.

    Args:
        preferred: 앞에서부터 차례로 사용할 결과 열
        explore: 결과 열이 소진되면 최댓값 대신 확률이 0 이 아닌 가장 작은 인덱스를 선택
    """

    def __init__(self, preferred: Sequence[int] = (), *, explore: bool = False) -> None:
        super().__init__()
        self._preferred = list(preferred)
        self._explore = explore

    @property
    def mode_name(self) -> str:
        return "branch"

    def _choose(self, state: SparseState, site: int, basis: np.ndarray) -> MeasurementOutcome:
        depth = len(self.trace)
        if depth < len(self._preferred):
            return measure(state, site, basis, BranchMode(self._preferred[depth]))
        probs = measurement_distribution(state, site, basis)
        if self._explore:
            floor = simulation_settings.probability_floor
            outcome = int(next(k for k, p in enumerate(probs) if p > floor))
        else:
            outcome = int(np.argmax(np.round(probs, 12)))
        return measure(state, site, basis, BranchMode(outcome))


@dataclass(slots=True)
class OutcomePath(Generic[T]):
    outcomes: tuple[int, ...]
    probability: float
    result: T
    labels: tuple[str, ...] = field(default=())


def enumerate_outcome_paths(
    run: Callable[[Measurer], T],
    *,
    max_paths: int = 100_000,
) -> list[OutcomePath[T]]:
    """모든 비영(非零) 확률 측정 결과 열을 열거합니다.

    ``run`` 은 주어진 측정기로 프로토콜 전체를 실행하는 함수입니다.
    같은 접두 결과 열에 대해 결정적이어야 합니다.
    """
    floor = simulation_settings.probability_floor
    paths: list[OutcomePath[T]] = []
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        measurer = BranchMeasurer(prefix, explore=True)
        result = run(measurer)
        trace = measurer.trace
        chosen = tuple(r.outcome for r in trace)
        for depth in range(len(prefix), len(trace)):
            if trace[depth].forced:
                continue
            for k, p in enumerate(trace[depth].distribution):
                if p > floor and k != chosen[depth]:
                    stack.append(chosen[:depth] + (k,))
        paths.append(
            OutcomePath(
                outcomes=chosen,
                probability=measurer.path_probability,
                result=result,
                labels=tuple(r.label for r in trace),
            )
        )
        if len(paths) > max_paths:
            raise ProtocolError(
                "측정 결과 열이 너무 많습니다.",
                detail={"max_paths": max_paths},
            )
    paths.sort(key=lambda p: p.outcomes)
    return paths
