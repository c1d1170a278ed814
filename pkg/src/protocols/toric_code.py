"""ℤ₂ 토릭 코드 프로토콜.

큐비트 보조(A0, A1, A2, A3)와 제어 파울리 ``U_X``/``U_Z`` 만으로
코드 준비, 안정자/문자열 측정, 결함 생성, 최소 간섭계, 기준 위상 실험,
논리 큐비트 연산, 단일 오류 정정을 수행합니다.

안정자
------
* ``A_v = Π_{e∋v} X_e`` (꼭짓점 별)
* ``B_p = Π_{e∈∂p} Z_e`` (면 경계)

rough-smooth 격자에서는 좌우 반간선 덕분에 모든 A 가 독립이고
Z 사슬(왼쪽 rough → 오른쪽 rough)이 논리 큐비트를 표현합니다.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from config.simulation import simulation_settings
from src.engine.measurement import BranchMeasurer, Measurer
from src.engine.state import (
    SiteOperator,
    SparseState,
    apply_group_controlled,
    apply_operator,
    apply_operators,
    apply_site_unitary,
    inner_product,
    measurement_distribution,
    normalize,
    product_state,
    reduced_density_matrix,
    reset_site,
    superpose,
)
from src.exceptions import (
    CorrectionFailedError,
    LatticeError,
    ProtocolError,
    ValidationError,
)
from src.lattice.geometry import BoundaryKind, Edge, Lattice, Vertex
from src.lattice.registry import SiteRegistry, face_label, parse_site, vertex_label
from src.protocols.records import PhaseLedger, ProtocolLog, wrap_phase
from src.utils.logger import get_logger

logger = get_logger(__name__)

FaceIndex = tuple[int, int]

ANCILLAS = ("A0", "A1", "A2", "A3")

_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)
_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
X_BASIS = np.array([_PLUS, _MINUS])  # 결과 0 = +, 1 = -
ANCILLA_STATES = {"0": _KET0, "1": _KET1, "+": _PLUS, "-": _MINUS}


class Pauli(str, Enum):
    X = "X"
    Z = "Z"


def _pauli_kind(kind: Pauli | str) -> Pauli:
    """``X``/``Z``/``U_X``/``U_Z`` 를 :class:`Pauli` 로"""
    if isinstance(kind, Pauli):
        return kind
    try:
        return Pauli(kind.removeprefix("U_"))
    except ValueError:
        raise ValidationError(
            f"알 수 없는 파울리 종류: {kind}", detail={"supported": ["X", "Z", "U_X", "U_Z"]}
        ) from None


@dataclass(frozen=True, slots=True)
class PauliError:
    """단일 큐비트 파울리 오류"""

    kind: Pauli
    edge: Edge

    @property
    def label(self) -> str:
        return f"{self.kind.value}({self.edge.label})"


@dataclass(frozen=True, slots=True)
class InterferometryResult:
    """최소 간섭계 결과: A2 의 ± 측정과 위상 장부"""

    outcome: int  # +1 / -1
    probability: float  # 선택된 결과의 확률
    p_minus: float
    measured_phase: float  # [0, 2π)
    ledger: PhaseLedger


@dataclass(frozen=True, slots=True)
class ReferencePhaseResult:
    main: PhaseLedger
    reference: PhaseLedger

    @property
    def statistical_phase(self) -> float:
        """두 실험의 위상 차이 (동역학 기여 상쇄)"""
        return wrap_phase(self.main.total - self.reference.total)


@dataclass(frozen=True, slots=True)
class Fig3Geometry:
    """최소 간섭계 배치"""

    electric_edge: Edge
    magnetic_edge: Edge
    loop: tuple[Edge, ...]
    reference_edge: Edge
    enclosed_vertex: Vertex


class ToricCode:
    """토릭 코드 실행기 (열린 격자, rough-smooth 격자 모두 지원)."""

    def __init__(
        self,
        lattice: Lattice,
        *,
        measurer: Measurer | None = None,
        prune_epsilon: float | None = None,
    ) -> None:
        self.lattice = lattice
        self.registry = SiteRegistry.build(
            lattice,
            2,
            vertex_ancillas=False,
            face_ancillas=False,
            named=[(name, 2) for name in ANCILLAS],
        )
        self.measurer: Measurer = measurer or BranchMeasurer()
        self.prune_epsilon = (
            simulation_settings.prune_epsilon if prune_epsilon is None else prune_epsilon
        )
        self.log = ProtocolLog()

    # ------------------------------------------------------------------
    # Sites and operators
    # ------------------------------------------------------------------

    def initial_state(self) -> SparseState:
        """``|0⟩^{⊗N}`` (보조 포함)"""
        return product_state(self.registry, {}, default=0, prune_epsilon=self.prune_epsilon)

    def resolve_edge(self, edge: Edge | str) -> Edge:
        if isinstance(edge, Edge):
            return self.lattice.edge(edge.src, edge.dst)
        kind, coords = parse_site(edge)
        if kind != "edge":
            raise LatticeError(f"간선 표기가 아닙니다: {edge}", detail={"site": edge})
        i, j, k, l = coords
        return self.lattice.edge((i, j), (k, l))

    def _site(self, site: int | str | Edge) -> int:
        if isinstance(site, Edge):
            return self.registry.edge_site(self.resolve_edge(site))
        if isinstance(site, str):
            return self.registry.site(site)
        return self.registry.check_site(int(site))

    def pauli(self, kind: Pauli | str, site: int | str | Edge) -> SiteOperator:
        kind = _pauli_kind(kind)
        index = self._site(site)
        if kind is Pauli.X:
            return SiteOperator.permutation(index, (1, 0), "X")
        return SiteOperator.diagonal((index,), lambda v: -1.0 if v[0] else 1.0, "Z")

    def star(self, v: Vertex) -> list[Edge]:
        return [e for e, _ in self.lattice.vertex_star(v)]

    def plaquette(self, f: FaceIndex) -> list[Edge]:
        return list(self.lattice.face(f).edges)

    def stabilizer_ops(self, kind: str, where: Vertex | FaceIndex) -> list[SiteOperator]:
        if kind == "A":
            return [self.pauli(Pauli.X, e) for e in self.star(where)]
        if kind == "B":
            return [self.pauli(Pauli.Z, e) for e in self.plaquette(where)]
        raise ValidationError(f"알 수 없는 안정자 종류: {kind}", detail={"kind": kind})

    def stabilizers(self) -> list[tuple[str, Vertex | FaceIndex]]:
        return [("A", v) for v in self.lattice.vertices] + [
            ("B", f.index) for f in self.lattice.faces
        ]

    @staticmethod
    def stabilizer_label(kind: str, where: tuple[int, int]) -> str:
        return f"A({vertex_label(where)})" if kind == "A" else f"B({face_label(where)})"

    # ------------------------------------------------------------------
    # Expectations
    # ------------------------------------------------------------------

    def stabilizer_value(self, state: SparseState, kind: str, where: Vertex | FaceIndex) -> float:
        """``⟨S⟩`` (비파괴)"""
        ops = self.stabilizer_ops(kind, where)
        value = inner_product(state, apply_operators(state, ops)).real
        return float(value / max(state.norm() ** 2, 1e-300))

    def stabilizer_table(self, state: SparseState) -> dict[str, float]:
        return {
            self.stabilizer_label(kind, where): self.stabilizer_value(state, kind, where)
            for kind, where in self.stabilizers()
        }

    def energy(self, state: SparseState, coupling: float) -> float:
        """배경 해밀토니언 ``H = -U Σ_S S`` 의 기댓값"""
        return -coupling * sum(
            self.stabilizer_value(state, kind, where) for kind, where in self.stabilizers()
        )

    # ------------------------------------------------------------------
    # Controlled gates
    # ------------------------------------------------------------------

    def controlled_pauli(
        self,
        state: SparseState,
        ancilla: int | str,
        target: int | str | Edge,
        kind: Pauli | str,
    ) -> SparseState:
        """``U_P = |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ P`` (``kind`` 는 X/Z 또는 U_X/U_Z)"""
        kind = _pauli_kind(kind)
        control = self._site(ancilla)
        op = self.pauli(kind, target)
        if control in op.sites:
            raise ValidationError(
                "제어 큐비트와 대상 큐비트가 같습니다.",
                detail={"site": self.registry.labels[control]},
            )
        if self.registry.dims[control] != 2 or self.registry.dims[op.sites[0]] != 2:
            raise ValidationError("제어 파울리는 큐비트 사이트에만 적용됩니다.")
        return apply_group_controlled(state, control, {1: [op]})

    def prepare_ancilla(self, state: SparseState, name: str, vector: np.ndarray) -> SparseState:
        """분리된 보조 큐비트를 ``vector`` 로 다시 준비합니다."""
        return reset_site(state, self.registry.site(name), vector)

    def measure_ancilla(
        self,
        state: SparseState,
        name: str,
        basis: str = "x",
        *,
        force: int | None = None,
    ) -> tuple[int, SparseState]:
        """이름 보조 큐비트를 X(±) 또는 Z(0/1) 기저에서 측정. 반환 부호는 +1/-1."""
        if basis not in ("x", "z"):
            raise ValidationError(f"알 수 없는 측정 기저: {basis}", detail={"basis": basis})
        site = self.registry.site(name)
        matrix = X_BASIS if basis == "x" else np.array([_KET0, _KET1])
        distribution = measurement_distribution(state, site, matrix)
        forced = None if force is None else (0 if force > 0 else 1)
        result = self.measurer.measure(state, site, matrix, label=name, force=forced)
        sign = 1 if result.outcome == 0 else -1
        self.log.append(
            "measure_ancilla",
            sites=[name],
            parameters={"basis": basis},
            outcome=sign,
            probability=result.probability,
            values={"p_minus": float(distribution[1])},
        )
        return sign, result.state

    def _drive(
        self, state: SparseState, ancilla: str, kind: Pauli, edges: Sequence[Edge]
    ) -> SparseState:
        for edge in edges:
            state = self.controlled_pauli(state, ancilla, edge, kind)
        return state

    # ------------------------------------------------------------------
    # Ancilla-mediated measurements
    # ------------------------------------------------------------------

    def _ancilla_measure(
        self,
        state: SparseState,
        kind: Pauli,
        edges: Sequence[Edge],
        *,
        label: str,
        force: int | None,
    ) -> tuple[int, float, SparseState]:
        """A3 ``|+⟩`` → 제어 파울리 열 → X 기저 측정. 결과 +1 이면 ``∝ (1+P)ψ``."""
        anc = self.registry.site("A3")
        state = self.prepare_ancilla(state, "A3", _PLUS)
        state = self._drive(state, "A3", kind, edges)
        forced = None if force is None else (0 if force > 0 else 1)
        result = self.measurer.measure(state, anc, X_BASIS, label=label, force=forced)
        sign = 1 if result.outcome == 0 else -1
        return sign, result.probability, self.prepare_ancilla(result.state, "A3", _KET0)

    def measure_stabilizer(
        self,
        state: SparseState,
        kind: str,
        where: Vertex | FaceIndex,
        *,
        force: int | None = None,
    ) -> tuple[int, SparseState]:
        """A_v (U_X) 또는 B_p (U_Z) 측정. ``force`` 는 사후 선택할 부호(±1)."""
        if kind == "A":
            where = self.lattice.check_vertex(where)
            edges, pauli = self.star(where), Pauli.X
        elif kind == "B":
            where = self.lattice.face(where).index
            edges, pauli = self.plaquette(where), Pauli.Z
        else:
            raise ValidationError(f"알 수 없는 안정자 종류: {kind}", detail={"kind": kind})
        label = self.stabilizer_label(kind, where)
        sign, probability, state = self._ancilla_measure(
            state, pauli, edges, label=label, force=force
        )
        self.log.append(
            "measure_stabilizer",
            sites=[label],
            outcome=sign,
            probability=probability,
        )
        logger.debug(
            "안정자 측정 %+d",
            sign,
            extra={"operation": "measure_stabilizer", "site": label, "probability": probability},
        )
        return sign, state

    def correction_edge(self, v: Vertex) -> Edge | None:
        """아래 간선, 없으면 오른쪽 간선(반간선 포함), 둘 다 없으면 None"""
        i, j = v
        if self.lattice.has_edge((i, j), (i + 1, j)):
            return self.lattice.edge((i, j), (i + 1, j))
        if self.lattice.has_edge((i, j), (i, j + 1)):
            return self.lattice.edge((i, j), (i, j + 1))
        return None

    def prepare_toric_code(self, state: SparseState | None = None) -> SparseState:
        """``|0⟩^{⊗N}`` 에서 A 안정자를 행 우선으로 측정하고 -1 이면 ``Z_b`` 로 보정합니다.

        ``Z_b (1 - A_v)|ψ⟩ = (1 + A_v) Z_b|ψ⟩`` 이므로 모든 측정 분기가 같은 코드 상태로 수렴합니다.
        """
        state = self.initial_state() if state is None else state
        for v in self.lattice.vertices:
            edge = self.correction_edge(v)
            sign, state = self.measure_stabilizer(state, "A", v)
            if sign > 0:
                continue
            if edge is None:
                raise CorrectionFailedError(
                    detail={"vertex": vertex_label(v), "reason": "no correction edge"}
                )
            state = apply_operator(state, self.pauli(Pauli.Z, edge))
            self.log.append("correction", sites=[edge.label], parameters={"pauli": "Z"})

        tol = simulation_settings.normalization_tolerance
        table = self.stabilizer_table(state)
        failed = {k: v for k, v in table.items() if abs(v - 1.0) > tol}
        if failed:
            logger.warning("코드 준비 후 안정자 위반: %s", sorted(failed))
            raise CorrectionFailedError(detail={"stabilizers": failed})
        self.log.append("prepare_toric_code", parameters={"mode": self.measurer.mode_name})
        logger.info("토릭 코드 준비 완료 (간선 %d개)", len(self.lattice.edges))
        return state

    def code_state_oracle(self) -> SparseState:
        """``Π_v (1 + A_v)|0⟩^{⊗N}`` 정규화"""
        state = self.initial_state()
        for v in self.lattice.vertices:
            flipped = apply_operators(state, self.stabilizer_ops("A", v))
            state = superpose([(0.5, state), (0.5, flipped)])
        return normalize(state)

    # ------------------------------------------------------------------
    # Strings
    # ------------------------------------------------------------------

    def _path(self, path: Sequence[Edge | str]) -> list[Edge]:
        edges = [self.resolve_edge(e) for e in path]
        if not edges:
            raise ValidationError("문자열 경로가 비어 있습니다.")
        return edges

    def apply_string(
        self, state: SparseState, kind: Pauli | str, path: Sequence[Edge | str]
    ) -> SparseState:
        """A3 ``|1⟩`` 로 경로 위 제어 파울리를 차례로 적용 (끝점에 결함 생성)"""
        kind = _pauli_kind(kind)
        edges = self._path(path)
        state = self.prepare_ancilla(state, "A3", _KET1)
        state = self._drive(state, "A3", kind, edges)
        state = self.prepare_ancilla(state, "A3", _KET0)
        self.log.append(
            "apply_string", sites=[e.label for e in edges], parameters={"pauli": kind.value}
        )
        return state

    def measure_string(
        self,
        state: SparseState,
        kind: Pauli | str,
        path: Sequence[Edge | str],
        *,
        force: int | None = None,
    ) -> tuple[int, SparseState]:
        """``Π_path P`` 측정: ``(1 ± Π P)/norm`` 으로 사영하고 부호를 반환"""
        kind = _pauli_kind(kind)
        edges = self._path(path)
        sign, probability, state = self._ancilla_measure(
            state, kind, edges, label=f"{kind.value}-string", force=force
        )
        self.log.append(
            "measure_string",
            sites=[e.label for e in edges],
            parameters={"pauli": kind.value},
            outcome=sign,
            probability=probability,
        )
        return sign, state

    def create_defect_superposition(
        self,
        state: SparseState,
        kind: Pauli | str,
        path: Sequence[Edge | str],
        ancilla: str = "A2",
    ) -> SparseState:
        """보조 ``|+⟩`` 로 제어한 문자열: 진공과 결함 쌍의 중첩"""
        kind = _pauli_kind(kind)
        edges = self._path(path)
        state = self.prepare_ancilla(state, ancilla, _PLUS)
        state = self._drive(state, ancilla, kind, edges)
        self.log.append(
            "create_defect_superposition",
            sites=[ancilla] + [e.label for e in edges],
            parameters={"pauli": kind.value},
        )
        return state

    # ------------------------------------------------------------------
    # Logical qubit
    # ------------------------------------------------------------------

    def measure_logical_z(
        self,
        state: SparseState,
        path: Sequence[Edge | str] | None = None,
        *,
        force: int | None = None,
    ) -> tuple[int, SparseState]:
        """rough↔rough Z 사슬 측정"""
        z_path, _ = self.lattice.logical_paths()
        return self.measure_string(state, Pauli.Z, path or z_path, force=force)

    def apply_logical_x(
        self, state: SparseState, path: Sequence[Edge | str] | None = None
    ) -> SparseState:
        _, x_path = self.lattice.logical_paths()
        return self.apply_string(state, Pauli.X, path or x_path)

    def logical_ops(
        self, state: SparseState, which: str
    ) -> tuple[int, SparseState] | SparseState:
        if which == "measure_Z_L":
            return self.measure_logical_z(state)
        if which == "apply_X_L":
            return self.apply_logical_x(state)
        raise ValidationError(
            f"알 수 없는 논리 연산: {which}",
            detail={"supported": ["measure_Z_L", "apply_X_L"]},
        )

    # ------------------------------------------------------------------
    # Interferometry
    # ------------------------------------------------------------------

    def fig3_geometry(self) -> Fig3Geometry:
        """최소 간섭계 배치 (rough-smooth, n, m ≥ 3)"""
        lat = self.lattice
        if lat.boundary is not BoundaryKind.ROUGH_SMOOTH or lat.n_rows < 3 or lat.n_cols < 3:
            raise LatticeError(
                "간섭계 실험은 3×3 이상의 rough-smooth 격자가 필요합니다.",
                detail={"boundary": lat.boundary.value, "n": lat.n_rows, "m": lat.n_cols},
            )
        return Fig3Geometry(
            electric_edge=lat.edge((1, 0), (1, 1)),
            magnetic_edge=lat.edge((0, 2), (1, 2)),
            loop=(
                lat.edge((1, 1), (1, 2)),
                lat.edge((1, 1), (2, 1)),
                lat.edge((1, 0), (1, 1)),
                lat.edge((0, 1), (1, 1)),
            ),
            reference_edge=lat.edge((2, 1), (2, 2)),
            enclosed_vertex=(1, 1),
        )

    def _branch(self, state: SparseState, site: int, value: int) -> SparseState:
        return apply_operator(
            state,
            SiteOperator.diagonal((site,), lambda v: 1.0 if v[0] == value else 0.0, "P"),
        )

    def _accrue_dynamical(
        self, state: SparseState, coupling: float, dt: float
    ) -> tuple[SparseState, float]:
        """A2 분기별 에너지 ``E_k = -U Σ⟨S⟩_k`` 로 ``e^{-iE_k dt}`` 를 누적. 반환값은 ``(E_1 - E_0)dt``."""
        a2 = self.registry.site("A2")
        floor = simulation_settings.probability_floor
        energies = []
        for k in (0, 1):
            branch = self._branch(state, a2, k)
            energies.append(self.energy(branch, coupling) if branch.norm() ** 2 > floor else 0.0)
        phases = np.diag(np.exp(-1j * np.array(energies) * dt))
        return apply_site_unitary(state, a2, phases), (energies[1] - energies[0]) * dt

    def interferometry_fig3(
        self,
        state: SparseState | None = None,
        *,
        coupling: float = 0.0,
        t_braid: float | None = None,
        enclose: bool = True,
        windings: int = 1,
        force: int | None = None,
    ) -> InterferometryResult:
        """최소 간섭계.

        A1(또는 기준 실험의 A0)이 U_Z 로 전기 결함 쌍을 만들고, A2 ``|+⟩`` 가 U_X 로
        자기 결함 중첩을 만든 뒤 M1 을 E2 둘레로 감고 재소멸시킵니다.
        A2 에 남는 상대 위상을 ``-arg ρ₁₀`` 로 읽고 ± 기저에서 측정합니다.

        Args:
            coupling: 배경 해밀토니언 결합 U (≥ 0)
            t_braid: 한 바퀴 감는 데 걸리는 시간 (기본: 게이트 수)
            enclose: False 면 A0 로 고리 밖에 전기 쌍을 만듭니다 (기준 실험)
            windings: 감는 횟수
        """
        geo = self.fig3_geometry()
        if coupling < 0:
            raise ValidationError("결합 상수 U 는 0 이상이어야 합니다.", detail={"U": coupling})
        if windings < 1:
            raise ValidationError("감는 횟수는 1 이상이어야 합니다.", detail={"windings": windings})
        t_braid = float(len(geo.loop)) if t_braid is None else float(t_braid)
        dt = t_braid / len(geo.loop)

        state = self.prepare_toric_code() if state is None else state
        driver, e_edge = ("A1", geo.electric_edge) if enclose else ("A0", geo.reference_edge)
        state = self.prepare_ancilla(state, driver, _KET1)
        state = self._drive(state, driver, Pauli.Z, [e_edge])
        enclosed = self.stabilizer_value(state, "A", geo.enclosed_vertex)
        expected = -1.0 if enclose else 1.0
        if abs(enclosed - expected) > simulation_settings.normalization_tolerance:
            raise ValidationError(
                "감는 고리 안의 전기 결함 수가 실험 설정과 다릅니다.",
                detail={"vertex": vertex_label(geo.enclosed_vertex), "A": enclosed},
            )

        state = self.prepare_ancilla(state, "A2", _PLUS)
        state = self._drive(state, "A2", Pauli.X, [geo.magnetic_edge])
        dynamical = 0.0
        for _ in range(windings):
            for edge in geo.loop:
                state = self.controlled_pauli(state, "A2", edge, Pauli.X)
                if coupling:
                    state, dphi = self._accrue_dynamical(state, coupling, dt)
                    dynamical += dphi
        state = self._drive(state, "A2", Pauli.X, [geo.magnetic_edge])
        state = self._drive(state, driver, Pauli.Z, [e_edge])

        a2 = self.registry.site("A2")
        rho = reduced_density_matrix(state, a2)
        if abs(rho[1, 0]) < 0.5 - simulation_settings.purity_tolerance:
            raise ProtocolError(
                "A2 가 코드와 분리되지 않아 위상을 읽을 수 없습니다.",
                detail={"coherence": float(abs(rho[1, 0]))},
            )
        measured = wrap_phase(-float(np.angle(rho[1, 0])))
        ledger = PhaseLedger(
            statistical=wrap_phase(measured - dynamical),
            dynamical=dynamical,
            geometric=0.0,
            coupling=coupling,
            elapsed=t_braid * windings,
        )
        p_minus = float(measurement_distribution(state, a2, X_BASIS)[1])
        forced = None if force is None else (0 if force > 0 else 1)
        result = self.measurer.measure(state, a2, X_BASIS, label="A2", force=forced)
        outcome = 1 if result.outcome == 0 else -1

        self.log.append(
            "interferometry_fig3",
            sites=["A2", driver] + [e.label for e in geo.loop],
            parameters={"U": coupling, "t_braid": t_braid, "enclose": enclose, "windings": windings},
            outcome=outcome,
            probability=result.probability,
            values={"measured_phase": measured, **ledger.as_dict()},
        )
        logger.info(
            "간섭계 A2=%+d (p=%.6f) φ_s=%.6f φ_d=%.6f", outcome, result.probability,
            ledger.statistical, ledger.dynamical,
        )
        return InterferometryResult(
            outcome=outcome,
            probability=result.probability,
            p_minus=p_minus,
            measured_phase=measured,
            ledger=ledger,
        )

    def reference_phase_experiment(
        self, coupling: float = 0.0, t_braid: float | None = None
    ) -> ReferencePhaseResult:
        """같은 경로와 결함 수로 감싸는/감싸지 않는 실험을 수행해 위상 차이로 φ_s 를 얻습니다."""
        code = self.prepare_toric_code()
        main = self.interferometry_fig3(code, coupling=coupling, t_braid=t_braid, enclose=True)
        reference = self.interferometry_fig3(code, coupling=coupling, t_braid=t_braid, enclose=False)
        result = ReferencePhaseResult(main=main.ledger, reference=reference.ledger)
        self.log.append(
            "reference_phase_experiment",
            parameters={"U": coupling, "t_braid": main.ledger.elapsed},
            values={
                "main_phase": main.ledger.total,
                "reference_phase": reference.ledger.total,
                "phi_s": result.statistical_phase,
            },
        )
        return result

    # ------------------------------------------------------------------
    # Error correction
    # ------------------------------------------------------------------

    def syndrome(self, state: SparseState) -> tuple[dict[str, int], SparseState]:
        """모든 안정자를 측정한 부호표"""
        table: dict[str, int] = {}
        for kind, where in self.stabilizers():
            sign, state = self.measure_stabilizer(state, kind, where)
            table[self.stabilizer_label(kind, where)] = sign
        return table, state

    def error_syndrome(self, error: PauliError) -> frozenset[str]:
        """단일 오류가 뒤집는 안정자 라벨"""
        if error.kind is Pauli.Z:
            ends = (error.edge.src, error.edge.dst)
            return frozenset(
                self.stabilizer_label("A", v) for v in ends if self.lattice.has_vertex(v)
            )
        return frozenset(
            self.stabilizer_label("B", f.index) for f in self.lattice.faces_of_edge(error.edge)
        )

    def decode_single_error(self, syndrome: dict[str, int]) -> PauliError | None:
        """단일 X/Z 오류 조회표 복호"""
        flipped = frozenset(label for label, sign in syndrome.items() if sign < 0)
        if not flipped:
            return None
        for kind in Pauli:
            for edge in self.lattice.edges:
                error = PauliError(kind, edge)
                if self.error_syndrome(error) == flipped:
                    return error
        raise CorrectionFailedError(
            "단일 오류로 설명되지 않는 신드롬입니다.",
            detail={"flipped": sorted(flipped)},
        )

    def apply_error(self, state: SparseState, error: PauliError) -> SparseState:
        self.log.append("apply_error", sites=[error.edge.label], parameters={"pauli": error.kind.value})
        return apply_operator(state, self.pauli(error.kind, error.edge))

    def correct(self, state: SparseState, error: PauliError | None) -> SparseState:
        if error is None:
            return state
        self.log.append("correct", sites=[error.edge.label], parameters={"pauli": error.kind.value})
        return apply_operator(state, self.pauli(error.kind, error.edge))

