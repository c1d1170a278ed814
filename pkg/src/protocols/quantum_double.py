"""양자 이중 D(G) 프로토콜.

게이지 변환, 꼭짓점/플럭스 사영, 바닥상태 준비, 자기·전기 애니온 쌍 생성,
이동, 브레이딩, 융합, 단일 면 간섭 실험을 군에 무관하게 구현합니다.

보조 큐디트 운용
----------------
* 꼭짓점/면 보조 큐디트는 쉬는 동안 ``|e⟩`` 에 두고 사용 직전에 준비합니다.
  사용 후에는 분리(순수) 상태임을 확인하고 ``|e⟩`` 로 되돌립니다.
* 플럭스는 기준점에서 시작해 면 순환을 따라 간선 값을 곱한 값입니다
  (o_f = -1 인 간선은 역원).

모든 연산은 새 상태를 반환하며, 프로토콜 로그와 애니온 장부는 인스턴스에 쌓입니다.
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
    apply_left_mul,
    apply_linear,
    apply_operators,
    apply_site_unitary,
    inner_product,
    measurement_distribution,
    normalize,
    product_state,
    reset_site,
    site_value_distribution,
    superpose,
    swap_sites,
)
from src.exceptions import (
    AncillaStateError,
    CorrectionFailedError,
    LatticeError,
    ResourceLimitError,
    ValidationError,
)
from src.group.core import FiniteGroup, complete_orthonormal_basis
from src.lattice.geometry import BoundaryKind, Direction, Edge, Lattice, Vertex
from src.lattice.registry import SiteRegistry, face_label, vertex_label
from src.protocols.records import AnyonKind, AnyonRecord, FusionDistribution, ProtocolLog
from src.utils.logger import get_logger

logger = get_logger(__name__)

FaceIndex = tuple[int, int]


class CorrectionPolicy(str, Enum):
    """꼭짓점 측정 결과가 0 이 아닐 때의 처리 방식"""

    POSTSELECT = "postselect"  # 결과 0 으로 사후 선택
    FOURIER_CORRECTION = "fourier-correction"  # Z^r 보정 후 ⟨A(v)⟩ = 1 확인

    @classmethod
    def _missing_(cls, value: object) -> CorrectionPolicy | None:
        return cls.FOURIER_CORRECTION if value in POLICY_ALIASES else None

    @classmethod
    def accepted_values(cls) -> list[str]:
        """CLI/스크립트에서 받는 이름 (별칭 포함)"""
        return [p.value for p in cls] + sorted(POLICY_ALIASES)


# 외부 문서에서 쓰는 Z^r 보정 정책 이름
POLICY_ALIASES = frozenset({"paper-correction"})


@dataclass(frozen=True, slots=True)
class InterferenceResult:
    """단일 면 간섭 결과"""

    element: str
    contrast: float  # P(+) - P(-) = |⟨ψ|T_h(v)ψ⟩|²
    overlap_real: float  # Re ⟨ψ|T_h(v)|ψ⟩
    overlap_imag: float  # Im ⟨ψ|T_h(v)|ψ⟩


class QuantumDouble:
    """열린 정사각 격자 위 D(G) 프로토콜 실행기."""

    def __init__(
        self,
        group: FiniteGroup,
        lattice: Lattice,
        *,
        measurer: Measurer | None = None,
        prune_epsilon: float | None = None,
    ) -> None:
        if lattice.boundary is not BoundaryKind.OPEN:
            raise LatticeError(
                "양자 이중 프로토콜은 열린 정사각 격자에서만 실행됩니다.",
                detail={"boundary": lattice.boundary.value},
            )
        self.group = group
        self.lattice = lattice
        self.registry = SiteRegistry.build(lattice, group.order)
        self.measurer: Measurer = measurer or BranchMeasurer()
        self.prune_epsilon = (
            simulation_settings.prune_epsilon if prune_epsilon is None else prune_epsilon
        )
        self.log = ProtocolLog()
        self.records: list[AnyonRecord] = []
        self._next_pair = 0

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def initial_state(self) -> SparseState:
        """모든 코드/보조 큐디트가 ``|e⟩`` 인 곱 상태"""
        return product_state(self.registry, {}, default=0, prune_epsilon=self.prune_epsilon)

    def _element(self, g: int | str) -> int:
        return self.group.resolve(g)

    def _edge_value(self, state_key: int, edge: Edge) -> int:
        return self.registry.value(state_key, self.registry.edge_site(edge))

    def _unit_vector(self, g: int) -> np.ndarray:
        vec = np.zeros(self.group.order, dtype=complex)
        vec[g] = 1.0
        return vec

    def _preparation(self, vector: np.ndarray) -> np.ndarray:
        """``|e⟩ → vector`` 인 유니터리 (첫 열이 vector)"""
        return complete_orthonormal_basis([vector], self.group.order).T

    def _require_identity(self, state: SparseState, site: int) -> None:
        tol = simulation_settings.purity_tolerance
        if site_value_distribution(state, site)[0] < 1.0 - tol:
            raise AncillaStateError(
                f"보조 큐디트 {self.registry.labels[site]} 가 |e⟩ 상태가 아닙니다.",
                detail={"site": self.registry.labels[site]},
            )

    def _release(self, state: SparseState, site: int) -> SparseState:
        """분리된 보조 큐디트를 ``|e⟩`` 로 되돌립니다."""
        return reset_site(state, site, self._unit_vector(0))

    def _gauge_ops(self, v: Vertex, g: int) -> list[SiteOperator]:
        """``T_g(v) = Π_{[v,*]} L_g Π_{[*,v]} R_{g⁻¹}``"""
        ops = []
        for edge, direction in self.lattice.vertex_star(v):
            site = self.registry.edge_site(edge)
            if direction is Direction.OUTGOING:
                ops.append(SiteOperator.left_mul(site, g, self.group))
            else:
                ops.append(SiteOperator.right_mul(site, self.group.inv(g), self.group))
        return ops

    # ------------------------------------------------------------------
    # Gauge transformations and projectors
    # ------------------------------------------------------------------

    def gauge_transform(self, state: SparseState, v: Vertex, g: int | str) -> SparseState:
        v = self.lattice.check_vertex(v)
        g = self._element(g)
        self.log.append(
            "gauge_transform",
            sites=[vertex_label(v)],
            parameters={"g": self.group.element_name(g)},
        )
        return apply_operators(state, self._gauge_ops(v, g))

    def vertex_projector_expectation(self, state: SparseState, v: Vertex) -> float:
        """``⟨A(v)⟩ = (1/|G|) Σ_g ⟨ψ|T_g(v)|ψ⟩``"""
        v = self.lattice.check_vertex(v)
        total = sum(
            inner_product(state, apply_operators(state, self._gauge_ops(v, g))).real
            for g in range(self.group.order)
        )
        return float(min(max(total / self.group.order, 0.0), 1.0))

    def flux(self, key: int, f: FaceIndex, base: Vertex | None = None) -> int:
        """구성 키에서 면 f 의 플럭스 (기준점부터 순서대로 곱, o_f = -1 은 역원)"""
        result = self.group.identity
        for edge, sign in self.lattice.face_cycle(f, base):
            value = self._edge_value(key, edge)
            result = self.group.mul(result, value if sign > 0 else self.group.inv(value))
        return result

    def flux_distribution(
        self, state: SparseState, f: FaceIndex, base: Vertex | None = None
    ) -> np.ndarray:
        """플럭스 값별 확률 (``⟨B_ℓ(v,f)⟩``)"""
        probs = np.zeros(self.group.order)
        for key, amp in state.amplitudes.items():
            probs[self.flux(key, f, base)] += abs(amp) ** 2
        return probs / probs.sum()

    def face_projector_expectation(self, state: SparseState, f: FaceIndex) -> float:
        """``⟨B(f)⟩ = ⟨B_e(f)⟩``"""
        return float(self.flux_distribution(state, f)[self.group.identity])

    def flux_projector(self, f: FaceIndex, value: int, base: Vertex | None = None) -> SiteOperator:
        """``B_value(base, f)`` 대각 연산자"""
        cycle = self.lattice.face_cycle(f, base)
        sites = [self.registry.edge_site(e) for e, _ in cycle]
        signs = [s for _, s in cycle]
        group = self.group

        def phase(values: tuple[int, ...]) -> complex:
            acc = group.identity
            for x, sign in zip(values, signs):
                acc = group.mul(acc, x if sign > 0 else group.inv(x))
            return 1.0 if acc == value else 0.0

        return SiteOperator.diagonal(sites, phase, f"B_{value}")

    def stabilizer_table(self, state: SparseState) -> dict[str, float]:
        """모든 ``⟨A(v)⟩``, ``⟨B(f)⟩``"""
        table = {
            f"A({vertex_label(v)})": self.vertex_projector_expectation(state, v)
            for v in self.lattice.vertices
        }
        table.update(
            {f"B({f.label})": self.face_projector_expectation(state, f.index) for f in self.lattice.faces}
        )
        return table

    # ------------------------------------------------------------------
    # Ground state
    # ------------------------------------------------------------------

    def measure_vertex(
        self, state: SparseState, v: Vertex, *, force: int | None = None
    ) -> tuple[int, SparseState]:
        """보조 큐디트 ``|0̃⟩`` + ``W(v)`` + Fourier 기저 측정. 결과 0 이면 ``∝ A(v)ψ``."""
        v = self.lattice.check_vertex(v)
        anc = self.registry.vertex_site(v)
        self._require_identity(state, anc)

        state = apply_site_unitary(state, anc, self.group.fourier_basis().T)
        state = apply_group_controlled(
            state, anc, lambda h: self._gauge_ops(v, h) if h else ()
        )
        result = self.measurer.measure(
            state, anc, self.group.fourier_basis(), label=f"vertex {vertex_label(v)}", force=force
        )
        self.log.append(
            "measure_vertex",
            sites=[vertex_label(v)],
            outcome=result.outcome,
            probability=result.probability,
        )
        logger.info(
            "꼭짓점 측정 r=%d",
            result.outcome,
            extra={
                "operation": "measure_vertex",
                "site": vertex_label(v),
                "outcome": result.outcome,
                "probability": round(result.probability, 12),
            },
        )
        return result.outcome, self._release(result.state, anc)

    def preparation_schedule(self) -> list[tuple[Vertex, Edge]]:
        """(측정 꼭짓점, 보정 간선) 열: 왼쪽 열부터 위→아래, 마지막 열은 아래 간선 보정.

        마지막 꼭짓점 v(n-1, m-1) 은 나머지의 곱으로 결정되므로 제외합니다.
        """
        n, m = self.lattice.n_rows, self.lattice.n_cols
        schedule = []
        for j in range(m - 1):
            for i in range(n):
                schedule.append(((i, j), self.lattice.edge((i, j), (i, j + 1))))
        for i in range(n - 1):
            schedule.append(((i, m - 1), self.lattice.edge((i, m - 1), (i + 1, m - 1))))
        return schedule

    def prepare_ground_state(
        self,
        policy: CorrectionPolicy | str = CorrectionPolicy.POSTSELECT,
        state: SparseState | None = None,
    ) -> SparseState:
        """열 단위 꼭짓점 측정으로 바닥상태를 준비합니다."""
        policy = CorrectionPolicy(policy)
        state = self.initial_state() if state is None else state
        tol = simulation_settings.normalization_tolerance
        for v, correction_edge in self.preparation_schedule():
            force = 0 if policy is CorrectionPolicy.POSTSELECT else None
            r, state = self.measure_vertex(state, v, force=force)
            if r == 0:
                continue
            state = apply_site_unitary(
                state, self.registry.edge_site(correction_edge), self.group.fourier_phase(r)
            )
            self.log.append(
                "correction",
                sites=[correction_edge.label],
                parameters={"power": r},
            )
            value = self.vertex_projector_expectation(state, v)
            if abs(value - 1.0) > tol:
                logger.warning("보정 실패 %s: <A(v)>=%.12f", vertex_label(v), value)
                raise CorrectionFailedError(
                    detail={"vertex": vertex_label(v), "outcome": r, "expectation": value}
                )
        self.log.append("prepare_ground_state", parameters={"policy": policy.value})
        return state

    def apply_vertex_projector(self, state: SparseState, v: Vertex) -> SparseState:
        """``A(v)ψ`` (정규화 없음)"""
        n = self.group.order
        return superpose(
            (1.0 / n, apply_operators(state, self._gauge_ops(v, g))) for g in range(n)
        )

    def ground_state_oracle(self, vertex_order: Sequence[Vertex] | None = None) -> SparseState:
        """``Π_v A(v)|e…e⟩`` 를 정규화한 독립 기준 상태"""
        limit = simulation_settings.oracle_max_edges
        if len(self.lattice.edges) > limit:
            raise ResourceLimitError(
                detail={"edges": len(self.lattice.edges), "limit": limit}
            )
        state = self.initial_state()
        for v in vertex_order or self.lattice.vertices:
            state = self.apply_vertex_projector(state, self.lattice.check_vertex(v))
        return normalize(state)

    # ------------------------------------------------------------------
    # Magnetic charges
    # ------------------------------------------------------------------

    def _aligned_base(self, f: FaceIndex, edge: Edge) -> Vertex:
        """``edge`` 가 f 순환의 마지막 단계가 되는 기준점"""
        sign = self.lattice.orientation_in(f, edge)
        return edge.dst if sign > 0 else edge.src

    def _class_of(self, rep: int | str) -> int:
        g = self._element(rep)
        if g == self.group.identity:
            raise ValidationError(
                "항등 켤레류로는 자기 전하를 만들 수 없습니다.",
                detail={"class": self.group.element_name(g)},
            )
        return self.group.class_index(g)

    def flux_to_ancilla(
        self,
        state: SparseState,
        v: Vertex,
        f: FaceIndex,
        *,
        inverse: bool = False,
        check: bool = True,
    ) -> SparseState:
        """``Λ(v,f) = Σ_g B_g(v,f) ⊗ L_g(f)``: 면 보조 큐디트에 플럭스를 왼쪽 곱합니다.

        간선 제어 왼쪽 곱을 순환의 역순으로 적용하므로 보조 값은 ``x₁x₂…x_k·a`` 가 됩니다.
        ``inverse`` 는 정순서로 역원을 곱해 ``Λ⁻¹`` 을 구현합니다.
        """
        v = self.lattice.check_vertex(v)
        anc = self.registry.face_site(self.lattice.face(f).index)
        if check and not inverse:
            self._require_identity(state, anc)
        cycle = self.lattice.face_cycle(f, v)
        group = self.group
        steps = cycle if inverse else tuple(reversed(cycle))
        for edge, sign in steps:
            def family(x: int, sign: int = sign) -> list[SiteOperator]:
                factor = x if sign > 0 else group.inv(x)
                if inverse:
                    factor = group.inv(factor)
                return [SiteOperator.left_mul(anc, factor, group)] if factor else []

            state = apply_group_controlled(state, self.registry.edge_site(edge), family)
        return state

    def create_magnetic_vacuum_pair(
        self,
        state: SparseState,
        class_rep: int | str,
        faces: tuple[FaceIndex, FaceIndex],
        *,
        force: int | None = None,
    ) -> SparseState:
        """``F_[ℓ]`` 로 공유 간선에 ``R_ℓ`` 중첩을 걸어 진공 자기 전하 쌍을 만듭니다.

        측정 결과 k ≠ 0 이면 플럭스가 정확히 ℓ 인 면에서 Λ 로 위상 ``Z_[ℓ]^k`` 를 되돌립니다.
        """
        cls = self._class_of(class_rep)
        f1, f2 = (self.lattice.face(f).index for f in faces)
        s = self.lattice.shared_edge(f1, f2)
        anc = self.registry.face_site(f1)
        self._require_identity(state, anc)

        members = self.group.class_members(cls)
        basis = self.group.class_basis(cls)
        state = apply_site_unitary(state, anc, basis.T)
        s_site = self.registry.edge_site(s)
        state = apply_group_controlled(
            state,
            anc,
            {a: [SiteOperator.right_mul(s_site, a, self.group)] for a in members},
        )
        result = self.measurer.measure(
            state, anc, basis, label=f"class {face_label(f1)}", force=force
        )
        k = result.outcome
        state = self._release(result.state, anc)

        if k:
            # 공유 간선이 정방향인 면: 기준점 s.dst 에서 플럭스 = ℓ
            aligned = f1 if self.lattice.orientation_in(f1, s) > 0 else f2
            base = self._aligned_base(aligned, s)
            state = self.flux_to_ancilla(state, base, aligned)
            state = apply_site_unitary(
                state, self.registry.face_site(aligned), self.group.class_phase(cls, k)
            )
            state = self.flux_to_ancilla(state, base, aligned, inverse=True)
            self._require_identity(state, self.registry.face_site(aligned))

        pair_id = self._new_pair()
        rep_name = self.group.element_name(members[0])
        for face in (f1, f2):
            self.records.append(
                AnyonRecord(AnyonKind.MAGNETIC, (face,), rep_name, pair_id)
            )
        self.log.append(
            "create_magnetic_vacuum_pair",
            sites=[face_label(f1), face_label(f2), s.label],
            parameters={"class": rep_name},
            outcome=k,
            probability=result.probability,
        )
        logger.info("자기 전하 쌍 생성 [%s] %s-%s (k=%d)", rep_name, f1, f2, k)
        return state

    def transport_magnetic(self, state: SparseState, f: FaceIndex, f_next: FaceIndex) -> SparseState:
        """면 f 의 플럭스를 인접 면 f_next 로 옮기고 두 면 보조 큐디트를 분리합니다."""
        f, f_next = self.lattice.face(f).index, self.lattice.face(f_next).index
        s = self.lattice.shared_edge(f, f_next)
        base = self._aligned_base(f, s)
        anc, anc_next = self.registry.face_site(f), self.registry.face_site(f_next)
        s_site = self.registry.edge_site(s)
        group = self.group
        aligned = self.lattice.orientation_in(f, s) > 0

        state = self.flux_to_ancilla(state, base, f)

        def move(a: int) -> list[SiteOperator]:
            if a == group.identity:
                return []
            if aligned:
                return [SiteOperator.right_mul(s_site, group.inv(a), group)]
            return [SiteOperator.left_mul(s_site, a, group)]

        state = apply_group_controlled(state, anc, move)
        state = self.flux_to_ancilla(state, base, f_next)
        state = apply_group_controlled(
            state,
            anc_next,
            lambda a: [SiteOperator.left_mul(anc, group.inv(a), group)] if a else [],
        )
        state = self.flux_to_ancilla(state, base, f_next, inverse=True)

        for site in (anc, anc_next):
            distribution = site_value_distribution(state, site)
            if distribution[0] < 1.0 - simulation_settings.purity_tolerance:
                logger.warning("면 보조 큐디트 분리 실패: %s", self.registry.labels[site])
                raise AncillaStateError(
                    "이동 후 면 보조 큐디트가 분리되지 않았습니다.",
                    detail={"site": self.registry.labels[site], "p_identity": float(distribution[0])},
                )

        self.records = [
            AnyonRecord(r.kind, (f_next,), r.label, r.pair_id)
            if r.kind is AnyonKind.MAGNETIC and r.location == (f,)
            else r
            for r in self.records
        ]
        self.log.append(
            "transport_magnetic",
            sites=[face_label(f), face_label(f_next), s.label],
        )
        return state

    def fuse_magnetic(
        self,
        state: SparseState,
        faces: tuple[FaceIndex, FaceIndex],
        class_rep: int | str | None = None,
    ) -> FusionDistribution:
        """인접한 두 면의 자기 전하가 진공으로 융합할 확률 (상태는 변경하지 않음).

        f 의 플럭스를 보조 큐디트로 옮기고 공유 간선으로 f' 에 합친 뒤,
        보조 큐디트가 ``|0_[ℓ]⟩`` 이고 f' 플럭스가 e 일 확률을 계산합니다.
        """
        f, f_other = (self.lattice.face(x).index for x in faces)
        s = self.lattice.shared_edge(f, f_other)
        if class_rep is None:
            class_rep = self._recorded_class(f, f_other)
        group = self.group
        aligned = self.lattice.orientation_in(f, s) > 0
        rep = self._element(class_rep)
        cls = self._class_of(rep if aligned else group.inv(rep))
        base = self._aligned_base(f, s)
        anc = self.registry.face_site(f)
        s_site = self.registry.edge_site(s)

        work = self.flux_to_ancilla(state, base, f)
        work = apply_group_controlled(
            work,
            anc,
            lambda a: []
            if a == group.identity
            else [
                SiteOperator.right_mul(s_site, group.inv(a), group)
                if aligned
                else SiteOperator.left_mul(s_site, a, group)
            ],
        )
        vacuum_vec = group.class_state(cls, 0)
        projector = SiteOperator.matrix(anc, np.outer(vacuum_vec, vacuum_vec.conj()), "P_0")
        projected = apply_operators(work, [projector, self.flux_projector(f_other, group.identity)])
        vacuum = float(min(max(projected.norm() ** 2, 0.0), 1.0))
        distribution = FusionDistribution({"vacuum": vacuum, "non-vacuum": 1.0 - vacuum})
        self.log.append(
            "fuse_magnetic",
            sites=[face_label(f), face_label(f_other)],
            parameters={"class": group.element_name(rep)},
            values={"channels": dict(distribution.channels)},
        )
        return distribution

    def _recorded_class(self, f: FaceIndex, g: FaceIndex) -> str:
        for r in self.records:
            if r.kind is AnyonKind.MAGNETIC and r.location in ((f,), (g,)):
                return r.label
        raise ValidationError(
            "해당 면에 자기 전하 기록이 없습니다.",
            detail={"faces": [face_label(f), face_label(g)]},
        )

    def _new_pair(self) -> int:
        self._next_pair += 1
        return self._next_pair

    # ------------------------------------------------------------------
    # Electric charges
    # ------------------------------------------------------------------

    def _path_factor(self, v: Vertex, edge: Edge, x: int) -> int:
        """꼭짓점 v 에서 본 간선 값 (나가는 간선이면 x, 들어오는 간선이면 x⁻¹)"""
        direction = self.lattice.direction(v, edge)
        return x if direction is Direction.OUTGOING else self.group.inv(x)

    def conditional_rotation_K(
        self, state: SparseState, v: Vertex, edge: Edge, *, inverse: bool = False
    ) -> SparseState:
        """``K(v,e) = Σ_g |g⟩_e⟨g| ⊗ R_{g^±1}(v)``: 꼭짓점 보조 큐디트에 간선 값을 오른쪽 곱."""
        v = self.lattice.check_vertex(v)
        self.lattice.direction(v, edge)
        anc = self.registry.vertex_site(v)
        group = self.group

        def family(x: int) -> list[SiteOperator]:
            factor = self._path_factor(v, edge, x)
            if inverse:
                factor = group.inv(factor)
            return [SiteOperator.right_mul(anc, factor, group)] if factor else []

        return apply_group_controlled(state, self.registry.edge_site(edge), family)

    def _check_path(self, path: Sequence[Vertex]) -> list[Vertex]:
        vertices = [self.lattice.check_vertex(v) for v in path]
        if len(vertices) < 2:
            raise ValidationError(
                "꼭짓점 경로는 두 개 이상의 꼭짓점이 필요합니다.",
                detail={"path": [list(v) for v in vertices]},
            )
        self.lattice.vertex_path_edges(vertices)
        return vertices

    def _hop(self, state: SparseState, a: Vertex, b: Vertex, edge: Edge) -> SparseState:
        """꼭짓점 보조 값을 a → b 로 옮깁니다 (간선 큐디트를 거치는 세 번의 교환)."""
        site_a, site_b = self.registry.vertex_site(a), self.registry.vertex_site(b)
        site_e = self.registry.edge_site(edge)
        state = swap_sites(state, site_a, site_e)
        state = swap_sites(state, site_e, site_b)
        return swap_sites(state, site_a, site_e)

    def _holonomy_weight(
        self, state: SparseState, path: Sequence[Vertex], weights: np.ndarray
    ) -> tuple[SparseState, float]:
        """경로 홀로노미를 보조 큐디트로 모아 ``diag(weights)`` 를 걸고 되돌립니다."""
        edges = self.lattice.vertex_path_edges(path)
        self._require_identity(state, self.registry.vertex_site(path[0]))
        for a, b, edge in zip(path, path[1:], edges):
            state = self.conditional_rotation_K(state, a, edge)
            state = self._hop(state, a, b, edge)
        anc = self.registry.vertex_site(path[-1])
        state, survival = apply_linear(
            state, SiteOperator.diagonal((anc,), lambda v: complex(weights[v[0]]), "W_R")
        )
        for a, b, edge in reversed(list(zip(path, path[1:], edges))):
            state = self._hop(state, b, a, edge)
            state = self.conditional_rotation_K(state, a, edge, inverse=True)
        self._require_identity(state, self.registry.vertex_site(path[0]))
        return state, survival

    def create_electric_vacuum_pair(
        self, state: SparseState, irrep: str, path: Sequence[Vertex]
    ) -> tuple[SparseState, float]:
        """꼭짓점 경로 양 끝에 전기 전하 쌍 ``|1^R; (v, v')⟩`` 을 만듭니다.

        경로 홀로노미 P 를 보조 큐디트에 모은 뒤 ``W_R = diag(χ_R(g))/|R|`` 를
        사후 선택 선형 연산으로 적용하고 생존 확률을 돌려줍니다.
        """
        rep = self.group.irrep(irrep)
        path = self._check_path(path)
        weights = np.array([rep.character(g) for g in range(self.group.order)]) / rep.dim
        state, survival = self._holonomy_weight(state, path, weights)

        pair_id = self._new_pair()
        if path[0] != path[-1]:
            for v in (path[0], path[-1]):
                self.records.append(AnyonRecord(AnyonKind.ELECTRIC, (v,), rep.label, pair_id))
        self.log.append(
            "create_electric_vacuum_pair",
            sites=[vertex_label(v) for v in path],
            parameters={"irrep": rep.label},
            probability=survival,
        )
        logger.info("전기 전하 쌍 생성 [%s] 생존 확률=%.6f", rep.label, survival)
        return state, survival

    def _charge_distribution(self, state: SparseState, vertices: Sequence[Vertex]) -> FusionDistribution:
        """``|0̃⟩`` 보조 + 제어 ``Π_w T_g(w)`` 후 지표 기저 측정 분포 (비파괴)"""
        anc = self.registry.vertex_site(vertices[0])
        self._require_identity(state, anc)
        group = self.group
        work = apply_site_unitary(state, anc, group.fourier_basis().T)
        work = apply_group_controlled(
            work,
            anc,
            lambda g: [op for w in vertices for op in self._gauge_ops(w, g)] if g else [],
        )
        probs = measurement_distribution(work, anc, group.character_basis())
        probs = probs / probs.sum()
        channels = {
            rep.label: float(probs[k]) for k, rep in enumerate(group.irreps) if rep.dim == 1
        }
        rest = 1.0 - sum(channels.values())
        if len(channels) < group.order:
            channels["remainder"] = max(rest, 0.0)
        return FusionDistribution(channels, vacuum_channel=group.irreps[0].label)

    def _check_electric_records(self, endpoints: Sequence[Vertex]) -> None:
        electric = [r for r in self.records if r.kind is AnyonKind.ELECTRIC]
        if electric and not any(r.location[0] in endpoints for r in electric):
            raise ValidationError(
                "경로 끝점에 전기 전하 기록이 없습니다.",
                detail={"endpoints": [vertex_label(v) for v in endpoints]},
            )

    def fuse_electric(self, state: SparseState, path: Sequence[Vertex]) -> FusionDistribution:
        """경로 끝점 전하의 융합 채널 분포 (1차원 기약표현 채널 + 나머지)"""
        path = self._check_path(path)
        self._check_electric_records((path[0], path[-1]))
        distribution = self._charge_distribution(state, [path[0]])
        self.log.append(
            "fuse_electric",
            sites=[vertex_label(v) for v in path],
            values={"channels": dict(distribution.channels)},
        )
        return distribution

    def fuse_electric_pair(self, state: SparseState, path: Sequence[Vertex]) -> FusionDistribution:
        """경로 위 모든 꼭짓점의 총 전하 분포. 자명 표현 채널이 진공 융합 확률입니다."""
        path = self._check_path(path)
        self._check_electric_records((path[0], path[-1]))
        vertices = list(dict.fromkeys(path))
        distribution = self._charge_distribution(state, vertices)
        self.log.append(
            "fuse_electric_pair",
            sites=[vertex_label(v) for v in vertices],
            values={"channels": dict(distribution.channels)},
        )
        return distribution

    # ------------------------------------------------------------------
    # Braiding and interference
    # ------------------------------------------------------------------

    def braid_flux_around_vertex(self, state: SparseState, h: int | str, v: Vertex) -> SparseState:
        """자속 쌍 (h, h⁻¹) 을 v 둘레로 감았다가 소멸시키는 과정.

        쌍을 만들고 v 를 둘러싼 네 면을 따라 옮긴 뒤 다시 융합하는 회로는 게이지 불변 상태 위에서
        꼭짓점 게이지 변환 ``T_h(v)`` 와 같은 작용을 합니다. 여기서는 그 동치를 써서 ``T_h(v)`` 를
        직접 적용하며, 간선 경로 회로는 만들지 않습니다.
        """
        v = self.lattice.check_vertex(v)
        h = self._element(h)
        self.log.append(
            "braid_flux_around_vertex",
            sites=[vertex_label(v)],
            parameters={"h": self.group.element_name(h)},
        )
        return apply_operators(state, self._gauge_ops(v, h))

    def braid_electric_charge(
        self, state: SparseState, irrep: str, loop: Sequence[Vertex]
    ) -> SparseState:
        """전기 전하를 닫힌 꼭짓점 고리를 따라 한 바퀴 돌립니다."""
        loop = self._check_path(loop)
        if loop[0] != loop[-1]:
            raise ValidationError(
                "브레이딩 고리는 시작과 끝이 같아야 합니다.",
                detail={"loop": [vertex_label(v) for v in loop]},
            )
        rep = self.group.irrep(irrep)
        weights = np.array([rep.character(g) for g in range(self.group.order)]) / rep.dim
        state, survival = self._holonomy_weight(state, loop, weights)
        self.log.append(
            "braid_electric_charge",
            sites=[vertex_label(v) for v in loop],
            parameters={"irrep": rep.label},
            probability=survival,
        )
        return state

    def single_face_interference(
        self, state: SparseState, h: int | str, v: Vertex
    ) -> InterferenceResult:
        """꼭짓점 보조 큐디트 ``|h⁺⟩`` 로 제어 ``T_h(v)`` 를 건 간섭 실험.

        ``contrast`` 는 ``{|h±⟩}`` 측정의 ``P(+) - P(-)`` 로 보고하는 값으로, ``|h⟩`` 가지의
        쌍 ``R(h)`` 가 원래 쌍(융합 기준)으로 돌아갈 확률 ``|⟨ψ|T_h(v)ψ⟩|²`` 입니다.
        R 전하 쌍 위에서 ``|χ_R(h)|²/|R|²`` (R₂: e → 1, 3-순환 → 1/4, 호환 → 0).
        ``overlap_real``/``overlap_imag`` 는 같은 회로의 두 기저 대비로 읽은 ``⟨ψ|T_h(v)|ψ⟩`` 입니다.
        """
        v = self.lattice.check_vertex(v)
        g = self._element(h)
        name = self.group.element_name(g)
        if g == self.group.identity:
            z = complex(inner_product(state, state))
            contrast = 1.0
        else:
            anc = self.registry.vertex_site(v)
            self._require_identity(state, anc)
            e_vec, h_vec = self._unit_vector(0), self._unit_vector(g)
            plus = (e_vec + h_vec) / np.sqrt(2)
            work = apply_site_unitary(state, anc, self._preparation(plus))
            gauge = self._gauge_ops(v, g)
            work = apply_group_controlled(work, anc, lambda x: gauge if x == g else [])
            order = self.group.order
            real_basis = complete_orthonormal_basis([plus, (e_vec - h_vec) / np.sqrt(2)], order)
            imag_basis = complete_orthonormal_basis(
                [(e_vec + 1j * h_vec) / np.sqrt(2), (e_vec - 1j * h_vec) / np.sqrt(2)], order
            )
            p_real = measurement_distribution(work, anc, real_basis)
            p_imag = measurement_distribution(work, anc, imag_basis)
            z = complex(p_real[0] - p_real[1], p_imag[1] - p_imag[0])

            # |h⟩ 가지를 융합 기준 쌍(보조 |h⟩ ⊗ ψ)에 사영
            branch = normalize(
                apply_operators(work, [SiteOperator.matrix(anc, np.outer(h_vec, h_vec), "P_h")])
            )
            reference = apply_left_mul(state, anc, g, self.group)
            contrast = float(min(abs(inner_product(reference, branch)) ** 2, 1.0))
        result = InterferenceResult(
            element=name,
            contrast=contrast,
            overlap_real=float(z.real),
            overlap_imag=float(z.imag),
        )
        self.log.append(
            "single_face_interference",
            sites=[vertex_label(v)],
            parameters={"h": name},
            values={
                "contrast": result.contrast,
                "overlap_real": result.overlap_real,
                "overlap_imag": result.overlap_imag,
            },
        )
        return result
