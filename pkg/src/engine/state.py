"""희소 상태벡터 엔진.

모든 코드/보조 큐디트의 결합 상태를 ``구성 키 → 복소 진폭`` 사전으로 표현합니다.
상태는 값 객체처럼 다룹니다: 모든 연산은 새 :class:`SparseState` 를 반환하며
입력 상태는 변경하지 않습니다.

* 곱 상태 초기화, 단일 사이트 유니터리, 군 왼쪽/오른쪽 곱
* 군 제어 연산 (제어 사이트 값에 따라 분기 연산 선택)
* 비유니터리 선형 연산 + 재정규화 (생존 확률 보고)
* 샘플링/분기 모드 사영 측정

프로토콜 진폭은 모두 ``±1/√정수`` 규모이므로 ``prune_epsilon`` 가지치기는
수치 먼지만 제거합니다.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from config.simulation import simulation_settings
from src.exceptions import (
    AncillaStateError,
    LatticeError,
    ValidationError,
    ZeroProbabilityError,
)
from src.group.core import FiniteGroup
from src.lattice.registry import SiteRegistry

Kernel = Callable[[tuple[int, ...]], Iterable[tuple[tuple[int, ...], complex]]]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SparseState:
    """희소 상태. ``amplitudes`` 는 읽기 전용으로 취급합니다."""

    registry: SiteRegistry
    amplitudes: Mapping[int, complex]
    prune_epsilon: float = field(default_factory=lambda: simulation_settings.prune_epsilon)

    def with_amplitudes(self, amplitudes: Mapping[int, complex]) -> SparseState:
        return SparseState(self.registry, amplitudes, self.prune_epsilon)

    @property
    def support_size(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def copy(self) -> SparseState:
        return self.with_amplitudes(dict(self.amplitudes))


@dataclass(frozen=True, slots=True)
class SiteOperator:
    """국소 연산자: ``kernel(입력 값) → [(출력 값, 계수), ...]``."""

    sites: tuple[int, ...]
    kernel: Kernel
    label: str = ""

    @classmethod
    def permutation(cls, site: int, table: Sequence[int], label: str = "") -> SiteOperator:
        mapping = tuple(int(x) for x in table)
        return cls((site,), lambda v: (((mapping[v[0]],), 1.0),), label)

    @classmethod
    def matrix(cls, site: int, matrix: np.ndarray, label: str = "") -> SiteOperator:
        m = np.asarray(matrix, dtype=complex)
        columns = [
            tuple(((y,), complex(m[y, x])) for y in range(m.shape[0]) if m[y, x] != 0)
            for x in range(m.shape[1])
        ]
        return cls((site,), lambda v: columns[v[0]], label)

    @classmethod
    def diagonal(
        cls, sites: Sequence[int], phase: Callable[[tuple[int, ...]], complex], label: str = ""
    ) -> SiteOperator:
        return cls(tuple(sites), lambda v: ((v, phase(v)),), label)

    @classmethod
    def left_mul(cls, site: int, h: int, group: FiniteGroup) -> SiteOperator:
        """``L_h|g⟩ = |hg⟩``"""
        return cls.permutation(site, [group.mul(h, g) for g in range(group.order)], f"L_{h}")

    @classmethod
    def right_mul(cls, site: int, h: int, group: FiniteGroup) -> SiteOperator:
        """``R_h|g⟩ = |gh⟩``"""
        return cls.permutation(site, [group.mul(g, h) for g in range(group.order)], f"R_{h}")


@dataclass(frozen=True, slots=True)
class SampleMode:
    """Born 규칙 샘플링 (시드 고정 생성기)"""

    rng: np.random.Generator


@dataclass(frozen=True, slots=True)
class BranchMode:
    """지정 결과 분기 선택 (정확한 확률)"""

    outcome: int


MeasureMode = SampleMode | BranchMode


@dataclass(frozen=True, slots=True)
class MeasurementOutcome:
    outcome: int
    probability: float
    state: SparseState
    distribution: tuple[float, ...] = ()


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def product_state(
    registry: SiteRegistry,
    assignment: Mapping[int | str, int],
    *,
    default: int | None = None,
    prune_epsilon: float | None = None,
) -> SparseState:
    """계산 기저 곱 상태. ``default`` 가 없으면 모든 사이트를 지정해야 합니다."""
    values: dict[int, int] = {}
    for site, value in assignment.items():
        index = registry.site(site) if isinstance(site, str) else registry.check_site(site)
        values[index] = int(value)
    missing = [registry.labels[s] for s in range(registry.size) if s not in values]
    if missing and default is None:
        raise ValidationError(
            "곱 상태 지정에서 누락된 사이트가 있습니다.",
            detail={"missing": missing[:10], "count": len(missing)},
        )
    key = registry.pack([values.get(s, default or 0) for s in range(registry.size)])
    eps = simulation_settings.prune_epsilon if prune_epsilon is None else prune_epsilon
    return SparseState(registry, {key: 1.0 + 0.0j}, eps)


# ---------------------------------------------------------------------------
# Core application
# ---------------------------------------------------------------------------


def _compact(amplitudes: Mapping[int, complex], eps: float) -> dict[int, complex]:
    return {k: a for k, a in amplitudes.items() if abs(a) >= eps}


def _apply_raw(
    registry: SiteRegistry, amplitudes: Mapping[int, complex], op: SiteOperator
) -> dict[int, complex]:
    out: defaultdict[int, complex] = defaultdict(complex)
    sites = op.sites
    for key, amp in amplitudes.items():
        local = tuple(registry.value(key, s) for s in sites)
        base = registry.clear(key, sites)
        for new_local, coeff in op.kernel(local):
            out[registry.assign(base, sites, new_local)] += amp * coeff
    return out


def apply_operator(state: SparseState, op: SiteOperator) -> SparseState:
    """국소 연산자를 정규화 없이 적용합니다."""
    for s in op.sites:
        state.registry.check_site(s)
    out = _apply_raw(state.registry, state.amplitudes, op)
    return state.with_amplitudes(_compact(out, state.prune_epsilon))


def apply_operators(state: SparseState, ops: Iterable[SiteOperator]) -> SparseState:
    for op in ops:
        state = apply_operator(state, op)
    return state


def apply_left_mul(state: SparseState, site: int, h: int, group: FiniteGroup) -> SparseState:
    return apply_operator(state, SiteOperator.left_mul(site, group.resolve(h), group))


def apply_right_mul(state: SparseState, site: int, h: int, group: FiniteGroup) -> SparseState:
    return apply_operator(state, SiteOperator.right_mul(site, group.resolve(h), group))


def check_unitary(matrix: np.ndarray, tolerance: float | None = None) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    tol = simulation_settings.unitarity_tolerance if tolerance is None else tolerance
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("정방 행렬이 아닙니다.", detail={"shape": list(m.shape)})
    deviation = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
    if deviation > tol:
        raise ValidationError(
            "유니터리 행렬이 아닙니다.",
            detail={"deviation": deviation, "tolerance": tol},
        )
    return m


def apply_site_unitary(state: SparseState, site: int, unitary: np.ndarray) -> SparseState:
    """검사된 유니터리를 한 사이트에 적용합니다."""
    m = check_unitary(unitary)
    _check_dim(state, site, m.shape[0])
    return apply_operator(state, SiteOperator.matrix(site, m, "U"))


def apply_site_matrix(state: SparseState, site: int, matrix: np.ndarray) -> SparseState:
    """검사 없이 d×d 행렬을 적용합니다 (정규화 없음)."""
    m = np.asarray(matrix, dtype=complex)
    _check_dim(state, site, m.shape[0])
    return apply_operator(state, SiteOperator.matrix(site, m, "M"))


def _check_dim(state: SparseState, site: int, dim: int) -> None:
    state.registry.check_site(site)
    if state.registry.dims[site] != dim:
        raise ValidationError(
            "행렬 차원이 사이트 차원과 다릅니다.",
            detail={"site": state.registry.labels[site], "dim": state.registry.dims[site], "matrix": dim},
        )


def apply_group_controlled(
    state: SparseState,
    control: int,
    family: Mapping[int, Sequence[SiteOperator]] | Callable[[int], Sequence[SiteOperator]],
) -> SparseState:
    """``Σ_h |h⟩⟨h|_control ⊗ family(h)``.

    상태를 제어 사이트 값으로 분할해 각 분기 연산열을 적용한 뒤 합칩니다.
    """
    registry = state.registry
    registry.check_site(control)
    lookup = family.get if isinstance(family, Mapping) else family

    partitions: defaultdict[int, dict[int, complex]] = defaultdict(dict)
    for key, amp in state.amplitudes.items():
        partitions[registry.value(key, control)][key] = amp

    out: defaultdict[int, complex] = defaultdict(complex)
    for value in sorted(partitions):
        part: Mapping[int, complex] = partitions[value]
        ops = lookup(value) or ()
        for op in ops:
            if control in op.sites:
                raise ValidationError(
                    "제어 사이트가 대상 연산에 포함되어 있습니다.",
                    detail={"control": registry.labels[control], "operation": op.label},
                )
            part = _apply_raw(registry, part, op)
        for key, amp in part.items():
            out[key] += amp
    return state.with_amplitudes(_compact(out, state.prune_epsilon))


def apply_linear(
    state: SparseState, ops: SiteOperator | Sequence[SiteOperator]
) -> tuple[SparseState, float]:
    """(비유니터리) 선형 연산 후 재정규화. ``(상태, 생존 확률)`` 을 반환합니다."""
    ops = (ops,) if isinstance(ops, SiteOperator) else tuple(ops)
    new = apply_operators(state, ops)
    survival = sum(abs(a) ** 2 for a in new.amplitudes.values())
    if survival < simulation_settings.probability_floor:
        raise ZeroProbabilityError(
            "연산자가 상태를 소멸시켰습니다.",
            detail={"operations": [op.label for op in ops], "survival": survival},
        )
    scale = 1.0 / np.sqrt(survival)
    return new.with_amplitudes({k: a * scale for k, a in new.amplitudes.items()}), float(survival)


# ---------------------------------------------------------------------------
# Measurement
# ---------------------------------------------------------------------------


def check_basis(basis: np.ndarray, dim: int, tolerance: float | None = None) -> np.ndarray:
    """행 단위 정규직교 기저 검사"""
    b = np.asarray(basis, dtype=complex)
    tol = simulation_settings.unitarity_tolerance if tolerance is None else tolerance
    if b.shape != (dim, dim):
        raise ValidationError(
            "측정 기저는 d개의 d차원 벡터여야 합니다.",
            detail={"shape": list(b.shape), "dim": dim},
        )
    deviation = float(np.max(np.abs(b @ b.conj().T - np.eye(dim))))
    if deviation > tol:
        raise ValidationError(
            "측정 기저가 정규직교가 아닙니다.",
            detail={"deviation": deviation, "tolerance": tol},
        )
    return b


def _split(state: SparseState, site: int) -> dict[int, np.ndarray]:
    """나머지 구성(사이트 값 0 으로 비운 키) → 사이트 진폭 벡터"""
    registry = state.registry
    dim = registry.dims[site]
    groups: dict[int, np.ndarray] = {}
    for key, amp in state.amplitudes.items():
        rest = registry.clear(key, (site,))
        vec = groups.get(rest)
        if vec is None:
            vec = groups[rest] = np.zeros(dim, dtype=complex)
        vec[registry.value(key, site)] += amp
    return groups


def measurement_distribution(state: SparseState, site: int, basis: np.ndarray) -> np.ndarray:
    """붕괴 없이 각 결과의 정확한 확률"""
    state.registry.check_site(site)
    b = check_basis(basis, state.registry.dims[site])
    probs = np.zeros(b.shape[0])
    for vec in _split(state, site).values():
        probs += np.abs(b.conj() @ vec) ** 2
    total = probs.sum()
    return probs / total if total > 0 else probs


def measure(
    state: SparseState, site: int, basis: np.ndarray, mode: MeasureMode
) -> MeasurementOutcome:
    """사이트를 행 단위 정규직교 ``basis`` 로 사영 측정합니다."""
    registry = state.registry
    registry.check_site(site)
    b = check_basis(basis, registry.dims[site])
    groups = _split(state, site)

    projections = {rest: b.conj() @ vec for rest, vec in groups.items()}
    probs = np.zeros(b.shape[0])
    for coeffs in projections.values():
        probs += np.abs(coeffs) ** 2
    total = probs.sum()
    if total <= 0:
        raise ZeroProbabilityError("빈 상태는 측정할 수 없습니다.")
    probs = probs / total

    if isinstance(mode, SampleMode):
        cumulative = np.cumsum(probs)
        u = mode.rng.random() * cumulative[-1]
        outcome = int(min(np.searchsorted(cumulative, u, side="right"), len(probs) - 1))
    else:
        outcome = int(mode.outcome)
        if not 0 <= outcome < len(probs):
            raise ValidationError(
                f"측정 결과 인덱스 범위를 벗어났습니다: {outcome}",
                detail={"outcome": outcome, "n_outcomes": len(probs)},
            )
    probability = float(probs[outcome])
    if probability < simulation_settings.probability_floor:
        raise ZeroProbabilityError(
            f"측정 결과 {outcome} 의 확률이 0입니다.",
            detail={"site": registry.labels[site], "outcome": outcome, "probability": probability},
        )

    scale = 1.0 / np.sqrt(probability * total)
    target = b[outcome]
    out: dict[int, complex] = {}
    for rest, coeffs in projections.items():
        c = coeffs[outcome]
        if abs(c) < state.prune_epsilon:
            continue
        for y in np.flatnonzero(np.abs(target) > 0):
            amp = c * target[y] * scale
            if abs(amp) >= state.prune_epsilon:
                out[registry.assign(rest, (site,), (int(y),))] = complex(amp)
    return MeasurementOutcome(
        outcome=outcome,
        probability=probability,
        state=state.with_amplitudes(out),
        distribution=tuple(float(p) for p in probs),
    )


# ---------------------------------------------------------------------------
# Inspection
# ---------------------------------------------------------------------------


def _check_layout(a: SparseState, b: SparseState) -> None:
    if not a.registry.same_layout(b.registry):
        raise ValidationError("두 상태의 사이트 배치가 다릅니다.")


def inner_product(a: SparseState, b: SparseState) -> complex:
    """``⟨a|b⟩``"""
    _check_layout(a, b)
    left, right = a.amplitudes, b.amplitudes
    if len(left) <= len(right):
        return complex(sum(np.conj(v) * right[k] for k, v in left.items() if k in right))
    return complex(sum(np.conj(left[k]) * v for k, v in right.items() if k in left))


def overlap_magnitude(a: SparseState, b: SparseState) -> float:
    return abs(inner_product(a, b))


def expectation(state: SparseState, ops: SiteOperator | Sequence[SiteOperator]) -> complex:
    """``⟨ψ|O|ψ⟩`` (O 는 연산자 곱, 오른쪽부터가 아닌 나열 순서로 적용)"""
    ops = (ops,) if isinstance(ops, SiteOperator) else tuple(ops)
    return inner_product(state, apply_operators(state, ops))


def projector_expectation(state: SparseState, projector: SiteOperator | Sequence[SiteOperator]) -> float:
    """사영 연산자 기댓값 ``⟨ψ|P|ψ⟩ ∈ [0, 1]``"""
    value = expectation(state, projector).real
    return float(min(max(value, 0.0), 1.0))


def prune(state: SparseState, epsilon: float | None = None) -> SparseState:
    """``epsilon`` 미만 진폭 제거 후 재정규화"""
    eps = state.prune_epsilon if epsilon is None else epsilon
    kept = {k: a for k, a in state.amplitudes.items() if abs(a) >= eps}
    norm = np.sqrt(sum(abs(a) ** 2 for a in kept.values()))
    if norm == 0:
        raise ZeroProbabilityError("가지치기 후 상태가 비었습니다.")
    return state.with_amplitudes({k: a / norm for k, a in kept.items()})


def normalize(state: SparseState) -> SparseState:
    return prune(state, 0.0)


def swap_sites(state: SparseState, a: int, b: int) -> SparseState:
    registry = state.registry
    registry.check_site(a)
    registry.check_site(b)
    if registry.dims[a] != registry.dims[b]:
        raise ValidationError(
            "차원이 다른 사이트는 교환할 수 없습니다.",
            detail={"a": registry.labels[a], "b": registry.labels[b]},
        )
    if a == b:
        return state
    op = SiteOperator((a, b), lambda v: (((v[1], v[0]), 1.0),), "SWAP")
    return apply_operator(state, op)


def reduced_density_matrix(state: SparseState, site: int) -> np.ndarray:
    state.registry.check_site(site)
    dim = state.registry.dims[site]
    rho = np.zeros((dim, dim), dtype=complex)
    for vec in _split(state, site).values():
        rho += np.outer(vec, vec.conj())
    trace = np.trace(rho).real
    return rho / trace if trace > 0 else rho


def site_purity(state: SparseState, site: int) -> float:
    rho = reduced_density_matrix(state, site)
    return float(np.real(np.trace(rho @ rho)))


def reset_site(
    state: SparseState, site: int, vector: np.ndarray, tolerance: float | None = None
) -> SparseState:
    """분리된(순수) 사이트를 ``vector`` 상태로 재준비합니다."""
    tol = simulation_settings.purity_tolerance if tolerance is None else tolerance
    rho = reduced_density_matrix(state, site)
    purity = float(np.real(np.trace(rho @ rho)))
    if purity < 1.0 - tol:
        raise AncillaStateError(
            f"사이트 {state.registry.labels[site]} 가 다른 사이트와 얽혀 있습니다.",
            detail={"site": state.registry.labels[site], "purity": purity},
        )
    eigvals, eigvecs = np.linalg.eigh(rho)
    phi = eigvecs[:, int(np.argmax(eigvals))]
    # 고유벡터 위상 고정: 가장 큰 성분을 양의 실수로
    phi = phi * np.exp(-1j * np.angle(phi[int(np.argmax(np.abs(phi)))]))
    target = np.asarray(vector, dtype=complex)
    registry = state.registry
    out: defaultdict[int, complex] = defaultdict(complex)
    for rest, vec in _split(state, site).items():
        chi = np.vdot(phi, vec)
        for y in np.flatnonzero(np.abs(target) > 0):
            out[registry.assign(rest, (site,), (int(y),))] += chi * target[y]
    return normalize(state.with_amplitudes(_compact(out, state.prune_epsilon)))


def site_value_distribution(state: SparseState, site: int) -> np.ndarray:
    """계산 기저에서 사이트 값 분포"""
    return np.real(np.diag(reduced_density_matrix(state, site)))


def dump_state(state: SparseState) -> str:
    """``site-values : re : im`` 한 줄씩, 구성 키 오름차순"""
    lines = []
    for key in sorted(state.amplitudes):
        amp = state.amplitudes[key]
        values = ",".join(str(v) for v in state.registry.values(key))
        lines.append(f"{values} : {_fmt(amp.real)} : {_fmt(amp.imag)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _fmt(x: float) -> str:
    x = round(float(x), 12)
    return f"{0.0 if x == 0 else x:.12g}"


def site_index(state: SparseState, site: int | str) -> int:
    registry = state.registry
    if isinstance(site, str):
        return registry.site(site)
    if not isinstance(site, (int, np.integer)):
        raise LatticeError(f"사이트 지정이 유효하지 않습니다: {site!r}")
    return registry.check_site(int(site))


def superpose(terms: Iterable[tuple[complex, SparseState]]) -> SparseState:
    """``Σ c_k |ψ_k⟩`` (정규화 없음, 같은 배치 필요)"""
    terms = list(terms)
    if not terms:
        raise ValidationError("중첩할 상태가 없습니다.")
    first = terms[0][1]
    out: defaultdict[int, complex] = defaultdict(complex)
    for coeff, state in terms:
        _check_layout(first, state)
        for key, amp in state.amplitudes.items():
            out[key] += coeff * amp
    return first.with_amplitudes(_compact(out, first.prune_epsilon))


def site_amplitudes(state: SparseState, sites: Sequence[int]) -> dict[tuple[int, ...], complex]:
    """나머지 사이트가 모두 0 일 때 ``sites`` 값 튜플 → 진폭"""
    registry = state.registry
    sites = tuple(sites)
    others = [s for s in range(registry.size) if s not in set(sites)]
    out: dict[tuple[int, ...], complex] = {}
    for key, amp in state.amplitudes.items():
        if any(registry.value(key, s) for s in others):
            raise ValidationError(
                "지정 사이트 밖에 0 이 아닌 값이 있습니다.",
                detail={"sites": [registry.labels[s] for s in others if registry.value(key, s)]},
            )
        out[tuple(registry.value(key, s) for s in sites)] = complex(amp)
    return out
