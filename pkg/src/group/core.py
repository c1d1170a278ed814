"""유한군 연산 및 표현론.

모든 프로토콜이 공유하는 군 곱셈, 역원, 켤레류, 기약표현 행렬, 지표,
Fourier(틸드) 기저를 제공합니다.

규약
----
* 원소 순서: S₃ 는 ``e, c+, c-, t0, t1, t2`` (인덱스 0..5), ℤ₂ 는 ``e, g1``.
  인덱스 0 은 항상 항등원입니다.
* 합성 규약: ``(g·h)(x) = g(h(x))`` (오른쪽 인수를 먼저 적용).
  ``c+ : 0→1→2→0``, ``t_k`` 는 점 k 를 고정하는 호환입니다.
* R₂ 행렬: ``R₂(t_k) = σˣ·diag(ω^k, ω^-k)``, ``R₂(c±) = diag(ω^±1, ω^∓1)``,
  ``ω = e^{2πi/3}``.
* 기약표현은 생성원이 아닌 원소별 행렬 테이블로 저장합니다.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from src.exceptions import GroupError

# 정규직교/준동형 판정 허용오차
_TOL = 1e-12


@dataclass(frozen=True, slots=True, eq=False)
class Irrep:
    """기약표현 (원소별 |R|×|R| 유니터리 행렬)."""

    label: str
    dim: int
    matrices: tuple[np.ndarray, ...]

    def matrix(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def character(self, g: int) -> complex:
        return complex(np.trace(self.matrices[g]))


@dataclass(slots=True)
class GroupValidationReport:
    """군/표현 불변식 검사 결과."""

    group: str
    checks: dict[str, bool] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, check: str, passed: bool, message: str = "") -> None:
        # 같은 검사가 여러 번 실패해도 결과는 하나로 유지
        self.checks[check] = self.checks.get(check, True) and passed
        if not passed:
            self.violations.append(f"{check}: {message}" if message else check)


@dataclass(frozen=True, slots=True, eq=False)
class FiniteGroup:
    """곱셈표·역원표·켤레류·기약표현을 갖는 유한군.

    생성 후 불변이며 여러 스레드에서 동시에 읽어도 안전합니다.
    """

    name: str
    element_names: tuple[str, ...]
    mul_table: np.ndarray
    inv_table: tuple[int, ...]
    class_of: tuple[int, ...]
    irreps: tuple[Irrep, ...]

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_table(
        cls,
        name: str,
        element_names: Sequence[str],
        mul_table: Sequence[Sequence[int]] | np.ndarray,
        irreps: Sequence[Irrep] = (),
    ) -> FiniteGroup:
        """곱셈표에서 역원과 켤레류를 유도해 군을 구성합니다.

        손상된 표로도 예외 없이 구성되며, 불변식 위반은
        :func:`validate_group` 보고서로 확인합니다.
        """
        table = np.asarray(mul_table, dtype=np.int64)
        order = len(element_names)
        if table.shape != (order, order):
            raise GroupError(
                "곱셈표 크기가 원소 수와 일치하지 않습니다.",
                detail={"shape": list(table.shape), "order": order},
            )

        inverses: list[int] = []
        for g in range(order):
            found = [h for h in range(order) if table[g, h] == 0]
            inverses.append(found[0] if found else -1)

        class_of = [-1] * order
        n_classes = 0
        for g in range(order):
            if class_of[g] != -1:
                continue
            for h in range(order):
                if inverses[h] < 0:
                    continue
                conj = int(table[table[h, g], inverses[h]])
                if 0 <= conj < order and class_of[conj] == -1:
                    class_of[conj] = n_classes
            class_of[g] = n_classes
            n_classes += 1

        table.setflags(write=False)
        return cls(
            name=name,
            element_names=tuple(element_names),
            mul_table=table,
            inv_table=tuple(inverses),
            class_of=tuple(class_of),
            irreps=tuple(irreps),
        )

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.element_names)

    @property
    def identity(self) -> int:
        return 0

    def _check(self, g: int) -> int:
        if not isinstance(g, (int, np.integer)) or not 0 <= g < self.order:
            raise GroupError(
                f"원소 인덱스 범위를 벗어났습니다: {g}",
                detail={"group": self.name, "element": repr(g), "order": self.order},
            )
        return int(g)

    def mul(self, g: int, h: int) -> int:
        return int(self.mul_table[self._check(g), self._check(h)])

    def inv(self, g: int) -> int:
        return self.inv_table[self._check(g)]

    def element_index(self, name: str) -> int:
        try:
            return self.element_names.index(name)
        except ValueError:
            raise GroupError(
                f"알 수 없는 원소 이름: {name}",
                detail={"group": self.name, "known": list(self.element_names)},
            ) from None

    def element_name(self, g: int) -> str:
        return self.element_names[self._check(g)]

    def resolve(self, element: int | str) -> int:
        """원소 이름 또는 인덱스를 인덱스로 변환"""
        if isinstance(element, str):
            return self.element_index(element)
        return self._check(element)

    # ------------------------------------------------------------------
    # Conjugacy classes
    # ------------------------------------------------------------------

    @property
    def n_classes(self) -> int:
        return max(self.class_of) + 1

    def class_index(self, g: int) -> int:
        return self.class_of[self._check(g)]

    def conjugacy_class(self, g: int) -> frozenset[int]:
        g = self._check(g)
        return frozenset(
            self.mul(self.mul(h, g), self.inv(h)) for h in range(self.order)
        )

    def class_members(self, class_index: int) -> tuple[int, ...]:
        """켤레류의 원소들 (인덱스 오름차순)"""
        members = tuple(g for g in range(self.order) if self.class_of[g] == class_index)
        if not members:
            raise GroupError(
                f"알 수 없는 켤레류: {class_index}",
                detail={"group": self.name, "n_classes": self.n_classes},
            )
        return members

    # ------------------------------------------------------------------
    # Representations
    # ------------------------------------------------------------------

    def irrep(self, label: str) -> Irrep:
        for rep in self.irreps:
            if rep.label == label:
                return rep
        raise GroupError(
            f"알 수 없는 기약표현: {label}",
            detail={"group": self.name, "known": [r.label for r in self.irreps]},
        )

    def character(self, label: str, g: int) -> complex:
        return self.irrep(label).character(self._check(g))

    def projector_coefficient(self, label: str, mu: int, nu: int, g: int) -> complex:
        """P^R_{μν} 의 g 계수 ``(|R|/|G|)·conj(R(g)[μ,ν])``."""
        rep = self.irrep(label)
        if not (0 <= mu < rep.dim and 0 <= nu < rep.dim):
            raise GroupError(
                "행렬 인덱스 범위를 벗어났습니다.",
                detail={"irrep": label, "mu": mu, "nu": nu, "dim": rep.dim},
            )
        g = self._check(g)
        return rep.dim / self.order * complex(np.conj(rep.matrix(g)[mu, nu]))

    # ------------------------------------------------------------------
    # Bases
    # ------------------------------------------------------------------

    def fourier_state(self, j: int) -> np.ndarray:
        """``|j̃⟩ = (1/√|G|) Σ_k e^{2πijk/|G|}|k⟩``"""
        j = self._check(j)
        k = np.arange(self.order)
        return np.exp(2j * np.pi * j * k / self.order) / np.sqrt(self.order)

    def fourier_basis(self) -> np.ndarray:
        """행 r 이 ``|r̃⟩`` 인 측정 기저"""
        return np.array([self.fourier_state(j) for j in range(self.order)])

    def fourier_phase(self, r: int) -> np.ndarray:
        """``Z^r = diag(e^{2πirk/|G|})``, 즉 ``Z^r|0̃⟩ = |r̃⟩``"""
        k = np.arange(self.order)
        return np.diag(np.exp(2j * np.pi * r * k / self.order))

    def class_state(self, class_index: int, k: int = 0) -> np.ndarray:
        """``|k_[ℓ]⟩ = Z_[ℓ]^k |0_[ℓ]⟩`` (켤레류 위 균등 중첩의 위상 회전)"""
        members = self.class_members(class_index)
        vec = np.zeros(self.order, dtype=complex)
        for m, g in enumerate(members):
            vec[g] = np.exp(2j * np.pi * k * m / len(members))
        return vec / np.sqrt(len(members))

    def class_phase(self, class_index: int, k: int) -> np.ndarray:
        """켤레류 위 위상 대각행렬 ``Z_[ℓ]^k`` (류 밖 원소는 1)"""
        members = self.class_members(class_index)
        diag = np.ones(self.order, dtype=complex)
        for m, g in enumerate(members):
            diag[g] = np.exp(2j * np.pi * k * m / len(members))
        return np.diag(diag)

    def class_basis(self, class_index: int) -> np.ndarray:
        """``{|k_[ℓ]⟩}`` 에 류 밖의 계산 기저를 더한 정규직교 기저 (행 단위)"""
        members = self.class_members(class_index)
        rows = [self.class_state(class_index, k) for k in range(len(members))]
        for g in range(self.order):
            if g not in members:
                vec = np.zeros(self.order, dtype=complex)
                vec[g] = 1.0
                rows.append(vec)
        return np.array(rows)

    def character_state(self, label: str) -> np.ndarray:
        """``|R⟩ ∝ Σ_g conj(χ_R(g))|g⟩`` (정규화)"""
        rep = self.irrep(label)
        vec = np.array([np.conj(rep.character(g)) for g in range(self.order)])
        return vec / np.linalg.norm(vec)

    def character_basis(self) -> np.ndarray:
        """기약표현 순서의 지표 상태를 Gram-Schmidt 로 완성한 기저 (행 단위).

        처음 ``len(irreps)`` 개 행이 각 기약표현 채널입니다.
        """
        rows = [self.character_state(rep.label) for rep in self.irreps]
        return complete_orthonormal_basis(rows, self.order)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def complete_orthonormal_basis(rows: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """정규직교 벡터 집합을 계산 기저와의 Gram-Schmidt 로 완전 기저로 확장."""
    basis = [np.asarray(r, dtype=complex) for r in rows]
    for i in range(dim):
        if len(basis) == dim:
            break
        vec = np.zeros(dim, dtype=complex)
        vec[i] = 1.0
        for b in basis:
            vec = vec - np.vdot(b, vec) * b
        norm = np.linalg.norm(vec)
        if norm > 1e-9:
            basis.append(vec / norm)
    return np.array(basis)


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """``(p·q)(x) = p(q(x))``"""
    return tuple(p[q[x]] for x in range(len(q)))


# 치환 표기: p[x] = x 의 상
_S3_PERMUTATIONS: dict[str, tuple[int, ...]] = {
    "e": (0, 1, 2),
    "c+": (1, 2, 0),
    "c-": (2, 0, 1),
    "t0": (0, 2, 1),
    "t1": (2, 1, 0),
    "t2": (1, 0, 2),
}


@lru_cache(maxsize=None)
def z2() -> FiniteGroup:
    """ℤ₂ = {e, g1}, 기약표현 trivial/sign"""
    table = [[0, 1], [1, 0]]
    one = np.eye(1, dtype=complex)
    irreps = (
        Irrep("trivial", 1, (one, one)),
        Irrep("sign", 1, (one, -one)),
    )
    return FiniteGroup.from_table("z2", ("e", "g1"), table, irreps)


@lru_cache(maxsize=None)
def s3() -> FiniteGroup:
    """S₃ (치환군), 기약표현 R1+/R1-/R2"""
    names = tuple(_S3_PERMUTATIONS)
    perms = list(_S3_PERMUTATIONS.values())
    table = [[perms.index(_compose(p, q)) for q in perms] for p in perms]

    omega = np.exp(2j * np.pi / 3)
    sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)

    def rot(k: int) -> np.ndarray:
        return np.diag([omega**k, omega ** (-k)])

    r2 = (
        np.eye(2, dtype=complex),
        rot(1),
        rot(-1),
        sigma_x @ rot(0),
        sigma_x @ rot(1),
        sigma_x @ rot(2),
    )
    one = np.eye(1, dtype=complex)
    sign = tuple(one if name[0] in "ec" else -one for name in names)
    irreps = (
        Irrep("R1+", 1, tuple(one for _ in names)),
        Irrep("R1-", 1, sign),
        Irrep("R2", 2, r2),
    )
    return FiniteGroup.from_table("s3", names, table, irreps)


_BUILTIN = {"z2": z2, "s3": s3}


def build_group(name: str) -> FiniteGroup:
    """이름("z2", "s3")으로 내장 군을 반환합니다."""
    key = name.strip().lower()
    if key not in _BUILTIN:
        raise GroupError(
            f"지원하지 않는 군: {name}",
            detail={"group": name, "supported": sorted(_BUILTIN)},
        )
    return _BUILTIN[key]()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_group(group: FiniteGroup) -> GroupValidationReport:
    """군 공리와 기약표현 불변식을 모두 검사한 보고서를 반환합니다."""
    report = GroupValidationReport(group=group.name)
    n = group.order
    table = group.mul_table
    full = set(range(n))

    for g in range(n):
        row_ok = set(int(x) for x in table[g, :]) == full
        col_ok = set(int(x) for x in table[:, g]) == full
        report.record("latin_square", row_ok and col_ok, f"row/column {g}")
        report.record(
            "identity", int(table[0, g]) == g and int(table[g, 0]) == g, f"element {g}"
        )
        inv = group.inv_table[g]
        report.record("inverse", inv >= 0 and int(table[g, inv]) == 0, f"element {g}")

    for a, b, c in product(range(n), repeat=3):
        lhs = table[table[a, b], c]
        rhs = table[a, table[b, c]]
        if lhs != rhs:
            report.record("associativity", False, f"({a},{b},{c})")
            break
    else:
        report.record("associativity", True)

    covered: set[int] = set()
    for c in range(group.n_classes):
        members = {g for g in range(n) if group.class_of[g] == c}
        covered |= members
    report.record("class_partition", covered == full and -1 not in group.class_of)
    report.record("identity_class", {g for g in range(n) if group.class_of[g] == group.class_of[0]} == {0})

    if group.irreps:
        _validate_irreps(group, report)
    return report


def _validate_irreps(group: FiniteGroup, report: GroupValidationReport) -> None:
    n = group.order
    table = group.mul_table
    report.record(
        "dimension_sum",
        sum(rep.dim**2 for rep in group.irreps) == n,
        "Σ|R|² != |G|",
    )
    for rep in group.irreps:
        for g in range(n):
            m = rep.matrix(g)
            unitary = np.allclose(m.conj().T @ m, np.eye(rep.dim), atol=_TOL, rtol=0)
            report.record("unitarity", bool(unitary), f"{rep.label}({g})")
        for g, h in product(range(n), repeat=2):
            gh = int(table[g, h])
            if not 0 <= gh < n:
                report.record("homomorphism", False, f"{rep.label}({g},{h})")
                continue
            ok = np.allclose(rep.matrix(g) @ rep.matrix(h), rep.matrix(gh), atol=_TOL, rtol=0)
            report.record("homomorphism", bool(ok), f"{rep.label}({g},{h})")

    for a, b in product(group.irreps, repeat=2):
        inner = sum(a.character(g) * np.conj(b.character(g)) for g in range(n)) / n
        expected = 1.0 if a is b else 0.0
        report.record(
            "character_orthogonality",
            abs(inner - expected) < _TOL * 10,
            f"<{a.label},{b.label}>",
        )
