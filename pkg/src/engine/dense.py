"""밀집(dense) 상태벡터 오라클.

희소 엔진과 독립적인 경로로 같은 연산을 계산합니다. 전체 상태를 사이트별 축을 갖는
numpy 텐서로 두고, 국소 연산은 군 곱셈표나 행렬에서 numpy 로 직접 만든 국소 행렬
``M[out, in]`` 을 텐서 축에 수축합니다. 희소 엔진의 kernel 은 쓰지 않습니다.
작은 레지스트리(사이트 수 × 차원이 작을 때)에서 희소 결과를 검증하는 데 씁니다.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from src.engine.state import SparseState
from src.group.core import FiniteGroup
from src.lattice.registry import SiteRegistry

# (사이트 목록, 국소 행렬)
LocalOp = tuple[Sequence[int], np.ndarray]


def to_dense(state: SparseState) -> np.ndarray:
    """희소 상태 → 사이트 축 텐서 (축 s = 사이트 s)"""
    registry = state.registry
    tensor = np.zeros(registry.dims, dtype=complex)
    for key, amp in state.amplitudes.items():
        tensor[registry.values(key)] += amp
    return tensor


def from_dense(registry: SiteRegistry, tensor: np.ndarray, eps: float = 1e-12) -> SparseState:
    amplitudes = {
        registry.pack([int(i) for i in idx]): complex(tensor[idx])
        for idx in zip(*np.nonzero(np.abs(tensor) >= eps))
    }
    return SparseState(registry, amplitudes, eps)


def left_mul_matrix(group: FiniteGroup, h: int) -> np.ndarray:
    """``L_h|g⟩ = |hg⟩`` 치환 행렬"""
    order = group.order
    matrix = np.zeros((order, order), dtype=complex)
    matrix[group.mul_table[h, :], np.arange(order)] = 1.0
    return matrix


def right_mul_matrix(group: FiniteGroup, h: int) -> np.ndarray:
    """``R_h|g⟩ = |gh⟩`` 치환 행렬"""
    order = group.order
    matrix = np.zeros((order, order), dtype=complex)
    matrix[group.mul_table[:, h], np.arange(order)] = 1.0
    return matrix


def diagonal_matrix(phases: np.ndarray) -> np.ndarray:
    """여러 사이트에 걸친 대각 연산 (``phases`` 의 축 = 사이트 순서)"""
    return np.diag(np.asarray(phases, dtype=complex).ravel())


def apply_dense(tensor: np.ndarray, sites: Sequence[int], matrix: np.ndarray) -> np.ndarray:
    sites = list(sites)
    moved = np.moveaxis(tensor, sites, list(range(len(sites))))
    front_shape = moved.shape[: len(sites)]
    flat = moved.reshape(int(np.prod(front_shape)), -1)
    result = (np.asarray(matrix, dtype=complex) @ flat).reshape(moved.shape)
    return np.moveaxis(result, list(range(len(sites))), sites)


def apply_controlled_dense(
    tensor: np.ndarray, control: int, family: Mapping[int, Sequence[LocalOp]]
) -> np.ndarray:
    out = np.zeros_like(tensor)
    for value in range(tensor.shape[control]):
        index = [slice(None)] * tensor.ndim
        index[control] = value
        branch = np.zeros_like(tensor)
        branch[tuple(index)] = tensor[tuple(index)]
        for sites, matrix in family.get(value, ()):
            branch = apply_dense(branch, sites, matrix)
        out += branch
    return out


def measure_dense(
    tensor: np.ndarray, site: int, basis: np.ndarray, outcome: int
) -> tuple[float, np.ndarray]:
    """결과 ``outcome`` 의 확률과 정규화된 붕괴 상태"""
    b = np.asarray(basis, dtype=complex)
    moved = np.moveaxis(tensor, site, 0)
    coeffs = np.tensordot(b[outcome].conj(), moved, axes=(0, 0))
    probability = float(np.sum(np.abs(coeffs) ** 2) / np.sum(np.abs(tensor) ** 2))
    collapsed = np.multiply.outer(b[outcome], coeffs)
    collapsed = np.moveaxis(collapsed, 0, site)
    norm = np.linalg.norm(collapsed)
    return probability, collapsed / norm if norm > 0 else collapsed


def inner_dense(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))
