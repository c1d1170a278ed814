"""격자 2-복합체 Γ = {V, E, F}.

열린 n×m 정사각 격자(양자 이중 모형)와 rough/smooth 경계 직사각형(토릭 코드)을
구성하고, 꼭짓점 별(star), 방향 부호가 붙은 면 순환, 공유 간선, 논리 경로를
제공합니다.

고정 규약
---------
* 인덱스는 (행 i, 열 j), 행 우선.
* 수평 간선은 오른쪽(열 증가), 수직 간선은 아래쪽(행 증가)을 향합니다.
* 면 f(i,j) 의 기준점은 왼쪽 위 꼭짓점이고 순환은 반시계 방향
  (왼쪽 아래로, 아래 오른쪽으로, 오른쪽 위로, 위 왼쪽으로) 이므로
  부호 패턴은 ``(+1, +1, -1, -1)`` 입니다.
* rough-smooth 모드에서는 각 행의 양 끝에 반간선 ``(i,-1)→(i,0)``,
  ``(i,m-1)→(i,m)`` 이 달려 있습니다. 끝점 ``(i,-1)``, ``(i,m)`` 은
  꼭짓점이 아닌 단말입니다. 면 f(i,j) 는 꼭짓점 열 j-1..j 를 차지하며
  (j = 0..m) 좌우 경계 면은 3-체입니다.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from src.exceptions import LatticeError

Vertex = tuple[int, int]


class BoundaryKind(str, Enum):
    """격자 경계 종류"""

    OPEN = "open"
    ROUGH_SMOOTH = "rough-smooth"


class Direction(str, Enum):
    """꼭짓점 기준 간선 방향"""

    OUTGOING = "outgoing"
    INCOMING = "incoming"


@dataclass(frozen=True, slots=True, order=True)
class Edge:
    """방향 간선 ``[src, dst]``"""

    src: Vertex
    dst: Vertex

    @property
    def label(self) -> str:
        (i, j), (k, l) = self.src, self.dst
        return f"e:{i},{j};{k},{l}"

    def other(self, v: Vertex) -> Vertex:
        return self.dst if v == self.src else self.src


@dataclass(frozen=True, slots=True)
class Face:
    """면: 기준 꼭짓점에서 시작하는 반시계 순환 ``((edge, o_f), ...)``"""

    index: tuple[int, int]
    base: Vertex
    cycle: tuple[tuple[Edge, int], ...]

    @property
    def label(self) -> str:
        i, j = self.index
        return f"f:{i},{j}"

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(edge for edge, _ in self.cycle)


def _step_start(edge: Edge, sign: int) -> Vertex:
    return edge.src if sign > 0 else edge.dst


@dataclass(frozen=True, slots=True, eq=False)
class Lattice:
    """생성 후 불변인 격자."""

    n_rows: int
    n_cols: int
    boundary: BoundaryKind
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    faces: tuple[Face, ...]
    _edge_lookup: dict[tuple[Vertex, Vertex], Edge] = field(repr=False)
    _face_lookup: dict[tuple[int, int], Face] = field(repr=False)
    _stars: dict[Vertex, tuple[tuple[Edge, Direction], ...]] = field(repr=False)

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def has_vertex(self, v: Vertex) -> bool:
        return tuple(v) in self._stars

    def check_vertex(self, v: Vertex) -> Vertex:
        v = (int(v[0]), int(v[1]))
        if v not in self._stars:
            raise LatticeError(
                f"격자에 없는 꼭짓점: v:{v[0]},{v[1]}",
                detail={"vertex": list(v), "rows": self.n_rows, "cols": self.n_cols},
            )
        return v

    def face(self, index: tuple[int, int]) -> Face:
        key = (int(index[0]), int(index[1]))
        if key not in self._face_lookup:
            raise LatticeError(
                f"격자에 없는 면: f:{key[0]},{key[1]}",
                detail={"face": list(key), "boundary": self.boundary.value},
            )
        return self._face_lookup[key]

    def edge(self, src: Vertex, dst: Vertex) -> Edge:
        key = ((int(src[0]), int(src[1])), (int(dst[0]), int(dst[1])))
        if key not in self._edge_lookup:
            raise LatticeError(
                f"격자에 없는 간선: e:{key[0][0]},{key[0][1]};{key[1][0]},{key[1][1]}",
                detail={"src": list(key[0]), "dst": list(key[1])},
            )
        return self._edge_lookup[key]

    def has_edge(self, src: Vertex, dst: Vertex) -> bool:
        return (tuple(src), tuple(dst)) in self._edge_lookup

    def edge_between(self, a: Vertex, b: Vertex) -> Edge:
        """방향과 무관하게 두 꼭짓점을 잇는 간선"""
        a, b = tuple(a), tuple(b)
        if (a, b) in self._edge_lookup:
            return self._edge_lookup[(a, b)]
        if (b, a) in self._edge_lookup:
            return self._edge_lookup[(b, a)]
        raise LatticeError(
            "인접하지 않은 꼭짓점입니다.",
            detail={"a": list(a), "b": list(b)},
        )

    # ------------------------------------------------------------------
    # Stars, cycles
    # ------------------------------------------------------------------

    def vertex_star(self, v: Vertex) -> tuple[tuple[Edge, Direction], ...]:
        return self._stars[self.check_vertex(v)]

    def direction(self, v: Vertex, edge: Edge) -> Direction:
        v = self.check_vertex(v)
        if edge.src == v:
            return Direction.OUTGOING
        if edge.dst == v:
            return Direction.INCOMING
        raise LatticeError(
            f"간선 {edge.label} 이 꼭짓점 v:{v[0]},{v[1]} 에 접하지 않습니다.",
            detail={"edge": edge.label, "vertex": list(v)},
        )

    def face_cycle(
        self, index: tuple[int, int], base: Vertex | None = None
    ) -> tuple[tuple[Edge, int], ...]:
        """기준점(기본: 면의 기준 꼭짓점)에서 시작하는 반시계 순환"""
        face = self.face(index)
        if base is None or tuple(base) == face.base:
            return face.cycle
        base = tuple(base)
        starts = [_step_start(edge, sign) for edge, sign in face.cycle]
        if base not in starts:
            raise LatticeError(
                f"꼭짓점 v:{base[0]},{base[1]} 은 면 {face.label} 의 기준점이 될 수 없습니다.",
                detail={"face": face.label, "base": list(base)},
            )
        k = starts.index(base)
        return face.cycle[k:] + face.cycle[:k]

    def faces_of_edge(self, edge: Edge) -> tuple[Face, ...]:
        return tuple(f for f in self.faces if edge in f.edges)

    def shared_edge(self, f: tuple[int, int], g: tuple[int, int]) -> Edge:
        a, b = self.face(f), self.face(g)
        common = [e for e in a.edges if e in b.edges]
        if len(common) != 1 or a is b:
            raise LatticeError(
                f"인접하지 않은 면: {a.label}, {b.label}",
                detail={"faces": [a.label, b.label]},
            )
        return common[0]

    def orientation_in(self, index: tuple[int, int], edge: Edge) -> int:
        """면 순환에서 간선의 부호 o_f(e)"""
        for e, sign in self.face(index).cycle:
            if e == edge:
                return sign
        raise LatticeError(
            f"간선 {edge.label} 이 면 f:{index[0]},{index[1]} 의 경계가 아닙니다.",
            detail={"edge": edge.label, "face": list(index)},
        )

    def vertex_path_edges(self, path: Sequence[Vertex]) -> list[Edge]:
        """연속한 꼭짓점 쌍마다 잇는 간선"""
        return [self.edge_between(a, b) for a, b in zip(path, path[1:])]

    # ------------------------------------------------------------------
    # Stabilizer algebra (GF(2))
    # ------------------------------------------------------------------

    def stabilizer_supports(self) -> tuple[list[frozenset[Edge]], list[frozenset[Edge]]]:
        """(X형 꼭짓점 별 지지집합, Z형 면 지지집합)"""
        stars = [frozenset(e for e, _ in self._stars[v]) for v in self.vertices]
        plaquettes = [frozenset(f.edges) for f in self.faces]
        return stars, plaquettes

    def support_matrix(self, supports: Iterable[Iterable[Edge]]) -> np.ndarray:
        position = {e: k for k, e in enumerate(self.edges)}
        rows = []
        for support in supports:
            row = np.zeros(len(self.edges), dtype=np.uint8)
            for e in support:
                row[position[e]] = 1
            rows.append(row)
        return np.array(rows, dtype=np.uint8).reshape(len(rows), len(self.edges))

    def logical_qubit_count(self) -> int:
        """CSS 코드 논리 큐비트 수 ``N - rank(X) - rank(Z)``"""
        stars, plaquettes = self.stabilizer_supports()
        return (
            len(self.edges)
            - gf2_rank(self.support_matrix(stars))
            - gf2_rank(self.support_matrix(plaquettes))
        )

    def logical_paths(
        self, row: int | None = None, column: int | None = None
    ) -> tuple[list[Edge], list[Edge]]:
        """(z_path, x_path): rough↔rough 간선 경로와 smooth↔smooth 쌍대 경로.

        z_path 는 ``row`` 행의 수평 간선(반간선 포함), x_path 는 열 ``column-1→column``
        사이의 수평 간선 묶음입니다.
        """
        if self.boundary is not BoundaryKind.ROUGH_SMOOTH:
            raise LatticeError(
                "논리 경로는 rough-smooth 격자에서만 정의됩니다.",
                detail={"boundary": self.boundary.value},
            )
        n, m = self.n_rows, self.n_cols
        r = n // 2 if row is None else row
        c = (m + 1) // 2 if column is None else column
        if not 0 <= r < n or not 0 <= c <= m:
            raise LatticeError(
                "논리 경로 위치가 격자 밖입니다.",
                detail={"row": r, "column": c},
            )
        z_path = [self.edge((r, j), (r, j + 1)) for j in range(-1, m)]
        x_path = [self.edge((i, c - 1), (i, c)) for i in range(n)]
        return z_path, x_path


def commutes(x_support: Iterable[Edge], z_support: Iterable[Edge]) -> bool:
    """X형과 Z형 파울리 곱은 겹치는 간선 수가 짝수일 때 교환합니다."""
    return len(set(x_support) & set(z_support)) % 2 == 0


def gf2_rank(matrix: np.ndarray) -> int:
    """GF(2) 위 행렬 계수 (가우스 소거)"""
    m = (np.array(matrix, dtype=np.uint8) % 2).copy()
    if m.size == 0:
        return 0
    rank = 0
    n_rows, n_cols = m.shape
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(n_rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_square_lattice(
    n: int, m: int, boundary: BoundaryKind | str = BoundaryKind.OPEN
) -> Lattice:
    """n×m 꼭짓점 격자를 구성합니다.

    Args:
        n: 꼭짓점 행 수 (≥ 2)
        m: 꼭짓점 열 수 (≥ 2)
        boundary: ``open`` 또는 ``rough-smooth``
    """
    try:
        kind = BoundaryKind(boundary)
    except ValueError:
        raise LatticeError(
            f"알 수 없는 경계 종류: {boundary}",
            detail={"supported": [b.value for b in BoundaryKind]},
        ) from None
    if n < 2 or m < 2:
        raise LatticeError(
            "격자 크기는 행/열 모두 2 이상이어야 합니다.",
            detail={"n": n, "m": m},
        )

    vertices = tuple((i, j) for i in range(n) for j in range(m))
    rough = kind is BoundaryKind.ROUGH_SMOOTH
    col_lo, col_hi = (-1, m) if rough else (0, m - 1)

    edges: list[Edge] = []
    for i in range(n):
        if rough:
            edges.append(Edge((i, -1), (i, 0)))
        for j in range(m):
            if j + 1 < m or rough:
                edges.append(Edge((i, j), (i, j + 1)))
            if i + 1 < n:
                edges.append(Edge((i, j), (i + 1, j)))
    edge_lookup = {(e.src, e.dst): e for e in edges}

    faces: list[Face] = []
    for i in range(n - 1):
        for left in range(col_lo, col_hi):
            right = left + 1
            # 반시계 순환: 왼쪽(↓), 아래(→), 오른쪽(↑), 위(←)
            steps = [
                (((i, left), (i + 1, left)), +1),
                (((i + 1, left), (i + 1, right)), +1),
                (((i, right), (i + 1, right)), -1),
                (((i, left), (i, right)), -1),
            ]
            cycle = [(edge_lookup[key], s) for key, s in steps if key in edge_lookup]
            corners = [(i, left), (i + 1, left), (i + 1, right), (i, right)]
            base = next(c for c in corners if 0 <= c[1] < m)
            starts = [_step_start(e, s) for e, s in cycle]
            if base in starts:
                k = starts.index(base)
                cycle = cycle[k:] + cycle[:k]
            index = (i, left + 1) if rough else (i, left)
            faces.append(Face(index=index, base=base, cycle=tuple(cycle)))

    stars: dict[Vertex, list[tuple[Edge, Direction]]] = {v: [] for v in vertices}
    for e in edges:
        if e.src in stars:
            stars[e.src].append((e, Direction.OUTGOING))
        if e.dst in stars:
            stars[e.dst].append((e, Direction.INCOMING))

    return Lattice(
        n_rows=n,
        n_cols=m,
        boundary=kind,
        vertices=vertices,
        edges=tuple(edges),
        faces=tuple(faces),
        _edge_lookup=edge_lookup,
        _face_lookup={f.index: f for f in faces},
        _stars={v: tuple(s) for v, s in stars.items()},
    )
