"""사이트 레지스트리.

코드 큐디트(간선마다 하나), 꼭짓점/면 보조 큐디트, 이름 붙은 보조 큐디트를
평탄 인덱스 ``0..N-1`` 로 대응시키고 구성(configuration) 키의 비트 배치를 정합니다.

사이트 s 의 값은 키의 ``offset[s]`` 비트부터 ``width[s] = ceil(log2 d)`` 비트에
저장되며, 사이트 0 이 최하위 비트입니다. 키는 파이썬 정수이므로 사이트 수에
제한이 없습니다.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from src.exceptions import LatticeError
from src.lattice.geometry import Edge, Lattice, Vertex

_VERTEX_RE = re.compile(r"^v:(-?\d+),(-?\d+)$")
_FACE_RE = re.compile(r"^f:(-?\d+),(-?\d+)$")
_EDGE_RE = re.compile(r"^e:(-?\d+),(-?\d+);(-?\d+),(-?\d+)$")
_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def vertex_label(v: Vertex) -> str:
    return f"v:{v[0]},{v[1]}"


def face_label(f: tuple[int, int]) -> str:
    return f"f:{f[0]},{f[1]}"


def parse_site(text: str) -> tuple[str, tuple[int, ...] | str]:
    """``v:i,j`` / ``f:i,j`` / ``e:i,j;k,l`` / 이름 을 (종류, 좌표) 로 해석"""
    text = text.strip()
    if match := _VERTEX_RE.match(text):
        return "vertex", tuple(int(x) for x in match.groups())
    if match := _FACE_RE.match(text):
        return "face", tuple(int(x) for x in match.groups())
    if match := _EDGE_RE.match(text):
        return "edge", tuple(int(x) for x in match.groups())
    if _NAME_RE.match(text):
        return "named", text
    raise LatticeError(f"사이트 표기를 해석할 수 없습니다: {text}", detail={"site": text})


@dataclass(frozen=True, slots=True, eq=False)
class SiteRegistry:
    """사이트 라벨 ↔ 평탄 인덱스 전단사와 키 비트 배치."""

    lattice: Lattice
    labels: tuple[str, ...]
    dims: tuple[int, ...]
    offsets: tuple[int, ...] = field(repr=False)
    masks: tuple[int, ...] = field(repr=False)
    _index: dict[str, int] = field(repr=False)

    @classmethod
    def build(
        cls,
        lattice: Lattice,
        dim: int,
        *,
        vertex_ancillas: bool = True,
        face_ancillas: bool = True,
        named: Sequence[tuple[str, int]] = (),
    ) -> SiteRegistry:
        """간선 → 꼭짓점 보조 → 면 보조 → 이름 보조 순으로 사이트를 배치합니다."""
        entries: list[tuple[str, int]] = [(e.label, dim) for e in lattice.edges]
        if vertex_ancillas:
            entries += [(vertex_label(v), dim) for v in lattice.vertices]
        if face_ancillas:
            entries += [(f.label, dim) for f in lattice.faces]
        for name, d in named:
            if not _NAME_RE.match(name):
                raise LatticeError(f"보조 큐디트 이름이 유효하지 않습니다: {name}")
            entries.append((name, d))
        return cls.from_entries(lattice, entries)

    @classmethod
    def from_entries(cls, lattice: Lattice, entries: Sequence[tuple[str, int]]) -> SiteRegistry:
        labels = tuple(label for label, _ in entries)
        if len(set(labels)) != len(labels):
            raise LatticeError("사이트 라벨이 중복되었습니다.", detail={"labels": list(labels)})
        dims = tuple(d for _, d in entries)
        if any(d < 2 for d in dims):
            raise LatticeError("사이트 차원은 2 이상이어야 합니다.", detail={"dims": list(dims)})
        offsets, masks = [], []
        offset = 0
        for d in dims:
            width = (d - 1).bit_length()
            offsets.append(offset)
            masks.append((1 << width) - 1)
            offset += width
        return cls(
            lattice=lattice,
            labels=labels,
            dims=dims,
            offsets=tuple(offsets),
            masks=tuple(masks),
            _index={label: k for k, label in enumerate(labels)},
        )

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.labels)

    def has(self, label: str) -> bool:
        return label in self._index

    def site(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LatticeError(
                f"레지스트리에 없는 사이트: {label}",
                detail={"site": label},
            ) from None

    def edge_site(self, edge: Edge) -> int:
        return self.site(edge.label)

    def vertex_site(self, v: Vertex) -> int:
        return self.site(vertex_label(v))

    def face_site(self, f: tuple[int, int]) -> int:
        return self.site(face_label(f))

    @property
    def code_sites(self) -> tuple[int, ...]:
        return tuple(self.edge_site(e) for e in self.lattice.edges)

    def check_site(self, site: int) -> int:
        if not 0 <= site < self.size:
            raise LatticeError(
                f"사이트 인덱스 범위를 벗어났습니다: {site}",
                detail={"site": site, "size": self.size},
            )
        return site

    def same_layout(self, other: SiteRegistry) -> bool:
        return self is other or (self.labels == other.labels and self.dims == other.dims)

    # ------------------------------------------------------------------
    # Configuration keys
    # ------------------------------------------------------------------

    def value(self, key: int, site: int) -> int:
        return (key >> self.offsets[site]) & self.masks[site]

    def values(self, key: int) -> tuple[int, ...]:
        return tuple(self.value(key, s) for s in range(self.size))

    def clear(self, key: int, sites: Sequence[int]) -> int:
        for s in sites:
            key &= ~(self.masks[s] << self.offsets[s])
        return key

    def assign(self, key: int, sites: Sequence[int], values: Sequence[int]) -> int:
        """``key`` 의 해당 사이트가 0 으로 비워져 있다고 가정하고 값을 씁니다."""
        for s, v in zip(sites, values):
            key |= v << self.offsets[s]
        return key

    def pack(self, values: Sequence[int]) -> int:
        if len(values) != self.size:
            raise LatticeError(
                "구성 길이가 사이트 수와 다릅니다.",
                detail={"length": len(values), "size": self.size},
            )
        key = 0
        for s, v in enumerate(values):
            if not 0 <= v < self.dims[s]:
                raise LatticeError(
                    f"사이트 {self.labels[s]} 의 값 {v} 가 차원 {self.dims[s]} 를 넘습니다.",
                    detail={"site": self.labels[s], "value": v, "dim": self.dims[s]},
                )
            key |= v << self.offsets[s]
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return self.values(key)
