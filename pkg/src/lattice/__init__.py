"""격자 기하 및 사이트 레지스트리 패키지"""

from src.lattice.geometry import (
    BoundaryKind,
    Direction,
    Edge,
    Face,
    Lattice,
    Vertex,
    build_square_lattice,
    commutes,
    gf2_rank,
)
from src.lattice.registry import SiteRegistry, face_label, parse_site, vertex_label

__all__ = [
    "BoundaryKind",
    "Direction",
    "Edge",
    "Face",
    "Lattice",
    "SiteRegistry",
    "Vertex",
    "build_square_lattice",
    "commutes",
    "face_label",
    "gf2_rank",
    "parse_site",
    "vertex_label",
]
