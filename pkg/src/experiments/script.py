"""
프로토콜 스크립트 파서

형식::

    # 주석
    group: s3
    lattice: 2 2
    boundary: open
    mode: branch
    ops:
    prepare_ground_state policy=postselect
    create_electric_vacuum_pair irrep=R2 path=v:0,0/v:0,1
    single_face_interference v=v:0,0 h=c+

헤더는 ``key: value``, ``ops:`` 이후 한 줄에 연산 하나(``name key=value ...``)이며
목록 값은 ``/`` 로 구분합니다. 전체 스크립트를 실행 전에 검증하고
오류는 줄 번호와 함께 :class:`ScriptValidationError` 로 모아 보고합니다.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from src.exceptions import AppError, ScriptValidationError
from src.group.core import FiniteGroup, build_group
from src.lattice.geometry import BoundaryKind, Lattice, build_square_lattice
from src.lattice.registry import parse_site
from src.protocols.quantum_double import CorrectionPolicy
from src.protocols.toric_code import ANCILLA_STATES, ANCILLAS, Pauli

HEADER_KEYS = {"group", "lattice", "boundary", "mode", "seed", "model", "policy"}

# 자리 종류: vertex, face, edge, site, ancilla, vertices, faces, edges
# 이름 종류: element, class, irrep, policy, pauli, stabilizer, ancilla_state, basis
# 값 종류: number, count, flag
QUANTUM_DOUBLE_OPS: dict[str, dict[str, tuple[str, bool]]] = {
    "prepare_ground_state": {"policy": ("policy", False)},
    "gauge_transform": {"v": ("vertex", True), "g": ("element", True)},
    "measure_vertex": {"v": ("vertex", True)},
    "create_magnetic_vacuum_pair": {"class": ("class", True), "faces": ("faces", True)},
    "transport_magnetic": {"from": ("face", True), "to": ("face", True)},
    "fuse_magnetic": {"faces": ("faces", True), "class": ("class", False)},
    "create_electric_vacuum_pair": {"irrep": ("irrep", True), "path": ("vertices", True)},
    "fuse_electric": {"path": ("vertices", True)},
    "fuse_electric_pair": {"path": ("vertices", True)},
    "braid_flux_around_vertex": {"v": ("vertex", True), "h": ("element", True)},
    "braid_electric_charge": {"irrep": ("irrep", True), "loop": ("vertices", True)},
    "single_face_interference": {"v": ("vertex", True), "h": ("element", True)},
}

TORIC_CODE_OPS: dict[str, dict[str, tuple[str, bool]]] = {
    "prepare_toric_code": {},
    "prepare_ancilla": {"name": ("ancilla", True), "state": ("ancilla_state", True)},
    "controlled_pauli": {
        "ancilla": ("ancilla", True),
        "target": ("edge", True),
        "kind": ("pauli", True),
    },
    "measure_ancilla": {"name": ("ancilla", True), "basis": ("basis", False)},
    "measure_stabilizer": {"kind": ("stabilizer", True), "at": ("site", True)},
    "apply_string": {"kind": ("pauli", True), "path": ("edges", True)},
    "measure_string": {"kind": ("pauli", True), "path": ("edges", True)},
    "create_defect_superposition": {
        "kind": ("pauli", True),
        "path": ("edges", True),
        "ancilla": ("ancilla", False),
    },
    "measure_logical_z": {},
    "apply_logical_x": {},
    "interferometry_fig3": {
        "U": ("number", False),
        "t_braid": ("number", False),
        "enclose": ("flag", False),
        "windings": ("count", False),
    },
    "syndrome": {},
}

NAMED_KINDS = {"element", "class", "irrep", "policy", "pauli", "stabilizer", "ancilla_state", "basis"}
STABILIZER_KINDS = ("A", "B")
MEASUREMENT_BASES = ("x", "z")
MODES = ("branch", "sample")
POLICIES = tuple(CorrectionPolicy.accepted_values())


class ScriptOperation(BaseModel):
    """스크립트 연산 한 줄"""

    line: int = Field(description="원본 줄 번호 (1부터)")
    name: str = Field(description="연산 이름")
    params: dict[str, Any] = Field(default_factory=dict, description="해석된 파라미터")


class ProtocolScript(BaseModel):
    """검증된 프로토콜 스크립트"""

    group: str = Field(default="z2", description="군 이름 (z2, s3)")
    lattice: tuple[int, int] = Field(default=(2, 2), description="꼭짓점 행/열 수")
    boundary: str = Field(default=BoundaryKind.OPEN.value)
    model: str = Field(default="quantum-double", description="quantum-double | toric-code")
    mode: str = Field(default="branch")
    seed: int | None = None
    policy: str = Field(default="postselect")
    operations: list[ScriptOperation] = Field(default_factory=list)
    source: str = Field(default="", description="원본 스크립트 (결과 문서 echo)")

    @property
    def registered_ops(self) -> dict[str, dict[str, tuple[str, bool]]]:
        return TORIC_CODE_OPS if self.model == "toric-code" else QUANTUM_DOUBLE_OPS


def _parse_header(key: str, value: str, header: dict[str, Any]) -> None:
    if key == "lattice":
        parts = value.split()
        if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
            raise ValueError("lattice 는 'N M' 형식이어야 합니다.")
        header["lattice"] = (int(parts[0]), int(parts[1]))
    elif key == "seed":
        header["seed"] = int(value)
    else:
        header[key] = value


def _check_site(lattice: Lattice, kind: str, text: str) -> tuple[int, ...] | str:
    site_kind, coords = parse_site(text)
    if kind == "ancilla":
        if site_kind != "named" or coords not in ANCILLAS:
            raise ValueError(f"알 수 없는 보조 큐비트: {text}")
        return coords
    allowed = ("vertex", "face") if kind == "site" else (kind,)
    if site_kind not in allowed:
        raise ValueError(f"{kind} 자리에 올 수 없는 표기: {text}")
    if site_kind == "vertex":
        return lattice.check_vertex(coords)
    if site_kind == "face":
        return lattice.face(coords).index
    i, j, k, l = coords
    return lattice.edge((i, j), (k, l)).label


def _check_text(group: FiniteGroup, kind: str, text: str) -> str:
    """이름으로 주어지는 파라미터를 실행 전에 해석해 봅니다 (값은 그대로 반환)."""
    if kind == "element":
        group.resolve(text)
    elif kind == "class":
        if group.resolve(text) == group.identity:
            raise ValueError(f"항등원은 자기 전하 켤레류가 될 수 없습니다: {text}")
    elif kind == "irrep":
        group.irrep(text)
    elif kind == "policy":
        if text not in POLICIES:
            raise ValueError(f"보정 정책은 {POLICIES} 중 하나여야 합니다: {text}")
    elif kind == "pauli":
        if text.removeprefix("U_") not in {p.value for p in Pauli}:
            raise ValueError(f"파울리 종류는 X, Z, U_X, U_Z 중 하나여야 합니다: {text}")
    elif kind == "stabilizer":
        if text not in STABILIZER_KINDS:
            raise ValueError(f"안정자 종류는 {STABILIZER_KINDS} 중 하나여야 합니다: {text}")
    elif kind == "ancilla_state":
        if text not in ANCILLA_STATES:
            raise ValueError(f"보조 상태는 {tuple(ANCILLA_STATES)} 중 하나여야 합니다: {text}")
    elif kind == "basis":
        if text not in MEASUREMENT_BASES:
            raise ValueError(f"측정 기저는 {MEASUREMENT_BASES} 중 하나여야 합니다: {text}")
    return text


def _parse_value(lattice: Lattice, group: FiniteGroup, kind: str, text: str) -> Any:
    if kind in NAMED_KINDS:
        return _check_text(group, kind, text)
    if kind == "number":
        return float(text)
    if kind == "count":
        if not text.isdigit() or int(text) < 1:
            raise ValueError(f"양의 정수가 아닙니다: {text}")
        return int(text)
    if kind == "flag":
        if text.lower() not in ("true", "false", "1", "0"):
            raise ValueError(f"참/거짓 값이 아닙니다: {text}")
        return text.lower() in ("true", "1")
    if kind in ("vertices", "faces", "edges"):
        single = kind[:-1] if kind != "vertices" else "vertex"
        return [_check_site(lattice, single, part) for part in text.split("/") if part]
    return _check_site(lattice, kind, text)


def _stabilizer_site_errors(lineno: int, tokens: list[str]) -> list[dict[str, Any]]:
    """``A`` 는 꼭짓점, ``B`` 는 면에서만 측정합니다."""
    values = dict(t.partition("=")[::2] for t in tokens)
    expected = {"A": "v:", "B": "f:"}.get(values.get("kind", ""))
    at = values.get("at", "")
    if expected and at and not at.startswith(expected):
        message = f"{values['kind']} 안정자는 {expected} 자리에서 측정합니다: {at}"
        return [{"line": lineno, "error": message}]
    return []


def parse_script(text: str) -> ProtocolScript:
    """스크립트 텍스트를 검증해 :class:`ProtocolScript` 로 만듭니다.

    Raises:
        ScriptValidationError: 하나 이상의 줄이 유효하지 않을 때 (detail["errors"] 에 줄별 진단)
    """
    errors: list[dict[str, Any]] = []
    header: dict[str, Any] = {}
    header_lines: dict[str, int] = {}
    raw_ops: list[tuple[int, str]] = []
    in_ops = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_ops:
            raw_ops.append((lineno, line))
            continue
        if line == "ops:":
            in_ops = True
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in HEADER_KEYS:
            errors.append({"line": lineno, "error": f"알 수 없는 헤더: {line}"})
            continue
        header_lines[key] = lineno
        try:
            _parse_header(key, value.strip(), header)
        except ValueError as exc:
            errors.append({"line": lineno, "error": str(exc)})

    if "model" not in header:
        rough = header.get("boundary") == BoundaryKind.ROUGH_SMOOTH.value
        header["model"] = "toric-code" if rough else "quantum-double"
    if header["model"] not in ("quantum-double", "toric-code"):
        errors.append(
            {"line": header_lines.get("model", 0), "error": f"알 수 없는 모형: {header['model']}"}
        )
        header["model"] = "quantum-double"
    for key, allowed in (("mode", MODES), ("policy", POLICIES)):
        if key in header and header[key] not in allowed:
            message = f"{key} 는 {allowed} 중 하나여야 합니다: {header[key]}"
            errors.append({"line": header_lines[key], "error": message})

    try:
        script = ProtocolScript(source=text, **header)
        group = build_group(script.group)
    except (AppError, ValueError) as exc:
        message = getattr(exc, "message", str(exc))
        errors.append({"line": header_lines.get("group", 0), "error": message})
        raise ScriptValidationError(detail={"errors": errors}) from None
    try:
        n, m = script.lattice
        lattice = build_square_lattice(n, m, script.boundary)
    except (AppError, ValueError) as exc:
        message = getattr(exc, "message", str(exc))
        errors.append({"line": header_lines.get("lattice", 0), "error": message})
        raise ScriptValidationError(detail={"errors": errors}) from None

    registered = script.registered_ops
    for lineno, line in raw_ops:
        name, *tokens = line.split()
        if name not in registered:
            errors.append({"line": lineno, "error": f"등록되지 않은 연산: {name}"})
            continue
        signature = registered[name]
        params: dict[str, Any] = {}
        for token in tokens:
            key, sep, value = token.partition("=")
            if not sep or key not in signature:
                errors.append({"line": lineno, "error": f"{name} 의 알 수 없는 파라미터: {token}"})
                continue
            try:
                params[key] = _parse_value(lattice, group, signature[key][0], value)
            except (AppError, ValueError) as exc:
                errors.append({"line": lineno, "error": getattr(exc, "message", str(exc))})
        if name == "measure_stabilizer":
            errors.extend(_stabilizer_site_errors(lineno, tokens))
        missing = [k for k, (_, required) in signature.items() if required and k not in params]
        if missing:
            errors.append({"line": lineno, "error": f"{name} 의 필수 파라미터 누락: {missing}"})
        script.operations.append(ScriptOperation(line=lineno, name=name, params=params))

    if errors:
        raise ScriptValidationError(detail={"errors": errors})
    return script
