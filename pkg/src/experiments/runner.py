"""
실험 실행기

이름 붙은 실험(prepare-gs, toric-fig3, reference-phase, s3-interfere,
magnetic-fusion, electric-fusion)과 사용자 프로토콜 스크립트를 실행해
결정적인 :class:`ResultDocument` 를 만듭니다.

* 파라미터 스윕은 ``ThreadPoolExecutor(max_workers=jobs)`` 로 독립 상태에서 실행하고
  결과는 완료 순서가 아니라 파라미터 순서로 모읍니다.
* 문서에는 시각/호스트 정보가 없으므로 같은 시드로 다시 실행하면 바이트 단위로 같습니다.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from config.settings import settings
from config.simulation import simulation_settings
from src import __version__
from src.engine.measurement import BranchMeasurer, Measurer, SampleMeasurer
from src.engine.state import SparseState, normalize, overlap_magnitude
from src.exceptions import ValidationError
from src.experiments.script import ProtocolScript
from src.group.core import FiniteGroup, build_group
from src.lattice.geometry import BoundaryKind, Lattice, build_square_lattice
from src.protocols.quantum_double import CorrectionPolicy, QuantumDouble
from src.protocols.records import FusionDistribution, LogEntry
from src.protocols.toric_code import ANCILLA_STATES, ToricCode
from src.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

SIGNIFICANT_DIGITS = 12


# ─────────────────────────────────────────────
# 모델
# ─────────────────────────────────────────────

class ExperimentOptions(BaseModel):
    """실행 옵션 (CLI 플래그에 대응)"""

    group: str = Field(default="z2", description="z2 | s3")
    lattice: tuple[int, int] | None = Field(default=None, description="꼭짓점 행/열 수")
    boundary: str | None = Field(default=None, description="open | rough-smooth")
    mode: str | None = Field(default=None, description="branch | sample")
    seed: int | None = None
    prune_epsilon: float | None = None
    jobs: int | None = None
    policy: str = Field(default="postselect", description="postselect | fourier-correction (별칭 paper-correction)")
    h: list[str] = Field(default_factory=list, description="s3-interfere 원소 스윕")
    couplings: list[float] = Field(default_factory=list, description="배경 결합 U 스윕")
    t_braid: float | None = None
    class_rep: str | None = None
    irrep: str | None = None
    background: str = Field(default="local", description="magnetic-fusion 배경: local | ground")


class ResultDocument(BaseModel):
    """실행 결과 문서"""

    script: str = Field(description="실행한 스크립트 또는 실험 이름 echo")
    log: list[LogEntry] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict)
    tables: dict[str, list[dict[str, Any]]] = Field(default_factory=dict)
    metadata: dict[str, Any] = Field(default_factory=dict)


# ─────────────────────────────────────────────
# 공통 헬퍼
# ─────────────────────────────────────────────

def resolve_mode(mode: str | None, seed: int | None) -> str:
    mode = mode or "branch"
    if mode not in ("branch", "sample"):
        raise ValidationError(f"알 수 없는 측정 모드: {mode}", detail={"supported": ["branch", "sample"]})
    if mode == "sample" and seed is None:
        raise ValidationError("sample 모드에는 --seed 가 필요합니다.")
    return mode


def make_measurer(mode: str, seed: int | None, offset: int = 0) -> Measurer:
    """스윕 점마다 시드를 ``seed + offset`` 으로 갈라 독립 스트림을 씁니다."""
    if mode == "sample":
        return SampleMeasurer(int(seed) + offset)
    return BranchMeasurer()


def _lattice(
    options: ExperimentOptions, default: tuple[int, int], boundary: BoundaryKind
) -> Lattice:
    n, m = options.lattice or default
    return build_square_lattice(n, m, options.boundary or boundary)


def _require_group(options: ExperimentOptions, name: str, experiment: str) -> FiniteGroup:
    if options.group != name:
        raise ValidationError(
            f"{experiment} 실험은 --group {name} 에서만 실행됩니다.",
            detail={"experiment": experiment, "group": options.group},
        )
    return build_group(name)


def sweep(points: Sequence[T], run: Callable[[int, T], R], jobs: int) -> list[R]:
    """점마다 ``run(index, point)`` 를 병렬 실행하고 파라미터 순서로 반환합니다."""
    if jobs <= 1 or len(points) <= 1:
        return [run(k, p) for k, p in enumerate(points)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, range(len(points)), points))


def _channels(prefix: str, distribution: FusionDistribution) -> dict[str, float]:
    return {f"{prefix}.{k}": v for k, v in distribution.channels.items()}


def canonical(value: Any) -> Any:
    """12 유효숫자 반올림, -0 정규화, numpy 스칼라/튜플 변환"""
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, complex):
        return [canonical(value.real), canonical(value.imag)]
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        rounded = float(f"{value:.{SIGNIFICANT_DIGITS}g}")
        return 0.0 if rounded == 0 else rounded
    return str(value)


# ─────────────────────────────────────────────
# 이름 붙은 실험
# ─────────────────────────────────────────────

ExperimentOutput = tuple[list[LogEntry], dict[str, Any], dict[str, list[dict[str, Any]]]]


def _prepare_gs(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    group = build_group(options.group)
    lattice = _lattice(options, (2, 2), BoundaryKind.OPEN)
    measurer = make_measurer(mode, options.seed)
    summary: dict[str, Any] = {"policy": CorrectionPolicy(options.policy).value}

    if lattice.boundary is BoundaryKind.ROUGH_SMOOTH:
        _require_group(options, "z2", "prepare-gs (rough-smooth)")
        code = ToricCode(lattice, measurer=measurer, prune_epsilon=options.prune_epsilon)
        state = code.prepare_toric_code()
        table = code.stabilizer_table(state)
        summary["oracle_overlap"] = overlap_magnitude(state, code.code_state_oracle())
        log = code.log.entries
    else:
        qd = QuantumDouble(group, lattice, measurer=measurer, prune_epsilon=options.prune_epsilon)
        state = qd.prepare_ground_state(options.policy)
        table = qd.stabilizer_table(state)
        if len(lattice.edges) <= simulation_settings.oracle_max_edges:
            summary["oracle_overlap"] = overlap_magnitude(state, qd.ground_state_oracle())
        log = qd.log.entries

    summary["support_size"] = state.support_size
    summary["path_probability"] = measurer.path_probability
    summary.update(table)
    return log, summary, {}


def _toric_fig3(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    _require_group(options, "z2", "toric-fig3")
    lattice = _lattice(options, (3, 3), BoundaryKind.ROUGH_SMOOTH)
    code = ToricCode(
        lattice, measurer=make_measurer(mode, options.seed), prune_epsilon=options.prune_epsilon
    )
    coupling = options.couplings[0] if options.couplings else 0.0
    prepared = code.prepare_toric_code()
    main = code.interferometry_fig3(prepared, coupling=coupling, t_braid=options.t_braid)
    control = code.interferometry_fig3(
        prepared, coupling=coupling, t_braid=options.t_braid, enclose=False
    )
    summary = {
        "a2_outcome": main.outcome,
        "a2_probability": main.probability,
        "p_minus": main.p_minus,
        "measured_phase": main.measured_phase,
        **{f"ledger.{k}": v for k, v in main.ledger.as_dict().items()},
        "control_outcome": control.outcome,
        "control_p_minus": control.p_minus,
    }
    return code.log.entries, summary, {}


def _reference_phase(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    _require_group(options, "z2", "reference-phase")
    lattice = _lattice(options, (3, 3), BoundaryKind.ROUGH_SMOOTH)
    couplings = options.couplings or [0.0, 0.5, 1.0, 2.0]

    def run(k: int, coupling: float) -> tuple[list[LogEntry], dict[str, Any]]:
        code = ToricCode(
            lattice,
            measurer=make_measurer(mode, options.seed, k),
            prune_epsilon=options.prune_epsilon,
        )
        result = code.reference_phase_experiment(coupling, options.t_braid)
        row = {
            "U": coupling,
            "t_braid": result.main.elapsed,
            "main_phase": result.main.total,
            "reference_phase": result.reference.total,
            "phi_d": result.main.dynamical,
            "phi_s": result.statistical_phase,
        }
        return code.log.entries, row

    outputs = sweep(couplings, run, options.jobs or simulation_settings.default_jobs)
    rows = [row for _, row in outputs]
    phases = [row["phi_s"] for row in rows]
    summary = {"points": len(rows), "phi_s_min": min(phases), "phi_s_max": max(phases)}
    return [e for log, _ in outputs for e in log], summary, {"sweep": rows}


def _s3_interfere(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    group = _require_group(options, "s3", "s3-interfere")
    lattice = _lattice(options, (2, 2), BoundaryKind.OPEN)
    elements = options.h or ["e", "c+", "t0"]
    for h in elements:
        group.resolve(h)
    pair = [(0, 0), (0, 1)]

    def run(k: int, h: str) -> tuple[list[LogEntry], dict[str, Any]]:
        qd = QuantumDouble(
            group,
            lattice,
            measurer=make_measurer(mode, options.seed, k),
            prune_epsilon=options.prune_epsilon,
        )
        state = qd.prepare_ground_state(options.policy)
        state, survival = qd.create_electric_vacuum_pair(state, "R2", pair)
        result = qd.single_face_interference(state, h, pair[0])
        row = {
            "h": result.element,
            "contrast": result.contrast,
            "overlap_real": result.overlap_real,
            "overlap_imag": result.overlap_imag,
            "survival": survival,
        }
        return qd.log.entries, row

    outputs = sweep(elements, run, options.jobs or simulation_settings.default_jobs)
    rows = [row for _, row in outputs]
    summary = {f"contrast.{row['h']}": row["contrast"] for row in rows}
    return [e for log, _ in outputs for e in log], summary, {"sweep": rows}


def _magnetic_fusion(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    group = build_group(options.group)
    lattice = _lattice(options, (3, 4), BoundaryKind.OPEN)
    if lattice.n_rows < 3 or lattice.n_cols < 4:
        raise ValidationError(
            "magnetic-fusion 은 3×4 이상의 열린 격자가 필요합니다.",
            detail={"lattice": [lattice.n_rows, lattice.n_cols]},
        )
    class_rep = options.class_rep or ("c+" if group.name == "s3" else "g1")
    qd = QuantumDouble(
        group, lattice, measurer=make_measurer(mode, options.seed), prune_epsilon=options.prune_epsilon
    )
    pair = ((0, 0), (0, 1))
    loop = [(0, 1), (1, 1), (1, 2), (0, 2), (0, 1)]
    enclosed = (1, 2)
    if options.background == "ground":
        state = qd.prepare_ground_state(options.policy)
    elif options.background == "local":
        # 닫힌 이동 = 고리 안 꼭짓점의 게이지 변환
        state = normalize(qd.apply_vertex_projector(qd.initial_state(), enclosed))
    else:
        raise ValidationError(
            f"알 수 없는 배경: {options.background}", detail={"supported": ["local", "ground"]}
        )

    state = qd.create_magnetic_vacuum_pair(state, class_rep, pair)
    before = qd.fuse_magnetic(state, pair)
    for f, f_next in zip(loop, loop[1:]):
        state = qd.transport_magnetic(state, f, f_next)
    after = qd.fuse_magnetic(state, pair)
    summary = {
        "class": class_rep,
        "background": options.background,
        "transport_steps": len(loop) - 1,
        "vacuum_before_transport": before.vacuum,
        "vacuum_after_transport": after.vacuum,
        "support_size": state.support_size,
    }
    return qd.log.entries, summary, {}


def _electric_fusion(options: ExperimentOptions, mode: str) -> ExperimentOutput:
    group = build_group(options.group)
    lattice = _lattice(options, (2, 2), BoundaryKind.OPEN)
    irrep = options.irrep or ("R1-" if group.name == "s3" else "sign")
    qd = QuantumDouble(
        group, lattice, measurer=make_measurer(mode, options.seed), prune_epsilon=options.prune_epsilon
    )
    path = [(0, 0), (0, 1)]
    state = qd.prepare_ground_state(options.policy)
    state, survival = qd.create_electric_vacuum_pair(state, irrep, path)
    endpoint = qd.fuse_electric(state, path)
    total = qd.fuse_electric_pair(state, path)
    summary = {
        "irrep": irrep,
        "survival": survival,
        **_channels("endpoint", endpoint),
        **_channels("pair", total),
        "pair_vacuum": total.vacuum,
    }
    return qd.log.entries, summary, {}


NAMED_EXPERIMENTS: dict[str, Callable[[ExperimentOptions, str], ExperimentOutput]] = {
    "prepare-gs": _prepare_gs,
    "toric-fig3": _toric_fig3,
    "reference-phase": _reference_phase,
    "s3-interfere": _s3_interfere,
    "magnetic-fusion": _magnetic_fusion,
    "electric-fusion": _electric_fusion,
}


def _metadata(options: ExperimentOptions, mode: str, **extra: Any) -> dict[str, Any]:
    eps = simulation_settings.prune_epsilon if options.prune_epsilon is None else options.prune_epsilon
    return {
        "version": __version__,
        "mode": mode,
        "seed": options.seed,
        "prune_epsilon": eps,
        "group": options.group,
        **extra,
    }


def run_named_experiment(name: str, options: ExperimentOptions | None = None) -> ResultDocument:
    """이름 붙은 실험을 실행해 결과 문서를 만듭니다."""
    options = options or ExperimentOptions()
    if name not in NAMED_EXPERIMENTS:
        raise ValidationError(
            f"알 수 없는 실험: {name}", detail={"supported": sorted(NAMED_EXPERIMENTS)}
        )
    mode = resolve_mode(options.mode, options.seed)
    logger.info("실험 시작: %s (group=%s, mode=%s)", name, options.group, mode)
    log, summary, tables = NAMED_EXPERIMENTS[name](options, mode)
    return ResultDocument(
        script=f"run {name}",
        log=log,
        summary=summary,
        tables=tables,
        metadata=_metadata(
            options,
            mode,
            experiment=name,
            lattice=list(options.lattice) if options.lattice else None,
            boundary=options.boundary,
            policy=options.policy,
            h=options.h,
            couplings=options.couplings,
            t_braid=options.t_braid,
        ),
    )


# ─────────────────────────────────────────────
# 스크립트 실행
# ─────────────────────────────────────────────

def _run_quantum_double_ops(
    script: ProtocolScript, qd: QuantumDouble, summary: dict[str, Any]
) -> SparseState:
    state = qd.initial_state()
    for k, op in enumerate(script.operations):
        p = op.params
        key = f"{k}.{op.name}"
        if op.name == "prepare_ground_state":
            state = qd.prepare_ground_state(p.get("policy", script.policy), state)
        elif op.name == "gauge_transform":
            state = qd.gauge_transform(state, p["v"], p["g"])
        elif op.name == "measure_vertex":
            r, state = qd.measure_vertex(state, p["v"])
            summary[f"{key}.outcome"] = r
        elif op.name == "create_magnetic_vacuum_pair":
            state = qd.create_magnetic_vacuum_pair(state, p["class"], tuple(p["faces"]))
        elif op.name == "transport_magnetic":
            state = qd.transport_magnetic(state, p["from"], p["to"])
        elif op.name == "fuse_magnetic":
            summary.update(_channels(key, qd.fuse_magnetic(state, tuple(p["faces"]), p.get("class"))))
        elif op.name == "create_electric_vacuum_pair":
            state, survival = qd.create_electric_vacuum_pair(state, p["irrep"], p["path"])
            summary[f"{key}.survival"] = survival
        elif op.name == "fuse_electric":
            summary.update(_channels(key, qd.fuse_electric(state, p["path"])))
        elif op.name == "fuse_electric_pair":
            summary.update(_channels(key, qd.fuse_electric_pair(state, p["path"])))
        elif op.name == "braid_flux_around_vertex":
            state = qd.braid_flux_around_vertex(state, p["h"], p["v"])
        elif op.name == "braid_electric_charge":
            state = qd.braid_electric_charge(state, p["irrep"], p["loop"])
        elif op.name == "single_face_interference":
            result = qd.single_face_interference(state, p["h"], p["v"])
            summary[f"{key}.contrast"] = result.contrast
            summary[f"{key}.overlap_real"] = result.overlap_real
            summary[f"{key}.overlap_imag"] = result.overlap_imag
    return state


def _run_toric_code_ops(
    script: ProtocolScript, code: ToricCode, summary: dict[str, Any]
) -> SparseState:
    state = code.initial_state()
    for k, op in enumerate(script.operations):
        p = op.params
        key = f"{k}.{op.name}"
        if op.name == "prepare_toric_code":
            state = code.prepare_toric_code(state)
        elif op.name == "prepare_ancilla":
            state = code.prepare_ancilla(state, p["name"], ANCILLA_STATES[p["state"]])
        elif op.name == "controlled_pauli":
            state = code.controlled_pauli(state, p["ancilla"], p["target"], p["kind"])
        elif op.name == "measure_ancilla":
            sign, state = code.measure_ancilla(state, p["name"], p.get("basis", "x"))
            entry = code.log.entries[-1]
            summary[f"{key}.outcome"] = sign
            summary[f"{key}.p_minus"] = entry.values["p_minus"]
        elif op.name == "measure_stabilizer":
            sign, state = code.measure_stabilizer(state, p["kind"], p["at"])
            summary[f"{key}.outcome"] = sign
        elif op.name == "apply_string":
            state = code.apply_string(state, p["kind"], p["path"])
        elif op.name == "measure_string":
            sign, state = code.measure_string(state, p["kind"], p["path"])
            summary[f"{key}.outcome"] = sign
        elif op.name == "create_defect_superposition":
            state = code.create_defect_superposition(
                state, p["kind"], p["path"], p.get("ancilla", "A2")
            )
        elif op.name == "measure_logical_z":
            sign, state = code.measure_logical_z(state)
            summary[f"{key}.outcome"] = sign
        elif op.name == "apply_logical_x":
            state = code.apply_logical_x(state)
        elif op.name == "interferometry_fig3":
            result = code.interferometry_fig3(
                state,
                coupling=p.get("U", 0.0),
                t_braid=p.get("t_braid"),
                enclose=p.get("enclose", True),
                windings=int(p.get("windings", 1)),
            )
            summary[f"{key}.outcome"] = result.outcome
            summary[f"{key}.p_minus"] = result.p_minus
            summary.update({f"{key}.{n}": v for n, v in result.ledger.as_dict().items()})
        elif op.name == "syndrome":
            table, state = code.syndrome(state)
            summary.update({f"{key}.{label}": sign for label, sign in table.items()})
    return state


def run_script(script: ProtocolScript, options: ExperimentOptions | None = None) -> ResultDocument:
    """검증된 스크립트를 순서대로 실행합니다. 옵션의 mode/seed 가 있으면 헤더보다 우선합니다."""
    options = options or ExperimentOptions()
    seed = options.seed if options.seed is not None else script.seed
    mode = resolve_mode(options.mode or script.mode, seed)
    measurer = make_measurer(mode, seed)
    n, m = script.lattice
    lattice = build_square_lattice(n, m, script.boundary)
    summary: dict[str, Any] = {}

    if script.model == "toric-code":
        code = ToricCode(lattice, measurer=measurer, prune_epsilon=options.prune_epsilon)
        state = _run_toric_code_ops(script, code, summary)
        table = code.stabilizer_table(state)
        log = code.log.entries
    else:
        qd = QuantumDouble(
            build_group(script.group), lattice, measurer=measurer, prune_epsilon=options.prune_epsilon
        )
        state = _run_quantum_double_ops(script, qd, summary)
        table = qd.stabilizer_table(state)
        log = qd.log.entries

    summary.update({f"final.{k}": v for k, v in table.items()})
    summary["final.support_size"] = state.support_size
    group_options = options.model_copy(update={"group": script.group, "seed": seed})
    return ResultDocument(
        script=script.source,
        log=log,
        summary=summary,
        metadata=_metadata(
            group_options,
            mode,
            model=script.model,
            lattice=[n, m],
            boundary=script.boundary,
        ),
    )


# ─────────────────────────────────────────────
# 출력
# ─────────────────────────────────────────────

OUTPUT_FORMATS = ("json", "csv-summary")


def emit(document: ResultDocument, fmt: str = "json") -> str:
    """결과 문서를 문자열로 직렬화합니다 (같은 문서 → 같은 바이트)."""
    if fmt == "json":
        data = canonical(document.model_dump(mode="python"))
        return json.dumps(data, sort_keys=True, indent=settings.json_indent, ensure_ascii=False) + "\n"
    if fmt == "csv-summary":
        if "sweep" in document.tables:
            frame = pd.DataFrame(canonical(document.tables["sweep"]))
        else:
            summary = canonical(document.summary)
            frame = pd.DataFrame(
                {"key": sorted(summary), "value": [summary[k] for k in sorted(summary)]}
            )
        return frame.to_csv(index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    raise ValidationError(f"알 수 없는 출력 형식: {fmt}", detail={"supported": list(OUTPUT_FORMATS)})
