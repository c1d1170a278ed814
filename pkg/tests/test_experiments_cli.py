"""실험 실행기, 스크립트 파서, CLI 테스트"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from src.exceptions import ScriptValidationError, ValidationError
from src.experiments import ExperimentOptions, emit, parse_script, run_named_experiment, run_script
from src.experiments.cli import main
from src.experiments.runner import canonical, sweep

S3_SCRIPT = """\
# R2 전하 쌍 간섭
group: s3
lattice: 2 2
mode: branch
ops:
prepare_ground_state policy=postselect
create_electric_vacuum_pair irrep=R2 path=v:0,0/v:0,1
single_face_interference v=v:0,0 h=c+
"""

TORIC_SCRIPT = """\
group: z2
lattice: 3 3
boundary: rough-smooth
ops:
prepare_toric_code
interferometry_fig3 U=0 enclose=true
measure_logical_z
"""

ANNIHILATING_SCRIPT = """\
group: s3
lattice: 2 2
ops:
gauge_transform v=v:0,0 g=t0
create_electric_vacuum_pair irrep=R2 path=v:0,0/v:0,1
"""


def _error(capsys) -> dict:
    """stderr 마지막 줄의 오류 JSON (앞선 줄은 로그)"""
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# ─────────────────────────────────────────────
# 스크립트 파서
# ─────────────────────────────────────────────


class TestParseScript:
    def test_quantum_double_script(self):
        script = parse_script(S3_SCRIPT)
        assert script.group == "s3"
        assert script.model == "quantum-double"
        assert [op.name for op in script.operations] == [
            "prepare_ground_state",
            "create_electric_vacuum_pair",
            "single_face_interference",
        ]
        assert script.operations[1].params["path"] == [(0, 0), (0, 1)]
        assert script.operations[1].line == 7

    def test_rough_smooth_defaults_to_toric_code(self):
        script = parse_script(TORIC_SCRIPT)
        assert script.model == "toric-code"
        assert script.operations[1].params == {"U": 0.0, "enclose": True}

    def test_missing_face_reported_with_line(self):
        text = S3_SCRIPT + "fuse_magnetic faces=f:0,0/f:5,5\n"
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script(text)
        errors = exc_info.value.detail["errors"]
        assert errors[0]["line"] == 9
        assert "f:5,5" in errors[0]["error"]

    def test_all_errors_collected(self):
        text = "\n".join(
            [
                "group: s3",
                "lattice: 2 2",
                "colour: red",
                "ops:",
                "teleport v=v:0,0",
                "gauge_transform v=v:0,0",
                "measure_vertex v=v:0,0 speed=3",
            ]
        )
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script(text)
        lines = [e["line"] for e in exc_info.value.detail["errors"]]
        assert lines == [3, 5, 6, 7]

    def test_bad_lattice_header(self):
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script("lattice: 2\nops:\n")
        assert "N M" in exc_info.value.detail["errors"][0]["error"]

    def test_unknown_model(self):
        with pytest.raises(ScriptValidationError):
            parse_script("model: ising\nops:\n")

    def test_toric_ops_rejected_in_quantum_double(self):
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script("group: z2\nops:\nprepare_toric_code\n")
        assert "등록되지 않은 연산" in exc_info.value.detail["errors"][0]["error"]

    def test_unknown_ancilla(self):
        text = TORIC_SCRIPT + "measure_ancilla name=A7\n"
        with pytest.raises(ScriptValidationError):
            parse_script(text)

    def test_quantum_double_values_checked_before_run(self):
        text = "\n".join(
            [
                "group: s3",
                "lattice: 2 3",
                "ops:",
                "prepare_ground_state policy=bogus",
                "gauge_transform v=v:0,0 g=zz",
                "create_electric_vacuum_pair irrep=R9 path=v:0,0/v:0,1",
                "create_magnetic_vacuum_pair class=e faces=f:0,0/f:0,1",
                "single_face_interference v=v:0,0 h=c+",
            ]
        )
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script(text)
        errors = exc_info.value.detail["errors"]
        assert [e["line"] for e in errors] == [4, 5, 6, 7]
        assert "R9" in errors[2]["error"]

    def test_toric_values_checked_before_run(self):
        text = TORIC_SCRIPT + "\n".join(
            [
                "prepare_ancilla name=A0 state=2",
                "measure_ancilla name=A1 basis=y",
                "measure_stabilizer kind=A at=f:0,0",
                "measure_stabilizer kind=C at=v:1,1",
                "interferometry_fig3 windings=0",
            ]
        )
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script(text)
        lines = [e["line"] for e in exc_info.value.detail["errors"]]
        assert lines == [8, 9, 10, 11, 12]

    @pytest.mark.parametrize(
        "text, line",
        [
            ("group: q8\nops:\n", 1),
            ("group: z2\nmode: fast\nops:\n", 2),
            ("group: z2\nlattice: 2 2\npolicy: bogus\nops:\n", 3),
        ],
    )
    def test_bad_header_value_reported_with_line(self, text, line):
        with pytest.raises(ScriptValidationError) as exc_info:
            parse_script(text)
        assert exc_info.value.detail["errors"][0]["line"] == line

    def test_policy_alias_accepted(self):
        text = "group: z2\npolicy: paper-correction\nops:\nprepare_ground_state policy=paper-correction\n"
        script = parse_script(text)
        assert script.policy == "paper-correction"
        assert script.operations[0].params["policy"] == "paper-correction"

    def test_script_error_exit_code(self):
        assert ScriptValidationError().exit_code == 2


# ─────────────────────────────────────────────
# 이름 붙은 실험
# ─────────────────────────────────────────────


class TestNamedExperiments:
    def test_prepare_gs(self):
        doc = run_named_experiment("prepare-gs")
        assert doc.summary["oracle_overlap"] == pytest.approx(1.0, abs=1e-10)
        assert doc.summary["support_size"] == 8
        assert doc.summary["A(v:0,0)"] == pytest.approx(1.0)
        assert doc.script == "run prepare-gs"

    def test_prepare_gs_rough_smooth(self):
        doc = run_named_experiment(
            "prepare-gs", ExperimentOptions(lattice=(2, 2), boundary="rough-smooth")
        )
        assert doc.summary["oracle_overlap"] == pytest.approx(1.0, abs=1e-10)

    def test_toric_fig3(self):
        summary = run_named_experiment("toric-fig3").summary
        assert summary["a2_outcome"] == -1
        assert summary["p_minus"] == pytest.approx(1.0, abs=1e-10)
        assert summary["ledger.phi_s"] == pytest.approx(math.pi, abs=1e-9)
        assert summary["control_outcome"] == 1

    def test_reference_phase_sweep(self):
        doc = run_named_experiment(
            "reference-phase", ExperimentOptions(couplings=[0.0, 1.0], t_braid=4.0)
        )
        rows = doc.tables["sweep"]
        assert [row["U"] for row in rows] == [0.0, 1.0]
        assert all(row["phi_s"] == pytest.approx(math.pi, abs=1e-9) for row in rows)
        assert rows[1]["phi_d"] == pytest.approx(16.0, abs=1e-9)

    def test_s3_interfere(self):
        doc = run_named_experiment("s3-interfere", ExperimentOptions(group="s3"))
        summary = doc.summary
        assert summary["contrast.e"] == pytest.approx(1.0, abs=1e-10)
        assert summary["contrast.c+"] == pytest.approx(0.25, abs=1e-10)
        assert summary["contrast.t0"] == pytest.approx(0.0, abs=1e-10)
        assert [row["survival"] for row in doc.tables["sweep"]] == pytest.approx([0.25] * 3)

    def test_s3_interfere_requires_s3(self):
        with pytest.raises(ValidationError, match="s3"):
            run_named_experiment("s3-interfere", ExperimentOptions(group="z2"))

    def test_magnetic_fusion(self):
        summary = run_named_experiment("magnetic-fusion", ExperimentOptions(group="s3")).summary
        assert summary["vacuum_before_transport"] == pytest.approx(1.0, abs=1e-10)
        assert summary["vacuum_after_transport"] == pytest.approx(1.0, abs=1e-10)
        assert summary["transport_steps"] == 4

    def test_electric_fusion(self):
        summary = run_named_experiment("electric-fusion", ExperimentOptions(group="s3")).summary
        assert summary["survival"] == pytest.approx(1.0)
        assert summary["endpoint.R1-"] == pytest.approx(1.0, abs=1e-10)
        assert summary["pair_vacuum"] == pytest.approx(1.0, abs=1e-10)

    def test_unknown_experiment(self):
        with pytest.raises(ValidationError, match="알 수 없는 실험"):
            run_named_experiment("teleport")

    def test_sample_mode_requires_seed(self):
        with pytest.raises(ValidationError, match="seed"):
            run_named_experiment("prepare-gs", ExperimentOptions(mode="sample"))

    def test_parallel_sweep_matches_serial(self):
        serial = run_named_experiment("s3-interfere", ExperimentOptions(group="s3", jobs=1))
        parallel = run_named_experiment("s3-interfere", ExperimentOptions(group="s3", jobs=3))
        assert emit(serial) == emit(parallel)


# ─────────────────────────────────────────────
# 스크립트 실행
# ─────────────────────────────────────────────


class TestRunScript:
    def test_quantum_double_script(self):
        doc = run_script(parse_script(S3_SCRIPT))
        assert doc.summary["1.create_electric_vacuum_pair.survival"] == pytest.approx(0.25)
        assert doc.summary["2.single_face_interference.contrast"] == pytest.approx(0.25, abs=1e-10)
        assert doc.summary["final.B(f:0,0)"] == pytest.approx(1.0)
        assert doc.metadata["group"] == "s3"
        assert doc.script == S3_SCRIPT

    def test_toric_script(self):
        doc = run_script(parse_script(TORIC_SCRIPT))
        assert doc.summary["1.interferometry_fig3.outcome"] == -1
        assert doc.summary["2.measure_logical_z.outcome"] == 1
        assert doc.metadata["model"] == "toric-code"

    def test_seeded_sample_runs_are_identical(self):
        options = ExperimentOptions(mode="sample", seed=7)
        first = emit(run_script(parse_script(TORIC_SCRIPT), options))
        second = emit(run_script(parse_script(TORIC_SCRIPT), options))
        assert first == second


# ─────────────────────────────────────────────
# 직렬화
# ─────────────────────────────────────────────


class TestSerialization:
    def test_canonical(self):
        assert canonical(-0.0) == 0.0
        assert canonical(1 / 3) == 0.333333333333
        assert canonical(np.float64(2.5)) == 2.5
        assert canonical(1 + 2j) == [1.0, 2.0]
        assert canonical((1, "a", None, True)) == [1, "a", None, True]
        assert canonical({1: float("nan")}) == {"1": "nan"}

    def test_json_is_sorted_and_terminated(self):
        text = emit(run_named_experiment("prepare-gs"))
        assert text.endswith("}\n")
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert data["metadata"]["version"]

    def test_csv_summary_sweep(self):
        doc = run_named_experiment("s3-interfere", ExperimentOptions(group="s3"))
        lines = emit(doc, "csv-summary").splitlines()
        assert lines[0] == "h,contrast,overlap_real,overlap_imag,survival"
        assert len(lines) == 1 + 3
        assert lines[1].startswith("e,1,")

    def test_csv_summary_key_value(self):
        lines = emit(run_named_experiment("prepare-gs"), "csv-summary").splitlines()
        assert lines[0] == "key,value"
        assert any(line.startswith("support_size,8") for line in lines)

    def test_unknown_format(self):
        with pytest.raises(ValidationError, match="출력 형식"):
            emit(run_named_experiment("prepare-gs"), "xml")

    def test_sweep_keeps_parameter_order(self):
        assert sweep([3, 1, 2], lambda k, p: (k, p), jobs=3) == [(0, 3), (1, 1), (2, 2)]


# ─────────────────────────────────────────────
# CLI
# ─────────────────────────────────────────────


class TestCli:
    def test_run_to_stdout(self, capsys):
        assert main(["run", "toric-fig3"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["a2_outcome"] == -1

    def test_run_to_file(self, tmp_path):
        out = tmp_path / "result.json"
        assert main(["run", "electric-fusion", "--out", str(out)]) == 0
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["metadata"]["group"] == "s3"

    def test_determinism_across_invocations(self, tmp_path):
        script = tmp_path / "protocol.txt"
        script.write_text(TORIC_SCRIPT, encoding="utf-8")
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main(["script", str(script), "--mode", "sample", "--seed", "3", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_validation_error_exit_code(self, tmp_path, capsys):
        script = tmp_path / "bad.txt"
        script.write_text(S3_SCRIPT + "transport_magnetic from=f:0,0 to=f:9,9\n", encoding="utf-8")
        assert main(["script", str(script)]) == 2
        error = _error(capsys)
        assert error["code"] == "SCRIPT_VALIDATION_ERROR"
        assert "f:9,9" in error["detail"]["errors"][0]["error"]

    def test_protocol_error_exit_code(self, tmp_path, capsys):
        """χ_R2(t0) = 0 인 홀로노미 위 전하 생성은 상태를 소멸시킨다"""
        script = tmp_path / "zero.txt"
        script.write_text(ANNIHILATING_SCRIPT, encoding="utf-8")
        assert main(["script", str(script)]) == 3
        assert _error(capsys)["code"] == "ZERO_PROBABILITY"

    def test_group_flag_mismatch(self, tmp_path):
        script = tmp_path / "protocol.txt"
        script.write_text(S3_SCRIPT, encoding="utf-8")
        assert main(["script", str(script), "--group", "z2"]) == 2

    def test_missing_script_file(self, tmp_path, capsys):
        assert main(["script", str(tmp_path / "absent.txt")]) == 2
        assert _error(capsys)["code"] == "VALIDATION_ERROR"

    def test_sample_without_seed(self, capsys):
        assert main(["run", "prepare-gs", "--mode", "sample"]) == 2

    def test_policy_alias(self, capsys):
        assert main(["run", "prepare-gs", "--policy", "paper-correction"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["policy"] == "fourier-correction"

    def test_csv_format(self, capsys):
        assert main(["run", "reference-phase", "--U", "0", "1", "--format", "csv-summary"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "U,t_braid,main_phase,reference_phase,phi_d,phi_s"
        assert len(lines) == 3

    def test_unknown_experiment_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["run", "teleport"])
