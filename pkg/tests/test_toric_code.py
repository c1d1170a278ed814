"""ℤ₂ 토릭 코드 프로토콜 테스트

코드 준비, 결함 문자열, 최소 간섭계와 기준 위상, 논리 연산, 단일 오류 정정을 검증합니다.
"""

from __future__ import annotations

import math

import pytest

from src.engine import SampleMeasurer, enumerate_outcome_paths
from src.engine.state import overlap_magnitude, site_amplitudes
from src.exceptions import CorrectionFailedError, LatticeError, ValidationError
from src.group import z2
from src.lattice import build_square_lattice
from src.protocols import Pauli, PauliError, QuantumDouble, ToricCode


@pytest.fixture(scope="module")
def rough_code():
    """rough-smooth 3×3 코드 상태"""
    tc = ToricCode(build_square_lattice(3, 3, "rough-smooth"))
    return tc.prepare_toric_code()


def _rough() -> ToricCode:
    return ToricCode(build_square_lattice(3, 3, "rough-smooth"))


# ─────────────────────────────────────────────
# 코드 준비
# ─────────────────────────────────────────────


class TestPreparation:
    def test_all_stabilizers_plus_one(self, rough_code):
        table = _rough().stabilizer_table(rough_code)
        assert len(table) == 9 + 8
        assert all(v == pytest.approx(1.0, abs=1e-10) for v in table.values())

    def test_matches_oracle(self, rough_code):
        oracle = _rough().code_state_oracle()
        assert overlap_magnitude(rough_code, oracle) == pytest.approx(1.0, abs=1e-10)
        assert rough_code.support_size == 2**9

    def test_every_branch_converges(self):
        """모든 A 측정 결과 열에서 같은 코드 상태"""
        lattice = build_square_lattice(2, 2, "rough-smooth")
        oracle = ToricCode(lattice).code_state_oracle()

        def run(measurer):
            tc = ToricCode(lattice, measurer=measurer)
            return overlap_magnitude(tc.prepare_toric_code(), oracle)

        paths = enumerate_outcome_paths(run)
        assert len(paths) == 2**4
        assert sum(p.probability for p in paths) == pytest.approx(1.0)
        assert all(p.result == pytest.approx(1.0, abs=1e-10) for p in paths)

    def test_sampled_preparation(self):
        lattice = build_square_lattice(2, 3)
        for seed in range(4):
            tc = ToricCode(lattice, measurer=SampleMeasurer(seed))
            state = tc.prepare_toric_code()
            assert all(v == pytest.approx(1.0, abs=1e-10) for v in tc.stabilizer_table(state).values())
            assert tc.log.operations()[-1] == "prepare_toric_code"

    def test_energy(self, rough_code):
        assert _rough().energy(rough_code, 0.5) == pytest.approx(-0.5 * 17)

    def test_correction_edges(self):
        tc = _rough()
        assert tc.correction_edge((0, 0)).label == "e:0,0;1,0"
        assert tc.correction_edge((2, 2)).label == "e:2,2;2,3"
        assert ToricCode(build_square_lattice(2, 2)).correction_edge((1, 1)) is None

    def test_agrees_with_z2_quantum_double(self):
        """ℤ₂ 양자 이중 바닥상태와 토릭 코드 상태는 코드 큐비트 위에서 같다"""
        lattice = build_square_lattice(2, 3)
        qd = QuantumDouble(z2(), lattice)
        tc = ToricCode(lattice)
        gs = qd.prepare_ground_state()
        code = tc.prepare_toric_code()
        a = site_amplitudes(gs, qd.registry.code_sites)
        b = site_amplitudes(code, tc.registry.code_sites)
        assert set(a) == set(b)
        first = next(iter(a))
        phase = b[first] / a[first]
        assert abs(phase) == pytest.approx(1.0)
        for key, amp in a.items():
            assert b[key] == pytest.approx(phase * amp, abs=1e-10)


# ─────────────────────────────────────────────
# 파울리, 문자열, 결함
# ─────────────────────────────────────────────


class TestStringsAndDefects:
    def test_z_string_flips_endpoint_stars(self, rough_code):
        tc = _rough()
        state = tc.apply_string(rough_code, "Z", ["e:1,0;1,1", "e:1,1;1,2"])
        assert tc.stabilizer_value(state, "A", (1, 0)) == pytest.approx(-1.0)
        assert tc.stabilizer_value(state, "A", (1, 1)) == pytest.approx(1.0)
        assert tc.stabilizer_value(state, "A", (1, 2)) == pytest.approx(-1.0)

    def test_x_string_flips_faces(self, rough_code):
        tc = _rough()
        state = tc.apply_string(rough_code, Pauli.X, ["e:0,2;1,2"])
        assert tc.stabilizer_value(state, "B", (0, 2)) == pytest.approx(-1.0)
        assert tc.stabilizer_value(state, "B", (0, 3)) == pytest.approx(-1.0)

    def test_defect_superposition(self, rough_code):
        tc = _rough()
        state = tc.create_defect_superposition(rough_code, "U_X", ["e:0,2;1,2"])
        assert tc.stabilizer_value(state, "B", (0, 2)) == pytest.approx(0.0, abs=1e-10)

    def test_measure_string_is_projective(self, rough_code):
        tc = _rough()
        sign, state = tc.measure_string(rough_code, "Z", ["e:0,0;0,1"])
        again, _ = tc.measure_string(state, "Z", ["e:0,0;0,1"])
        assert sign == again

    def test_measure_stabilizer_on_code(self, rough_code):
        tc = _rough()
        sign, _ = tc.measure_stabilizer(rough_code, "B", (1, 1))
        assert sign == 1
        assert tc.log.entries[-1].probability == pytest.approx(1.0)

    def test_measure_ancilla_values(self, rough_code):
        tc = _rough()
        state = tc.prepare_ancilla(rough_code, "A0", [2**-0.5, 2**-0.5])
        sign, _ = tc.measure_ancilla(state, "A0", "x")
        assert sign == 1
        assert tc.log.entries[-1].values["p_minus"] == pytest.approx(0.0, abs=1e-12)

    def test_invalid_arguments(self, rough_code):
        tc = _rough()
        with pytest.raises(ValidationError, match="파울리"):
            tc.pauli("Y", "e:0,0;0,1")
        with pytest.raises(ValidationError, match="같습니다"):
            tc.controlled_pauli(rough_code, "A0", "A0", "X")
        with pytest.raises(ValidationError, match="기저"):
            tc.measure_ancilla(rough_code, "A0", "y")
        with pytest.raises(ValidationError, match="비어"):
            tc.apply_string(rough_code, "Z", [])
        with pytest.raises(ValidationError, match="안정자 종류"):
            tc.measure_stabilizer(rough_code, "C", (0, 0))
        with pytest.raises(LatticeError, match="간선 표기"):
            tc.resolve_edge("v:0,0")


# ─────────────────────────────────────────────
# 간섭계
# ─────────────────────────────────────────────


class TestInterferometry:
    def test_enclosed_charge_gives_minus(self, rough_code):
        result = _rough().interferometry_fig3(rough_code)
        assert result.outcome == -1
        assert result.p_minus == pytest.approx(1.0, abs=1e-10)
        assert result.probability == pytest.approx(1.0, abs=1e-10)
        assert result.ledger.statistical == pytest.approx(math.pi, abs=1e-9)

    def test_control_without_charge_gives_plus(self, rough_code):
        result = _rough().interferometry_fig3(rough_code, enclose=False)
        assert result.outcome == 1
        assert result.p_minus == pytest.approx(0.0, abs=1e-10)
        assert result.ledger.statistical == pytest.approx(0.0, abs=1e-9)

    def test_double_winding_gives_plus(self, rough_code):
        result = _rough().interferometry_fig3(rough_code, windings=2)
        assert result.outcome == 1
        assert result.p_minus == pytest.approx(0.0, abs=1e-10)

    def test_reference_phase_cancels_dynamics(self):
        tc = _rough()
        result = tc.reference_phase_experiment(coupling=1.0, t_braid=4.0)
        assert result.statistical_phase == pytest.approx(math.pi, abs=1e-9)
        assert result.main.dynamical == pytest.approx(16.0, abs=1e-9)
        assert result.reference.dynamical == pytest.approx(16.0, abs=1e-9)
        assert result.main.geometric == 0.0

    @pytest.mark.parametrize("coupling", [0.0, 0.5, 2.0])
    def test_reference_phase_sweep(self, coupling):
        result = _rough().reference_phase_experiment(coupling=coupling)
        assert result.statistical_phase == pytest.approx(math.pi, abs=1e-9)

    def test_requires_rough_smooth(self):
        tc = ToricCode(build_square_lattice(3, 3))
        with pytest.raises(LatticeError, match="rough-smooth"):
            tc.interferometry_fig3()

    def test_invalid_parameters(self, rough_code):
        tc = _rough()
        with pytest.raises(ValidationError, match="U"):
            tc.interferometry_fig3(rough_code, coupling=-1.0)
        with pytest.raises(ValidationError, match="감는 횟수"):
            tc.interferometry_fig3(rough_code, windings=0)


# ─────────────────────────────────────────────
# 논리 큐비트와 오류 정정
# ─────────────────────────────────────────────


class TestLogicalAndCorrection:
    def test_logical_z_and_x(self, rough_code):
        tc = _rough()
        sign, state = tc.logical_ops(rough_code, "measure_Z_L")
        assert sign == 1
        flipped = tc.logical_ops(state, "apply_X_L")
        sign, _ = tc.measure_logical_z(flipped)
        assert sign == -1
        assert tc.log.entries[-1].probability == pytest.approx(1.0)

    def test_unknown_logical_op(self, rough_code):
        with pytest.raises(ValidationError, match="논리 연산"):
            _rough().logical_ops(rough_code, "apply_Y_L")

    def test_error_syndrome_shapes(self):
        tc = _rough()
        edge = tc.resolve_edge("e:1,0;1,1")
        assert tc.error_syndrome(PauliError(Pauli.Z, edge)) == {"A(v:1,0)", "A(v:1,1)"}
        assert tc.error_syndrome(PauliError(Pauli.X, edge)) == {"B(f:0,1)", "B(f:1,1)"}
        half = tc.resolve_edge("e:0,-1;0,0")
        assert tc.error_syndrome(PauliError(Pauli.Z, half)) == {"A(v:0,0)"}

    @pytest.mark.parametrize(
        "kind, edge",
        [
            (Pauli.X, "e:0,1;1,1"),
            (Pauli.X, "e:2,2;2,3"),
            (Pauli.Z, "e:1,1;1,2"),
            (Pauli.Z, "e:2,-1;2,0"),
        ],
    )
    def test_single_error_corrected(self, rough_code, kind, edge):
        tc = _rough()
        error = PauliError(kind, tc.resolve_edge(edge))
        damaged = tc.apply_error(rough_code, error)
        syndrome, damaged = tc.syndrome(damaged)
        decoded = tc.decode_single_error(syndrome)
        assert decoded == error
        repaired = tc.correct(damaged, decoded)
        assert overlap_magnitude(repaired, rough_code) == pytest.approx(1.0, abs=1e-10)

    def test_clean_syndrome(self, rough_code):
        tc = _rough()
        syndrome, _ = tc.syndrome(rough_code)
        assert all(sign == 1 for sign in syndrome.values())
        assert tc.decode_single_error(syndrome) is None
        assert tc.correct(rough_code, None) is rough_code

    def test_unexplained_syndrome(self):
        tc = _rough()
        syndrome = {"A(v:0,0)": -1, "A(v:2,2)": -1}
        with pytest.raises(CorrectionFailedError, match="단일 오류"):
            tc.decode_single_error(syndrome)
