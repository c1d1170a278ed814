"""양자 이중 D(G) 프로토콜 테스트

바닥상태 준비, 자기·전기 전하 생성/이동/융합, 브레이딩 불변성, 단일 면 간섭을 검증합니다.
"""

from __future__ import annotations

import numpy as np
import pytest

from src.engine import BranchMeasurer, SampleMeasurer, enumerate_outcome_paths
from src.engine.state import normalize, overlap_magnitude, site_value_distribution
from src.exceptions import (
    CorrectionFailedError,
    GroupError,
    LatticeError,
    ResourceLimitError,
    ValidationError,
)
from src.group import s3, z2
from src.lattice import build_square_lattice
from src.protocols import AnyonKind, CorrectionPolicy, QuantumDouble

PAIR_PATH = [(0, 0), (0, 1)]
SQUARE_LOOP = [(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)]


@pytest.fixture(scope="module")
def s3_ground():
    """S₃ 2×2 바닥상태 (사후 선택 준비)"""
    qd = QuantumDouble(s3(), build_square_lattice(2, 2))
    return qd.prepare_ground_state(CorrectionPolicy.POSTSELECT)


@pytest.fixture(scope="module")
def s3_ground_2x3():
    """S₃ 2×3 바닥상태 (변 7개)"""
    qd = QuantumDouble(s3(), build_square_lattice(2, 3))
    return qd.prepare_ground_state(CorrectionPolicy.POSTSELECT)


def _s3_qd() -> QuantumDouble:
    return QuantumDouble(s3(), build_square_lattice(2, 2))


# ─────────────────────────────────────────────
# 바닥상태
# ─────────────────────────────────────────────


class TestGroundState:
    def test_matches_oracle(self, s3_ground):
        oracle = _s3_qd().ground_state_oracle()
        assert overlap_magnitude(s3_ground, oracle) == pytest.approx(1.0, abs=1e-10)

    def test_support_is_flat_connections(self, s3_ground):
        """2×2 열린 격자: 평탄 연결 6³ = 216 개"""
        assert s3_ground.support_size == 216

    def test_all_stabilizers_satisfied(self, s3_ground):
        table = _s3_qd().stabilizer_table(s3_ground)
        assert len(table) == 4 + 1
        for label, value in table.items():
            assert value == pytest.approx(1.0, abs=1e-10), label

    def test_gauge_invariance(self, s3_ground):
        qd = _s3_qd()
        for v in [(0, 0), (1, 1)]:
            for g in ["c+", "t1"]:
                moved = qd.gauge_transform(s3_ground, v, g)
                assert overlap_magnitude(moved, s3_ground) == pytest.approx(1.0, abs=1e-10)

    def test_oracle_vertex_order_independent(self):
        qd = QuantumDouble(z2(), build_square_lattice(2, 3))
        a = qd.ground_state_oracle()
        b = qd.ground_state_oracle(list(reversed(qd.lattice.vertices)))
        assert overlap_magnitude(a, b) == pytest.approx(1.0, abs=1e-10)

    def test_oracle_resource_limit(self):
        qd = QuantumDouble(z2(), build_square_lattice(3, 3))
        with pytest.raises(ResourceLimitError):
            qd.ground_state_oracle()

    def test_fourier_correction_every_branch(self):
        """ℤ₂ 2×3: 모든 측정 결과 열에서 Z^r 보정이 바닥상태를 만든다"""
        lattice = build_square_lattice(2, 3)
        oracle = QuantumDouble(z2(), lattice).ground_state_oracle()

        def run(measurer):
            qd = QuantumDouble(z2(), lattice, measurer=measurer)
            state = qd.prepare_ground_state(CorrectionPolicy.FOURIER_CORRECTION)
            return overlap_magnitude(state, oracle)

        paths = enumerate_outcome_paths(run)
        assert len(paths) > 1
        assert sum(p.probability for p in paths) == pytest.approx(1.0)
        for path in paths:
            assert path.result == pytest.approx(1.0, abs=1e-10)

    def test_s3_2x3_matches_oracle(self, s3_ground_2x3):
        """S₃ 2×3 (변 7개): 평탄 연결 6⁵ 개의 균등 중첩"""
        oracle = QuantumDouble(s3(), build_square_lattice(2, 3)).ground_state_oracle()
        assert overlap_magnitude(s3_ground_2x3, oracle) == pytest.approx(1.0, abs=1e-10)
        assert s3_ground_2x3.support_size == 6**5

    def test_fourier_correction_on_s3_is_diagnosed(self):
        """S₃ 에서 Z^r 보정은 성공하면 바닥상태, 실패하면 결과 r 과 함께 CorrectionFailedError"""
        lattice = build_square_lattice(2, 2)
        oracle = QuantumDouble(s3(), lattice).ground_state_oracle()

        def run(measurer):
            qd = QuantumDouble(s3(), lattice, measurer=measurer)
            try:
                state = qd.prepare_ground_state(CorrectionPolicy.FOURIER_CORRECTION)
            except CorrectionFailedError as exc:
                return exc.detail
            return overlap_magnitude(state, oracle)

        paths = enumerate_outcome_paths(run)
        assert sum(p.probability for p in paths) == pytest.approx(1.0)
        assert paths[0].outcomes == (0, 0, 0)
        for path in paths:
            if isinstance(path.result, dict):
                assert path.result["outcome"] == path.outcomes[-1] != 0
                assert path.result["expectation"] < 1.0
            else:
                assert path.result == pytest.approx(1.0, abs=1e-10)

    def test_correction_policy_alias(self):
        assert CorrectionPolicy("paper-correction") is CorrectionPolicy.FOURIER_CORRECTION
        assert "paper-correction" in CorrectionPolicy.accepted_values()
        qd = QuantumDouble(z2(), build_square_lattice(2, 2))
        qd.prepare_ground_state("paper-correction")
        assert qd.log.entries[-1].parameters["policy"] == "fourier-correction"

    def test_sampled_preparation_logs_corrections(self):
        lattice = build_square_lattice(2, 3)
        for seed in range(5):
            qd = QuantumDouble(z2(), lattice, measurer=SampleMeasurer(seed))
            qd.prepare_ground_state("fourier-correction")
            ops = qd.log.operations()
            assert ops.count("measure_vertex") == len(qd.preparation_schedule())
            assert ops[-1] == "prepare_ground_state"

    def test_schedule_skips_last_vertex(self):
        qd = QuantumDouble(z2(), build_square_lattice(3, 3))
        vertices = [v for v, _ in qd.preparation_schedule()]
        assert len(vertices) == 8
        assert (2, 2) not in vertices

    def test_rough_smooth_rejected(self):
        with pytest.raises(LatticeError, match="열린"):
            QuantumDouble(z2(), build_square_lattice(2, 2, "rough-smooth"))

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            QuantumDouble(z2(), build_square_lattice(2, 2)).prepare_ground_state("verbatim")


# ─────────────────────────────────────────────
# 자기 전하
# ─────────────────────────────────────────────


class TestMagneticCharges:
    @pytest.mark.parametrize("group, rep", [(s3(), "c+"), (s3(), "t0"), (z2(), "g1")])
    def test_fresh_pair_fuses_to_vacuum(self, group, rep):
        qd = QuantumDouble(group, build_square_lattice(2, 3))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), rep, ((0, 0), (0, 1)))
        assert qd.fuse_magnetic(state, ((0, 0), (0, 1))).vacuum == pytest.approx(1.0, abs=1e-10)

    def test_flux_lies_in_class(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "t0", ((0, 0), (0, 1)))
        probs = qd.flux_distribution(state, (0, 0))
        np.testing.assert_allclose(probs[[3, 4, 5]], [1 / 3] * 3, atol=1e-12)
        assert qd.face_projector_expectation(state, (0, 0)) == pytest.approx(0.0)

    def test_phase_correction_branch(self):
        """측정 결과 k ≠ 0 도 보정 후 진공 쌍"""
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "t0", ((0, 0), (0, 1)), force=2)
        assert qd.log.entries[-1].outcome == 2
        assert qd.fuse_magnetic(state, ((0, 0), (0, 1))).vacuum == pytest.approx(1.0, abs=1e-10)

    def test_records(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        qd.create_magnetic_vacuum_pair(qd.initial_state(), "c-", ((0, 0), (0, 1)))
        assert [r.location for r in qd.records] == [((0, 0),), ((0, 1),)]
        assert all(r.kind is AnyonKind.MAGNETIC and r.label == "c+" for r in qd.records)

    def test_transport_updates_record(self):
        qd = QuantumDouble(s3(), build_square_lattice(3, 3))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "c+", ((0, 0), (0, 1)))
        state = qd.transport_magnetic(state, (0, 1), (1, 1))
        assert ((1, 1),) in [r.location for r in qd.records]
        assert qd.face_projector_expectation(state, (0, 1)) == pytest.approx(1.0)

    def test_transport_around_vertex_fuses_to_vacuum(self):
        """게이지 불변 배경 위에서 꼭짓점을 한 바퀴 돈 뒤에도 진공 융합"""
        qd = QuantumDouble(s3(), build_square_lattice(3, 4))
        state = normalize(qd.apply_vertex_projector(qd.initial_state(), (1, 2)))
        pair = ((0, 0), (0, 1))
        state = qd.create_magnetic_vacuum_pair(state, "c+", pair)
        loop = [(0, 1), (1, 1), (1, 2), (0, 2), (0, 1)]
        for f, f_next in zip(loop, loop[1:]):
            state = qd.transport_magnetic(state, f, f_next)
        assert qd.fuse_magnetic(state, pair).vacuum == pytest.approx(1.0, abs=1e-10)

    def test_flux_pair_on_partner_face_spoils_vacuum(self):
        """c+ 쌍의 두 번째 면에 t0 자속 쌍이 걸치면 진공 융합 확률은 0"""
        qd = QuantumDouble(s3(), build_square_lattice(2, 4))
        pair = ((0, 0), (0, 1))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "c+", pair)
        assert qd.fuse_magnetic(state, pair).vacuum == pytest.approx(1.0, abs=1e-10)
        state = qd.create_magnetic_vacuum_pair(state, "t0", ((0, 1), (0, 2)), force=0)
        assert qd.fuse_magnetic(state, pair, "c+").vacuum == pytest.approx(0.0, abs=1e-10)

    def test_gauge_away_from_base_keeps_vacuum(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        pair = ((0, 0), (0, 1))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "c+", pair)
        state = qd.gauge_transform(state, (0, 0), "t0")
        assert qd.fuse_magnetic(state, pair).vacuum == pytest.approx(1.0, abs=1e-10)

    def test_flux_to_ancilla_round_trip(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        state = qd.create_magnetic_vacuum_pair(qd.initial_state(), "c+", ((0, 0), (0, 1)))
        anc = qd.registry.face_site((0, 0))
        loaded = qd.flux_to_ancilla(state, (0, 0), (0, 0))
        np.testing.assert_allclose(
            site_value_distribution(loaded, anc),
            qd.flux_distribution(state, (0, 0), (0, 0)),
            atol=1e-12,
        )
        restored = qd.flux_to_ancilla(loaded, (0, 0), (0, 0), inverse=True)
        assert overlap_magnitude(restored, state) == pytest.approx(1.0, abs=1e-12)
        assert site_value_distribution(restored, anc)[0] == pytest.approx(1.0)

    def test_identity_class_rejected(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        with pytest.raises(ValidationError, match="항등"):
            qd.create_magnetic_vacuum_pair(qd.initial_state(), "e", ((0, 0), (0, 1)))

    def test_fuse_without_record(self):
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        with pytest.raises(ValidationError, match="기록"):
            qd.fuse_magnetic(qd.initial_state(), ((0, 0), (0, 1)))

    def test_non_adjacent_faces(self):
        qd = QuantumDouble(s3(), build_square_lattice(3, 3))
        with pytest.raises(LatticeError):
            qd.create_magnetic_vacuum_pair(qd.initial_state(), "c+", ((0, 0), (1, 1)))


# ─────────────────────────────────────────────
# 전기 전하
# ─────────────────────────────────────────────


class TestElectricCharges:
    def test_sign_pair(self, s3_ground):
        qd = _s3_qd()
        state, survival = qd.create_electric_vacuum_pair(s3_ground, "R1-", PAIR_PATH)
        assert survival == pytest.approx(1.0)
        endpoint = qd.fuse_electric(state, PAIR_PATH)
        assert endpoint.probability("R1-") == pytest.approx(1.0, abs=1e-10)
        assert endpoint.vacuum == pytest.approx(0.0, abs=1e-10)
        total = qd.fuse_electric_pair(state, PAIR_PATH)
        assert total.vacuum == pytest.approx(1.0, abs=1e-10)
        assert set(endpoint.channels) == {"R1+", "R1-", "remainder"}

    def test_r2_survival(self, s3_ground):
        qd = _s3_qd()
        state, survival = qd.create_electric_vacuum_pair(s3_ground, "R2", PAIR_PATH)
        assert survival == pytest.approx(0.25, abs=1e-10)
        endpoint = qd.fuse_electric(state, PAIR_PATH)
        assert endpoint.probability("remainder") == pytest.approx(1.0, abs=1e-10)
        assert qd.fuse_electric_pair(state, PAIR_PATH).vacuum == pytest.approx(1.0, abs=1e-10)

    def test_z2_channels(self):
        qd = QuantumDouble(z2(), build_square_lattice(2, 2))
        state = qd.prepare_ground_state()
        state, _ = qd.create_electric_vacuum_pair(state, "sign", PAIR_PATH)
        endpoint = qd.fuse_electric(state, PAIR_PATH)
        assert set(endpoint.channels) == {"trivial", "sign"}
        assert endpoint.probability("sign") == pytest.approx(1.0, abs=1e-10)

    def test_records_and_endpoint_check(self, s3_ground):
        qd = _s3_qd()
        state, _ = qd.create_electric_vacuum_pair(s3_ground, "R1-", PAIR_PATH)
        assert [r.location for r in qd.records] == [((0, 0),), ((0, 1),)]
        with pytest.raises(ValidationError, match="전기 전하 기록"):
            qd.fuse_electric(state, [(1, 0), (1, 1)])

    def test_conditional_rotation_round_trip(self, s3_ground):
        qd = _s3_qd()
        edge = qd.lattice.edge((0, 0), (0, 1))
        anc = qd.registry.vertex_site((0, 0))
        rotated = qd.conditional_rotation_K(s3_ground, (0, 0), edge)
        # 바닥상태에서 간선 값은 균등 분포
        assert site_value_distribution(rotated, anc)[0] == pytest.approx(1 / 6, abs=1e-10)
        restored = qd.conditional_rotation_K(rotated, (0, 0), edge, inverse=True)
        assert overlap_magnitude(restored, s3_ground) == pytest.approx(1.0, abs=1e-12)

    def test_single_vertex_path_rejected(self, s3_ground):
        with pytest.raises(ValidationError, match="두 개 이상"):
            _s3_qd().create_electric_vacuum_pair(s3_ground, "R2", [(0, 0)])

    def test_unknown_irrep(self, s3_ground):
        with pytest.raises(GroupError, match="기약표현"):
            _s3_qd().create_electric_vacuum_pair(s3_ground, "R3", PAIR_PATH)


# ─────────────────────────────────────────────
# 브레이딩과 간섭
# ─────────────────────────────────────────────


class TestBraidingAndInterference:
    @pytest.mark.parametrize("h", ["c+", "t2"])
    def test_flux_braid_leaves_vacuum_invariant(self, s3_ground, h):
        state = _s3_qd().braid_flux_around_vertex(s3_ground, h, (1, 0))
        assert overlap_magnitude(state, s3_ground) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("irrep", ["R1-", "R2"])
    def test_charge_braid_contractible_loop(self, s3_ground, irrep):
        qd = _s3_qd()
        state = qd.braid_electric_charge(s3_ground, irrep, SQUARE_LOOP)
        assert overlap_magnitude(state, s3_ground) == pytest.approx(1.0, abs=1e-10)
        assert qd.log.entries[-1].probability == pytest.approx(1.0, abs=1e-10)

    def test_charge_braided_around_other_pair(self, s3_ground_2x3):
        """전하끼리의 브레이딩은 자명하게 작용한다"""
        qd = QuantumDouble(s3(), build_square_lattice(2, 3))
        state, _ = qd.create_electric_vacuum_pair(s3_ground_2x3, "R2", [(0, 0), (0, 1)])
        state, _ = qd.create_electric_vacuum_pair(state, "R1-", [(1, 1), (1, 2)])
        loop = [(1, 1), (1, 2), (0, 2), (0, 1), (0, 0), (1, 0), (1, 1)]
        braided = qd.braid_electric_charge(state, "R1-", loop)
        assert overlap_magnitude(braided, state) == pytest.approx(1.0, abs=1e-10)
        assert qd.log.entries[-1].probability == pytest.approx(1.0, abs=1e-10)

    def test_open_braid_loop_rejected(self, s3_ground):
        with pytest.raises(ValidationError, match="고리"):
            _s3_qd().braid_electric_charge(s3_ground, "R2", PAIR_PATH)

    @pytest.mark.parametrize(
        "h, contrast, overlap",
        [("e", 1.0, 1.0), ("c+", 0.25, -0.5), ("c-", 0.25, -0.5), ("t0", 0.0, 0.0)],
    )
    def test_r2_interference(self, s3_ground, h, contrast, overlap):
        """P(+) - P(-) = |χ_R2(h)|²/4: e → 1, c → 1/4, t → 0"""
        qd = _s3_qd()
        state, _ = qd.create_electric_vacuum_pair(s3_ground, "R2", PAIR_PATH)
        result = qd.single_face_interference(state, h, PAIR_PATH[0])
        assert result.contrast == pytest.approx(contrast, abs=1e-10)
        assert result.overlap_real == pytest.approx(overlap, abs=1e-10)
        assert result.overlap_imag == pytest.approx(0.0, abs=1e-10)
        assert qd.log.entries[-1].values["contrast"] == pytest.approx(contrast, abs=1e-10)

    def test_interference_on_vacuum(self, s3_ground):
        result = _s3_qd().single_face_interference(s3_ground, "t1", (0, 0))
        assert result.contrast == pytest.approx(1.0, abs=1e-10)
        assert result.overlap_real == pytest.approx(1.0, abs=1e-10)

    def test_log_is_append_only(self, s3_ground):
        qd = _s3_qd()
        qd.single_face_interference(s3_ground, "c+", (0, 0))
        qd.braid_flux_around_vertex(s3_ground, "c+", (0, 0))
        assert qd.log.operations() == ["single_face_interference", "braid_flux_around_vertex"]
        assert isinstance(qd.measurer, BranchMeasurer)
