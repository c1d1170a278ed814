"""
시뮬레이션(Simulation) 설정

희소 상태벡터 엔진과 프로토콜 계층이 사용하는 수치 허용오차를 환경변수로 관리합니다.
모든 값은 ``QDSIM_`` 접두사로 오버라이드할 수 있으며, CLI 플래그가 있으면
해당 실행에 한해 CLI 값이 우선합니다.
"""

from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class SimulationSettings(BaseSettings):
    """시뮬레이션 전용 설정

    - 희소 상태의 가지치기 임계값
    - 유니터리/정규직교 판정 허용오차
    - 측정 분기 최소 확률
    - 오라클(밀집 투영) 자원 한도
    - 파라미터 스윕 동시 실행 수
    """

    # ── 상태 엔진 ──
    prune_epsilon: float = 1e-12              # 이 크기 미만 진폭은 수치 먼지로 제거
    unitarity_tolerance: float = 1e-12        # U†U = I 판정 허용오차
    normalization_tolerance: float = 1e-10    # 노름 1 판정 허용오차
    probability_floor: float = 1e-14          # 이보다 작은 확률의 분기는 선택 불가

    # ── 프로토콜 ──
    purity_tolerance: float = 1e-10           # 보조 큐디트 순수성(분리) 판정
    oracle_max_edges: int = 10                # ground_state_oracle 최대 간선 수 (d=6 기준)

    # ── 실행 ──
    default_jobs: int = 1                     # 스윕 실험 동시 작업 수

    model_config = SettingsConfigDict(
        env_prefix="QDSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


# 전역 시뮬레이션 설정 인스턴스
simulation_settings = SimulationSettings()
