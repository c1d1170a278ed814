"""
설정 패키지

환경변수 기반 설정을 구조화하여 관리합니다.
- settings: 앱 기본 설정 (환경, 로그 레벨)
- simulation: 상태 엔진/프로토콜 수치 설정
"""

from __future__ import annotations

from config.settings import settings
from config.simulation import simulation_settings

__all__ = ["settings", "simulation_settings"]
