"""
애플리케이션 설정 관리

실행 환경, 로그 레벨, 결과 출력 기본값을 환경변수(.env)로 관리합니다.
수치 허용오차는 config.simulation 을 참고하세요.
"""

from __future__ import annotations

from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정"""

    # production 이면 JSON 로그
    app_env: Literal["development", "production"] = "development"
    log_level: str = "INFO"

    # CLI 결과 출력 (--format 생략 시)
    output_format: Literal["json", "csv-summary"] = "json"
    json_indent: int = 2

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


# 전역 설정 인스턴스
settings = Settings()
