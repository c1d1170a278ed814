"""
로깅 설정

JSON 포맷 로깅을 지원하며, 환경변수로 로그 레벨을 조정할 수 있습니다.
결과 문서가 stdout으로 출력되므로 로그는 stderr로 보냅니다.

측정/프로토콜 로그는 ``extra={"site": ..., "outcome": ..., "probability": ...}``
로 문맥을 붙이며, JSON 포맷에서는 별도 필드로 남습니다.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone

UTC = timezone.utc

from config.settings import settings

# extra 로 전달되는 프로토콜 문맥 필드
CONTEXT_FIELDS = ("operation", "site", "outcome", "probability")


def protocol_context(record: logging.LogRecord) -> dict[str, object]:
    """레코드에 붙은 프로토콜 문맥 필드만 추출"""
    return {key: getattr(record, key) for key in CONTEXT_FIELDS if hasattr(record, key)}


class JSONFormatter(logging.Formatter):
    """JSON 포맷 로그 포매터"""

    def format(self, record: logging.LogRecord) -> str:
        log_data: dict[str, object] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        log_data.update(protocol_context(record))

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False, default=str)


class ProtocolFormatter(logging.Formatter):
    """개발용 한 줄 포맷 (문맥 필드는 뒤에 key=value 로)"""

    def __init__(self) -> None:
        super().__init__(
            "%(asctime)s | %(name)-28s | %(levelname)-8s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        context = protocol_context(record)
        if context:
            line += " | " + " ".join(f"{k}={v}" for k, v in context.items())
        return line


def get_logger(name: str) -> logging.Logger:
    """
    로거 인스턴스 생성

    Args:
        name: 로거 이름 (보통 __name__ 사용)

    Returns:
        stderr 로 출력하는 로거 (production 이면 JSON)
    """
    logger = logging.getLogger(name)

    # 이미 핸들러가 설정되어 있으면 중복 방지
    if logger.handlers:
        return logger

    log_level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logger.setLevel(log_level)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(log_level)
    if settings.app_env == "production":
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(ProtocolFormatter())
    logger.addHandler(handler)

    return logger
