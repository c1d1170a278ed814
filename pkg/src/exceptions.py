"""
커스텀 예외 클래스

모든 시뮬레이터 예외는 AppError를 상속하며,
CLI는 예외 계층에 따라 프로세스 종료 코드를 결정합니다.

오류 출력 형식 (stderr)::

    {
        "code": "ZERO_PROBABILITY",
        "message": "선택한 측정 분기의 확률이 0입니다.",
        "detail": { ... }  // optional
    }
"""

from __future__ import annotations

from typing import Any


# ───────────────────────── Base ─────────────────────────


class AppError(Exception):
    """애플리케이션 최상위 예외"""

    exit_code: int = 1
    code: str = "INTERNAL_ERROR"
    message: str = "내부 오류가 발생했습니다."

    def __init__(
        self,
        message: str | None = None,
        *,
        detail: dict[str, Any] | None = None,
    ) -> None:
        self.message = message or self.__class__.message
        self.detail = detail
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        """오류 출력용 딕셔너리"""
        body: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.detail is not None:
            body["detail"] = self.detail
        return body


# ─────────────────── Validation Errors ──────────────────


class ValidationError(AppError):
    """입력 검증 실패 (exit 2)"""

    exit_code = 2
    code = "VALIDATION_ERROR"
    message = "입력 데이터가 유효하지 않습니다."


class GroupError(ValidationError):
    """군 원소/기약표현 지정 오류"""

    code = "GROUP_ERROR"
    message = "유한군 원소 또는 기약표현이 유효하지 않습니다."


class LatticeError(ValidationError):
    """격자 구성/사이트 참조 오류"""

    code = "LATTICE_ERROR"
    message = "격자 또는 사이트 참조가 유효하지 않습니다."


class ScriptValidationError(ValidationError):
    """프로토콜 스크립트 검증 실패 (detail에 줄 단위 진단 포함)"""

    code = "SCRIPT_VALIDATION_ERROR"
    message = "프로토콜 스크립트 검증에 실패했습니다."


# ──────────────────── Protocol Errors ───────────────────


class ProtocolError(AppError):
    """프로토콜 실행 중 오류 (exit 3)"""

    exit_code = 3
    code = "PROTOCOL_ERROR"
    message = "프로토콜 실행 중 오류가 발생했습니다."


class ZeroProbabilityError(ProtocolError):
    """확률 0 분기 선택 또는 연산자가 상태를 소멸시킴"""

    code = "ZERO_PROBABILITY"
    message = "선택한 측정 분기의 확률이 0입니다."


class CorrectionFailedError(ProtocolError):
    """보정 후에도 안정자 기댓값이 1이 아님"""

    code = "CORRECTION_FAILED"
    message = "보정 게이트 적용 후 안정자 조건이 복원되지 않았습니다."


class AncillaStateError(ProtocolError):
    """보조 큐디트가 요구 상태가 아니거나 얽혀 있음"""

    code = "ANCILLA_STATE_ERROR"
    message = "보조 큐디트 상태가 요구 조건을 만족하지 않습니다."


class ResourceLimitError(ProtocolError):
    """밀집 오라클 자원 한도 초과"""

    code = "RESOURCE_LIMIT"
    message = "계산 자원 한도를 초과했습니다."
