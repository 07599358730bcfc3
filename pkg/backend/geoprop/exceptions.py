"""
Exception types for GEOPROP.
표준화된 에러 코드와 종료 코드(exit code) 매핑 제공.

종료 코드:
    0 성공, 1 실행 중 실패, 2 사용법/설정 오류
"""

from __future__ import annotations

import logging
from typing import Any

from django.core.management.base import CommandError

logger = logging.getLogger(__name__)

EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2


class GeopropError(Exception):
    """모든 GEOPROP 예외의 기반 클래스"""

    code = 'GEOPROP_ERROR'
    exit_code = EXIT_RUNTIME_ERROR
    default_message = '처리 중 오류가 발생했습니다.'

    def __init__(self, message: str | None = None, **detail: Any) -> None:
        self.message = message or self.default_message
        self.detail = detail
        super().__init__(self.message)


class UsageError(GeopropError):
    """잘못된 입력/설정 (exit 2)"""

    code = 'USAGE_ERROR'
    exit_code = EXIT_USAGE_ERROR
    default_message = '입력값 또는 설정이 올바르지 않습니다.'


# =============================================================================
# 계산 오류
# =============================================================================

class EmptySet(GeopropError):
    code = 'EMPTY_SET'
    default_message = '빈 점 집합의 중앙값/분산은 정의되지 않습니다.'


class NonConvergence(GeopropError):
    code = 'NON_CONVERGENCE'
    default_message = 'Vincenty 반복이 수렴하지 않았습니다 (대척점 근처).'


class EmptyGraph(GeopropError):
    code = 'EMPTY_GRAPH'
    default_message = '정점이 없는 그래프입니다.'


class InsufficientLabels(GeopropError):
    code = 'INSUFFICIENT_LABELS'
    default_message = '검증에 사용할 라벨이 부족합니다.'


class EmptyInput(GeopropError):
    code = 'EMPTY_INPUT'
    default_message = '평가할 레코드가 없습니다.'


class AmbiguousName(GeopropError):
    code = 'AMBIGUOUS_NAME'
    default_message = '하나의 지명이 여러 좌표에 대응됩니다.'


class UnparsableUrl(GeopropError):
    code = 'UNPARSABLE_URL'
    default_message = 'URL을 해석할 수 없습니다.'


class InvalidCoordinate(GeopropError, ValueError):
    code = 'INVALID_COORDINATE'
    default_message = '위도/경도 값이 올바르지 않습니다.'


# =============================================================================
# 사용법/설정 오류 (exit 2)
# =============================================================================

class InvalidConfig(UsageError):
    code = 'INVALID_CONFIG'
    default_message = '솔버 설정이 올바르지 않습니다.'


class InvalidPattern(UsageError):
    code = 'INVALID_PATTERN'
    default_message = '정규식 패턴이 올바르지 않습니다.'


class InputFileMissing(UsageError):
    code = 'INPUT_FILE_MISSING'
    default_message = '입력 파일을 찾을 수 없습니다.'


class MalformedRecord(UsageError):
    """파일의 특정 행을 해석할 수 없음 (strict 모드에서는 치명적)"""

    code = 'MALFORMED_RECORD'
    default_message = '레코드 형식이 올바르지 않습니다.'

    def __init__(self, message: str | None = None, *, path: str = '', line: int = 0, **detail: Any) -> None:
        self.path = path
        self.line = line
        super().__init__(message, path=path, line=line, **detail)

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.message}"


# =============================================================================
# 응답 형식 / 종료 코드 변환
# =============================================================================

def format_error_response(exc: Exception, code: str | None = None, message: str | None = None) -> dict[str, Any]:
    """에러 응답 형식 표준화"""

    if code is None:
        code = getattr(exc, 'code', 'ERROR')

    if message is None:
        message = str(exc) or getattr(exc, 'default_message', '')

    error: dict[str, Any] = {
        'code': code.upper() if isinstance(code, str) else 'ERROR',
        'message': message,
    }
    detail = getattr(exc, 'detail', None)
    if detail:
        error['detail'] = detail
    return {'error': error}


def handle_command_error(exc: Exception) -> CommandError:
    """
    예외를 Django CommandError 로 변환 (종료 코드 결정 지점).

    GeopropError 는 자신의 exit_code 를, 그 외 예외는 1 을 사용.
    """
    response = format_error_response(exc)
    code = response['error']['code']
    message = response['error']['message']

    if isinstance(exc, GeopropError):
        exit_code = exc.exit_code
    else:
        exit_code = EXIT_RUNTIME_ERROR
        logger.exception(f"Unhandled exception: {exc}")

    if exit_code == EXIT_USAGE_ERROR:
        logger.warning(f"[{code}] {message}")
    else:
        logger.error(f"[{code}] {message}")

    return CommandError(f"[{code}] {message}", returncode=exit_code)
