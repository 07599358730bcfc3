"""
Shared text, pattern and timestamp helpers for GEOPROP services.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from datetime import datetime, timezone
from typing import Iterable

from dateutil import parser as date_parser

from ..exceptions import InvalidPattern

logger = logging.getLogger(__name__)

# 프로필 텍스트 trim 대상 (ASCII 공백만)
ASCII_WHITESPACE = ' \t\n\r\x0b\x0c'


# =============================================================================
# Text normalization
# =============================================================================

def normalize_place_text(text: str) -> str:
    """
    지명 비교용 정규화: Unicode NFC + ASCII 공백 trim.
    대소문자는 그대로 둔다 (정확 일치 규칙).
    """
    if not text:
        return ''
    return unicodedata.normalize('NFC', text).strip(ASCII_WHITESPACE)


# =============================================================================
# Patterns
# =============================================================================

def compile_pattern(pattern: str | re.Pattern) -> re.Pattern:
    """정규식 컴파일 (실패 시 InvalidPattern)"""
    if isinstance(pattern, re.Pattern):
        return pattern
    try:
        return re.compile(pattern)
    except re.error as e:
        raise InvalidPattern(f"잘못된 정규식 '{pattern}': {e}", pattern=pattern) from e


def compile_patterns(patterns: Iterable[str | re.Pattern]) -> list[re.Pattern]:
    return [compile_pattern(p) for p in patterns]


# =============================================================================
# Timestamps
# =============================================================================

def parse_timestamp(value: str) -> datetime:
    """ISO-8601 파싱. 시간대가 없으면 UTC 로 간주."""
    parsed = date_parser.isoparse(value.strip())
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def format_timestamp(value: datetime) -> str:
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).isoformat().replace('+00:00', 'Z')
