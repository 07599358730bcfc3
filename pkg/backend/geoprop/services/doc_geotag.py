"""
Document geotagging from the locations of the users who shared it.

URL 별로 위치가 알려진 공유자 집합 𝒢 를 모아
    geotag      = l1_median(𝒢)
    uncertainty = mad_dispersion(𝒢, geotag)
를 계산한다.

정책:
    - 같은 사용자의 여러 공유는 한 명으로 센다
    - 위치가 알려진 서로 다른 공유자 < min_users → REJECTED_TOO_FEW_USERS
    - max_dispersion_km 초과 → REJECTED_DISPERSION (좌표와 분산은 그대로 기록)
"""

from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from typing import Iterable, Iterator, Mapping
from urllib.parse import urlsplit, urlunsplit

import numpy as np

from ..config import GeotagConfig
from ..exceptions import InvalidConfig, UnparsableUrl
from ..models import (
    DiscrepancyRecord,
    GeoPoint,
    GeotagResult,
    GeotagStatus,
    LocationEstimate,
    ShareEvent,
    UnambiguousToponymSet,
)
from .evaluation import make_record
from .robust_stats import summarize_groups
from .toponyms import ToponymMatcher
from .utils import ASCII_WHITESPACE, compile_pattern

logger = logging.getLogger(__name__)


# =============================================================================
# URLs
# =============================================================================

def canonicalize_url(raw: str) -> str:
    """
    최소한의 URL 정규화.

    - scheme, host 소문자
    - fragment 제거
    - 경로가 "/" 뿐이면 제거
    - query 는 그대로
    """
    text = (raw or '').strip(ASCII_WHITESPACE)
    try:
        parts = urlsplit(text)
    except ValueError as e:
        raise UnparsableUrl(f"URL 해석 실패: {raw!r} ({e})", url=raw) from e
    if not parts.scheme or not parts.netloc:
        raise UnparsableUrl(f"scheme 또는 host 가 없습니다: {raw!r}", url=raw)

    userinfo, at, hostport = parts.netloc.rpartition('@')
    netloc = f"{userinfo}{at}{hostport.lower()}"
    path = '' if parts.path == '/' else parts.path
    return urlunsplit((parts.scheme.lower(), netloc, path, parts.query, ''))


def filter_by_pattern(shares: Iterable[ShareEvent], pattern: str | re.Pattern) -> Iterator[ShareEvent]:
    """URL 이 패턴에 걸리는 공유만 통과 (re.search)"""
    compiled = compile_pattern(pattern)
    for share in shares:
        if compiled.search(share.url):
            yield share


# =============================================================================
# Geotagging
# =============================================================================

def geotag_documents(
    shares: Iterable[ShareEvent],
    locations: Mapping[str, LocationEstimate],
    min_users: int = GeotagConfig.MIN_USERS,
    max_dispersion_km: float | None = GeotagConfig.MAX_DISPERSION_KM,
    refine: bool = False,
    stats: dict[str, int] | None = None,
) -> list[GeotagResult]:
    """
    URL 별 지오태깅 결과 (URL 순 정렬).

    Args:
        shares: ShareEvent 스트림 (url 은 이미 정규화된 값)
        locations: user → LocationEstimate (솔버 출력 또는 라벨)
        min_users: 필요한 서로 다른 공유자 수
        max_dispersion_km: 분산 상한 (None 이면 제한 없음)
        refine: l1 중앙값의 접평면 보정 여부
        stats: 주면 상태별 개수를 채운다
    """
    if min_users < 1:
        raise InvalidConfig(f"min_users must be >= 1 (got {min_users})")
    if max_dispersion_km is not None and not max_dispersion_km >= 0:
        raise InvalidConfig(f"max_dispersion_km must be >= 0 (got {max_dispersion_km})")

    sharers: dict[str, set[str]] = defaultdict(set)
    for share in shares:
        sharers[share.url].add(share.user)

    results: dict[str, GeotagResult] = {}
    pending: list[tuple[str, int]] = []
    groups = []
    for url in sorted(sharers):
        located = sorted(u for u in sharers[url] if u in locations)
        if len(located) < min_users:
            results[url] = GeotagResult(url, GeotagStatus.REJECTED_TOO_FEW_USERS, len(located))
            continue
        points = [locations[u].location for u in located]
        lats = np.fromiter((p.lat for p in points), dtype=np.float64, count=len(points))
        lons = np.fromiter((p.lon for p in points), dtype=np.float64, count=len(points))
        groups.append((lats, lons, np.ones(len(points))))
        pending.append((url, len(located)))

    for (url, n), summary in zip(pending, summarize_groups(groups, refine=refine)):
        rejected = max_dispersion_km is not None and summary.dispersion_km > max_dispersion_km
        status = GeotagStatus.REJECTED_DISPERSION if rejected else GeotagStatus.GEOTAGGED
        results[url] = GeotagResult(url, status, n, summary.center, summary.dispersion_km)

    ordered = [results[url] for url in sorted(results)]
    counts = Counter(r.status for r in ordered)
    if stats is not None:
        stats.update({str(k): v for k, v in counts.items()})
    logger.info(
        f"[Geotag] 문서 {len(ordered)}개: 지오태그 {counts[GeotagStatus.GEOTAGGED]}, "
        f"공유자 부족 {counts[GeotagStatus.REJECTED_TOO_FEW_USERS]}, "
        f"분산 초과 {counts[GeotagStatus.REJECTED_DISPERSION]}"
    )
    return ordered


def geotag_toponym_mentions(
    posts: Iterable[tuple[str, str]],
    locations: Mapping[str, LocationEstimate],
    toponyms: UnambiguousToponymSet,
    min_users: int = GeotagConfig.MIN_USERS,
    max_dispersion_km: float | None = GeotagConfig.MAX_DISPERSION_KM,
    stats: Counter | None = None,
) -> dict[str, GeotagResult]:
    """
    지명 하나를 문서처럼 취급해서, 그 지명을 언급한 사용자들의 위치로 지오태깅.

    posts 는 (user, text). 지명이 정확히 하나인 글만 쓴다.
    결과 키는 지명 이름: join_references(results, toponyms.entries) 로 평가 레코드를 만든다.
    """
    matcher = ToponymMatcher(toponyms)
    counts = stats if stats is not None else Counter()
    shares = []
    for user, text in posts:
        name = matcher.match(text, counts)
        if name is not None:
            shares.append(ShareEvent(url=name, user=user))
    results = geotag_documents(shares, locations, min_users=min_users, max_dispersion_km=max_dispersion_km)
    return {r.url: r for r in results}


def join_references(
    results: Iterable[GeotagResult],
    references: Mapping[str, GeoPoint],
) -> list[DiscrepancyRecord]:
    """
    좌표가 계산된 결과(분산 초과 포함)와 기준 좌표를 짝지어 평가 레코드로.
    기준 좌표가 없는 URL 은 건너뛴다.
    """
    records = []
    for result in results:
        if result.location is None:
            continue
        reference = references.get(result.url)
        if reference is None:
            continue
        records.append(make_record(result.url, result.location, reference, result.dispersion_km))
    records.sort(key=lambda r: r.item_id)
    logger.info(f"[Geotag] 기준 좌표와 짝지은 문서 {len(records)}개")
    return records
