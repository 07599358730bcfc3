"""
Gazetteer lookup and unambiguous-toponym construction.

명확한 지명 집합 만들기:
    1. GPS 가 있는 관측의 프로필 위치 텍스트가 지명 사전 이름과 정확히 일치하는 것만 모은다
    2. 이름별로 서로 다른 사용자 수, GPS ↔ 사전 좌표 거리의 중앙값 계산
    3. 사용자 수 ≥ min_users, 중앙값 ≤ max_median_km, 이름 길이 ≥ min_chars 인 이름만 남긴다

텍스트 지오태깅은 단어 경계 기준 부분 문자열 일치 (대소문자 구분).
서로 다른 지명이 둘 이상 나오면 모호한 문서로 보고 지오태그하지 않는다.
"""

from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from typing import Iterable

import numpy as np

from ..config import ToponymConfig
from ..exceptions import AmbiguousName
from ..models import GazetteerEntry, GeoPoint, ToponymStats, UnambiguousToponymSet
from .geodesy import distances_to
from .robust_stats import lower_median
from .utils import normalize_place_text

logger = logging.getLogger(__name__)


# =============================================================================
# Gazetteer
# =============================================================================

class Gazetteer:
    """
    이름 → 좌표 사전.

    이름은 NFC + ASCII 공백 trim 으로 정규화해서 보관한다.
    같은 이름이 서로 다른 좌표로 여러 번 나오면 lookup 시 AmbiguousName.
    """

    def __init__(self, entries: Iterable[GazetteerEntry] = ()) -> None:
        self.entries: list[GazetteerEntry] = []
        self._locations: dict[str, set[GeoPoint]] = defaultdict(set)
        for entry in entries:
            self.add(entry)

    def add(self, entry: GazetteerEntry) -> None:
        name = normalize_place_text(entry.name)
        if not name:
            return
        self.entries.append(entry)
        self._locations[name].add(entry.location)

    def __len__(self) -> int:
        return len(self._locations)

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and normalize_place_text(name) in self._locations

    def names(self) -> list[str]:
        return sorted(self._locations)

    def is_ambiguous(self, name: str) -> bool:
        return len(self._locations.get(normalize_place_text(name), ())) > 1

    def lookup(self, name: str) -> GeoPoint | None:
        """정확히 일치하는 이름의 좌표 (없으면 None)"""
        locations = self._locations.get(normalize_place_text(name))
        if not locations:
            return None
        if len(locations) > 1:
            raise AmbiguousName(
                f"'{name}' 이(가) {len(locations)}개 좌표에 대응됩니다.",
                name=name, candidates=len(locations),
            )
        return next(iter(locations))


# =============================================================================
# Unambiguous toponyms
# =============================================================================

def build_unambiguous(
    observations: Iterable[tuple[str, str, GeoPoint]],
    gazetteer: Gazetteer,
    min_users: int = ToponymConfig.MIN_USERS,
    max_median_km: float = ToponymConfig.MAX_MEDIAN_KM,
    min_chars: int = ToponymConfig.MIN_CHARS,
    stats: dict[str, int] | None = None,
) -> UnambiguousToponymSet:
    """
    (user, 프로필 위치 텍스트, GPS) 관측으로 명확한 지명 집합을 만든다.

    Args:
        observations: (user, text, gps): (user, text) 쌍마다 GPS 한 점
        gazetteer: 지명 사전
        stats: 주면 'unmatched', 'ambiguous', 'too_few_users', 'too_far', 'too_short' 집계를 채운다

    Returns:
        UnambiguousToponymSet (남은 이름의 ToponymStats 포함)
    """
    counts = Counter()
    users: dict[str, set[str]] = defaultdict(set)
    gps_points: dict[str, list[GeoPoint]] = defaultdict(list)
    locations: dict[str, GeoPoint] = {}

    for user, text, gps in observations:
        name = normalize_place_text(text)
        try:
            location = gazetteer.lookup(name) if name else None
        except AmbiguousName:
            counts['ambiguous'] += 1
            continue
        if location is None:
            counts['unmatched'] += 1
            continue
        locations[name] = location
        users[name].add(user)
        gps_points[name].append(gps)

    result = UnambiguousToponymSet()
    for name in sorted(users):
        n_users = len(users[name])
        points = gps_points[name]
        lats = np.fromiter((p.lat for p in points), dtype=np.float64, count=len(points))
        lons = np.fromiter((p.lon for p in points), dtype=np.float64, count=len(points))
        median_km = lower_median(distances_to(lats, lons, locations[name])) / 1000.0

        if n_users < min_users:
            counts['too_few_users'] += 1
            continue
        if median_km > max_median_km:
            counts['too_far'] += 1
            continue
        if len(name) < min_chars:
            counts['too_short'] += 1
            continue

        result.entries[name] = locations[name]
        result.stats[name] = ToponymStats(name, locations[name], n_users, median_km)

    if stats is not None:
        stats.update(counts)
    logger.info(
        f"[Toponyms] 후보 {len(users)}개 → 명확한 지명 {len(result)}개 "
        f"(사용자 부족 {counts['too_few_users']}, 거리 초과 {counts['too_far']}, 짧은 이름 {counts['too_short']})"
    )
    return result


# =============================================================================
# Text matching
# =============================================================================

class ToponymMatcher:
    """
    명확한 지명 집합에 대한 단어 경계 매처.

    긴 이름을 먼저 시도하므로 "Santiago, Chile" 안의 "Santiago" 는 따로 세지 않는다.
    같은 집합으로 여러 텍스트를 처리할 때는 하나를 만들어 재사용.
    """

    def __init__(self, toponyms: UnambiguousToponymSet) -> None:
        self.toponyms = toponyms
        names = sorted(toponyms.entries, key=lambda n: (-len(n), n))
        if names:
            alternation = '|'.join(re.escape(n) for n in names)
            self._pattern: re.Pattern | None = re.compile(rf'(?<!\w)(?:{alternation})(?!\w)')
        else:
            self._pattern = None

    def find(self, text: str) -> set[str]:
        """텍스트에 나오는 서로 다른 지명들"""
        if self._pattern is None or not text:
            return set()
        return {m.group(0) for m in self._pattern.finditer(text)}

    def match(self, text: str, stats: Counter | None = None) -> str | None:
        """지명이 정확히 하나일 때만 그 이름"""
        found = self.find(text)
        if len(found) == 1:
            if stats is not None:
                stats['matched'] += 1
            return found.pop()
        if stats is not None:
            stats['ambiguous' if found else 'no_match'] += 1
        return None


def geotag_by_toponym(text: str, toponyms: UnambiguousToponymSet | ToponymMatcher) -> GeoPoint | None:
    """단일 지명이 언급된 텍스트의 좌표"""
    matcher = toponyms if isinstance(toponyms, ToponymMatcher) else ToponymMatcher(toponyms)
    name = matcher.match(text)
    if name is None:
        return None
    return matcher.toponyms.entries[name]


def toponym_references(
    documents: Iterable[tuple[str, str]],
    toponyms: UnambiguousToponymSet,
    stats: Counter | None = None,
) -> dict[str, GeoPoint]:
    """(doc_id, text) → doc_id 별 지명 기반 기준 좌표 (단일 지명 문서만)"""
    matcher = ToponymMatcher(toponyms)
    counts = stats if stats is not None else Counter()
    references = {}
    for doc_id, text in documents:
        name = matcher.match(text, counts)
        if name is not None:
            references[doc_id] = toponyms.entries[name]
    logger.info(
        f"[Toponyms] 기준 좌표 {len(references)}건 (모호 {counts['ambiguous']}, 지명 없음 {counts['no_match']})"
    )
    return dict(sorted(references.items()))
