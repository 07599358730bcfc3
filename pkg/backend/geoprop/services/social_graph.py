"""
Social graph and ground-truth label construction.

Flow:
    1. 방향성 멘션 합산 → 양방향 모두 있는 쌍만 간선 (w = min(i→j, j→i))
    2. GPS 점들의 medoid → GPS_MEDIAN 라벨
    3. 프로필 텍스트가 지명 사전과 정확히 일치 → SELF_REPORT 라벨
    4. 병합 (GPS 우선) → V = L + U 분할
"""

from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from datetime import datetime
from typing import TYPE_CHECKING, Iterable

import numpy as np
from scipy import sparse

from ..exceptions import AmbiguousName
from ..models import (
    DiscrepancyRecord,
    GeoPoint,
    GroundTruthLabel,
    GroundTruthLabels,
    LabelSource,
    LocationEstimate,
    MentionRecord,
    ProfileRecord,
    SocialGraph,
)
from .evaluation import make_record
from .robust_stats import summarize_groups
from .utils import compile_patterns, normalize_place_text

if TYPE_CHECKING:
    from .toponyms import Gazetteer

logger = logging.getLogger(__name__)


# =============================================================================
# Graph
# =============================================================================

def graph_from_edges(edges: Iterable[tuple[str, str, int]]) -> SocialGraph:
    """
    무방향 간선 (u, v, w) 목록으로 SocialGraph 생성.
    같은 쌍이 여러 번 나오면 마지막 값이 아니라 최소값을 쓴다 (상호 멘션의 min 규칙과 동일).
    """
    weights: dict[tuple[str, str], int] = {}
    for u, v, w in edges:
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        weights[key] = min(weights.get(key, w), w)

    users = tuple(sorted({u for pair in weights for u in pair}))
    index = {u: i for i, u in enumerate(users)}
    n = len(users)

    if weights:
        rows = np.fromiter((index[u] for u, _ in weights), dtype=np.int64, count=len(weights))
        cols = np.fromiter((index[v] for _, v in weights), dtype=np.int64, count=len(weights))
        data = np.fromiter(weights.values(), dtype=np.int64, count=len(weights))
        upper = sparse.coo_matrix((data, (rows, cols)), shape=(n, n))
        adjacency = (upper + upper.T).tocsr()
    else:
        adjacency = sparse.csr_matrix((n, n), dtype=np.int64)
    adjacency.sort_indices()

    return SocialGraph(users=users, adjacency=adjacency, index=index)


def build_graph(records: Iterable[MentionRecord]) -> SocialGraph:
    """
    방향성 멘션 레코드 → 상호 멘션 그래프.

    같은 (src, dst) 는 합산, 자기 멘션은 버린다.
    간선 가중치는 두 방향 합계 중 작은 값.
    """
    directed: Counter[tuple[str, str]] = Counter()
    for record in records:
        if record.src == record.dst or record.count < 1:
            continue
        directed[(record.src, record.dst)] += record.count

    edges = []
    for (src, dst), forward in directed.items():
        if src < dst and (dst, src) in directed:
            edges.append((src, dst, min(forward, directed[(dst, src)])))

    graph = graph_from_edges(edges)
    logger.info(
        f"[Graph] 방향 쌍 {len(directed)}개 → 상호 간선 {graph.n_edges}개, 정점 {graph.n_vertices}개"
    )
    return graph


def partition(graph: SocialGraph, labels: GroundTruthLabels) -> tuple[set[str], set[str]]:
    """V = L + U (그래프 정점 기준)"""
    labeled = {u for u in graph.users if u in labels}
    unlabeled = set(graph.users) - labeled
    return labeled, unlabeled


# =============================================================================
# Ground truth
# =============================================================================

def gps_ground_truth(per_user_gps: Iterable[tuple[str, GeoPoint]]) -> GroundTruthLabels:
    """사용자별 GPS 점들의 medoid (refine 없음)"""
    grouped: dict[str, list[GeoPoint]] = defaultdict(list)
    for user, point in per_user_gps:
        grouped[user].append(point)

    users = sorted(grouped)
    groups = []
    for user in users:
        points = grouped[user]
        lats = np.fromiter((p.lat for p in points), dtype=np.float64, count=len(points))
        lons = np.fromiter((p.lon for p in points), dtype=np.float64, count=len(points))
        groups.append((lats, lons, np.ones(len(points))))

    summaries = summarize_groups(groups, refine=False)
    labels = {
        user: GroundTruthLabel(user, summary.center, LabelSource.GPS_MEDIAN)
        for user, summary in zip(users, summaries)
    }
    logger.info(f"[Labels] GPS 라벨 {len(labels)}명")
    return labels


def self_report_ground_truth(
    profiles: Iterable[ProfileRecord],
    gazetteer: Gazetteer,
    last_seen_cutoff: datetime | None = None,
    stats: dict[str, int] | None = None,
) -> GroundTruthLabels:
    """
    프로필 위치 텍스트가 지명 사전 이름과 정확히 일치하면 라벨 부여.

    - NFC + ASCII 공백 trim 후 대소문자 구분 비교
    - 한 이름이 여러 좌표에 대응되면 건너뛰고 'ambiguous' 로 집계
    - last_seen_cutoff 보다 오래된 프로필은 'stale' 로 제외 (last_seen 없으면 유지)
    - 한 사용자에 여러 행이 일치하면 가장 최근 last_seen, 그다음 (lat, lon) 최소
    """
    counts = Counter()
    candidates: dict[str, list[GroundTruthLabel]] = defaultdict(list)

    for profile in profiles:
        if last_seen_cutoff is not None and profile.last_seen is not None and profile.last_seen < last_seen_cutoff:
            counts['stale'] += 1
            continue
        name = normalize_place_text(profile.text)
        if not name:
            counts['unmatched'] += 1
            continue
        try:
            location = gazetteer.lookup(name)
        except AmbiguousName:
            counts['ambiguous'] += 1
            continue
        if location is None:
            counts['unmatched'] += 1
            continue
        counts['matched'] += 1
        candidates[profile.user].append(
            GroundTruthLabel(profile.user, location, LabelSource.SELF_REPORT, profile.last_seen)
        )

    labels = {}
    for user, options in candidates.items():
        options.sort(key=lambda lab: (
            -(lab.last_seen.timestamp()) if lab.last_seen is not None else float('inf'),
            lab.location,
        ))
        labels[user] = options[0]

    if stats is not None:
        stats.update(counts)
    logger.info(
        f"[Labels] 자기 보고 라벨 {len(labels)}명 "
        f"(일치 {counts['matched']}, 모호 {counts['ambiguous']}, 오래됨 {counts['stale']}, 불일치 {counts['unmatched']})"
    )
    return labels


def merge_labels(gps: GroundTruthLabels, self_report: GroundTruthLabels) -> GroundTruthLabels:
    """합집합, 충돌 시 GPS 우선"""
    merged = dict(self_report)
    merged.update(gps)
    overlap = len(gps.keys() & self_report.keys())
    if overlap:
        logger.info(f"[Labels] GPS/자기 보고 중복 {overlap}명 → GPS 사용")
    return merged


def label_agreement(gps: GroundTruthLabels, self_report: GroundTruthLabels) -> list[DiscrepancyRecord]:
    """두 라벨을 모두 가진 사용자의 자기 보고 vs GPS 불일치 (km)"""
    shared = sorted(gps.keys() & self_report.keys())
    return [
        make_record(user, self_report[user].location, gps[user].location, dispersion_km=0.0)
        for user in shared
    ]


# =============================================================================
# Cross-platform alignment
# =============================================================================

def _account_from_match(match: re.Match) -> str:
    if 'account' in match.re.groupindex:
        return match.group('account')
    if match.re.groups:
        return match.group(1)
    return re.sub(r'^https?://(www\.)?', '', match.group(0))


def extract_profile_links(
    profiles: Iterable[tuple[str, str]],
    patterns: Iterable[str | re.Pattern],
) -> list[tuple[str, str]]:
    """
    프로필 텍스트에서 다른 플랫폼 계정 추출.

    패턴에 account 그룹이 있으면 그 부분, 그룹이 하나라도 있으면 첫 그룹,
    없으면 스킴을 뗀 전체 일치 문자열을 계정으로 쓴다.
    """
    compiled = compile_patterns(patterns)
    pairs: list[tuple[str, str]] = []
    for user, text in profiles:
        seen = set()
        for pattern in compiled:
            for match in pattern.finditer(text):
                account = _account_from_match(match)
                if account and account not in seen:
                    seen.add(account)
                    pairs.append((user, account))
    logger.info(f"[Links] 계정 연결 {len(pairs)}건")
    return pairs


def transfer_locations(
    links: Iterable[tuple[str, str]],
    locations: dict[str, LocationEstimate],
) -> dict[str, LocationEstimate]:
    """
    연결된 외부 계정에 사용자 위치를 옮겨 적는다.
    한 계정이 서로 다른 위치의 사용자 여럿과 연결되면 모호하므로 버린다.
    """
    by_account: dict[str, list[LocationEstimate]] = defaultdict(list)
    for user, account in links:
        estimate = locations.get(user)
        if estimate is not None:
            by_account[account].append(estimate)

    transferred = {}
    dropped = 0
    for account in sorted(by_account):
        estimates = by_account[account]
        if len({e.location for e in estimates}) > 1:
            dropped += 1
            continue
        source = min(estimates, key=lambda e: e.user)
        transferred[account] = LocationEstimate(
            user=account,
            location=source.location,
            provenance=source.provenance,
            neighbor_dispersion_km=source.neighbor_dispersion_km,
            iteration_assigned=source.iteration_assigned,
        )
    logger.info(f"[Links] 위치 이전 {len(transferred)}계정 (모호 {dropped})")
    return transferred
