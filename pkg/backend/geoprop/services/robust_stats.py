"""
Robust center and spread of GeoPoint sets.

- l1_median: 가중 측지 medoid (입력 점 중 Σ w·d 최소), 선택적으로 접평면 Weiszfeld 보정
- mad_dispersion: 중심까지 거리의 중앙값 (km, 짝수 개면 아래쪽 중앙 원소)
- summarize_groups: 여러 점 집합을 한 번의 벡터 연산으로 요약 (솔버/지오태깅용)
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
from pyproj import Proj

from ..config import GeodesyConfig, MedianConfig
from ..exceptions import EmptySet
from ..models import GeoPoint, RobustSummary, WeightedPointSet
from .geodesy import distances_to, geodesic_arrays

logger = logging.getLogger(__name__)

# (lats, lons, weights)
PointArrays = tuple[np.ndarray, np.ndarray, np.ndarray]


# =============================================================================
# Helpers
# =============================================================================

def lower_median(values: np.ndarray | Sequence[float]) -> float:
    """중앙값: 짝수 개면 아래쪽 중앙 원소 (보간 없음)"""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise EmptySet()
    return float(arr[(arr.size - 1) // 2])


def _medoid_index(objective: np.ndarray, lats: np.ndarray, lons: np.ndarray) -> int:
    """
    objective (행별 Σ_y w_y·d(x, y)) 가 최소인 행 번호.

    상대 1e-9 이내 동률이면 (lat, lon) 사전순 최소 점을 고른다 → 입력 순서와 무관.
    """
    best = objective.min()
    tied = np.flatnonzero(objective <= best + abs(best) * MedianConfig.TIE_RELATIVE_TOL)
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort((lons[tied], lats[tied]))
    return int(tied[order[0]])


def _row_block(lats: np.ndarray, lons: np.ndarray, start: int, stop: int) -> np.ndarray:
    """[start, stop) 행의 점에서 모든 점까지의 거리 (m), shape (stop-start, n). 자기 자신은 0"""
    n = lats.size
    rows = np.arange(start, stop)
    r1 = np.repeat(rows, n)
    r2 = np.tile(np.arange(n), rows.size)
    meters, _ = geodesic_arrays(lats[r1], lons[r1], lats[r2], lons[r2])
    block = meters.reshape(rows.size, n)
    block[np.arange(rows.size), rows] = 0.0
    return block


def _objective_at(lats: np.ndarray, lons: np.ndarray, weights: np.ndarray, x: GeoPoint) -> float:
    return float(np.dot(weights, distances_to(lats, lons, x)))


def weighted_objective(s: WeightedPointSet, x: GeoPoint) -> float:
    """Σ_y w_y·d(x, y) (m)"""
    s.require_non_empty()
    lats, lons, weights = s.arrays()
    return _objective_at(lats, lons, weights, x)


# =============================================================================
# Weiszfeld refinement
# =============================================================================

def _weiszfeld_refine(lats: np.ndarray, lons: np.ndarray, weights: np.ndarray, medoid: GeoPoint) -> GeoPoint:
    """
    medoid 중심 정거방위(azimuthal equidistant) 접평면에서 Weiszfeld 반복.
    시작점은 평면상의 가중 무게중심.

    점은 (lat, lon, weight) 순으로 정렬한 뒤 합산한다 → 입력 순서가 달라도 결과가 비트 단위로 같다.
    반복점이 데이터 점 위에 떨어지면 위도를 1e-9° 밀어낸 뒤 계속한다.
    결과의 측지 목적함수가 medoid 보다 나쁘면 medoid 를 그대로 돌려준다.
    """
    order = np.lexsort((weights, lons, lats))
    lats, lons, weights = lats[order], lons[order], weights[order]

    proj = Proj(proj='aeqd', lat_0=medoid.lat, lon_0=medoid.lon, ellps='WGS84', units='m')
    xs, ys = proj(lons, lats)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    # 시작점: 평면상의 가중 무게중심
    zx = float(np.dot(weights, xs) / weights.sum())
    zy = float(np.dot(weights, ys) / weights.sum())

    for _ in range(MedianConfig.WEISZFELD_MAX_ITER):
        d = np.hypot(xs - zx, ys - zy)
        if np.any(d < 1e-12):
            zlon, zlat = proj(zx, zy, inverse=True)
            zlat = float(np.clip(zlat + MedianConfig.SINGULARITY_NUDGE_DEG, -90.0, 90.0))
            zx, zy = proj(zlon, zlat)
            d = np.hypot(xs - zx, ys - zy)
            if np.any(d < 1e-12):
                break
        inv = weights / d
        nx = float(np.dot(inv, xs) / inv.sum())
        ny = float(np.dot(inv, ys) / inv.sum())
        step = float(np.hypot(nx - zx, ny - zy))
        zx, zy = nx, ny
        if step < MedianConfig.WEISZFELD_STEP_M:
            break

    lon, lat = proj(zx, zy, inverse=True)
    candidate = GeoPoint(float(np.clip(lat, -90.0, 90.0)), float(lon))

    base = _objective_at(lats, lons, weights, medoid)
    refined = _objective_at(lats, lons, weights, candidate)
    if refined > base * (1 + MedianConfig.REFINE_RELATIVE_SLACK):
        logger.debug(f"[Median] Weiszfeld 결과가 medoid 보다 나쁨 ({refined:.3f} > {base:.3f} m) → medoid 유지")
        return medoid
    return candidate


# =============================================================================
# Batched summaries
# =============================================================================

def _summarize_one(lats, lons, weights, k: int, medoid_distances: np.ndarray, refine: bool) -> RobustSummary:
    """k: medoid 행, medoid_distances: medoid 에서 각 점까지의 거리 (m)"""
    medoid = GeoPoint(float(lats[k]), float(lons[k]))
    if refine and lats.size > 1:
        center = _weiszfeld_refine(lats, lons, weights, medoid)
        if center == medoid:
            return RobustSummary(medoid, lower_median(medoid_distances) / 1000.0, int(lats.size), refined=True)
        distances = distances_to(lats, lons, center)
        return RobustSummary(center, lower_median(distances) / 1000.0, int(lats.size), refined=True)
    return RobustSummary(medoid, lower_median(medoid_distances) / 1000.0, int(lats.size), refined=False)


def _flush(groups: Sequence[PointArrays], batch: list[int], refine: bool, out: list) -> None:
    """batch 에 속한 그룹들의 i<j 쌍을 이어 붙여 한 번에 거리 계산"""
    pieces_r1, pieces_r2, offsets = [], [], []
    lat_all, lon_all = [], []
    base = 0
    for gi in batch:
        lats, lons, _ = groups[gi]
        n = lats.size
        rows, cols = np.triu_indices(n, k=1)
        pieces_r1.append(rows + base)
        pieces_r2.append(cols + base)
        offsets.append((base, rows, cols))
        lat_all.append(lats)
        lon_all.append(lons)
        base += n

    lat_all = np.concatenate(lat_all)
    lon_all = np.concatenate(lon_all)
    r1 = np.concatenate(pieces_r1)
    r2 = np.concatenate(pieces_r2)
    if r1.size:
        meters, _ = geodesic_arrays(lat_all[r1], lon_all[r1], lat_all[r2], lon_all[r2])
    else:
        meters = np.zeros(0)

    cursor = 0
    for gi, (_, rows, cols) in zip(batch, offsets):
        lats, lons, weights = groups[gi]
        n = lats.size
        dist = np.zeros((n, n))
        m = rows.size
        if m:
            dist[rows, cols] = meters[cursor:cursor + m]
            dist[cols, rows] = dist[rows, cols]
        cursor += m
        objective = (dist * weights[np.newaxis, :]).sum(axis=1)
        k = _medoid_index(objective, lats, lons)
        out[gi] = _summarize_one(lats, lons, weights, k, dist[k], refine)


def _summarize_large(lats: np.ndarray, lons: np.ndarray, weights: np.ndarray, refine: bool) -> RobustSummary:
    """
    쌍 수가 PAIR_BATCH 를 넘는 그룹.

    n×n 행렬 대신 최대 PAIR_BATCH 개 거리의 행 블록으로 나눠 행별 가중합만 남긴다.
    행 값과 합산 순서가 전체 행렬 경로와 같으므로 결과도 같다.
    """
    n = lats.size
    rows_per_block = max(1, GeodesyConfig.PAIR_BATCH // n)
    objective = np.empty(n)
    for start in range(0, n, rows_per_block):
        stop = min(n, start + rows_per_block)
        block = _row_block(lats, lons, start, stop)
        objective[start:stop] = (block * weights[np.newaxis, :]).sum(axis=1)
    k = _medoid_index(objective, lats, lons)
    logger.debug(f"[Median] 큰 그룹 n={n} → 행 블록 {rows_per_block}행씩 계산")
    return _summarize_one(lats, lons, weights, k, _row_block(lats, lons, k, k + 1)[0], refine)


def summarize_groups(groups: Sequence[PointArrays], refine: bool = False) -> list[RobustSummary]:
    """
    여러 점 집합을 요약.

    그룹들의 점 쌍을 GeodesyConfig.PAIR_BATCH 까지 묶어 Vincenty 를 한 번에 돌린다.
    혼자서 PAIR_BATCH 를 넘는 그룹은 행 블록 단위로 따로 계산한다.
    결과는 그룹 순서대로 반환.
    """
    out: list[RobustSummary | None] = [None] * len(groups)
    batch: list[int] = []
    budget = 0
    for gi, (lats, lons, weights) in enumerate(groups):
        n = lats.size
        if n == 0:
            raise EmptySet(f"그룹 {gi} 가 비어 있습니다.")
        pairs = n * (n - 1) // 2
        if pairs > GeodesyConfig.PAIR_BATCH:
            out[gi] = _summarize_large(lats, lons, weights, refine)
            continue
        if batch and budget + pairs > GeodesyConfig.PAIR_BATCH:
            _flush(groups, batch, refine, out)
            batch, budget = [], 0
        batch.append(gi)
        budget += pairs
    if batch:
        _flush(groups, batch, refine, out)
    return out  # type: ignore[return-value]


# =============================================================================
# Public API
# =============================================================================

def l1_median(s: WeightedPointSet, refine: bool = False) -> GeoPoint:
    """
    가중 l1 중앙값.

    refine=False: 입력 점 중 가중 거리합 최소 점 (medoid)
    refine=True : medoid 중심 접평면에서 Weiszfeld 보정 (목적함수는 medoid 이하)
    """
    return summarize(s, refine=refine).center


def mad_dispersion(s: WeightedPointSet, center: GeoPoint) -> float:
    """중심까지 거리의 (아래쪽) 중앙값, km. 가중치는 무시."""
    s.require_non_empty()
    lats, lons, _ = s.arrays()
    return lower_median(distances_to(lats, lons, center)) / 1000.0


def summarize(s: WeightedPointSet, refine: bool = False) -> RobustSummary:
    """(center, dispersion_km, n, refined)"""
    s.require_non_empty()
    return summarize_groups([s.arrays()], refine=refine)[0]
