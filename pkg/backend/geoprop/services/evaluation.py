"""
Accuracy and coverage evaluation.

- cross_validate: 라벨 일부를 숨기고 솔버를 돌려 숨긴 사용자의 오차 측정
- discrepancy_cdf / coverage_curve / error_characteristic / dispersion_scatter: 곡선 데이터
- discrepancy_summary: 제한 유무에 따른 표 한 줄 (개수, 중앙값, 평균, 표준편차)

중앙값은 어디서나 같은 규칙 (짝수 개면 아래쪽 중앙 원소).
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from ..config import EvalConfig
from ..exceptions import EmptyInput, InsufficientLabels
from ..models import (
    CrossValidationSummary,
    CurvePoint,
    DiscrepancyRecord,
    DiscrepancySummary,
    GeoPoint,
    GroundTruthLabels,
    Provenance,
    SocialGraph,
    SolverConfig,
)
from .geodesy import vincenty_distance

logger = logging.getLogger(__name__)


# =============================================================================
# Records
# =============================================================================

def make_record(item_id: str, predicted: GeoPoint, reference: GeoPoint, dispersion_km: float) -> DiscrepancyRecord:
    """discrepancy_km = vincenty(predicted, reference) / 1000"""
    return DiscrepancyRecord(
        item_id=item_id,
        predicted=predicted,
        reference=reference,
        discrepancy_km=vincenty_distance(predicted, reference) / 1000.0,
        dispersion_km=float(dispersion_km),
    )


def _require(records: Sequence[DiscrepancyRecord]) -> None:
    if not records:
        raise EmptyInput()


def _arrays(records: Sequence[DiscrepancyRecord]) -> tuple[np.ndarray, np.ndarray]:
    discrepancy = np.fromiter((r.discrepancy_km for r in records), dtype=np.float64, count=len(records))
    dispersion = np.fromiter((r.dispersion_km for r in records), dtype=np.float64, count=len(records))
    return discrepancy, dispersion


def _median(values: np.ndarray) -> float | None:
    if values.size == 0:
        return None
    ordered = np.sort(values)
    return float(ordered[(ordered.size - 1) // 2])


def _mean(values: np.ndarray) -> float | None:
    if values.size == 0:
        return None
    return math.fsum(values.tolist()) / values.size


def _stddev(values: np.ndarray) -> float | None:
    # 모집단 표준편차
    if values.size == 0:
        return None
    mean = _mean(values)
    return math.sqrt(math.fsum(((values - mean) ** 2).tolist()) / values.size)


def default_grid() -> list[float]:
    """1 km ~ 20,000 km 로그 간격 50개"""
    return np.geomspace(EvalConfig.GRID_MIN_KM, EvalConfig.GRID_MAX_KM, EvalConfig.GRID_POINTS).tolist()


# =============================================================================
# Curves
# =============================================================================

def discrepancy_cdf(records: Sequence[DiscrepancyRecord], grid: Sequence[float] | None = None) -> list[tuple[float, float]]:
    """경험적 CDF: 각 임계값 t 에 대해 discrepancy ≤ t 인 비율"""
    _require(records)
    grid = list(grid) if grid is not None else default_grid()
    discrepancy, _ = _arrays(records)
    ordered = np.sort(discrepancy)
    counts = np.searchsorted(ordered, np.asarray(grid, dtype=np.float64), side='right')
    return [(float(t), int(c) / ordered.size) for t, c in zip(grid, counts)]


def coverage_curve(records: Sequence[DiscrepancyRecord], thresholds: Sequence[float] | None = None) -> list[CurvePoint]:
    """분산 임계값별 커버리지와 남은 레코드의 중앙값/평균 오차"""
    _require(records)
    thresholds = list(thresholds) if thresholds is not None else default_grid()
    discrepancy, dispersion = _arrays(records)
    total = discrepancy.size

    points = []
    for t in thresholds:
        kept = discrepancy[dispersion <= t]
        points.append(CurvePoint(
            threshold_km=float(t),
            coverage_fraction=kept.size / total,
            median_km=_median(kept),
            mean_km=_mean(kept),
            n=int(kept.size),
        ))
    return points


def error_characteristic(records: Sequence[DiscrepancyRecord]) -> list[tuple[float, float]]:
    """
    평균 오차 특성 곡선.
    서로 다른 분산 값 하나하나를 임계값으로 삼아 (남은 레코드의 평균 오차, 남은 비율) 출력.
    """
    _require(records)
    discrepancy, dispersion = _arrays(records)
    total = discrepancy.size
    curve = []
    for t in np.unique(dispersion):
        kept = discrepancy[dispersion <= t]
        curve.append((_mean(kept), kept.size / total))
    return curve


def dispersion_scatter(records: Sequence[DiscrepancyRecord], bins: int | None = None) -> list[dict]:
    """
    분산 구간별 오차 추세 (로그 간격 구간).

    Returns:
        [{'lower_km', 'upper_km', 'n', 'median_km'}, ...]: 첫 구간은 0 부터 시작
    """
    _require(records)
    bins = bins or EvalConfig.SCATTER_BINS
    discrepancy, dispersion = _arrays(records)
    edges = np.concatenate([[0.0], np.geomspace(EvalConfig.GRID_MIN_KM, EvalConfig.GRID_MAX_KM, bins)])
    rows = []
    for lower, upper in zip(edges[:-1], edges[1:]):
        in_bin = (dispersion > lower) & (dispersion <= upper) if lower > 0 else dispersion <= upper
        rows.append({
            'lower_km': float(lower),
            'upper_km': float(upper),
            'n': int(in_bin.sum()),
            'median_km': _median(discrepancy[in_bin]),
        })
    beyond = dispersion > edges[-1]
    if beyond.any():
        rows.append({
            'lower_km': float(edges[-1]),
            'upper_km': math.inf,
            'n': int(beyond.sum()),
            'median_km': _median(discrepancy[beyond]),
        })
    return rows


def discrepancy_summary(records: Sequence[DiscrepancyRecord], max_dispersion_km: float | None = None) -> DiscrepancySummary:
    """(개수, 중앙값, 평균, 표준편차): max_dispersion_km 가 있으면 그 이하만"""
    _require(records)
    discrepancy, dispersion = _arrays(records)
    if max_dispersion_km is not None:
        discrepancy = discrepancy[dispersion <= max_dispersion_km]
    return DiscrepancySummary(
        n=int(discrepancy.size),
        median_km=_median(discrepancy),
        mean_km=_mean(discrepancy),
        stddev_km=_stddev(discrepancy),
    )


# =============================================================================
# Cross validation
# =============================================================================

def cross_validate(
    graph: SocialGraph,
    labels: GroundTruthLabels,
    config: SolverConfig | None = None,
    holdout_fraction: float = EvalConfig.HOLDOUT_FRACTION,
    seed: int = EvalConfig.DEFAULT_SEED,
    holdout_source: str | None = None,
) -> CrossValidationSummary:
    """
    Leave-many-out 교차 검증.

    holdout_source 를 주면 (예: GPS_MEDIAN) 그 출처의 라벨에서만 숨길 사용자를 뽑는다.
    같은 seed 면 항상 같은 결과.
    """
    from .propagation import solve

    pool = sorted(u for u, lab in labels.items() if holdout_source is None or lab.source == holdout_source)
    n_holdout = int(round(holdout_fraction * len(pool)))
    if n_holdout <= 0:
        raise InsufficientLabels(
            f"숨길 라벨이 없습니다 (후보 {len(pool)}명, 비율 {holdout_fraction})",
            candidates=len(pool), holdout_fraction=holdout_fraction,
        )
    if n_holdout >= len(labels):
        raise InsufficientLabels('학습에 쓸 라벨이 남지 않습니다.', candidates=len(pool))

    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pool), size=n_holdout, replace=False)
    holdout = sorted(pool[i] for i in chosen)
    hidden = set(holdout)
    training = {u: lab for u, lab in labels.items() if u not in hidden}

    logger.info(f"[CV] 라벨 {len(labels)}명 중 {n_holdout}명 숨김 (seed={seed})")
    estimates, _ = solve(graph, training, config)

    records = []
    for user in holdout:
        estimate = estimates.get(user)
        if estimate is None or estimate.provenance != Provenance.INFERRED:
            continue
        records.append(make_record(user, estimate.location, labels[user].location, estimate.neighbor_dispersion_km))

    discrepancy, _ = _arrays(records) if records else (np.zeros(0), np.zeros(0))
    summary = CrossValidationSummary(
        median_km=_median(discrepancy),
        mean_km=_mean(discrepancy),
        stddev_km=_stddev(discrepancy),
        located_fraction=len(records) / n_holdout,
        n_holdout=n_holdout,
        n_located=len(records),
        records=tuple(records),
    )
    if not records:
        logger.warning('[CV] 숨긴 사용자 중 위치가 추정된 사용자가 없습니다.')
    else:
        logger.info(
            f"[CV] 중앙값 {summary.median_km:.3f} km, 평균 {summary.mean_km:.3f} km, "
            f"표준편차 {summary.stddev_km:.3f} km, 위치 비율 {summary.located_fraction:.3f}"
        )
    return summary


__all__ = [
    'coverage_curve',
    'cross_validate',
    'default_grid',
    'discrepancy_cdf',
    'discrepancy_summary',
    'dispersion_scatter',
    'error_characteristic',
    'make_record',
]
