"""
Domain types for GEOPROP.

- GeoPoint: WGS-84 위도/경도 (모든 모듈의 기본 값)
- SocialGraph: 상호 멘션 가중 무방향 그래프
- LocationEstimate / GroundTruthLabel: 사용자 위치와 출처
- GeotagResult / DiscrepancyRecord / CurvePoint: 문서 지오태깅과 평가 결과

DB 테이블은 없다. 열거형만 Django TextChoices 를 사용한다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Iterator

import numpy as np
from django.db import models
from scipy import sparse

from .config import SolverDefaults
from .exceptions import EmptySet, InvalidConfig, InvalidCoordinate


# =============================================================================
# Choices
# =============================================================================

class LabelSource(models.TextChoices):
    GPS_MEDIAN = 'GPS_MEDIAN', 'GPS 중앙값'
    SELF_REPORT = 'SELF_REPORT', '프로필 자기 보고'


class Provenance(models.TextChoices):
    GROUND_TRUTH = 'GROUND_TRUTH', '정답 라벨'
    INFERRED = 'INFERRED', '전파 추정'


class GeotagStatus(models.TextChoices):
    GEOTAGGED = 'GEOTAGGED', '지오태그 부여'
    REJECTED_TOO_FEW_USERS = 'REJECTED_TOO_FEW_USERS', '공유 사용자 부족'
    REJECTED_DISPERSION = 'REJECTED_DISPERSION', '분산 임계값 초과'


# =============================================================================
# Geometry
# =============================================================================

@dataclass(frozen=True, order=True)
class GeoPoint:
    """
    WGS-84 위도/경도 (도 단위).

    생성 시 경도를 [-180, 180) 로 정규화한다 (+180 → -180).
    극점에서는 경도가 의미가 없으므로 0 으로 고정한다.
    """

    lat: float
    lon: float

    def __post_init__(self) -> None:
        lat = float(self.lat)
        lon = float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise InvalidCoordinate(f"좌표가 유한하지 않습니다: ({self.lat}, {self.lon})")
        if not -90.0 <= lat <= 90.0:
            raise InvalidCoordinate(f"위도 범위 초과: {lat}")

        if not -180.0 <= lon < 180.0:
            lon = (lon + 180.0) % 360.0 - 180.0
            # 부동소수점 나머지가 정확히 180 이 되는 경우
            if lon >= 180.0:
                lon -= 360.0
        if abs(lat) == 90.0:
            lon = 0.0

        object.__setattr__(self, 'lat', lat)
        object.__setattr__(self, 'lon', lon)

    def __str__(self) -> str:
        return f"({self.lat:.6f}, {self.lon:.6f})"


@dataclass(frozen=True)
class WeightedPointSet:
    """가중 점 집합 (가중치가 없으면 모두 1)"""

    points: tuple[GeoPoint, ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'points', tuple(self.points))
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            if len(weights) != len(self.points):
                raise ValueError('points 와 weights 의 길이가 다릅니다.')
            if any(not math.isfinite(w) or w <= 0 for w in weights):
                raise ValueError('가중치는 양의 유한값이어야 합니다.')
            object.__setattr__(self, 'weights', weights)

    @classmethod
    def of(cls, points: list[GeoPoint] | tuple[GeoPoint, ...], weights: list[float] | None = None) -> WeightedPointSet:
        return cls(tuple(points), tuple(weights) if weights is not None else None)

    def __len__(self) -> int:
        return len(self.points)

    def require_non_empty(self) -> None:
        if not self.points:
            raise EmptySet()

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(lats, lons, weights) numpy 배열"""
        lats = np.fromiter((p.lat for p in self.points), dtype=np.float64, count=len(self.points))
        lons = np.fromiter((p.lon for p in self.points), dtype=np.float64, count=len(self.points))
        if self.weights is None:
            weights = np.ones(len(self.points), dtype=np.float64)
        else:
            weights = np.asarray(self.weights, dtype=np.float64)
        return lats, lons, weights


@dataclass(frozen=True)
class RobustSummary:
    center: GeoPoint
    dispersion_km: float
    n: int
    refined: bool = False


# =============================================================================
# Social graph & labels
# =============================================================================

@dataclass(frozen=True)
class MentionRecord:
    """방향성 멘션 집계 (src → dst, count 회)"""

    src: str
    dst: str
    count: int


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """
    상호 멘션 무방향 가중 그래프.

    users 는 정렬된 사용자 ID, adjacency 는 대칭 CSR 행렬 (w_ij = w_ji ≥ 1).
    생성 후 변경하지 않으므로 스레드 간 공유 가능.
    """

    users: tuple[str, ...]
    adjacency: sparse.csr_matrix
    index: dict[str, int] = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.users)

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.nnz // 2)

    def __contains__(self, user: object) -> bool:
        return user in self.index

    def neighbors(self, user: str) -> list[tuple[str, int]]:
        """(이웃 ID, 가중치) 목록"""
        i = self.index[user]
        start, end = self.adjacency.indptr[i], self.adjacency.indptr[i + 1]
        cols = self.adjacency.indices[start:end]
        weights = self.adjacency.data[start:end]
        return [(self.users[j], int(w)) for j, w in zip(cols, weights)]

    def weight(self, a: str, b: str) -> int:
        if a not in self.index or b not in self.index:
            return 0
        return int(self.adjacency[self.index[a], self.index[b]])

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """i < j 인 간선만 (rows, cols, weights)"""
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def edges(self) -> Iterator[tuple[str, str, int]]:
        rows, cols, weights = self.edge_arrays()
        for i, j, w in zip(rows, cols, weights):
            yield self.users[i], self.users[j], int(w)


@dataclass(frozen=True)
class GroundTruthLabel:
    user: str
    location: GeoPoint
    source: str
    last_seen: datetime | None = None


GroundTruthLabels = dict[str, GroundTruthLabel]


@dataclass(frozen=True)
class ProfileRecord:
    """프로필 자유 텍스트 (선택적 last_seen 포함)"""

    user: str
    text: str
    last_seen: datetime | None = None


# =============================================================================
# Propagation
# =============================================================================

@dataclass(frozen=True)
class LocationEstimate:
    user: str
    location: GeoPoint
    provenance: str
    neighbor_dispersion_km: float = 0.0
    iteration_assigned: int = 0


@dataclass
class SolverConfig:
    """
    솔버 설정.

    threads 는 실행 방식만 바꾸고 결과에는 영향이 없다.
    chunk_size 는 작업 단위 크기로, 스레드 수와 무관하게 고정된다.
    """

    gamma_km: float = SolverDefaults.GAMMA_KM
    max_iterations: int = SolverDefaults.MAX_ITERATIONS
    movement_epsilon_km: float = SolverDefaults.MOVEMENT_EPSILON_KM
    min_moved_fraction: float = SolverDefaults.MIN_MOVED_FRACTION
    refine_median: bool = SolverDefaults.REFINE_MEDIAN
    threads: int = 1
    chunk_size: int = SolverDefaults.CHUNK_SIZE

    def validate(self) -> SolverConfig:
        problems = []
        if not (math.isfinite(self.gamma_km) and self.gamma_km > 0):
            problems.append(f"gamma_km must be > 0 (got {self.gamma_km})")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            problems.append(f"max_iterations must be a positive integer (got {self.max_iterations})")
        if not (math.isfinite(self.movement_epsilon_km) and self.movement_epsilon_km >= 0):
            problems.append(f"movement_epsilon_km must be >= 0 (got {self.movement_epsilon_km})")
        if not 0.0 <= self.min_moved_fraction <= 1.0:
            problems.append(f"min_moved_fraction must be in [0, 1] (got {self.min_moved_fraction})")
        if self.threads < 1:
            problems.append(f"threads must be >= 1 (got {self.threads})")
        if self.chunk_size < 1:
            problems.append(f"chunk_size must be >= 1 (got {self.chunk_size})")
        if problems:
            raise InvalidConfig('; '.join(problems))
        return self


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    located_count: int
    moved_count: int
    moved_km: float
    objective_km: float
    unlocated_edges: int


@dataclass
class SolverReport:
    iterations: list[IterationStats] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def iterations_run(self) -> int:
        # 0 번은 초기 상태 (라벨만 있는 상태)
        return max(len(self.iterations) - 1, 0)

    @property
    def located_counts(self) -> list[int]:
        return [s.located_count for s in self.iterations]

    @property
    def moved_km(self) -> list[float]:
        return [s.moved_km for s in self.iterations]

    @property
    def objectives_km(self) -> list[float]:
        return [s.objective_km for s in self.iterations]


# =============================================================================
# Document geotagging
# =============================================================================

@dataclass(frozen=True)
class ShareEvent:
    url: str
    user: str
    timestamp: datetime | None = None


@dataclass(frozen=True)
class GeotagResult:
    url: str
    status: str
    distinct_located_users: int
    location: GeoPoint | None = None
    dispersion_km: float | None = None

    @property
    def is_geotagged(self) -> bool:
        return self.status == GeotagStatus.GEOTAGGED


# =============================================================================
# Gazetteer / toponyms
# =============================================================================

@dataclass(frozen=True)
class GazetteerEntry:
    name: str
    location: GeoPoint
    population: int | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError('지명이 비어 있습니다.')


@dataclass(frozen=True)
class ToponymStats:
    name: str
    gazetteer_location: GeoPoint
    n_users: int
    median_gps_discrepancy_km: float


@dataclass
class UnambiguousToponymSet:
    entries: dict[str, GeoPoint] = field(default_factory=dict)
    stats: dict[str, ToponymStats] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: object) -> bool:
        return name in self.entries


# =============================================================================
# Evaluation
# =============================================================================

@dataclass(frozen=True)
class DiscrepancyRecord:
    item_id: str
    predicted: GeoPoint
    reference: GeoPoint
    discrepancy_km: float
    dispersion_km: float


@dataclass(frozen=True)
class CurvePoint:
    threshold_km: float
    coverage_fraction: float
    median_km: float | None
    mean_km: float | None
    n: int


@dataclass(frozen=True)
class DiscrepancySummary:
    n: int
    median_km: float | None
    mean_km: float | None
    stddev_km: float | None


@dataclass(frozen=True)
class CrossValidationSummary:
    median_km: float | None
    mean_km: float | None
    stddev_km: float | None
    located_fraction: float
    n_holdout: int
    n_located: int
    records: tuple[DiscrepancyRecord, ...] = field(default=(), repr=False, compare=False)


# =============================================================================
# CLI
# =============================================================================

@dataclass
class RunManifest:
    subcommand: str
    parameters: dict[str, Any]
    inputs: dict[str, str]
    outputs: dict[str, str]
    seed: int | None
    started_at: str
    finished_at: str
    version: str
