"""
Geodesic distance on the WGS-84 ellipsoid.

Vincenty 역문제 (벡터화) 와 하버사인. 다른 모든 모듈의 거리 d(·,·) 는 여기서 나온다.

Policy:
    대척점 근처에서 Vincenty 가 200회 안에 수렴하지 않으면
    기본은 하버사인으로 대체하고 converged=False 로 표시,
    strict 모드에서는 NonConvergence 를 올린다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from ..config import GeodesyConfig
from ..exceptions import NonConvergence
from ..models import GeoPoint

logger = logging.getLogger(__name__)

_A = GeodesyConfig.WGS84_A
_F = GeodesyConfig.WGS84_F
_B = GeodesyConfig.WGS84_B
_E2_PRIME = (_A ** 2 - _B ** 2) / _B ** 2


@dataclass(frozen=True)
class GeodesicResult:
    meters: float
    converged: bool
    iterations: int


def strict_geodesy_enabled() -> bool:
    """settings.GEOPROP['STRICT_GEODESY'] (기본 False)"""
    return bool(getattr(settings, 'GEOPROP', {}).get('STRICT_GEODESY', False))


# =============================================================================
# Vectorized cores
# =============================================================================

def _canonical_order(lat1, lon1, lat2, lon2):
    """(lat, lon) 사전순으로 작은 쪽을 첫 점으로 → d(a,b) == d(b,a) 비트 단위 일치"""
    swap = (lat1 > lat2) | ((lat1 == lat2) & (lon1 > lon2))
    return (
        np.where(swap, lat2, lat1),
        np.where(swap, lon2, lon1),
        np.where(swap, lat1, lat2),
        np.where(swap, lon1, lon2),
    )


def haversine_arrays(lat1, lon1, lat2, lon2) -> np.ndarray:
    """구면 대원 거리 (m), 평균 반경 6371008.8 m"""
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(np.asarray(lon2, dtype=np.float64) - np.asarray(lon1, dtype=np.float64))
    h = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2) ** 2
    h = np.clip(h, 0.0, 1.0)
    return 2 * GeodesyConfig.MEAN_EARTH_RADIUS_M * np.arcsin(np.sqrt(h))


def vincenty_arrays(lat1, lon1, lat2, lon2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vincenty 역문제 (벡터화).

    Returns:
        (meters, converged, iterations): 수렴하지 않은 원소의 meters 는 NaN
    """
    lat1 = np.atleast_1d(np.asarray(lat1, dtype=np.float64))
    lon1 = np.atleast_1d(np.asarray(lon1, dtype=np.float64))
    lat2 = np.atleast_1d(np.asarray(lat2, dtype=np.float64))
    lon2 = np.atleast_1d(np.asarray(lon2, dtype=np.float64))
    lat1, lon1, lat2, lon2 = _canonical_order(lat1, lon1, lat2, lon2)

    dlon = (lon2 - lon1 + 180.0) % 360.0 - 180.0
    L = np.radians(dlon)
    U1 = np.arctan((1 - _F) * np.tan(np.radians(lat1)))
    U2 = np.arctan((1 - _F) * np.tan(np.radians(lat2)))
    sinU1, cosU1 = np.sin(U1), np.cos(U1)
    sinU2, cosU2 = np.sin(U2), np.cos(U2)

    shape = L.shape
    lam = L.copy()
    active = np.ones(shape, dtype=bool)
    iterations = np.zeros(shape, dtype=np.int64)

    sin_sigma = np.zeros(shape)
    cos_sigma = np.ones(shape)
    sigma = np.zeros(shape)
    cos_sq_alpha = np.ones(shape)
    cos2_sigma_m = np.zeros(shape)

    with np.errstate(invalid='ignore', divide='ignore'):
        for _ in range(GeodesyConfig.VINCENTY_MAX_ITER):
            sin_lam = np.sin(lam)
            cos_lam = np.cos(lam)
            s_sigma = np.sqrt((cosU2 * sin_lam) ** 2 + (cosU1 * sinU2 - sinU1 * cosU2 * cos_lam) ** 2)
            c_sigma = sinU1 * sinU2 + cosU1 * cosU2 * cos_lam
            sig = np.arctan2(s_sigma, c_sigma)
            sin_alpha = np.where(s_sigma == 0.0, 0.0, cosU1 * cosU2 * sin_lam / s_sigma)
            c_sq_alpha = 1 - sin_alpha ** 2
            # 적도선 위의 두 점: cos²α = 0
            c2_sigma_m = np.where(c_sq_alpha == 0.0, 0.0, c_sigma - 2 * sinU1 * sinU2 / c_sq_alpha)
            C = _F / 16 * c_sq_alpha * (4 + _F * (4 - 3 * c_sq_alpha))
            lam_next = L + (1 - C) * _F * sin_alpha * (
                sig + C * s_sigma * (c2_sigma_m + C * c_sigma * (-1 + 2 * c2_sigma_m ** 2))
            )

            # 아직 반복 중인 원소만 갱신
            sin_sigma = np.where(active, s_sigma, sin_sigma)
            cos_sigma = np.where(active, c_sigma, cos_sigma)
            sigma = np.where(active, sig, sigma)
            cos_sq_alpha = np.where(active, c_sq_alpha, cos_sq_alpha)
            cos2_sigma_m = np.where(active, c2_sigma_m, cos2_sigma_m)
            iterations = iterations + active

            done = np.abs(lam_next - lam) < GeodesyConfig.VINCENTY_TOLERANCE
            lam = np.where(active, lam_next, lam)
            active &= ~done
            if not active.any():
                break

        u_sq = cos_sq_alpha * _E2_PRIME
        A = 1 + u_sq / 16384 * (4096 + u_sq * (-768 + u_sq * (320 - 175 * u_sq)))
        B = u_sq / 1024 * (256 + u_sq * (-128 + u_sq * (74 - 47 * u_sq)))
        delta_sigma = B * sin_sigma * (
            cos2_sigma_m + B / 4 * (
                cos_sigma * (-1 + 2 * cos2_sigma_m ** 2)
                - B / 6 * cos2_sigma_m * (-3 + 4 * sin_sigma ** 2) * (-3 + 4 * cos2_sigma_m ** 2)
            )
        )
        meters = _B * A * (sigma - delta_sigma)

    converged = ~active
    meters = np.where(converged, meters, np.nan)
    return meters, converged, iterations


def geodesic_arrays(lat1, lon1, lat2, lon2, strict: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Vincenty 거리 배열 + 수렴 플래그. 미수렴 원소는 정책에 따라 처리.

    Returns:
        (meters, converged)
    """
    if strict is None:
        strict = strict_geodesy_enabled()

    meters, converged, _ = vincenty_arrays(lat1, lon1, lat2, lon2)
    if converged.all():
        return meters, converged

    failed = ~converged
    n_failed = int(failed.sum())
    if strict:
        raise NonConvergence(f"Vincenty 미수렴 {n_failed}쌍 (strict 모드)", pairs=n_failed)

    logger.debug(f"[Geodesy] Vincenty 미수렴 {n_failed}쌍 → 하버사인 대체")
    lat1 = np.atleast_1d(np.asarray(lat1, dtype=np.float64))
    lon1 = np.atleast_1d(np.asarray(lon1, dtype=np.float64))
    lat2 = np.atleast_1d(np.asarray(lat2, dtype=np.float64))
    lon2 = np.atleast_1d(np.asarray(lon2, dtype=np.float64))
    lat1, lon1, lat2, lon2 = np.broadcast_arrays(lat1, lon1, lat2, lon2)
    fallback = haversine_arrays(lat1[failed], lon1[failed], lat2[failed], lon2[failed])
    meters = meters.copy()
    meters[failed] = fallback
    return meters, converged


# =============================================================================
# Point API
# =============================================================================

def vincenty_inverse(a: GeoPoint, b: GeoPoint, strict: bool | None = None) -> GeodesicResult:
    """두 점의 측지선 길이 (m) 와 수렴 여부"""
    if strict is None:
        strict = strict_geodesy_enabled()

    meters, converged, iterations = vincenty_arrays(a.lat, a.lon, b.lat, b.lon)
    if converged[0]:
        return GeodesicResult(float(meters[0]), True, int(iterations[0]))

    if strict:
        raise NonConvergence(f"Vincenty 미수렴: {a} ↔ {b}", a=str(a), b=str(b))

    logger.debug(f"[Geodesy] Vincenty 미수렴 {a} ↔ {b} → 하버사인 대체")
    return GeodesicResult(haversine_distance(a, b), False, int(iterations[0]))


def vincenty_distance(a: GeoPoint, b: GeoPoint, strict: bool | None = None) -> float:
    """WGS-84 측지선 거리 (m)"""
    return vincenty_inverse(a, b, strict=strict).meters


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """구면 대원 거리 (m). 항상 수렴"""
    return float(haversine_arrays(a.lat, a.lon, b.lat, b.lon))


def distances_to(lats: np.ndarray, lons: np.ndarray, center: GeoPoint, strict: bool | None = None) -> np.ndarray:
    """각 점에서 center 까지의 거리 (m)"""
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    if lats.size == 0:
        return np.zeros(0)
    meters, _ = geodesic_arrays(
        lats, lons, np.full(lats.shape, center.lat), np.full(lons.shape, center.lon), strict=strict,
    )
    return meters


def pairwise_distances(lats: np.ndarray, lons: np.ndarray, strict: bool | None = None) -> np.ndarray:
    """
    n×n 거리 행렬 (m). 대각선 0, 대칭.

    i < j 쌍만 계산해 전치로 채운다. 쌍이 많으면 행 블록 단위로 나눠 계산.
    """
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    n = lats.size
    matrix = np.zeros((n, n))
    if n < 2:
        return matrix

    rows, cols = np.triu_indices(n, k=1)
    batch = GeodesyConfig.PAIR_BATCH
    for start in range(0, rows.size, batch):
        r = rows[start:start + batch]
        c = cols[start:start + batch]
        meters, _ = geodesic_arrays(lats[r], lons[r], lats[c], lons[c], strict=strict)
        matrix[r, c] = meters
    matrix[cols, rows] = matrix[rows, cols]
    return matrix
