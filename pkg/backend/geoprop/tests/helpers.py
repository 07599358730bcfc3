"""
테스트 공용 도우미: 기준점에서 정확한 거리의 점 만들기, 임시 디렉터리, TSV 픽스처 쓰기.
"""

import shutil
import tempfile
from pathlib import Path

from pyproj import Geod

from geoprop.models import GeoPoint, LocationEstimate, Provenance

GEOD = Geod(ellps='WGS84')

SEOUL = GeoPoint(37.5665, 126.9780)
SANTIAGO = GeoPoint(-33.4489, -70.6693)


def offset(center: GeoPoint, km: float, azimuth: float = 0.0) -> GeoPoint:
    """center 에서 azimuth 방향으로 km 떨어진 점 (측지선)"""
    lon, lat, _ = GEOD.fwd(center.lon, center.lat, azimuth, km * 1000.0)
    return GeoPoint(lat, lon)


def oracle_km(a: GeoPoint, b: GeoPoint) -> float:
    _, _, meters = GEOD.inv(a.lon, a.lat, b.lon, b.lat)
    return meters / 1000.0


def located(points: dict[str, GeoPoint]) -> dict[str, LocationEstimate]:
    return {user: LocationEstimate(user, point, Provenance.GROUND_TRUTH) for user, point in points.items()}


class TempDirMixin:
    """setUp 에서 임시 디렉터리를 만들고 tearDown 에서 지운다"""

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp(prefix='geoprop-test-'))

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)
        super().tearDown()

    def write(self, name: str, lines: list[str]) -> Path:
        path = self.tmp / name
        path.write_text(''.join(f"{line}\n" for line in lines), encoding='utf-8')
        return path
