"""
Seeded synthetic social graphs with planted homes.

도시 K 개를 지구 위에 뿌리고, 사용자마다 도시 하나를 골라 도시 중심 근처에 집을 둔다.
친구는 같은 도시 사용자 중에서만 고르므로 모든 친구가 집에서 r km 이내에 산다.
생성기가 정답(truth)을 알고 있으므로 복원 정확도 검증의 기준으로 쓴다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from pyproj import Geod

from ..config import SyntheticConfig
from ..exceptions import InvalidConfig
from ..models import GeoPoint, GroundTruthLabel, GroundTruthLabels, LabelSource, MentionRecord, ShareEvent

logger = logging.getLogger(__name__)

_GEOD = Geod(ellps='WGS84')

# 도시 중심은 극지방을 피해 이 위도 범위 안에 둔다
_CITY_MAX_LAT = 60.0


@dataclass
class SyntheticDataset:
    mentions: list[MentionRecord]
    labels: GroundTruthLabels
    truth: dict[str, GeoPoint]
    cities: list[GeoPoint]
    city_of: dict[str, int] = field(repr=False)
    radius_km: float = SyntheticConfig.RADIUS_KM

    @property
    def unlabeled(self) -> list[str]:
        return sorted(u for u in self.truth if u not in self.labels)


def _offset_points(center_lats, center_lons, distances_m, rng) -> tuple[np.ndarray, np.ndarray]:
    azimuths = rng.uniform(0.0, 360.0, size=distances_m.size)
    lons, lats, _ = _GEOD.fwd(center_lons, center_lats, azimuths, distances_m)
    lons = (np.asarray(lons) + 180.0) % 360.0 - 180.0
    return np.asarray(lats), lons


def _random_cities(k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # 구면 위 균일 (위도는 sin 값으로 뽑는다)
    bound = np.sin(np.radians(_CITY_MAX_LAT))
    lats = np.degrees(np.arcsin(rng.uniform(-bound, bound, size=k)))
    lons = rng.uniform(-180.0, 180.0, size=k)
    return lats, lons


def generate(
    users: int = SyntheticConfig.USERS,
    cities: int = SyntheticConfig.CITIES,
    radius_km: float = SyntheticConfig.RADIUS_KM,
    label_fraction: float = SyntheticConfig.LABEL_FRACTION,
    friends_per_user: int = SyntheticConfig.FRIENDS_PER_USER,
    seed: int = 0,
) -> SyntheticDataset:
    """
    합성 데이터셋 생성.

    - 집: 도시 중심에서 HOME_SPREAD_RATIO·r 이내 (면적 기준 균일)
    - 친구: 같은 도시 사용자 중 friends_per_user 명, 양방향 멘션 (횟수 1 ~ MAX_MENTIONS)
    - 라벨: 전체 사용자 중 label_fraction 비율 (GPS_MEDIAN, 집 위치 그대로)

    같은 seed 면 항상 같은 데이터.
    """
    if users < 2 or cities < 1 or not radius_km > 0 or not 0.0 <= label_fraction <= 1.0 or friends_per_user < 1:
        raise InvalidConfig(
            f"잘못된 생성 파라미터: users={users}, cities={cities}, radius_km={radius_km}, "
            f"label_fraction={label_fraction}, friends_per_user={friends_per_user}"
        )

    rng = np.random.default_rng(seed)
    width = len(str(users - 1))
    ids = [f"u{i:0{width}d}" for i in range(users)]

    city_lats, city_lons = _random_cities(cities, rng)
    assignment = rng.integers(0, cities, size=users)
    spread_m = radius_km * 1000.0 * SyntheticConfig.HOME_SPREAD_RATIO
    distances = spread_m * np.sqrt(rng.uniform(0.0, 1.0, size=users))
    home_lats, home_lons = _offset_points(city_lats[assignment], city_lons[assignment], distances, rng)

    truth = {uid: GeoPoint(float(lat), float(lon)) for uid, lat, lon in zip(ids, home_lats, home_lons)}
    city_of = {uid: int(c) for uid, c in zip(ids, assignment)}

    mentions: list[MentionRecord] = []
    for c in range(cities):
        members = np.flatnonzero(assignment == c)
        if members.size < 2:
            continue
        k = min(friends_per_user, members.size - 1)
        for pos, i in enumerate(members):
            picks = rng.choice(members.size - 1, size=k, replace=False)
            picks[picks >= pos] += 1
            counts = rng.integers(1, SyntheticConfig.MAX_MENTIONS + 1, size=(k, 2))
            for j, (forward, backward) in zip(members[picks], counts):
                mentions.append(MentionRecord(ids[i], ids[j], int(forward)))
                mentions.append(MentionRecord(ids[j], ids[i], int(backward)))

    n_labels = int(round(label_fraction * users))
    labeled = sorted(ids[i] for i in rng.choice(users, size=n_labels, replace=False))
    labels = {uid: GroundTruthLabel(uid, truth[uid], LabelSource.GPS_MEDIAN) for uid in labeled}

    logger.info(
        f"[Synthetic] 사용자 {users}, 도시 {cities}, 멘션 {len(mentions)}건, 라벨 {len(labels)}명 (seed={seed})"
    )
    return SyntheticDataset(
        mentions=mentions,
        labels=labels,
        truth=truth,
        cities=[GeoPoint(float(lat), float(lon)) for lat, lon in zip(city_lats, city_lons)],
        city_of=city_of,
        radius_km=radius_km,
    )


def generate_shares(
    dataset: SyntheticDataset,
    documents: int = 100,
    sharers_per_document: int = 5,
    seed: int = 0,
) -> tuple[list[ShareEvent], dict[str, GeoPoint]]:
    """
    도시별 지역 문서 공유 로그.

    문서마다 도시 하나를 골라 그 도시 사용자들이 공유한다.
    Returns:
        (공유 이벤트, url → 문서가 다루는 도시 중심)
    """
    rng = np.random.default_rng(seed)
    by_city: dict[int, list[str]] = {}
    for uid in sorted(dataset.city_of):
        by_city.setdefault(dataset.city_of[uid], []).append(uid)
    populated = sorted(c for c, members in by_city.items() if len(members) >= sharers_per_document)
    if not populated:
        raise InvalidConfig(f"공유자 {sharers_per_document}명 이상인 도시가 없습니다.")

    width = len(str(max(documents - 1, 0)))
    shares: list[ShareEvent] = []
    references: dict[str, GeoPoint] = {}
    for d in range(documents):
        city = populated[int(rng.integers(0, len(populated)))]
        url = f"http://news.example.com/story/{d:0{width}d}"
        members = by_city[city]
        for i in rng.choice(len(members), size=sharers_per_document, replace=False):
            shares.append(ShareEvent(url=url, user=members[i]))
        references[url] = dataset.cities[city]
    return shares, references
