"""
Algorithm configuration for GEOPROP.
Constants shared by the geodesy, statistics, propagation and evaluation stages.

런타임에 바뀌는 값(스레드 수, strict 모드 등)은 settings.GEOPROP 에서 읽고,
여기에는 알고리즘 상수만 둔다.
"""


class GeodesyConfig:
    """WGS-84 타원체 및 Vincenty 반복 설정"""

    WGS84_A = 6378137.0                      # 장반경 (m)
    WGS84_F = 1 / 298.257223563              # 편평률
    WGS84_B = WGS84_A * (1 - WGS84_F)        # 단반경 (m)

    # 하버사인용 평균 지구 반경 (m)
    MEAN_EARTH_RADIUS_M = 6371008.8

    # |Δλ| < 1e-12 rad 이면 수렴
    VINCENTY_TOLERANCE = 1e-12
    VINCENTY_MAX_ITER = 200

    # 한 번의 벡터 연산에 넣을 최대 점 쌍 수 (메모리 상한)
    PAIR_BATCH = 1_000_000


class MedianConfig:
    """l1 중앙값(medoid) / Weiszfeld 보정 설정"""

    # 목적함수 값이 상대 1e-9 이내면 동률로 보고 (lat, lon) 사전순 최소를 선택
    TIE_RELATIVE_TOL = 1e-9

    # 접평면 Weiszfeld: 이동량 1 m 미만 또는 100회에서 종료
    WEISZFELD_STEP_M = 1.0
    WEISZFELD_MAX_ITER = 100

    # 반복점이 데이터 점 위에 떨어지면 위도를 이만큼 밀어낸다 (도)
    SINGULARITY_NUDGE_DEG = 1e-9

    # 보정 결과가 medoid 보다 나쁘지 않은지 확인할 때의 상대 여유
    REFINE_RELATIVE_SLACK = 1e-9


class SolverDefaults:
    """병렬 좌표 하강 솔버 기본값"""

    GAMMA_KM = 100.0
    MAX_ITERATIONS = 5
    MOVEMENT_EPSILON_KM = 1.0
    MIN_MOVED_FRACTION = 0.001
    REFINE_MEDIAN = False

    # 작업 단위 크기는 스레드 수와 무관하게 고정 (결과 재현성)
    CHUNK_SIZE = 256


class GeotagConfig:
    """문서 지오태깅 정책"""

    MIN_USERS = 3
    MAX_DISPERSION_KM = None

    # 평가용 URL 패턴
    URL_PATTERNS = {
        'youtube': r'.*youtube.*',
        'flickr': r'.*flickr.*',
    }


class LinkConfig:
    """프로필 교차 링크(다른 플랫폼 계정) 추출 패턴"""

    # account 그룹이 있으면 그 부분을 계정 문자열로 사용
    PROFILE_LINK_PATTERNS = {
        # 명시적 자기 보고 (프로필에 적힌 블로그 주소)
        'tumblr': r'https?://(?:www\.)*(?P<account>[a-zA-Z0-9_-]+\.tumblr\.com)',
        # 암시적 교차 링크 (동기화된 글 끝의 단축 URL)
        'tmblr_short': r'https?://(?P<account>tmblr\.co/[A-Za-z0-9_-]+)',
    }


class ToponymConfig:
    """명확한 지명(unambiguous toponym) 필터 임계값"""

    MIN_USERS = 5
    MAX_MEDIAN_KM = 50.0
    MIN_CHARS = 5


class EvalConfig:
    """교차 검증 / 곡선 생성 설정"""

    HOLDOUT_FRACTION = 0.10
    DEFAULT_SEED = 0

    # 로그 간격 임계값 그리드: 1 km ~ 20,000 km, 50개
    GRID_MIN_KM = 1.0
    GRID_MAX_KM = 20000.0
    GRID_POINTS = 50

    SCATTER_BINS = 20


class SyntheticConfig:
    """합성 그래프 생성기 기본값"""

    USERS = 10000
    CITIES = 30
    RADIUS_KM = 10.0
    LABEL_FRACTION = 0.20
    FRIENDS_PER_USER = 6
    MAX_MENTIONS = 5

    # 집은 도시 중심에서 0.45 r 이내 → 같은 도시 사용자끼리는 항상 r 이내
    HOME_SPREAD_RATIO = 0.45


class FormatConfig:
    """파일 포맷 설정"""

    COORD_DECIMALS = 6
    KM_DECIMALS = 3
    COMMENT_PREFIX = '#'
    MANIFEST_SUFFIX = '.manifest.json'
