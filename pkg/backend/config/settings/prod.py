from .base import *  # base.py의 모든 설정을 가져옴

DEBUG = False

# =============================================================================
# Logging (배치 서버)
# =============================================================================
# 위치 추정 배치는 로그가 많으므로 서비스 로그는 INFO 이상만, 포맷에 로거 이름 포함
LOGGING['formatters']['verbose']['format'] = '[{levelname}] {asctime} {name} {module}.{funcName}: {message}'
LOGGING['loggers']['geoprop.services']['level'] = env('GEOPROP_LOG_LEVEL', default='INFO')
