from .base import *  # base.py의 모든 설정을 가져옴

DEBUG = True

# 로컬에서는 솔버 반복/스킵된 레코드까지 상세하게
GEOPROP_LOG_LEVEL = env('GEOPROP_LOG_LEVEL', default='DEBUG')
LOGGING['loggers']['geoprop']['level'] = GEOPROP_LOG_LEVEL
LOGGING['loggers']['geoprop.services']['level'] = GEOPROP_LOG_LEVEL
