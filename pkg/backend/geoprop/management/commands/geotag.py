"""
문서 지오태깅 커맨드.

Usage:
    python manage.py geotag --shares data/shares.tsv --locations data/estimates.tsv --out data/geotags.tsv
    python manage.py geotag ... --min-users 3 --max-dispersion-km 100 --url-pattern '.*youtube.*'
"""

from geoprop.config import GeotagConfig
from geoprop.management.base import PipelineCommand, positive_int
from geoprop.serializers import FlatFileReader, write_geotags
from geoprop.services import canonicalize_url, filter_by_pattern, geotag_documents
from geoprop.services.utils import compile_pattern


class Command(PipelineCommand):
    help = (
        '공유 로그(url<TAB>user[<TAB>timestamp])와 사용자 위치로 문서를 지오태깅한다. '
        '출력: url<TAB>status<TAB>lat<TAB>lon<TAB>dispersion_km<TAB>n_users '
        '(REJECTED_TOO_FEW_USERS 는 lat/lon/dispersion 이 비어 있음)'
    )
    input_options = ('shares', 'locations')

    def add_arguments(self, parser):
        parser.add_argument('--shares', required=True, help='공유 로그 TSV')
        parser.add_argument('--locations', required=True, help='추정 TSV 또는 라벨 TSV')
        parser.add_argument(
            '--min-users',
            type=positive_int,
            default=GeotagConfig.MIN_USERS,
            help='필요한 서로 다른 공유자 수 (기본 3)'
        )
        parser.add_argument('--max-dispersion-km', type=float, help='분산 상한 (기본: 제한 없음)')
        parser.add_argument('--url-pattern', help='이 정규식에 걸리는 URL 만 (예: .*youtube.*)')
        parser.add_argument('--refine', action='store_true', help='l1 중앙값 접평면 보정')
        parser.add_argument('--out', required=True, help='결과 TSV 출력 경로')
        parser.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')

    def run(self, options):
        # 패턴 오류는 파일을 읽기 전에 알린다
        pattern = compile_pattern(options['url_pattern']) if options['url_pattern'] else None

        reader = FlatFileReader(strict=options['strict'])
        locations = reader.read_locations(options['locations'])
        shares = reader.read_shares(options['shares'], canonicalize_url)
        if pattern is not None:
            shares = list(filter_by_pattern(shares, pattern))

        stats = {}
        results = geotag_documents(
            shares,
            locations,
            min_users=options['min_users'],
            max_dispersion_km=options['max_dispersion_km'],
            refine=options['refine'],
            stats=stats,
        )
        write_geotags(options['out'], results)

        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 지오태깅 완료', {
            '공유 이벤트': len(shares),
            '해석 불가 URL': reader.stats['unparsable_urls'],
            '문서': len(results),
            **stats,
        })
