"""
명확한 지명 집합 생성 커맨드.

Usage:
    python manage.py toponyms --observations data/observations.tsv --gazetteer data/gazetteer.tsv \
        --out data/toponyms.tsv
"""

from geoprop.config import ToponymConfig
from geoprop.management.base import PipelineCommand, positive_int
from geoprop.serializers import FlatFileReader, write_toponyms
from geoprop.services import Gazetteer, build_unambiguous


class Command(PipelineCommand):
    help = (
        'GPS 가 붙은 프로필 관측(user<TAB>text<TAB>lat<TAB>lon)으로 명확한 지명을 고른다. '
        '출력: name<TAB>lat<TAB>lon<TAB>n_users<TAB>median_km'
    )
    input_options = ('observations', 'gazetteer')

    def add_arguments(self, parser):
        parser.add_argument('--observations', required=True, help='관측 TSV')
        parser.add_argument('--gazetteer', required=True, help='지명 사전 TSV')
        parser.add_argument('--min-users', type=positive_int, default=ToponymConfig.MIN_USERS)
        parser.add_argument('--max-median-km', type=float, default=ToponymConfig.MAX_MEDIAN_KM)
        parser.add_argument('--min-chars', type=positive_int, default=ToponymConfig.MIN_CHARS)
        parser.add_argument('--out', required=True, help='지명 TSV 출력 경로')
        parser.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')

    def run(self, options):
        reader = FlatFileReader(strict=options['strict'])
        gazetteer = Gazetteer(reader.read_gazetteer(options['gazetteer']))
        stats = {}
        toponyms = build_unambiguous(
            reader.read_observations(options['observations']),
            gazetteer,
            min_users=options['min_users'],
            max_median_km=options['max_median_km'],
            min_chars=options['min_chars'],
            stats=stats,
        )
        write_toponyms(options['out'], toponyms)

        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 지명 집합 생성 완료', {'지명': len(toponyms), **stats})
