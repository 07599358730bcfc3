"""
정답 라벨 생성 커맨드 (GPS 중앙값 + 프로필 자기 보고, GPS 우선).

Usage:
    python manage.py labels_build --gps data/gps.tsv --out data/labels.tsv
    python manage.py labels_build --profiles data/profiles.tsv --gazetteer data/gazetteer.tsv \
        --last-seen-cutoff 2014-02-01T00:00:00Z --out data/labels.tsv
"""

from geoprop.exceptions import UsageError
from geoprop.management.base import PipelineCommand
from geoprop.serializers import FlatFileReader, write_labels
from geoprop.services import Gazetteer, gps_ground_truth, merge_labels, self_report_ground_truth
from geoprop.services.utils import parse_timestamp


class Command(PipelineCommand):
    help = (
        'GPS 파일(user<TAB>lat<TAB>lon)과 프로필 파일(user<TAB>text[<TAB>last_seen])로 라벨을 만든다. '
        '출력: user<TAB>lat<TAB>lon<TAB>source[<TAB>last_seen]'
    )
    input_options = ('gps', 'profiles', 'gazetteer')

    def add_arguments(self, parser):
        parser.add_argument('--gps', help='GPS 관측 TSV')
        parser.add_argument('--profiles', help='프로필 위치 텍스트 TSV')
        parser.add_argument('--gazetteer', help='지명 사전 TSV (name, lat, lon[, population])')
        parser.add_argument(
            '--last-seen-cutoff',
            type=parse_timestamp,
            help='이 시각보다 오래된 자기 보고 프로필 제외 (ISO-8601)'
        )
        parser.add_argument('--out', required=True, help='라벨 TSV 출력 경로')
        parser.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')

    def run(self, options):
        if not options['gps'] and not options['profiles']:
            raise UsageError('--gps 또는 --profiles 중 하나는 필요합니다.')
        if options['profiles'] and not options['gazetteer']:
            raise UsageError('--profiles 를 쓰려면 --gazetteer 가 필요합니다.')

        reader = FlatFileReader(strict=options['strict'])
        gps = gps_ground_truth(reader.read_gps(options['gps'])) if options['gps'] else {}

        self_report = {}
        match_stats = {}
        if options['profiles']:
            gazetteer = Gazetteer(reader.read_gazetteer(options['gazetteer']))
            self_report = self_report_ground_truth(
                reader.read_profiles(options['profiles']),
                gazetteer,
                last_seen_cutoff=options['last_seen_cutoff'],
                stats=match_stats,
            )

        labels = merge_labels(gps, self_report)
        write_labels(options['out'], labels)

        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 라벨 생성 완료', {
            'GPS_MEDIAN': len(gps),
            'SELF_REPORT': len(self_report),
            '중복 (GPS 사용)': len(gps.keys() & self_report.keys()),
            '모호한 지명': match_stats.get('ambiguous', 0),
            '오래된 프로필': match_stats.get('stale', 0),
            '전체': len(labels),
        })
