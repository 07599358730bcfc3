"""
다른 플랫폼 계정으로 위치를 옮기는 커맨드.

Usage:
    python manage.py align --profiles data/profiles.tsv --locations data/estimates.tsv --out data/tumblr.tsv
    python manage.py align ... --pattern 'https?://(?P<account>[a-z0-9-]+\\.tumblr\\.com)'
"""

from geoprop.config import LinkConfig
from geoprop.management.base import PipelineCommand
from geoprop.serializers import FlatFileReader, write_estimates
from geoprop.services import extract_profile_links, transfer_locations
from geoprop.services.utils import compile_patterns


class Command(PipelineCommand):
    help = (
        '프로필 텍스트(user<TAB>text)의 외부 계정 링크로 사용자 위치를 계정에 옮긴다. '
        '출력: 추정 TSV 와 같은 형식 (user 칸이 외부 계정)'
    )
    input_options = ('profiles', 'locations')

    def add_arguments(self, parser):
        parser.add_argument('--profiles', required=True, help='프로필 텍스트 TSV')
        parser.add_argument('--locations', required=True, help='추정 TSV 또는 라벨 TSV')
        parser.add_argument(
            '--pattern',
            action='append',
            help='계정 추출 정규식 (여러 번 지정 가능, 기본: tumblr / tmblr 단축 링크)'
        )
        parser.add_argument('--out', required=True, help='계정 위치 TSV 출력 경로')
        parser.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')

    def run(self, options):
        patterns = options['pattern'] or list(LinkConfig.PROFILE_LINK_PATTERNS.values())
        options['pattern'] = patterns
        compiled = compile_patterns(patterns)

        reader = FlatFileReader(strict=options['strict'])
        locations = reader.read_locations(options['locations'])
        links = extract_profile_links(reader.read_texts(options['profiles']), compiled)
        accounts = transfer_locations(links, locations)
        write_estimates(options['out'], accounts)

        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 계정 위치 이전 완료', {
            '링크': len(links),
            '위치가 있는 계정': len(accounts),
        })
