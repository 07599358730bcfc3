"""
상호 멘션 그래프 생성 커맨드.

Usage:
    python manage.py graph_build --mentions data/mentions.tsv --out data/graph.tsv
    python manage.py graph_build --mentions data/mentions.tsv --out data/graph.tsv --strict
"""

from geoprop.management.base import PipelineCommand
from geoprop.serializers import FlatFileReader, write_graph
from geoprop.services import build_graph


class Command(PipelineCommand):
    help = (
        '방향성 멘션 파일(src<TAB>dst<TAB>count)에서 상호 멘션 그래프를 만든다. '
        '출력: u<TAB>v<TAB>weight (weight = 두 방향 합계 중 작은 값)'
    )
    input_options = ('mentions',)

    def add_arguments(self, parser):
        parser.add_argument('--mentions', required=True, help='멘션 TSV 경로 (src, dst, count)')
        parser.add_argument('--out', required=True, help='그래프 TSV 출력 경로')
        parser.add_argument(
            '--strict',
            action='store_true',
            help='잘못된 행에서 중단 (기본: 경고 후 건너뜀)'
        )

    def run(self, options):
        reader = FlatFileReader(strict=options['strict'])
        records = reader.read_mentions(options['mentions'])
        graph = build_graph(records)
        write_graph(options['out'], graph)

        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 그래프 생성 완료', {
            '레코드': len(records),
            '자기 멘션 제외': reader.stats['self_mentions'],
            'vertices': graph.n_vertices,
            'edges': graph.n_edges,
        })
