"""
사용자 위치 추정 커맨드 (분산 제약 병렬 좌표 하강).

Usage:
    python manage.py locate --graph data/graph.tsv --labels data/labels.tsv \
        --out data/estimates.tsv --report data/report.csv
    python manage.py locate ... --gamma-km 100 --iterations 5 --threads 8
"""

from geoprop.config import SolverDefaults
from geoprop.management.base import PipelineCommand, positive_int
from geoprop.models import Provenance, SolverConfig
from geoprop.serializers import FlatFileReader, write_estimates, write_report
from geoprop.services import graph_from_edges, solve


def add_solver_arguments(parser):
    """locate 와 evaluate cv 가 공유하는 솔버 옵션"""
    parser.add_argument('--graph', required=True, help='그래프 TSV (u, v, weight)')
    parser.add_argument('--labels', required=True, help='라벨 TSV')
    parser.add_argument('--gamma-km', type=float, default=SolverDefaults.GAMMA_KM, help='이웃 분산 상한 (km)')
    parser.add_argument('--iterations', type=positive_int, default=SolverDefaults.MAX_ITERATIONS, help='최대 반복 수')
    parser.add_argument(
        '--movement-epsilon-km',
        type=float,
        default=SolverDefaults.MOVEMENT_EPSILON_KM,
        help='이 거리보다 많이 움직인 추정만 "이동"으로 센다'
    )
    parser.add_argument(
        '--min-moved-fraction',
        type=float,
        default=SolverDefaults.MIN_MOVED_FRACTION,
        help='이동 비율이 이 값 미만이면 조기 종료'
    )
    parser.add_argument('--refine', action='store_true', help='l1 중앙값 접평면 Weiszfeld 보정')
    parser.add_argument('--threads', type=int, help='작업 스레드 수 (기본: GEOPROP_THREADS)')
    parser.add_argument('--chunk-size', type=positive_int, help='작업 단위 크기 (기본: GEOPROP_CHUNK_SIZE)')
    parser.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')


def solver_config(command, options) -> SolverConfig:
    return SolverConfig(
        gamma_km=options['gamma_km'],
        max_iterations=options['iterations'],
        movement_epsilon_km=options['movement_epsilon_km'],
        min_moved_fraction=options['min_moved_fraction'],
        refine_median=options['refine'],
        threads=command.resolve_threads(options),
        chunk_size=command.resolve_chunk_size(options),
    ).validate()


class Command(PipelineCommand):
    help = (
        '라벨을 그래프 위로 전파해 미라벨 사용자 위치를 추정한다. '
        '출력: user<TAB>lat<TAB>lon<TAB>provenance<TAB>dispersion_km<TAB>iteration, '
        '리포트 CSV: iteration, located_count, moved_count, moved_km, objective_km, unlocated_edges'
    )
    input_options = ('graph', 'labels')
    output_options = ('out', 'report')

    def add_arguments(self, parser):
        add_solver_arguments(parser)
        parser.add_argument('--out', required=True, help='추정 TSV 출력 경로')
        parser.add_argument('--report', help='반복별 리포트 CSV 경로')

    def run(self, options):
        config = solver_config(self, options)
        reader = FlatFileReader(strict=options['strict'])
        graph = graph_from_edges(reader.read_graph(options['graph']))
        labels = reader.read_labels(options['labels'])

        estimates, report = solve(graph, labels, config)
        write_estimates(options['out'], estimates)
        if options['report']:
            write_report(options['report'], report)

        last = report.iterations[-1]
        inferred = sum(1 for e in estimates.values() if e.provenance == Provenance.INFERRED)
        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 위치 추정 완료', {
            'vertices': graph.n_vertices,
            'edges': graph.n_edges,
            'labels': len(labels),
            'inferred': inferred,
            'iterations': report.iterations_run,
            'objective_km': f"{last.objective_km:.3f}",
        })
