"""
평가 커맨드 (교차 검증, 곡선 데이터, 표 요약, 기준 좌표 결합).

Usage:
    python manage.py evaluate cv --graph data/graph.tsv --labels data/labels.tsv --out cv.csv --records-out cv_records.csv
    python manage.py evaluate cdf --records cv_records.csv --out cdf.csv
    python manage.py evaluate coverage --records records.csv --out coverage.csv
    python manage.py evaluate characteristic --records records.csv --out characteristic.csv
    python manage.py evaluate summary --records records.csv --max-dispersion-km 100 --out summary.csv
    python manage.py evaluate scatter --records records.csv --out scatter.csv
    python manage.py evaluate references --documents docs.tsv --toponyms toponyms.tsv --out references.tsv
    python manage.py evaluate join --results geotags.tsv --references references.tsv --out records.csv
    python manage.py evaluate agreement --gps gps.tsv --profiles profiles.tsv --gazetteer gazetteer.tsv --out records.csv
    python manage.py evaluate mentions --posts posts.tsv --locations estimates.tsv --toponyms toponyms.tsv --out records.csv

records CSV 컬럼: item_id, pred_lat, pred_lon, ref_lat, ref_lon, discrepancy_km, dispersion_km
"""

from collections import Counter

import pandas as pd

from geoprop.config import EvalConfig, GeotagConfig
from geoprop.exceptions import UnparsableUrl
from geoprop.management.base import PipelineCommand, km_list, positive_int
from geoprop.management.commands.locate import add_solver_arguments, solver_config
from geoprop.models import LabelSource
from geoprop.serializers import (
    FlatFileReader,
    read_records,
    write_csv,
    write_geotags,
    write_records,
    write_references,
)
from geoprop.services import (
    Gazetteer,
    canonicalize_url,
    coverage_curve,
    cross_validate,
    discrepancy_cdf,
    discrepancy_summary,
    dispersion_scatter,
    error_characteristic,
    geotag_toponym_mentions,
    gps_ground_truth,
    graph_from_edges,
    join_references,
    label_agreement,
    self_report_ground_truth,
    toponym_references,
)
from geoprop.services.utils import parse_timestamp

# 모드별 입력/출력 경로 옵션
MODE_PATHS = {
    'cv': (('graph', 'labels'), ('out', 'records_out')),
    'cdf': (('records',), ('out',)),
    'coverage': (('records',), ('out',)),
    'characteristic': (('records',), ('out',)),
    'summary': (('records',), ('out',)),
    'scatter': (('records',), ('out',)),
    'references': (('documents', 'toponyms'), ('out',)),
    'join': (('results', 'references'), ('out',)),
    'agreement': (('gps', 'profiles', 'gazetteer'), ('out',)),
    'mentions': (('posts', 'locations', 'toponyms'), ('out', 'results_out')),
}


def _records_argument(sub):
    sub.add_argument('--records', required=True, help='records CSV (cv --records-out / join / agreement / mentions 출력)')
    sub.add_argument('--out', required=True, help='CSV 출력 경로')


class Command(PipelineCommand):
    help = '정확도/커버리지 평가. 모든 출력은 헤더가 있는 CSV.'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='mode', required=True, title='modes')

        cv = subparsers.add_parser('cv', help='leave-many-out 교차 검증')
        add_solver_arguments(cv)
        cv.add_argument('--holdout-fraction', type=float, default=EvalConfig.HOLDOUT_FRACTION)
        cv.add_argument('--seed', type=int, default=EvalConfig.DEFAULT_SEED)
        cv.add_argument('--holdout-source', choices=LabelSource.values, help='이 출처의 라벨에서만 숨김')
        cv.add_argument('--out', required=True, help='요약 CSV (한 줄)')
        cv.add_argument('--records-out', help='숨긴 사용자별 records CSV')

        cdf = subparsers.add_parser('cdf', help='오차 경험적 CDF')
        _records_argument(cdf)
        cdf.add_argument('--grid', type=km_list, help='임계값 목록 km (쉼표 구분, 기본: 1~20000 로그 50개)')

        coverage = subparsers.add_parser('coverage', help='분산 임계값별 커버리지와 오차')
        _records_argument(coverage)
        coverage.add_argument('--thresholds', type=km_list, help='분산 임계값 목록 km (쉼표 구분)')

        characteristic = subparsers.add_parser('characteristic', help='평균 오차 특성 곡선')
        _records_argument(characteristic)

        summary = subparsers.add_parser('summary', help='개수/중앙값/평균/표준편차 (제한 유무)')
        _records_argument(summary)
        summary.add_argument(
            '--max-dispersion-km',
            type=float,
            action='append',
            help='분산 제한 km (여러 번 지정 가능, 제한 없는 행은 항상 포함)'
        )

        scatter = subparsers.add_parser('scatter', help='분산 구간별 오차 중앙값')
        _records_argument(scatter)
        scatter.add_argument('--bins', type=positive_int, default=EvalConfig.SCATTER_BINS)

        references = subparsers.add_parser('references', help='문서 텍스트의 단일 지명 → 기준 좌표 TSV')
        references.add_argument('--documents', required=True, help='문서 TSV (id, text)')
        references.add_argument('--toponyms', required=True, help='toponyms 명령 출력 TSV')
        references.add_argument('--out', required=True, help='기준 좌표 TSV 출력 경로 (join 의 --references)')

        join = subparsers.add_parser('join', help='지오태그 결과 + 기준 좌표 → records')
        join.add_argument('--results', required=True, help='geotag 출력 TSV')
        join.add_argument('--references', required=True, help='기준 좌표 TSV (url, lat, lon)')
        join.add_argument('--out', required=True, help='records CSV 출력 경로')

        agreement = subparsers.add_parser('agreement', help='자기 보고 vs GPS 라벨 불일치')
        agreement.add_argument('--gps', required=True)
        agreement.add_argument('--profiles', required=True)
        agreement.add_argument('--gazetteer', required=True)
        agreement.add_argument('--last-seen-cutoff', type=parse_timestamp)
        agreement.add_argument('--out', required=True, help='records CSV 출력 경로')

        mentions = subparsers.add_parser('mentions', help='지명 언급자 위치 중앙값 vs 지명 좌표')
        mentions.add_argument('--posts', required=True, help='글 TSV (user, text)')
        mentions.add_argument('--locations', required=True, help='추정 TSV 또는 라벨 TSV')
        mentions.add_argument('--toponyms', required=True, help='toponyms 명령 출력 TSV')
        mentions.add_argument('--min-users', type=positive_int, default=GeotagConfig.MIN_USERS)
        mentions.add_argument('--max-dispersion-km', type=float)
        mentions.add_argument('--out', required=True, help='records CSV 출력 경로')
        mentions.add_argument('--results-out', help='지명별 지오태그 결과 TSV')

        for sub in (cdf, coverage, characteristic, summary, scatter, references, join, agreement, mentions):
            sub.add_argument('--strict', action='store_true', help='잘못된 행에서 중단')

    def subcommand_name(self, options):
        return f"evaluate {options['mode']}"

    def run(self, options):
        self.input_options, self.output_options = MODE_PATHS[options['mode']]
        getattr(self, f"_run_{options['mode']}")(options)

    # =========================================================================
    # Modes
    # =========================================================================

    def _run_cv(self, options):
        config = solver_config(self, options)
        reader = FlatFileReader(strict=options['strict'])
        graph = graph_from_edges(reader.read_graph(options['graph']))
        labels = reader.read_labels(options['labels'])

        summary = cross_validate(
            graph,
            labels,
            config,
            holdout_fraction=options['holdout_fraction'],
            seed=options['seed'],
            holdout_source=options['holdout_source'],
        )
        row = {
            'median_km': summary.median_km,
            'mean_km': summary.mean_km,
            'stddev_km': summary.stddev_km,
            'located_fraction': summary.located_fraction,
            'n_holdout': summary.n_holdout,
            'n_located': summary.n_located,
        }
        write_csv(options['out'], pd.DataFrame([row]))
        if options['records_out']:
            write_records(options['records_out'], summary.records)
        self.print_stats('✅ 교차 검증 완료', row)

    def _run_cdf(self, options):
        records = read_records(options['records'])
        cdf = discrepancy_cdf(records, options['grid'])
        write_csv(options['out'], pd.DataFrame(cdf, columns=['threshold_km', 'fraction']))
        self.print_stats('✅ CDF 생성 완료', {'records': len(records), 'points': len(cdf)})

    def _run_coverage(self, options):
        records = read_records(options['records'])
        points = coverage_curve(records, options['thresholds'])
        frame = pd.DataFrame(
            [(p.threshold_km, p.coverage_fraction, p.n, p.median_km, p.mean_km) for p in points],
            columns=['threshold_km', 'coverage_fraction', 'n', 'median_km', 'mean_km'],
        )
        write_csv(options['out'], frame)
        self.print_stats('✅ 커버리지 곡선 생성 완료', {'records': len(records), 'points': len(points)})

    def _run_characteristic(self, options):
        records = read_records(options['records'])
        curve = error_characteristic(records)
        write_csv(options['out'], pd.DataFrame(curve, columns=['mean_km', 'coverage_fraction']))
        self.print_stats('✅ 특성 곡선 생성 완료', {'records': len(records), 'points': len(curve)})

    def _run_summary(self, options):
        records = read_records(options['records'])
        restrictions = [None] + sorted(set(options['max_dispersion_km'] or []))
        rows = []
        for limit in restrictions:
            s = discrepancy_summary(records, limit)
            rows.append({
                'max_dispersion_km': limit,
                'n': s.n,
                'coverage_fraction': s.n / len(records),
                'median_km': s.median_km,
                'mean_km': s.mean_km,
                'stddev_km': s.stddev_km,
            })
        write_csv(options['out'], pd.DataFrame(rows))
        self.print_stats('✅ 요약 완료', {'records': len(records), 'rows': len(rows)})

    def _run_scatter(self, options):
        records = read_records(options['records'])
        rows = dispersion_scatter(records, options['bins'])
        write_csv(options['out'], pd.DataFrame(rows, columns=['lower_km', 'upper_km', 'n', 'median_km']))
        self.print_stats('✅ 구간별 추세 생성 완료', {'records': len(records), 'bins': len(rows)})

    def _run_references(self, options):
        reader = FlatFileReader(strict=options['strict'])
        documents = reader.read_texts(options['documents'])
        stats = Counter()
        references = toponym_references(documents, reader.read_toponyms(options['toponyms']), stats)
        write_references(options['out'], references)
        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 기준 좌표 추출 완료', {
            'documents': len(documents), 'references': len(references),
            'ambiguous': stats['ambiguous'], 'no_match': stats['no_match'],
        })

    def _run_join(self, options):
        reader = FlatFileReader(strict=options['strict'])
        results = reader.read_geotags(options['results'])
        references = {}
        for key, point in reader.read_references(options['references']).items():
            try:
                references[canonicalize_url(key)] = point
            except UnparsableUrl:
                references[key] = point
        records = join_references(results, references)
        write_records(options['out'], records)
        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 기준 좌표 결합 완료', {'results': len(results), 'records': len(records)})

    def _run_agreement(self, options):
        reader = FlatFileReader(strict=options['strict'])
        gps = gps_ground_truth(reader.read_gps(options['gps']))
        gazetteer = Gazetteer(reader.read_gazetteer(options['gazetteer']))
        self_report = self_report_ground_truth(
            reader.read_profiles(options['profiles']), gazetteer, last_seen_cutoff=options['last_seen_cutoff'],
        )
        records = label_agreement(gps, self_report)
        write_records(options['out'], records)
        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 라벨 불일치 계산 완료', {'GPS': len(gps), 'SELF_REPORT': len(self_report), 'both': len(records)})

    def _run_mentions(self, options):
        reader = FlatFileReader(strict=options['strict'])
        locations = reader.read_locations(options['locations'])
        toponyms = reader.read_toponyms(options['toponyms'])
        results = geotag_toponym_mentions(
            reader.read_texts(options['posts']),
            locations,
            toponyms,
            min_users=options['min_users'],
            max_dispersion_km=options['max_dispersion_km'],
        )
        records = join_references(results.values(), toponyms.entries)
        write_records(options['out'], records)
        if options['results_out']:
            write_geotags(options['results_out'], results.values())
        self.warn_skipped(reader.stats['skipped'])
        self.print_stats('✅ 지명 언급 지오태깅 완료', {'toponyms': len(results), 'records': len(records)})
