"""
합성 데이터 생성 커맨드 (도시별 집, 같은 도시 친구).

Usage:
    python manage.py synthesize --out-dir data/synthetic --seed 0
    python manage.py synthesize --users 10000 --cities 30 --radius-km 10 --label-fraction 0.2 --out-dir data/synthetic

생성 파일:
    mentions.tsv   src, dst, count
    labels.tsv     user, lat, lon, source (label_fraction 비율)
    truth.tsv      user, lat, lon, source (모든 사용자의 실제 집)
    shares.tsv     url, user
    doc_truth.tsv  url, lat, lon (문서가 다루는 도시 중심)
"""

from pathlib import Path

from geoprop.config import EvalConfig, GeotagConfig, SyntheticConfig
from geoprop.management.base import PipelineCommand, positive_int
from geoprop.models import GroundTruthLabel, LabelSource
from geoprop.serializers import fmt_coord, write_labels, write_tsv
from geoprop.services.synthetic import generate, generate_shares

OUTPUT_FILES = ('mentions', 'labels', 'truth', 'shares', 'doc_truth')


class Command(PipelineCommand):
    help = '도시 K 개에 사용자를 심은 합성 멘션 그래프와 라벨, 정답, 공유 로그를 만든다.'
    output_options = OUTPUT_FILES

    def add_arguments(self, parser):
        parser.add_argument('--users', type=positive_int, default=SyntheticConfig.USERS)
        parser.add_argument('--cities', type=positive_int, default=SyntheticConfig.CITIES)
        parser.add_argument('--radius-km', type=float, default=SyntheticConfig.RADIUS_KM, help='친구가 사는 반경 r')
        parser.add_argument('--label-fraction', type=float, default=SyntheticConfig.LABEL_FRACTION)
        parser.add_argument('--friends-per-user', type=positive_int, default=SyntheticConfig.FRIENDS_PER_USER)
        parser.add_argument('--documents', type=int, default=100, help='공유 로그 문서 수 (0 이면 생략)')
        parser.add_argument('--sharers', type=positive_int, default=GeotagConfig.MIN_USERS + 2, help='문서당 공유자 수')
        parser.add_argument('--seed', type=int, default=EvalConfig.DEFAULT_SEED)
        parser.add_argument('--out-dir', required=True, help='출력 디렉터리')

    def run(self, options):
        out_dir = Path(options['out_dir'])
        for name in OUTPUT_FILES:
            options[name] = None

        dataset = generate(
            users=options['users'],
            cities=options['cities'],
            radius_km=options['radius_km'],
            label_fraction=options['label_fraction'],
            friends_per_user=options['friends_per_user'],
            seed=options['seed'],
        )

        options['mentions'] = out_dir / 'mentions.tsv'
        write_tsv(options['mentions'], ['src', 'dst', 'count'], ((m.src, m.dst, m.count) for m in dataset.mentions))
        options['labels'] = out_dir / 'labels.tsv'
        write_labels(options['labels'], dataset.labels)
        options['truth'] = out_dir / 'truth.tsv'
        write_labels(options['truth'], {
            user: GroundTruthLabel(user, point, LabelSource.GPS_MEDIAN) for user, point in dataset.truth.items()
        })

        n_shares = 0
        if options['documents'] > 0:
            shares, references = generate_shares(
                dataset, documents=options['documents'], sharers_per_document=options['sharers'], seed=options['seed'],
            )
            options['shares'] = out_dir / 'shares.tsv'
            write_tsv(options['shares'], ['url', 'user'], ((s.url, s.user) for s in shares))
            options['doc_truth'] = out_dir / 'doc_truth.tsv'
            write_tsv(options['doc_truth'], ['url', 'lat', 'lon'], (
                (url, fmt_coord(p.lat), fmt_coord(p.lon)) for url, p in sorted(references.items())
            ))
            n_shares = len(shares)

        self.print_stats('✅ 합성 데이터 생성 완료', {
            'users': options['users'],
            'mentions': len(dataset.mentions),
            'labels': len(dataset.labels),
            'shares': n_shares,
            'out_dir': str(out_dir),
        })
