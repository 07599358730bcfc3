"""
Flat-file codecs for GEOPROP.

입력은 UTF-8 TSV ('#' 로 시작하는 줄과 빈 줄은 무시), 곡선/리포트 출력은 헤더가 있는 CSV.
좌표는 소수점 6자리, km 값은 3자리로 쓴다.

모든 출력은 임시 파일에 쓴 뒤 os.replace 로 교체 → 중간 상태의 파일이 남지 않는다.
"""

from __future__ import annotations

import contextlib
import json
import logging
import math
import os
import re
import tempfile
from collections import Counter
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import pandas as pd

from .config import FormatConfig
from .exceptions import InputFileMissing, InvalidCoordinate, MalformedRecord, UnparsableUrl
from .models import (
    DiscrepancyRecord,
    GazetteerEntry,
    GeoPoint,
    GeotagResult,
    GeotagStatus,
    GroundTruthLabel,
    GroundTruthLabels,
    LabelSource,
    LocationEstimate,
    MentionRecord,
    ProfileRecord,
    Provenance,
    RunManifest,
    ShareEvent,
    SocialGraph,
    SolverReport,
    ToponymStats,
    UnambiguousToponymSet,
)
from .services.evaluation import make_record
from .services.utils import format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

_ESCAPES = {'\\t': '\t', '\\n': '\n', '\\r': '\r', '\\\\': '\\'}
_ESCAPE_RE = re.compile(r'\\[tnr\\]')


def unescape_text(value: str) -> str:
    """자유 텍스트 칸의 \\t, \\n, \\r, \\\\ 이스케이프 해제"""
    return _ESCAPE_RE.sub(lambda m: _ESCAPES[m.group(0)], value)


def fmt_coord(value: float) -> str:
    return f"{value:.{FormatConfig.COORD_DECIMALS}f}"


def fmt_km(value: float) -> str:
    return f"{value:.{FormatConfig.KM_DECIMALS}f}"


# =============================================================================
# Reading
# =============================================================================

class FlatFileReader:
    """
    TSV 입력 파일 리더.

    Features:
        - 행 번호와 함께 필드 분리, 주석/빈 줄 무시
        - strict=True: 잘못된 행에서 MalformedRecord (exit 2)
        - strict=False: 경고 로그를 남기고 건너뛴 뒤 stats 에 집계

    Usage:
        >>> reader = FlatFileReader(strict=False)
        >>> records = reader.read_mentions('mentions.tsv')
        >>> reader.stats['skipped']
    """

    def __init__(self, strict: bool = False) -> None:
        self.strict = strict
        self.stats: Counter = Counter()

    # -------------------------------------------------------------------------
    # Row plumbing
    # -------------------------------------------------------------------------

    def _rows(self, path: str | Path, min_fields: int, max_fields: int) -> Iterator[tuple[int, list[str]]]:
        path = Path(path)
        if not path.is_file():
            raise InputFileMissing(f"입력 파일을 찾을 수 없습니다: {path}", path=str(path))

        # 줄 단위로 디코딩: 깨진 바이트는 그 줄만 거부
        with path.open('rb') as f:
            for line_no, raw in enumerate(f, start=1):
                try:
                    line = raw.decode('utf-8').rstrip('\r\n')
                except UnicodeDecodeError as e:
                    self.reject(path, line_no, f"UTF-8 이 아닙니다 ({e.reason})")
                    continue
                if not line.strip() or line.startswith(FormatConfig.COMMENT_PREFIX):
                    continue
                fields = line.split('\t')
                if not min_fields <= len(fields) <= max_fields:
                    expected = str(min_fields) if min_fields == max_fields else f"{min_fields}~{max_fields}"
                    self.reject(path, line_no, f"필드 수 {len(fields)} (기대값 {expected})")
                    continue
                self.stats['read'] += 1
                yield line_no, fields

    def reject(self, path: str | Path, line: int, message: str) -> None:
        """잘못된 행 처리 (strict 면 예외, 아니면 경고 후 건너뜀)"""
        error = MalformedRecord(message, path=str(path), line=line)
        if self.strict:
            raise error
        self.stats['skipped'] += 1
        logger.warning(f"[Reader] {error} → 건너뜀")

    def _parse(self, path, line_no, parse: Callable[[], Any]) -> Any:
        try:
            return parse()
        except (ValueError, InvalidCoordinate) as e:
            self.reject(path, line_no, str(e))
            return None

    @staticmethod
    def _point(lat: str, lon: str) -> GeoPoint:
        return GeoPoint(float(lat), float(lon))

    @staticmethod
    def _positive_int(value: str) -> int:
        number = int(value)
        if number < 1:
            raise ValueError(f"양의 정수가 아닙니다: {value}")
        return number

    @staticmethod
    def _timestamp(value: str):
        return parse_timestamp(value) if value.strip() else None

    # -------------------------------------------------------------------------
    # Social graph inputs
    # -------------------------------------------------------------------------

    def read_mentions(self, path: str | Path) -> list[MentionRecord]:
        """src<TAB>dst<TAB>count (자기 멘션은 버림)"""
        records = []
        for line_no, (src, dst, raw_count) in self._rows(path, 3, 3):
            count = self._parse(path, line_no, lambda: self._positive_int(raw_count))
            if count is None:
                continue
            if not src or not dst:
                self.reject(path, line_no, '빈 사용자 ID')
                continue
            if src == dst:
                self.stats['self_mentions'] += 1
                continue
            records.append(MentionRecord(src, dst, count))
        return records

    def read_graph(self, path: str | Path) -> list[tuple[str, str, int]]:
        """u<TAB>v<TAB>w (무방향 간선)"""
        edges = []
        for line_no, (u, v, w) in self._rows(path, 3, 3):
            weight = self._parse(path, line_no, lambda: self._positive_int(w))
            if weight is None:
                continue
            if u == v:
                self.reject(path, line_no, f"자기 루프: {u}")
                continue
            edges.append((u, v, weight))
        return edges

    def read_gps(self, path: str | Path) -> list[tuple[str, GeoPoint]]:
        """user<TAB>lat<TAB>lon (관측 한 건에 한 줄)"""
        observations = []
        for line_no, (user, lat, lon) in self._rows(path, 3, 3):
            point = self._parse(path, line_no, lambda: self._point(lat, lon))
            if point is not None:
                observations.append((user, point))
        return observations

    def read_profiles(self, path: str | Path) -> list[ProfileRecord]:
        """user<TAB>text[<TAB>last_seen]"""
        profiles = []
        for line_no, fields in self._rows(path, 2, 3):
            last_seen = None
            if len(fields) == 3:
                last_seen = self._parse(path, line_no, lambda: self._timestamp(fields[2]))
                if last_seen is None and fields[2].strip():
                    continue
            profiles.append(ProfileRecord(fields[0], unescape_text(fields[1]), last_seen))
        return profiles

    def read_texts(self, path: str | Path) -> list[tuple[str, str]]:
        """id<TAB>text (글/문서/프로필 링크 추출용)"""
        return [(key, unescape_text(text)) for _, (key, text) in self._rows(path, 2, 2)]

    def read_labels(self, path: str | Path) -> GroundTruthLabels:
        """user<TAB>lat<TAB>lon<TAB>source[<TAB>last_seen]"""
        labels: GroundTruthLabels = {}
        for line_no, fields in self._rows(path, 4, 5):
            user, lat, lon, source = fields[:4]
            if source not in LabelSource.values:
                self.reject(path, line_no, f"알 수 없는 라벨 출처: {source}")
                continue
            point = self._parse(path, line_no, lambda: self._point(lat, lon))
            if point is None:
                continue
            last_seen = None
            if len(fields) == 5 and fields[4].strip():
                last_seen = self._parse(path, line_no, lambda: self._timestamp(fields[4]))
                if last_seen is None:
                    continue
            if user in labels:
                self.reject(path, line_no, f"중복 라벨: {user}")
                continue
            labels[user] = GroundTruthLabel(user, point, LabelSource(source), last_seen)
        return labels

    def read_locations(self, path: str | Path) -> dict[str, LocationEstimate]:
        """
        추정 파일 (user, lat, lon, provenance, dispersion_km, iteration) 또는 라벨 파일.
        라벨 파일 행은 GROUND_TRUTH 추정으로 읽는다.
        """
        locations: dict[str, LocationEstimate] = {}
        for line_no, fields in self._rows(path, 4, 6):
            user, lat, lon, kind = fields[:4]
            point = self._parse(path, line_no, lambda: self._point(lat, lon))
            if point is None:
                continue
            if kind in LabelSource.values:
                locations[user] = LocationEstimate(user, point, Provenance.GROUND_TRUTH)
                continue
            if kind not in Provenance.values or len(fields) != 6:
                self.reject(path, line_no, f"추정 파일 형식이 아닙니다: {kind}")
                continue
            extra = self._parse(path, line_no, lambda: (float(fields[4]), int(fields[5])))
            if extra is None:
                continue
            locations[user] = LocationEstimate(user, point, Provenance(kind), extra[0], extra[1])
        return locations

    # -------------------------------------------------------------------------
    # Geotagging / toponym inputs
    # -------------------------------------------------------------------------

    def read_shares(self, path: str | Path, canonicalize: Callable[[str], str]) -> list[ShareEvent]:
        """url<TAB>user[<TAB>timestamp]: URL 은 읽으면서 정규화, 해석 불가 URL 은 집계 후 제외"""
        shares = []
        for line_no, fields in self._rows(path, 2, 3):
            try:
                url = canonicalize(fields[0])
            except UnparsableUrl as e:
                self.stats['unparsable_urls'] += 1
                logger.debug(f"[Reader] {path}:{line_no}: {e.message}")
                continue
            timestamp = None
            if len(fields) == 3 and fields[2].strip():
                timestamp = self._parse(path, line_no, lambda: self._timestamp(fields[2]))
                if timestamp is None:
                    continue
            shares.append(ShareEvent(url, fields[1], timestamp))
        return shares

    def read_gazetteer(self, path: str | Path) -> list[GazetteerEntry]:
        """name<TAB>lat<TAB>lon[<TAB>population]"""
        entries = []
        for line_no, fields in self._rows(path, 3, 4):
            def parse():
                population = int(fields[3]) if len(fields) == 4 and fields[3].strip() else None
                return GazetteerEntry(fields[0], self._point(fields[1], fields[2]), population)

            entry = self._parse(path, line_no, parse)
            if entry is not None:
                entries.append(entry)
        return entries

    def read_observations(self, path: str | Path) -> list[tuple[str, str, GeoPoint]]:
        """user<TAB>profile_text<TAB>lat<TAB>lon"""
        observations = []
        for line_no, (user, text, lat, lon) in self._rows(path, 4, 4):
            point = self._parse(path, line_no, lambda: self._point(lat, lon))
            if point is not None:
                observations.append((user, unescape_text(text), point))
        return observations

    def read_toponyms(self, path: str | Path) -> UnambiguousToponymSet:
        """name<TAB>lat<TAB>lon<TAB>n_users<TAB>median_km (toponyms 명령 출력)"""
        toponyms = UnambiguousToponymSet()
        for line_no, (name, lat, lon, n_users, median_km) in self._rows(path, 5, 5):
            parsed = self._parse(
                path, line_no, lambda: (self._point(lat, lon), self._positive_int(n_users), float(median_km)),
            )
            if parsed is None:
                continue
            point, users, km = parsed
            toponyms.entries[name] = point
            toponyms.stats[name] = ToponymStats(name, point, users, km)
        return toponyms

    def read_geotags(self, path: str | Path) -> list[GeotagResult]:
        """url<TAB>status<TAB>lat<TAB>lon<TAB>dispersion_km<TAB>n_users (geotag 명령 출력)"""
        results = []
        for line_no, (url, status, lat, lon, dispersion, n_users) in self._rows(path, 6, 6):
            if status not in GeotagStatus.values:
                self.reject(path, line_no, f"알 수 없는 상태: {status}")
                continue

            def parse():
                if not lat.strip():
                    return None, None, int(n_users)
                return self._point(lat, lon), float(dispersion), int(n_users)

            parsed = self._parse(path, line_no, parse)
            if parsed is None:
                continue
            location, dispersion_km, count = parsed
            results.append(GeotagResult(url, GeotagStatus(status), count, location, dispersion_km))
        return results

    def read_references(self, path: str | Path) -> dict[str, GeoPoint]:
        """id<TAB>lat<TAB>lon: URL 기준 좌표 (id 가 URL 이면 정규화는 호출 측에서)"""
        references = {}
        for line_no, (key, lat, lon) in self._rows(path, 3, 3):
            point = self._parse(path, line_no, lambda: self._point(lat, lon))
            if point is not None:
                references[key] = point
        return references


# =============================================================================
# Records CSV (평가 입력/출력)
# =============================================================================

RECORD_COLUMNS = ['item_id', 'pred_lat', 'pred_lon', 'ref_lat', 'ref_lon', 'discrepancy_km', 'dispersion_km']


def read_records(path: str | Path) -> list[DiscrepancyRecord]:
    """records CSV → DiscrepancyRecord (discrepancy 는 저장된 좌표로 다시 계산)"""
    path = Path(path)
    if not path.is_file():
        raise InputFileMissing(f"입력 파일을 찾을 수 없습니다: {path}", path=str(path))
    frame = pd.read_csv(path, dtype={'item_id': str}, keep_default_na=False)
    missing = set(RECORD_COLUMNS) - set(frame.columns) - {'discrepancy_km'}
    if missing:
        raise MalformedRecord(f"필수 컬럼 누락: {sorted(missing)}", path=str(path), line=1)

    records = []
    for offset, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            records.append(make_record(
                row.item_id,
                GeoPoint(float(row.pred_lat), float(row.pred_lon)),
                GeoPoint(float(row.ref_lat), float(row.ref_lon)),
                float(row.dispersion_km),
            ))
        except (ValueError, InvalidCoordinate) as e:
            raise MalformedRecord(str(e), path=str(path), line=offset) from e
    return records


def records_frame(records: Iterable[DiscrepancyRecord]) -> pd.DataFrame:
    rows = [
        {
            'item_id': r.item_id,
            'pred_lat': r.predicted.lat,
            'pred_lon': r.predicted.lon,
            'ref_lat': r.reference.lat,
            'ref_lon': r.reference.lon,
            'discrepancy_km': r.discrepancy_km,
            'dispersion_km': r.dispersion_km,
        }
        for r in records
    ]
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


# =============================================================================
# Writing
# =============================================================================

@contextlib.contextmanager
def atomic_write(path: str | Path) -> Iterator[Any]:
    """같은 디렉터리의 임시 파일에 쓰고 os.replace (실패하면 임시 파일 삭제)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_tsv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """'# col1<TAB>col2…' 헤더 주석 + 행들. 쓴 행 수 반환"""
    count = 0
    with atomic_write(path) as f:
        f.write(FormatConfig.COMMENT_PREFIX + ' ' + '\t'.join(header) + '\n')
        for row in rows:
            f.write('\t'.join(str(v) for v in row) + '\n')
            count += 1
    return count


def write_csv(path: str | Path, frame: pd.DataFrame) -> int:
    with atomic_write(path) as f:
        frame.to_csv(f, index=False, float_format='%.6f', lineterminator='\n')
    return len(frame)


def write_graph(path: str | Path, graph: SocialGraph) -> int:
    return write_tsv(path, ['u', 'v', 'weight'], graph.edges())


def write_labels(path: str | Path, labels: GroundTruthLabels) -> int:
    rows = []
    for user in sorted(labels):
        label = labels[user]
        row = [user, fmt_coord(label.location.lat), fmt_coord(label.location.lon), str(label.source)]
        if label.last_seen is not None:
            row.append(format_timestamp(label.last_seen))
        rows.append(row)
    return write_tsv(path, ['user', 'lat', 'lon', 'source', 'last_seen'], rows)


def write_estimates(path: str | Path, estimates: Mapping[str, LocationEstimate]) -> int:
    rows = (
        [
            e.user,
            fmt_coord(e.location.lat),
            fmt_coord(e.location.lon),
            str(e.provenance),
            fmt_km(e.neighbor_dispersion_km),
            e.iteration_assigned,
        ]
        for e in (estimates[u] for u in sorted(estimates))
    )
    return write_tsv(path, ['user', 'lat', 'lon', 'provenance', 'dispersion_km', 'iteration'], rows)


def write_geotags(path: str | Path, results: Iterable[GeotagResult]) -> int:
    def row(r: GeotagResult) -> list[Any]:
        if r.location is None:
            return [r.url, str(r.status), '', '', '', r.distinct_located_users]
        return [
            r.url,
            str(r.status),
            fmt_coord(r.location.lat),
            fmt_coord(r.location.lon),
            fmt_km(r.dispersion_km),
            r.distinct_located_users,
        ]

    return write_tsv(path, ['url', 'status', 'lat', 'lon', 'dispersion_km', 'n_users'], (row(r) for r in results))


def write_toponyms(path: str | Path, toponyms: UnambiguousToponymSet) -> int:
    rows = (
        [name, fmt_coord(s.gazetteer_location.lat), fmt_coord(s.gazetteer_location.lon), s.n_users,
         fmt_km(s.median_gps_discrepancy_km)]
        for name, s in sorted(toponyms.stats.items())
    )
    return write_tsv(path, ['name', 'lat', 'lon', 'n_users', 'median_km'], rows)


def write_references(path: str | Path, references: Mapping[str, GeoPoint]) -> int:
    """id<TAB>lat<TAB>lon (evaluate join 의 --references 입력 형식)"""
    rows = ([key, fmt_coord(p.lat), fmt_coord(p.lon)] for key, p in sorted(references.items()))
    return write_tsv(path, ['id', 'lat', 'lon'], rows)


def write_report(path: str | Path, report: SolverReport) -> int:
    """반복별 한 줄 (0 번은 라벨만 있는 초기 상태)"""
    frame = pd.DataFrame(
        [
            {
                'iteration': s.iteration,
                'located_count': s.located_count,
                'moved_count': s.moved_count,
                'moved_km': s.moved_km,
                'objective_km': s.objective_km,
                'unlocated_edges': s.unlocated_edges,
            }
            for s in report.iterations
        ],
        columns=['iteration', 'located_count', 'moved_count', 'moved_km', 'objective_km', 'unlocated_edges'],
    )
    return write_csv(path, frame)


def write_records(path: str | Path, records: Iterable[DiscrepancyRecord]) -> int:
    return write_csv(path, records_frame(records))


def manifest_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + FormatConfig.MANIFEST_SUFFIX)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_manifest(output: str | Path, manifest: RunManifest) -> Path:
    """<output>.manifest.json (원자적 쓰기)"""
    target = manifest_path(output)
    with atomic_write(target) as f:
        json.dump(_jsonable(asdict(manifest)), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write('\n')
    return target
