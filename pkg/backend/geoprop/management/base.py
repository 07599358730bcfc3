"""
Shared plumbing for GEOPROP management commands.

- 예외 → CommandError(returncode) 변환 (exit 1 / 2)
- 출력 파일마다 <out>.manifest.json 기록 (파라미터, 입출력 경로, seed, 시각, 버전)
"""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from typing import Any

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from .. import __version__
from ..exceptions import UsageError, handle_command_error
from ..models import RunManifest
from ..serializers import write_manifest
from ..services.utils import format_timestamp

logger = logging.getLogger(__name__)

# Django 가 모든 명령에 붙이는 옵션 (매니페스트에서 제외)
DJANGO_OPTIONS = {'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks'}


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise ValueError(value)
    return number


def km_list(value: str) -> list[float]:
    """'1,10,100' → [1.0, 10.0, 100.0]"""
    return [float(v) for v in value.split(',') if v.strip()]


class PipelineCommand(BaseCommand):
    """
    파이프라인 명령 기반 클래스.

    하위 클래스는 run(options) 를 구현하고 input_options / output_options 에
    경로 옵션 이름을 적는다. run 안에서 options 를 고치면 (예: threads 기본값 해석)
    고친 값이 매니페스트에 기록된다.
    """

    input_options: tuple[str, ...] = ()
    output_options: tuple[str, ...] = ('out',)

    def run(self, options: dict[str, Any]) -> None:
        raise NotImplementedError

    def subcommand_name(self, options: dict[str, Any]) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def handle(self, *args, **options):
        started_at = format_timestamp(datetime.now(timezone.utc))
        try:
            self.run(options)
        except CommandError:
            raise
        except Exception as exc:
            raise handle_command_error(exc) from exc

        finished_at = format_timestamp(datetime.now(timezone.utc))
        inputs = {k: str(options[k]) for k in self.input_options if options.get(k)}
        outputs = {k: str(options[k]) for k in self.output_options if options.get(k)}
        skip = DJANGO_OPTIONS | set(self.input_options) | set(self.output_options)
        parameters = {k: self._plain(v) for k, v in sorted(options.items()) if k not in skip}

        manifest = RunManifest(
            subcommand=self.subcommand_name(options),
            parameters=parameters,
            inputs=inputs,
            outputs=outputs,
            seed=options.get('seed'),
            started_at=started_at,
            finished_at=finished_at,
            version=__version__,
        )
        for path in outputs.values():
            written = write_manifest(path, manifest)
            logger.debug(f"[Manifest] {written}")

    @staticmethod
    def _plain(value: Any) -> Any:
        if isinstance(value, datetime):
            return format_timestamp(value)
        return value

    # -------------------------------------------------------------------------
    # Helpers
    # -------------------------------------------------------------------------

    def resolve_threads(self, options: dict[str, Any]) -> int:
        """--threads 가 없으면 GEOPROP_THREADS (settings.GEOPROP['THREADS'])"""
        threads = options.get('threads')
        if threads is None:
            threads = int(settings.GEOPROP.get('THREADS', 1))
        if threads < 1:
            raise UsageError(f"threads must be >= 1 (got {threads})")
        options['threads'] = threads
        return threads

    def resolve_chunk_size(self, options: dict[str, Any]) -> int:
        chunk_size = options.get('chunk_size')
        if chunk_size is None:
            chunk_size = int(settings.GEOPROP.get('CHUNK_SIZE', 256))
        options['chunk_size'] = chunk_size
        return chunk_size

    def print_stats(self, title: str, stats: dict[str, Any]) -> None:
        self.stdout.write(self.style.SUCCESS(title))
        for key, value in stats.items():
            self.stdout.write(f"   {key}: {value}")

    def warn_skipped(self, skipped: int) -> None:
        if skipped:
            self.stdout.write(self.style.WARNING(f"잘못된 행 {skipped}개를 건너뛰었습니다 (--strict 로 중단 가능)"))
