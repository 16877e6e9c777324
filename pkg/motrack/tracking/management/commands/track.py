import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from tracking.config import load_config
from tracking.constants import MODES
from tracking.exceptions import ConfigError, TrackingError
from tracking.runner import run

logger = logging.getLogger('tracking')


class Command(BaseCommand):
    help = (
        'Track, evaluate or generate MOT sequences. Settings come from an '
        'INI file and section.key=value overrides.'
    )

    def add_arguments(self, parser):
        parser.add_argument('mode', choices=MODES)
        parser.add_argument(
            'overrides',
            nargs='*',
            metavar='section.key=value',
            help='Configuration values that win over the file.',
        )
        parser.add_argument('--config', type=Path, help='INI run config.')
        parser.add_argument(
            '--output-dir',
            type=Path,
            help='Directory for results, metrics and the resolved config.',
        )

    def handle(self, *args, **options):
        try:
            cfg = load_config(
                options['config'],
                options['mode'],
                options['overrides'],
                options['output_dir'],
            )
            report = run(cfg, self.stdout)
        except ConfigError as exc:
            message = '\n'.join(exc.violations)
            logger.error('invalid configuration:\n%s', message)
            raise CommandError(message, returncode=exc.exit_code) from exc
        except TrackingError as exc:
            logger.error('%s', exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        for artifact in report.artifacts:
            logger.info('wrote %s', artifact)
