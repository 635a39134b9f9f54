import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import click

from polaron_lab.core.errors import ConfigError, PolaronLabError
from polaron_lab.output.session import RunSession, open_session
from polaron_lab.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

config_argument = click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
output_option = click.option(
    "-o", "--output-dir", type=click.Path(file_okay=False), default=None, help="Output folder for artifacts"
)


def get_config(config_path: str) -> RunConfig:
    try:
        return RunConfig.load(config_path)
    except ConfigError as exc:
        logger.error(f"Rejected config {config_path}")
        raise click.ClickException(exc.detail) from exc


@contextmanager
def command_session(config: RunConfig, command: str, output_dir: Optional[str] = None) -> Iterator[RunSession]:
    """Output session of one subcommand; lab errors become click errors with a non-zero exit."""
    target = Path(output_dir) if output_dir else config.output_path
    try:
        with open_session(target, command, config.source_text) as session:
            yield session
    except PolaronLabError as exc:
        raise click.ClickException(exc.detail) from exc
