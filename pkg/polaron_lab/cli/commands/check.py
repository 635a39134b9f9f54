import logging

import click

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.core.errors import ConfigError
from polaron_lab.lab.suite import run_checks
from polaron_lab.schemas.reports import FAIL

logger = logging.getLogger(__name__)


@click.command("check")
@config_argument
@click.option(
    "--which",
    type=str,
    default=None,
    help="'all' or a comma separated list of checks; defaults to the config's `checks` key",
)
@output_option
@click.pass_context
def cmd_check(ctx, config_path, which, output_dir):
    """Run the numerical checks and write one consolidated verdict; exit 1 when any check fails."""
    config = get_config(config_path)
    try:
        names = config.selected_checks(which)
    except ConfigError as exc:
        raise click.BadParameter(exc.detail, param_hint="--which") from exc
    if not names:
        click.echo("no checks selected")
        return

    with command_session(config, "check", output_dir) as session:
        reports = run_checks(config, names, session=session)
        statuses = {report.name: report.status for report in reports}
        failed = [report.name for report in reports if report.status == FAIL]
        session.csv(
            "check.csv",
            ["name", "status", "worst_slack", "tolerance", "anchor"],
            [(r.name, r.status, r.worst_slack, r.tolerance, r.anchor) for r in reports],
        )
        session.json(
            "check.json",
            {
                "checks": [report.model_dump() for report in reports],
                "summary": {"passed": not failed, "failed": failed, "statuses": statuses},
            },
        )

    for report in reports:
        click.echo(f"{report.name:24s} {report.status}")
    if failed:
        logger.error(f"{len(failed)} checks failed: {failed}")
        ctx.exit(1)
