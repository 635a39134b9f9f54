import logging

import click
from dotenv import load_dotenv

from polaron_lab.cli.commands import assemble, check, dispersion, ir, scan, sectors, solve
from polaron_lab.core.config import get_settings

load_dotenv()


@click.group()
@click.version_option(version=get_settings().version, prog_name=get_settings().project_name)
@click.option("--log-level", default=None, help="Overrides POLARON_LOG_LEVEL")
def cli(log_level):
    """Spectral lab for the Dirac polaron fibre Hamiltonian."""
    settings = get_settings()
    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# Register commands
cli.add_command(assemble.cmd_assemble)
cli.add_command(solve.cmd_solve)
cli.add_command(scan.cmd_scan)
cli.add_command(check.cmd_check)
cli.add_command(dispersion.cmd_dispersion)
cli.add_command(ir.cmd_ir)
cli.add_command(sectors.cmd_sectors)
