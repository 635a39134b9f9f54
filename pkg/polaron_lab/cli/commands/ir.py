import logging

import click

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.lab.dispersion import dispersion_report, ir_criterion
from polaron_lab.lab.energy import EnergyLab

logger = logging.getLogger(__name__)


@click.command("ir")
@config_argument
@output_option
def cmd_ir(config_path, output_dir):
    """Infrared criterion by quadrature over the grid with the computed dispersion gaps."""
    config = get_config(config_path)
    with command_session(config, "ir", output_dir) as session:
        model = config.build_model()
        lab = EnergyLab(model, config.solver_settings())
        with session.stage("ir"):
            dispersion = dispersion_report(model, P=config.dispersion_P, tolerances=config.tolerances(), lab=lab)
            report = ir_criterion(model, dispersion=dispersion, couplings=config.ir_couplings, lab=lab)
        grid = model.grid
        session.csv(
            "ir_integrand.csv",
            ["k1", "k2", "k3", "norm_k", "weight", "gap", "integrand"],
            [
                (*point, norm, weight, entry.gap, value)
                for point, norm, weight, entry, value in zip(
                    grid.points.tolist(), grid.norms, grid.weights, dispersion.entries, report.integrand
                )
            ],
        )
        session.json("ir.json", report.model_dump())
    click.echo(f"IR value {report.value:.6g} (q0 = {report.q0}), {report.verdict.status}")
