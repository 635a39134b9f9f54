import logging

import click
import numpy as np

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.lab.energy import EnergyLab, momentum_line, parameter_line, scan

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["p1", "p2", "p3", "M", "q", "m", "E", "residual", "iterations", "solver", "converged"]


@click.command("scan")
@config_argument
@output_option
def cmd_scan(config_path, output_dir):
    """Ground energy along one parameter line, as CSV, JSON and an SVG curve."""
    config = get_config(config_path)
    parameter = config.scan_parameter
    values = np.linspace(config.scan_start, config.scan_stop, config.scan_points)
    axis_spec = f"{parameter}:{config.scan_start!r}:{config.scan_stop!r}:{config.scan_points}"
    with command_session(config, "scan", output_dir) as session:
        model = config.build_model()
        lab = EnergyLab(model, config.solver_settings())
        if parameter == "p":
            direction = np.asarray(config.scan_direction, dtype=float)
            direction = direction / np.linalg.norm(direction)
            points = momentum_line(lab, direction, values)
        else:
            points = parameter_line(lab, parameter, values)
        with session.stage("scan"):
            surface = scan(model, points, lab=lab, axis_spec=axis_spec)

        if parameter == "p":
            abscissa = [float(np.dot(sample.p, direction)) for sample in surface.samples]
        else:
            abscissa = [getattr(sample, parameter) for sample in surface.samples]
        order = np.argsort(abscissa, kind="stable")
        session.csv(
            "scan.csv",
            SAMPLE_COLUMNS,
            [
                (*sample.p, sample.M, sample.q, sample.m, sample.energy, sample.residual,
                 sample.iterations, sample.solver, sample.converged)
                for sample in surface.samples
            ],
        )
        session.json(
            "scan.json",
            {
                "axis_spec": axis_spec,
                "flagged": surface.flagged,
                "samples": [sample.model_dump() for sample in surface.samples],
            },
        )
        session.plot(
            "scan.svg",
            [abscissa[i] for i in order],
            {"E": [surface.samples[i].energy for i in order]},
            xlabel=parameter,
            ylabel="E",
            title=f"ground energy along {parameter}",
        )
    if surface.flagged:
        logger.warning("Some scan points did not converge; the surface is flagged")
    click.echo(f"{len(surface.samples)} samples along {axis_spec} -> {session.output_dir}")
