import logging

import click

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.models.polaron import assemble
from polaron_lab.output.serialize import model_summary
from polaron_lab.spectral.solvers import lowest_spectrum

logger = logging.getLogger(__name__)


@click.command("solve")
@config_argument
@output_option
def cmd_solve(config_path, output_dir):
    """Lowest eigenvalues of H(p) with residuals and degeneracy clusters."""
    config = get_config(config_path)
    with command_session(config, "solve", output_dir) as session:
        model = config.build_model()
        hamiltonian = assemble(model)
        with session.stage("solve"):
            result = lowest_spectrum(
                hamiltonian.matrix, n_eigs=min(config.solve_n_eigs, model.dim), settings=config.solver_settings()
            )
        if not result.converged:
            logger.warning(f"Solver stopped after {result.iterations} iterations without converging")
        clusters = result.cluster_ids()
        session.csv(
            "spectrum.csv",
            ["index", "eigenvalue", "residual", "cluster"],
            [
                (i, value, residual, cluster)
                for i, (value, residual, cluster) in enumerate(zip(result.eigenvalues, result.residuals, clusters))
            ],
        )
        session.json("spectrum.json", {"model": model_summary(model), "spectrum": result.to_dict()})
    click.echo(f"E = {result.lowest:.12g} ({result.solver}, residual {result.max_residual:.2e})")
