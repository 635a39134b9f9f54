import logging

import click

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.models.polaron import assemble
from polaron_lab.output.serialize import basis_payload, model_summary, operator_triplets

logger = logging.getLogger(__name__)


@click.command("assemble")
@config_argument
@output_option
def cmd_assemble(config_path, output_dir):
    """Assemble H(p) and write it with its Fock basis as JSON triplets."""
    config = get_config(config_path)
    with command_session(config, "assemble", output_dir) as session:
        with session.stage("assemble"):
            model = config.build_model()
            hamiltonian = assemble(model)
        session.json("basis.json", basis_payload(model.basis))
        session.json(
            "hamiltonian.json",
            {"model": model_summary(model), "operator": operator_triplets(hamiltonian.matrix)},
        )
    click.echo(f"H(p) dim {hamiltonian.dim}, {hamiltonian.matrix.nnz} non-zeros -> {session.output_dir}")
