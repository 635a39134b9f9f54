import logging

import click
import numpy as np

from polaron_lab.cli.deps import command_session, config_argument, get_config, output_option
from polaron_lab.fock.grid import REFLECTION_K2
from polaron_lab.models.polaron import assemble
from polaron_lab.symmetry.rotation import rotation_operator
from polaron_lab.symmetry.sectors import kramers_pairing, sector_decompose

logger = logging.getLogger(__name__)


@click.command("sectors")
@config_argument
@output_option
def cmd_sectors(config_path, output_dir):
    """Angular momentum sectors of H(p) for p along the grid axis, with the Kramers pairing report."""
    config = get_config(config_path)
    with command_session(config, "sectors", output_dir) as session:
        model = config.build_model()
        grid = model.grid
        hamiltonian = assemble(model)
        with session.stage("sectors"):
            rotation = rotation_operator(
                model.basis, 2.0 * np.pi / max(grid.n_azimuthal, 1), model.polarization, p=model.p
            )
            decomposition = sector_decompose(hamiltonian.matrix, rotation)
        rows = []
        for label, spectrum, residuals in zip(
            decomposition.labels, decomposition.block_spectra, decomposition.block_residuals
        ):
            rows.extend((label, i, value, residual) for i, (value, residual) in enumerate(zip(spectrum, residuals)))
        session.csv("sectors.csv", ["sector", "index", "eigenvalue", "residual"], rows)

        payload = {
            "rotation_order": decomposition.rotation_order,
            "gauge_corrected": rotation.gauge_corrected,
            "dimensions": [[label, dim] for label, dim in decomposition.dimensions.items()],
            "commutant_residual": decomposition.commutant_residual,
            "cross_residual": decomposition.cross_residual,
            "union_residual": decomposition.union_residual,
            "scale": decomposition.scale,
        }
        if grid.has_tag(REFLECTION_K2) and abs(grid.axis[1]) <= 1e-12:
            report = kramers_pairing(
                model,
                decomposition,
                H=hamiltonian.matrix,
                n_clusters=config.degeneracy_clusters,
                cluster_tol=config.cluster_tol,
            )
            payload["kramers_pairing"] = report.model_dump()
        else:
            logger.warning("Grid has no k2-reflection about the axis; Kramers pairing skipped")
        session.json("sectors.json", payload)
    click.echo(f"{len(decomposition.labels)} sectors, dims {list(decomposition.dimensions.values())}")
