import numpy as np
import pytest

from polaron_lab.core.errors import SolverError
from polaron_lab.fock.grid import build_cylindrical_grid
from polaron_lab.lab.dispersion import dispersion_report, essential_gap, essential_gap_sweep, ir_criterion
from polaron_lab.lab.energy import EnergyLab, ground_energy, momentum_line, parameter_line, scan
from polaron_lab.lab.properties import (
    check_concavity,
    check_gauge_equivalence,
    check_inverse_energy,
    check_lipschitz,
    check_mass_monotone,
    check_mass_reflection,
    check_rotation_symmetry,
    default_alternative_polarization,
    random_segments,
    segment_points,
)
from polaron_lab.lab.pull_through import photon_bounds, pull_through_residual, pull_through_sweep
from polaron_lab.schemas.reports import FAIL, HYPOTHESIS_NOT_SATISFIED, INDISTINGUISHABLE, PASS
from polaron_lab.schemas.solver import SolverSettings


@pytest.fixture(scope="module")
def d2_lab(d2_model):
    return EnergyLab(d2_model)


def test_energy_cache(d2_lab):
    point = d2_lab.point()
    first = d2_lab.spectrum(point)
    assert d2_lab.spectrum(d2_lab.point(p=(0.0, 0.0, 0.5))) is first
    assert d2_lab.energy(point) == first.lowest


def test_ground_energy_free(ring_grid, make_model):
    model = make_model(ring_grid, 2, p=(0.0, 0.0, 0.5), q=0.0)
    assert ground_energy(model) == pytest.approx(-np.sqrt(1.25), abs=1e-12)


def test_unconverged_energy_raises(ring_grid, make_model):
    model = make_model(ring_grid, 2, q=0.3)
    lab = EnergyLab(model, SolverSettings(method="krylov", max_iter=1))
    with pytest.raises(SolverError):
        lab.energy(lab.point())


def test_scan_is_sorted_and_free_values_exact(ring_grid, make_model):
    model = make_model(ring_grid, 2, q=0.0)
    lab = EnergyLab(model)
    values = [0.75, -0.5, 0.0, 0.25]
    surface = scan(model, momentum_line(lab, (0.0, 0.0, 2.0), values), lab=lab, axis_spec="p")
    assert [sample.p[2] for sample in surface.samples] == sorted(values)
    for sample in surface.samples:
        assert sample.energy == pytest.approx(-np.sqrt(sample.p[2] ** 2 + 1.0), abs=1e-12)
    assert not surface.flagged


def test_parameter_line_rejects_unknown_names(d2_lab):
    with pytest.raises(ValueError):
        parameter_line(d2_lab, "lam", [1.0])
    points = parameter_line(d2_lab, "q", [0.0, 0.1])
    assert [point.q for point in points] == [0.0, 0.1]


def test_concavity_and_lipschitz(d2_model, d2_lab):
    segments = random_segments(d2_lab, 6, seed=11)
    surface = scan(d2_model, segment_points(segments), lab=d2_lab)
    assert check_concavity(surface, segments, d2_lab.scale).status == PASS
    assert check_lipschitz(surface, d2_lab.scale).status == PASS


def test_concavity_flags_a_convex_surface(d2_model, d2_lab):
    segments = random_segments(d2_lab, 1, seed=2)
    surface = scan(d2_model, segment_points(segments), lab=d2_lab)
    surface.samples = [
        sample.model_copy(update={"energy": float(np.sum(np.square(sample.p)))}) for sample in surface.samples
    ]
    assert check_concavity(surface, segments, d2_lab.scale).status == FAIL


def test_mass_reflection(d2_model, d2_lab):
    report = check_mass_reflection(d2_model, lab=d2_lab)
    assert report.status == PASS
    assert report.details["E_M"] == pytest.approx(report.details["E_minus_M"], abs=1e-10)


def test_inverse_energy(d2_model, d2_lab):
    points = [d2_lab.point(p=np.zeros(3))]
    for t in (0.25, 0.5):
        points.extend([d2_lab.point(p=(0.0, 0.0, t)), d2_lab.point(p=(t, 0.0, 0.0))])
    surface = scan(d2_model, points, lab=d2_lab)
    report = check_inverse_energy(surface, d2_lab.scale)
    assert report.status in (PASS, INDISTINGUISHABLE)
    assert report.worst_slack >= 0.0


def test_inverse_energy_needs_a_symmetric_grid(single_point_grid, make_model):
    model = make_model(single_point_grid, 1, q=0.2)
    lab = EnergyLab(model)
    surface = scan(model, [lab.point(), lab.point(p=(0.0, 0.0, 0.3))], lab=lab)
    assert check_inverse_energy(surface, lab.scale).status == HYPOTHESIS_NOT_SATISFIED


def test_mass_monotone(d2_model, d2_lab):
    report = check_mass_monotone(d2_model, [0.0, 0.1, 0.3], lab=d2_lab)
    assert report.status == PASS
    energies = report.details["energies"]
    assert energies == sorted(energies)
    with pytest.raises(ValueError):
        check_mass_monotone(d2_model, [0.1, 0.3], lab=d2_lab)


def test_rotation_symmetry(d2_model, d2_lab):
    report = check_rotation_symmetry(d2_model, lab=d2_lab)
    assert report.status == PASS
    assert report.details["group_elements"] == 16


def test_gauge_equivalence_on_ring(d2_model, d2_lab):
    alternative = default_alternative_polarization(d2_model.polarization, d2_model.grid)
    assert alternative.kind == "axis"
    report = check_gauge_equivalence(d2_model, alternative, lab=d2_lab)
    assert report.status == PASS
    assert "spectra" in report.details["parts"]


def test_dispersion_bounds(d2_model, d2_lab):
    report = dispersion_report(d2_model, lab=d2_lab)
    assert report.hypothesis_satisfied
    assert report.verdict.status != FAIL
    for entry in report.entries:
        assert 0.0 < entry.gap <= 2.0 * entry.norm_k + 1e-9
    at_origin = dispersion_report(d2_model, p=np.zeros(3), lab=d2_lab)
    assert at_origin.a_m is not None and at_origin.a_m > 0.0
    assert at_origin.verdict.status != FAIL


def test_dispersion_free_gaps(ring_grid, make_model):
    model = make_model(ring_grid, 2, q=0.0)
    report = dispersion_report(model)
    # E(-k) = -sqrt(2) on the unit ring, E(0) = -1
    assert np.allclose(report.gaps(), 2.0 - np.sqrt(2.0), atol=1e-12)


def test_ir_criterion_scales_with_the_coupling(d2_model, d2_lab):
    dispersion = dispersion_report(d2_model, lab=d2_lab)
    report = ir_criterion(d2_model, dispersion=dispersion, couplings=[0.1, 0.2], lab=d2_lab)
    assert report.value == pytest.approx(0.09 * report.unit_value)
    assert report.coupling_scan["0.2"] == pytest.approx(4.0 * report.coupling_scan["0.1"])
    assert report.per_helicity_value == pytest.approx(0.5 * report.value)
    assert report.q0 == pytest.approx(1.0 / np.sqrt(report.unit_value))
    assert report.passes == (report.value < 1.0)
    assert report.verdict.details["q_scaling"].startswith("by construction")


def test_ir_criterion_vanishes_without_coupling(ring_grid, make_model):
    model = make_model(ring_grid, 2, q=0.0)
    report = ir_criterion(model)
    assert report.value == 0.0
    assert report.passes
    assert report.unit_value > 0.0


def test_essential_gap_free(ring_grid, make_model):
    model = make_model(ring_grid, 2, m=0.2, q=0.0)
    report = essential_gap(model)
    assert report.value == pytest.approx(2.4 - np.sqrt(2.0), abs=1e-12)
    assert report.lower == pytest.approx(0.2)
    assert report.upper == pytest.approx(2.4)
    assert report.verdict.status == PASS


def test_essential_gap_needs_photon_mass(d2_model):
    with pytest.raises(ValueError):
        essential_gap(d2_model)


@pytest.mark.parametrize("q", [0.0, 0.3])
def test_essential_gap_sweep_tightens(make_model, q):
    models = [
        make_model(build_cylindrical_grid(1, 1, 4, k_min, 1.5), 2, p=(0.0, 0.0, 0.5), m=0.2, q=q)
        for k_min in (0.5, 0.25)
    ]
    report = essential_gap_sweep(models)
    assert report.status == PASS
    excess = report.details["excess"]
    assert excess[1] < excess[0]
    assert report.details["parts"]["tightening_0"]["slack"] > 0.0


def test_essential_gap_sweep_fails_when_the_excess_grows(ring_grid, make_model):
    # same grid, so the brackets coincide; only the computed energies differ
    models = [make_model(ring_grid, 2, m=0.2, q=0.0, M=M) for M in (1.0, 2.0)]
    report = essential_gap_sweep(models)
    assert report.details["widths"][0] == report.details["widths"][1]
    assert report.details["excess"][1] == pytest.approx(3.2 - np.sqrt(5.0), abs=1e-10)
    assert report.status == FAIL
    assert report.details["failing"] == ["tightening_0"]


def test_essential_gap_names_its_slack(ring_grid, make_model):
    report = essential_gap(make_model(ring_grid, 2, m=0.2, q=0.0))
    details = report.verdict.details
    assert details["lipschitz_slack"] == pytest.approx(report.k_floor)
    assert details["lower"] + details["photon_term"] + details["lipschitz_slack"] == pytest.approx(report.upper)


def test_pull_through_is_exact_below_the_ceiling(single_point_grid, make_model):
    model = make_model(single_point_grid, 3, q=0.3)
    report = pull_through_residual(model)
    assert report.max_protected < 1e-9
    assert report.max_ceiling > 0.0
    assert len(report.protected_residuals) == 2
    assert report.verdict.status == PASS


def test_pull_through_sweep(single_point_grid, make_model):
    models = [make_model(single_point_grid, n_max, q=0.3) for n_max in (3, 1, 2)]
    report = pull_through_sweep(models)
    assert report.details["n_max"] == [1, 2, 3]
    ceilings = report.details["max_ceiling"]
    assert ceilings[0] > ceilings[1] > ceilings[2]
    assert report.status == PASS


def test_pull_through_free_residual_vanishes(single_point_grid, make_model):
    models = [make_model(single_point_grid, n_max, q=0.0) for n_max in (1, 2)]
    report = pull_through_sweep(models)
    assert max(report.details["max_ceiling"]) < 1e-12
    assert report.status == INDISTINGUISHABLE


def test_photon_bounds_free(ring_grid, make_model):
    model = make_model(ring_grid, 2, p=(0.0, 0.0, 0.5), q=0.0)
    report = photon_bounds(model)
    assert report.photon_number == pytest.approx(0.0, abs=1e-12)
    assert report.vacuum_overlap == pytest.approx(1.0, abs=1e-12)
    assert report.verdict.status == PASS


def test_photon_bounds_coupled(d2_model, d2_lab):
    report = photon_bounds(d2_model, lab=d2_lab)
    assert report.verdict.status == PASS
    assert 0.0 < report.photon_number <= report.photon_bound
    assert report.vacuum_overlap >= 1.0 - report.photon_number - 1e-9
