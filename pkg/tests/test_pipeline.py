# tests/test_pipeline.py
import math

import numpy as np
import pytest

from conftest import TWO_SITE_ENERGIES, nqr, two_mode
from uqcs.dynamics import DrivenGenerator, StaticGenerator
from uqcs.hamiltonians import build_spin_chain
from uqcs.pipeline import (
    build_generator,
    estimate_eigenstates,
    exact_lines,
    identity_label,
    observable_paulis,
    prepare_state,
    run_uqcs,
    spectral_bound,
    trial_state,
)
from uqcs.schemas import InitialState, NoiseModel, ObservableSpec, SSAConfig
from uqcs.spectroscopy import choose_grid


def test_build_generator_kinds(two_site_spec):
    assert isinstance(build_generator(two_site_spec), StaticGenerator)
    assert build_generator(two_mode(0.4)).kind == "non-hermitian-static"
    gen = build_generator(nqr(0.5), 300)
    assert isinstance(gen, DrivenGenerator) and gen.substeps_per_unit_time == 300


def test_spectral_bounds(two_site_spec):
    assert spectral_bound(two_site_spec) == pytest.approx(7.5)
    assert spectral_bound(two_mode(0.4)) == pytest.approx(1.9)
    assert spectral_bound(nqr(0.5)) == pytest.approx(9.0)


def test_prepare_states(two_site_spec):
    gen = build_generator(two_site_spec)
    psi = prepare_state(InitialState(kind="basis", label="01"), two_site_spec, gen)
    assert np.array_equal(psi, [0, 1, 0, 0])
    with pytest.raises(ValueError):
        prepare_state(InitialState(kind="basis", label="011"), two_site_spec, gen)
    with pytest.raises(ValueError):
        prepare_state(InitialState(kind="maximally-mixed"), two_site_spec, gen)
    with pytest.raises(ValueError):
        prepare_state(InitialState(kind="nqr-doublet"), two_site_spec, gen)

    doublet = prepare_state(InitialState(kind="nqr-doublet", level="upper"), nqr(0.0))
    assert np.allclose(np.abs(doublet), [0, 0, 0, 1])


def test_trial_state_overlap(two_site_spec):
    H = build_spin_chain(two_site_spec)
    psi = trial_state(H, 0.9, target=1)
    _, V = np.linalg.eigh(H)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert abs(np.vdot(V[:, 1], psi)) ** 2 == pytest.approx(0.81)
    with pytest.raises(ValueError):
        trial_state(H, 0.9, target=4)

    gen = build_generator(two_site_spec)
    init = InitialState(kind="trial-overlap", zeta=0.9)
    assert np.allclose(prepare_state(init, two_site_spec, gen), trial_state(H, 0.9))
    with pytest.raises(ValueError):
        prepare_state(init, two_mode(0.4), build_generator(two_mode(0.4)))


def test_exact_lines_weights(two_site_spec, up_down):
    lines = exact_lines(build_generator(two_site_spec), up_down)
    assert sum(l.weight for l in lines) == pytest.approx(1.0)
    assert np.allclose(sorted(l.energy.real for l in lines), TWO_SITE_ENERGIES, atol=1e-3)
    singlet = max(lines, key=lambda l: l.energy.real)
    assert singlet.weight == pytest.approx(0.5)


def test_exact_lines_reject_exceptional_point():
    psi = np.array([1, 0], dtype=np.complex128)
    with pytest.raises(ValueError):
        exact_lines(build_generator(two_mode(0.5)), psi)


def test_identity_label_and_paulis():
    assert identity_label(4) == "II"
    obs = [
        ObservableSpec(label="M", terms={"ZI": 1.0, "IZ": 1.0}),
        ObservableSpec(label="Z1", terms={"ZI": 1.0}),
    ]
    assert observable_paulis(obs) == ["ZI", "IZ"]


def test_two_site_ideal_run(two_site_spec, up_down):
    gen = build_generator(two_site_spec)
    window = choose_grid(7.5, tau=6.0)
    obs = [ObservableSpec(label="M", terms={"ZI": 1.0, "IZ": 1.0})]
    result = run_uqcs(gen, up_down, window, NoiseModel(), paulis=observable_paulis(obs))
    assert result.identity == "II"
    assert set(result.spectra) == {"II", "ZI", "IZ"}
    assert result.query_depth == 120

    lines = exact_lines(gen, up_down)
    assert len(result.peaks) == 4
    for line in lines:
        peak = min(result.peaks, key=lambda p: abs(p.center - line.energy.real))
        assert peak.center == pytest.approx(line.energy.real, abs=5e-3)
        assert peak.amplitude == pytest.approx(line.weight, abs=1e-2)

    M = np.diag([2.0, 0.0, 0.0, -2.0])
    for est in estimate_eigenstates(result, obs):
        line = min(lines, key=lambda l: abs(l.energy.real - est.energy))
        r = line.state
        assert est.observables["M"].real == pytest.approx(np.vdot(r, M @ r).real, abs=5e-2)


def test_ssa_scale_is_shared(two_site_spec, up_down):
    gen = build_generator(two_site_spec)
    window = choose_grid(7.5, tau=6.0)
    result = run_uqcs(
        gen, up_down, window, NoiseModel(), paulis=["ZI"], ssa=SSAConfig(rank=4, renormalize=True), keep_grids=True
    )
    assert result.series["II"].scale == pytest.approx(1.0, abs=1e-6)
    assert result.series["ZI"].scale == result.series["II"].scale
    assert set(result.grids) == {"II", "ZI"}
    assert result.grids["II"].values.shape == (121, 121)


def test_tomography_estimates(two_site_spec, up_down):
    from uqcs.linalg import all_pauli_strings

    gen = build_generator(two_site_spec)
    window = choose_grid(7.5, tau=6.0)
    result = run_uqcs(gen, up_down, window, NoiseModel(), paulis=all_pauli_strings(2))
    lines = exact_lines(gen, up_down)
    refs = {l.energy.real: l.state for l in lines}
    estimates = estimate_eigenstates(result, with_tomography=True, references=refs)
    assert len(estimates) == 4
    for est in estimates:
        assert est.fidelity_vs_reference >= 0.999
        assert np.trace(est.density_matrix).real == pytest.approx(1.0)


def test_non_hermitian_runs_are_not_renormalized():
    gen = build_generator(two_mode(0.4))
    psi = np.array([1, 0], dtype=np.complex128)
    window = choose_grid(spectral_bound(two_mode(0.4)), tau=6.0)
    plain = run_uqcs(gen, psi, window, NoiseModel(), paulis=["X"], ssa=SSAConfig(rank=2))
    renorm = run_uqcs(gen, psi, window, NoiseModel(), paulis=["X"], ssa=SSAConfig(rank=2, renormalize=True))
    for label in ("I", "X"):
        assert renorm.series[label].scale == 1.0
        assert np.array_equal(renorm.series[label].values, plain.series[label].values)
