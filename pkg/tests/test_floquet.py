# tests/test_floquet.py
import math

import numpy as np
import pytest

from conftest import nqr
from uqcs.dynamics import evolve_driven
from uqcs.floquet import (
    HolonomyError,
    adiabatic_wilson_trace,
    berry_phase_from_shift,
    build_extended,
    central_levels,
    fold_to_zone,
    holonomy_from_spectrum,
    oracle_levels,
    quasi_energies,
    wilson_loop_from_split,
    wz_holonomy,
)
from uqcs.hamiltonians import FourierHamiltonian, fourier_components, spin_operators
from uqcs.spectroscopy import Peak


def rotating_frame_levels(spec):
    """Eigenvalues of H(0) - Omega S_z; U(T) = -exp(-i (H(0) - Omega S_z) T) for spin 3/2."""
    _, _, sz = spin_operators()
    H0 = fourier_components(spec, m_max=2).at(0.0)
    return np.linalg.eigvalsh(H0 - spec.Omega * sz)


def distance_mod(E, target, Omega):
    x = (np.asarray(E) - target) / Omega
    return np.abs(x - np.round(x)) * Omega


def test_static_extended_space_is_block_diagonal():
    fh = FourierHamiltonian.from_static(np.diag([1.0, 9.0]), 0.5)
    prob = build_extended(fh, 2)
    assert prob.n_blocks == 5
    assert prob.matrix.shape == (10, 10)
    assert np.allclose(prob.block(1, 1), np.diag([1.5, 9.5]))
    assert np.allclose(prob.block(-2, -2), np.diag([0.0, 8.0]))
    assert np.allclose(prob.block(0, 1), 0)
    with pytest.raises(ValueError):
        build_extended(fh, 0)


def test_driven_blocks_follow_harmonics(nqr_quarter):
    fh = fourier_components(nqr_quarter, m_max=2)
    prob = build_extended(fh, 3)
    assert np.allclose(prob.block(0, 1), fh.component(1))
    assert np.allclose(prob.block(1, 0), fh.component(-1))
    assert np.allclose(prob.block(-1, 1), fh.component(2))
    assert np.allclose(prob.block(-2, 1), 0)
    assert np.allclose(prob.matrix, prob.matrix.conj().T)


def test_untilted_drive_gives_exact_replicas():
    spec = nqr(0.0)
    table = quasi_energies(build_extended(fourier_components(spec, m_max=2), 3), reference=(1.0, 9.0))
    assert len(table) == 4 * 7
    for q in table:
        assert q.level in (1.0, 9.0)
        assert q.energy == pytest.approx(q.level + q.band * spec.Omega, abs=1e-9)
    central = [q for q in table if q.band == 0]
    assert len(central) == 4
    assert all(q.weight_hint == pytest.approx(1.0) for q in central)


@pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2])
def test_extended_space_matches_rotating_frame(theta):
    spec = nqr(theta)
    E = np.linalg.eigvalsh(build_extended(fourier_components(spec, m_max=2), 10).matrix)
    for e in rotating_frame_levels(spec):
        assert np.min(distance_mod(E, e + spec.Omega / 2, spec.Omega)) < 1e-6


def test_truncation_convergence(nqr_quarter):
    fh = fourier_components(nqr_quarter, m_max=2)
    Omega = nqr_quarter.Omega
    small = central_levels(build_extended(fh, 8))
    large = central_levels(build_extended(fh, 12))
    for e in small:
        assert np.min(distance_mod(large, e, Omega)) < 1e-6


def test_oracle_is_stroboscopic():
    spec = nqr(math.pi / 4, B=1.0)
    T = 2 * math.pi / spec.Omega
    phases = np.linalg.eigvals(evolve_driven(spec, T, 4000))
    for E in oracle_levels(spec):
        assert np.min(np.abs(phases - np.exp(-1j * E * T))) < 1e-5


def test_half_pi_band_shift_gives_berry_phase_near_pi():
    spec = nqr(math.pi / 2)
    lower = rotating_frame_levels(spec)[:2]
    for e in lower:
        gamma = berry_phase_from_shift(e + spec.Omega / 2 - 1.0, spec.Omega)
        assert 0.90 * math.pi <= abs(gamma) <= math.pi


def test_fold_to_zone():
    assert np.allclose(fold_to_zone([3.0, 4.0], 1.0), [3.0, 4.0 - 2 * math.pi])
    assert fold_to_zone(10.0, 1.0, center=10.0) == pytest.approx(10.0)


# ---------------------------
# Holonomy
# ---------------------------

def test_wz_quarter_pi_matches_closed_form(nqr_quarter):
    hol = wz_holonomy(nqr_quarter, "lower")
    assert hol.wilson_trace.real == pytest.approx(-0.504, abs=5e-3)
    assert hol.wilson_trace.real == pytest.approx(adiabatic_wilson_trace(math.pi / 4), abs=5e-3)
    assert abs(hol.wilson_trace.imag) < 1e-3
    assert np.allclose(hol.wz_matrix.conj().T @ hol.wz_matrix, np.eye(2), atol=1e-8)
    assert hol.berry_phase is None


def test_wz_half_pi_is_minus_identity():
    hol = wz_holonomy(nqr(math.pi / 2), "lower")
    assert np.allclose(hol.wz_matrix, -np.eye(2), atol=1e-3)
    assert abs(abs(hol.berry_phase) - math.pi) < 1e-2


def test_wz_untilted_is_trivial():
    hol = wz_holonomy(nqr(0.0), "lower")
    assert hol.wilson_trace.real == pytest.approx(2.0, abs=1e-9)
    assert hol.berry_phase == pytest.approx(0.0, abs=1e-9)
    assert adiabatic_wilson_trace(0.0) == pytest.approx(2.0)


def test_wilson_trace_is_gauge_invariant(nqr_quarter):
    plain = wz_holonomy(nqr_quarter, "lower", n_path_steps=360)
    rotated = wz_holonomy(nqr_quarter, "lower", n_path_steps=360, regauge_rng=np.random.default_rng(3))
    assert rotated.wilson_trace == pytest.approx(plain.wilson_trace, abs=1e-8)


def test_wz_validates_arguments(nqr_quarter):
    with pytest.raises(ValueError):
        wz_holonomy(nqr_quarter, "middle")
    with pytest.raises(ValueError):
        wz_holonomy(nqr_quarter, "lower", n_path_steps=50)
    assert issubclass(HolonomyError, RuntimeError)


def test_berry_phase_and_wilson_loop_formulas():
    assert berry_phase_from_shift(0.228, 0.5) == pytest.approx(0.912 * math.pi)
    assert berry_phase_from_shift(0.25, 0.5) == pytest.approx(math.pi)
    assert berry_phase_from_shift(0.0, 0.5) == 0.0
    assert wilson_loop_from_split(0.0, 0.5) == pytest.approx(2.0)
    assert wilson_loop_from_split(0.25, 0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        wilson_loop_from_split(0.6, 0.5)
    with pytest.raises(ValueError):
        berry_phase_from_shift(0.1, 0.0)


def test_holonomy_from_spectrum(nqr_quarter):
    peaks = [
        Peak(center=1.2, amplitude=0.6, fit_width=0.07, uncertainty=0.0),
        Peak(center=0.91, amplitude=0.3, fit_width=0.07, uncertainty=0.0),
        Peak(center=3.0, amplitude=0.9, fit_width=0.07, uncertainty=0.0),
    ]
    hol = holonomy_from_spectrum(peaks, nqr_quarter, "lower")
    assert hol.static_level == 1.0
    assert hol.band_energies == [1.2, 0.91]
    assert hol.berry_phase == pytest.approx(0.8 * math.pi)
    assert hol.split == pytest.approx(0.29)
    assert hol.wilson_trace == pytest.approx(wilson_loop_from_split(0.29, 0.5))

    empty = holonomy_from_spectrum(peaks[2:], nqr_quarter, "lower")
    assert empty.berry_phase is None and empty.wilson_trace is None
