# tests/test_dynamics.py
import math

import numpy as np
import pytest

from conftest import nqr, two_mode
from uqcs.dynamics import (
    DrivenGenerator,
    StaticGenerator,
    default_substeps,
    evolve_driven,
    evolve_static,
    node_chain,
    propagator_grid,
)
from uqcs.hamiltonians import build_spin_chain, build_two_mode_nh, nqr_hamiltonian_at
from uqcs.linalg import matexp


def test_generator_kinds(two_site_spec):
    assert StaticGenerator.from_matrix(build_spin_chain(two_site_spec)).kind == "hermitian-static"
    assert StaticGenerator.from_matrix(build_two_mode_nh(two_mode(0.4))).kind == "non-hermitian-static"
    assert DrivenGenerator.from_spec(nqr(0.5)).kind == "driven"


def test_default_substeps_follow_drive_norm():
    # ||H(0)|| = 9 for B = 2
    assert 900 <= default_substeps(nqr(0.5)) <= 901
    with pytest.raises(ValueError):
        DrivenGenerator.from_spec(nqr(0.5), 50)


def test_static_evolution_is_unitary(two_site_spec):
    U = evolve_static(build_spin_chain(two_site_spec), 1.3)
    assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-12)


def test_driven_without_tilt_matches_static():
    spec = nqr(0.0)
    U = evolve_driven(spec, 1.37, 200)
    assert np.allclose(U, matexp(nqr_hamiltonian_at(spec, 0.0), -1j * 1.37), atol=1e-10)


def test_driven_rejects_coarse_substeps():
    with pytest.raises(ValueError):
        evolve_driven(nqr(0.5), 1.0, 99)


def test_driven_is_unitary_and_reversible():
    spec = nqr(math.pi / 3)
    U = evolve_driven(spec, 2.3, 400)
    assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-10)
    assert np.allclose(evolve_driven(spec, 0.0, 400), np.eye(4))


def test_driven_period_composition():
    spec = nqr(math.pi / 3, Omega=2 * math.pi / 10)
    U_T = evolve_driven(spec, 10.0, 100)
    U_2T = evolve_driven(spec, 20.0, 100)
    assert np.allclose(U_2T, U_T @ U_T, atol=1e-9)


@pytest.mark.parametrize("n", [1, 3, 4, 5])
def test_driven_stroboscopic_powers(n):
    spec = nqr(math.pi / 4, Omega=2 * math.pi / 10)
    U_T = evolve_driven(spec, 10.0, 100)
    U_nT = evolve_driven(spec, 10.0 * n, 100)
    assert np.max(np.abs(U_nT - np.linalg.matrix_power(U_T, n))) <= 1e-7


def test_driven_midpoint_error_is_second_order():
    spec = nqr(math.pi / 3, B=1.0)
    ref = evolve_driven(spec, 1.0, 6400)
    e1 = np.linalg.norm(evolve_driven(spec, 1.0, 400) - ref, 2)
    e2 = np.linalg.norm(evolve_driven(spec, 1.0, 800) - ref, 2)
    assert 3.5 <= e1 / e2 <= 4.6


def test_grid_and_pointwise_agree_bit_for_bit():
    spec = nqr(math.pi / 4)
    gen = DrivenGenerator.from_spec(spec, 200)
    grid = propagator_grid(gen, [-0.8, 0.0, 0.8, 1.6])
    assert np.array_equal(grid.at(1.6), evolve_driven(spec, 1.6, 200))
    assert np.array_equal(grid.at(-0.8), evolve_driven(spec, -0.8, 200))
    assert np.array_equal(grid.at(0.0), np.eye(4))
    with pytest.raises(KeyError):
        grid.at(0.5)


def test_propagator_grid_static(two_site_spec):
    H = build_spin_chain(two_site_spec)
    grid = propagator_grid(StaticGenerator.from_matrix(H), [-1.0, 0.5])
    assert np.allclose(grid.at(-1.0), evolve_static(H, -1.0))
    with pytest.raises(ValueError):
        propagator_grid(StaticGenerator.from_matrix(H), [1.0, 0.0])


def test_static_node_chain_states(two_site_spec, up_down):
    H = build_spin_chain(two_site_spec)
    chain = node_chain(StaticGenerator.from_matrix(H), 0.4, 5)
    states = chain.states(up_down)
    for m in (-5, -2, 0, 3, 5):
        assert np.allclose(states[m + 5], evolve_static(H, m * 0.4) @ up_down, atol=1e-12)


def test_driven_node_chain_steps():
    gen = DrivenGenerator.from_spec(nqr(math.pi / 4), 200)
    chain = node_chain(gen, 0.4, 3)
    U = propagator_grid(gen, np.arange(-3, 4) * 0.4).operators
    for m in range(-3, 3):
        assert np.allclose(chain.step(m, 1) @ U[m + 3], U[m + 4], atol=1e-12)
        assert np.allclose(chain.step(m + 1, -1) @ U[m + 4], U[m + 3], atol=1e-12)


def test_node_chain_validates_arguments(two_site_spec):
    gen = StaticGenerator.from_matrix(build_spin_chain(two_site_spec))
    with pytest.raises(ValueError):
        node_chain(gen, 0.0, 4)
