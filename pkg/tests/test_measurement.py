# tests/test_measurement.py
import numpy as np
import pytest

from uqcs import config
from uqcs.dynamics import StaticGenerator, evolve_static
from uqcs.hamiltonians import build_spin_chain
from uqcs.linalg import pauli_string
from uqcs import measurement
from uqcs.measurement import (
    CorrelatorSample,
    apply_gate_error,
    correlator_ideal,
    correlator_sampled,
    observable_id,
    perturb_step,
    sample_grid,
    sample_values,
    stream,
    trace_circuit_sample,
    trace_series,
)
from uqcs.schemas import SpinChainSpec
from uqcs.schemas import NoiseModel
from uqcs.spectroscopy import make_window


@pytest.fixture
def chain_gen(two_site_spec):
    return StaticGenerator.from_matrix(build_spin_chain(two_site_spec))


def test_correlator_at_equal_times_is_expectation(up_down):
    I = np.eye(4)
    Z1 = pauli_string("ZI")
    assert correlator_ideal(I, I, Z1, up_down) == pytest.approx(1.0)
    assert correlator_ideal(I, I, pauli_string("IZ"), up_down) == pytest.approx(-1.0)


def test_correlator_validates_inputs(up_down):
    I = np.eye(4)
    with pytest.raises(ValueError):
        correlator_ideal(np.eye(2), I, I, up_down)
    with pytest.raises(ValueError):
        correlator_ideal(I, I, I, 2 * up_down)


def test_ideal_sampling_is_exact(up_down):
    noise = NoiseModel()
    U = np.eye(4)
    assert correlator_sampled(U, U, U, up_down, noise) == pytest.approx(1.0)
    values = np.array([0.3 + 0.4j, -0.2j])
    out = sample_values(values, noise, stream(0, 1), stream(0, 2))
    assert np.array_equal(out, values)
    assert out is not values


def test_shot_noise_statistics():
    noise = NoiseModel(shots=1000, seed=7)
    values = np.full(20000, 0.3 + 0.4j)
    out = sample_values(values, noise, stream(7, 1), stream(7, 2))
    assert abs(out.mean() - (0.3 + 0.4j)) < 2e-3
    assert out.real.std() == pytest.approx(np.sqrt((1 - 0.09) / 1000), rel=0.05)
    assert out.imag.std() == pytest.approx(np.sqrt((1 - 0.16) / 1000), rel=0.05)
    assert np.all(np.abs(out.real) <= 1)


def test_shot_noise_falls_as_inverse_square_root():
    values = np.full(20000, 0.3 + 0.4j)
    shots = np.array([100, 1000, 10000, 100000])
    spread = []
    for i, n in enumerate(shots):
        out = sample_values(values, NoiseModel(shots=int(n), seed=3), stream(3, i, 0), stream(3, i, 1))
        spread.append(out.real.std())
    slope = np.polyfit(np.log(shots), np.log(spread), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_streams_are_keyed():
    a = stream(5, 1, 0, 3).standard_normal(4)
    b = stream(5, 1, 0, 3).standard_normal(4)
    c = stream(5, 1, 0, 4).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert observable_id("ZI") == observable_id("ZI") != observable_id("IZ")


def test_gate_error_variance(rng):
    draws = np.stack([apply_gate_error(np.zeros((4, 4)), 0.1, 10, rng) for _ in range(2000)])
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(0.1 / 5, rel=0.05)
    assert np.array_equal(apply_gate_error(np.eye(2), 0.0, 10, rng), np.eye(2))
    with pytest.raises(ValueError):
        apply_gate_error(np.eye(2), -0.1, 10, rng)


def test_perturb_step_variance(rng):
    v = np.array([1.0, 1.0j, 0.0, 0.0])
    draws = np.stack([perturb_step(v, 0.01, rng) for _ in range(5000)])
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(0.01 * 2, rel=0.05)


def test_ideal_grid_matches_direct_correlators(chain_gen, up_down):
    window = make_window(1.0, 8, 7.5)
    grid = sample_grid(chain_gen, up_down, "ZI", window, NoiseModel())
    assert grid.values.shape == (9, 9)
    O = pauli_string("ZI")
    H = chain_gen.H
    for j in (0, 3, 8):
        for k in (0, 4, 7):
            eta, t = grid.eta[j], grid.t[k]
            want = correlator_ideal(evolve_static(H, eta), evolve_static(H, eta + t), O, up_down)
            assert grid.values[j, k] == pytest.approx(want, abs=1e-10)


def test_grid_is_reproducible_across_threads(chain_gen, up_down, monkeypatch):
    window = make_window(1.0, 8, 7.5)
    noise = NoiseModel(shots=100, gate_error=1e-3, seed=11)
    monkeypatch.setattr(config.settings, "THREADS", 1)
    a = sample_grid(chain_gen, up_down, "IZ", window, noise)
    monkeypatch.setattr(config.settings, "THREADS", 4)
    b = sample_grid(chain_gen, up_down, "IZ", window, noise)
    assert np.array_equal(a.values, b.values)

    c = sample_grid(chain_gen, up_down, "IZ", window, noise.model_copy(update={"seed": 12}))
    assert not np.array_equal(a.values, c.values)


def test_noisy_grid_stays_close_to_ideal(chain_gen, up_down):
    window = make_window(1.0, 8, 7.5)
    ideal = sample_grid(chain_gen, up_down, "II", window, NoiseModel())
    noisy = sample_grid(chain_gen, up_down, "II", window, NoiseModel(gate_error=1e-4, seed=3))
    assert np.all(np.isfinite(noisy.values))
    assert np.max(np.abs(noisy.values - ideal.values)) < 0.25
    assert not np.array_equal(noisy.values, ideal.values)


def test_trace_series_at_zero():
    H = np.array([[1.0, 0.5], [0.5, 1.0]], dtype=np.complex128)
    values = trace_series(H, [0.0, 1.0], NoiseModel())
    assert values[0] == pytest.approx(1.0)
    assert values[1] == pytest.approx(np.exp(-1j) * np.cos(0.5))


def test_grid_samples_are_hadamard_test_readouts(chain_gen, up_down):
    window = make_window(1.0, 8, 7.5)
    noise = NoiseModel(shots=300, seed=21)
    grid = sample_grid(chain_gen, up_down, "ZI", window, noise)
    O = pauli_string("ZI")
    H = chain_gen.H
    obs = observable_id("ZI")
    for j in (0, 3, 8):
        for k in (1, 5, 6):
            eta, t = grid.eta[j], grid.t[k]
            want = correlator_sampled(
                evolve_static(H, eta), evolve_static(H, eta + t), O, up_down, noise, key=(obs, j, k)
            )
            assert grid.values[j, k] == pytest.approx(want, abs=1e-12)


def test_grid_samples_iterate_in_row_order(chain_gen, up_down):
    window = make_window(1.0, 8, 7.5)
    grid = sample_grid(chain_gen, up_down, "II", window, NoiseModel())
    samples = list(grid.samples())
    assert len(samples) == 81
    assert samples[10] == CorrelatorSample(
        float(grid.eta[1]), float(grid.t[1]), "II", complex(grid.values[1, 1])
    )


def test_trace_series_is_one_circuit_per_time():
    H = np.array([[1.0, 0.5], [0.5, 1.0]], dtype=np.complex128)
    noise = NoiseModel(shots=200, seed=4)
    times = [0.0, 0.7, 1.4]
    values = trace_series(H, times, noise, key=(2,))
    for k, t in enumerate(times):
        assert values[k] == trace_circuit_sample(H, t, noise, key=(2, k))
    assert not np.array_equal(values, trace_series(H, times, NoiseModel()))


@pytest.mark.parametrize("n_sites, dense", [(2, True), (5, False)])
def test_small_registers_perturb_the_step_unitary(n_sites, dense, monkeypatch):
    calls = []
    original = measurement.apply_gate_error

    def counting(*args, **kwargs):
        calls.append(kwargs.get("query_error"))
        return original(*args, **kwargs)

    monkeypatch.setattr(measurement, "apply_gate_error", counting)
    spec = SpinChainSpec(n_sites=n_sites, J=(-1.0, -1.0, -1.5), h=(1.5, 0.0, 0.5))
    gen = StaticGenerator.from_matrix(build_spin_chain(spec))
    psi = np.zeros(2**n_sites, dtype=np.complex128)
    psi[1] = 1.0
    noise = NoiseModel(gate_error=1e-3, query_error=0.01, seed=9)
    grid = sample_grid(gen, psi, "I" * n_sites, make_window(1.0, 8, 20.0), noise)

    assert np.all(np.isfinite(grid.values))
    if dense:
        assert calls and set(calls) == {0.01}
    else:
        assert not calls
