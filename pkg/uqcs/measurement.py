# uqcs/measurement.py
"""
Generalized Hadamard test, simulated classically.

The ancilla reads out Re and Im of <psi|U(eta)^dagger O U(eta+t)|psi> in
separate circuits (the S gate selects the imaginary part). Shot noise is a
binomial mean of +-1 outcomes per part; gate and query errors perturb every
single-step unitary of the controlled evolution.

Randomness is drawn from counter-based streams keyed by the master seed,
the observable id and the grid position: (eta row, t column, part) for the
readout and (part, eta row) for the noisy chain of each row. A grid is
reproducible bit for bit regardless of how rows are scheduled across threads.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .config import logger, max_workers
from .dynamics import Generator, NodeChain, evolve_static, node_chain
from .linalg import ComplexMatrix, pauli_string
from .schemas import NoiseModel

PART_RE = 0
PART_IM = 1
PART_GATE = 2
DENSE_ERROR_DIM = 16


@dataclass(frozen=True)
class CorrelatorSample:
    eta: float
    t: float
    observable: str
    value: complex


@dataclass(frozen=True, eq=False)
class CorrelatorGrid:
    """values[j, k] holds the sample at (eta[j], t[k])."""
    eta: np.ndarray
    t: np.ndarray
    values: np.ndarray
    observable: str

    def samples(self) -> Iterator[CorrelatorSample]:
        for j, eta in enumerate(self.eta):
            for k, t in enumerate(self.t):
                yield CorrelatorSample(float(eta), float(t), self.observable, complex(self.values[j, k]))


# ---------------------------
# RNG streams
# ---------------------------

def observable_id(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


# ---------------------------
# Ideal / sampled correlators
# ---------------------------

def correlator_ideal(U_eta, U_eta_t, O, psi) -> complex:
    psi = np.asarray(psi, dtype=np.complex128)
    d = psi.shape[0]
    for name, M in (("U_eta", U_eta), ("U_eta_t", U_eta_t), ("O", O)):
        if np.shape(M) != (d, d):
            raise ValueError(f"{name} has shape {np.shape(M)}, expected {(d, d)}")
    if not np.isclose(np.linalg.norm(psi), 1.0, atol=1e-9):
        raise ValueError("psi must be normalized")
    return complex(np.vdot(U_eta @ psi, O @ (U_eta_t @ psi)))


def _sample_part(x: np.ndarray, magnitude: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    # binomial ancilla statistics inside [-1, 1], additive Gaussian outside
    p = np.clip((1 + x) / 2, 0.0, 1.0)
    counts = rng.binomial(shots, p)
    binom = 2.0 * counts / shots - 1.0
    gauss = x + rng.standard_normal(x.shape) * (1 + magnitude) / np.sqrt(shots)
    return np.where(np.abs(x) <= 1, binom, gauss)


def sample_values(values, noise: NoiseModel, rng_re: np.random.Generator, rng_im: np.random.Generator) -> np.ndarray:
    values = np.asarray(values, dtype=np.complex128)
    if noise.ideal:
        return values.copy()
    mag = np.abs(values)
    re = _sample_part(values.real, mag, noise.shots, rng_re)
    im = _sample_part(values.imag, mag, noise.shots, rng_im)
    return re + 1j * im


def hadamard_readout(value: complex, noise: NoiseModel, key: Sequence[int] = ()) -> complex:
    """One ancilla estimate of value; Re and Im come from separately keyed circuits."""
    if noise.ideal:
        return complex(value)
    out = sample_values(
        np.array([value]),
        noise,
        stream(noise.seed, *key, PART_RE),
        stream(noise.seed, *key, PART_IM),
    )
    return complex(out[0])


def correlator_sampled(U_eta, U_eta_t, O, psi, noise: NoiseModel, key: Sequence[int] = ()) -> complex:
    return hadamard_readout(correlator_ideal(U_eta, U_eta_t, O, psi), noise, key)


# ---------------------------
# Gate errors
# ---------------------------

def apply_gate_error(
    U, eps_g: float, N: int, rng: np.random.Generator, query_error: float = 0.0
) -> ComplexMatrix:
    """U + E with E_ij ~ CN(0, eps_g/(N/2) + query_error^2); not re-unitarized."""
    if eps_g < 0 or query_error < 0:
        raise ValueError("eps_g and query_error must be >= 0")
    U = np.asarray(U, dtype=np.complex128)
    variance = eps_g / (N / 2) + query_error**2
    if variance == 0:
        return U.copy()
    std = np.sqrt(variance / 2)
    return U + std * (rng.standard_normal(U.shape) + 1j * rng.standard_normal(U.shape))


def perturb_step(v: np.ndarray, variance: float, rng: np.random.Generator) -> np.ndarray:
    """
    E @ v for a fresh E with i.i.d. CN(0, variance) entries.

    Each component of E @ v is CN(0, variance*||v||^2) and independent of the
    others, so only len(v) complex draws are needed.
    """
    std = np.sqrt(variance / 2) * np.linalg.norm(v)
    d = v.shape[0]
    return std * (rng.standard_normal(d) + 1j * rng.standard_normal(d))


# ---------------------------
# PT-transition trace circuit
# ---------------------------

def trace_circuit_sample(H_NH, t: float, noise: NoiseModel, key: Sequence[int] = ()) -> complex:
    """A(t) = Tr(exp(-i H t))/d with a maximally mixed register."""
    H = np.asarray(H_NH, dtype=np.complex128)
    exact = np.trace(evolve_static(H, t)) / H.shape[0]
    return hadamard_readout(exact, noise, (observable_id("trace"), *key))


def trace_series(H_NH, times: Sequence[float], noise: NoiseModel, key: Sequence[int] = ()) -> np.ndarray:
    """One trace circuit per time, keyed by its index."""
    return np.array(
        [trace_circuit_sample(H_NH, t, noise, key=(*key, k)) for k, t in enumerate(times)],
        dtype=np.complex128,
    )


# ---------------------------
# Full (eta, t) grid
# ---------------------------

def _noisy_row(
    chain: NodeChain,
    psi: np.ndarray,
    a: int,
    half: int,
    noise: NoiseModel,
    n_points: int,
    norms: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Kets on nodes a-half .. a+half from one noisy chain: 0 -> a, then +-t from a.

    Small registers perturb every step unitary element-wise. Larger ones draw
    E @ v directly, which has the same distribution.
    """
    N = chain.half_span
    dense = psi.shape[0] <= DENSE_ERROR_DIM
    variance = noise.step_variance(n_points)

    def advance(state, m, direction):
        step = chain.step(m, direction)
        if dense:
            new = apply_gate_error(step, noise.gate_error, n_points, rng, query_error=noise.query_error) @ state
        else:
            new = step @ state + perturb_step(state, variance, rng)
        nrm = np.linalg.norm(new)
        if nrm > 0:
            new = new * (norms[m + direction + N] / nrm)
        return new

    state = psi
    m = 0
    direction = 1 if a > 0 else -1
    while m != a:
        state = advance(state, m, direction)
        m += direction

    out = np.empty((2 * half + 1, psi.shape[0]), dtype=np.complex128)
    out[half] = state
    cur = state
    for i in range(1, half + 1):
        cur = advance(cur, a + i - 1, 1)
        out[half + i] = cur
    cur = state
    for i in range(1, half + 1):
        cur = advance(cur, a - i + 1, -1)
        out[half - i] = cur
    return out


def sample_grid(
    source: Generator,
    psi,
    pauli: str,
    window,
    noise: NoiseModel,
    chain: Optional[NodeChain] = None,
) -> CorrelatorGrid:
    """
    Hadamard-test samples for eta_j = (j - N/2) dt and t_k = (k - N/2) dt.
    Sample (j, k) is read out exactly as correlator_sampled with key (obs, j, k).

    eta_j + t_k is node j + k - N of the chain, so the chain spans nodes -N..N.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    N = window.n_points
    half = N // 2
    if chain is None:
        chain = node_chain(source, window.dt, N)
    if chain.half_span < N:
        raise ValueError("node chain too short for the window")

    O = pauli_string(pauli)
    ideal = chain.states(psi)
    norms = np.linalg.norm(ideal, axis=1)
    obs = observable_id(pauli)
    variance = noise.step_variance(N) if noise.has_step_error else 0.0
    C = chain.half_span

    def row(j: int) -> np.ndarray:
        a = j - half
        if variance > 0:
            kets = _noisy_row(chain, psi, a, half, noise, N, norms, stream(noise.seed, obs, PART_GATE, j))
            bra = kets[half]
        else:
            kets = ideal[C + a - half : C + a + half + 1]
            bra = ideal[C + a]
        vals = kets @ np.conj(O.conj().T @ bra)
        if noise.ideal:
            return vals
        return np.array([hadamard_readout(v, noise, (obs, j, k)) for k, v in enumerate(vals)])

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        rows = list(pool.map(row, range(N + 1)))

    logger.debug(
        "[SAMPLE] observable=%s n_points=%d shots=%s step_variance=%.3g",
        pauli, N, noise.shots, variance,
    )
    return CorrelatorGrid(
        eta=window.eta_grid.copy(),
        t=window.t_grid.copy(),
        values=np.stack(rows),
        observable=pauli,
    )
