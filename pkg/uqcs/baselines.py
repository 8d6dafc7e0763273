# uqcs/baselines.py
"""
Iterative phase estimation, simulated classically.

Round k (from the least significant bit n down to 1) applies the controlled
power V = W^(2^(k-1)) of the shifted query W = U exp(-i shift), rotates the
ancilla by the feedback phase of the bits already read, and votes on the
outcome. With eigenvalue exp(2 pi i phi) of W, the energy is recovered as
E = (2 pi (1 - phi) mod 2 pi - shift) / dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from .config import logger
from .dynamics import DrivenGenerator, Generator, StaticGenerator, evolve_driven, evolve_static
from .linalg import ComplexMatrix, as_matrix
from .measurement import stream
from .schemas import IQPEConfig

DAMPING_IDEAL = 1e-3

_PART_QUERY = 0
_PART_SHOTS = 1


def inject_query_error(U, eps_q: float, rng: np.random.Generator) -> ComplexMatrix:
    """U_ij + eps_q * CN(0, 1), one fresh draw per call."""
    if eps_q < 0:
        raise ValueError("eps_q must be >= 0")
    U = np.asarray(U, dtype=np.complex128)
    if eps_q == 0:
        return U.copy()
    noise = (rng.standard_normal(U.shape) + 1j * rng.standard_normal(U.shape)) / math.sqrt(2)
    return U + eps_q * noise


def query_unitary(source: Union[Generator, ComplexMatrix], delta_t: float) -> ComplexMatrix:
    """U(dt) for a generator; a bare matrix is taken to be the query itself."""
    if isinstance(source, StaticGenerator):
        return evolve_static(source.H, delta_t)
    if isinstance(source, DrivenGenerator):
        return evolve_driven(source.spec, delta_t, source.substeps_per_unit_time)
    return as_matrix(source)


@dataclass
class IQPEResult:
    bits: Tuple[int, ...]
    phase: float
    energy: float
    query_depth: int
    ambiguous_rounds: List[int] = field(default_factory=list)
    damped: bool = False
    contrasts: List[float] = field(default_factory=list)

    @property
    def reliable(self) -> bool:
        return not self.damped and not self.ambiguous_rounds

    def to_json(self) -> dict:
        return {
            "bits": "".join(str(b) for b in self.bits),
            "phase": self.phase,
            "energy": self.energy,
            "query_depth": self.query_depth,
            "ambiguous_rounds": self.ambiguous_rounds,
            "damped": self.damped,
            "reliable": self.reliable,
        }


def _controlled_power(W: ComplexMatrix, power: int, cfg: IQPEConfig, rng: np.random.Generator) -> ComplexMatrix:
    if cfg.query_error == 0:
        return np.linalg.matrix_power(W, power)
    if cfg.noise_placement == "per-round":
        # one perturbed query per round; repeated squaring compounds it
        return np.linalg.matrix_power(inject_query_error(W, cfg.query_error, rng), power)
    V = np.eye(W.shape[0], dtype=np.complex128)
    for _ in range(power):
        V = inject_query_error(W, cfg.query_error, rng) @ V
    return V


def iqpe_estimate(query: Union[Generator, ComplexMatrix], psi, cfg: IQPEConfig) -> IQPEResult:
    """
    Bit-by-bit phase kickback with feedback rotations.

    A non-unitary query is block-encoded round by round: the controlled power
    is scaled by 1/max(1, ||V||_2). When that scaling buries the ancilla
    signal below the shot-noise level the run is flagged as damped.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if not np.isclose(np.linalg.norm(psi), 1.0, atol=1e-9):
        raise ValueError("psi must be normalized")

    U = query_unitary(query, cfg.delta_t)
    if U.shape != (psi.shape[0], psi.shape[0]):
        raise ValueError(f"query has shape {U.shape}, state has dimension {psi.shape[0]}")
    W = U * np.exp(-1j * cfg.spectrum_shift)

    n = cfg.n_bits
    ideal = cfg.shots_per_round == "ideal"
    level = DAMPING_IDEAL if ideal else 3 / math.sqrt(cfg.shots_per_round)

    bits = [0] * (n + 1)
    ambiguous: List[int] = []
    contrasts: List[float] = []
    damped = False

    for k in range(n, 0, -1):
        V = _controlled_power(W, 2 ** (k - 1), cfg, stream(cfg.seed, k, _PART_QUERY))
        scale = max(1.0, float(np.linalg.norm(V, 2)))
        contrast = complex(np.vdot(psi, V @ psi)) / scale
        contrasts.append(abs(contrast))
        if 1.0 / scale < level or abs(contrast) < level:
            damped = True

        omega = -2 * math.pi * sum(bits[j] * 2.0 ** (-(j - k + 1)) for j in range(k + 1, n + 1))
        p0 = min(1.0, max(0.0, (1 + (np.exp(1j * omega) * contrast).real) / 2))

        if ideal:
            bits[k] = 0 if p0 > 0.5 else 1
        else:
            shots = int(cfg.shots_per_round)
            zeros = int(stream(cfg.seed, k, _PART_SHOTS).binomial(shots, p0))
            bits[k] = 0 if 2 * zeros > shots else 1
            if abs(zeros - shots / 2) <= math.sqrt(shots) / 2:
                ambiguous.append(k)

    read = tuple(bits[1:])
    phi = sum(b * 2.0 ** (-(j + 1)) for j, b in enumerate(read))
    theta = (2 * math.pi * (1 - phi)) % (2 * math.pi)
    energy = (theta - cfg.spectrum_shift) / cfg.delta_t

    result = IQPEResult(
        bits=read,
        phase=phi,
        energy=energy,
        query_depth=2**n - 1,
        ambiguous_rounds=sorted(ambiguous),
        damped=damped,
        contrasts=contrasts,
    )
    if not result.reliable:
        logger.warning(
            "[IQPE] unreliable estimate: damped=%s ambiguous_rounds=%s", damped, result.ambiguous_rounds
        )
    logger.info("[IQPE] n_bits=%d bits=%s energy=%.6g eps_q=%.3g", n, "".join(map(str, read)), energy, cfg.query_error)
    return result
