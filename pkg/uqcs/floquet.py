# uqcs/floquet.py
"""
Floquet oracles for the driven NQR system.

The extended-space matrix uses the block layout

    (p, p) = H^(0) + p*Omega        (p, q) = H^(q-p)

for H(t) = sum_m e^{-i m Omega t} H^(m). An eigenvector with dominant block
p* oscillates mostly at E - p* Omega, which is how quasi-energies are tied back
to the static levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import logger
from .hamiltonians import (
    FourierHamiltonian,
    fourier_components,
    nqr_hamiltonian_batch,
    nqr_static_levels,
)
from .linalg import ComplexMatrix, eig_general, iter_unique
from .schemas import NQRDriveSpec

TRUNCATION_DRIFT = 1e-6
BERRY_AGREEMENT = 1e-2
MIN_PATH_STEPS = 100

DOUBLET_INDEX = {"lower": (0, 1), "upper": (2, 3)}


class HolonomyError(RuntimeError):
    pass


# ============================================================
# Extended space
# ============================================================

@dataclass(frozen=True, eq=False)
class ExtendedSpaceProblem:
    base: FourierHamiltonian
    p_max: int
    matrix: ComplexMatrix = field(repr=False)

    @property
    def n_blocks(self) -> int:
        return 2 * self.p_max + 1

    def block(self, p: int, q: int) -> ComplexMatrix:
        d = self.base.dim
        i, j = p + self.p_max, q + self.p_max
        return self.matrix[i * d:(i + 1) * d, j * d:(j + 1) * d]


@dataclass(frozen=True)
class QuasiEnergy:
    energy: float
    band: int
    level: float
    weight_hint: float

    def to_row(self) -> tuple:
        return (self.energy, self.band, self.level, self.weight_hint)


def build_extended(fh: FourierHamiltonian, p_max: int) -> ExtendedSpaceProblem:
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    d = fh.dim
    n = 2 * p_max + 1
    M = np.zeros((n * d, n * d), dtype=np.complex128)
    eye = np.eye(d, dtype=np.complex128)

    for i, p in enumerate(range(-p_max, p_max + 1)):
        for j, q in enumerate(range(-p_max, p_max + 1)):
            if p == q:
                blk = fh.component(0) + p * fh.base_frequency * eye
            elif (q - p) in fh.components:
                blk = fh.components[q - p]
            else:
                continue
            M[i * d:(i + 1) * d, j * d:(j + 1) * d] = blk

    return ExtendedSpaceProblem(base=fh, p_max=p_max, matrix=M)


def _reference_levels(fh: FourierHamiltonian) -> List[float]:
    return iter_unique(np.linalg.eigvals(fh.at(0.0)).real, tol=1e-9)


def quasi_energies(prob: ExtendedSpaceProblem, reference: Optional[Sequence[float]] = None) -> List[QuasiEnergy]:
    """
    Eigenvalues of the extended matrix, each tagged with its static level and
    Floquet-Bloch band. A quasi-energy E with dominant block p* belongs to the
    static level E_s nearest to E - p* Omega, and to band
    floor((E - E_s)/Omega + 1/2).
    """
    fh = prob.base
    d, n = fh.dim, prob.n_blocks
    Omega = fh.base_frequency
    levels = sorted(reference) if reference is not None else _reference_levels(fh)

    dec = eig_general(prob.matrix)
    if dec.right_vectors is None:
        raise ValueError("extended-space matrix is defective")
    values = dec.values.real
    weights = np.sum(np.abs(dec.right_vectors.reshape(n, d, -1)) ** 2, axis=1)

    out = []
    for k, E in enumerate(values):
        p_star = int(np.argmax(weights[:, k])) - prob.p_max
        E_s = min(levels, key=lambda s: abs(E - p_star * Omega - s))
        band = int(math.floor((E - E_s) / Omega + 0.5)) if Omega > 0 else 0
        out.append(
            QuasiEnergy(
                energy=float(E),
                band=band,
                level=float(E_s),
                weight_hint=float(weights[prob.p_max, k]),
            )
        )
    return out


def central_levels(prob: ExtendedSpaceProblem) -> np.ndarray:
    """The dim quasi-energies with the largest weight in the p = 0 block, ascending."""
    d, n = prob.base.dim, prob.n_blocks
    dec = eig_general(prob.matrix)
    weights = np.sum(np.abs(dec.right_vectors.reshape(n, d, -1)[prob.p_max]) ** 2, axis=0)
    keep = np.argsort(weights)[::-1][:d]
    return np.sort(dec.values.real[keep])


def oracle_levels(spec: NQRDriveSpec, p_max: int = 10) -> np.ndarray:
    """Central quasi-energies, checked against a doubled truncation."""
    fh = fourier_components(spec, m_max=2)
    E = central_levels(build_extended(fh, p_max))
    E2 = central_levels(build_extended(fh, 2 * p_max))
    drift = float(np.max(np.abs(E - E2)))
    if drift > TRUNCATION_DRIFT:
        logger.warning("[FLOQUET] p_max=%d drifts by %.3g against p_max=%d", p_max, drift, 2 * p_max)
    else:
        logger.debug("[FLOQUET] p_max=%d converged (drift %.3g)", p_max, drift)
    return E2


def fold_to_zone(E, dt: float, center: float = 0.0):
    """Map energies into [center - pi/dt, center + pi/dt), the alias zone of step dt."""
    width = 2 * math.pi / dt
    return center + np.mod(np.asarray(E, dtype=float) - center + width / 2, width) - width / 2


# ============================================================
# Adiabatic holonomy
# ============================================================

@dataclass(frozen=True, eq=False)
class HolonomyResult:
    wz_matrix: ComplexMatrix
    wilson_trace: complex
    berry_phase: Optional[float] = None

    def to_json(self) -> Dict[str, object]:
        return {
            "wz_matrix": {"re": self.wz_matrix.real.tolist(), "im": self.wz_matrix.imag.tolist()},
            "wilson_trace": {"re": self.wilson_trace.real, "im": self.wilson_trace.imag},
            "berry_phase": self.berry_phase,
        }


def _wrap(phase: float) -> float:
    """Reduce to (-pi, pi]."""
    return math.pi - ((math.pi - phase) % (2 * math.pi))


def _random_unitary(rng: np.random.Generator, n: int) -> ComplexMatrix:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def wz_holonomy(
    spec: NQRDriveSpec,
    level: str = "lower",
    n_path_steps: int = 720,
    regauge_rng: Optional[np.random.Generator] = None,
) -> HolonomyResult:
    """
    Parallel transport of a degenerate doublet once around the field cone.

    Each step keeps the frame in the new eigenspace closest to the previous
    one (polar factor of the overlap matrix). regauge_rng applies a random
    U(2) rotation to every eigenframe before transport; the Wilson trace does
    not depend on it.
    """
    if level not in DOUBLET_INDEX:
        raise ValueError(f"Unknown doublet level '{level}'")
    if n_path_steps < MIN_PATH_STEPS:
        raise ValueError(f"n_path_steps must be >= {MIN_PATH_STEPS}")

    loop = spec.model_copy(update={"Omega": 1.0})
    phis = np.linspace(0.0, 2 * np.pi, n_path_steps, endpoint=False)
    Hs = nqr_hamiltonian_batch(loop, phis)
    w, V = np.linalg.eigh(Hs)

    a, b = DOUBLET_INDEX[level]
    # both doublets are bounded by the gap between eigenvalues 1 and 2
    gap = float(np.min(w[:, 2] - w[:, 1]))
    if gap < 1e-8 * max(1.0, float(np.max(np.abs(w)))):
        raise HolonomyError(f"doublet gap closes along the loop (min gap {gap:.3g})")

    frames = V[:, :, a:b + 1]
    if regauge_rng is not None:
        frames = np.stack([F @ _random_unitary(regauge_rng, 2) for F in frames])

    W0 = frames[0]
    W = W0
    for k in list(range(1, n_path_steps)) + [0]:
        Vk = frames[k]
        u, _, vh = np.linalg.svd(Vk.conj().T @ W)
        W = Vk @ (u @ vh)

    Phi = W0.conj().T @ W
    trace = complex(np.trace(Phi))

    phases = np.angle(np.linalg.eigvals(Phi))
    berry = None
    if abs(_wrap(phases[0] - phases[1])) < BERRY_AGREEMENT:
        berry = _wrap(float(np.angle(np.exp(1j * phases).mean())))

    logger.info("[HOLONOMY] theta=%.4g level=%s W=%.6g%+.3gj steps=%d", spec.theta, level, trace.real, trace.imag, n_path_steps)
    return HolonomyResult(wz_matrix=Phi, wilson_trace=trace, berry_phase=berry)


def adiabatic_wilson_trace(theta: float) -> float:
    """Closed form for the lower doublet: -2 cos(2 pi sqrt(cos^2/4 + sin^2))."""
    return -2 * math.cos(2 * math.pi * math.sqrt(math.cos(theta) ** 2 / 4 + math.sin(theta) ** 2))


# ============================================================
# Holonomy from measured shifts
# ============================================================

def berry_phase_from_shift(delta_E: float, Omega: float) -> float:
    if Omega <= 0:
        raise ValueError("Omega must be > 0")
    return _wrap(2 * math.pi * delta_E / Omega)


def wilson_loop_from_split(delta_E_split: float, Omega: float) -> float:
    if Omega <= 0:
        raise ValueError("Omega must be > 0")
    if not 0 <= delta_E_split <= Omega:
        raise ValueError("split must lie in [0, Omega]")
    return 2 * math.cos(math.pi * delta_E_split / Omega)


@dataclass(frozen=True)
class SpectralHolonomy:
    static_level: float
    band_energies: List[float]
    berry_phase: Optional[float]
    split: Optional[float]
    wilson_trace: Optional[float]

    def to_json(self) -> Dict[str, object]:
        return {
            "static_level": self.static_level,
            "band_energies": self.band_energies,
            "berry_phase": self.berry_phase,
            "split": self.split,
            "wilson_trace": self.wilson_trace,
        }


def holonomy_from_spectrum(peaks, spec: NQRDriveSpec, level: str = "lower") -> SpectralHolonomy:
    """
    Berry phase from the band-0 shift of the strongest peak and Wilson trace
    from the split of the two strongest band-0 peaks.
    """
    if spec.Omega <= 0:
        raise ValueError("holonomy needs a driven system (Omega > 0)")
    lower, upper = nqr_static_levels(spec)
    E_s = lower if level == "lower" else upper
    half = spec.Omega / 2

    band = sorted(
        (p for p in peaks if E_s - half <= p.center < E_s + half),
        key=lambda p: p.amplitude,
        reverse=True,
    )
    if not band:
        return SpectralHolonomy(E_s, [], None, None, None)

    gamma = berry_phase_from_shift(band[0].center - E_s, spec.Omega)
    split = wilson = None
    if len(band) >= 2:
        split = abs(band[0].center - band[1].center)
        wilson = wilson_loop_from_split(split, spec.Omega)

    return SpectralHolonomy(
        static_level=E_s,
        band_energies=[p.center for p in band],
        berry_phase=gamma,
        split=split,
        wilson_trace=wilson,
    )
