# uqcs/hamiltonians.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, ComplexMatrix, iter_unique, matexp
from .schemas import NQRDriveSpec, SpinChainSpec, TwoModeNHSpec

MAX_CHAIN_SITES = 12
FOURIER_POINTS = 4096

_PAULI_XYZ = (SIGMA_X, SIGMA_Y, SIGMA_Z)


# ============================================================
# Heisenberg chain
# ============================================================

def chain_bonds(n_sites: int, periodic: bool) -> List[Tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if periodic:
        bonds.append((n_sites - 1, 0))
    return bonds


def _site_operator(op: np.ndarray, site: int, n_sites: int) -> sp.csr_matrix:
    left = sp.identity(2**site, dtype=np.complex128, format="csr")
    right = sp.identity(2 ** (n_sites - site - 1), dtype=np.complex128, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def build_spin_chain(spec: SpinChainSpec) -> ComplexMatrix:
    """
    H = sum_bonds sum_a J_a s_i^a s_j^a + sum_i sum_a h_a s_i^a

    Open chains carry n-1 bonds; periodic chains add the (n, 1) bond.
    """
    n = spec.n_sites
    if n > MAX_CHAIN_SITES:
        raise ValueError(f"n_sites={n} exceeds {MAX_CHAIN_SITES} (dimension 2^{n})")

    ops = [[_site_operator(p, i, n) for p in _PAULI_XYZ] for i in range(n)]
    dim = 2**n
    H = sp.csr_matrix((dim, dim), dtype=np.complex128)

    for i, j in chain_bonds(n, spec.periodic):
        for a in range(3):
            if spec.J[a]:
                H = H + spec.J[a] * (ops[i][a] @ ops[j][a])

    for i in range(n):
        for a in range(3):
            if spec.h[a]:
                H = H + spec.h[a] * ops[i][a]

    return H.toarray()


def spectral_radius_bound(spec: SpinChainSpec) -> float:
    n_bonds = len(chain_bonds(spec.n_sites, spec.periodic))
    return float(
        n_bonds * sum(abs(x) for x in spec.J) + spec.n_sites * sum(abs(x) for x in spec.h)
    )


# ============================================================
# Two coupled modes with gain/loss
# ============================================================

def build_two_mode_nh(spec: TwoModeNHSpec) -> ComplexMatrix:
    return np.array(
        [
            [spec.delta1 - 1j * spec.g1, spec.kappa],
            [spec.kappa, spec.delta2 + 1j * spec.g2],
        ],
        dtype=np.complex128,
    )


# ============================================================
# Spin-3/2 NQR drive
# ============================================================

SPIN = 1.5
# basis order: m = +3/2, +1/2, -1/2, -3/2
M_VALUES = np.array([1.5, 0.5, -0.5, -1.5])


@lru_cache(maxsize=1)
def spin_operators() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-3/2 (Sx, Sy, Sz) in the m-descending basis."""
    s_plus = np.zeros((4, 4), dtype=np.complex128)
    for i in range(3):
        m = M_VALUES[i + 1]
        s_plus[i, i + 1] = math.sqrt(SPIN * (SPIN + 1) - m * (m + 1))
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(M_VALUES).astype(np.complex128)
    for op in (sx, sy, sz):
        op.setflags(write=False)
    return sx, sy, sz


def drive_phase(Omega: float, t) -> np.ndarray:
    """Omega*t reduced to [0, 2pi), with the period endpoints snapped to 0."""
    phase = np.mod(Omega * np.asarray(t, dtype=float), 2 * np.pi)
    snap = (phase < 1e-12) | (2 * np.pi - phase < 1e-12)
    return np.where(snap, 0.0, phase)


def nqr_hamiltonian_batch(spec: NQRDriveSpec, times) -> np.ndarray:
    """Stack of H(t) = (B(t).S)^2, shape (len(times), 4, 4)."""
    sx, sy, sz = spin_operators()
    phase = drive_phase(spec.Omega, np.atleast_1d(times))
    st, ct = math.sin(spec.theta), math.cos(spec.theta)

    nx = (st * np.cos(phase))[:, None, None]
    ny = (st * np.sin(phase))[:, None, None]
    BS = spec.B * (nx * sx + ny * sy + ct * sz)
    return BS @ BS


def nqr_hamiltonian_at(spec: NQRDriveSpec, t: float) -> ComplexMatrix:
    return nqr_hamiltonian_batch(spec, [t])[0]


def nqr_static_levels(spec: NQRDriveSpec) -> Tuple[float, float]:
    return spec.B**2 / 4, 9 * spec.B**2 / 4


def nqr_doublet_state(theta: float, level: str) -> np.ndarray:
    """e^{-i theta S_y} applied to (0,1,0,0) (lower) or (0,0,0,1) (upper)."""
    index = {"lower": 1, "upper": 3}
    if level not in index:
        raise ValueError(f"Unknown doublet level '{level}'")
    _, sy, _ = spin_operators()
    basis = np.zeros(4, dtype=np.complex128)
    basis[index[level]] = 1.0
    return matexp(sy, -1j * theta) @ basis


# ============================================================
# Fourier representation
# ============================================================

@dataclass(frozen=True, eq=False)
class FourierHamiltonian:
    dim: int
    components: Dict[int, ComplexMatrix] = field(repr=False)
    base_frequency: float

    @classmethod
    def from_static(cls, H: ComplexMatrix, base_frequency: float = 0.0) -> "FourierHamiltonian":
        H = np.asarray(H, dtype=np.complex128)
        return cls(dim=H.shape[0], components={0: H}, base_frequency=base_frequency)

    def component(self, m: int) -> ComplexMatrix:
        if m in self.components:
            return self.components[m]
        return np.zeros((self.dim, self.dim), dtype=np.complex128)

    @property
    def harmonics(self) -> List[int]:
        return sorted(self.components)

    def at(self, t: float) -> ComplexMatrix:
        """sum_m e^{-i m Omega t} H^(m)"""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for m, Hm in self.components.items():
            out = out + np.exp(-1j * m * self.base_frequency * t) * Hm
        return out


def fourier_components(
    spec: NQRDriveSpec, m_max: int, n_points: int = FOURIER_POINTS
) -> FourierHamiltonian:
    """
    H^(m) = (1/T) int_0^T e^{i m Omega t} H(t) dt by the periodic trapezoid
    rule on n_points samples (one inverse FFT along the time axis).
    """
    if m_max < 2:
        raise ValueError("m_max must be >= 2")

    if spec.Omega == 0 or math.sin(spec.theta) == 0.0:
        return FourierHamiltonian.from_static(nqr_hamiltonian_at(spec, 0.0), spec.Omega)

    T = 2 * np.pi / spec.Omega
    times = np.arange(n_points) * (T / n_points)
    coeffs = np.fft.ifft(nqr_hamiltonian_batch(spec, times), axis=0)

    comps = {m: coeffs[m % n_points].copy() for m in range(-m_max, m_max + 1)}
    return FourierHamiltonian(dim=4, components=comps, base_frequency=spec.Omega)


def static_levels(H: ComplexMatrix, tol: float = 1e-9) -> List[float]:
    """Distinct eigenvalues of a Hermitian matrix."""
    return iter_unique(np.linalg.eigvalsh(H), tol=tol)
