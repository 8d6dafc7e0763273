# uqcs/pipeline.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from .config import logger
from .denoise import ssa_denoise
from .dynamics import DrivenGenerator, Generator, StaticGenerator, node_chain
from .hamiltonians import (
    build_spin_chain,
    build_two_mode_nh,
    nqr_doublet_state,
    spectral_radius_bound,
)
from .linalg import eig_general, n_qubits
from .measurement import CorrelatorGrid, sample_grid
from .schemas import (
    HamiltonianSpec,
    InitialState,
    NoiseModel,
    NQRDriveSpec,
    ObservableSpec,
    SpinChainSpec,
    SSAConfig,
    TwoModeNHSpec,
    WindowInputs,
)
from .spectroscopy import (
    AutocorrSeries,
    EigenstateEstimate,
    Peak,
    Spectrum,
    WindowParams,
    autocorrelation,
    choose_grid,
    estimate_observable,
    find_peaks,
    fidelity,
    noise_floor,
    pure_density,
    tomography,
    windowed_fourier,
)


# ============================================================
# System setup
# ============================================================

def build_generator(system: HamiltonianSpec, substeps_per_unit_time: Optional[int] = None) -> Generator:
    if isinstance(system, SpinChainSpec):
        return StaticGenerator.from_matrix(build_spin_chain(system))
    if isinstance(system, TwoModeNHSpec):
        return StaticGenerator.from_matrix(build_two_mode_nh(system))
    if isinstance(system, NQRDriveSpec):
        return DrivenGenerator.from_spec(system, substeps_per_unit_time)
    raise ValueError(f"Unknown system kind '{getattr(system, 'kind', system)}'")


def spectral_bound(system: HamiltonianSpec) -> float:
    """Upper bound R on |E| used to size the time step."""
    if isinstance(system, SpinChainSpec):
        return spectral_radius_bound(system)
    if isinstance(system, TwoModeNHSpec):
        # Gershgorin discs
        return max(abs(system.delta1) + abs(system.g1), abs(system.delta2) + abs(system.g2)) + system.kappa
    return 9 * system.B**2 / 4


def prepare_state(init: InitialState, system: HamiltonianSpec, generator: Optional[Generator] = None) -> np.ndarray:
    if init.kind == "basis":
        dim = generator.dim if generator is not None else _dimension(system)
        if 2 ** len(init.label) != dim:
            raise ValueError(f"basis label '{init.label}' does not match dimension {dim}")
        psi = np.zeros(dim, dtype=np.complex128)
        psi[int(init.label, 2)] = 1.0
        return psi

    if init.kind == "nqr-doublet":
        if not isinstance(system, NQRDriveSpec):
            raise ValueError("nqr-doublet states need an nqr-drive system")
        return nqr_doublet_state(system.theta, init.level)

    if init.kind == "trial-overlap":
        if not isinstance(generator, StaticGenerator) or generator.kind != "hermitian-static":
            raise ValueError("trial-overlap states need a static Hermitian system")
        return trial_state(generator.H, init.zeta, init.target)

    raise ValueError("maximally-mixed registers are only used by the trace circuit")


def _dimension(system: HamiltonianSpec) -> int:
    if isinstance(system, SpinChainSpec):
        return 2**system.n_sites
    return 2 if isinstance(system, TwoModeNHSpec) else 4


def trial_state(H, zeta: float, target: int = 0) -> np.ndarray:
    """zeta |E_target> plus sqrt(1 - zeta^2) times an equal mix of the other eigenvectors."""
    w, V = np.linalg.eigh(H)
    if not 0 <= target < len(w):
        raise ValueError(f"target {target} out of range for dimension {len(w)}")
    rest = np.delete(V, target, axis=1).sum(axis=1)
    rest = rest / np.linalg.norm(rest)
    return zeta * V[:, target] + np.sqrt(max(0.0, 1 - zeta**2)) * rest


def build_window(inputs: WindowInputs, r_bound: float) -> WindowParams:
    return choose_grid(
        r_bound,
        tau=inputs.tau,
        eps1=inputs.eps1,
        delta_e_min=inputs.delta_e_min,
        n_points=inputs.n_points,
        omega_step=inputs.omega_step,
        omega_center=inputs.omega_center,
        n_cap=inputs.n_cap,
    )


# ============================================================
# Exact reference
# ============================================================

@dataclass(frozen=True, eq=False)
class ExactLine:
    energy: complex
    weight: float
    state: np.ndarray


def exact_lines(generator: StaticGenerator, psi) -> List[ExactLine]:
    """
    Eigenpairs with the weight they carry in psi: |<E|psi>|^2 for Hermitian
    systems and |<l|psi>|^2 for the dual decomposition otherwise.
    """
    dec = eig_general(generator.H)
    if dec.defective:
        raise ValueError("defective Hamiltonian has no eigenbasis")
    psi = np.asarray(psi, dtype=np.complex128)
    out = []
    for i, E in enumerate(dec.values):
        overlap = np.vdot(dec.left_vectors[:, i], psi)
        out.append(ExactLine(energy=complex(E), weight=float(abs(overlap) ** 2), state=dec.right_vectors[:, i]))
    return out


# ============================================================
# UQCS run
# ============================================================

@dataclass
class UQCSResult:
    window: WindowParams
    series: Dict[str, AutocorrSeries]
    spectra: Dict[str, Spectrum]
    peaks: List[Peak]
    grids: Dict[str, CorrelatorGrid] = field(default_factory=dict)
    estimates: List[EigenstateEstimate] = field(default_factory=list)

    @property
    def identity(self) -> str:
        return next(iter(self.spectra))

    @property
    def query_depth(self) -> int:
        return self.window.query_depth


def identity_label(dim: int) -> str:
    return "I" * n_qubits(dim)


def run_uqcs(
    generator: Generator,
    psi,
    window: WindowParams,
    noise: NoiseModel,
    paulis: Sequence[str] = (),
    ssa: Optional[SSAConfig] = None,
    rel_threshold: float = 0.02,
    keep_grids: bool = False,
) -> UQCSResult:
    """
    Sample the identity grid plus one grid per Pauli string, window them into
    auto-correlation series and spectra, and locate the identity peaks.
    """
    ident = identity_label(generator.dim)
    labels = [ident] + [p for p in dict.fromkeys(paulis) if p != ident]
    chain = node_chain(generator, window.dt, window.n_points)
    floor = noise_floor(window, noise.shots)

    series: Dict[str, AutocorrSeries] = {}
    spectra: Dict[str, Spectrum] = {}
    grids: Dict[str, CorrelatorGrid] = {}
    scale = None
    hermitian = generator.kind != "non-hermitian-static"

    for label in labels:
        grid = sample_grid(generator, psi, label, window, noise, chain=chain)
        s = autocorrelation(grid, window)
        if ssa is not None:
            s = ssa_denoise(s, ssa, scale=scale, hermitian=hermitian)
            if label == ident:
                scale = s.scale
        series[label] = s
        spectra[label] = windowed_fourier(s, window, noise_floor=floor)
        if keep_grids:
            grids[label] = grid

    peaks = find_peaks(spectra[ident], rel_threshold=rel_threshold, tau=window.tau)
    logger.info(
        "[RUN] uqcs labels=%d peaks=%d n_points=%d shots=%s ssa=%s",
        len(labels), len(peaks), window.n_points, noise.shots, ssa is not None,
    )
    return UQCSResult(window=window, series=series, spectra=spectra, peaks=peaks, grids=grids)


def observable_paulis(observables: Sequence[ObservableSpec]) -> List[str]:
    return list(dict.fromkeys(p for o in observables for p in o.terms))


def estimate_eigenstates(
    result: UQCSResult,
    observables: Sequence[ObservableSpec] = (),
    with_tomography: bool = False,
    references: Optional[Mapping[float, np.ndarray]] = None,
    rel_threshold: float = 0.02,
) -> List[EigenstateEstimate]:
    """
    One estimate per identity peak: observables as ratios of spectra at the
    peak energy, and optionally a tomographic state with its fidelity against
    the nearest reference eigenstate.
    """
    spec_I = result.spectra[result.identity]
    floor = max(3 * spec_I.noise_floor, rel_threshold * float(np.max(spec_I.values.real)))
    out = []
    for peak in result.peaks:
        paulis = {
            label: estimate_observable(spec, spec_I, peak.center, floor=floor)
            for label, spec in result.spectra.items()
            if label != result.identity
        }
        paulis[result.identity] = 1.0 + 0j

        values = {o.label: complex(sum(c * paulis[p] for p, c in o.terms.items())) for o in observables}
        est = EigenstateEstimate(energy=peak.center, projection_weight=peak.amplitude, observables=values)

        if with_tomography:
            est.density_matrix = tomography(paulis)
            if references:
                nearest = min(references, key=lambda E: abs(E - peak.center))
                est.fidelity_vs_reference = fidelity(pure_density(references[nearest]), est.density_matrix)
        out.append(est)

    result.estimates = out
    return out


def setup_run(cfg, substeps_per_unit_time: Optional[int] = None):
    """(generator, psi, window) for a validated RunConfig."""
    generator = build_generator(cfg.system, substeps_per_unit_time)
    psi = prepare_state(cfg.initial_state, cfg.system, generator)
    window = build_window(cfg.window, spectral_bound(cfg.system))
    return generator, psi, window


def window_summary(window: WindowParams) -> Dict[str, object]:
    return {
        "tau": window.tau,
        "n_points": window.n_points,
        "dt": window.dt,
        "nyquist_ok": window.nyquist_ok,
        "omega_center": window.omega_center,
        "query_depth": window.query_depth,
    }
