# uqcs/spectroscopy.py
"""
Windowed auto-correlation spectroscopy.

Both the eta average and the t transform use the Gaussian window
G(x, tau) = exp(-x^2/(2 tau^2)) / (sqrt(2 pi) tau) on [-4 tau, 4 tau]. The
discrete weights G*dx are normalized to sum to 1, so an isolated line of weight
zeta^2 at E_n shows up as zeta^2 exp(-tau^2 (w - E_n)^2 / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .config import logger
from .linalg import ComplexMatrix, all_pauli_strings, pauli_string
from .measurement import CorrelatorGrid

WINDOW_HALF_WIDTH = 4.0
OMEGA_POINTS_PER_WIDTH = 20
OMEGA_SPAN = 1.2
MERGE_TOLERANCE = 0.2
NOISE_COVERAGE = 3.0
EIGEN_CUTOFF = 1e-12


class InfeasibleGridError(ValueError):
    pass


class DarkStateError(ValueError):
    pass


# ============================================================
# Window / grid
# ============================================================

def gaussian_window(x, tau: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2) / (2 * tau**2)) / (math.sqrt(2 * math.pi) * tau)


@dataclass(frozen=True, eq=False)
class WindowParams:
    tau: float
    n_points: int
    dt: float
    t_grid: np.ndarray = field(repr=False)
    eta_grid: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    omega_grid: np.ndarray = field(repr=False)
    r_bound: float
    nyquist_ok: bool
    omega_center: float = 0.0

    @property
    def half(self) -> int:
        return self.n_points // 2

    @property
    def query_depth(self) -> int:
        # deepest controlled evolution: |eta + t| up to N steps
        return self.n_points


def _snap_down(x: float) -> float:
    """Round down to one significant digit."""
    d = 10 ** math.floor(math.log10(x))
    return math.floor(x / d + 1e-9) * d


def make_window(
    tau: float,
    n_points: int,
    r_bound: float,
    omega_step: Optional[float] = None,
    omega_center: Optional[float] = None,
    half_width: float = WINDOW_HALF_WIDTH,
) -> WindowParams:
    """Window on [-half_width*tau, half_width*tau] with n_points + 1 nodes."""
    if n_points % 2:
        raise ValueError("n_points must be even")
    if half_width <= 0:
        raise ValueError("half_width must be > 0")
    dt = 2 * half_width * tau / n_points
    k = np.arange(n_points + 1) - n_points // 2
    t_grid = k * dt

    g = gaussian_window(t_grid, tau) * dt
    weights = g / g.sum()

    nyquist_ok = bool(dt <= math.pi / r_bound + 1e-12) if r_bound > 0 else True
    step = omega_step or 1.0 / (OMEGA_POINTS_PER_WIDTH * tau)
    center = 0.0 if omega_center is None else float(omega_center)
    if nyquist_ok and omega_center is None:
        lo, hi = -OMEGA_SPAN * r_bound, OMEGA_SPAN * r_bound
    else:
        span = OMEGA_SPAN * r_bound if nyquist_ok else math.pi / dt
        lo, hi = center - span, center + span
    n_omega = int(math.floor((hi - lo) / step + 1e-9)) + 1
    omega_grid = lo + step * np.arange(n_omega)

    if not nyquist_ok:
        logger.warning(
            "[GRID] dt=%.4g exceeds pi/R=%.4g; spectrum is folded into [%.4g, %.4g)",
            dt, math.pi / r_bound, center - math.pi / dt, center + math.pi / dt,
        )

    return WindowParams(
        tau=float(tau),
        n_points=int(n_points),
        dt=float(dt),
        t_grid=t_grid,
        eta_grid=t_grid.copy(),
        weights=weights,
        omega_grid=omega_grid,
        r_bound=float(r_bound),
        nyquist_ok=nyquist_ok,
        omega_center=center,
    )


def choose_grid(
    R_bound: float,
    tau: Optional[float] = None,
    eps1: Optional[float] = None,
    *,
    delta_e_min: Optional[float] = None,
    n_points: Optional[int] = None,
    omega_step: Optional[float] = None,
    omega_center: Optional[float] = None,
    n_cap: int = 4096,
) -> WindowParams:
    """
    Window for a spectral radius bound R.

    dt is pi/R rounded down to one significant digit and N = 8 tau/dt rounded
    up to even (R=7.5, tau=6 gives dt=0.4, N=120). With eps1, tau defaults to
    sqrt(2 ln(1/eps1))/dE_min. An explicit n_points overrides the rule.
    """
    if R_bound <= 0:
        raise ValueError("R_bound must be > 0")
    if tau is None:
        if eps1 is None or delta_e_min is None:
            raise ValueError("tau, or eps1 with delta_e_min, is required")
        tau = math.sqrt(2 * math.log(1 / eps1)) / delta_e_min
    if tau <= 0:
        raise ValueError("tau must be > 0")

    if delta_e_min is not None:
        resolution = tau * delta_e_min
        if resolution < 3:
            raise InfeasibleGridError(f"tau*dE_min = {resolution:.3g} < 3; lines cannot be resolved")
        if resolution < 5:
            logger.warning("[GRID] tau*dE_min = %.3g is below 5; neighbouring lines overlap", resolution)

    if n_points is None:
        dt_max = _snap_down(math.pi / R_bound)
        n = math.ceil(2 * WINDOW_HALF_WIDTH * tau / dt_max - 1e-9)
        n_points = n + (n % 2)

    if n_points > n_cap:
        raise InfeasibleGridError(
            f"R*tau = {R_bound * tau:.3g} needs n_points={n_points} above the cap {n_cap}"
        )

    w = make_window(tau, n_points, R_bound, omega_step=omega_step, omega_center=omega_center)
    logger.info("[GRID] tau=%.4g n_points=%d dt=%.4g nyquist_ok=%s", w.tau, w.n_points, w.dt, w.nyquist_ok)
    return w


# ============================================================
# Series / spectra
# ============================================================

@dataclass(frozen=True, eq=False)
class AutocorrSeries:
    t: np.ndarray
    values: np.ndarray
    observable: str
    scale: float = 1.0

    def at_zero(self) -> complex:
        idx = int(np.argmin(np.abs(self.t)))
        return complex(self.values[idx])

    def with_values(self, values, scale: Optional[float] = None) -> "AutocorrSeries":
        return AutocorrSeries(self.t, np.asarray(values, dtype=np.complex128), self.observable,
                              self.scale if scale is None else scale)


@dataclass(frozen=True, eq=False)
class Spectrum:
    omega: np.ndarray
    values: np.ndarray
    label: str = "I"
    tau: Optional[float] = None
    noise_floor: float = 0.0

    def at(self, w: float) -> complex:
        """Linear interpolation; energies off the omega grid raise ValueError."""
        lo, hi = float(self.omega[0]), float(self.omega[-1])
        if not lo <= w <= hi:
            raise ValueError(f"omega={w:.6g} lies outside the spectrum grid [{lo:.6g}, {hi:.6g}]")
        re = np.interp(w, self.omega, self.values.real)
        im = np.interp(w, self.omega, self.values.imag)
        return complex(re, im)


def _finite_or_none(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class Peak:
    center: float
    amplitude: float
    fit_width: float
    uncertainty: float

    def to_json(self) -> Dict[str, Optional[float]]:
        return {
            "energy": self.center,
            "amplitude": self.amplitude,
            "width": _finite_or_none(self.fit_width),
            "uncertainty": _finite_or_none(self.uncertainty),
        }


@dataclass
class EigenstateEstimate:
    energy: float
    projection_weight: float
    observables: Dict[str, complex] = field(default_factory=dict)
    density_matrix: Optional[ComplexMatrix] = None
    fidelity_vs_reference: Optional[float] = None

    def to_json(self) -> dict:
        out = {
            "energy": self.energy,
            "projection_weight": self.projection_weight,
            "observables": {k: {"re": v.real, "im": v.imag} for k, v in self.observables.items()},
        }
        if self.density_matrix is not None:
            out["density_matrix"] = {
                "re": self.density_matrix.real.tolist(),
                "im": self.density_matrix.imag.tolist(),
            }
        if self.fidelity_vs_reference is not None:
            out["fidelity"] = self.fidelity_vs_reference
        return out


def autocorrelation(grid: CorrelatorGrid, w: WindowParams) -> AutocorrSeries:
    """C(t_k) = sum_j w_j sample(eta_j, t_k): the windowed diagonal sum."""
    values = np.asarray(grid.values)
    expected = (w.n_points + 1, w.n_points + 1)
    if values.shape != expected:
        raise ValueError(f"incomplete grid: shape {values.shape}, expected {expected}")
    if not np.all(np.isfinite(values)):
        raise ValueError("incomplete grid: non-finite samples")
    return AutocorrSeries(t=w.t_grid.copy(), values=w.weights @ values, observable=grid.observable)


def windowed_fourier(series: AutocorrSeries, w: WindowParams, noise_floor: float = 0.0) -> Spectrum:
    """C~(w) = sum_k w_k e^{i w t_k} C(t_k) on the window's omega grid."""
    if series.values.shape != w.t_grid.shape or not np.allclose(series.t, w.t_grid):
        raise ValueError("series is not on the window's t grid")
    phases = np.exp(1j * np.outer(w.omega_grid, w.t_grid))
    values = phases @ (w.weights * series.values)
    return Spectrum(
        omega=w.omega_grid.copy(), values=values, label=series.observable, tau=w.tau, noise_floor=noise_floor
    )


def noise_floor(w: WindowParams, shots) -> float:
    """Shot-noise std of one spectrum value (both windows, both parts)."""
    if shots == "ideal":
        return 0.0
    s2 = float(np.sum(w.weights**2))
    return s2 * math.sqrt(2.0 / shots)


# ============================================================
# Peaks
# ============================================================

def _log_quadratic(y0: float, y1: float, y2: float):
    """Vertex offset (in steps), log-height and curvature of a parabola through 3 log points."""
    curv = y0 - 2 * y1 + y2
    if curv >= 0:
        return 0.0, y1, curv
    delta = 0.5 * (y0 - y2) / curv
    return delta, y1 - 0.25 * (y0 - y2) * delta, curv


def _vertex_uncertainty(x: np.ndarray, y: np.ndarray) -> float:
    """Std of the vertex of a least-squares parabola, from its residual covariance."""
    if len(x) < 6:
        return 0.0
    try:
        coef, cov = np.polyfit(x, y, 2, cov=True)
    except (ValueError, np.linalg.LinAlgError):
        return 0.0
    a, b = coef[0], coef[1]
    if a >= 0:
        return 0.0
    grad = np.array([b / (2 * a**2), -1 / (2 * a), 0.0])
    var = float(grad @ cov @ grad)
    return math.sqrt(var) if var > 0 and np.isfinite(var) else 0.0


def find_peaks(spec: Spectrum, rel_threshold: float = 0.02, tau: Optional[float] = None) -> List[Peak]:
    """
    Local maxima of Re C~ above rel_threshold * max, refined by a 3-point
    log-quadratic fit. The uncertainty is the fit-residual vertex std, raised to
    NOISE_COVERAGE standard deviations of the centre shift the spectrum noise
    floor can cause. Lines closer than about 1/tau merge into one peak whose
    uncertainty is enlarged by the width mismatch.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    tau = tau or spec.tau
    r = spec.values.real
    if len(r) < 3 or r.max() <= 0:
        return []

    step = float(spec.omega[1] - spec.omega[0])
    floor = rel_threshold * r.max()
    peaks: List[Peak] = []

    for i in range(1, len(r) - 1):
        if not (r[i] > r[i - 1] and r[i] >= r[i + 1] and r[i] >= floor):
            continue

        if r[i - 1] > 0 and r[i + 1] > 0:
            delta, logh, curv = _log_quadratic(math.log(r[i - 1]), math.log(r[i]), math.log(r[i + 1]))
            height = math.exp(logh)
            width = step / math.sqrt(-curv) if curv < 0 else float("inf")
        else:
            curv = r[i - 1] - 2 * r[i] + r[i + 1]
            delta = 0.5 * (r[i - 1] - r[i + 1]) / curv if curv < 0 else 0.0
            height = r[i] - 0.25 * (r[i - 1] - r[i + 1]) * delta
            width = step * math.sqrt(max(r[i], 1e-300) / -curv) if curv < 0 else float("inf")

        center = float(spec.omega[i] + delta * step)

        lo, hi = max(0, i - 3), min(len(r), i + 4)
        xs, ys = spec.omega[lo:hi], r[lo:hi]
        uncertainty = _vertex_uncertainty(xs, np.log(ys)) if np.all(ys > 0) else step
        if tau and spec.noise_floor > 0 and height > 0:
            # Re-part slope noise is noise_floor*tau/2 against a curvature of height*tau^2
            uncertainty = max(uncertainty, NOISE_COVERAGE * spec.noise_floor / (2 * height * tau))
        if not math.isfinite(width):
            logger.warning("[PEAKS] label=%s flat top at omega=%.6g; width undefined", spec.label, center)
            uncertainty = max(uncertainty, step)
        elif tau:
            nominal = 1.0 / tau
            if abs(width - nominal) > MERGE_TOLERANCE * nominal:
                uncertainty = max(uncertainty, abs(width - nominal))

        peaks.append(Peak(center=center, amplitude=float(height), fit_width=float(width), uncertainty=float(uncertainty)))

    logger.debug("[PEAKS] label=%s found=%d threshold=%.3g", spec.label, len(peaks), floor)
    return peaks


def estimate_observable(
    spec_O: Spectrum, spec_I: Spectrum, E_n: float, floor: Optional[float] = None, rel_threshold: float = 0.02
) -> complex:
    """<O>_n = C~_O(E_n) / C~_I(E_n)."""
    if floor is None:
        floor = max(3 * spec_I.noise_floor, rel_threshold)
    ident = spec_I.at(E_n)
    if abs(ident) < floor:
        raise DarkStateError(
            f"identity amplitude {abs(ident):.3g} at E={E_n:.6g} is below the floor {floor:.3g}"
        )
    return spec_O.at(E_n) / ident


# ============================================================
# Density matrices
# ============================================================

def project_density(rho) -> ComplexMatrix:
    """Hermitian part, eigenvalues clipped at 0, trace renormalized to 1."""
    rho = np.asarray(rho, dtype=np.complex128)
    H = (rho + rho.conj().T) / 2
    w, V = np.linalg.eigh(H)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("density matrix has no positive weight")
    w = w / w.sum()
    return (V * w) @ V.conj().T


def tomography(estimates: Mapping[str, complex]) -> ComplexMatrix:
    """rho = (1/d) sum_P <P> P over the complete Pauli set, projected to a state."""
    labels = list(estimates)
    if not labels:
        raise ValueError("no Pauli estimates")
    n = len(labels[0])
    expected = set(all_pauli_strings(n))
    missing = expected - set(labels)
    if missing:
        raise ValueError(f"incomplete Pauli set: {len(missing)} of {len(expected)} strings missing")

    d = 2**n
    rho = np.zeros((d, d), dtype=np.complex128)
    for label in expected:
        rho = rho + estimates[label] * pauli_string(label)
    return project_density(rho / d)


def _check_density(rho, name: str) -> Tuple[np.ndarray, np.ndarray]:
    rho = np.asarray(rho, dtype=np.complex128)
    if not np.allclose(rho, rho.conj().T, atol=1e-9):
        raise ValueError(f"{name} is not Hermitian")
    w, V = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min() < -1e-9:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {w.min():.3g})")
    return w, V


def fidelity(rho0, rho) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho0) rho sqrt(rho0)))^2, clamped to [0, 1]."""
    w0, V0 = _check_density(rho0, "rho0")
    _check_density(rho, "rho")
    w0 = np.where(w0 > EIGEN_CUTOFF * max(w0.max(), 1.0), w0, 0.0)
    sq = (V0 * np.sqrt(w0)) @ V0.conj().T
    M = sq @ np.asarray(rho, dtype=np.complex128) @ sq
    ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
    # round-off eigenvalues near 1e-17 would each add ~3e-9 after the square root
    ev = np.where(ev > EIGEN_CUTOFF * max(ev.max(), 1.0), ev, 0.0)
    return float(min(1.0, max(0.0, np.sum(np.sqrt(ev)) ** 2)))


def pure_density(psi) -> ComplexMatrix:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())
