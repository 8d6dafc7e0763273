# uqcs/dynamics.py
from __future__ import annotations

import hashlib
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from .config import logger, max_workers
from .hamiltonians import nqr_hamiltonian_at, nqr_hamiltonian_batch
from .linalg import ComplexMatrix, as_matrix, is_hermitian, matexp
from .schemas import NQRDriveSpec

MIN_SUBSTEPS = 100
CHUNK = 4096
_ZERO_REMAINDER = 1e-12


# ============================================================
# Generator descriptions
# ============================================================

@dataclass(frozen=True, eq=False)
class StaticGenerator:
    H: ComplexMatrix
    kind: str
    key: str

    @classmethod
    def from_matrix(cls, H) -> "StaticGenerator":
        H = as_matrix(H)
        kind = "hermitian-static" if is_hermitian(H) else "non-hermitian-static"
        key = hashlib.sha1(np.ascontiguousarray(H).tobytes()).hexdigest()
        return cls(H=H, kind=kind, key=key)

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class DrivenGenerator:
    spec: NQRDriveSpec
    substeps_per_unit_time: int
    kind: str = "driven"
    dim: int = 4

    @classmethod
    def from_spec(cls, spec: NQRDriveSpec, substeps_per_unit_time: int = None) -> "DrivenGenerator":
        spu = substeps_per_unit_time or default_substeps(spec)
        if spu < MIN_SUBSTEPS:
            raise ValueError(f"substeps_per_unit_time must be >= {MIN_SUBSTEPS}")
        return cls(spec=spec, substeps_per_unit_time=int(spu))


Generator = Union[StaticGenerator, DrivenGenerator]


def default_substeps(spec: NQRDriveSpec) -> int:
    """1/dt for dt = min(0.01, 0.01/||H||)."""
    norm = float(np.linalg.norm(nqr_hamiltonian_at(spec, 0.0), 2))
    return max(MIN_SUBSTEPS, math.ceil(100 * norm - 1e-9))


# ============================================================
# Pointwise evolution
# ============================================================

def evolve_static(H, t: float) -> ComplexMatrix:
    return matexp(H, -1j * t)


@lru_cache(maxsize=128)
def _substep_chunk(spec: NQRDriveSpec, spu: int, direction: int, chunk: int) -> np.ndarray:
    """Midpoint exponentials exp(-i d h H(d (k+1/2) h)) for one aligned chunk of k."""
    h = 1.0 / spu
    k = np.arange(chunk * CHUNK, (chunk + 1) * CHUNK, dtype=float)
    Hs = nqr_hamiltonian_batch(spec, direction * (k + 0.5) * h)
    out = la.expm((-1j * direction * h) * Hs)
    out.setflags(write=False)
    return out


def _walk(spec: NQRDriveSpec, spu: int, direction: int, durations: Sequence[float]) -> List[ComplexMatrix]:
    """
    Time-ordered products from 0 to direction*tau for ascending tau >= 0.

    Full substeps sit on the absolute lattice k/spu; each target finishes with
    one partial midpoint step. Every caller goes through here, so pointwise
    and grid evaluation agree bit for bit.
    """
    h = 1.0 / spu
    P = np.eye(4, dtype=np.complex128)
    done = 0
    out = []

    for tau in durations:
        n_full = int(math.floor(tau * spu + 1e-9))
        while done < n_full:
            chunk = done // CHUNK
            steps = _substep_chunk(spec, spu, direction, chunk)
            stop = min(n_full, (chunk + 1) * CHUNK)
            for i in range(done - chunk * CHUNK, stop - chunk * CHUNK):
                P = steps[i] @ P
            done = stop

        rem = tau - n_full * h
        if rem > _ZERO_REMAINDER:
            Hm = nqr_hamiltonian_at(spec, direction * (n_full * h + rem / 2))
            out.append(matexp(Hm, -1j * direction * rem) @ P)
        else:
            out.append(P.copy())

    return out


def evolve_driven(spec: NQRDriveSpec, t: float, substeps_per_unit_time: int) -> ComplexMatrix:
    """Midpoint exponential product for T exp(-i int_0^t H(t') dt')."""
    if substeps_per_unit_time < MIN_SUBSTEPS:
        raise ValueError(f"substeps_per_unit_time must be >= {MIN_SUBSTEPS}")
    direction = 1 if t >= 0 else -1
    return _walk(spec, int(substeps_per_unit_time), direction, [abs(t)])[0]


# ============================================================
# Grids
# ============================================================

@dataclass(frozen=True, eq=False)
class PropagatorGrid:
    times: np.ndarray
    operators: np.ndarray
    generator_kind: str

    def at(self, t: float) -> ComplexMatrix:
        idx = np.flatnonzero(self.times == t)
        if not len(idx):
            raise KeyError(f"time {t} not on grid")
        return self.operators[idx[0]]


_static_cache: Dict[Tuple[str, float], ComplexMatrix] = {}
_static_lock = threading.Lock()
_STATIC_CACHE_MAX = 8192


def _static_propagator(gen: StaticGenerator, t: float) -> ComplexMatrix:
    key = (gen.key, float(t))
    with _static_lock:
        hit = _static_cache.get(key)
    if hit is not None:
        return hit

    U = evolve_static(gen.H, t)
    U.setflags(write=False)
    with _static_lock:
        if len(_static_cache) >= _STATIC_CACHE_MAX:
            _static_cache.clear()
        _static_cache[key] = U
    return U


def propagator_grid(source: Generator, times: Sequence[float]) -> PropagatorGrid:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be 1-D")
    if len(times) > 1 and np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")

    if isinstance(source, StaticGenerator):
        with ThreadPoolExecutor(max_workers=max_workers()) as pool:
            ops = list(pool.map(lambda t: _static_propagator(source, t), times))
    else:
        spec, spu = source.spec, source.substeps_per_unit_time
        neg = times[times < 0]
        pos = times[times >= 0]
        back = _walk(spec, spu, -1, list(-neg[::-1]))[::-1]
        fwd = _walk(spec, spu, 1, list(pos))
        ops = back + fwd
        logger.debug(
            "[EVOLVE] driven grid points=%d span=[%.4g, %.4g] spu=%d",
            len(times), times[0] if len(times) else 0.0, times[-1] if len(times) else 0.0, spu,
        )

    operators = np.stack(ops) if ops else np.zeros((0, source.dim, source.dim), dtype=np.complex128)
    return PropagatorGrid(times=times, operators=operators, generator_kind=source.kind)


# ============================================================
# Node chains (single-step propagators on the m*dt lattice)
# ============================================================

@dataclass(frozen=True, eq=False)
class NodeChain:
    """
    Single-step propagators between neighbouring nodes m*dt, m = -N..N.

    step(m, +1) maps node m to m+1 and step(m, -1) maps node m to m-1.
    """
    dt: float
    half_span: int
    kind: str
    forward: np.ndarray
    backward: np.ndarray
    node_operators: np.ndarray = None

    @property
    def n_nodes(self) -> int:
        return 2 * self.half_span + 1

    def step(self, m: int, direction: int) -> ComplexMatrix:
        if self.forward.ndim == 2:
            return self.forward if direction > 0 else self.backward
        N = self.half_span
        if direction > 0:
            return self.forward[m + N]
        return self.backward[m + N - 1]

    def states(self, psi) -> np.ndarray:
        """Ideal node states U(m dt)|psi>, row index m + N."""
        psi = np.asarray(psi, dtype=np.complex128)
        N = self.half_span
        if self.node_operators is not None:
            return self.node_operators @ psi

        out = np.empty((self.n_nodes, psi.shape[0]), dtype=np.complex128)
        out[N] = psi
        for m in range(N):
            out[N + m + 1] = self.forward @ out[N + m]
            out[N - m - 1] = self.backward @ out[N - m]
        return out


def node_chain(source: Generator, dt: float, half_span: int) -> NodeChain:
    if dt <= 0 or half_span < 1:
        raise ValueError("node chain needs dt > 0 and half_span >= 1")

    if isinstance(source, StaticGenerator):
        F = matexp(source.H, -1j * dt)
        B = matexp(source.H, 1j * dt)
        return NodeChain(dt=dt, half_span=half_span, kind=source.kind, forward=F, backward=B)

    nodes = np.arange(-half_span, half_span + 1) * dt
    grid = propagator_grid(source, nodes)
    U = grid.operators
    # U_{m+1} U_m^dagger for m = -N..N-1
    fwd = U[1:] @ np.conj(np.swapaxes(U[:-1], -1, -2))
    bwd = np.conj(np.swapaxes(fwd, -1, -2))
    return NodeChain(
        dt=dt, half_span=half_span, kind=source.kind, forward=fwd, backward=bwd, node_operators=U
    )
