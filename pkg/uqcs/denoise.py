# uqcs/denoise.py
"""Singular-spectrum renormalisation of complex auto-correlation series."""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .config import logger
from .linalg import svd
from .schemas import SSAConfig
from .spectroscopy import AutocorrSeries

MIN_LENGTH = 8
AUTO_RANK_FACTOR = 3.0


def trajectory_matrix(x, L: int) -> np.ndarray:
    """L x (N-L+1) Hankel embedding, X[i, j] = x[i + j]."""
    x = np.asarray(x, dtype=np.complex128)
    return linalg.hankel(x[:L], x[L - 1:])


def diagonal_average(X: np.ndarray) -> np.ndarray:
    """Mean over each anti-diagonal i + j = const."""
    L, K = X.shape
    idx = (np.arange(L)[:, None] + np.arange(K)[None, :]).ravel()
    counts = np.bincount(idx, minlength=L + K - 1)
    re = np.bincount(idx, weights=X.real.ravel(), minlength=L + K - 1)
    im = np.bincount(idx, weights=X.imag.ravel(), minlength=L + K - 1)
    return (re + 1j * im) / counts


def ssa_basis(x, L: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return svd(trajectory_matrix(x, L))


def project_trajectory(X: np.ndarray, U_r: np.ndarray) -> np.ndarray:
    """Orthogonal projection of the columns of X onto span(U_r)."""
    return U_r @ (U_r.conj().T @ X)


def auto_rank(S: np.ndarray) -> int:
    return max(1, int(np.sum(S > AUTO_RANK_FACTOR * np.median(S))))


def _resolve(cfg: SSAConfig, n: int) -> Tuple[int, Optional[int]]:
    if n < MIN_LENGTH:
        raise ValueError(f"series length {n} < {MIN_LENGTH}")
    L = cfg.embed_length or n // 2
    if not 2 <= L <= n - 1:
        raise ValueError(f"embed_length {L} outside [2, {n - 1}]")
    r_max = min(L, n - L + 1)
    if cfg.rank != "auto" and cfg.rank > r_max:
        raise ValueError(f"rank {cfg.rank} exceeds min(L, N-L+1) = {r_max}")
    return L, (None if cfg.rank == "auto" else int(cfg.rank))


def ssa_denoise(
    series: AutocorrSeries, cfg: SSAConfig, scale: Optional[float] = None, hermitian: bool = True
) -> AutocorrSeries:
    """
    Rank-r Hankel/SVD truncation followed by diagonal averaging.

    With cfg.renormalize on a Hermitian run, the result is rescaled by a real
    factor: 1/|C(0)| for the identity series, or the given scale (taken from
    the identity run) for other observables. Non-Hermitian runs have no unit
    C(0) to anchor to and are left unscaled. The factor is recorded on the
    returned series.
    """
    x = np.asarray(series.values, dtype=np.complex128)
    L, r = _resolve(cfg, len(x))

    U, S, V = ssa_basis(x, L)
    if r is None:
        r = auto_rank(S)
    Xr = (U[:, :r] * S[:r]) @ V[:, :r].conj().T
    y = diagonal_average(Xr)

    factor = 1.0
    if cfg.renormalize and not hermitian:
        logger.debug("[SSA] observable=%s renormalization skipped: non-Hermitian run", series.observable)
    elif cfg.renormalize:
        if scale is not None:
            factor = float(scale)
        elif set(series.observable) != {"I"}:
            raise ValueError(f"renormalizing '{series.observable}' needs the identity scale")
        else:
            c0 = abs(y[int(np.argmin(np.abs(series.t)))])
            factor = 1.0 / c0 if c0 > 0 else 1.0
        y = y * factor

    logger.debug("[SSA] observable=%s L=%d rank=%d factor=%.6g", series.observable, L, r, factor)
    return series.with_values(y, scale=factor)
