# uqcs/linalg.py
"""
Dense complex linear algebra shared by every other module.

All functions are pure: inputs are never modified and returned arrays are
fresh copies, so results can be shared read-only between worker threads.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

ComplexMatrix = npt.NDArray[np.complex128]

MAX_DIM = 4096
DEFECTIVE_RATIO = 1e-6


class MatrixError(ValueError):
    pass


class ConvergenceError(MatrixError):
    pass


class MatrixOverflowError(MatrixError):
    pass


def as_matrix(A, *, square: bool = True) -> ComplexMatrix:
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise MatrixError(f"Expected a 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise MatrixError(f"Expected a square matrix, got shape {M.shape}")
    if max(M.shape) > MAX_DIM:
        raise MatrixError(f"Matrix dimension {max(M.shape)} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(M)):
        raise MatrixError("Matrix has non-finite entries")
    return M


def is_hermitian(A: ComplexMatrix, rtol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return bool(np.allclose(A, A.conj().T, rtol=0.0, atol=rtol * scale))


# ---------------------------
# Matrix exponential
# ---------------------------

def matexp(A, scale: complex = 1.0) -> ComplexMatrix:
    """
    exp(scale * A) by scaling-and-squaring with a Pade approximant.

    Works the same way for Hermitian and non-Hermitian generators. Raises
    MatrixOverflowError when the result is not representable.
    """
    M = as_matrix(A) * complex(scale)
    with np.errstate(over="ignore", invalid="ignore"):
        out = la.expm(M)
    if not np.all(np.isfinite(out)):
        raise MatrixOverflowError(
            f"exp overflowed for ||scale*A||_1 = {np.linalg.norm(M, 1):.3g}"
        )
    return out


# ---------------------------
# Dual eigendecomposition
# ---------------------------

@dataclass(frozen=True, eq=False)
class DualEigenDecomposition:
    values: np.ndarray
    right_vectors: Optional[ComplexMatrix]
    left_vectors: Optional[ComplexMatrix]
    bi_normalized: bool
    defective: bool = False
    condition: float = 1.0

    def reconstruct(self) -> ComplexMatrix:
        """sum_i lambda_i |r_i><l_i|"""
        if self.right_vectors is None or self.left_vectors is None:
            raise MatrixError("Defective decomposition has no eigenvectors")
        R, L = self.right_vectors, self.left_vectors
        return (R * self.values[np.newaxis, :]) @ L.conj().T


def eig_general(A) -> DualEigenDecomposition:
    """
    Right/left eigenvectors with <l_i|r_j> = delta_ij.

    Eigenvalues come sorted by (real, imag). Right vectors are unit-norm; left
    vectors are the rows of R^-1 (conjugated), which are the bi-normalized
    eigenvectors of A^dagger. A nearly singular R (exceptional point) returns
    the eigenvalues only, with defective=True.
    """
    M = as_matrix(A)

    if is_hermitian(M):
        try:
            w, V = la.eigh((M + M.conj().T) / 2)
        except la.LinAlgError as e:
            raise ConvergenceError(f"eigh failed to converge: {e}") from e
        return DualEigenDecomposition(
            values=w.astype(np.complex128),
            right_vectors=V,
            left_vectors=V.copy(),
            bi_normalized=True,
        )

    try:
        w, R = la.eig(M)
    except la.LinAlgError as e:
        raise ConvergenceError(f"eig failed to converge: {e}") from e

    order = np.lexsort((w.imag, w.real))
    w = w[order]
    R = R[:, order]
    R = R / np.linalg.norm(R, axis=0, keepdims=True)

    s = la.svdvals(R)
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if ratio < DEFECTIVE_RATIO:
        return DualEigenDecomposition(
            values=w,
            right_vectors=None,
            left_vectors=None,
            bi_normalized=False,
            defective=True,
            condition=ratio,
        )

    L = la.inv(R).conj().T
    return DualEigenDecomposition(
        values=w,
        right_vectors=R,
        left_vectors=L,
        bi_normalized=True,
        condition=ratio,
    )


# ---------------------------
# SVD
# ---------------------------

def svd(A):
    """Thin SVD returning (U, S, V) with A = U @ diag(S) @ V^dagger."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise MatrixError(f"Expected a 2-D matrix, got shape {M.shape}")
    try:
        U, S, Vh = la.svd(M, full_matrices=False, lapack_driver="gesdd")
    except la.LinAlgError:
        try:
            U, S, Vh = la.svd(M, full_matrices=False, lapack_driver="gesvd")
        except la.LinAlgError as e:
            raise ConvergenceError(f"SVD failed to converge: {e}") from e
    return U, S, Vh.conj().T


# ---------------------------
# Pauli strings
# ---------------------------

SIGMA_I = np.array([[1, 0], [0, 1]], dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULI = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def pauli_string(labels: Union[str, Sequence[str]]) -> ComplexMatrix:
    """Kronecker product in site order; site 1 is the leftmost factor."""
    labels = list(labels)
    if not labels:
        raise ValueError("Pauli string needs at least one site")
    try:
        factors = [PAULI[str(l).upper()] for l in labels]
    except KeyError as e:
        raise ValueError(f"Unknown Pauli label {e.args[0]!r}") from None
    return reduce(np.kron, factors)


def pauli_sum(terms: Mapping[str, float]) -> ComplexMatrix:
    items = list(terms.items())
    if not items:
        raise ValueError("Empty Pauli sum")
    out = np.zeros_like(pauli_string(items[0][0]))
    for label, coef in items:
        out = out + coef * pauli_string(label)
    return out


def all_pauli_strings(n: int) -> List[str]:
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


def n_qubits(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"Dimension {dim} is not a power of two")
    return n


def iter_unique(values: Iterable[float], tol: float = 1e-9) -> List[float]:
    """Sorted values with clusters closer than tol merged (cluster mean)."""
    out: List[List[float]] = []
    for v in sorted(values):
        if out and abs(v - out[-1][-1]) <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return [float(np.mean(c)) for c in out]
