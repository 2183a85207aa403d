"""Dense symmetric linear algebra.

Spectral decompositions, matrix functions, Hilbert-Schmidt and Schatten
norms, SPD solves and the generalized symmetric eigenproblem.  Everything
downstream (inequality checks, finite-element spaces, Hamiltonians) is built
on the operations in this module.

Values are immutable after construction and all operations are pure, so
results may be shared freely across threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    InvalidExponent,
    NoConvergence,
    NonFiniteEntry,
    NonFiniteValue,
    NotPositiveDefinite,
)

__all__ = [
    "SymMatrix",
    "SpectralDecomposition",
    "SpdFactor",
    "spectral_decompose",
    "matrix_function",
    "hs_norm",
    "schatten_norm",
    "solve_spd",
    "generalized_eig",
]


class SymMatrix:
    """Real symmetric matrix.

    The input is symmetrized as ``(A + A.T) / 2`` at construction, so the
    stored entries satisfy ``a[i, j] == a[j, i]`` exactly.  The array is
    frozen (read-only) afterwards.
    """

    __slots__ = ("a",)

    def __init__(self, entries) -> None:
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix dimension must be at least 1")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self.a = a

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_dim(other)
        return SymMatrix(self.a + other.a)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_dim(other)
        return SymMatrix(self.a - other.a)

    def __mul__(self, s: float) -> "SymMatrix":
        return SymMatrix(self.a * float(s))

    __rmul__ = __mul__

    def _check_dim(self, other: "SymMatrix") -> None:
        if self.n != other.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")

    def __repr__(self) -> str:  # pragma: no cover
        return f"SymMatrix(n={self.n})"

    @staticmethod
    def identity(n: int) -> "SymMatrix":
        return SymMatrix(np.eye(n))

    @staticmethod
    def diagonal(values) -> "SymMatrix":
        return SymMatrix(np.diag(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) with paired eigenvector columns.

    For a plain symmetric matrix the columns form an orthogonal matrix; for a
    generalized pair ``(K, M)`` they are M-orthonormal instead
    (``vectors.T @ M @ vectors == I``).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _canonical_signs(q: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each is positive.

    Makes the decomposition deterministic beyond what the backend guarantees
    and maps diagonal input to identity eigenvectors.
    """
    idx = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[idx, np.arange(q.shape[1])])
    signs[signs == 0.0] = 1.0
    return q * signs


def spectral_decompose(A: SymMatrix) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Returns ascending eigenvalues and an orthonormal eigenvector matrix with
    canonical column signs.  Deterministic for fixed input.

    Raises
    ------
    NonFiniteEntry
        If any entry is NaN or infinite.
    NoConvergence
        If the backend eigensolver fails to converge.
    """
    if not np.isfinite(A.a).all():
        raise NonFiniteEntry("matrix has non-finite entries")
    try:
        w, q = np.linalg.eigh(A.a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigendecomposition failed: {exc}") from exc
    return SpectralDecomposition(w, _canonical_signs(q))


def matrix_function(dec: SpectralDecomposition, f: Callable[[float], float]) -> SymMatrix:
    """Apply a scalar function through the spectral calculus.

    Returns ``Q diag(f(lambda)) Q^T`` (symmetrized).  ``f`` is evaluated once
    per eigenvalue and must be finite on the whole spectrum.
    """
    try:
        vals = np.array([float(f(x)) for x in dec.eigenvalues])
    except OverflowError as exc:
        raise NonFiniteValue(f"function overflowed on the spectrum: {exc}") from exc
    if not np.isfinite(vals).all():
        bad = dec.eigenvalues[~np.isfinite(vals)][0]
        raise NonFiniteValue(f"function not finite at eigenvalue {bad!r}")
    return SymMatrix((dec.eigenvectors * vals) @ dec.eigenvectors.T)


def hs_norm(A: SymMatrix) -> float:
    """Hilbert-Schmidt (Frobenius) norm: sqrt of the sum of squared entries."""
    if not np.isfinite(A.a).all():
        raise NonFiniteEntry("matrix has non-finite entries")
    return float(np.sqrt(np.sum(A.a * A.a)))


def schatten_norm(dec: SpectralDecomposition, p: float) -> float:
    """Schatten p-norm from a spectral decomposition.

    ``(sum |lambda_k|^p)^(1/p)`` for finite ``p >= 1`` and ``max |lambda_k|``
    for ``p == inf``.  Coincides with :func:`hs_norm` at ``p == 2``.
    """
    if not (p >= 1.0):
        raise InvalidExponent(f"Schatten exponent must be >= 1, got {p}")
    absw = np.abs(dec.eigenvalues)
    if math.isinf(p):
        return float(absw.max())
    return float(np.sum(absw**p) ** (1.0 / p))


class SpdFactor:
    """Cached Cholesky factorisation of an SPD matrix.

    Lets callers that solve against the same matrix repeatedly (duality maps,
    resolvent stacks) pay for the factorisation once.
    """

    __slots__ = ("lower",)

    def __init__(self, A: SymMatrix) -> None:
        if not np.isfinite(A.a).all():
            raise NonFiniteEntry("matrix has non-finite entries")
        try:
            self.lower = np.linalg.cholesky(A.a)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"matrix is not positive definite: {exc}") from exc

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        y = solve_triangular(self.lower, b, lower=True)
        return solve_triangular(self.lower.T, y, lower=False)


def solve_spd(A: SymMatrix, b) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A`` via Cholesky.

    ``b`` may be a vector or a matrix of right-hand sides.

    Raises
    ------
    NotPositiveDefinite
        If the factorisation encounters a nonpositive pivot.
    """
    return SpdFactor(A).solve(b)


def generalized_eig(K: SymMatrix, M: SymMatrix) -> SpectralDecomposition:
    """Generalized symmetric eigenproblem ``K psi = lambda M psi`` with SPD M.

    Reduced to a standard problem through the Cholesky factor ``M = L L^T``:
    the matrix ``L^-1 K L^-T`` is diagonalised and eigenvectors are recovered
    by back-substitution, which makes them M-orthonormal by construction.
    """
    if K.n != M.n:
        raise DimensionMismatch(f"dimensions {K.n} and {M.n} differ")
    if not np.isfinite(K.a).all():
        raise NonFiniteEntry("stiffness matrix has non-finite entries")
    try:
        lower = np.linalg.cholesky(M.a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"mass matrix is not positive definite: {exc}") from exc
    half = solve_triangular(lower, K.a, lower=True)
    reduced = solve_triangular(lower, half.T, lower=True)
    try:
        w, z = np.linalg.eigh(0.5 * (reduced + reduced.T))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigendecomposition failed: {exc}") from exc
    vectors = solve_triangular(lower.T, z, lower=False)
    return SpectralDecomposition(w, _canonical_signs(vectors))
