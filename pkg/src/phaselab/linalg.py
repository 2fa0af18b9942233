"""Dense complex linear-algebra kernel shared by every module.

All matrices are plain ``numpy.ndarray`` with dtype complex128.  Subspaces
are always carried around as orthonormal frames (matrices with orthonormal
columns); equality of subspaces is span-based and tolerance-gated, since a
point of a Grassmannian has no canonical matrix representative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class ShapeError(ValueError):
    """Raised when an input matrix has the wrong shape."""


class RankError(ValueError):
    """Raised when an input is rank-deficient where full rank is required."""


class BranchCutError(ValueError):
    """Raised when a principal logarithm is requested for a matrix with an
    eigenvalue on (or numerically near) the closed ray (-inf, 0].

    The offending eigenvalue is stored in ``eigenvalue``.
    """

    def __init__(self, eigenvalue: complex):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"eigenvalue {eigenvalue} lies on the principal branch cut (-inf, 0]"
        )


@dataclass(frozen=True)
class Tolerances:
    """Numerical slack thresholds, threaded explicitly through every check.

    eq_tol gates equality-type residuals, psd_tol gates cone/semidefinite
    checks, rank_tol gates rank decisions (relative to the largest singular
    value).
    """

    eq_tol: float = 1e-10
    psd_tol: float = 1e-9
    rank_tol: float = 1e-8

    def __post_init__(self):
        if not (self.eq_tol > 0 and self.psd_tol > 0 and self.rank_tol > 0):
            raise ValueError("all tolerances must be strictly positive")


DEFAULT_TOL = Tolerances()


def as_cmatrix(M) -> np.ndarray:
    """Coerce to a 2-d complex128 array and validate finiteness."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ShapeError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def _require_square(M: np.ndarray) -> np.ndarray:
    M = as_cmatrix(M)
    if M.shape[0] != M.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {M.shape}")
    return M


def expm(X) -> np.ndarray:
    """Matrix exponential e^X (scaling-and-squaring Pade, via scipy)."""
    return scipy.linalg.expm(_require_square(X))


def logm_principal(M, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Principal matrix logarithm, with an explicit branch-cut guard.

    Eigenvalues are checked first: if any lies within ``rank_tol`` (scaled by
    max(1, spectral radius)) of the closed ray (-inf, 0], a BranchCutError
    carrying the offending eigenvalue is raised instead of returning a
    silently wrong branch.
    """
    M = _require_square(M)
    w = np.linalg.eigvals(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    for lam in w:
        dist = abs(lam.imag) if lam.real <= 0 else abs(lam)
        if dist <= rank_tol * scale:
            raise BranchCutError(lam)
    L = scipy.linalg.logm(M)
    return np.asarray(L, dtype=complex)


def orthonormal_frame(cols, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis (via SVD) for the column span of ``cols``.

    Raises RankError if the columns are rank-deficient within rank_tol.
    """
    A = as_cmatrix(cols)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0 or s[-1] <= rank_tol * s[0]:
        raise RankError(
            f"input of shape {A.shape} is rank-deficient "
            f"(singular values {s[0]:.3e} .. {s[-1]:.3e})"
        )
    return u


def span_frame(cols, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal frame for the span, dropping numerically null columns.

    Unlike orthonormal_frame this never raises on rank deficiency; it returns
    a frame of whatever rank the span actually has, and accepts (or returns)
    zero-column matrices for zero-dimensional subspaces.
    """
    A = np.asarray(cols, dtype=complex)
    if A.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {A.shape}")
    if A.shape[1] == 0:
        return A.copy()
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    rank = int(np.sum(s > rank_tol * s[0]))
    return u[:, :rank]


def nullspace(M, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis of the (right) nullspace of M."""
    M = as_cmatrix(M)
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    keep = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    return vh.conj().T[:, keep:]


def subspace_gap(P, Q) -> float:
    """Operator-norm distance of the orthogonal projectors of two frames.

    Both arguments must be orthonormal frames of the same ambient dimension
    and the same rank.  This is the gap metric on the Grassmannian; it is
    symmetric, satisfies the triangle inequality, takes values in [0, 1],
    and vanishes exactly on equal spans.
    """
    P = as_cmatrix(P)
    Q = as_cmatrix(Q)
    if P.shape != Q.shape:
        raise ShapeError(f"frame shapes differ: {P.shape} vs {Q.shape}")
    dP = P @ P.conj().T
    dQ = Q @ Q.conj().T
    return float(np.linalg.norm(dP - dQ, 2))


def hermitian_part(M) -> np.ndarray:
    M = _require_square(M)
    return (M + M.conj().T) / 2


def max_eig_herm(M) -> float:
    """Largest eigenvalue of the Hermitian part of M."""
    return float(np.linalg.eigvalsh(hermitian_part(M)).max())


def min_eig_herm(M) -> float:
    """Smallest eigenvalue of the Hermitian part of M."""
    return float(np.linalg.eigvalsh(hermitian_part(M)).min())
