"""Linear relations on C^{2n} (+) C^{2n}: the extended contraction semigroup,
the Potapov transform, and graph limits of e^{A + nu N_b}.

A relation is a 2n-dimensional subspace of C^{4n}, stored as an orthonormal
4n x 2n frame.  graph(T) = {v (+) Tv} embeds matrices; the relation product

    A B = {x (+) y : exists w, x (+) w in A, w (+) y in B}

extends matrix multiplication in reversed order: compose(graph S, graph T)
equals graph(T S).  (The order was fixed empirically against the Potapov
product formula, which holds verbatim with r1 = Pi(P1), r2 = Pi(P2).)

The Potapov coordinate permutation used here is

    Pi: (v-, v+) (+) (w-, w+)  |->  (v+, w-) (+) (v-, w+)

with V-+ the Ical = -+1 eigenspaces; this is the unique cross permutation
under which Pi(graph g) is the graph of the block matrix

    Pi(g) = ( -a^{-1} b,  a^{-1} ;  d - c a^{-1} b,  c a^{-1} ).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import MembershipError, StructuralMatrices, spc_residual
from .linalg import (
    DEFAULT_TOL,
    RankError,
    ShapeError,
    Tolerances,
    as_cmatrix,
    expm,
    nullspace,
    orthonormal_frame,
    span_frame,
    subspace_gap,
)


class DegenerateCompositionError(ValueError):
    """Relation product came out with dimension != 2n (inputs were outside
    the contraction semigroup).  Carries the actual dimension."""

    def __init__(self, dim: int, expected: int):
        self.dim = dim
        self.expected = expected
        super().__init__(f"relation product has dimension {dim}, expected {expected}")


class NotAGraphError(ValueError):
    """The Potapov-permuted subspace is not the graph of a matrix."""


@dataclass(frozen=True)
class LinearRelation:
    """A 2n-dimensional subspace of C^{2n} (+) C^{2n} as an orthonormal frame."""

    n: int
    frame: np.ndarray  # 4n x 2n, orthonormal columns

    @property
    def top(self) -> np.ndarray:
        """Rows of the frame in the first (domain-side) summand."""
        return self.frame[: 2 * self.n, :]

    @property
    def bottom(self) -> np.ndarray:
        """Rows of the frame in the second (image-side) summand."""
        return self.frame[2 * self.n :, :]


def relation_from_span(cols, n: int, rank_tol: float = DEFAULT_TOL.rank_tol) -> LinearRelation:
    """Orthonormalize a spanning set into a relation; rank must be exactly 2n."""
    cols = as_cmatrix(cols)
    if cols.shape[0] != 4 * n:
        raise ShapeError(f"expected 4n = {4 * n} rows, got {cols.shape[0]}")
    F = span_frame(cols, rank_tol)
    if F.shape[1] != 2 * n:
        raise RankError(f"span has dimension {F.shape[1]}, expected {2 * n}")
    return LinearRelation(n=n, frame=F)


def graph_of(T) -> LinearRelation:
    """The relation {v (+) Tv} of a 2n x 2n matrix."""
    T = as_cmatrix(T)
    if T.shape[0] != T.shape[1] or T.shape[0] % 2:
        raise ShapeError("expected a square 2n x 2n matrix")
    n = T.shape[0] // 2
    F = orthonormal_frame(np.vstack([np.eye(2 * n, dtype=complex), T]))
    return LinearRelation(n=n, frame=F)


def compose(A: LinearRelation, B: LinearRelation, rank_tol: float = DEFAULT_TOL.rank_tol) -> LinearRelation:
    """Relation product {x (+) y : exists w, x (+) w in A, w (+) y in B}.

    Computed from the nullspace of the stacked compatibility system in
    (s, t) coordinates (A.bottom s = B.top t), then projected to (x, y) and
    orthonormalized.  Raises DegenerateCompositionError when the result is
    not 2n-dimensional.
    """
    if A.n != B.n:
        raise ShapeError("ambient dimensions differ")
    n = A.n
    null = nullspace(np.hstack([A.bottom, -B.top]), rank_tol)
    s_part, t_part = null[: 2 * n, :], null[2 * n :, :]
    vecs = np.vstack([A.top @ s_part, B.bottom @ t_part])
    F = span_frame(vecs, rank_tol)
    if F.shape[1] != 2 * n:
        raise DegenerateCompositionError(F.shape[1], 2 * n)
    return LinearRelation(n=n, frame=F)


def ker_indef(P: LinearRelation, rank_tol: float = DEFAULT_TOL.rank_tol):
    """Frames for ker P = {x : x (+) 0 in P} and indef P = {y : 0 (+) y in P}.

    Either frame may have zero columns.
    """
    V, W = P.top, P.bottom
    ker = span_frame(V @ nullspace(W, rank_tol), rank_tol)
    ind = span_frame(W @ nullspace(V, rank_tol), rank_tol)
    return ker, ind


@dataclass(frozen=True)
class UnnReport:
    flag: bool
    contraction_residual: float  # most negative eigenvalue of the induced form, clipped
    indef_residual: float        # largest eigenvalue of the form on indef P (want < 0)
    ker_residual: float          # smallest eigenvalue of the form on ker P (want > 0)


def is_Unn(P: LinearRelation, S: StructuralMatrices, tol: Tolerances = DEFAULT_TOL) -> UnnReport:
    """Membership in the contraction-relation semigroup.

    (1) the induced form <v|v>_I - <w|w>_I is PSD on the frame,
    (2) the form is negative definite on indef P,
    (3) positive definite on ker P.
    """
    V, W = P.top, P.bottom
    G = V.conj().T @ S.Ical @ V - W.conj().T @ S.Ical @ W
    contraction = -float(np.linalg.eigvalsh((G + G.conj().T) / 2).min())
    ker, ind = ker_indef(P, tol.rank_tol)

    if ind.shape[1]:
        Gi = ind.conj().T @ S.Ical @ ind
        indef_top = float(np.linalg.eigvalsh((Gi + Gi.conj().T) / 2).max())
    else:
        indef_top = -np.inf
    if ker.shape[1]:
        Gk = ker.conj().T @ S.Ical @ ker
        ker_bot = float(np.linalg.eigvalsh((Gk + Gk.conj().T) / 2).min())
    else:
        ker_bot = np.inf

    flag = (
        contraction <= tol.psd_tol
        and indef_top <= -tol.psd_tol
        and ker_bot >= tol.psd_tol
    )
    return UnnReport(flag, max(contraction, 0.0), indef_top, ker_bot)


def is_symplectic_rel(P: LinearRelation, S: StructuralMatrices, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether v^T J v' = w^T J w' for all v (+) w, v' (+) w' in P."""
    V, W = P.top, P.bottom
    R = V.T @ S.J @ V - W.T @ S.J @ W
    return float(np.linalg.norm(R, 2)) <= tol.eq_tol


@dataclass(frozen=True)
class PotapovMatrix:
    """A 2n x 2n Potapov transform with its n x n block partition."""

    r: np.ndarray

    @property
    def n(self) -> int:
        return self.r.shape[0] // 2

    @property
    def alpha(self) -> np.ndarray:
        return self.r[: self.n, : self.n]

    @property
    def beta(self) -> np.ndarray:
        return self.r[: self.n, self.n :]

    @property
    def gamma(self) -> np.ndarray:
        return self.r[self.n :, : self.n]

    @property
    def delta(self) -> np.ndarray:
        return self.r[self.n :, self.n :]


def potapov_matrix(g, rank_tol: float = DEFAULT_TOL.rank_tol) -> PotapovMatrix:
    """Potapov transform of a matrix g = (a b; c d) with invertible a."""
    g = as_cmatrix(g)
    if g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise ShapeError("expected a square 2n x 2n matrix")
    n = g.shape[0] // 2
    a, b, c, d = g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:]
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= rank_tol * max(s[0], 1.0):
        raise RankError("upper-left block is singular; use potapov_relation")
    ai = np.linalg.inv(a)
    r = np.block([[-ai @ b, ai], [d - c @ ai @ b, c @ ai]])
    return PotapovMatrix(r=r)


def _pi_permutation(n: int) -> np.ndarray:
    """The coordinate permutation (v-, v+, w-, w+) -> (v+, w-, v-, w+)."""
    P = np.zeros((4 * n, 4 * n))
    I = np.eye(n)
    P[0 * n : 1 * n, 1 * n : 2 * n] = I
    P[1 * n : 2 * n, 2 * n : 3 * n] = I
    P[2 * n : 3 * n, 0 * n : 1 * n] = I
    P[3 * n : 4 * n, 3 * n : 4 * n] = I
    return P


def potapov_relation(P: LinearRelation, rank_tol: float = DEFAULT_TOL.rank_tol) -> PotapovMatrix:
    """Potapov transform of a relation: permute the frame by Pi, then solve
    for the matrix whose graph is the permuted subspace."""
    n = P.n
    F = _pi_permutation(n) @ P.frame
    top, bottom = F[: 2 * n, :], F[2 * n :, :]
    s = np.linalg.svd(top, compute_uv=False)
    if s[-1] <= rank_tol * max(s[0], 1.0):
        raise NotAGraphError(
            "permuted subspace is not a graph (input outside the contraction semigroup)"
        )
    return PotapovMatrix(r=bottom @ np.linalg.inv(top))


def potapov_inverse(r: PotapovMatrix) -> LinearRelation:
    """The relation whose Potapov transform is r (inverse of potapov_relation)."""
    n = r.n
    G = np.vstack([np.eye(2 * n, dtype=complex), r.r])
    F = _pi_permutation(n).T @ G  # Pi is a permutation, so Pi^{-1} = Pi^T
    return relation_from_span(F, n)


def potapov_product(r1: PotapovMatrix, r2: PotapovMatrix, rank_tol: float = DEFAULT_TOL.rank_tol) -> PotapovMatrix:
    """Product formula: Pi(P1 P2) from r1 = Pi(P1) = (alpha beta; gamma delta)
    and r2 = Pi(P2) = (phi psi; theta kappa)."""
    if r1.n != r2.n:
        raise ShapeError("block sizes differ")
    n = r1.n
    al, be, ga, de = r1.alpha, r1.beta, r1.gamma, r1.delta
    ph, ps, th, ka = r2.alpha, r2.beta, r2.gamma, r2.delta
    M = np.eye(n) - ph @ de
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= rank_tol * max(s[0], 1.0):
        raise RankError("1 - phi delta is singular")
    M1 = np.linalg.inv(M)
    M2 = np.linalg.inv(np.eye(n) - de @ ph)
    r = np.block(
        [
            [al + be @ M1 @ ph @ ga, be @ M1 @ ps],
            [th @ M2 @ ga, ka + th @ de @ M1 @ ps],
        ]
    )
    return PotapovMatrix(r=r)


# ---------------------------------------------------------------------------
# the doubled number matrix and the graph-limit theorem

def make_Nb(m: int) -> np.ndarray:
    """Doubled number matrix N_b = diag(0..0, 1..1, 0..0, -1..-1) (4m x 4m).

    Its dissipative multiple is +N_b: Ical N_b = diag(0, -I, 0, -I) <= 0.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.diag(
        np.concatenate([np.zeros(m), np.ones(m), np.zeros(m), -np.ones(m)])
    ).astype(complex)


def _eigenspace_indices(m: int):
    """Index ranges of the N_b eigenspaces V^(0), V^(1), V^(-1)."""
    v0 = list(range(0, m)) + list(range(2 * m, 3 * m))
    v1 = list(range(m, 2 * m))
    vm1 = list(range(3 * m, 4 * m))
    return v0, v1, vm1


def a0_generator(A, m: int) -> np.ndarray:
    """Compression (I - N_b^2) A (I - N_b^2) onto the zero eigenspace of N_b."""
    A = as_cmatrix(A)
    if A.shape != (4 * m, 4 * m):
        raise ShapeError(f"expected shape {(4 * m, 4 * m)}")
    Nb = make_Nb(m)
    P0 = np.eye(4 * m) - Nb @ Nb
    return P0 @ A @ P0


def projection_derivative(A, m: int) -> np.ndarray:
    """Closed-form derivative at eps = 0 of the spectral projector of
    eps A - N_b onto the eigenvalue cluster near 0:

        N_b A (I - N_b^2) + (I - N_b^2) A N_b.
    """
    A = as_cmatrix(A)
    if A.shape != (4 * m, 4 * m):
        raise ShapeError(f"expected shape {(4 * m, 4 * m)}")
    Nb = make_Nb(m)
    P0 = np.eye(4 * m) - Nb @ Nb
    return Nb @ A @ P0 + P0 @ A @ Nb


def limit_graph(A, m: int, tol: Tolerances = DEFAULT_TOL) -> LinearRelation:
    """The limit relation of graph(e^{A + nu N_b}) as nu -> infinity:

        span{ v_-1 (+) 0,  v_0 (+) e^{A_0} v_0,  0 (+) v_1 }

    over the eigenspaces V^(lambda) of N_b, with A_0 the zero-space
    compression of A.  The result is a symplectic contraction relation.
    """
    A = as_cmatrix(A)
    if A.shape != (4 * m, 4 * m):
        raise ShapeError(f"expected shape {(4 * m, 4 * m)}")
    if spc_residual(A) > tol.eq_tol * 10:
        raise MembershipError("A does not have the sp_c(4m,R) block pattern")
    d = 4 * m
    eA0 = expm(a0_generator(A, m))
    v0, v1, vm1 = _eigenspace_indices(m)
    E = np.eye(d, dtype=complex)
    cols = []
    for j in vm1:
        cols.append(np.concatenate([E[:, j], np.zeros(d)]))
    for j in v0:
        cols.append(np.concatenate([E[:, j], eA0 @ E[:, j]]))
    for j in v1:
        cols.append(np.concatenate([np.zeros(d), E[:, j]]))
    return relation_from_span(np.array(cols).T, 2 * m)


def graph_limit_gap(A, m: int, nu: float) -> float:
    """Convergence diagnostic: gap(graph(e^{A + nu N_b}), limit_graph(A)).

    Decays like ||A||/nu for generic A (exponentially only when A commutes
    with N_b^2).
    """
    Nb = make_Nb(m)
    g = graph_of(expm(as_cmatrix(A) + nu * Nb))
    return subspace_gap(g.frame, limit_graph(A, m).frame)
