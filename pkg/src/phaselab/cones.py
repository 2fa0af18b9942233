"""Symplectic groups, the indefinite form, dissipative cones, and the
Potapov-Olshanski decomposition.

Conventions (fixed once, used everywhere):

    J  = [[0, I], [-I, 0]]                 (real symplectic form)
    W  = (1/sqrt 2) [[I, iI], [I, -iI]]    (Cayley-type unitary)
    J_c = W J W^{-1} = diag(-iI, iI)
    Ical = -i J_c = diag(-I, I)
    <u|v>_I = u* Ical v                    (indefinite Hermitian form)

Group/cone predicates, with X a 2n x 2n complex matrix:

    Sp(2n,K):    M^T J M = J         sp(2n,K):  J X + X^T J = 0
    U(n,n):      M* Ical M = Ical    u(n,n):    Ical X + X* Ical = 0
    sp_c(2n,R):  block pattern (A B; conj B conj A), A* = -A, B^T = B
    GammaU:      Ical - M* Ical M >= 0
    Diss:        Ical X + X* Ical <= 0
    SDiss:       X in i.u(n,n) and Ical X <= 0   (Ical X is then Hermitian)
    SDiss_spc:   X in i.sp_c(2n,R) and Ical X <= 0
    Diss_spc:    X in sp(2n,C) and Ical X + X* Ical <= 0

Note one fact that the sign conventions force and that is load-bearing for
the whole graph-limit machinery: with Ical = diag(-I, I) the *dissipative*
multiple of the doubled number matrix N_b = diag(0, I, 0, -I) is +N_b
(Ical N_b = diag(0, -I, 0, -I) <= 0), and the canonical strictly dissipative
direction is -Ical itself.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    ShapeError,
    Tolerances,
    as_cmatrix,
    expm,
    hermitian_part,
    logm_principal,
)


class MembershipError(ValueError):
    """Raised when an operation's input fails a required membership test."""


@dataclass(frozen=True)
class StructuralMatrices:
    """The structural matrices J, W, Ical for a fixed block size n."""

    n: int
    J: np.ndarray
    W: np.ndarray
    Ical: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.n


def make_structural(n: int) -> StructuralMatrices:
    """Build J, W, Ical for block size n (matrices are 2n x 2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    Z = np.zeros((n, n))
    I = np.eye(n)
    J = np.block([[Z, I], [-I, Z]]).astype(complex)
    W = np.block([[I, 1j * I], [I, -1j * I]]) / np.sqrt(2.0)
    Ical = np.diag(np.concatenate([-np.ones(n), np.ones(n)])).astype(complex)
    return StructuralMatrices(n=n, J=J, W=W, Ical=Ical)


def cayley(A, S: StructuralMatrices) -> np.ndarray:
    """Conjugation A -> W A W^{-1} into the complexified coordinates."""
    A = as_cmatrix(A)
    if A.shape != (S.dim, S.dim):
        raise ShapeError(f"expected shape {(S.dim, S.dim)}, got {A.shape}")
    return S.W @ A @ S.W.conj().T  # W is unitary


def herm_form(u, v, S: StructuralMatrices) -> complex:
    """Indefinite inner product <u|v>_I = u* Ical v."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if u.shape[0] != S.dim or v.shape[0] != S.dim:
        raise ShapeError(f"vectors must have length {S.dim}")
    return complex(u.conj() @ (S.Ical @ v))


@dataclass(frozen=True)
class Membership:
    flag: bool
    residual: float


@dataclass(frozen=True)
class MembershipReport:
    """Per-predicate flags, each paired with a quantitative residual."""

    n: int
    checks: Mapping[str, Membership]

    PREDICATES = (
        "Sp_R", "Sp_C", "sp_R", "sp_C", "sp_c", "U", "u",
        "GammaU", "GammaSp_c", "Diss", "SDiss", "Diss_spc", "SDiss_spc",
    )

    def __getitem__(self, key: str) -> Membership:
        return self.checks[key]

    def flag(self, key: str) -> bool:
        return self.checks[key].flag

    def residual(self, key: str) -> float:
        return self.checks[key].residual


def _norm(M) -> float:
    return float(np.linalg.norm(M, 2))


def spc_residual(M: np.ndarray) -> float:
    """Block-pattern residual for sp_c(2n,R): (A B; conj B conj A), A* = -A,
    B^T = B."""
    n = M.shape[0] // 2
    A, B = M[:n, :n], M[:n, n:]
    return max(
        _norm(M[n:, :n] - B.conj()),
        _norm(M[n:, n:] - A.conj()),
        _norm(A + A.conj().T),
        _norm(B - B.T),
    )


def classify(M, S: StructuralMatrices, tol: Tolerances = DEFAULT_TOL) -> MembershipReport:
    """Evaluate every group/cone predicate on M, with residuals.

    Equality-type residuals gate on tol.eq_tol, semidefinite ones on
    tol.psd_tol; conjunction predicates require both parts.
    """
    M = as_cmatrix(M)
    d = S.dim
    if M.shape != (d, d):
        raise ShapeError(f"expected shape {(d, d)}, got {M.shape}")
    J, Ical = S.J, S.Ical

    realness = _norm(M.imag)
    sp_grp = _norm(M.T @ J @ M - J)
    sp_alg = _norm(J @ M + M.T @ J)
    spc = spc_residual(M)
    u_grp = _norm(M.conj().T @ Ical @ M - Ical)
    u_alg = _norm(Ical @ M + M.conj().T @ Ical)
    iu_alg = _norm(Ical @ M - M.conj().T @ Ical)  # Ical M Hermitian
    ispc = spc_residual(-1j * M)

    gamma_u = max(-float(np.linalg.eigvalsh(hermitian_part(Ical - M.conj().T @ Ical @ M)).min()), 0.0)
    diss = max(float(np.linalg.eigvalsh(hermitian_part(Ical @ M)).max()) * 2, 0.0)
    # for X in i.u(n,n), Ical X is Hermitian; its largest eigenvalue is the
    # cone residual for SDiss-type membership
    icalM_top = max(float(np.linalg.eigvalsh(hermitian_part(Ical @ M)).max()), 0.0)

    eq, psd = tol.eq_tol, tol.psd_tol
    checks = {
        "Sp_R": Membership(sp_grp <= eq and realness <= eq, max(sp_grp, realness)),
        "Sp_C": Membership(sp_grp <= eq, sp_grp),
        "sp_R": Membership(sp_alg <= eq and realness <= eq, max(sp_alg, realness)),
        "sp_C": Membership(sp_alg <= eq, sp_alg),
        "sp_c": Membership(spc <= eq, spc),
        "U": Membership(u_grp <= eq, u_grp),
        "u": Membership(u_alg <= eq, u_alg),
        "GammaU": Membership(gamma_u <= psd, gamma_u),
        "GammaSp_c": Membership(gamma_u <= psd and sp_grp <= eq, max(gamma_u, sp_grp)),
        "Diss": Membership(diss <= psd, diss),
        "SDiss": Membership(iu_alg <= eq and icalM_top <= psd, max(iu_alg, icalM_top)),
        "Diss_spc": Membership(sp_alg <= eq and diss <= psd, max(sp_alg, diss)),
        "SDiss_spc": Membership(ispc <= eq and icalM_top <= psd, max(ispc, icalM_top)),
    }
    return MembershipReport(n=S.n, checks=checks)


def is_spc_lie(M, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Quick sp_c(2n,R) block-pattern test."""
    M = as_cmatrix(M)
    if M.shape[0] != M.shape[1] or M.shape[0] % 2:
        return False
    return spc_residual(M) <= tol.eq_tol


def split_diss(X, S: StructuralMatrices, tol: Tolerances = DEFAULT_TOL):
    """Split X in Diss(n,n) as Xu + Xs with Xu in u(n,n) and Xs Ical-self-
    adjoint dissipative (the direct sum Diss = u(n,n) + SDiss)."""
    X = as_cmatrix(X)
    rep = classify(X, S, tol)
    if not rep.flag("Diss"):
        raise MembershipError(
            f"input is not Ical-dissipative (residual {rep.residual('Diss'):.3e})"
        )
    Ical = S.Ical
    Xadj = Ical @ X.conj().T @ Ical
    Xu = (X - Xadj) / 2
    Xs = (X + Xadj) / 2
    return Xu, Xs


@dataclass(frozen=True)
class PODecomposition:
    """Unique factorization g = h e^X with h in Sp_c(2n,R), X in SDiss_spc."""

    h: np.ndarray
    X: np.ndarray


def po_decompose(g, S: StructuralMatrices, tol: Tolerances = DEFAULT_TOL) -> PODecomposition:
    """Potapov-Olshanski decomposition of g in GammaSp_c(2n).

    Algorithm: with the Ical-adjoint g^[*] = Ical g* Ical one has
    g^[*] g = e^{2X} (X is Ical-self-adjoint), and the spectrum of e^{2X} is
    strictly positive for interior semigroup elements, so the principal
    logarithm recovers X; then h = g e^{-X}.  Boundary elements surface as a
    BranchCutError from the logarithm rather than a wrong branch.
    """
    g = as_cmatrix(g)
    rep = classify(g, S, tol)
    if not rep.flag("GammaSp_c"):
        raise MembershipError(
            f"input is not in GammaSp_c (residual {rep.residual('GammaSp_c'):.3e})"
        )
    Ical = S.Ical
    M = Ical @ g.conj().T @ Ical @ g
    X = 0.5 * logm_principal(M, tol.rank_tol)
    h = g @ expm(-X)
    return PODecomposition(h=h, X=X)


@dataclass(frozen=True)
class HamiltonianSymbol:
    """A generator A in sp_c(2m,R) viewed as a quadratic Hamiltonian symbol."""

    m: int
    A: np.ndarray

    def __post_init__(self):
        A = as_cmatrix(self.A)
        if A.shape != (2 * self.m, 2 * self.m):
            raise ShapeError(f"expected shape {(2 * self.m, 2 * self.m)}")
        if spc_residual(A) > 1e-8:
            raise MembershipError("A does not have the sp_c block pattern")
        object.__setattr__(self, "A", A)


def _doubled(z: np.ndarray):
    # bold z = (conj z, z)^T and its conjugate row (z, conj z)
    return np.concatenate([z.conj(), z]), np.concatenate([z, z.conj()])


def hamiltonian_value(sym: HamiltonianSymbol, z) -> complex:
    """The quadratic symbol (1/2) z* Ical A z on doubled coordinates.

    Values are pure imaginary for A in sp_c(2m,R).
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != sym.m:
        raise ShapeError(f"expected a vector of length {sym.m}")
    S = make_structural(sym.m)
    zvec, zstar = _doubled(z)
    return complex(0.5 * zstar @ (S.Ical @ sym.A @ zvec))


def hamiltonian_real_values(sym: HamiltonianSymbol, pts) -> np.ndarray:
    """Vectorized evaluation of the real symbol i h_A on phase-space points.

    ``pts`` has shape (N, 2m) with rows (x_1..x_m, y_1..y_m); returns the
    real values of i times the (pure imaginary) quadratic symbol.
    """
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    m = sym.m
    if pts.shape[1] != 2 * m:
        raise ShapeError(f"expected points of dimension {2 * m}")
    z = pts[:, :m] + 1j * pts[:, m:]
    S = make_structural(m)
    M = 0.5 * (S.Ical @ sym.A)
    zvec = np.concatenate([z.conj(), z], axis=1)
    zstar = np.concatenate([z, z.conj()], axis=1)
    vals = np.einsum("gi,ij,gj->g", zstar, M, zvec)
    return np.real(1j * vals)


def hat_lift(sym: HamiltonianSymbol) -> np.ndarray:
    """The 4m x 4m lift of A = (A B; conj B conj A) whose quadratic
    expression in the doubled creation/annihilation vector reproduces the
    symbol evaluated on the commuting normal operators Z_k.

    Row blocks: (-conj A, -conj B, -conj B, -conj A; B, A, A, B;
                 -B, -A, -A, -B; conj A, conj B, conj B, conj A).
    The result lies in sp_c(4m, R).
    """
    m = sym.m
    A, B = sym.A[:m, :m], sym.A[:m, m:]
    Ab, Bb = A.conj(), B.conj()
    return np.block(
        [
            [-Ab, -Bb, -Bb, -Ab],
            [B, A, A, B],
            [-B, -A, -A, -B],
            [Ab, Bb, Bb, Ab],
        ]
    )


# ---------------------------------------------------------------------------
# random sampling of groups and cones (deterministic in the seed)

SAMPLE_KINDS = (
    "sp_R", "sp_C", "sp_c", "u", "Sp_c", "U",
    "SDiss", "SDiss_spc", "Diss", "GammaU", "GammaSp_c",
)


def sample(kind: str, n: int, scale: float, seed: int) -> np.ndarray:
    """Draw a matrix passing the requested membership flag.

    Algebra samples fill the defining block pattern with Gaussian entries and
    symmetrize; group samples exponentiate algebra samples; dissipative
    samples are pushed strictly inside the cone by a spectral shift along
    -Ical (the canonical strictly dissipative direction).  Deterministic in
    (kind, n, scale, seed); matrices are normalized to spectral norm
    ``scale`` (algebra/cone kinds).
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    # crc32, not hash(): hash() is salted per process and would break the
    # bit-identical-output contract
    rng = np.random.default_rng((zlib.crc32(kind.encode()), n, seed))
    S = make_structural(n)

    def gauss(shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    def normalized(M):
        return M / np.linalg.norm(M, 2) * scale

    if kind == "sp_R":
        Sym = rng.normal(size=(2 * n, 2 * n))
        Sym = Sym + Sym.T
        return normalized((np.linalg.inv(S.J) @ Sym).astype(complex))
    if kind == "sp_C":
        Sym = gauss((2 * n, 2 * n))
        Sym = Sym + Sym.T
        return normalized(np.linalg.inv(S.J) @ Sym)
    if kind == "sp_c":
        A = gauss((n, n))
        A = (A - A.conj().T) / 2
        B = gauss((n, n))
        B = (B + B.T) / 2
        return normalized(np.block([[A, B], [B.conj(), A.conj()]]))
    if kind == "u":
        # Ical X skew-Hermitian
        K = gauss((2 * n, 2 * n))
        K = (K - K.conj().T) / 2
        return normalized(S.Ical @ K)
    if kind == "Sp_c":
        return expm(sample("sp_c", n, scale, seed + 1))
    if kind == "U":
        return expm(sample("u", n, scale, seed + 1))
    if kind == "SDiss":
        K = gauss((2 * n, 2 * n))
        K = (K + K.conj().T) / 2
        lam = float(np.linalg.eigvalsh(K).max())
        # Ical X = K - (lam + margin) I  <=  -margin
        X = S.Ical @ (K - (lam + 0.3) * np.eye(2 * n))
        return normalized(X)
    if kind == "SDiss_spc":
        X = 1j * sample("sp_c", n, 1.0, seed + 1)
        lam = float(np.linalg.eigvalsh(hermitian_part(S.Ical @ X)).max())
        X = X - (lam + 0.3) * S.Ical  # -Ical is strictly dissipative in i.sp_c
        return normalized(X)
    if kind == "Diss":
        Xu = sample("u", n, 1.0, seed + 1)
        Xs = sample("SDiss", n, 1.0, seed + 2)
        return normalized(Xu + Xs)
    if kind == "GammaU":
        return sample("U", n, scale, seed + 1) @ expm(sample("SDiss", n, scale, seed + 2))
    if kind == "GammaSp_c":
        return sample("Sp_c", n, scale, seed + 1) @ expm(
            sample("SDiss_spc", n, scale, seed + 2)
        )
    raise ValueError(f"unknown sample kind {kind!r}; known kinds: {SAMPLE_KINDS}")
