"""Truncated bosonic Fock space over n = 2m modes and the quantization
machinery on it: quadratic generators, the b-vacuum compression (antinormal
quantization), coherent states, quadrature quantization, and the strong-limit
experiment.

Operators are plain complex ndarrays on the D^n-dimensional truncated space
(per-mode occupation 0..D-1, modes ordered a_1..a_m, b_1..b_m left to right
in the tensor product).  CCR-derived identities hold exactly on the "safe
band" of occupations away from the cutoff and are only ever asserted there.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .cones import HamiltonianSymbol, hamiltonian_real_values, make_structural
from .linalg import ShapeError, expm


class TruncationError(ValueError):
    """Raised when a request exceeds what the cutoff can represent."""


class ConvergenceGuardError(RuntimeError):
    """Raised when a declared cutoff-convergence guard is violated."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space: n = 2m modes, per-mode occupation < cutoff."""

    m: int
    cutoff: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.cutoff < 2:
            raise ValueError("cutoff must be >= 2")

    @property
    def modes(self) -> int:
        return 2 * self.m

    @property
    def dim(self) -> int:
        return self.cutoff ** self.modes


def _ladder(D: int) -> np.ndarray:
    a = np.zeros((D, D), dtype=complex)
    for j in range(D - 1):
        a[j, j + 1] = np.sqrt(j + 1)
    return a


@lru_cache(maxsize=None)
def _mode_annihilators(m: int, D: int) -> tuple:
    ops = []
    a1, I = _ladder(D), np.eye(D)
    for k in range(2 * m):
        out = np.array([[1.0 + 0j]])
        for j in range(2 * m):
            out = np.kron(out, a1 if j == k else I)
        ops.append(out)
    return tuple(ops)


def annihilator(space: FockSpace, k: int) -> np.ndarray:
    """a_k for mode k (1-based, k = 1..n; b_j = a_{m+j})."""
    if not 1 <= k <= space.modes:
        raise ShapeError(f"mode index {k} out of range 1..{space.modes}")
    return _mode_annihilators(space.m, space.cutoff)[k - 1]


def creator(space: FockSpace, k: int) -> np.ndarray:
    return annihilator(space, k).conj().T


@lru_cache(maxsize=None)
def _occupation_diagonals(m: int, D: int) -> np.ndarray:
    """(2m, dim) array of per-mode occupation numbers along the diagonal."""
    n = 2 * m
    occ = np.zeros((n, D**n))
    for k in range(n):
        pattern = np.repeat(np.arange(D), D ** (n - k - 1))
        occ[k] = np.tile(pattern, D**k)
    return occ


def band_projector(space: FockSpace, max_occ: int, modes: Sequence[int] | None = None) -> np.ndarray:
    """Diagonal projector onto occupation <= max_occ in the given modes
    (1-based; all modes by default).  This is the safe band on which
    CCR-derived identities are exact."""
    occ = _occupation_diagonals(space.m, space.cutoff)
    sel = range(space.modes) if modes is None else [k - 1 for k in modes]
    keep = np.ones(space.dim, dtype=bool)
    for k in sel:
        keep &= occ[k] <= max_occ
    return np.diag(keep.astype(complex))


def number_ops(space: FockSpace):
    """(N_a, N_b, E_b): the two number operators (sums over the first and
    second half of the modes) and the orthogonal projector onto ker N_b."""
    m = space.m
    N_a = sum(creator(space, k) @ annihilator(space, k) for k in range(1, m + 1))
    N_b = sum(
        creator(space, m + k) @ annihilator(space, m + k) for k in range(1, m + 1)
    )
    occ = _occupation_diagonals(space.m, space.cutoff)
    b_vac = np.ones(space.dim, dtype=bool)
    for k in range(m, 2 * m):
        b_vac &= occ[k] == 0
    E_b = np.diag(b_vac.astype(complex))
    return N_a, N_b, E_b


def z_ops(space: FockSpace) -> list[np.ndarray]:
    """The commuting normal operators Z_k = a_k* + b_k, k = 1..m."""
    if space.cutoff < 3:
        raise TruncationError("z_ops needs cutoff >= 3")
    m = space.m
    return [creator(space, k) + annihilator(space, m + k) for k in range(1, m + 1)]


def _quadratic(row_ops, col_ops, M: np.ndarray) -> np.ndarray:
    dim = row_ops[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            if M[i, j] != 0:
                out += M[i, j] * (row_ops[i] @ col_ops[j])
    return out


def drho(space: FockSpace, A) -> np.ndarray:
    """The quadratic generator (1/2) a* Ical A a, with the doubled vector
    a = (a_1*..a_n*, a_1..a_n)^T and Ical = diag(-I_n, I_n).

    Skew-adjoint on the safe band for A in sp_c(2n,R).  Linear in A, so it
    extends to the complexification; e.g. the doubled number matrix
    N_b = diag(0,I,0,-I) (which lies in i.sp_c) maps to -(N_b + m/2).
    """
    A = np.asarray(A, dtype=complex)
    n = space.modes
    if A.shape != (2 * n, 2 * n):
        raise ShapeError(f"expected shape {(2 * n, 2 * n)}")
    S = make_structural(n)
    ann = [annihilator(space, k) for k in range(1, n + 1)]
    cre = [creator(space, k) for k in range(1, n + 1)]
    row = ann + cre   # entries of the conjugate row (a_1..a_n, a_1*..a_n*)
    col = cre + ann   # entries of the doubled column
    return _quadratic(row, col, 0.5 * (S.Ical @ A))


def antinormal_quantize(space: FockSpace, X) -> np.ndarray:
    """Compression E_b X E_b by the b-vacuum projector."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (space.dim, space.dim):
        raise ShapeError("operator dimension mismatch")
    _, _, E_b = number_ops(space)
    return E_b @ X @ E_b


def h_A_operator(space: FockSpace, sym: HamiltonianSymbol) -> np.ndarray:
    """The symbol evaluated on the Z operators: (1/2) Z* Ical_{2m} A Z.

    Agrees with drho(hat_lift(sym)) on the safe band.
    """
    if sym.m != space.m:
        raise ShapeError("symbol and space have different m")
    S = make_structural(space.m)
    Z = z_ops(space)
    Zc = [z.conj().T for z in Z]
    row = Z + Zc
    col = Zc + Z
    return _quadratic(row, col, 0.5 * (S.Ical @ sym.A))


def vacuum_state(space: FockSpace) -> np.ndarray:
    vec = np.zeros(space.dim, dtype=complex)
    vec[0] = 1.0
    return vec


def basis_state(space: FockSpace, occupations: Sequence[int]) -> np.ndarray:
    """Occupation-basis vector |j_1 .. j_n> (mode 1 leftmost)."""
    if len(occupations) != space.modes:
        raise ShapeError(f"need {space.modes} occupation numbers")
    D = space.cutoff
    idx = 0
    for j in occupations:
        if not 0 <= j < D:
            raise TruncationError(f"occupation {j} outside 0..{D - 1}")
        idx = idx * D + j
    vec = np.zeros(space.dim, dtype=complex)
    vec[idx] = 1.0
    return vec


@dataclass(frozen=True)
class CoherentState:
    z: np.ndarray
    vec: np.ndarray


def coherent_truncation_bound(space: FockSpace, z) -> float:
    """Bound on || (a_k - z_k) Omega_z || from the series tail at the cutoff."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    D = space.cutoff
    return float(
        sum(abs(zk) ** D / np.sqrt(float(factorial(D - 1))) for zk in z)
    )


def coherent(space: FockSpace, z, bound: float = 1e-6) -> CoherentState:
    """Truncated coherent state in the a-modes tensored with the b-vacuum.

    Raises TruncationError when the truncation-error bound exceeds ``bound``.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != space.m:
        raise ShapeError(f"expected {space.m} amplitudes")
    err = coherent_truncation_bound(space, z)
    if err > bound:
        raise TruncationError(
            f"coherent amplitude too large for cutoff {space.cutoff} "
            f"(error bound {err:.2e} > {bound:.2e})"
        )
    D = space.cutoff
    js = np.arange(D)
    vac = np.array([1.0] + [0.0] * (D - 1), dtype=complex)
    vec = np.array([1.0 + 0j])
    for k in range(space.m):
        amps = z[k] ** js / np.sqrt([float(factorial(int(j))) for j in js])
        amps = amps / np.linalg.norm(amps)
        vec = np.kron(vec, amps)
    for _ in range(space.m):
        vec = np.kron(vec, vac)
    return CoherentState(z=z, vec=vec)


def strong_limit_run(
    space: FockSpace,
    sym: HamiltonianSymbol,
    nu_list: Sequence[float],
    vectors: Sequence[np.ndarray],
    band_tol: float = 1e-2,
) -> list[tuple[float, list[float]]]:
    """Residual table for the strong-limit theorem: for each nu,

        r(nu) = || exp(h_A(Z) - nu N_b) psi - exp(E_b h_A(Z) E_b) E_b psi ||

    per test vector.  Vectors must lie in ran E_b and be essentially
    supported on occupations <= cutoff/3: mass beyond that band must stay
    below ``band_tol`` (a hard support cutoff would exclude coherent states,
    whose tails are small but nowhere zero).  r(nu) decays like ||A||/nu.
    """
    _, N_b, E_b = number_ops(space)
    occ = _occupation_diagonals(space.m, space.cutoff)
    safe = occ.max(axis=0) <= space.cutoff / 3
    for psi in vectors:
        if np.linalg.norm((np.eye(space.dim) - E_b) @ psi) > 1e-12:
            raise ValueError("test vector not in ran E_b")
        if np.linalg.norm(psi[~safe]) > band_tol:
            raise TruncationError("test vector occupies the unsafe band")
    H = h_A_operator(space, sym)
    target = expm(E_b @ H @ E_b) @ E_b
    rows = []
    for nu in nu_list:
        U = expm(H - nu * N_b)
        rows.append((float(nu), [float(np.linalg.norm(U @ p - target @ p)) for p in vectors]))
    return rows


# ---------------------------------------------------------------------------
# quadrature quantization on the disc (m = 1)

def _require_single_mode(space: FockSpace):
    if space.m != 1:
        raise ShapeError("quadrature operations are implemented for m = 1")


def _disc_grid(radius: float, grid: int):
    """Midpoint lattice on [-R, R]^2 masked to the disc |z| <= R."""
    h = 2.0 * radius / grid
    centers = -radius + h * (np.arange(grid) + 0.5)
    X, Y = np.meshgrid(centers, centers, indexing="ij")
    z = (X + 1j * Y).ravel()
    mask = np.abs(z) <= radius
    return z[mask], h * h / np.pi  # measure dmu = dx dy / pi


def _coherent_amplitudes(z: np.ndarray, D: int) -> np.ndarray:
    """Gaussian coherent amplitudes C[g, j] = e^{-|z|^2/2} z_g^j / sqrt(j!).

    These are the amplitudes of the exact (infinite-dimensional, normalized)
    coherent states, truncated.  Renormalizing the truncated rows instead
    would inflate the |z| > sqrt(cutoff) region and destroy the resolution
    of identity, so the tail mass is deliberately left missing; it only
    affects occupations near the cutoff.
    """
    js = np.arange(D)
    fact = np.sqrt(np.array([float(factorial(int(j))) for j in js]))
    C = z[:, None] ** js[None, :] / fact[None, :]
    return C * np.exp(-np.abs(z) ** 2 / 2)[:, None]


def quantize_integral(
    space: FockSpace, f: Callable[[np.ndarray], np.ndarray], radius: float, grid: int
) -> np.ndarray:
    """Quadrature quantization Q(f) = integral of f(z) p_z dmu(z) over the
    disc |z| <= radius, with p_z the (normalized, truncated) coherent-state
    projector.  Midpoint rule on a grid x grid lattice; m = 1."""
    _require_single_mode(space)
    D = space.cutoff
    z, w = _disc_grid(radius, grid)
    C = _coherent_amplitudes(z, D)
    fvals = np.asarray(f(z), dtype=complex).reshape(-1)
    if fvals.shape != z.shape:
        raise ShapeError("f must map the grid to one value per point")
    Qa = (C * (w * fvals)[:, None]).T @ C.conj()
    Eb0 = np.zeros((D, D), dtype=complex)
    Eb0[0, 0] = 1.0
    return np.kron(Qa, Eb0)


def resolution_check(space: FockSpace, radius: float, grid: int, max_occ: int = 3) -> float:
    """Distance || integral p_z dmu - E_b || on the block of a-occupation
    <= max_occ (inside the b-vacuum sector)."""
    _require_single_mode(space)
    if radius < 5 or grid < 100:
        raise ValueError("resolution check needs radius >= 5 and grid >= 100")
    Q = quantize_integral(space, lambda z: np.ones_like(z, dtype=complex), radius, grid)
    _, _, E_b = number_ops(space)
    P = band_projector(space, max_occ, modes=[1]) @ E_b
    return float(np.linalg.norm(P @ (Q - E_b) @ P, 2))


def symbol_clip(sym: HamiltonianSymbol, tau: float | None) -> Callable[[np.ndarray], np.ndarray]:
    """The real function i h_A (clipped to [-tau, tau] when tau is given) on
    complex grid points; this is i times the cutoff Hamiltonian."""

    def values(z: np.ndarray) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pts = np.stack([z.real, z.imag], axis=1)
        real = hamiltonian_real_values(sym, pts)
        if tau is not None:
            real = np.clip(real, -tau, tau)
        return real

    return values


def vacuum_expectation(
    space: FockSpace,
    sym: HamiltonianSymbol,
    tau: float | None = None,
    *,
    radius: float = 8.0,
    grid: int = 320,
    guard: float | None = 1e-4,
) -> complex:
    """<Omega_0 | exp(E_b h_A(Z) E_b) Omega_0>, or with h_A replaced by the
    quadrature quantization of the tau-clipped symbol.

    The modulus never exceeds 1 (the compressed generator is skew-adjoint on
    the b-vacuum sector).  With ``guard`` set, the value is recomputed at
    cutoff + 2 and must agree within the guard, else ConvergenceGuardError.
    """
    _require_single_mode(space)

    def value_at(D: int) -> complex:
        sp = FockSpace(space.m, D)
        if tau is None:
            G = antinormal_quantize(sp, h_A_operator(sp, sym))
        else:
            G = -1j * quantize_integral(sp, symbol_clip(sym, tau), radius, grid)
        vac = vacuum_state(sp)
        return complex(vac.conj() @ (expm(G) @ vac))

    val = value_at(space.cutoff)
    if guard is not None:
        val2 = value_at(space.cutoff + 2)
        if abs(val - val2) >= guard:
            raise ConvergenceGuardError(
                f"cutoff not converged: |delta| = {abs(val - val2):.2e} >= {guard:.2e}"
            )
    return val
