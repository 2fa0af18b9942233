import numpy as np
import pytest

from phaselab.linalg import (
    BranchCutError,
    RankError,
    ShapeError,
    Tolerances,
    expm,
    logm_principal,
    nullspace,
    orthonormal_frame,
    span_frame,
    subspace_gap,
)


def expm_series(X, terms=60):
    """Independent power-series oracle for the matrix exponential."""
    X = np.asarray(X, dtype=complex)
    out = np.eye(X.shape[0], dtype=complex)
    term = np.eye(X.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def test_tolerances_validation():
    Tolerances()
    with pytest.raises(ValueError):
        Tolerances(eq_tol=0.0)
    with pytest.raises(ValueError):
        Tolerances(psd_tol=-1e-9)


def test_expm_zero_and_diagonal():
    assert np.allclose(expm(np.zeros((2, 2))), np.eye(2), atol=1e-15)
    out = expm(np.diag([1.0, -1.0]))
    assert np.allclose(out, np.diag([np.e, 1 / np.e]), rtol=1e-14)


def test_expm_rotation_vs_series_oracle():
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t = np.pi / 2
    expected = expm_series(t * J)
    assert np.linalg.norm(expm(t * J) - expected, 2) < 1e-12
    assert np.allclose(expm(t * J), [[0, 1], [-1, 0]], atol=1e-12)


def test_expm_nonsquare_rejected():
    with pytest.raises(ShapeError):
        expm(np.ones((2, 3)))


def test_expm_inverse_identity():
    rng = np.random.default_rng(1)
    for _ in range(10):
        X = random_complex(rng, (4, 4))
        X *= 5.0 / np.linalg.norm(X, 2)
        assert np.linalg.norm(expm(X) @ expm(-X) - np.eye(4), 2) < 1e-10


def test_expm_normal_matrix_matches_eigendecomposition():
    rng = np.random.default_rng(2)
    for _ in range(5):
        H = random_complex(rng, (5, 5))
        H = H + H.conj().T  # Hermitian, hence normal
        w, V = np.linalg.eigh(H)
        via_eig = V @ np.diag(np.exp(w)) @ V.conj().T
        rel = np.linalg.norm(expm(H) - via_eig, 2) / np.linalg.norm(via_eig, 2)
        assert rel < 1e-12


def test_logm_trivial_cases():
    assert np.linalg.norm(logm_principal(np.eye(3))) < 1e-14
    out = logm_principal(np.diag([np.e**2, np.e**-2]))
    assert np.allclose(out, np.diag([2.0, -2.0]), atol=1e-12)


def test_logm_roundtrip_generated():
    rng = np.random.default_rng(3)
    for _ in range(10):
        S = random_complex(rng, (4, 4))
        S *= 0.9 / np.linalg.norm(S, 2)  # spectrum inside the unit disc
        M = expm(S)
        resid = np.linalg.norm(expm(logm_principal(M)) - M, 2) / np.linalg.norm(M, 2)
        assert resid < 1e-9


def test_logm_of_expm_identity_in_strip():
    rng = np.random.default_rng(4)
    for _ in range(10):
        X = random_complex(rng, (4, 4))
        X *= 2.0 / np.linalg.norm(X, 2)  # |Im eigenvalue| <= 2 < pi - 0.1
        assert np.linalg.norm(logm_principal(expm(X)) - X, 2) < 1e-9


def test_logm_branch_cut_error_carries_eigenvalue():
    with pytest.raises(BranchCutError) as err:
        logm_principal(np.diag([-1.0, 2.0]))
    assert abs(err.value.eigenvalue - (-1.0)) < 1e-12


def test_orthonormal_frame_examples():
    f = orthonormal_frame(np.array([[2.0], [0.0]]))
    assert np.allclose(np.abs(f), [[1.0], [0.0]], atol=1e-14)
    with pytest.raises(RankError):
        orthonormal_frame(np.array([[1.0, 1.0], [2.0, 2.0]]))


def test_orthonormal_frame_random():
    rng = np.random.default_rng(5)
    A = random_complex(rng, (8, 4))
    f = orthonormal_frame(A)
    assert np.linalg.norm(f.conj().T @ f - np.eye(4), 2) < 1e-12
    assert subspace_gap(f, orthonormal_frame(A @ random_complex(rng, (4, 4)))) < 1e-12


def test_subspace_gap_examples():
    e1 = np.array([[1.0], [0.0]], dtype=complex)
    e2 = np.array([[0.0], [1.0]], dtype=complex)
    assert subspace_gap(e1, e1) == 0.0
    # 2x2 projector oracle: diag(1,0) - diag(0,1) has operator norm 1
    oracle = np.linalg.norm(e1 @ e1.conj().T - e2 @ e2.conj().T, 2)
    assert abs(subspace_gap(e1, e2) - oracle) < 1e-15
    assert abs(oracle - 1.0) < 1e-15


def test_subspace_gap_frame_invariance_and_pseudometric():
    rng = np.random.default_rng(6)
    A = orthonormal_frame(random_complex(rng, (6, 3)))
    U, _ = np.linalg.qr(random_complex(rng, (3, 3)))
    assert subspace_gap(A, orthonormal_frame(A @ U)) < 1e-13
    for _ in range(20):
        P = orthonormal_frame(random_complex(rng, (6, 3)))
        Q = orthonormal_frame(random_complex(rng, (6, 3)))
        R = orthonormal_frame(random_complex(rng, (6, 3)))
        assert subspace_gap(P, Q) == subspace_gap(Q, P)
        assert subspace_gap(P, R) <= subspace_gap(P, Q) + subspace_gap(Q, R) + 1e-12
        assert -1e-15 <= subspace_gap(P, Q) <= 1.0 + 1e-12


def test_subspace_gap_shape_mismatch():
    with pytest.raises(ShapeError):
        subspace_gap(np.eye(4)[:, :2], np.eye(6)[:, :2])


def test_nullspace_and_span_frame():
    rng = np.random.default_rng(7)
    M = random_complex(rng, (3, 6))
    N = nullspace(M)
    assert N.shape[1] == 3
    assert np.linalg.norm(M @ N, 2) < 1e-12
    assert span_frame(np.zeros((4, 2))).shape[1] == 0
