import numpy as np
import pytest

from phaselab.cones import make_structural, sample
from phaselab.linalg import expm, subspace_gap
from phaselab.relations import (
    DegenerateCompositionError,
    PotapovMatrix,
    a0_generator,
    compose,
    graph_of,
    graph_limit_gap,
    is_Unn,
    is_symplectic_rel,
    ker_indef,
    limit_graph,
    make_Nb,
    potapov_inverse,
    potapov_matrix,
    potapov_product,
    potapov_relation,
    projection_derivative,
    relation_from_span,
)


def frame_of_columns(cols):
    cols = np.asarray(cols, dtype=complex).T
    q, _ = np.linalg.qr(cols)
    return q


def test_graph_of_trivial():
    g0 = graph_of(np.zeros((2, 2)))
    expected = frame_of_columns([[1, 0, 0, 0], [0, 1, 0, 0]])
    assert subspace_gap(g0.frame, expected) < 1e-14

    gid = graph_of(np.eye(2))
    diag = frame_of_columns([[1, 0, 1, 0], [0, 1, 0, 1]])
    assert subspace_gap(gid.frame, diag) < 1e-14


def test_graph_separates_matrices():
    rng = np.random.default_rng(0)
    for _ in range(10):
        T = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        T2 = T + 1e-3 * rng.normal(size=(2, 2))
        assert subspace_gap(graph_of(T).frame, graph_of(T).frame) < 1e-14
        assert subspace_gap(graph_of(T).frame, graph_of(T2).frame) > 1e-5


def test_compose_identity_and_order():
    rng = np.random.default_rng(1)
    for _ in range(10):
        Smat = expm(sample("sp_c", 1, 0.4, int(rng.integers(1e6))))
        Tmat = expm(sample("sp_c", 1, 0.4, int(rng.integers(1e6))))
        P = compose(graph_of(Smat), graph_of(Tmat))
        # the set-formula product extends matrix multiplication in reversed
        # order: graph(S) o graph(T) = graph(T S)
        assert subspace_gap(P.frame, graph_of(Tmat @ Smat).frame) < 1e-12
        assert subspace_gap(compose(P, graph_of(np.eye(2))).frame, P.frame) < 1e-12


def test_compose_bruteforce_oracle():
    # brute force: for each basis input x, solve x + w in graph(S),
    # w + y in graph(T) directly
    Smat = np.array([[1.0, 0.5], [0.0, 2.0]], dtype=complex)
    Tmat = np.array([[0.0, 1.0], [-1.0, 0.3]], dtype=complex)
    cols = []
    for x in np.eye(2, dtype=complex):
        w = Smat @ x
        y = Tmat @ w
        cols.append(np.concatenate([x, y]))
    oracle = frame_of_columns(cols)
    P = compose(graph_of(Smat), graph_of(Tmat))
    assert subspace_gap(P.frame, oracle) < 1e-13


def test_compose_degenerate_raises():
    # {0 (+) w} composed with graph(0) collapses to the zero subspace
    R = relation_from_span(np.eye(4, dtype=complex)[:, [2, 3]], 1)
    with pytest.raises(DegenerateCompositionError) as err:
        compose(R, graph_of(np.zeros((2, 2))))
    assert err.value.dim == 0


def test_compose_dimension_mismatch():
    from phaselab.linalg import ShapeError

    with pytest.raises(ShapeError):
        compose(graph_of(np.eye(2)), graph_of(np.eye(4)))


def test_ker_indef_invertible_graph():
    ker, ind = ker_indef(graph_of(np.diag([2.0, 0.5])))
    assert ker.shape[1] == 0 and ind.shape[1] == 0


def test_is_unn_and_symplectic():
    S = make_structural(2)
    for i in range(10):
        g = sample("GammaU", 2, 0.7, i)
        assert is_Unn(graph_of(g), S).flag
    for i in range(10):
        g = sample("GammaSp_c", 2, 0.7, 100 + i)
        P = graph_of(g)
        assert is_Unn(P, S).flag and is_symplectic_rel(P, S)
    bad = graph_of(2.0 * np.eye(4))
    assert not is_Unn(bad, S).flag
    assert not is_symplectic_rel(bad, S)


def test_semigroup_closure():
    S = make_structural(2)
    for i in range(20):
        P1 = graph_of(sample("GammaSp_c", 2, 0.6, 2 * i))
        P2 = graph_of(sample("GammaSp_c", 2, 0.6, 2 * i + 1))
        P = compose(P1, P2)
        assert is_Unn(P, S).flag and is_symplectic_rel(P, S)


def test_potapov_matrix_examples():
    r = potapov_matrix(np.eye(4))
    assert np.linalg.norm(r.alpha) < 1e-14 and np.linalg.norm(r.delta) < 1e-14
    assert np.linalg.norm(r.beta - np.eye(2), 2) < 1e-14
    assert np.linalg.norm(r.gamma - np.eye(2), 2) < 1e-14

    X = np.diag([1.0, -1.0])
    for t in (0.5, 1.0, 2.0):
        r = potapov_matrix(expm(t * X))
        target = np.array([[0, np.exp(-t)], [np.exp(-t), 0]])
        assert np.linalg.norm(r.r - target, 2) < 1e-12

    from phaselab.linalg import RankError

    with pytest.raises(RankError):
        potapov_matrix(np.diag([0.0, 1.0, 1.0, 1.0]))


def test_potapov_contraction_norm():
    for i in range(50):
        n = 1 + i % 2
        g = sample("GammaU", n, 0.8, i)
        assert np.linalg.norm(potapov_matrix(g).r, 2) <= 1.0 + 1e-10


def test_potapov_symplectic_block_relation():
    # for symplectic g the lower-left block is the transposed inverse of a
    for i in range(10):
        g = sample("GammaSp_c", 2, 0.6, i)
        r = potapov_matrix(g)
        a = g[:2, :2]
        assert np.linalg.norm(r.gamma - np.linalg.inv(a).T, 2) < 1e-9 * np.linalg.norm(r.gamma, 2)


def test_potapov_relation_agrees_with_matrix_route():
    for i in range(200):
        n = 1 + i % 2
        g = sample("GammaU", n, 0.7, 1000 + i)
        r1 = potapov_matrix(g).r
        r2 = potapov_relation(graph_of(g)).r
        assert np.linalg.norm(r1 - r2, 2) < 1e-10


def test_potapov_bijection_roundtrip():
    for i in range(20):
        P = graph_of(sample("GammaU", 2, 0.7, i))
        r = potapov_relation(P)
        back = potapov_inverse(r)
        assert subspace_gap(P.frame, back.frame) < 1e-10


def test_potapov_product_identity_case():
    rng = np.random.default_rng(5)
    r1 = PotapovMatrix(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    id_transform = potapov_relation(graph_of(np.eye(4)))
    out = potapov_product(r1, id_transform)
    assert np.linalg.norm(out.r - r1.r, 2) < 1e-12


def test_potapov_product_vs_composition_and_associativity():
    for i in range(30):
        P1 = graph_of(sample("GammaU", 2, 0.6, 3 * i))
        P2 = graph_of(sample("GammaU", 2, 0.6, 3 * i + 1))
        lhs = potapov_relation(compose(P1, P2)).r
        rhs = potapov_product(potapov_relation(P1), potapov_relation(P2)).r
        assert np.max(np.abs(lhs - rhs)) < 1e-9
    for i in range(10):
        rs = [potapov_relation(graph_of(sample("GammaU", 2, 0.5, 7 * i + k))) for k in range(3)]
        left = potapov_product(potapov_product(rs[0], rs[1]), rs[2]).r
        right = potapov_product(rs[0], potapov_product(rs[1], rs[2])).r
        assert np.max(np.abs(left - right)) < 1e-8


def test_potapov_product_continuity():
    P1 = graph_of(sample("GammaU", 2, 0.5, 42))
    P2 = graph_of(sample("GammaU", 2, 0.5, 43))
    r1, r2 = potapov_relation(P1), potapov_relation(P2)
    base = potapov_product(r1, r2).r
    bumped = potapov_product(PotapovMatrix(r1.r + 1e-8), r2).r
    assert np.max(np.abs(bumped - base)) < 1e-5


def test_make_Nb():
    Nb = make_Nb(1)
    assert np.allclose(np.diag(Nb), [0, 1, 0, -1])
    Nb2 = Nb @ Nb
    assert np.allclose(np.diag(Nb2), [0, 1, 0, 1])
    assert np.linalg.norm(Nb2 @ Nb2 - Nb2, 2) < 1e-15
    with pytest.raises(ValueError):
        make_Nb(0)


def test_limit_graph_zero_generator():
    # A = 0: the limit is spanned by e4(+)0, e1(+)e1, e3(+)e3, 0(+)e2
    P = limit_graph(np.zeros((4, 4)), 1)
    E = np.eye(4, dtype=complex)
    cols = [
        np.concatenate([E[:, 3], np.zeros(4)]),
        np.concatenate([E[:, 0], E[:, 0]]),
        np.concatenate([E[:, 2], E[:, 2]]),
        np.concatenate([np.zeros(4), E[:, 1]]),
    ]
    assert subspace_gap(P.frame, frame_of_columns(cols)) < 1e-14


def test_limit_graph_structure_and_ker_indef():
    S = make_structural(2)
    E = np.eye(4, dtype=complex)
    for i in range(10):
        A = sample("sp_c", 2, 1.0, i)
        P = limit_graph(A, 1)
        assert is_Unn(P, S).flag
        assert is_symplectic_rel(P, S)
        ker, ind = ker_indef(P)
        # ker P = V^(-1) (fourth block), indef P = V^(1) (second block)
        assert subspace_gap(ker, E[:, [3]]) < 1e-12
        assert subspace_gap(ind, E[:, [1]]) < 1e-12


def test_limit_graph_convergence_with_rate():
    # gap to the limit decays like ||A||/nu for generic generators
    A = sample("sp_c", 2, 0.8, 3)
    g4 = graph_limit_gap(A, 1, 4.0)
    g8 = graph_limit_gap(A, 1, 8.0)
    g16 = graph_limit_gap(A, 1, 16.0)
    assert g8 < g4 and g16 < g8
    assert 1.6 < g4 / g8 < 2.4 and 1.6 < g8 / g16 < 2.4
    # block-preserving generators converge exponentially instead
    Adiag = np.diag([0.3j, 0.7j, -0.3j, -0.7j])
    assert graph_limit_gap(Adiag, 1, 16.0) < 1e-6


def test_limit_graph_middle_block_consistency():
    # over V^(0) the limit relation is the graph of the compressed flow
    A = sample("sp_c", 2, 1.0, 9)
    P = limit_graph(A, 1)
    eA0 = expm(a0_generator(A, 1))
    for j in (0, 2):
        v = np.zeros(4, dtype=complex)
        v[j] = 1.0
        vec = np.concatenate([v, eA0 @ v])
        vec /= np.linalg.norm(vec)
        proj = P.frame @ (P.frame.conj().T @ vec)
        assert np.linalg.norm(proj - vec) < 1e-12


def test_a0_generator_idempotent_compression():
    A = sample("sp_c", 2, 1.0, 4)
    A0 = a0_generator(A, 1)
    assert np.linalg.norm(a0_generator(A0, 1) - A0, 2) < 1e-14
    assert np.linalg.norm(a0_generator(np.zeros((4, 4)), 1)) == 0


def test_projection_derivative_closed_form():
    assert np.linalg.norm(projection_derivative(np.zeros((4, 4)), 1)) == 0
    # diagonal A commutes with the eigenprojections: derivative vanishes
    D = np.diag([0.3, -1.2, 0.7, 2.0]).astype(complex)
    assert np.linalg.norm(projection_derivative(D, 1), 2) < 1e-14


def test_projection_derivative_fd_oracle():
    rng = np.random.default_rng(8)
    Nb = make_Nb(1)
    eps = 1e-5

    def cluster_projector(M):
        w, V = np.linalg.eig(M)
        sel = np.abs(w) < 0.5
        Vi = np.linalg.inv(V)
        return V[:, sel] @ Vi[sel, :]

    for _ in range(10):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        A /= np.linalg.norm(A, 2)
        fd = (cluster_projector(eps * A - Nb) - cluster_projector(-eps * A - Nb)) / (2 * eps)
        cf = projection_derivative(A, 1)
        assert np.linalg.norm(fd - cf, 2) / np.linalg.norm(cf, 2) < 1e-3


def test_relation_from_span_validates():
    from phaselab.linalg import RankError

    with pytest.raises(RankError):
        relation_from_span(np.eye(4, dtype=complex)[:, [0]], 1)
