"""Configuration-driven experiment runners.

Each experiment tag reproduces a block of the verification battery and emits
one row per check: a measured value, its threshold, a comparator, and a
status.  Rows with comparator "report" never fail a run.  Runners are
deterministic given the config (all randomness flows through explicit
seeds), so identical configs produce byte-identical CSV output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cones import (
    HamiltonianSymbol,
    classify,
    hat_lift,
    make_structural,
    po_decompose,
    sample,
)
from .fock import (
    FockSpace,
    annihilator,
    band_projector,
    basis_state,
    coherent,
    creator,
    drho,
    h_A_operator,
    number_ops,
    quantize_integral,
    resolution_check,
    strong_limit_run,
    vacuum_expectation,
    vacuum_state,
    z_ops,
)
from .landau import (
    Grid2D,
    cluster_center,
    flux_count,
    grid_strong_limit,
    landau_hamiltonian,
    low_spectrum,
)
from .bridge import (
    MeasureSpec,
    QuadraticAction,
    calibrate,
    estimate,
    gaussian_oracle,
    symbol_quadratic_matrix,
)
from .linalg import expm, subspace_gap
from .relations import (
    PotapovMatrix,
    compose,
    graph_of,
    is_Unn,
    is_symplectic_rel,
    ker_indef,
    limit_graph,
    make_Nb,
    potapov_inverse,
    potapov_matrix,
    potapov_relation,
    potapov_product,
    projection_derivative,
)


class ConfigError(ValueError):
    """Config failed schema validation (maps to exit status 2)."""


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float | None
    comparator: str  # "<=", ">=", "==", or "report"
    passed: bool | None  # None for report-only rows

    @staticmethod
    def le(name: str, value: float, threshold: float) -> "Check":
        return Check(name, float(value), float(threshold), "<=", bool(value <= threshold))

    @staticmethod
    def ge(name: str, value: float, threshold: float) -> "Check":
        return Check(name, float(value), float(threshold), ">=", bool(value >= threshold))

    @staticmethod
    def report(name: str, value: float) -> "Check":
        return Check(name, float(value), None, "report", None)


@dataclass
class RunReport:
    experiment: str
    parameters: dict
    checks: list[Check] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.passed is not None)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "version": self.version,
            "wall_time_s": self.wall_time,
            "ok": self.ok,
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "threshold": c.threshold,
                    "comparator": c.comparator,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def _spc_unit_sample(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    return sample("sp_c", n, scale, seed)


# ---------------------------------------------------------------------------
# membership: structural identities and dissipativity <-> contraction

def run_membership(p: dict) -> RunReport:
    checks = []
    for n in p["n_list"]:
        S = make_structural(n)
        Jc = S.W @ S.J @ S.W.conj().T
        target = np.diag(np.concatenate([-1j * np.ones(n), 1j * np.ones(n)]))
        checks.append(Check.le(f"Jc_diagonal_n{n}", np.linalg.norm(Jc - target, 2), p["structural_tol"]))
        checks.append(Check.le(f"Ical_is_minus_i_Jc_n{n}", np.linalg.norm(S.Ical - (-1j) * Jc, 2), p["structural_tol"]))
        checks.append(Check.le(f"J_squared_n{n}", np.linalg.norm(S.J @ S.J + np.eye(2 * n), 2), p["structural_tol"]))
        checks.append(Check.le(f"W_unitary_n{n}", np.linalg.norm(S.W @ S.W.conj().T - np.eye(2 * n), 2), p["structural_tol"]))

    # cone test vs contraction test at six time points.  Member samples are
    # kept at norm <= 0.4 so that ||e^{10X}||^2 stays small enough for the
    # absolute psd tolerance at t = 10; non-members violate exponentially,
    # so their size costs nothing.
    n = p["n"]
    S = make_structural(n)
    ts = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    rng = np.random.default_rng(p["seed"])
    disagreements = 0
    for i in range(p["samples"]):
        if i % 2 == 0:
            X = sample("Diss", n, 0.4, p["seed"] + i)
        else:
            # push strictly outside the cone: shift along the accretive +Ical
            X = sample("Diss", n, 0.4, p["seed"] + i) + float(rng.uniform(0.15, 0.5)) * S.Ical
        in_cone = classify(X, S).flag("Diss")
        contracts = all(classify(expm(t * X), S).flag("GammaU") for t in ts)
        disagreements += int(in_cone != contracts)
    checks.append(Check.le("dissipativity_contraction_disagreements", disagreements, 0))
    return RunReport("membership", p, checks)


# ---------------------------------------------------------------------------
# decompose: Potapov-Olshanski generate-then-recover

def run_decompose(p: dict) -> RunReport:
    n = p["n"]
    S = make_structural(n)
    rng = np.random.default_rng(p["seed"])
    worst_recon = worst_recover = 0.0
    memberships_ok = True
    for i in range(p["samples"]):
        h0 = sample("Sp_c", n, float(rng.uniform(0.2, 1.0)), p["seed"] + 2 * i)
        X0 = sample("SDiss_spc", n, float(rng.uniform(0.1, 1.0)), p["seed"] + 2 * i + 1)
        g = h0 @ expm(X0)
        dec = po_decompose(g, S)
        worst_recon = max(
            worst_recon,
            np.linalg.norm(dec.h @ expm(dec.X) - g, 2) / np.linalg.norm(g, 2),
        )
        worst_recover = max(worst_recover, np.linalg.norm(dec.X - X0, 2))
        rep_h = classify(dec.h, S)
        rep_X = classify(dec.X, S)
        memberships_ok &= rep_h.flag("GammaSp_c") and rep_h.flag("U") and rep_X.flag("SDiss_spc")
    checks = [
        Check.le("reconstruction_residual", worst_recon, p["recon_tol"]),
        Check.le("generator_recovery", worst_recover, p["recover_tol"]),
        Check.ge("memberships_certified", float(memberships_ok), 1.0),
    ]
    return RunReport("decompose", p, checks)


# ---------------------------------------------------------------------------
# potapov: the explicit 2x2 limit example, the product formula, contractivity

def run_potapov(p: dict) -> RunReport:
    checks = []
    S1 = make_structural(1)

    # the diagonal one-parameter semigroup example
    X = np.diag([1.0, -1.0]).astype(complex)
    r1 = potapov_matrix(expm(1.0 * X))
    target = np.array([[0.0, np.exp(-1.0)], [np.exp(-1.0), 0.0]], dtype=complex)
    checks.append(Check.le("example_potapov_t1", np.linalg.norm(r1.r - target, 2), p["example_tol"]))

    P_lim = potapov_inverse(PotapovMatrix(np.zeros((2, 2), dtype=complex)))
    gap16 = subspace_gap(graph_of(expm(16.0 * X)).frame, P_lim.frame)
    checks.append(Check.le("example_gap_t16", gap16, p["gap_tol"]))

    ker, ind = ker_indef(P_lim)
    ker_ok = (
        ker.shape[1] == 1
        and abs(abs(ker[1, 0]) - 1.0) < 1e-12
        and ind.shape[1] == 1
        and abs(abs(ind[0, 0]) - 1.0) < 1e-12
    )
    checks.append(Check.ge("example_ker_indef_lines", float(ker_ok), 1.0))
    rep = is_Unn(P_lim, S1)
    checks.append(Check.ge("example_limit_in_semigroup", float(rep.flag and is_symplectic_rel(P_lim, S1)), 1.0))

    # product formula vs relation composition
    n = p["n"]
    worst = 0.0
    for i in range(p["pairs"]):
        g1 = sample("GammaU", n, 0.6, p["seed"] + 2 * i)
        g2 = sample("GammaU", n, 0.6, p["seed"] + 2 * i + 1)
        P1, P2 = graph_of(g1), graph_of(g2)
        lhs = potapov_relation(compose(P1, P2)).r
        rhs = potapov_product(potapov_relation(P1), potapov_relation(P2)).r
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    checks.append(Check.le("product_formula_deviation", worst, p["product_tol"]))

    # contractivity of the transform over the semigroup
    worst_norm = 0.0
    per_n = p["contraction_samples"] // len(p["contraction_n_list"])
    for nn in p["contraction_n_list"]:
        for i in range(per_n):
            g = sample("GammaU", nn, 0.8, p["seed"] + 1000 + i)
            r = potapov_relation(graph_of(g))
            worst_norm = max(worst_norm, float(np.linalg.norm(r.r, 2)))
    checks.append(Check.le("transform_operator_norm", worst_norm, 1.0 + p["norm_tol"]))
    return RunReport("potapov", p, checks)


# ---------------------------------------------------------------------------
# graph-limit: convergence to the limit relation; projection derivative

def run_graph_limit(p: dict) -> RunReport:
    m = p["m"]
    Nb = make_Nb(m)
    S = make_structural(2 * m)
    nu_list = p["nu_list"]
    worst = np.zeros(len(nu_list))
    monotone = True
    structure_ok = True
    for i in range(p["samples"]):
        A = _spc_unit_sample(2 * m, p["seed"] + i, 1.0)
        P = limit_graph(A, m)
        structure_ok &= is_Unn(P, S).flag and is_symplectic_rel(P, S)
        gaps = [
            subspace_gap(graph_of(expm(A + nu * Nb)).frame, P.frame) for nu in nu_list
        ]
        monotone &= all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
        worst = np.maximum(worst, gaps)
    checks = [
        Check.ge("limit_in_semigroup", float(structure_ok), 1.0),
        Check.ge("gap_monotone_decreasing", float(monotone), 1.0),
        # the stated e^{-nu}-rate threshold; the true rate is ||A||/nu, so
        # this check documents the gap to the stated tolerance honestly
        Check.le("final_gap", worst[-1], p["gap_threshold"]),
    ]
    for nu, g in zip(nu_list, worst):
        checks.append(Check.report(f"gap_nu{nu:g}", g))

    eps = p["fd_epsilon"]
    worst_rel = 0.0
    rng = np.random.default_rng(p["seed"])
    for _ in range(p["fd_samples"]):
        A = rng.normal(size=(4 * m, 4 * m)) + 1j * rng.normal(size=(4 * m, 4 * m))
        A /= np.linalg.norm(A, 2)
        closed = projection_derivative(A, m)
        fd = (_cluster_projector(eps * A - Nb) - _cluster_projector(-eps * A - Nb)) / (2 * eps)
        worst_rel = max(worst_rel, np.linalg.norm(fd - closed, 2) / np.linalg.norm(closed, 2))
    checks.append(Check.le("projection_derivative_fd", worst_rel, p["fd_tol"]))
    return RunReport("graph-limit", p, checks)


def _cluster_projector(M: np.ndarray, radius: float = 0.5) -> np.ndarray:
    w, V = np.linalg.eig(M)
    sel = np.abs(w) < radius
    Vi = np.linalg.inv(V)
    return V[:, sel] @ Vi[sel, :]


# ---------------------------------------------------------------------------
# fock-limit: operator lemma, strong limit, antinormal identities,
# resolution of identity, cutoff convergence

def run_fock_limit(p: dict) -> RunReport:
    checks = []

    # two-route operator identity on the safe band
    space = FockSpace(1, p["lemma_cutoff"])
    Pband = band_projector(space, p["lemma_cutoff"] - 3)
    worst = 0.0
    for i in range(p["lemma_samples"]):
        sym = HamiltonianSymbol(1, _spc_unit_sample(1, p["seed"] + i, 1.0))
        lhs = h_A_operator(space, sym)
        rhs = drho(space, hat_lift(sym))
        worst = max(worst, float(np.linalg.norm((lhs - rhs) @ Pband, 2)))
    checks.append(Check.le("symbol_equals_lifted_generator", worst, p["lemma_tol"]))

    # strong limit residual table
    sl_space = FockSpace(1, p["strong_cutoff"])
    sym = HamiltonianSymbol(1, _spc_unit_sample(1, p["seed"] + 101, p["strong_norm"]))
    vectors = [
        vacuum_state(sl_space),
        coherent(sl_space, [0.5]).vec,
        basis_state(sl_space, (1, 0)),
    ]
    table = strong_limit_run(sl_space, sym, p["strong_nu_list"], vectors)
    finals = table[-1][1]
    residuals = np.array([row[1] for row in table])
    monotone = bool(np.all(residuals[1:] <= residuals[:-1] + 1e-12))
    checks.append(Check.ge("strong_limit_monotone", float(monotone), 1.0))
    # stated threshold; the honest rate is ||A||/nu (see ledger), reported as-is
    checks.append(Check.le("strong_limit_final_residual", max(finals), p["strong_tol"]))

    # antinormal monomial identities, exact on the safe band
    an_space = FockSpace(1, p["antinormal_cutoff"])
    Z = z_ops(an_space)[0]
    Zc = Z.conj().T
    a = annihilator(an_space, 1)
    ac = creator(an_space, 1)
    _, _, E_b = number_ops(an_space)
    Psafe = band_projector(an_space, p["antinormal_cutoff"] - 5)
    worst = 0.0
    for pp in range(4):
        for qq in range(4 - pp):
            lhs = E_b @ np.linalg.matrix_power(Z, pp) @ np.linalg.matrix_power(Zc, qq) @ E_b
            rhs = np.linalg.matrix_power(a, qq) @ np.linalg.matrix_power(ac, pp) @ E_b
            worst = max(worst, float(np.linalg.norm((lhs - rhs) @ Psafe, 2)))
    checks.append(Check.le("antinormal_word_identity", worst, p["antinormal_tol"]))

    # quadrature quantization of monomials vs compressed operator words
    q_space = FockSpace(1, p["quad_cutoff"])
    Zq = z_ops(q_space)[0]
    Zqc = Zq.conj().T
    _, _, Ebq = number_ops(q_space)
    P3 = band_projector(q_space, 3, modes=[1]) @ Ebq
    worst = 0.0
    for pp in range(3):
        for qq in range(3 - pp):
            Q = quantize_integral(
                q_space, lambda z: z**pp * np.conj(z) ** qq, p["quad_radius"], p["quad_grid"]
            )
            ref = Ebq @ np.linalg.matrix_power(Zq, qq) @ np.linalg.matrix_power(Zqc, pp) @ Ebq
            worst = max(worst, float(np.linalg.norm(P3 @ (Q - ref) @ P3, 2)))
    checks.append(Check.le("quadrature_monomials", worst, p["quad_tol"]))

    # resolution of identity
    res = resolution_check(q_space, p["quad_radius"], p["quad_grid"])
    checks.append(Check.le("resolution_of_identity", res, p["quad_tol"]))

    # cutoff-Hamiltonian convergence of the vacuum expectation
    ve_space = FockSpace(1, p["cutoff_cutoff"])
    sym2 = HamiltonianSymbol(1, _spc_unit_sample(1, p["seed"] + 202, p["cutoff_norm"]))
    v_uncut = vacuum_expectation(ve_space, sym2, None)
    checks.append(Check.le("vacuum_expectation_modulus", abs(v_uncut), 1.0 + 1e-9))
    devs = []
    for tau in p["tau_list"]:
        v = vacuum_expectation(ve_space, sym2, float(tau))
        devs.append(abs(v - v_uncut))
    checks.append(Check.le("cutoff_convergence_final", devs[-1], p["cutoff_tol"]))
    checks.append(Check.report("cutoff_convergence_first", devs[0]))
    return RunReport("fock-limit", p, checks)


# ---------------------------------------------------------------------------
# landau: Landau levels of the discretized magnetic Laplacian

def run_landau(p: dict) -> RunReport:
    grid = Grid2D(p["half_width"], p["spacing"])
    H = landau_hamiltonian(grid)
    vals = low_spectrum(H, k=p["eig_count"])
    checks = [
        Check.le("ground_level_offset", abs(vals[0]), p["ground_tol"]),
        Check.le("first_excited_cluster_offset", abs(cluster_center(vals, 1.0) - 1.0), p["cluster_tol"]),
        Check.ge("spectrum_reaches_past_gap", float(vals.max() > 0.5), 1.0),
    ]
    checks.append(Check.report("states_below_half", float(np.sum(vals < 0.5))))
    checks.append(Check.report("flux_count", flux_count(grid)))

    if p.get("strong_limit_nu_list"):
        sgrid = Grid2D(p["strong_limit_half_width"], p["strong_limit_spacing"])
        sym = HamiltonianSymbol(1, _spc_unit_sample(1, p["seed"], p["strong_limit_norm"]))
        rows = grid_strong_limit(sgrid, sym, p["strong_limit_nu_list"])
        for nu, dev in rows:
            checks.append(Check.report(f"grid_strong_limit_dev_nu{nu:g}", dev))
    return RunReport("landau", p, checks)


# ---------------------------------------------------------------------------
# pathint: Monte Carlo engine vs the Gaussian determinant oracle

def run_pathint(p: dict) -> RunReport:
    checks = []
    sym = HamiltonianSymbol(1, _spc_unit_sample(1, p["seed"] + 77, p["symbol_norm"]))
    hmat = symbol_quadratic_matrix(sym)
    for nu in p["nu_list"]:
        for label, s, q in (
            ("area", None, QuadraticAction()),
            ("quadratic", sym, QuadraticAction(hmatrix=hmat)),
        ):
            spec = MeasureSpec(nu=float(nu), steps=p["steps"], seed=p["seed"])
            scale = float(np.exp(spec.nu * spec.m))
            oracle = scale * gaussian_oracle(spec, q)
            rep = estimate(spec, sym=s, tau=None, samples=p["samples"], threads=p.get("threads", 1))
            dev = abs(rep.mean - oracle)
            checks.append(
                Check.le(f"mc_vs_oracle_{label}_nu{nu:g}_in_stderr", dev / rep.stderr, 3.0)
            )
            checks.append(Check.report(f"mc_stderr_{label}_nu{nu:g}", rep.stderr))
        spec1 = MeasureSpec(nu=float(nu), steps=p["steps"], seed=p["seed"])
        spec2 = MeasureSpec(nu=float(nu), steps=2 * p["steps"], seed=p["seed"])
        v1 = gaussian_oracle(spec1, QuadraticAction(hmatrix=hmat))
        v2 = gaussian_oracle(spec2, QuadraticAction(hmatrix=hmat))
        # stated refinement tolerance; the honest discretization error is
        # Theta(nu^2/steps) (see ledger), reported as-is
        checks.append(Check.le(f"oracle_refinement_nu{nu:g}", abs(v1 - v2) / abs(v2), p["refinement_tol"]))
    return RunReport("pathint", p, checks)


# ---------------------------------------------------------------------------
# calibrate: reference-measure normalization study (report-only)

def run_calibrate(p: dict) -> RunReport:
    table = calibrate(
        p["nu_list"], p["rules"], p["steps"], p["samples"], p["seed"], m=p.get("m", 1)
    )
    table2 = calibrate(
        p["nu_list"], p["rules"], p["steps"], p["samples"], p["seed"], m=p.get("m", 1)
    )
    deterministic = all(
        r1["oracle"] == r2["oracle"] and r1.get("mc_mean") == r2.get("mc_mean")
        for r1, r2 in zip(table["rows"], table2["rows"])
    )
    checks = [Check.ge("table_deterministic", float(deterministic), 1.0)]
    for row in table["rows"]:
        checks.append(
            Check.report(f"oracle_{row['rule']}_nu{row['nu']:g}", abs(row["oracle"]))
        )
        checks.append(
            Check.report(f"dev_from_one_{row['rule']}_nu{row['nu']:g}", row["abs_dev_from_one"])
        )
    # closed form for the time-rescaled rule: 2 nu / (1 - e^{-2 nu}) per m.
    # The discrete-area error grows like nu^2/steps, so the continuum law is
    # checked at the smallest nu, where the discretization is well resolved.
    min_nu = min(p["nu_list"])
    spec = MeasureSpec(nu=float(min_nu), steps=p["steps"], seed=p["seed"], variance_rule="nu")
    oracle = float(np.exp(min_nu)) * gaussian_oracle(spec, QuadraticAction())
    closed = 2 * min_nu / (1 - np.exp(-2 * min_nu))
    checks.append(Check.le("closed_form_cross_check", abs(abs(oracle) - closed) / closed, p["closed_form_tol"]))
    any_near_one = any(table["near_one_at_max_nu"].values())
    checks.append(Check.report("any_rule_near_one", float(any_near_one)))
    return RunReport("calibrate", p, checks)


# ---------------------------------------------------------------------------
# registry and config validation

@dataclass(frozen=True)
class ExperimentDef:
    runner: object
    topic: str
    required: tuple
    defaults: dict


EXPERIMENTS: dict[str, ExperimentDef] = {
    "membership": ExperimentDef(
        run_membership,
        "structural matrices and the dissipative-cone / contraction-semigroup equivalence",
        ("seed",),
        {
            "n_list": [1, 2, 3],
            "n": 2,
            "samples": 200,
            "structural_tol": 1e-14,
        },
    ),
    "decompose": ExperimentDef(
        run_decompose,
        "unitary-times-dissipative factorization of semigroup elements",
        ("seed",),
        {"n": 2, "samples": 200, "recon_tol": 1e-9, "recover_tol": 1e-7},
    ),
    "potapov": ExperimentDef(
        run_potapov,
        "graph transform of contraction relations: explicit limit, product formula, norm bound",
        ("seed",),
        {
            "n": 2,
            "pairs": 100,
            "contraction_samples": 500,
            "contraction_n_list": [1, 2],
            "example_tol": 1e-12,
            "gap_tol": 1e-6,
            "product_tol": 1e-9,
            "norm_tol": 1e-10,
        },
    ),
    "graph-limit": ExperimentDef(
        run_graph_limit,
        "Grassmannian limits of one-parameter contraction families and the cluster-projector derivative",
        ("seed",),
        {
            "m": 1,
            "samples": 50,
            "nu_list": list(range(4, 17)),
            "gap_threshold": 1e-6,
            "fd_samples": 50,
            "fd_epsilon": 1e-5,
            "fd_tol": 1e-3,
        },
    ),
    "fock-limit": ExperimentDef(
        run_fock_limit,
        "truncated-Fock quantization: operator lemma, strong limits, antinormal identities, coherent resolution",
        ("seed",),
        {
            "lemma_cutoff": 10,
            "lemma_samples": 50,
            "lemma_tol": 1e-10,
            "strong_cutoff": 14,
            "strong_norm": 1.0,
            "strong_nu_list": [4, 5, 6, 7, 8, 9, 10, 11, 12],
            "strong_tol": 5e-3,
            "antinormal_cutoff": 10,
            "antinormal_tol": 1e-12,
            "quad_cutoff": 12,
            "quad_radius": 6.0,
            "quad_grid": 200,
            "quad_tol": 1e-3,
            "cutoff_cutoff": 16,
            "cutoff_norm": 0.5,
            "tau_list": [4, 8, 16],
            "cutoff_tol": 1e-3,
        },
    ),
    "landau": ExperimentDef(
        run_landau,
        "Landau levels of the gauge-covariant lattice Laplacian",
        (),
        {
            "half_width": 8.0,
            "spacing": 0.125,
            "eig_count": 120,
            "ground_tol": 0.02,
            "cluster_tol": 0.05,
            "seed": 0,
            "strong_limit_nu_list": [2, 4, 8],
            "strong_limit_half_width": 6.0,
            "strong_limit_spacing": 0.25,
            "strong_limit_norm": 0.3,
        },
    ),
    "pathint": ExperimentDef(
        run_pathint,
        "oscillatory path-integral Monte Carlo vs the exact Gaussian determinant",
        ("seed",),
        {
            "nu_list": [1, 2, 4],
            "steps": 256,
            "samples": 200000,
            "symbol_norm": 0.25,
            "refinement_tol": 1e-3,
            "threads": 1,
        },
    ),
    "calibrate": ExperimentDef(
        run_calibrate,
        "reference-measure normalization study for the scaled loop estimator",
        ("seed",),
        {
            "nu_list": [1, 2, 4, 8],
            "rules": ["nu", "nu_half", "two_nu", "nu_plus_log"],
            "steps": 256,
            "samples": 20000,
            "m": 1,
            "closed_form_tol": 5e-3,
        },
    ),
}


def validate_config(config: dict) -> tuple[str, dict]:
    """Validate a config dict against the experiment schema; returns the tag
    and the parameter dict with defaults filled in."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    unknown_top = set(config) - {"experiment", "parameters"}
    if unknown_top:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown_top)}")
    tag = config.get("experiment")
    if tag not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {tag!r}; known tags: {sorted(EXPERIMENTS)}"
        )
    spec = EXPERIMENTS[tag]
    params = config.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("parameters must be an object")
    for key in spec.required:
        if key not in params:
            raise ConfigError(f"experiment {tag!r} requires parameter {key!r}")
    unknown = set(params) - set(spec.defaults) - set(spec.required)
    if unknown:
        raise ConfigError(f"unknown parameters for {tag!r}: {sorted(unknown)}")
    filled = dict(spec.defaults)
    filled.update(params)
    return tag, filled


def run_experiment(config: dict) -> RunReport:
    tag, params = validate_config(config)
    t0 = time.time()
    report = EXPERIMENTS[tag].runner(params)
    report.wall_time = time.time() - t0
    return report
