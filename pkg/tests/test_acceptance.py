"""Acceptance criteria 1-10, with the pinned tolerances."""
import itertools
import math
import statistics
import subprocess
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from spanq.catalog import GRAPHS, build_and, build_or, build_stconn, catalog_program
from spanq.func_eval import EvalConfig, PhaseCheckTable, check_phase_bound, evaluate, exact_error_probability
from spanq.linalg import eig_unitary, reflection
from spanq.state_conversion import conversion_bounds, convert, cvs_from_span_program, mu_nu, normalize_cvs
from spanq.span_program import (
    decided_function,
    max_witness_size,
    negate,
    scale_normalize,
    witness,
    witness_table,
)

ROOT = Path(__file__).resolve().parents[1]

CATALOG = [f"or{n}" for n in range(1, 9)] + [f"and{n}" for n in range(1, 5)] + [f"st:{g}" for g in GRAPHS]


def seeded(*key):
    return np.random.default_rng(np.random.SeedSequence([2024, *key]))


def nx_resistance(g, x) -> float:
    G = nx.Graph()
    G.add_nodes_from(range(g.vertices))
    for u, v in g.present(x):
        w = G.edges[u, v]["weight"] + 1 if G.has_edge(u, v) else 1
        G.add_edge(u, v, weight=w)
    if not nx.has_path(G, g.s, g.t):
        return math.inf
    comp = G.subgraph(nx.node_connected_component(G, g.s)).copy()
    return nx.resistance_distance(comp, g.s, g.t, weight="weight", invert_weight=False)


@pytest.mark.acceptance(1, "witness sizes match 1/M and effective resistance within 1e-6")
def test_c1_witness_oracles(note):
    start = time.perf_counter()
    checked, worst = 0, 0.0
    for n in range(1, 9):
        for x, w in witness_table(build_or(n)).items():
            M = sum(x)
            if M:
                assert w.positive
                worst = max(worst, abs(w.size - 1 / M))
                checked += 1
            else:
                assert not w.positive
    for name, g in GRAPHS.items():
        assert g.vertices <= 6
        for x, w in witness_table(build_stconn(g)).items():
            R = nx_resistance(g, x)
            assert w.positive == math.isfinite(R)
            if w.positive:
                worst = max(worst, abs(w.size - R))
                checked += 1
    elapsed = time.perf_counter() - start
    note(f"{checked} positive inputs, max deviation {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-6
    assert elapsed < 60


@pytest.mark.acceptance(2, "negation decides the complement without larger witnesses")
@pytest.mark.parametrize("name", CATALOG)
def test_c2_negation(name):
    P = catalog_program(name)
    f = decided_function(P)
    t, td = witness_table(P), witness_table(negate(P))
    for x in f:
        assert td[x].positive == (f[x] == 0)
        assert td[x].size <= t[x].size + 1e-8


@pytest.mark.acceptance(3, "phase checking bounds: <= 1/3 on negatives, >= 2/3 once alpha^2 >= 3w")
@pytest.mark.parametrize("name", CATALOG)
def test_c3_phase_bounds(name, note):
    P = scale_normalize(catalog_program(name))
    W = max_witness_size(P)
    worst_neg, worst_pos = 0.0, 1.0
    for x, fx in decided_function(P).items():
        applied = False
        for alpha in (1.0, 2.0, 4.0, 8.0, 16.0):
            chk = check_phase_bound(P, x, alpha, W)
            if fx == 0:
                assert chk.bound == pytest.approx(1 / 3)
                assert chk.probability <= 1 / 3
                worst_neg = max(worst_neg, chk.probability)
            elif chk.applies:
                applied = True
                assert chk.probability >= 2 / 3
                worst_pos = min(worst_pos, chk.probability)
        assert applied or fx == 0
    if name in ("or8", "st:prism6"):
        note(f"{name}: max negative probability {worst_neg:.3g}, min applicable positive {worst_pos:.3g}")


C4_INSTANCES = ["or2", "or4", "and3", "st:st2", "st:path4", "st:diamond"]


@pytest.mark.acceptance(4, "doubling algorithm error <= 3 delta over 200 seeded trials")
@pytest.mark.parametrize("delta", [0.05, 0.1])
@pytest.mark.parametrize("name", C4_INSTANCES)
def test_c4_statistical_correctness(name, delta, note):
    P = scale_normalize(catalog_program(name))
    Pd = negate(P)
    W = max_witness_size(P)
    f = decided_function(P)
    table = PhaseCheckTable(P, Pd, W)
    cfg = EvalConfig(delta=delta)
    s = C4_INSTANCES.index(name)
    errors, runs, worst_x = 0, 0, 0.0
    for i, x in enumerate(sorted(f)):
        wrong = sum(
            evaluate(P, Pd, W, x, cfg, seeded(4, s, int(delta * 100), i, k), table).output_bit != f[x]
            for k in range(200)
        )
        errors += wrong
        runs += 200
        worst_x = max(worst_x, wrong / 200)
        assert exact_error_probability(table, x, f[x], delta) <= 3 * delta
    rate = errors / runs
    note(f"{name} delta={delta}: error rate {rate:.4f} over {runs} runs, worst input {worst_x:.3f}")
    assert rate <= 3 * delta


@pytest.mark.acceptance(5, "OR_8 queries fall with M and track sqrt(w W) within a factor 8")
def test_c5_or8_speedup(note):
    P = scale_normalize(build_or(8))
    Pd = negate(P)
    W = max_witness_size(P)
    table = PhaseCheckTable(P, Pd, W)
    cfg = EvalConfig(delta=0.1)
    medians, ratios = {}, {}
    for M in (1, 2, 4, 8):
        x = (1,) * M + (0,) * (8 - M)
        runs = [evaluate(P, Pd, W, x, cfg, seeded(5, M, k), table) for k in range(200)]
        assert all(r.output_bit == 1 for r in runs)
        medians[M] = statistics.median(r.ledger.total_queries for r in runs)
        ratios[M] = medians[M] / math.sqrt(witness(P, x).size * W)
    spread = max(ratios.values()) / min(ratios.values())
    note("median queries " + ", ".join(f"M={M}: {q:g}" for M, q in medians.items()) + f"; ratio spread {spread:.2f}")
    assert medians[8] < medians[1]
    assert spread <= 8


def random_projector(dim, rank, rng):
    Z = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    Q, _ = np.linalg.qr(Z)
    return Q @ Q.conj().T


@pytest.mark.acceptance(6, "effective spectral gap: |P_Theta Pi w| <= (Theta/2)|w| + 1e-8")
def test_c6_spectral_gap(note):
    rng = seeded(6)
    violations, tightest, count = 0, 0.0, 0
    for _ in range(100):
        dim = int(rng.integers(2, 13))
        Pi = random_projector(dim, int(rng.integers(1, dim)), rng)
        Lam = random_projector(dim, int(rng.integers(1, dim)), rng)
        w = (np.eye(dim) - Lam) @ (rng.normal(size=dim) + 1j * rng.normal(size=dim))
        assert np.linalg.norm(Lam @ w) <= 1e-10
        U = reflection(Pi) @ reflection(Lam)
        es = eig_unitary(U)
        # second route: |phase| <= Theta iff the Hermitian part's eigenvalue cos(phase) >= cos(Theta)
        vals, vecs = np.linalg.eigh((U + U.conj().T) / 2)
        for theta in (0.1, 0.3, 1.0):
            bound = theta / 2 * np.linalg.norm(w) + 1e-8
            for proj in (es.low_phase_projector(theta), vecs[:, vals >= math.cos(theta)] @ vecs[:, vals >= math.cos(theta)].conj().T):
                lhs = np.linalg.norm(proj @ Pi @ w)
                violations += lhs > bound
                tightest = max(tightest, lhs / bound)
            count += 1
    note(f"{count} (instance, Theta) pairs, {violations} violations, max lhs/bound {tightest:.3f}")
    assert violations == 0


@pytest.mark.acceptance(7, "<mu_i|nu_j> = q/(2(q-1)) (1 - delta_ij) within 1e-12")
@pytest.mark.parametrize("q", [2, 3, 5])
def test_c7_mu_nu(q):
    mu, nu = mu_nu(q)
    for i, j in itertools.product(range(q), repeat=2):
        expect = 0.0 if i == j else q / (2 * (q - 1))
        assert abs(np.vdot(mu[i], nu[j]) - expect) <= 1e-12


@pytest.mark.acceptance(8, "conversion bounds (a)-(d) hold wherever their hypotheses do")
@pytest.mark.parametrize("name", ["or2", "st:st2"])
@pytest.mark.parametrize("eps_hat", [0.04, 0.01])
def test_c8_conversion_bounds(name, eps_hat, note):
    cvs, gp = cvs_from_span_program(catalog_program(name))
    cvs = normalize_cvs(cvs)
    status = {}
    for x in cvs.X:
        for alpha in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
            for b in conversion_bounds(cvs, gp, x, alpha, eps_hat):
                status.setdefault(b.name, []).append(b.status)
                assert b.status != "fail", (x, alpha, b)
    for name_ in "abcd":
        assert "pass" in status[name_], f"check {name_} never applied"
    note(f"{name} eps_hat={eps_hat}: " + ", ".join(
        f"{k} {v.count('pass')} pass/{v.count('skipped')} skipped" for k, v in sorted(status.items())))


@pytest.mark.acceptance(9, "state conversion on OR_2: distance <= 2 eps and early stop in >= 85% of 100 trials")
@pytest.mark.parametrize("x", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_c9_convert_end_to_end(x, note):
    cvs, gp = cvs_from_span_program(build_or(2))
    cvs = normalize_cvs(cvs)
    eps, p = 0.3, 0.1
    cache = {}
    runs = [convert(cvs, gp, x, eps, p, seeded(9, *x, k), cache) for k in range(100)]
    limit = 2 * min(cvs.w_plus(x), cvs.w_minus(x))
    within_2eps = sum(r.distance <= 2 * eps for r in runs) / 100
    within_eps = sum(r.distance <= eps for r in runs) / 100
    # 1e-9 absorbs rounding in the sizes (2 * min can land a few ulps below 1)
    stopped = sum(r.alpha_stop <= limit + 1e-9 for r in runs) / 100
    note(f"x={x[0]}{x[1]}: <= 2eps {within_2eps:.2f}, <= eps {within_eps:.2f}, early stop {stopped:.2f}")
    assert within_2eps >= 0.85
    assert stopped >= 0.85


@pytest.mark.acceptance(10, "identical seeds give byte-identical CSV")
@pytest.mark.parametrize("command,config", [("evaluate", "evaluate_catalog.json"), ("convert", "convert_or2.json")])
def test_c10_determinism(command, config, tmp_path):
    outputs = []
    for run in range(2):
        out = tmp_path / f"run{run}.csv"
        subprocess.run(
            [sys.executable, "-m", "spanq.cli", command, str(ROOT / "configs" / config),
             "--out", str(out), "--trials", "5"],
            check=True, capture_output=True,
        )
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0].count(b"\n") > 1
