"""Acceptance suite: one test and one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

from branchlearn.core import TrainingExample, resolve
from branchlearn.experiment import ExperimentConfig, render_report, run_experiment, summarize
from branchlearn.problems.knapsack import KNAPSACK, KnapsackInstance, brute_ks, resolve_ks
from branchlearn.problems.mcfp import MCFP, McfpInstance, brute_mcfp, resolve_mcfp
from branchlearn.problems.mcvc import MCVC, McvcInstance, brute_mcvc, resolve_mcvc
from branchlearn.problems.spp import SPP, SppInstance, brute_spp, resolve_spp
from branchlearn.pwl import combine
from branchlearn.trainer import TrainConfig, coordinate_descent

from conftest import UNIT, check_consistency, random_line, random_pwl


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail

    return emit


def _pairs(n, directed):
    if directed:
        return [(u, v) for u in range(n) for v in range(n) if u != v]
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def _subset(rng, pairs, p):
    return [e for e in pairs if rng.random() < p]


def _flow_network(rng, max_edges=6):
    n = int(rng.integers(2, 6))
    edges = []
    for i in rng.permutation(len(_pairs(n, True))):
        e = _pairs(n, True)[i]
        if len(edges) < max_edges and (e[1], e[0]) not in edges and rng.random() < 0.6:
            edges.append(e)
    return n, edges


def test_criterion_1_oracle_equivalence(verdict):
    rng = np.random.default_rng(101)
    started = time.perf_counter()
    bad = []
    for i in range(1000):
        n = int(rng.integers(0, 13))
        p, c = rng.integers(0, 30, n), rng.integers(1, 10, n)
        w = int(rng.integers(0, 40))
        if resolve_ks(c, w, p)[1] != brute_ks(p, c, w):
            bad.append(("ks", i))
    for i in range(500):
        n = int(rng.integers(2, 9))
        edges = _subset(rng, _pairs(n, True), rng.uniform(0.1, 0.6))
        costs = rng.integers(0, 20, len(edges))
        s, t = (int(x) for x in rng.integers(0, n, 2))
        if resolve_spp(n, edges, costs, s, t)[1] != brute_spp(n, edges, costs, s, t):
            bad.append(("spp", i))
    for i in range(200):
        n, edges = _flow_network(rng)
        inst = McfpInstance.root(n, edges, rng.integers(0, 9, len(edges)), 0, n - 1, int(rng.integers(0, 11)))
        costs = rng.integers(0, 10, len(edges))
        sol, cost = resolve_mcfp(inst, costs)
        if (cost if sol.feasible else math.inf) != brute_mcfp(inst, costs):
            bad.append(("mcfp", i))
    for i in range(500):
        n = int(rng.integers(1, 13))
        edges = _subset(rng, _pairs(n, False), rng.uniform(0.1, 0.5))
        costs = rng.integers(0, 20, n)
        if resolve_mcvc(n, edges, costs)[1] != brute_mcvc(n, edges, costs):
            bad.append(("mcvc", i))
    elapsed = time.perf_counter() - started
    verdict("1 oracle equivalence", not bad and elapsed < 300, f"{len(bad)} mismatches in 2200 instances, {elapsed:.1f}s")


def _family_instances(rng, family):
    if family == "ks":
        n = int(rng.integers(1, 9))
        return KNAPSACK, KnapsackInstance.root(rng.integers(1, 6, n).astype(float), float(rng.integers(0, 15))), n
    if family == "spp":
        n = int(rng.integers(3, 7))
        edges = _subset(rng, _pairs(n, True), 0.5) or [(0, n - 1)]
        return SPP, SppInstance.root(n, edges, 0, n - 1), len(edges)
    if family == "mcfp":
        n = int(rng.integers(3, 6))
        edges = _subset(rng, _pairs(n, False), 0.7) or [(0, n - 1)]
        caps = rng.integers(1, 10, len(edges))
        return MCFP, McfpInstance.root(n, edges, caps, 0, n - 1, int(rng.integers(1, 15))), len(edges)
    n = int(rng.integers(2, 9))
    return MCVC, McvcInstance.root(n, _subset(rng, _pairs(n, False), 0.5)), n


def test_criterion_2_relearn_resolve_consistency(verdict):
    rng = np.random.default_rng(202)
    checks = 0
    for family in ("ks", "spp", "mcfp", "mcvc"):
        for _ in range(50):
            spec, root, t = _family_instances(rng, family)
            checks += check_consistency(spec, root, rng.uniform(0, 10, t), random_line(rng, t), rng, n_gamma=100, tol=1e-6)
    verdict("2 relearn/resolve consistency", checks > 0, f"200 instances x 100 gamma, {checks} payload checks, tol 1e-6")


def test_criterion_3_pwl_algebra(verdict):
    rng = np.random.default_rng(303)
    worst, bound_ok = 0.0, True
    for _ in range(50):
        f, g = random_pwl(rng, UNIT, 6), random_pwl(rng, UNIT, 6)
        xs = rng.uniform(UNIT.lo, UNIT.hi, 1000)
        for op, ref, limit in (
            ("add", np.add, len(f) + len(g)),
            ("sub", np.subtract, len(f) + len(g)),
            ("min", np.minimum, 2 * (len(f) + len(g))),
            ("max", np.maximum, 2 * (len(f) + len(g))),
        ):
            h = combine(f, g, op)
            h.check()
            bound_ok &= len(h) <= limit
            got = np.array([h(x) for x in xs])
            want = ref(np.array([f(x) for x in xs]), np.array([g(x) for x in xs]))
            worst = max(worst, float(np.max(np.abs(got - want))))
    verdict("3 pwl algebra", worst <= 1e-9 and bound_ok, f"max pointwise error {worst:.2e}, piece bounds {'held' if bound_ok else 'violated'}")


def _training_set(rng, family):
    # redraw until every true parameter vector admits a solution
    while True:
        spec, inst, t = _family_instances(rng, family)
        alpha = rng.uniform(0.5, 2.0, 3)
        data = []
        for _ in range(6):
            a = rng.uniform(0, 5, (t, 3))
            data.append(TrainingExample(a, np.maximum(a @ alpha + rng.normal(0, 3, t), 0.0)))
        if all(math.isfinite(resolve(spec, inst, ex.truth)[1]) for ex in data):
            return spec, inst, data


def test_criterion_4_monotone_traces(verdict):
    rng = np.random.default_rng(404)
    worst = 0.0
    for family in ("ks", "spp", "mcfp", "mcvc"):
        for run in range(20):
            spec, inst, data = _training_set(rng, family)
            cfg = TrainConfig(init=("least_squares", "zeros", "random")[run % 3], seed=run, tol=1e-12)
            report = coordinate_descent(spec, inst, data, cfg)
            trace = [report.initial_regret] + report.total_regret_trace
            worst = max([worst] + [b - a for a, b in zip(trace, trace[1:])])
    verdict("4 coordinate descent monotone", worst <= 1e-9, f"80 runs, largest increase {worst:.2e}")


def test_criterion_5_exact_recovery(verdict):
    results = {}
    for problem, graph in (("ks", ""), ("spp", "polska"), ("mcvc", "polska"), ("mcfp", "polska")):
        cfg = ExperimentConfig(problem=problem, graph=graph or "polska", dataset="linear", n=20, sims=1)
        for row in run_experiment(cfg):
            results[(problem, row.method)] = row.regret
    worst = max(results.values())
    verdict("5 exact recovery", worst <= 1e-6, f"largest test regret {worst:.2e} over {len(results)} runs")


def _means(rows):
    return {s["method"]: s["regret"] for s in summarize(rows) if s["sim"] == "mean"}


def test_criterion_6_polska_mcvc(verdict):
    started = time.perf_counter()
    rows = run_experiment(ExperimentConfig(problem="mcvc", graph="polska", n=100, sims=10, seed=0))
    elapsed = time.perf_counter() - started
    m = _means(rows)
    verdict(
        "6 POLSKA MCVC B&L <= LR",
        m["bnl"] <= m["lr"] and elapsed < 1800,
        f"B&L {m['bnl']:.2f}, LR {m['lr']:.2f} over 10 simulations, {elapsed:.0f}s",
    )


def test_criterion_7_determinism(verdict):
    runs = [
        ExperimentConfig(problem="ks", n=20, sims=2, seed=7),
        ExperimentConfig(problem="spp", graph="pdh", n=20, sims=2, seed=7),
        ExperimentConfig(problem="mcvc", graph="polska", n=20, sims=1, seed=7, train=TrainConfig(init="random")),
    ]
    same = all(render_report(run_experiment(c)).encode() == render_report(run_experiment(c)).encode() for c in runs)
    verdict("7 determinism", same, "reports byte-identical on rerun")


def test_criterion_8_usanet_mcfp(verdict):
    started = time.perf_counter()
    rows = run_experiment(ExperimentConfig(problem="mcfp", graph="usanet", n=100, sims=5, seed=0))
    elapsed = time.perf_counter() - started
    m = _means(rows)
    nonneg = all(r.regret >= 0 for r in rows)
    verdict(
        "8 USANet MCFP B&L <= LR",
        nonneg and m["bnl"] <= m["lr"] and elapsed < 1800 and len(rows) == 10,
        f"B&L {m['bnl']:.2f}, LR {m['lr']:.2f}, all regrets >= 0: {nonneg}, {elapsed:.0f}s",
    )
