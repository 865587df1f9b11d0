import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchlearn.core import TrainingExample, evaluate_regret, construct, regret, relearn, resolve
from branchlearn.problems.knapsack import KNAPSACK, KnapsackInstance
from branchlearn.problems.mcvc import MCVC, McvcInstance
from branchlearn.pwl import Interval, Piece, PwlFunction, argmin_piecewise, representative
from branchlearn.trainer import TrainConfig, coordinate_descent, holdout_regrets, nearest_minimizer, predict

KS = KnapsackInstance.root([3, 4, 5, 2, 6, 1], 10)


def noisy_data(rng, n, t=6, m=3, noise=2.0):
    alpha = rng.uniform(0.5, 2.0, m)
    out = []
    for _ in range(n):
        a = rng.uniform(0, 5, (t, m))
        out.append(TrainingExample(a, np.maximum(a @ alpha + rng.normal(0, noise, t), 0.0)))
    return out


def linear_data(rng, n, alpha, t=6):
    out = []
    for _ in range(n):
        a = rng.uniform(0, 10, (t, len(alpha)))
        out.append(TrainingExample(a, a @ alpha))
    return out


def test_predict_examples():
    assert predict([5], [[1]]).tolist() == [5]
    assert predict([1, 2], [[3, 4]]).tolist() == [11]
    assert predict([1, -2], [[3, 4]], nonnegative=True).tolist() == [0]
    with pytest.raises(ValueError):
        predict([1, 2, 3], [[3, 4]])


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(tol=0)
    with pytest.raises(ValueError):
        TrainConfig(init="ones")
    with pytest.raises(ValueError):
        TrainConfig(step="largest")


def test_linear_ground_truth_reaches_zero():
    rng = np.random.default_rng(0)
    alpha_star = np.array([1.0, 2.0, 0.5])
    data = linear_data(rng, 30, alpha_star)
    assert sum(regret(KNAPSACK, predict(alpha_star, ex.features), ex.truth, KS) for ex in data) == 0
    report = coordinate_descent(KNAPSACK, KS, data[:20])
    assert report.total_regret_trace[-1] <= 1e-6
    theta_hat = predict(report.alpha, data[25].features)
    assert np.allclose(theta_hat, data[25].truth)
    assert max(holdout_regrets(KNAPSACK, KS, data[20:], report.alpha)[0]) <= 1e-6


def test_zero_budget_returns_initial_alpha():
    rng = np.random.default_rng(1)
    data = noisy_data(rng, 5)
    report = coordinate_descent(KNAPSACK, KS, data, TrainConfig(time_budget=0.0), alpha0=np.array([1.0, 2.0, 3.0]))
    assert report.alpha.tolist() == [1, 2, 3] and report.epochs_run == 0 and not report.total_regret_trace


def test_single_coordinate_moves_into_zero_regret_interval():
    inst = KnapsackInstance.root([1, 1], 1)
    ex = TrainingExample(np.array([[2.0], [1.0]]), np.array([5.0, 3.0]))
    inst_g, dom = construct(KNAPSACK, inst, ex, np.array([0.0]), 0)
    _, opt = resolve(KNAPSACK, inst, ex.truth)
    loss = evaluate_regret(relearn(KNAPSACK, inst_g, dom), opt, KNAPSACK.sense)
    zero = next(p for p in loss if p.intercept == 0)
    report = coordinate_descent(KNAPSACK, inst, [ex], TrainConfig(step="midpoint"), alpha0=np.array([-5.0]))
    assert report.alpha[0] == representative(zero.lo, zero.hi)
    assert report.total_regret_trace[-1] == 0


def test_nearest_minimizer():
    f = PwlFunction(Interval(0, 20), [Piece(0, 2, 0, 1, 1), Piece(2, 5, 0, 3, 3), Piece(5, 20, 0, 1, 1)])
    assert nearest_minimizer(f, 1.5) == 1.5
    assert nearest_minimizer(f, 4.0) == 5.0 + 1.0
    assert nearest_minimizer(f, 2.5) == pytest.approx(2 - 0.2)
    assert argmin_piecewise(f)[0] == 1.0


def test_round_robin_and_determinism():
    rng = np.random.default_rng(2)
    data = noisy_data(rng, 10)
    cfg = TrainConfig(max_epochs=3, tol=1e-12)
    a = coordinate_descent(KNAPSACK, KS, data, cfg)
    b = coordinate_descent(KNAPSACK, KS, data, cfg)
    assert a.coordinates == [k % 3 for k in range(len(a.coordinates))]
    assert a.alpha.tolist() == b.alpha.tolist()
    assert a.total_regret_trace == b.total_regret_trace


def test_random_init_is_seeded():
    rng = np.random.default_rng(3)
    data = noisy_data(rng, 6)
    runs = [coordinate_descent(KNAPSACK, KS, data, TrainConfig(init="random", seed=s)) for s in (4, 4, 5)]
    assert runs[0].alpha.tolist() == runs[1].alpha.tolist()
    assert runs[0].initial_regret != runs[2].initial_regret or runs[0].alpha.tolist() != runs[2].alpha.tolist()


def test_all_examples_skipped_warns():
    inst = KnapsackInstance.root([1], 1)
    ex = TrainingExample(np.array([[0.0, -1.0]]), np.array([1.0]))
    report = coordinate_descent(KNAPSACK, inst, [ex], TrainConfig(max_epochs=1), alpha0=np.array([0.0, 1.0]))
    assert report.warnings and "coordinate 0" in report.warnings[0]
    assert report.skipped_examples >= 1
    assert report.alpha[1] < 0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        coordinate_descent(KNAPSACK, KS, [])
    data = [TrainingExample(np.ones((6, 2)), np.ones(6)), TrainingExample(np.ones((6, 3)), np.ones(6))]
    with pytest.raises(ValueError):
        coordinate_descent(KNAPSACK, KS, data)
    with pytest.raises(ValueError):
        coordinate_descent(KNAPSACK, [KS], noisy_data(np.random.default_rng(0), 2))


def test_per_example_instances():
    rng = np.random.default_rng(4)
    data = noisy_data(rng, 6)
    insts = [KnapsackInstance.root(rng.integers(1, 6, 6).astype(float), 8.0) for _ in data]
    report = coordinate_descent(KNAPSACK, insts, data)
    assert len(holdout_regrets(KNAPSACK, insts, data, report.alpha)[0]) == 6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["least_squares", "zeros", "random"]), st.sampled_from(["nearest", "midpoint"]))
def test_trace_never_increases(seed, init, step):
    rng = np.random.default_rng(seed)
    data = noisy_data(rng, 8, noise=4.0)
    report = coordinate_descent(KNAPSACK, KS, data, TrainConfig(init=init, step=step, seed=seed, tol=1e-12))
    trace = report.total_regret_trace
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_mcvc_training_improves_on_start():
    rng = np.random.default_rng(5)
    inst = McvcInstance.root(4, [(0, 1), (1, 2), (2, 3)])
    data = noisy_data(rng, 10, t=4, noise=5.0)
    report = coordinate_descent(MCVC, inst, data)
    assert report.total_regret_trace[-1] <= report.initial_regret + 1e-9


def test_nearest_minimizer_from_left_breakpoint():
    f = PwlFunction(Interval(-math.inf, math.inf), [Piece(-math.inf, 3, 0, 2, 2), Piece(3, math.inf, 0, 1, 1)])
    assert nearest_minimizer(f, 3.0) == 4.0
    assert nearest_minimizer(f, 0.0) == 4.0
    assert nearest_minimizer(f, 10.0) == 10.0
