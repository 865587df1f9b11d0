"""Coordinate descent on the total training regret of a linear predictor."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baseline import fit_least_squares
from .core import (
    EmptyDomain,
    ProblemSpec,
    TrainingExample,
    construct,
    evaluate_regret,
    regret,
    relearn,
    resolve,
)
from .pwl import INF, PwlFunction, argmin_piecewise, simplify, sum_functions

log = logging.getLogger(__name__)

INITS = ("least_squares", "zeros", "random")
STEPS = ("nearest", "midpoint")


@dataclass
class TrainConfig:
    max_epochs: int = 5
    tol: float = 1e-6
    big_m: float = 1e12
    init: str = "least_squares"
    seed: int = 0
    time_budget: float | None = None
    step: str = "nearest"

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")
        if self.step not in STEPS:
            raise ValueError(f"step must be one of {STEPS}")


@dataclass
class TrainReport:
    alpha: np.ndarray
    total_regret_trace: list[float] = field(default_factory=list)
    epochs_run: int = 0
    skipped_examples: int = 0
    initial_regret: float = math.nan
    coordinates: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def predict(alpha, features, nonnegative: bool = False) -> np.ndarray:
    """Estimated parameters ``features @ alpha``, optionally clamped at 0."""
    features = np.asarray(features, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if features.ndim != 2 or features.shape[1] != alpha.shape[0]:
        raise ValueError(f"features of shape {features.shape} do not match {alpha.shape[0]} coefficients")
    theta = features @ alpha
    if nonnegative and (theta < 0).any():
        log.debug("clamping %d negative predictions to 0", int((theta < 0).sum()))
        theta = np.maximum(theta, 0.0)
    return theta


def _per_example(instances, n: int) -> list:
    if isinstance(instances, (list, tuple)):
        if len(instances) != n:
            raise ValueError("need one instance per training example")
        return list(instances)
    return [instances] * n


def _objective(spec, inst, example, alpha, true_opt, big_m) -> float:
    theta_hat = predict(alpha, example.features)
    if spec.nonnegative and (theta_hat < 0).any():
        return big_m
    return regret(spec, theta_hat, example.truth, inst)


def _initial_alpha(data, cfg: TrainConfig) -> np.ndarray:
    m = data[0].features.shape[1]
    if cfg.init == "zeros":
        return np.zeros(m)
    if cfg.init == "random":
        return np.random.default_rng(cfg.seed).normal(size=m)
    return fit_least_squares(data).alpha.copy()


def nearest_minimizer(f: PwlFunction, current: float) -> float:
    """Point of a minimal piece of ``f`` closest to ``current``.

    ``current`` itself when it already attains the minimum; otherwise the
    nearest end of the closest minimal piece, moved inward by
    ``min(1, width / 10)`` so it stays off the breakpoint.
    """
    _, best = argmin_piecewise(f)
    out, gap = None, INF
    for p in f.pieces:
        if p.intercept != best:
            continue
        # a breakpoint may resolve ties differently from the piece, so step inside
        if p.lo < current < p.hi or (p.lo == f.domain.lo == current) or (p.hi == f.domain.hi == current):
            return current
        inset = min(1.0, (p.hi - p.lo) / 10)
        x = p.lo + inset if current <= p.lo else p.hi - inset
        if abs(x - current) < gap:
            out, gap = x, abs(x - current)
    return out


def coordinate_descent(
    spec: ProblemSpec,
    instances,
    data: Sequence[TrainingExample],
    cfg: TrainConfig | None = None,
    alpha0: np.ndarray | None = None,
) -> TrainReport:
    """Minimise total training regret over ``alpha`` one coordinate at a time.

    For coordinate ``k`` every example contributes a piecewise constant
    regret function of the free coefficient; their sum is minimised
    exactly and ``alpha[k]`` moves to a minimiser if that strictly lowers
    the total. With ``step="nearest"`` (the default) the minimiser closest
    to the current value is taken; ``step="midpoint"`` takes the midpoint
    of the leftmost minimal piece. Coordinates are
    visited round-robin. Training stops when an epoch improves the total
    regret by less than ``tol`` (relative), after ``max_epochs`` epochs, or
    when ``time_budget`` seconds have elapsed.

    An example whose estimates cannot all be nonnegative for any value of
    the free coefficient is skipped for that update; it adds ``big_m`` to
    the reported totals so they stay comparable across updates. Totals are
    direct regret evaluations of the current ``alpha``.
    """
    cfg = cfg or TrainConfig()
    data = list(data)
    if not data:
        raise ValueError("no training data")
    m = data[0].features.shape[1]
    for ex in data:
        if ex.features.shape[1] != m:
            raise ValueError("examples disagree on the number of features")
    insts = _per_example(instances, len(data))
    true_opts = []
    for inst, ex in zip(insts, data):
        _, opt = resolve(spec, inst, ex.truth)
        if not math.isfinite(opt):
            raise ValueError("training instance is infeasible under its true parameters")
        true_opts.append(opt)

    alpha = np.asarray(alpha0, dtype=float).copy() if alpha0 is not None else _initial_alpha(data, cfg)
    report = TrainReport(alpha=alpha)
    current = math.fsum(
        _objective(spec, inst, ex, alpha, opt, cfg.big_m) for inst, ex, opt in zip(insts, data, true_opts)
    )
    report.initial_regret = current
    started = time.perf_counter()

    def out_of_time() -> bool:
        return cfg.time_budget is not None and time.perf_counter() - started >= cfg.time_budget

    for _ in range(cfg.max_epochs):
        if out_of_time():
            break
        epoch_start = current
        for k in range(m):
            if out_of_time():
                break
            regrets = []
            skipped = 0
            for inst, ex, opt in zip(insts, data, true_opts):
                try:
                    inst_g, domain = construct(spec, inst, ex, alpha, k)
                except EmptyDomain:
                    skipped += 1
                    continue
                est = relearn(spec, inst_g, domain)
                regrets.append(evaluate_regret(est, opt, spec.sense, cfg.big_m))
            report.coordinates.append(k)
            report.skipped_examples += skipped
            if not regrets:
                msg = f"every example skipped for coordinate {k}; left unchanged"
                log.warning(msg)
                report.warnings.append(msg)
                report.total_regret_trace.append(current)
                continue
            total = simplify(sum_functions(regrets))
            if cfg.step == "midpoint":
                gamma, _ = argmin_piecewise(total)
            else:
                gamma = nearest_minimizer(total, float(alpha[k]))
            # judge the move by the direct regret, which agrees with the
            # piecewise sum except at breakpoints where the solver's tie-break differs
            trial = alpha.copy()
            trial[k] = gamma
            best = math.fsum(
                _objective(spec, inst, ex, trial, opt, cfg.big_m) for inst, ex, opt in zip(insts, data, true_opts)
            )
            # stay put unless the move strictly lowers the total
            if best < current:
                alpha[k] = gamma
                current = best
            report.total_regret_trace.append(current)
            log.debug("coordinate %d -> %.6g, total regret %.6g", k, gamma, current)
        report.epochs_run += 1
        if epoch_start - current <= cfg.tol * max(abs(epoch_start), 1e-300):
            break
    report.alpha = alpha
    return report


def holdout_regrets(spec: ProblemSpec, instances, data: Sequence[TrainingExample], alpha) -> tuple[list[float], list[float]]:
    """Per-example regret of ``alpha`` and the true optimal values."""
    insts = _per_example(instances, len(data))
    regrets, opts = [], []
    for inst, ex in zip(insts, data):
        theta_hat = predict(alpha, ex.features, nonnegative=spec.nonnegative)
        regrets.append(regret(spec, theta_hat, ex.truth, inst))
        opts.append(resolve(spec, inst, ex.truth)[1])
    return regrets, opts
