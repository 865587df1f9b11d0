"""0-1 knapsack by exhaustive take/skip recursion (maximization, unknown profits)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..core import ProblemSpec, Sense, relearn, resolve
from ..pwl import Interval, LinearFn, PwlFunction, constant, linear


@dataclass(frozen=True)
class KnapsackInstance:
    """Recursion state ``(p, c, n, W, S)``.

    ``profits`` holds per-item :class:`LinearFn` estimates in learn form and
    is ``None`` in solve form (profits then travel as ``theta``). Items are
    decided from the last one down, so ``chosen`` only contains indices
    ``>= remaining``.
    """

    costs: tuple[float, ...]
    budget: float
    remaining: int
    chosen: frozenset = frozenset()
    profits: tuple[LinearFn, ...] | None = None
    truth: tuple[float, ...] | None = None

    @classmethod
    def root(cls, costs: Sequence[float], budget: float) -> "KnapsackInstance":
        costs = tuple(float(c) for c in costs)
        if any(c < 0 for c in costs):
            raise ValueError("item costs must be nonnegative")
        return cls(costs, float(budget), len(costs))


class KnapsackSpec(ProblemSpec):
    sense = Sense.MAXIMIZE
    nonnegative = True

    def num_params(self, inst: KnapsackInstance) -> int:
        return len(inst.costs)

    def parameterize(self, inst, fns, truth):
        if len(fns) != len(inst.costs):
            raise ValueError("one profit line per item is required")
        return replace(inst, profits=tuple(fns), truth=tuple(float(x) for x in truth))

    def objective(self, inst, solution, theta) -> float:
        return float(sum(theta[i] for i in sorted(solution)))

    def base_case(self, inst: KnapsackInstance) -> bool:
        return inst.remaining == 0 or inst.budget <= 0

    def base_result(self, inst, theta):
        # An over-budget selection scores 0 and stands for the empty decision.
        if inst.budget < 0:
            return frozenset(), 0.0
        return inst.chosen, float(sum(theta[i] for i in sorted(inst.chosen)))

    def branch(self, inst, theta, info):
        n = inst.remaining
        skip = replace(inst, remaining=n - 1)
        take = replace(inst, remaining=n - 1, budget=inst.budget - inst.costs[n - 1], chosen=inst.chosen | {n - 1})
        return [(skip, theta), (take, theta)]

    def base_result_l(self, inst, interval: Interval) -> PwlFunction:
        if inst.budget < 0:
            return constant(0.0, interval, 0.0, frozenset())
        est = LinearFn(0.0, 0.0)
        payload = 0.0
        for i in sorted(inst.chosen):
            est = est + inst.profits[i]
            payload += inst.truth[i]
        return linear(est, interval, payload, inst.chosen)

    def branch_l(self, inst, info, interval):
        return [sub for sub, _ in self.branch(inst, None, info)]


KNAPSACK = KnapsackSpec()


def resolve_ks(costs, budget, profits):
    """Best ``(chosen_items, total_profit)``."""
    return resolve(KNAPSACK, KnapsackInstance.root(costs, budget), np.asarray(profits, dtype=float))


def relearn_ks(costs, budget, profit_fns: Sequence[LinearFn], truth, interval: Interval) -> PwlFunction:
    inst = KNAPSACK.parameterize(KnapsackInstance.root(costs, budget), profit_fns, truth)
    return relearn(KNAPSACK, inst, interval)


def brute_ks(profits, costs, budget, max_items: int = 20) -> float:
    """Exhaustive subset enumeration."""
    n = len(profits)
    if n > max_items:
        raise ValueError(f"brute force limited to {max_items} items, got {n}")
    best = 0.0
    for mask in itertools.product((0, 1), repeat=n):
        if sum(c for c, x in zip(costs, mask) if x) <= budget:
            best = max(best, float(sum(p for p, x in zip(profits, mask) if x)))
    return best
