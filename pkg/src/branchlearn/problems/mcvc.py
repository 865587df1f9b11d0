"""Minimum-cost vertex cover by exhaustive binary branching (unknown vertex costs)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..core import ProblemSpec, Sense, relearn, resolve
from ..pwl import INF, Interval, LinearFn, PwlFunction, constant, linear


@dataclass(frozen=True)
class McvcInstance:
    """Recursion state: graph, vertices left to decide and the chosen set.

    Vertex ``depth - 1`` is decided next. With ``prune`` set, a branch is
    cut as soon as an edge between two rejected vertices appears; this
    never changes the optimum and is off by default.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    depth: int
    chosen: frozenset = frozenset()
    costs: tuple[LinearFn, ...] | None = None
    truth: tuple[float, ...] | None = None
    prune: bool = False

    @classmethod
    def root(cls, n_vertices: int, edges, prune: bool = False) -> "McvcInstance":
        edges = tuple((int(u), int(v)) for u, v in edges)
        for u, v in edges:
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
        return cls(n_vertices, edges, n_vertices, prune=prune)

    def covered(self) -> bool:
        chosen = self.chosen
        return all(u in chosen or v in chosen for u, v in self.edges)

    def doomed(self) -> bool:
        # an edge whose endpoints are both decided and both rejected
        d, chosen = self.depth, self.chosen
        return any(u >= d and v >= d and u not in chosen and v not in chosen for u, v in self.edges)


class McvcSpec(ProblemSpec):
    sense = Sense.MINIMIZE
    nonnegative = True

    def num_params(self, inst) -> int:
        return inst.n_vertices

    def parameterize(self, inst, fns, truth):
        if len(fns) != inst.n_vertices:
            raise ValueError("one cost line per vertex is required")
        return replace(inst, costs=tuple(fns), truth=tuple(float(x) for x in truth))

    def objective(self, inst, solution, theta) -> float:
        if solution is None:
            return INF
        return float(sum(theta[v] for v in sorted(solution)))

    def base_case(self, inst) -> bool:
        return inst.depth == 0 or (inst.prune and inst.doomed())

    def base_result(self, inst, theta):
        if inst.depth and inst.prune:
            return None, INF
        if not inst.covered():
            return None, INF
        return inst.chosen, float(sum(theta[v] for v in sorted(inst.chosen)))

    def branch(self, inst, theta, info):
        n = inst.depth
        out = replace(inst, depth=n - 1)
        pick = replace(inst, depth=n - 1, chosen=inst.chosen | {n - 1})
        return [(out, theta), (pick, theta)]

    def base_result_l(self, inst, interval: Interval) -> PwlFunction:
        if (inst.depth and inst.prune) or not inst.covered():
            return constant(INF, interval, INF)
        est = LinearFn(0.0, 0.0)
        payload = 0.0
        for v in sorted(inst.chosen):
            est = est + inst.costs[v]
            payload += inst.truth[v]
        return linear(est, interval, payload, inst.chosen)

    def branch_l(self, inst, info, interval):
        return [sub for sub, _ in self.branch(inst, None, info)]


MCVC = McvcSpec()


def resolve_mcvc(n_vertices: int, edges, costs, prune: bool = False):
    """Minimum-cost cover as ``(cover, cost)``."""
    return resolve(MCVC, McvcInstance.root(n_vertices, edges, prune), np.asarray(costs, dtype=float))


def relearn_mcvc(n_vertices: int, edges, cost_fns: Sequence[LinearFn], truth, interval: Interval, prune: bool = False):
    inst = MCVC.parameterize(McvcInstance.root(n_vertices, edges, prune), cost_fns, truth)
    return relearn(MCVC, inst, interval)


def brute_mcvc(n_vertices: int, edges, costs, max_vertices: int = 16) -> float:
    """Cheapest cover found by iterating over all vertex subsets as bitmasks."""
    if n_vertices > max_vertices:
        raise ValueError(f"brute force limited to {max_vertices} vertices, got {n_vertices}")
    edge_masks = [(1 << u) | (1 << v) for u, v in edges]
    best = INF
    for mask in range(1 << n_vertices):
        if all(mask & e for e in edge_masks):
            cost = sum(costs[v] for v in range(n_vertices) if mask >> v & 1)
            best = min(best, float(cost))
    return best


def is_cover(edges, cover) -> bool:
    return all(u in cover or v in cover for u, v in edges)

