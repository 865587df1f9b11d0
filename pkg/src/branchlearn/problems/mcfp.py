"""Capacitated min-cost flow by successive shortest paths (unknown edge costs).

Every original edge ``e = (u, v)`` has a forward residual arc ``e`` and a
reverse arc ``e + E`` (``v -> u``, zero initial capacity, negated cost).
One recursion level finds the cheapest augmenting path with Bellman-Ford,
pushes the bottleneck amount along it and recurses on the updated residual
graph.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..core import PiecewiseInfo, ProblemSpec, Sense, relearn, resolve
from ..pwl import INF, Interval, LinearFn, PwlFunction, linear, constant
from .spp import edge_matrix, link_path, relax_round, relax_round_l


@dataclass(frozen=True)
class McfpSolution:
    flow: tuple[float, ...]
    delivered: float
    demand: float

    @property
    def feasible(self) -> bool:
        return self.delivered >= self.demand


@dataclass(frozen=True)
class McfpInstance:
    """Residual-graph recursion state ``(G^p, G^c, F, s, t)`` plus the demand.

    ``residual`` is indexed by arc, ``flow`` by original edge. With
    ``demand_capped`` (the default) augmentation stops once ``demand``
    units are routed; otherwise it continues until no augmenting path is
    left, i.e. a min-cost maximum flow.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    capacity: tuple[float, ...]
    source: int
    sink: int
    demand: float
    residual: tuple[float, ...]
    flow: tuple[float, ...]
    heads: tuple[int, ...]
    tails: tuple[int, ...]
    costs: tuple[LinearFn, ...] | None = None
    truth: tuple[float, ...] | None = None
    demand_capped: bool = True
    early_stop: bool = True

    @classmethod
    def root(cls, n_vertices: int, edges, capacity, source: int, sink: int, demand: float, demand_capped: bool = True):
        edges = tuple((int(u), int(v)) for u, v in edges)
        matrix = edge_matrix(n_vertices, edges)
        for u, v in edges:
            if matrix[v][u] != -1:
                raise ValueError(f"anti-parallel edges between {u} and {v}; at most one edge per vertex pair")
        capacity = tuple(float(c) for c in capacity)
        if len(capacity) != len(edges) or any(c < 0 for c in capacity):
            raise ValueError("one nonnegative capacity per edge is required")
        if source == sink:
            raise ValueError("source and sink must differ")
        n_e = len(edges)
        tails = tuple(u for u, _ in edges) + tuple(v for _, v in edges)
        heads = tuple(v for _, v in edges) + tuple(u for u, _ in edges)
        return cls(
            n_vertices, edges, capacity, int(source), int(sink), float(demand),
            capacity + (0.0,) * n_e, (0.0,) * n_e, heads, tails, demand_capped=demand_capped,
        )

    @property
    def delivered(self) -> float:
        s = self.source
        return sum(f for (u, v), f in zip(self.edges, self.flow) if u == s) - sum(
            f for (u, v), f in zip(self.edges, self.flow) if v == s
        )

    def usable_arcs(self):
        """Per vertex, ``(u, arc)`` pairs of positive-residual arcs entering it, by increasing ``u``."""
        into = [[] for _ in range(self.n_vertices)]
        for a, r in enumerate(self.residual):
            if r > 0:
                into[self.heads[a]].append((self.tails[a], a))
        return tuple(tuple(sorted(x)) for x in into)

    def has_path(self) -> bool:
        out = [[] for _ in range(self.n_vertices)]
        for a, r in enumerate(self.residual):
            if r > 0:
                out[self.tails[a]].append(self.heads[a])
        seen = {self.source}
        queue = deque([self.source])
        while queue:
            u = queue.popleft()
            if u == self.sink:
                return True
            for v in out[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return False

    def augment(self, arcs: Sequence[int]) -> "McfpInstance":
        """Push the bottleneck amount along ``arcs`` (source to sink order)."""
        n_e = len(self.edges)
        block = min(self.residual[a] for a in arcs)
        if self.demand_capped:
            block = min(block, self.demand - self.delivered)
        residual = list(self.residual)
        flow = list(self.flow)
        for a in arcs:
            twin = a + n_e if a < n_e else a - n_e
            residual[a] -= block
            residual[twin] += block
            if a < n_e:
                flow[a] += block
            else:
                flow[twin] -= block
        return replace(self, residual=tuple(residual), flow=tuple(flow))

    def solution(self) -> McfpSolution:
        return McfpSolution(self.flow, self.delivered, self.demand)


def _arc_cost(theta, a: int, n_e: int) -> float:
    return theta[a] if a < n_e else -theta[a - n_e]


def _path_arcs(link, source: int) -> list[int]:
    steps = link_path(link)
    if not steps or steps[0][0] != source:
        raise RuntimeError("broken augmenting path")
    return [a for _, a in steps[1:]]


class McfpSpec(ProblemSpec):
    sense = Sense.MINIMIZE
    nonnegative = True

    def num_params(self, inst) -> int:
        return len(inst.edges)

    def parameterize(self, inst, fns, truth):
        if len(fns) != len(inst.edges):
            raise ValueError("one cost line per edge is required")
        return replace(inst, costs=tuple(fns), truth=tuple(float(x) for x in truth))

    def objective(self, inst, solution: McfpSolution, theta) -> float:
        return float(sum(f * theta[e] for e, f in enumerate(solution.flow) if f))

    def base_case(self, inst) -> bool:
        if inst.demand_capped and inst.delivered >= inst.demand:
            return True
        return not inst.has_path()

    def base_result(self, inst, theta):
        sol = inst.solution()
        return sol, self.objective(inst, sol, theta)

    def _bellman_ford(self, inst, init, step):
        dist = init
        arcs = inst.usable_arcs()
        for _ in range(inst.n_vertices - 1):
            new = step(dist, arcs)
            if inst.early_stop and new == dist:
                break
            dist = new
        return dist

    def extract(self, inst, theta):
        n_e = len(inst.edges)
        init = tuple(
            (0.0, (inst.source, -1, None)) if v == inst.source else (INF, None) for v in range(inst.n_vertices)
        )
        dist = self._bellman_ford(inst, init, lambda d, arcs: relax_round(d, arcs, lambda a: _arc_cost(theta, a, n_e)))
        return _path_arcs(dist[inst.sink][1], inst.source)

    def branch(self, inst, theta, info):
        return [(inst.augment(info), theta)]

    def base_result_l(self, inst, interval) -> PwlFunction:
        est = LinearFn(0.0, 0.0)
        for f, fn in zip(inst.flow, inst.costs):
            if f:
                est = est + LinearFn(f * fn.slope, f * fn.intercept)
        sol = inst.solution()
        return linear(est, interval, self.objective(inst, sol, inst.truth), sol)

    def extract_l(self, inst, interval) -> PiecewiseInfo:
        n_e = len(inst.edges)
        cost_fns = {}

        def cost_fn(a):
            if a not in cost_fns:
                if a < n_e:
                    cost_fns[a] = linear(inst.costs[a], interval, inst.truth[a])
                else:
                    fn = inst.costs[a - n_e]
                    cost_fns[a] = linear(LinearFn(-fn.slope, -fn.intercept), interval, -inst.truth[a - n_e])
            return cost_fns[a]

        init = tuple(
            constant(0.0, interval, 0.0, (inst.source, -1, None)) if v == inst.source else constant(INF, interval, INF)
            for v in range(inst.n_vertices)
        )
        dist = self._bellman_ford(inst, init, lambda d, arcs: relax_round_l(d, arcs, cost_fn))
        parts: list[tuple[Interval, list[int]]] = []
        for p in dist[inst.sink].pieces:
            arcs = _path_arcs(p.tag, inst.source)
            if parts and parts[-1][1] == arcs:
                parts[-1] = (Interval(parts[-1][0].lo, p.hi), arcs)
            else:
                parts.append((Interval(p.lo, p.hi), arcs))
        return PiecewiseInfo(parts)

    def branch_l(self, inst, info, interval):
        return [inst.augment(info)]


MCFP = McfpSpec()


def resolve_mcfp(inst: McfpInstance, costs):
    """Min-cost routing as ``(McfpSolution, cost)``."""
    return resolve(MCFP, inst, np.asarray(costs, dtype=float))


def relearn_mcfp(inst: McfpInstance, cost_fns: Sequence[LinearFn], truth, interval: Interval) -> PwlFunction:
    return relearn(MCFP, MCFP.parameterize(inst, cost_fns, truth), interval)


def brute_mcfp(inst: McfpInstance, costs, max_edges: int = 6, max_capacity: float = 20) -> float:
    """Cheapest integral flow routing ``min(demand, max flow)`` units, by enumeration.

    Returns ``inf`` when the demand cannot be met.
    """
    n_e = len(inst.edges)
    if n_e > max_edges or any(c > max_capacity for c in inst.capacity):
        raise ValueError(f"brute force limited to {max_edges} edges of capacity <= {max_capacity}")
    if inst.demand == 0:
        return 0.0
    best = INF
    s, t = inst.source, inst.sink
    for flow in itertools.product(*(range(int(c) + 1) for c in inst.capacity)):
        net = [0.0] * inst.n_vertices
        for (u, v), f in zip(inst.edges, flow):
            net[u] -= f
            net[v] += f
        if net[t] != inst.demand or net[s] != -inst.demand:
            continue
        if any(net[x] for x in range(inst.n_vertices) if x not in (s, t)):
            continue
        best = min(best, float(sum(f * c for f, c in zip(flow, costs))))
    return best
