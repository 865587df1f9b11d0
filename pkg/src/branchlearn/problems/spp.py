"""Shortest path by Bellman-Ford rounds (minimization, unknown edge costs).

Each recursion level performs one relaxation round over all edges and
recurses with one round fewer. Distances carry a link to the path that
produced them, stored as nested ``(vertex, edge, previous_link)`` tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..core import PiecewiseInfo, ProblemSpec, Sense, relearn, resolve
from ..pwl import INF, Interval, LinearFn, PwlFunction, combine, constant, linear, map_tags


def edge_matrix(n_vertices: int, edges) -> tuple[tuple[int, ...], ...]:
    """Dense ``|V| x |V|`` matrix of edge indices, ``-1`` where no edge exists."""
    mat = [[-1] * n_vertices for _ in range(n_vertices)]
    for e, (u, v) in enumerate(edges):
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise ValueError(f"edge ({u}, {v}) references a missing vertex")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if mat[u][v] != -1:
            raise ValueError(f"duplicate edge ({u}, {v})")
        mat[u][v] = e
    return tuple(tuple(row) for row in mat)


def in_arcs(matrix) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Per vertex ``v``, the ``(u, edge)`` pairs with an edge ``u -> v``, by increasing ``u``."""
    n = len(matrix)
    return tuple(tuple((u, matrix[u][v]) for u in range(n) if u != v and matrix[u][v] >= 0) for v in range(n))


def link_path(link) -> list[tuple[int, int]]:
    """Unwind a link into the ``(vertex, edge)`` sequence from the source."""
    out = []
    while link is not None:
        v, e, link = link
        out.append((v, e))
    out.reverse()
    return out


def relax_round(dist, arcs, cost) -> tuple:
    """One synchronous relaxation round on scalar ``(value, link)`` distances.

    ``arcs[v]`` lists usable ``(u, arc)`` pairs into ``v``; ``cost(arc)``
    returns the arc cost. Only strict improvements replace a distance.
    """
    new = list(dist)
    for v, into in enumerate(arcs):
        best_val, best_link = new[v]
        for u, a in into:
            du = dist[u][0]
            if du == INF:
                continue
            cand = du + cost(a)
            if cand < best_val:
                best_val, best_link = cand, (v, a, dist[u][1])
        new[v] = (best_val, best_link)
    return tuple(new)


def relax_round_l(dist, arcs, cost_fn) -> tuple:
    """Piecewise counterpart of :func:`relax_round`; ``cost_fn(arc)`` is a PwlFunction."""
    new = list(dist)
    for v, into in enumerate(arcs):
        cur = new[v]
        for u, a in into:
            du = dist[u]
            if du.is_constant_inf:
                continue
            cand = combine(du, cost_fn(a), "add")
            cand = map_tags(cand, lambda tag, v=v, a=a: (v, a, tag))
            cur = combine(cur, cand, "min")
        new[v] = cur
    return tuple(new)


@dataclass(frozen=True)
class SppInstance:
    """Recursion state ``(G^c, D, s, t, N)``.

    ``dist`` holds ``(value, link)`` pairs in solve form and PwlFunctions in
    learn form; ``None`` means the initial state (0 at the source, +inf
    elsewhere). With ``early_stop`` the rounds end once a round changes no
    distance.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    matrix: tuple[tuple[int, ...], ...]
    source: int
    target: int
    rounds: int
    arcs: tuple
    dist: tuple | None = None
    costs: tuple[LinearFn, ...] | None = None
    truth: tuple[float, ...] | None = None
    early_stop: bool = False

    @classmethod
    def root(cls, n_vertices: int, edges, source: int, target: int, early_stop: bool = False) -> "SppInstance":
        edges = tuple((int(u), int(v)) for u, v in edges)
        if not (0 <= source < n_vertices and 0 <= target < n_vertices):
            raise ValueError("source and target must be vertices of the graph")
        matrix = edge_matrix(n_vertices, edges)
        return cls(n_vertices, edges, matrix, source, target, n_vertices - 1, in_arcs(matrix), early_stop=early_stop)


class SppSpec(ProblemSpec):
    sense = Sense.MINIMIZE
    nonnegative = True

    def num_params(self, inst) -> int:
        return len(inst.edges)

    def parameterize(self, inst, fns, truth):
        if len(fns) != len(inst.edges):
            raise ValueError("one cost line per edge is required")
        return replace(inst, costs=tuple(fns), truth=tuple(float(x) for x in truth))

    def objective(self, inst, solution, theta) -> float:
        if solution is None:
            return INF
        return float(sum(theta[e] for e in path_edges(inst, solution)))

    def _initial(self, inst):
        if inst.dist is not None:
            return inst.dist
        return tuple((0.0, (inst.source, -1, None)) if v == inst.source else (INF, None) for v in range(inst.n_vertices))

    def base_case(self, inst) -> bool:
        return inst.rounds == 0

    def base_result(self, inst, theta):
        value, link = self._initial(inst)[inst.target]
        if value == INF:
            return None, INF
        return tuple(v for v, _ in link_path(link)), float(value)

    def extract(self, inst, theta):
        return relax_round(self._initial(inst), inst.arcs, lambda e: theta[e])

    def branch(self, inst, theta, info):
        rounds = inst.rounds - 1
        if inst.early_stop and info == inst.dist:
            rounds = 0
        return [(replace(inst, dist=info, rounds=rounds), theta)]

    def _initial_l(self, inst, interval):
        if inst.dist is not None:
            return inst.dist
        return tuple(
            constant(0.0, interval, 0.0, (inst.source, -1, None)) if v == inst.source else constant(INF, interval, INF)
            for v in range(inst.n_vertices)
        )

    def base_result_l(self, inst, interval) -> PwlFunction:
        return self._initial_l(inst, interval)[inst.target]

    def extract_l(self, inst, interval):
        dist = self._initial_l(inst, interval)
        cost_fns = {}

        def cost_fn(e):
            if e not in cost_fns:
                cost_fns[e] = linear(inst.costs[e], interval, inst.truth[e])
            return cost_fns[e]

        return PiecewiseInfo.single(interval, relax_round_l(dist, inst.arcs, cost_fn))

    def branch_l(self, inst, info, interval):
        rounds = inst.rounds - 1
        if inst.early_stop and info == inst.dist:
            rounds = 0
        return [replace(inst, dist=info, rounds=rounds)]


SPP = SppSpec()


def path_edges(inst: SppInstance, path: Sequence[int]) -> list[int]:
    return [inst.matrix[u][v] for u, v in zip(path, path[1:])]


def resolve_spp(n_vertices: int, edges, costs, source: int, target: int, early_stop: bool = False):
    """Shortest ``(path, distance)``; ``(None, inf)`` when the target is unreachable."""
    inst = SppInstance.root(n_vertices, edges, source, target, early_stop)
    return resolve(SPP, inst, np.asarray(costs, dtype=float))


def relearn_spp(n_vertices: int, edges, cost_fns, truth, source: int, target: int, interval: Interval, early_stop: bool = False):
    inst = SPP.parameterize(SppInstance.root(n_vertices, edges, source, target, early_stop), cost_fns, truth)
    return relearn(SPP, inst, interval)


def brute_spp(n_vertices: int, edges, costs, source: int, target: int, max_vertices: int = 8) -> float:
    """Minimum over all simple source-target paths."""
    if n_vertices > max_vertices:
        raise ValueError(f"brute force limited to {max_vertices} vertices, got {n_vertices}")
    if source == target:
        return 0.0
    w = {}
    for (u, v), c in zip(edges, costs):
        w[(u, v)] = float(c)
    others = [x for x in range(n_vertices) if x not in (source, target)]
    best = INF
    for r in range(len(others) + 1):
        for middle in itertools.permutations(others, r):
            path = (source, *middle, target)
            hops = list(zip(path, path[1:]))
            if all(h in w for h in hops):
                best = min(best, sum(w[h] for h in hops))
    return best
