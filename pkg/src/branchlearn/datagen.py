"""Synthetic datasets, flow instances, graph files and dataset CSV files.

Artificial parameters follow

    theta = 10 sin(a1) sin(a2) + 100 sin(a3) sin(a4) + C

with ``a1`` an integer in [1, 7], ``a2`` an integer in [1, 30] and ``a3``,
``a4`` uniform on [0, 360]. Angles are taken in radians unless
``degrees=True``; the choice changes every generated value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import TrainingExample
from .problems.mcfp import McfpInstance, resolve_mcfp

N_FEATURES = 4
DEFAULT_OFFSET = 200.0
FLOW_VALUE = 20
CAPACITY_RANGE = (10, 50)


class DataError(ValueError):
    """Malformed input file or impossible generation request."""


@dataclass
class Dataset:
    examples: list[TrainingExample]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.examples:
            t, m = self.examples[0].features.shape
            for ex in self.examples:
                if ex.features.shape != (t, m):
                    raise DataError("examples disagree in shape")

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def shape(self) -> tuple[int, int]:
        return self.examples[0].features.shape


@dataclass(frozen=True)
class GraphFile:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    capacities: tuple[float, ...] | None = None
    name: str = ""

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise DataError(f"edge ({u}, {v}) outside vertex range 0..{self.n_vertices - 1}")
            if u == v:
                raise DataError(f"self-loop at vertex {u}")
            if (u, v) in seen:
                raise DataError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if self.capacities is not None and len(self.capacities) != len(self.edges):
            raise DataError("capacity count does not match edge count")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def in_degree(self) -> list[int]:
        deg = [0] * self.n_vertices
        for _, v in self.edges:
            deg[v] += 1
        return deg

    def out_degree(self) -> list[int]:
        deg = [0] * self.n_vertices
        for u, _ in self.edges:
            deg[u] += 1
        return deg

    def reachable(self, source: int) -> set[int]:
        out = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            out[u].append(v)
        seen, queue = {source}, deque([source])
        while queue:
            for v in out[queue.popleft()]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen


# artificial data


def artificial_truth(a: np.ndarray, offset: float = DEFAULT_OFFSET, degrees: bool = False) -> np.ndarray:
    """Apply the generating formula row-wise to features ``a`` of shape (t, 4)."""
    a = np.asarray(a, dtype=float)
    if degrees:
        a = np.deg2rad(a)
    s = np.sin(a)
    return 10.0 * s[:, 0] * s[:, 1] + 100.0 * s[:, 2] * s[:, 3] + offset


def gen_artificial(
    t: int, n: int, offset: float = DEFAULT_OFFSET, seed: int = 0, degrees: bool = False
) -> Dataset:
    """``n`` examples of ``t`` parameters, each with 4 raw features."""
    if n < 1 or t < 1:
        raise DataError("need at least one example and one parameter")
    rng = np.random.default_rng(seed)
    examples = []
    for _ in range(n):
        a = np.column_stack(
            [
                rng.integers(1, 8, size=t),
                rng.integers(1, 31, size=t),
                rng.uniform(0.0, 360.0, size=t),
                rng.uniform(0.0, 360.0, size=t),
            ]
        ).astype(float)
        examples.append(TrainingExample(a, artificial_truth(a, offset, degrees)))
    meta = {"kind": "artificial", "seed": seed, "t": t, "m": N_FEATURES, "offset": offset, "degrees": degrees}
    return Dataset(examples, meta)


def gen_linear(t: int, n: int, alpha: Sequence[float], seed: int = 0) -> Dataset:
    """Examples whose truth is exactly ``features @ alpha``.

    Features are uniform on [0, 10) so nonnegative ``alpha`` gives
    nonnegative parameters.
    """
    alpha = np.asarray(alpha, dtype=float)
    rng = np.random.default_rng(seed)
    examples = []
    for _ in range(n):
        a = rng.uniform(0.0, 10.0, size=(t, alpha.shape[0]))
        examples.append(TrainingExample(a, a @ alpha))
    return Dataset(examples, {"kind": "linear", "seed": seed, "t": t, "m": int(alpha.shape[0])})


def split(d: Dataset, ratio: float = 0.7, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first ``ceil(ratio * n)`` examples train."""
    if not 0 < ratio < 1:
        raise DataError("ratio must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(len(d))
    cut = math.ceil(ratio * len(d))
    pick = lambda idx: Dataset([d.examples[i] for i in idx], dict(d.meta))
    return pick(order[:cut]), pick(order[cut:])


# topologies


def synthetic_topology(n_vertices: int, n_edges: int, seed: int, backbone: bool = True, name: str = "") -> GraphFile:
    """Random acyclic digraph with every edge pointing to a larger id.

    With ``backbone`` the chain ``0 -> 1 -> ... -> n-1`` is included, so
    every vertex reaches every larger one. Without it, edges are drawn
    uniformly (no isolated vertices), leaving several vertices with zero
    in-degree or zero out-degree.
    """
    pairs = [(u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices)]
    if n_edges > len(pairs) or (backbone and n_edges < n_vertices - 1):
        raise DataError(f"cannot place {n_edges} edges on {n_vertices} vertices")
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        chosen = {(v, v + 1) for v in range(n_vertices - 1)} if backbone else set()
        rest = [p for p in pairs if p not in chosen]
        picks = rng.choice(len(rest), size=n_edges - len(chosen), replace=False)
        chosen.update(rest[i] for i in picks)
        touched = {x for e in chosen for x in e}
        if len(touched) == n_vertices:
            return GraphFile(n_vertices, tuple(sorted(chosen)), name=name)
    raise DataError("could not draw a topology without isolated vertices")


# graph id -> (vertices, edges, generator seed, backbone) for the synthetic stand-ins
SYNTHETIC = {"usanet": (24, 43, 11, True), "geant": (40, 61, 23, False)}

# published vertex and edge counts, checked when a bundled graph is loaded
EXPECTED_COUNTS = {"polska": (12, 18), "pdh": (11, 34), "usanet": (24, 43), "geant": (40, 61)}


def bundled_graphs() -> list[str]:
    return sorted(EXPECTED_COUNTS)


def load_bundled(name: str) -> GraphFile:
    key = name.lower()
    if key not in EXPECTED_COUNTS:
        raise DataError(f"unknown bundled graph {name!r}; choose from {bundled_graphs()}")
    text = resources.files("branchlearn").joinpath("data", f"{key}.csv").read_text(encoding="utf-8")
    g = parse_graph(text, name=key)
    if (g.n_vertices, g.n_edges) != EXPECTED_COUNTS[key]:
        raise DataError(f"{key}: expected {EXPECTED_COUNTS[key]} vertices/edges, found {(g.n_vertices, g.n_edges)}")
    return g


def resolve_graph(spec: str) -> GraphFile:
    """A bundled graph name or a path to a graph CSV file."""
    if spec.lower() in EXPECTED_COUNTS:
        return load_bundled(spec)
    return load_graph(spec)


# graph CSV: optional "# vertices=N" line, then header "u,v" or "u,v,capacity"


def _comments(lines: list[str]) -> tuple[dict, int]:
    meta, i = {}, 0
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" in body:
            key, value = body.split("=", 1)
            meta[key.strip()] = value.strip()
        i += 1
    return meta, i


def parse_graph(text: str, name: str = "", source: str = "<string>") -> GraphFile:
    lines = text.splitlines()
    meta, start = _comments(lines)
    if start >= len(lines):
        raise DataError(f"{source}: missing header row")
    header = [h.strip() for h in lines[start].split(",")]
    if header not in (["u", "v"], ["u", "v", "capacity"]):
        raise DataError(f"{source}:{start + 1}: header must be 'u,v' or 'u,v,capacity', got {lines[start]!r}")
    with_cap = len(header) == 3
    edges, caps, seen = [], [], set()
    for lineno, row in enumerate(csv.reader(lines[start + 1 :]), start=start + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{source}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            u, v = int(row[0]), int(row[1])
            cap = float(row[2]) if with_cap else None
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from None
        if u < 0 or v < 0:
            raise DataError(f"{source}:{lineno}: negative vertex id")
        if u == v:
            raise DataError(f"{source}:{lineno}: self-loop at vertex {u}")
        if (u, v) in seen:
            raise DataError(f"{source}:{lineno}: duplicate edge ({u}, {v})")
        if cap is not None and cap < 0:
            raise DataError(f"{source}:{lineno}: negative capacity")
        seen.add((u, v))
        edges.append((u, v))
        caps.append(cap)
    top = max((max(e) for e in edges), default=-1) + 1
    if "vertices" in meta:
        try:
            n = int(meta["vertices"])
        except ValueError:
            raise DataError(f"{source}: bad vertex count {meta['vertices']!r}") from None
        if n < top:
            raise DataError(f"{source}: vertex ids reach {top - 1} but only {n} vertices declared")
    else:
        n = top
    return GraphFile(n, tuple(edges), tuple(caps) if with_cap else None, name=name or meta.get("name", ""))


def load_graph(path) -> GraphFile:
    path = Path(path)
    return parse_graph(path.read_text(encoding="utf-8"), name=path.stem, source=str(path))


def write_graph(g: GraphFile, path) -> None:
    buf = io.StringIO()
    buf.write(f"# vertices={g.n_vertices}\n")
    w = csv.writer(buf, lineterminator="\n")
    if g.capacities is None:
        w.writerow(["u", "v"])
        w.writerows(g.edges)
    else:
        w.writerow(["u", "v", "capacity"])
        w.writerows((u, v, repr(c)) for (u, v), c in zip(g.edges, g.capacities))
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# source/sink selection rules, keyed by graph id


def _endpoint_candidates(g: GraphFile, rule: str) -> tuple[list[int], list[int]]:
    if rule == "usanet":
        return list(range(0, 5)), list(range(19, 24))
    if rule == "geant":
        ins, outs = g.in_degree(), g.out_degree()
        return [v for v in range(g.n_vertices) if ins[v] == 0], [v for v in range(g.n_vertices) if outs[v] == 0]
    return list(range(g.n_vertices)), list(range(g.n_vertices))


def choose_endpoints(g: GraphFile, rng: np.random.Generator, rule: str | None = None) -> tuple[int, int]:
    """Random ``(source, sink)`` allowed by the rule for ``g`` with a connecting path."""
    rule = (rule or g.name).lower()
    sources, sinks = _endpoint_candidates(g, rule)
    pairs = []
    for s in sources:
        if not 0 <= s < g.n_vertices:
            continue
        reach = g.reachable(s)
        pairs.extend((s, t) for t in sinks if t != s and t in reach)
    if not pairs:
        raise DataError(f"no connected source/sink pair under rule {rule!r}")
    return pairs[int(rng.integers(len(pairs)))]


def gen_flow_instance(
    g: GraphFile,
    seed: int,
    fixed: tuple[int, int] | None = None,
    demand: float = FLOW_VALUE,
    capacity_range: tuple[int, int] = CAPACITY_RANGE,
    rule: str | None = None,
    max_tries: int = 100,
) -> McfpInstance:
    """Flow network on ``g`` with integer capacities drawn uniformly from ``capacity_range``.

    Draws are repeated until the network can carry ``demand`` units from
    source to sink.
    """
    rng = np.random.default_rng(seed)
    lo, hi = capacity_range
    if fixed is not None and fixed[1] not in g.reachable(fixed[0]):
        raise DataError(f"sink {fixed[1]} is not reachable from source {fixed[0]}")
    for _ in range(max_tries):
        caps = rng.integers(lo, hi + 1, size=g.n_edges).astype(float)
        s, t = fixed if fixed is not None else choose_endpoints(g, rng, rule)
        inst = McfpInstance.root(g.n_vertices, g.edges, caps, s, t, demand)
        sol, _ = resolve_mcfp(inst, np.ones(g.n_edges))
        if sol.feasible:
            return inst
    raise DataError(f"no draw in {max_tries} tries can carry {demand} units")


def gen_knapsack(n_items: int, seed: int, cost_range: tuple[int, int] = (1, 10)) -> tuple[list[float], float]:
    """Integer item costs and a budget of half their total."""
    rng = np.random.default_rng(seed)
    costs = rng.integers(cost_range[0], cost_range[1] + 1, size=n_items).astype(float)
    return costs.tolist(), float(math.floor(costs.sum() / 2))


# dataset CSV: optional "# meta=<json>" line, header "instance,p0_f0,...,p0_truth,p1_f0,...", one row per example


def dataset_header(t: int, m: int) -> list[str]:
    cols = ["instance"]
    for j in range(t):
        cols += [f"p{j}_f{k}" for k in range(m)] + [f"p{j}_truth"]
    return cols


def write_dataset_csv(d: Dataset, path) -> None:
    t, m = d.shape
    buf = io.StringIO()
    if d.meta:
        buf.write("# meta=" + json.dumps(d.meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(dataset_header(t, m))
    for i, ex in enumerate(d.examples):
        row = [str(i)]
        for j in range(t):
            row += [repr(float(x)) for x in ex.features[j]] + [repr(float(ex.truth[j]))]
        w.writerow(row)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_dataset_csv(path, t: int | None = None, m: int | None = None) -> Dataset:
    """Read a dataset file; ``t`` and ``m`` are checked when given, inferred otherwise."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    start = 0
    meta: dict = {}
    while start < len(lines) and lines[start].startswith("#"):
        body = lines[start][1:].strip()
        if body.startswith("meta="):
            try:
                meta = json.loads(body[5:])
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{start + 1}: bad metadata: {exc}") from None
        start += 1
    if start >= len(lines):
        raise DataError(f"{path}: missing header row")
    header = next(csv.reader([lines[start]]))
    if not header or header[0] != "instance" or not header[-1].endswith("_truth"):
        raise DataError(f"{path}:{start + 1}: header must start with 'instance' and end with a truth column")
    t_found = sum(1 for h in header if h.endswith("_truth"))
    m_found = (len(header) - 1) // t_found - 1
    if t is not None and t != t_found:
        raise DataError(f"{path}:{start + 1}: expected {t} parameters, header has {t_found}")
    if m is not None and m != m_found:
        raise DataError(f"{path}:{start + 1}: expected {m} features per parameter, header has {m_found}")
    t, m = t_found, m_found
    if header != dataset_header(t, m):
        raise DataError(f"{path}:{start + 1}: unexpected column layout")
    examples = []
    for lineno, row in enumerate(csv.reader(lines[start + 1 :]), start=start + 2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            values = np.array([float(x) for x in row[1:]]).reshape(t, m + 1)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        examples.append(TrainingExample(values[:, :m].copy(), values[:, m].copy()))
    if not examples:
        raise DataError(f"{path}: no data rows")
    return Dataset(examples, meta)


# instance files


@dataclass(frozen=True)
class KnapsackFile:
    costs: tuple[float, ...]
    budget: float
    features: np.ndarray | None = None  # (items, m) when feature columns are present


def write_knapsack_csv(costs, budget: float, path, features=None) -> None:
    """Header line ``# budget=W``, then ``f0,...,cost`` rows, one per item."""
    buf = io.StringIO()
    buf.write(f"# budget={budget!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    m = 0 if features is None else np.asarray(features).shape[1]
    w.writerow([f"f{k}" for k in range(m)] + ["cost"])
    for i, c in enumerate(costs):
        feats = [] if features is None else [repr(float(x)) for x in features[i]]
        w.writerow(feats + [repr(float(c))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_knapsack_csv(path) -> KnapsackFile:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    meta, start = _comments(lines)
    if "budget" not in meta:
        raise DataError(f"{path}: missing '# budget=...' line")
    try:
        budget = float(meta["budget"])
    except ValueError:
        raise DataError(f"{path}: bad budget {meta['budget']!r}") from None
    if start >= len(lines):
        raise DataError(f"{path}: missing header row")
    header = next(csv.reader([lines[start]]))
    if not header or header[-1] != "cost" or header[:-1] != [f"f{k}" for k in range(len(header) - 1)]:
        raise DataError(f"{path}:{start + 1}: header must be 'f0,...,cost'")
    rows = []
    for lineno, row in enumerate(csv.reader(lines[start + 1 :]), start=start + 2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(x) for x in row]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        if vals[-1] < 0:
            raise DataError(f"{path}:{lineno}: negative cost")
        rows.append(vals)
    arr = np.array(rows, dtype=float).reshape(len(rows), len(header))
    feats = arr[:, :-1].copy() if len(header) > 1 else None
    return KnapsackFile(tuple(arr[:, -1].tolist()), budget, feats)


def write_flow_instance(inst: McfpInstance, path) -> None:
    """Graph CSV with capacities, preceded by source, sink and demand lines."""
    g = GraphFile(inst.n_vertices, inst.edges, inst.capacity)
    write_graph(g, path)
    text = Path(path).read_text(encoding="utf-8")
    head = f"# source={inst.source}\n# sink={inst.sink}\n# demand={inst.demand!r}\n"
    Path(path).write_text(head + text, encoding="utf-8")


def load_flow_instance(path) -> McfpInstance:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    meta, _ = _comments(text.splitlines())
    g = parse_graph(text, name=path.stem, source=str(path))
    if g.capacities is None:
        raise DataError(f"{path}: flow instance needs a capacity column")
    try:
        s, t, k = int(meta["source"]), int(meta["sink"]), float(meta["demand"])
    except KeyError as exc:
        raise DataError(f"{path}: missing '# {exc.args[0]}=...' line") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    try:
        return McfpInstance.root(g.n_vertices, g.edges, g.capacities, s, t, k)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
