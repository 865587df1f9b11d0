"""Seeded train/test experiments and their CSV or JSON reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import datagen
from .baseline import fit_least_squares
from .core import ProblemSpec, resolve
from .problems.knapsack import KNAPSACK, KnapsackInstance
from .problems.mcfp import MCFP
from .problems.mcvc import MCVC, McvcInstance
from .problems.spp import SPP, SppInstance
from .trainer import TrainConfig, coordinate_descent, holdout_regrets

log = logging.getLogger(__name__)

PROBLEMS = ("ks", "spp", "mcfp", "mcvc")
METHODS = ("bnl", "lr")
COLUMNS = ("method", "problem", "graph", "n", "sim", "regret", "true_opt", "seconds")
SPECS: dict[str, ProblemSpec] = {"ks": KNAPSACK, "spp": SPP, "mcfp": MCFP, "mcvc": MCVC}


@dataclass
class ExperimentConfig:
    problem: str = "mcvc"
    graph: str = "polska"
    dataset: str = "artificial"  # artificial, linear or a dataset CSV path
    instance: str | None = None  # knapsack or flow instance file, fixed across simulations
    n: int = 100
    sims: int = 1
    methods: tuple[str, ...] = METHODS
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    ratio: float = 0.7
    items: int = 10  # knapsack size
    offset: float = datagen.DEFAULT_OFFSET
    degrees: bool = False
    endpoints: tuple[int, int] | None = None
    prune: bool = True
    timings: bool = False

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")
        self.methods = tuple(self.methods)
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if self.sims < 1:
            raise ValueError("sims must be at least 1")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.dataset not in ("artificial", "linear") and not Path(self.dataset).is_file():
            raise ValueError(f"dataset file {self.dataset!r} not found")
        if self.instance is not None:
            if self.problem not in ("ks", "mcfp"):
                raise ValueError("instance files are read for ks and mcfp only")
            if not Path(self.instance).is_file():
                raise ValueError(f"instance file {self.instance!r} not found")
        elif self.problem != "ks":
            datagen.resolve_graph(self.graph)


@dataclass
class ReportRow:
    method: str
    problem: str
    graph: str
    n: int
    sim: int
    regret: float
    true_opt: float
    seconds: float | None = None


def build_instance(cfg: ExperimentConfig, seed: int):
    """The optimisation instance shared by every example of one simulation."""
    if cfg.problem == "ks" and cfg.instance:
        kf = datagen.load_knapsack_csv(cfg.instance)
        return KnapsackInstance.root(kf.costs, kf.budget)
    if cfg.problem == "mcfp" and cfg.instance:
        return datagen.load_flow_instance(cfg.instance)
    if cfg.problem == "ks":
        costs, budget = datagen.gen_knapsack(cfg.items, seed)
        return KnapsackInstance.root(costs, budget)
    g = datagen.resolve_graph(cfg.graph)
    if cfg.problem == "mcvc":
        return McvcInstance.root(g.n_vertices, g.edges, prune=cfg.prune)
    if cfg.problem == "mcfp":
        return datagen.gen_flow_instance(g, seed, fixed=cfg.endpoints)
    if cfg.endpoints is not None:
        s, t = cfg.endpoints
    else:
        s, t = datagen.choose_endpoints(g, np.random.default_rng(seed))
    return SppInstance.root(g.n_vertices, g.edges, s, t)


def build_dataset(cfg: ExperimentConfig, t: int, seed: int) -> datagen.Dataset:
    if cfg.dataset == "artificial":
        return datagen.gen_artificial(t, cfg.n, cfg.offset, seed, cfg.degrees)
    if cfg.dataset == "linear":
        alpha = np.random.default_rng(seed).uniform(0.5, 5.0, size=datagen.N_FEATURES)
        return datagen.gen_linear(t, cfg.n, alpha, seed)
    d = datagen.load_dataset_csv(cfg.dataset, t=t)
    if len(d) < 2:
        raise datagen.DataError("dataset needs at least two examples to split")
    return d


def _feasible(spec: ProblemSpec, inst, data) -> bool:
    for ex in data:
        sol, value = resolve(spec, inst, ex.truth)
        if not math.isfinite(value) or getattr(sol, "feasible", True) is False:
            return False
    return True


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    """One row per method and simulation; simulation ``i`` is seeded with ``seed + i``.

    Simulations whose instance is infeasible under some true parameter
    vector are skipped with a warning.
    """
    spec = SPECS[cfg.problem]
    graph = Path(cfg.instance).stem if cfg.instance else ("" if cfg.problem == "ks" else cfg.graph)
    rows: list[ReportRow] = []
    skipped = 0
    for sim in range(cfg.sims):
        seed = cfg.seed + sim
        inst = build_instance(cfg, seed)
        data = build_dataset(cfg, spec.num_params(inst), seed)
        if not _feasible(spec, inst, data.examples):
            skipped += 1
            log.warning("simulation %d skipped: infeasible instance", sim)
            continue
        train, test = datagen.split(data, cfg.ratio, seed)
        for method in cfg.methods:
            started = time.perf_counter()
            if method == "lr":
                alpha = fit_least_squares(train.examples).alpha
            else:
                tc = TrainConfig(**{**asdict(cfg.train), "seed": seed})
                alpha = coordinate_descent(spec, inst, train.examples, tc).alpha
            regrets, opts = holdout_regrets(spec, inst, test.examples, alpha)
            elapsed = time.perf_counter() - started
            rows.append(
                ReportRow(
                    method, cfg.problem, graph, cfg.n, sim,
                    statistics.fmean(regrets), statistics.fmean(opts),
                    elapsed if cfg.timings else None,
                )
            )
    if skipped:
        log.warning("%d of %d simulations skipped", skipped, cfg.sims)
    return rows


def summarize(rows: list[ReportRow]) -> list[dict]:
    """Per method: mean and sample std of regrets, mean true optimum and time."""
    out = []
    for method in dict.fromkeys(r.method for r in rows):
        sel = [r for r in rows if r.method == method]
        regrets = [r.regret for r in sel]
        secs = [r.seconds for r in sel if r.seconds is not None]
        base = {"method": method, "problem": sel[0].problem, "graph": sel[0].graph, "n": sel[0].n}
        out.append(
            {
                **base,
                "sim": "mean",
                "regret": statistics.fmean(regrets),
                "true_opt": statistics.fmean(r.true_opt for r in sel),
                "seconds": statistics.fmean(secs) if secs else None,
            }
        )
        out.append(
            {
                **base,
                "sim": "std",
                "regret": statistics.stdev(regrets) if len(regrets) > 1 else 0.0,
                "true_opt": None,
                "seconds": None,
            }
        )
    return out


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_report(rows: list[ReportRow], fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "json":
        payload = {"rows": [asdict(r) for r in rows], "summary": summarize(rows)}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    for s in summarize(rows):
        w.writerow([_cell(s[c]) for c in COLUMNS])
    return buf.getvalue()


def emit_report(rows: list[ReportRow], path, fmt: str = "csv") -> None:
    Path(path).write_text(render_report(rows, fmt), encoding="utf-8")


def read_report(path) -> list[ReportRow]:
    """Per-simulation rows of a report written by :func:`emit_report`."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return [ReportRow(**r) for r in json.loads(text)["rows"]]
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        if rec["sim"] in ("mean", "std"):
            continue
        rows.append(
            ReportRow(
                rec["method"], rec["problem"], rec["graph"], int(rec["n"]), int(rec["sim"]),
                float(rec["regret"]), float(rec["true_opt"]),
                float(rec["seconds"]) if rec["seconds"] else None,
            )
        )
    return rows
