"""Command line entry point: ``branchlearn {gen-data,train,eval,bench}``.

Every option may also come from a JSON object given with ``--config``;
flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import statistics
import sys
from pathlib import Path

import numpy as np

from . import datagen
from .baseline import fit_least_squares
from .experiment import (
    METHODS,
    PROBLEMS,
    SPECS,
    ExperimentConfig,
    build_dataset,
    build_instance,
    emit_report,
    render_report,
    run_experiment,
)
from .trainer import INITS, STEPS, TrainConfig, coordinate_descent, holdout_regrets

# option name -> default, shared by all subcommands
DEFAULTS = {
    "problem": "mcvc",
    "graph": "polska",
    "data": "artificial",
    "n": 100,
    "sims": 1,
    "methods": "bnl,lr",
    "seed": 0,
    "epochs": 5,
    "tol": 1e-6,
    "big_m": 1e12,
    "init": "least_squares",
    "step": "nearest",
    "items": 10,
    "offset": datagen.DEFAULT_OFFSET,
    "degrees": False,
    "format": "csv",
    "timings": False,
    "model": None,
    "instance": None,
    "out": None,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--graph", help=f"bundled graph ({', '.join(datagen.bundled_graphs())}) or graph CSV path")
    p.add_argument("--data", help="'artificial', 'linear' or a dataset CSV path")
    p.add_argument("--instance", help="knapsack or flow instance CSV (ks, mcfp)")
    p.add_argument("--n", type=int, help="examples per simulation")
    p.add_argument("--seed", type=int)
    p.add_argument("--items", type=int, help="knapsack items")
    p.add_argument("--offset", type=float, help="constant added to artificial parameters")
    p.add_argument("--degrees", action="store_true", default=None, help="artificial angles in degrees")
    p.add_argument("--out", help="output path")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_training(p: argparse.ArgumentParser) -> None:
    p.add_argument("--methods", help="comma separated subset of bnl,lr")
    p.add_argument("--epochs", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--big-m", dest="big_m", type=float)
    p.add_argument("--init", choices=INITS)
    p.add_argument("--step", choices=STEPS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="branchlearn", description="Regret-driven training of linear parameter predictors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write an artificial or linear dataset CSV")
    _add_common(p)

    p = sub.add_parser("train", help="fit coefficients on a dataset and write them as JSON")
    _add_common(p)
    _add_training(p)

    p = sub.add_parser("eval", help="per-example test regret of saved coefficients")
    _add_common(p)
    p.add_argument("--model", help="coefficients JSON written by 'train'")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("bench", help="run seeded simulations and write a report")
    _add_common(p)
    _add_training(p)
    p.add_argument("--sims", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--timings", action="store_true", default=None, help="record wall time per run")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if args.config:
        loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            opts[key] = value
    if isinstance(opts["methods"], str):
        opts["methods"] = [m.strip() for m in opts["methods"].split(",") if m.strip()]
    return opts


def experiment_config(opts: dict, sims: int | None = None) -> ExperimentConfig:
    train = TrainConfig(
        max_epochs=opts["epochs"], tol=opts["tol"], big_m=opts["big_m"], init=opts["init"], step=opts["step"]
    )
    return ExperimentConfig(
        problem=opts["problem"],
        graph=opts["graph"],
        dataset=opts["data"],
        instance=opts["instance"],
        n=opts["n"],
        sims=sims or opts["sims"],
        methods=tuple(opts["methods"]),
        seed=opts["seed"],
        train=train,
        items=opts["items"],
        offset=opts["offset"],
        degrees=bool(opts["degrees"]),
        timings=bool(opts["timings"]),
    )


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen_data(opts: dict) -> None:
    if opts["data"] not in ("artificial", "linear"):
        raise ValueError("gen-data needs --data artificial or linear")
    if not opts["out"]:
        raise ValueError("gen-data needs --out")
    cfg = experiment_config(opts, sims=1)
    spec = SPECS[cfg.problem]
    d = build_dataset(cfg, spec.num_params(build_instance(cfg, cfg.seed)), cfg.seed)
    d.meta.update(problem=cfg.problem, graph=cfg.graph)
    datagen.write_dataset_csv(d, opts["out"])


def _load_data(cfg: ExperimentConfig):
    spec = SPECS[cfg.problem]
    inst = build_instance(cfg, cfg.seed)
    return spec, inst, build_dataset(cfg, spec.num_params(inst), cfg.seed)


def cmd_train(opts: dict) -> None:
    cfg = experiment_config(opts, sims=1)
    spec, inst, d = _load_data(cfg)
    method = cfg.methods[0]
    model = {"method": method, "problem": cfg.problem, "graph": cfg.graph, "seed": cfg.seed}
    if method == "lr":
        model["alpha"] = fit_least_squares(d.examples).alpha.tolist()
    else:
        report = coordinate_descent(spec, inst, d.examples, cfg.train)
        model["alpha"] = report.alpha.tolist()
        model["trace"] = report.total_regret_trace
        model["epochs"] = report.epochs_run
    _write(json.dumps(model, indent=2) + "\n", opts["out"])


def cmd_eval(opts: dict) -> None:
    if not opts["model"]:
        raise ValueError("eval needs --model")
    model = json.loads(Path(opts["model"]).read_text(encoding="utf-8"))
    cfg = experiment_config(opts, sims=1)
    spec, inst, d = _load_data(cfg)
    alpha = np.asarray(model["alpha"], dtype=float)
    regrets, true_opts = holdout_regrets(spec, inst, d.examples, alpha)
    if opts["format"] == "json":
        payload = {"regret": regrets, "true_opt": true_opts, "mean_regret": statistics.fmean(regrets)}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["example", "regret", "true_opt"])
        w.writerows((i, repr(r), repr(o)) for i, (r, o) in enumerate(zip(regrets, true_opts)))
        w.writerow(["mean", repr(statistics.fmean(regrets)), repr(statistics.fmean(true_opts))])
        text = buf.getvalue()
    _write(text, opts["out"])


def cmd_bench(opts: dict) -> None:
    rows = run_experiment(experiment_config(opts))
    if not rows:
        raise ValueError("every simulation was skipped")
    if opts["out"]:
        emit_report(rows, opts["out"], opts["format"])
    else:
        sys.stdout.write(render_report(rows, opts["format"]))


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        opts = resolve_options(args)
        if any(m not in METHODS for m in opts["methods"]):
            raise ValueError(f"methods must be drawn from {METHODS}")
        COMMANDS[args.command](opts)
    except (ValueError, OSError, KeyError) as exc:
        print(f"branchlearn: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
