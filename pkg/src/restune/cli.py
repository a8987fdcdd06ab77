"""Command-line entry point for running the experiment pipeline stage by stage.

Typical flow for the ball study::

    restune gen-data configs/ball_gt.yaml
    restune train    configs/ball_gt.yaml
    restune table2   configs/ball_gt.yaml
    restune table3   configs/ball_gt.yaml
    restune task     configs/task.yaml

Every command reads one YAML config, writes its outputs under the config's
``run_dir``, and records what it produced in ``<run_dir>/manifest.json``.
Exit codes: 0 success, 1 validation failure, 2 missing artifact.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import datasets, nn, sim, tunenet
from .baselines import (
    cmaes_tune,
    direct_predict,
    direct_predict_train,
    entropy_search_tune,
    load_direct,
    mean_baseline,
    observation_mse,
    save_direct,
    TraceRecord,
)
from .errors import ConfigError, MissingArtifactError, RestuneError
from .eval import (
    BounceShotSpec,
    curve_to_csv,
    ensure_dir,
    load_config,
    require_artifact,
    rows_to_csv,
    run_sim2sim_task,
    run_table1,
    run_table2,
    run_table3,
    task_to_csv,
    trace_to_csv,
    update_manifest,
    write_line_chart,
)
from .eval.runs import require
from .eval.tables import episode_simulator
from .params import ParamSpace, scalar_space


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation failures (exit 1, not argparse's 2)."""

    def error(self, message):
        raise ConfigError(message)


def _space(pair) -> ParamSpace:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ConfigError(f"expected a [lo, hi] pair, got {pair!r}")
    return scalar_space(float(pair[0]), float(pair[1]))


def _dataset_spec(name: str, doc: dict, scenario: str) -> datasets.DatasetSpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"dataset {name!r} must be a mapping")
    kwargs = {}
    if "height" in doc:
        kwargs["height_range"] = tuple(float(v) for v in doc["height"])
    for key in ("frames", "observer_p", "observer_t"):
        if key in doc:
            kwargs[key] = doc[key]
    if "rate" in doc:
        kwargs["rate"] = float(doc["rate"])
    try:
        return datasets.DatasetSpec(
            scenario=scenario,
            n_train=int(doc.get("n_train", 0)),
            n_val=int(doc.get("n_val", 0)),
            n_test=int(doc.get("n_test", 0)),
            proposed_range=_space(require(doc, "proposed", name)),
            target_range=_space(require(doc, "target", name)),
            seed=int(require(doc, "seed", name)),
            **kwargs,
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"dataset {name!r}: {e}") from None


def _paths(cfg: dict):
    run_dir = require(cfg, "run_dir")
    return {
        "run": run_dir,
        "data": os.path.join(run_dir, "data"),
        "models": os.path.join(run_dir, "models"),
        "tables": os.path.join(run_dir, "tables"),
        "traces": os.path.join(run_dir, "traces"),
        "task": os.path.join(run_dir, "task"),
    }


def _dataset_path(paths, name: str) -> str:
    return os.path.join(paths["data"], f"{name}.rtd")


def _load_split(paths, name: str, split: str) -> datasets.DatasetSplit:
    ds = datasets.load_dataset(require_artifact(_dataset_path(paths, name)))
    try:
        return getattr(ds, split)
    except AttributeError:
        raise ConfigError(f"unknown split {split!r} (train/val/test)") from None


def _load_models(paths, need_direct: bool = False):
    model = tunenet.load_tunenet(
        require_artifact(os.path.join(paths["models"], "tunenet.json"))
    )
    direct = None
    if need_direct:
        direct = load_direct(require_artifact(os.path.join(paths["models"], "direct.json")))
    return model, direct


def cmd_gen_data(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["data"])
    scenario = require(cfg, "scenario")
    artifacts = []
    for name, doc in require(cfg, "datasets").items():
        spec = _dataset_spec(name, doc, scenario)
        ds = datasets.generate_pairs(spec)
        out = _dataset_path(paths, name)
        datasets.save_dataset(ds, out)
        csv_out = os.path.join(paths["data"], f"{name}.csv")
        datasets.dataset_to_csv(ds, csv_out)
        artifacts += [out, csv_out]
        print(
            f"dataset {name}: {len(ds.train)} train / {len(ds.val)} val / "
            f"{len(ds.test)} test -> {out}"
        )
    update_manifest(paths["run"], "gen-data", cfg, seed, artifacts)
    return 0


def _train_config(doc: dict, seed: int) -> nn.TrainConfig:
    try:
        return nn.TrainConfig(
            epochs=int(require(doc, "epochs", "train")),
            batch_size=int(doc.get("batch_size", 50)),
            learning_rate=float(doc.get("learning_rate", 1e-2)),
            l2_lambda=float(doc.get("l2_lambda", 0.0)),
            lr_decay_fraction=float(doc.get("lr_decay_fraction", 0.0)),
            lr_decay_period_epochs=int(doc.get("lr_decay_period_epochs", 1)),
            seed=seed,
        )
    except ValueError as e:
        raise ConfigError(f"train section: {e}") from None


def cmd_train(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["models"])
    doc = require(cfg, "train")
    split = _load_split(paths, require(doc, "dataset", "train"), "train")
    train_cfg = _train_config(doc, seed)

    model = tunenet.train_tunenet(split, train_cfg)
    model_path = os.path.join(paths["models"], "tunenet.json")
    tunenet.save_tunenet(model, model_path)
    artifacts = [model_path, model_path + ".meta"]
    print(
        f"residual estimator trained on {len(split)} pairs "
        f"(final loss {model.net.loss_history[-1]:.6f}) -> {model_path}"
    )

    if doc.get("direct", False):
        direct_cfg = _train_config(doc, seed + 1)
        direct = direct_predict_train(split, direct_cfg)
        direct_path = os.path.join(paths["models"], "direct.json")
        save_direct(direct, direct_path)
        artifacts += [direct_path, direct_path + ".meta"]
        print(
            f"direct predictor trained on {len(split)} pairs "
            f"(final loss {direct.net.loss_history[-1]:.6f}) -> {direct_path}"
        )
    update_manifest(paths["run"], "train", cfg, seed, artifacts)
    return 0


def _tune_trace(result, simulator, o_t):
    records = []
    for k, est in enumerate(result.estimates):
        disc = observation_mse(simulator(est), o_t)
        records.append(TraceRecord(k, est, disc))
    return records


def cmd_tune(cfg: dict, seed: int, episode: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["traces"])
    doc = require(cfg, "tune")
    name = require(doc, "dataset", "tune")
    split_name = doc.get("split", "test")
    split = _load_split(paths, name, split_name)
    if not 0 <= episode < len(split):
        raise ConfigError(f"episode {episode} out of range (split has {len(split)})")
    model, _ = _load_models(paths)
    sample = split[episode]
    bounds = _space(require(doc, "bounds", "tune"))
    simulator = episode_simulator(split, sample)
    result = tunenet.tune(
        sample.o_t, simulator, sample.zeta_p, model, int(require(doc, "K", "tune")), bounds
    )
    out = os.path.join(paths["traces"], f"tune_{name}_{split_name}_{episode}.csv")
    trace_to_csv(_tune_trace(result, simulator, sample.o_t), out, method="tunenet", subset=name)
    true = float(sample.zeta_t[0])
    print(
        f"episode {episode}: true {true:.4f}, start {float(sample.zeta_p[0]):.4f}, "
        f"tuned {float(result.final[0]):.4f} after {result.rollouts_used} rollouts -> {out}"
    )
    update_manifest(paths["run"], "tune", cfg, seed, [out])
    return 0


def cmd_baseline(cfg: dict, seed: int, method: str, episode: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["traces"])
    doc = require(cfg, "baseline")
    name = require(doc, "dataset", "baseline")
    split_name = doc.get("split", "test")
    split = _load_split(paths, name, split_name)
    if not 0 <= episode < len(split):
        raise ConfigError(f"episode {episode} out of range (split has {len(split)})")
    sample = split[episode]
    bounds = _space(require(doc, "bounds", "baseline"))
    budget = int(doc.get("budget", 100))
    simulator = episode_simulator(split, sample)

    if method == "mean":
        est = mean_baseline([s.zeta_t for s in split])
        records = [TraceRecord(0, est, observation_mse(simulator(est), sample.o_t))]
    elif method == "direct":
        _, direct = _load_models(paths, need_direct=True)
        est = direct_predict(direct, sample.o_t)
        records = [TraceRecord(0, est, observation_mse(simulator(est), sample.o_t))]
    elif method == "cmaes":
        result = cmaes_tune(
            sample.o_t, simulator, sample.zeta_p, budget=budget, bounds=bounds, seed=seed
        )
        records, est = result.trace, result.best_params
    elif method == "entropy":
        result = entropy_search_tune(
            sample.o_t, simulator, sample.zeta_p, budget=budget, bounds=bounds, seed=seed
        )
        records, est = result.trace, result.best_params
    else:
        raise ConfigError(f"unknown baseline method {method!r}")

    out = os.path.join(paths["traces"], f"baseline_{method}_{name}_{split_name}_{episode}.csv")
    trace_to_csv(records, out, method=method, subset=name)
    print(
        f"{method} on episode {episode}: true {float(sample.zeta_t[0]):.4f}, "
        f"estimate {float(np.asarray(est).ravel()[0]):.4f} -> {out}"
    )
    update_manifest(paths["run"], "baseline", cfg, seed, [out])
    return 0


def _print_rows(rows) -> None:
    header = f"{'subset':<8}{'method':<20}{'rollouts':>9}{'param_mae':>12}{'param_pct':>11}{'cm':>9}{'pct':>9}"
    print(header)
    for r in rows:
        def cell(v, width, fmt):
            return format(v, f">{width}{fmt}") if v is not None else "-".rjust(width)

        print(
            f"{r.subset:<8}{r.method:<20}{r.rollouts:>9}"
            f"{cell(r.param_mae, 12, '.4f')}{cell(r.param_pct, 11, '.1f')}"
            f"{cell(r.trans_err_cm, 9, '.2f')}{cell(r.trans_err_pct, 9, '.2f')}"
        )


def cmd_table1(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["tables"])
    doc = require(cfg, "table1")
    val = _load_split(paths, require(doc, "val_dataset", "table1"), "val")
    test = _load_split(paths, require(doc, "test_dataset", "table1"), "test")
    model, _ = _load_models(paths)
    rows = run_table1(
        model,
        val,
        test,
        K=int(doc.get("K", 9)),
        bounds=_space(doc.get("bounds", [0.0, 3.0])),
    )
    out = os.path.join(paths["tables"], "table1.csv")
    rows_to_csv(rows, out)
    _print_rows(rows)
    update_manifest(paths["run"], "table1", cfg, seed, [out])
    return 0


def cmd_table2(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["tables"])
    doc = require(cfg, "table2")
    subsets = [
        (subset, _load_split(paths, ds_name, "test"))
        for subset, ds_name in require(doc, "subsets", "table2").items()
    ]
    model, direct = _load_models(paths, need_direct=True)
    rows, curve = run_table2(
        model,
        direct,
        subsets,
        ks=tuple(doc.get("ks", [1, 5, 10, 100])),
        budget=int(doc.get("budget", 100)),
        seed=seed,
        methods=tuple(doc.get("methods", ["tunenet", "direct", "mean", "cmaes", "entropy"])),
        bounds=_space(doc.get("bounds", [0.0, 1.0])),
    )
    out = os.path.join(paths["tables"], "table2.csv")
    rows_to_csv(rows, out)
    curve_out = os.path.join(paths["tables"], "table2_curve.csv")
    curve_to_csv(curve, curve_out)
    artifacts = [out, curve_out]

    series = {}
    for subset, method, rollouts, mae in curve:
        series.setdefault(f"{method} ({subset})", ([], []))
        series[f"{method} ({subset})"][0].append(rollouts)
        series[f"{method} ({subset})"][1].append(mae)
    chart = [(label, xs, ys) for label, (xs, ys) in series.items()]
    svg_out = os.path.join(paths["tables"], "table2_curve.svg")
    log_ok = all(y > 0 for _, _, ys in chart for y in ys)
    write_line_chart(
        svg_out,
        chart,
        title="Parameter error vs simulator rollouts",
        x_label="rollouts",
        y_label="mean absolute parameter error",
        log_y=log_ok,
    )
    artifacts.append(svg_out)
    _print_rows(rows)
    update_manifest(paths["run"], "table2", cfg, seed, artifacts)
    return 0


def cmd_table3(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["tables"])
    doc = require(cfg, "table3")
    split = _load_split(paths, require(doc, "dataset", "table3"), "test")
    model, _ = _load_models(paths)
    rows = run_table3(
        model,
        split,
        K=int(doc.get("K", 5)),
        seed=seed,
        bounds=_space(doc.get("bounds", [0.0, 1.0])),
    )
    out = os.path.join(paths["tables"], "table3.csv")
    rows_to_csv(rows, out)
    _print_rows(rows)
    update_manifest(paths["run"], "table3", cfg, seed, [out])
    return 0


def cmd_task(cfg: dict, seed: int) -> int:
    paths = _paths(cfg)
    ensure_dir(paths["task"])
    doc = require(cfg, "task")
    spec_kwargs = {}
    for key in ("hoop_radius", "n_candidates", "drop_x", "ball_radius", "incline_angle"):
        if key in doc:
            spec_kwargs[key] = doc[key]
    if "hoop_center" in doc:
        spec_kwargs["hoop_center"] = tuple(float(v) for v in doc["hoop_center"])
    if "height_range" in doc:
        spec_kwargs["height_range"] = tuple(float(v) for v in doc["height_range"])
    try:
        spec = BounceShotSpec(**spec_kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"task section: {e}") from None
    n_trials = int(doc.get("n_trials", 50))
    cor_range = tuple(float(v) for v in doc.get("true_cor_range", [0.3, 0.7]))
    model, _ = _load_models(paths)

    tuned = run_sim2sim_task(
        n_trials, cor_range, model=model, K=int(doc.get("K", 5)), seed=seed, spec=spec
    )
    oracle = run_sim2sim_task(n_trials, cor_range, seed=seed, spec=spec, oracle=True)
    out = os.path.join(paths["task"], "task.csv")
    task_to_csv(tuned, out)
    oracle_out = os.path.join(paths["task"], "task_oracle.csv")
    task_to_csv(oracle, oracle_out)
    print(
        f"sim-to-sim bounce shot over {n_trials} trials: tuned success "
        f"{tuned.success_rate:.0%}, oracle ceiling {oracle.success_rate:.0%}"
    )
    update_manifest(paths["run"], "task", cfg, seed, [out, oracle_out])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="restune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **extra):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the experiment YAML config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        for flag, kwargs in extra.items():
            p.add_argument(flag, **kwargs)
        return p

    add("gen-data", "generate and save the configured datasets")
    add("train", "train the residual estimator (and optional direct predictor)")
    add(
        "tune",
        "run one tuning episode and dump its trace",
        **{"--episode": {"type": int, "default": 0, "help": "test-episode index"}},
    )
    add(
        "baseline",
        "run one baseline method on one episode",
        **{
            "--method": {
                "required": True,
                "choices": ["mean", "direct", "cmaes", "entropy"],
            },
            "--episode": {"type": int, "default": 0},
        },
    )
    add("table1", "payload-mass identification table")
    add("table2", "restitution error vs rollout budget table and curves")
    add("table3", "trajectory error table")
    add("task", "sim-to-sim bounce-shot planning task")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if args.command == "gen-data":
            return cmd_gen_data(cfg, seed)
        if args.command == "train":
            return cmd_train(cfg, seed)
        if args.command == "tune":
            return cmd_tune(cfg, seed, args.episode)
        if args.command == "baseline":
            return cmd_baseline(cfg, seed, args.method, args.episode)
        if args.command == "table1":
            return cmd_table1(cfg, seed)
        if args.command == "table2":
            return cmd_table2(cfg, seed)
        if args.command == "table3":
            return cmd_table3(cfg, seed)
        if args.command == "task":
            return cmd_task(cfg, seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except MissingArtifactError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ConfigError, RestuneError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
