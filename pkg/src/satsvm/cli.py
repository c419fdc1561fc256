"""Command-line entry point.

Every subcommand writes its outputs plus a manifest (the fully resolved
parameter set) beside the primary output; re-running a command from its
manifest via ``--config`` reproduces the outputs byte for byte. The one
exception is the measured wall-clock ``time_s`` field of grid results,
which is honest timing and therefore not reproducible.

Exit codes: 0 success, 2 usage or validation error, 3 data error,
4 numeric failure during optimization.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .data import (
    CorruptionMode,
    CorruptionRecord,
    DataFormat,
    apply_scaler,
    invert_corruption,
    inject_label_noise,
    inject_outliers,
    load_dataset,
    make_folds,
    normalize,
    write_csv,
)
from .errors import (
    CapacityError,
    DataFormatError,
    DegenerateStatisticError,
    NumericError,
    ParameterError,
    SatsvmError,
    ShapeError,
)
from .harness import GridSpec, accuracy, grid_search, sensitivity_sweep
from .kernel import KernelSpec
from .loss import LossSpec
from .seeds import child_seed
from .stats import RankTable, friedman_nemenyi, rank_models
from .theory import CalibrationResult, ConditionalRiskQuery, calibration_check, conditional_risk
from .trainer import TrainerConfig, fit, load_model, predict_batch, decision_values, save_model

MANIFEST_FORMAT = 1

_TRAINER_DEFAULTS = {
    "C": 1.0,
    "loss": "expsat",
    "a": 1.0,
    "lam": 1.0,
    "tau": 0.5,
    "delta": 1.0,
    "delta1": 1.0,
    "delta2": 1.0,
    "kernel": "gaussian",
    "sigma": 1.0,
    "beta0": 0.01,
    "v0": 0.01,
    "alpha0": 0.1,
    "eta": 0.1,
    "r": 0.6,
    "batch_size": None,
    "max_iters": 1000,
}

_GRID_DEFAULT = GridSpec()

DEFAULTS = {
    "train": {"input": None, "format": "csv", "output": "model.json", "seed": 0, "normalize": True,
              **_TRAINER_DEFAULTS},
    "predict": {"model": None, "input": None, "format": "csv", "output": "predictions.csv"},
    "grid": {"input": None, "format": "csv", "output": "grid_results.csv", "seed": 0,
             "normalize": True, "models": "expsat", "folds": 5,
             "c_grid": list(_GRID_DEFAULT.c_grid), "sigma_grid": list(_GRID_DEFAULT.sigma_grid),
             "a_grid": list(_GRID_DEFAULT.a_grid), "lambda_grid": list(_GRID_DEFAULT.lambda_grid),
             "tau_grid": list(_GRID_DEFAULT.tau_grid), **_TRAINER_DEFAULTS},
    "corrupt": {"input": None, "format": "csv", "output": "corrupted.csv", "record": None,
                "mode": "outliers", "rate": 0.1, "factor": 10.0, "seed": 0, "invert": False},
    "stats": {"input": None, "input_kind": "accuracies", "num_datasets": None,
              "alpha": 0.05, "critical_f": None, "output": "stats_report.csv"},
    "loss-curve": {"loss": "expsat", "a": 1.0, "lam": 1.0, "tau": 0.5, "delta": 1.0,
                   "delta1": 1.0, "delta2": 1.0, "u_min": -2.0, "u_max": 3.0, "u_step": 0.01,
                   "output": "loss_curve.csv"},
    "calibration": {"a": 1.0, "lam": 1.0, "p": 0.7, "f_lo": -3.0, "f_hi": 3.0, "f_step": 1e-3,
                    "output": "calibration_curve.csv"},
    "sweep": {"input": None, "format": "csv", "output": "sweep.csv", "seed": 0, "normalize": True,
              "folds": 5, "a_grid": [0.5, 1.0, 2.0, 5.0], "lambda_grid": [0.5, 1.0, 1.5, 2.0],
              **_TRAINER_DEFAULTS},
}


def _fmt(v) -> str:
    """Full round-trip text for one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(command: str, params: dict, output: str):
    doc = {
        "tool": "satsvm",
        "version": __version__,
        "manifest_format": MANIFEST_FORMAT,
        "command": command,
        "params": params,
    }
    with open(output + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _floats(value) -> list[float]:
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip() != ""]
    return [float(v) for v in value]


def _loss_spec(p: dict) -> LossSpec:
    return LossSpec(
        kind=p["loss"], a=p["a"], lam=p["lam"], tau=p["tau"],
        delta=p["delta"], delta1=p["delta1"], delta2=p["delta2"],
    )


def _trainer_config(p: dict, loss: LossSpec | None = None, seed: int | None = None) -> TrainerConfig:
    return TrainerConfig(
        C=p["C"],
        loss=loss if loss is not None else _loss_spec(p),
        kernel=KernelSpec(kind=p["kernel"], sigma=p["sigma"]),
        beta0=p["beta0"], v0=p["v0"], alpha0=p["alpha0"], eta=p["eta"], r=p["r"],
        batch_size=p["batch_size"], max_iters=p["max_iters"],
        seed=p["seed"] if seed is None else seed,
    )


def _load(p: dict):
    return load_dataset(p["input"], DataFormat(p["format"]))


def cmd_train(p: dict) -> int:
    ds = _load(p)
    if p["normalize"]:
        ds = normalize(ds)
    config = _trainer_config(p, seed=child_seed(p["seed"], "batches"))
    model = fit(config, ds.X, ds.y)
    if ds.scaler is not None:
        from dataclasses import replace

        model = replace(model, scaler=ds.scaler)
    with open(p["output"], "w", encoding="utf-8") as fh:
        fh.write(save_model(model))
    train_acc = accuracy(predict_batch(model, ds.X), ds.y)
    _write_manifest("train", p, p["output"])
    print(f"final_objective={model.final_objective!r} train_accuracy={train_acc!r}")
    return 0


def cmd_predict(p: dict) -> int:
    with open(p["model"], "r", encoding="utf-8") as fh:
        model = load_model(fh.read())
    ds = _load(p)
    if model.scaler is not None:
        ds = apply_scaler(ds, model.scaler)
    preds = predict_batch(model, ds.X)
    values = decision_values(model, ds.X)
    _write_rows(p["output"], ["prediction", "decision_value"],
                [(float(a), float(b)) for a, b in zip(preds, values)])
    _write_manifest("predict", p, p["output"])
    return 0


def cmd_grid(p: dict) -> int:
    ds = _load(p)
    if p["normalize"]:
        ds = normalize(ds)
    plan = make_folds(ds.n, p["folds"], seed=child_seed(p["seed"], "folds"))
    grid = GridSpec(
        c_grid=tuple(_floats(p["c_grid"])),
        sigma_grid=tuple(_floats(p["sigma_grid"])),
        a_grid=tuple(_floats(p["a_grid"])),
        lambda_grid=tuple(_floats(p["lambda_grid"])),
        tau_grid=tuple(_floats(p["tau_grid"])),
    )
    kinds = p["models"].split(",") if isinstance(p["models"], str) else list(p["models"])
    rows = []
    for kind in kinds:
        loss = LossSpec(kind=kind.strip(), a=p["a"], lam=p["lam"], tau=p["tau"],
                        delta=p["delta"], delta1=p["delta1"], delta2=p["delta2"])
        config = _trainer_config(p, loss=loss, seed=child_seed(p["seed"], f"train/{loss.kind.value}"))
        result = grid_search(ds, config, grid, plan)
        bp = result.best_params
        rows.append((
            result.dataset, result.model, result.mean_accuracy, result.std_accuracy,
            result.train_time_seconds, bp.get("C"), bp.get("sigma"), bp.get("a"),
            bp.get("lam"), bp.get("tau"),
        ))
    _write_rows(p["output"], ["dataset", "model", "mean_acc", "std_acc", "time_s",
                              "C", "sigma", "a", "lam", "tau"], rows)
    _write_manifest("grid", p, p["output"])
    return 0


def cmd_corrupt(p: dict) -> int:
    ds = _load(p)
    record_path = p["record"] or p["output"] + ".record.json"
    if p["invert"]:
        with open(record_path, "r", encoding="utf-8") as fh:
            record = CorruptionRecord.from_dict(json.load(fh))
        restored = invert_corruption(ds, record)
        write_csv(restored, p["output"])
        _write_manifest("corrupt", p, p["output"])
        return 0
    mode = CorruptionMode(p["mode"])
    seed = child_seed(p["seed"], "corruption")
    if mode is CorruptionMode.OUTLIERS:
        corrupted, record = inject_outliers(ds, p["rate"], factor=p["factor"], seed=seed)
    else:
        corrupted, record = inject_label_noise(ds, p["rate"], seed=seed)
    write_csv(corrupted, p["output"])
    with open(record_path, "w", encoding="utf-8") as fh:
        json.dump(record.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest("corrupt", p, p["output"])
    print(f"touched {len(record.touched_indices)} of {ds.n} samples")
    return 0


def _read_table(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataFormatError("empty table")
    header = [c.strip() for c in lines[0].split(",")]
    body = [[c.strip() for c in ln.split(",")] for ln in lines[1:]]
    return header, body


def _pivot_results(header, body):
    """Long-format harness results (dataset, model, mean_acc, ...) to a
    D-by-p accuracy matrix; every dataset must cover every model."""
    d_i, m_i, a_i = header.index("dataset"), header.index("model"), header.index("mean_acc")
    datasets = list(dict.fromkeys(row[d_i] for row in body))
    models = list(dict.fromkeys(row[m_i] for row in body))
    acc = np.full((len(datasets), len(models)), np.nan)
    for row in body:
        acc[datasets.index(row[d_i]), models.index(row[m_i])] = float(row[a_i])
    if np.isnan(acc).any():
        raise DataFormatError("results table is missing some (dataset, model) cells")
    return acc, models


def cmd_stats(p: dict) -> int:
    header, body = _read_table(p["input"])
    if p["input_kind"] == "mean-ranks":
        if p["num_datasets"] is None:
            raise ParameterError("--num-datasets is required with mean-rank input")
        if len(body) != 1:
            raise DataFormatError("mean-rank input must have exactly one data row")
        table = RankTable.from_mean_ranks(
            [float(v) for v in body[0]], D=int(p["num_datasets"]), models=header
        )
    elif header[:3] == ["dataset", "model", "mean_acc"]:
        acc, models = _pivot_results(header, body)
        table = rank_models(acc, models=models)
    else:
        models = header[1:]
        acc = np.array([[float(v) for v in row[1:]] for row in body])
        table = rank_models(acc, models=models)
    report = friedman_nemenyi(table, critical_F=p["critical_f"], alpha=p["alpha"])
    best = int(np.argmin(report.mean_ranks))
    names = report.models or tuple(f"model_{i+1}" for i in range(len(report.mean_ranks)))
    rows = []
    for i, name in enumerate(names):
        diff = None if i == best else float(report.pairwise_diffs[i, best])
        sig = None if i == best else bool(report.significant[i, best])
        rows.append((
            name, float(report.mean_ranks[i]), diff, sig,
            report.chi2, report.F_F, report.dof[0], report.dof[1],
            report.critical_F, report.reject, report.CD,
        ))
    _write_rows(p["output"], ["model", "mean_rank", "rank_diff", "significant",
                              "chi2", "F_F", "dof1", "dof2", "critical_F", "reject", "CD"], rows)
    _write_manifest("stats", p, p["output"])
    print(f"chi2={report.chi2!r} F_F={report.F_F!r} CD={report.CD!r} reject={report.reject}")
    return 0


def cmd_loss_curve(p: dict) -> int:
    from .loss import loss_derivative, loss_value

    spec = _loss_spec(p)
    count = int(round((p["u_max"] - p["u_min"]) / p["u_step"])) + 1
    u = p["u_min"] + p["u_step"] * np.arange(count)
    values = loss_value(spec, u)
    derivs = loss_derivative(spec, u)
    _write_rows(p["output"], ["u", "value", "derivative"],
                [(float(a), float(b), float(c)) for a, b, c in zip(u, values, derivs)])
    _write_manifest("loss-curve", p, p["output"])
    return 0


def cmd_calibration(p: dict) -> int:
    q = ConditionalRiskQuery(
        loss=LossSpec.expsat(a=p["a"], lam=p["lam"]), P=p["p"],
        f_lo=p["f_lo"], f_hi=p["f_hi"], f_step=p["f_step"],
    )
    f = q.grid()
    risk = conditional_risk(q, f)
    _write_rows(p["output"], ["f", "risk"], [(float(a), float(b)) for a, b in zip(f, risk)])
    _write_manifest("calibration", p, p["output"])
    result: CalibrationResult = calibration_check(q)
    if result.degenerate:
        print(f"f_star={result.f_star!r} degenerate=true")
    else:
        print(f"f_star={result.f_star!r} sign_matches_bayes={result.sign_matches_bayes}")
    return 0


def cmd_sweep(p: dict) -> int:
    ds = _load(p)
    if p["normalize"]:
        ds = normalize(ds)
    plan = make_folds(ds.n, p["folds"], seed=child_seed(p["seed"], "folds"))
    config = _trainer_config(
        p, loss=LossSpec.expsat(a=p["a"], lam=p["lam"]), seed=child_seed(p["seed"], "train/expsat")
    )
    rows = sensitivity_sweep(ds, config, _floats(p["a_grid"]), _floats(p["lambda_grid"]), plan)
    _write_rows(p["output"], ["a", "lam", "mean_accuracy"], rows)
    _write_manifest("sweep", p, p["output"])
    return 0


_COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "grid": cmd_grid,
    "corrupt": cmd_corrupt,
    "stats": cmd_stats,
    "loss-curve": cmd_loss_curve,
    "calibration": cmd_calibration,
    "sweep": cmd_sweep,
}


def _add_trainer_flags(sp):
    sp.add_argument("--C", type=float, dest="C")
    sp.add_argument("--loss", choices=["expsat", "hinge", "pinball", "zero_one",
                                       "truncated_hinge", "truncated_pinball"])
    sp.add_argument("--a", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--delta1", type=float)
    sp.add_argument("--delta2", type=float)
    sp.add_argument("--kernel", choices=["gaussian", "linear"])
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--beta0", type=float)
    sp.add_argument("--v0", type=float)
    sp.add_argument("--alpha0", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--momentum", type=float, dest="r")
    sp.add_argument("--batch-size", type=int, dest="batch_size")
    sp.add_argument("--max-iters", type=int, dest="max_iters")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satsvm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"satsvm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="JSON config or a previously emitted manifest")
        sp.add_argument("--output")
        return sp

    sp = add("train", "fit a model and serialize it")
    sp.add_argument("--input")
    sp.add_argument("--format", choices=["csv", "sparse"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--no-normalize", dest="normalize", action="store_false")
    _add_trainer_flags(sp)

    sp = add("predict", "classify rows of a data file with a saved model")
    sp.add_argument("--model")
    sp.add_argument("--input")
    sp.add_argument("--format", choices=["csv", "sparse"])

    sp = add("grid", "grid search with k-fold cross-validation")
    sp.add_argument("--input")
    sp.add_argument("--format", choices=["csv", "sparse"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--no-normalize", dest="normalize", action="store_false")
    sp.add_argument("--models", help="comma-separated loss kinds")
    sp.add_argument("--folds", type=int)
    sp.add_argument("--c-grid", dest="c_grid")
    sp.add_argument("--sigma-grid", dest="sigma_grid")
    sp.add_argument("--a-grid", dest="a_grid")
    sp.add_argument("--lambda-grid", dest="lambda_grid")
    sp.add_argument("--tau-grid", dest="tau_grid")
    _add_trainer_flags(sp)

    sp = add("corrupt", "inject outliers or label noise, or invert a record")
    sp.add_argument("--input")
    sp.add_argument("--format", choices=["csv", "sparse"])
    sp.add_argument("--mode", choices=["outliers", "labels"])
    sp.add_argument("--rate", type=float)
    sp.add_argument("--factor", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--record")
    sp.add_argument("--invert", action="store_true")

    sp = add("stats", "Friedman / Nemenyi report from accuracies or mean ranks")
    sp.add_argument("--input")
    sp.add_argument("--input-kind", dest="input_kind", choices=["accuracies", "mean-ranks"])
    sp.add_argument("--num-datasets", dest="num_datasets", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--critical-f", dest="critical_f", type=float)

    sp = add("loss-curve", "emit (u, value, derivative) samples of a loss")
    sp.add_argument("--loss", choices=["expsat", "hinge", "pinball", "zero_one",
                                       "truncated_hinge", "truncated_pinball"])
    sp.add_argument("--a", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--delta1", type=float)
    sp.add_argument("--delta2", type=float)
    sp.add_argument("--u-min", dest="u_min", type=float)
    sp.add_argument("--u-max", dest="u_max", type=float)
    sp.add_argument("--u-step", dest="u_step", type=float)

    sp = add("calibration", "emit the conditional-risk curve for one P")
    sp.add_argument("--a", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--f-lo", dest="f_lo", type=float)
    sp.add_argument("--f-hi", dest="f_hi", type=float)
    sp.add_argument("--f-step", dest="f_step", type=float)

    sp = add("sweep", "loss-parameter sensitivity surface")
    sp.add_argument("--input")
    sp.add_argument("--format", choices=["csv", "sparse"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--no-normalize", dest="normalize", action="store_false")
    sp.add_argument("--folds", type=int)
    sp.add_argument("--a-grid", dest="a_grid")
    sp.add_argument("--lambda-grid", dest="lambda_grid")
    sp.add_argument("--C", type=float, dest="C")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--batch-size", type=int, dest="batch_size")
    sp.add_argument("--max-iters", type=int, dest="max_iters")

    return parser


def resolve_params(command: str, supplied: dict) -> dict:
    """Layer defaults, then --config contents, then explicit flags."""
    params = dict(DEFAULTS[command])
    config_path = supplied.pop("config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if "params" in doc:
            if doc.get("command") not in (None, command):
                raise ParameterError(
                    f"config was emitted for {doc.get('command')!r}, not {command!r}"
                )
            doc = doc["params"]
        unknown = set(doc) - set(params)
        if unknown:
            raise ParameterError(f"unknown config keys for {command}: {sorted(unknown)}")
        params.update(doc)
    params.update(supplied)
    missing = [k for k in ("input", "model") if k in params and params[k] is None]
    if missing:
        raise ParameterError(f"missing required option(s): {', '.join('--' + m for m in missing)}")
    return params


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    supplied = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        params = resolve_params(args.command, supplied)
        return _COMMANDS[args.command](params)
    except (ParameterError, ShapeError, CapacityError, DegenerateStatisticError) as exc:
        print(f"satsvm: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"satsvm: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"satsvm: {exc}", file=sys.stderr)
        return 4
    except SatsvmError as exc:  # pragma: no cover
        print(f"satsvm: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
