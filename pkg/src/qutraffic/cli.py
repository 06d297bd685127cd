"""Experiment command line: reproducible runs emitting CSV/JSON artifacts.

Subcommands: ``gen-synthetic`` (write a synthetic dataset directory),
``classify`` (overlap classifiers -> results.json), ``train`` (QNN ->
metrics.csv, model.json, confusion.json), and ``sweep-noise`` (noisy
accuracy grid -> noise_sweep.csv). Every run echoes its resolved
configuration into run.json; outputs are written atomically and are
byte-identical for a fixed (config, seed).

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classify import class_centroids, uu_classify, weighted_accuracy
from .data import (
    CLASS_NAMES,
    DataFormatError,
    Dataset,
    SyntheticSpec,
    gen_synthetic,
    load_dataset,
    stratified_split,
    write_pgm,
)
from .encodings import EncodingSpec
from .noise import CHANNEL_KINDS, SWEEP_GRID, NoiseChannel
from .qnn import TrainConfig, evaluate_noisy, load_model, metrics_csv, model_json, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_DEFAULTS = {
    "gen-synthetic": {
        "out": None,
        "per_class": 10,
        "sigma": 20.0,
        "side": 2,
        "seed": 0,
    },
    "classify": {
        "out": None,
        "data": None,
        "synthetic": False,
        "per_class": 200,
        "sigma": 20.0,
        "side": 2,
        "method": "uu",
        "encoding": "frqi",
        "layers": 1,
        "train_fraction": 0.8,
        "seed": 0,
    },
    "train": {
        "out": None,
        "data": None,
        "synthetic": False,
        "per_class": 200,
        "sigma": 20.0,
        "side": 2,
        "encoding": "angle",
        "layers": 10,
        "epochs": 20,
        "batch_size": 32,
        "learning_rate": 0.001,
        "train_fraction": 0.8,
        "optimizer": "adam",
        "seed": 0,
    },
    "sweep-noise": {
        "out": None,
        "data": None,
        "synthetic": False,
        "per_class": 200,
        "sigma": 20.0,
        "side": 2,
        "model": None,
        "channel": "all",
        "grid": list(SWEEP_GRID),
        "train_fraction": 0.8,
        "seed": 0,
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutraffic",
        description="Quantum traffic-light classification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        return p

    def add_data_source(p):
        p.add_argument("--data", help="dataset directory (class subdirs or dataset.csv)")
        p.add_argument("--synthetic", action="store_true", help="generate data in-process")
        p.add_argument("--per-class", dest="per_class", type=int)
        p.add_argument("--sigma", type=float)
        p.add_argument("--side", type=int, choices=(2, 4))

    p = add("gen-synthetic", "write a synthetic dataset directory of PGM files")
    p.add_argument("--per-class", dest="per_class", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--side", type=int, choices=(2, 4))

    p = add("classify", "overlap classification; writes results.json")
    add_data_source(p)
    p.add_argument("--method", choices=("uu", "var-uu"))
    p.add_argument("--encoding", choices=("frqi", "neqr", "angle"))
    p.add_argument("--layers", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)

    p = add("train", "train the QNN; writes metrics.csv, model.json, confusion.json")
    add_data_source(p)
    p.add_argument("--encoding", choices=("frqi", "neqr", "angle"))
    p.add_argument("--layers", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--optimizer", choices=("adam", "sgd"))

    p = add("sweep-noise", "noisy accuracy sweep of a checkpoint; writes noise_sweep.csv")
    add_data_source(p)
    p.add_argument("--model", help="model.json checkpoint from a train run")
    p.add_argument("--channel", choices=("all",) + CHANNEL_KINDS)
    p.add_argument("--grid", help="comma-separated channel parameters in [0, 1]")

    return parser


def _resolve_config(command: str, args: dict) -> dict:
    cfg = dict(_DEFAULTS[command])
    config_path = args.pop("config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            cfg[key] = value
    cfg.update(args)
    if isinstance(cfg.get("grid"), str):
        try:
            cfg["grid"] = [float(v) for v in cfg["grid"].split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad --grid value {cfg['grid']!r}") from None
    if cfg.get("out") is None:
        raise ConfigError("--out is required")
    # config files bypass argparse choices; re-check the enumerated settings
    if cfg.get("side") not in (None, 2, 4):
        raise ConfigError("side must be 2 or 4")
    if cfg.get("optimizer") not in (None, "adam", "sgd"):
        raise ConfigError(f"unknown optimizer {cfg['optimizer']!r}")
    if cfg.get("channel") not in (None, "all") + CHANNEL_KINDS:
        raise ConfigError(f"unknown noise channel {cfg['channel']!r}")
    return cfg


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, payload) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_run_info(out: Path, command: str, cfg: dict) -> None:
    # the output path is not an experiment setting; leaving it out keeps
    # run.json byte-identical across runs into different directories
    echoed = {k: v for k, v in cfg.items() if k != "out"}
    _write_json(
        out / "run.json", {"command": command, "config": echoed, "seed": cfg["seed"]}
    )


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _get_dataset(cfg: dict) -> Dataset:
    if cfg.get("data") and cfg.get("synthetic"):
        raise ConfigError("--data and --synthetic are mutually exclusive")
    if cfg.get("data"):
        return load_dataset(cfg["data"], cfg["side"])
    if cfg.get("synthetic"):
        return gen_synthetic(
            SyntheticSpec(cfg["per_class"], cfg["side"], cfg["sigma"], cfg["seed"])
        )
    raise ConfigError("a dataset source is required (--data or --synthetic)")


def _cmd_gen_synthetic(cfg: dict) -> None:
    dataset = gen_synthetic(
        SyntheticSpec(cfg["per_class"], cfg["side"], cfg["sigma"], cfg["seed"])
    )
    out = _out_dir(cfg)
    indices = [0, 0, 0]
    for image, label in dataset.samples:
        class_dir = out / CLASS_NAMES[label]
        class_dir.mkdir(exist_ok=True)
        write_pgm(class_dir / f"{indices[label]:04d}.pgm", image)
        indices[label] += 1
    _write_run_info(out, "gen-synthetic", cfg)


def _cmd_classify(cfg: dict) -> None:
    if cfg["method"] not in ("uu", "var-uu"):
        raise ConfigError(f"unknown method {cfg['method']!r}")
    if cfg["encoding"] not in ("frqi", "neqr"):
        raise ConfigError("uu/var-uu classification requires frqi or neqr encoding")
    if cfg["layers"] < 1:
        raise ConfigError("--layers must be >= 1")
    dataset = _get_dataset(cfg)
    train_set, test_set = stratified_split(dataset, cfg["train_fraction"], cfg["seed"])
    centroids = class_centroids(train_set)
    spec = EncodingSpec(cfg["encoding"], cfg["side"])
    num_layers = cfg["layers"] if cfg["method"] == "var-uu" else None

    hits = [0, 0, 0]
    totals = [0, 0, 0]
    for image, label in test_set.samples:
        result = uu_classify(image, centroids, spec, num_layers=num_layers)
        totals[label] += 1
        if result.predicted_class == label:
            hits[label] += 1
    per_class = [h / t for h, t in zip(hits, totals)]
    probs = dataset.class_probs()
    out = _out_dir(cfg)
    _write_json(
        out / "results.json",
        {
            "method": cfg["method"],
            "encoding": cfg["encoding"],
            "side": cfg["side"],
            "layers": cfg["layers"],
            "num_test_samples": len(test_set),
            "per_class_accuracy": per_class,
            "class_probabilities": probs.tolist(),
            "weighted_accuracy": weighted_accuracy(per_class, probs),
        },
    )
    _write_run_info(out, "classify", cfg)


def _cmd_train(cfg: dict) -> None:
    if cfg["encoding"] != "angle":
        raise ConfigError("the QNN uses angle encoding")
    if cfg["layers"] < 1:
        raise ConfigError("--layers must be >= 1")
    dataset = _get_dataset(cfg)
    config = TrainConfig(
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        learning_rate=cfg["learning_rate"],
        train_fraction=cfg["train_fraction"],
        seed=cfg["seed"],
        optimizer=cfg["optimizer"],
    )
    model, metrics = train(dataset, cfg["layers"], config)
    out = _out_dir(cfg)
    _atomic_write(out / "metrics.csv", metrics_csv(metrics))
    _atomic_write(out / "model.json", model_json(model))
    _write_json(
        out / "confusion.json",
        {"class_names": list(CLASS_NAMES), "matrix": metrics.confusion.tolist()},
    )
    _write_run_info(out, "train", cfg)


def _cmd_sweep_noise(cfg: dict) -> None:
    if not cfg.get("model"):
        raise ConfigError("--model checkpoint path is required")
    grid = [float(p) for p in cfg["grid"]]
    if not grid or any(not 0.0 <= p <= 1.0 for p in grid):
        raise ConfigError("--grid values must lie in [0, 1]")
    channels = CHANNEL_KINDS if cfg["channel"] == "all" else (cfg["channel"],)
    model = load_model(cfg["model"])
    dataset = _get_dataset(cfg)
    _, test_set = stratified_split(dataset, cfg["train_fraction"], cfg["seed"])
    lines = ["channel,param,accuracy"]
    for kind in channels:
        for p in grid:
            accuracy = evaluate_noisy(model, test_set.samples, NoiseChannel(kind, p))
            lines.append(f"{kind},{p!r},{accuracy!r}")
    out = _out_dir(cfg)
    _atomic_write(out / "noise_sweep.csv", "\n".join(lines) + "\n")
    _write_run_info(out, "sweep-noise", cfg)


_HANDLERS = {
    "gen-synthetic": _cmd_gen_synthetic,
    "classify": _cmd_classify,
    "train": _cmd_train,
    "sweep-noise": _cmd_sweep_noise,
}


def _fail(kind: str, exc: Exception) -> None:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return int(exc.code or 0)
    command = args.command
    raw = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        cfg = _resolve_config(command, raw)
        _HANDLERS[command](cfg)
        return EXIT_OK
    except ConfigError as exc:
        _fail("config", exc)
        return EXIT_CONFIG
    except (DataFormatError, FileNotFoundError, NotADirectoryError) as exc:
        _fail("data", exc)
        return EXIT_DATA
    except (ValueError, ArithmeticError, KeyError, TypeError) as exc:
        _fail("numeric", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
