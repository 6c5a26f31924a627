"""Command-line entry point: ``simpor {moon,balance,eval,benchmark,project,sweep}``.

Every command reads an optional ``key=value`` config file (``--config``),
applies ``--set key=value`` and dedicated flags on top, and echoes the
effective configuration into its JSON report. Outputs are never overwritten
without ``--overwrite``.

Exit codes: 0 ok, 2 bad config or usage, 3 data or I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, nnet
from .active import ActiveConfig
from .balance import SimporConfig, default_workers
from .data import DataError, Dataset, load_csv, make_moon, min_max_normalize, save_csv
from .methods import METHOD_NAMES, MethodBalancer
from .metrics import (MetricsReport, TrialResult, evaluate, score_model, trial_seeds,
                      wilcoxon_signed_rank, winning_times)
from .reduce import project_dataset
from .sphere_opt import NumericalError, SphereAscentConfig

log = logging.getLogger("simpor")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    """Bad config file, unknown key or unusable parameter value."""


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    workers: int = 0                 # 0 means: SIMPOR_WORKERS or 1
    trials: int = 5
    test_fraction: float = 0.2
    normalize: bool = True           # min-max fit on each training split
    label_column: str = ""
    # simpor
    k: int = 5
    alpha: float = 0.6
    ip: float = 0.3
    al_batch: int = 20
    al_initial: int = 3
    rejection_limit: int = 50
    neighbors: str = "all"
    shared_bandwidth: bool = False
    step_angle: float = 0.05
    max_iters: int = 300
    improvement_tol: float = 1e-8
    # baselines
    k_neighbors: int = 5
    # evaluation classifier
    clf_hidden: str = "100,100,100"
    clf_epochs: int = 200
    clf_batch: int = 32
    clf_lr: float = 0.1
    # active-learning probe
    probe_hidden: str = "10,10"
    probe_epochs: int = 300
    probe_lr: float = 0.01

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else default_workers()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["workers"] = self.effective_workers()
        return d


_FIELD_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    t = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if t is bool:
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        return t(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r} (expected {t.__name__})") from None


def parse_pairs(lines, source: str = "<args>") -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        key = key.strip().replace("-", "_")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | None, overrides: list[str] = (), **flags) -> RunConfig:
    values = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_pairs(fh, path))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
    values.update(parse_pairs(overrides, "--set"))
    values.update({k: v for k, v in flags.items() if v is not None})
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def _ints(text: str, key: str) -> tuple[int, ...]:
    try:
        out = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of integers") from None
    if not out or min(out) < 1:
        raise ConfigError(f"{key} must list positive layer widths")
    return out


def validate(cfg: RunConfig) -> None:
    if cfg.neighbors not in ("all", "minority_only"):
        raise ConfigError("neighbors must be 'all' or 'minority_only'")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if not 0 < cfg.test_fraction < 1:
        raise ConfigError("test_fraction must lie in (0, 1)")
    if cfg.workers < 0:
        raise ConfigError("workers must be >= 0")
    try:
        simpor_config(cfg)
        classifier_spec(cfg)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def classifier_spec(cfg: RunConfig) -> nnet.MlpSpec:
    return replace(nnet.evaluation_spec(cfg.seed), hidden=_ints(cfg.clf_hidden, "clf_hidden"),
                   max_epochs=cfg.clf_epochs, batch_size=cfg.clf_batch, learning_rate=cfg.clf_lr)


def simpor_config(cfg: RunConfig, workers: int = 1) -> SimporConfig:
    probe = replace(nnet.probe_spec(cfg.seed), hidden=_ints(cfg.probe_hidden, "probe_hidden"),
                    max_epochs=cfg.probe_epochs, learning_rate=cfg.probe_lr)
    return SimporConfig(
        k=cfg.k, alpha=cfg.alpha,
        active=ActiveConfig(cfg.ip, cfg.al_batch, cfg.al_initial, probe, cfg.seed),
        ascent=SphereAscentConfig(cfg.step_angle, cfg.max_iters, cfg.improvement_tol),
        rejection_limit=cfg.rejection_limit, neighbors=cfg.neighbors,
        shared_bandwidth=cfg.shared_bandwidth, seed=cfg.seed, workers=workers)


def balancer(cfg: RunConfig, method: str, workers: int = 1) -> MethodBalancer:
    return MethodBalancer(method, simpor_config(cfg, workers), cfg.k_neighbors)


# ---------------------------------------------------------------- helpers

def _guard(paths, overwrite: bool) -> None:
    for p in paths:
        if p is not None and Path(p).exists() and not overwrite:
            raise ConfigError(f"{p} exists; pass --overwrite to replace it")


def _write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write_rows(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _load(path: str, cfg: RunConfig) -> Dataset:
    ds, dropped = load_csv(path, cfg.label_column or None)
    if dropped:
        log.warning("%s: dropped %d row(s) with missing or non-numeric values", path, dropped)
    ds.require_binary()
    return ds


def _dataset_name(path: str) -> str:
    return Path(path).stem


def parse_values(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in spec:
            a, b, s = (float(t) for t in spec.split(":"))
            if s <= 0 or b < a:
                raise ValueError
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            return [round(a + i * s, 10) for i in range(n)]
        vals = [float(t) for t in spec.split(",") if t.strip()]
        if not vals:
            raise ValueError
        return vals
    except ValueError:
        raise ConfigError(f"bad value list {spec!r}; use start:stop:step or a,b,c") from None


# ---------------------------------------------------------------- commands

def cmd_moon(args, cfg: RunConfig) -> int:
    _guard([args.output], args.overwrite)
    ds = make_moon(args.samples, args.ir, args.noise, cfg.seed)
    save_csv(ds, args.output, with_synthetic=False)
    c = ds.counts()
    log.info("wrote %s: %d rows (%s)", args.output, ds.n,
             ", ".join(f"{ds.labels[i]}={v}" for i, v in enumerate(c)))
    return EXIT_OK


def cmd_balance(args, cfg: RunConfig) -> int:
    report_path = args.report or str(Path(args.output).with_suffix(".json"))
    _guard([args.output, report_path], args.overwrite)
    ds = _load(args.input, cfg)
    transform = None
    if args.normalize:
        ds, transform = min_max_normalize(ds)
    workers = cfg.effective_workers()
    t0 = time.perf_counter()
    out, rep, res = balancer(cfg, args.method, workers).run(ds, cfg.seed)
    seconds = time.perf_counter() - t0
    save_csv(out, args.output, provenance=res.provenance() if res else None, with_synthetic=True)
    _write_json(report_path, {
        "command": "balance", "version": __version__, "input": args.input,
        "output": args.output, "method": args.method, "config": cfg.to_dict(),
        "normalized": transform is not None,
        "transform": json.loads(transform.to_json()) if transform else None,
        "balance_seconds": seconds, "report": rep,
    })
    c = out.counts()
    log.info("%s: %d synthetic rows, counts %s", args.method, int(out.synthetic.sum()), c.tolist())
    return EXIT_OK


def _external_trial(cfg: RunConfig, train_path: str, test_path: str) -> TrialResult:
    train, _ = load_csv(train_path, cfg.label_column or None)
    test, _ = load_csv(test_path, cfg.label_column or None)
    if train.labels != test.labels:
        raise DataError(f"train labels {train.labels} differ from test labels {test.labels}")
    model = nnet.train(classifier_spec(cfg), train)
    p, r, f, auc = score_model(model, test)
    return TrialResult(cfg.seed, p, r, f, auc, 0.0, train.n, int(train.synthetic.sum()))


def _evaluate(cfg: RunConfig, method: str, ds: Dataset) -> MetricsReport:
    workers = cfg.effective_workers()
    # parallelize whichever level has more than one unit of work
    trial_workers = workers if cfg.trials > 1 else 1
    inner = 1 if trial_workers > 1 else workers
    return evaluate(method, balancer(cfg, method, inner), ds, cfg.trials, classifier_spec(cfg),
                    cfg.seed, cfg.normalize, trial_workers)


def cmd_eval(args, cfg: RunConfig) -> int:
    _guard([args.output], args.overwrite)
    if args.train or args.test:
        if not (args.train and args.test):
            raise ConfigError("--train and --test must be given together")
        t = _external_trial(cfg, args.train, args.test)
        rep = MetricsReport("external", (t,))
        source = {"train": args.train, "test": args.test}
    else:
        if bool(args.input) == bool(args.moon):
            raise ConfigError("give exactly one of --input, --moon, or --train/--test")
        ds = make_moon(seed=cfg.seed) if args.moon else _load(args.input, cfg)
        rep = _evaluate(cfg, args.method, ds)
        source = {"input": args.input or "moon"}
    out = {"command": "eval", "version": __version__, **source, "config": cfg.to_dict(), **rep.to_dict()}
    _write_json(args.output, out)
    log.info("%s: F1 %.4f +- %.4f, AUC %.4f +- %.4f", rep.method, rep.f1, rep.std("f1"),
             rep.auc, rep.std("auc"))
    return EXIT_OK


def read_external_scores(path: str) -> list[dict]:
    """Rows of ``dataset,method,f1,auc`` (means) from another tool."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    need = {"dataset", "method", "f1", "auc"}
    if not rows or not need <= set(rows[0]):
        raise DataError(f"{path}: need columns {sorted(need)}")
    try:
        return [{"dataset": r["dataset"], "method": r["method"], "f1": float(r["f1"]),
                 "auc": float(r["auc"])} for r in rows]
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None


def pairwise_wilcoxon(table: dict[str, list[float]]) -> dict:
    names = list(table)
    out = {}
    for a in names:
        out[a] = {}
        for b in names:
            if a == b:
                out[a][b] = None
                continue
            w = wilcoxon_signed_rank(table[a], table[b])
            out[a][b] = {"p_value": w.p_value, "statistic": w.statistic, "n": w.n_effective,
                         "method": w.method, "reliable": w.reliable}
    return out


def benchmark_summary(means: dict, per_trial: dict, datasets: list[str], methods: list[str]) -> dict:
    """Winning times and pairwise Wilcoxon p-values for F1 and AUC.

    With two or more datasets the test pairs per-dataset means; with a single
    dataset it pairs trials (every method sees the same split seeds).
    """
    out = {"winning_times": {}, "wilcoxon": {}}
    complete = [m for m in methods if all((d, m) in means for d in datasets)]
    for metric in ("f1", "auc"):
        table = {m: [means[(d, m)][metric] for d in datasets] for m in complete}
        out["winning_times"][metric] = winning_times(table) if complete else {}
        if len(datasets) >= 2:
            out["wilcoxon_unit"] = "datasets"
        else:
            table = {m: per_trial[(datasets[0], m)][metric] for m in complete
                     if (datasets[0], m) in per_trial}
            out["wilcoxon_unit"] = "trials"
        out["wilcoxon"][metric] = pairwise_wilcoxon(table) if len(table) >= 2 else {}
    return out


def cmd_benchmark(args, cfg: RunConfig) -> int:
    outdir = Path(args.outdir)
    paths = [outdir / n for n in ("scores.csv", "summary.csv", "report.json")]
    _guard(paths, args.overwrite)
    methods = args.methods
    if len(set(methods)) != len(methods):
        raise ConfigError("duplicate method names")
    external = read_external_scores(args.external_scores) if args.external_scores else []
    datasets, means, per_trial, reports = [], {}, {}, {}
    for path in args.inputs:
        name = _dataset_name(path)
        if name in datasets:
            raise ConfigError(f"duplicate dataset name {name!r}")
        datasets.append(name)
        ds = _load(path, cfg)
        for m in methods:
            rep = _evaluate(cfg, m, ds)
            reports[(name, m)] = rep
            means[(name, m)] = {"f1": rep.f1, "auc": rep.auc}
            per_trial[(name, m)] = {k: [getattr(t, k) for t in rep.trials] for k in ("f1", "auc")}
            log.info("%s / %s: F1 %.4f AUC %.4f", name, m, rep.f1, rep.auc)
    all_methods = list(methods)
    for row in external:
        if row["dataset"] not in datasets:
            log.warning("external score for unknown dataset %s ignored", row["dataset"])
            continue
        if row["method"] not in all_methods:
            all_methods.append(row["method"])
        means[(row["dataset"], row["method"])] = {"f1": row["f1"], "auc": row["auc"]}

    _write_rows(paths[0], ["dataset", "method", "trial", "seed", "precision", "recall", "f1", "auc",
                           "balance_seconds", "n_train", "n_synthetic"],
                [(d, m, i, t.seed, t.precision, t.recall, t.f1, t.auc, t.balance_seconds, t.n_train,
                  t.n_synthetic) for (d, m), r in reports.items() for i, t in enumerate(r.trials)])
    summary_rows = []
    for d in datasets:
        for m in all_methods:
            if (d, m) not in means:
                continue
            r = reports.get((d, m))
            summary_rows.append((d, m, means[(d, m)]["f1"], r.std("f1") if r else "",
                                 means[(d, m)]["auc"], r.std("auc") if r else "",
                                 r.mean("balance_seconds") if r else "", "internal" if r else "external"))
    _write_rows(paths[1], ["dataset", "method", "f1_mean", "f1_std", "auc_mean", "auc_std",
                           "balance_seconds_mean", "source"], summary_rows)
    summary = benchmark_summary(means, per_trial, datasets, all_methods)
    timing = {d: {m: reports[(d, m)].mean("balance_seconds") for m in methods} for d in datasets}
    _write_json(paths[2], {"command": "benchmark", "version": __version__, "inputs": args.inputs,
                           "methods": all_methods, "config": cfg.to_dict(),
                           "external_scores": args.external_scores, **summary,
                           "balance_seconds": timing})
    log.info("winning times F1 %s, AUC %s", summary["winning_times"]["f1"], summary["winning_times"]["auc"])
    return EXIT_OK


def cmd_project(args, cfg: RunConfig) -> int:
    csv_path, json_path = args.output_prefix + ".csv", args.output_prefix + ".json"
    _guard([csv_path, json_path], args.overwrite)
    ds = _load(args.input, cfg)
    if cfg.normalize:
        ds, _ = min_max_normalize(ds)
    rep = {}
    if args.method != "none":
        ds, rep, _ = balancer(cfg, args.method, cfg.effective_workers()).run(ds, cfg.seed)
    pr = project_dataset(ds, args.components)
    rows = [tuple(pr.projection.projected[i]) + (ds.labels[ds.y[i]], int(ds.synthetic[i]))
            for i in range(ds.n)]
    _write_rows(csv_path, [f"pc{j + 1}" for j in range(args.components)] + [ds.label_name, "synthetic"],
                rows)
    body = json.loads(pr.to_json())
    _write_json(json_path, {"command": "project", "version": __version__, "input": args.input,
                            "method": args.method, "config": cfg.to_dict(), **body,
                            "balance_report": rep})
    log.info("HDR %.2f%% (%d of %d minority samples in overlapping bins)", pr.hdr.hdr,
             pr.hdr.intersection, int(np.sum(ds.y == ds.minority)))
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    _guard([args.output, args.report], args.overwrite)
    key = {"alpha": "alpha", "ip": "ip"}[args.param]
    values = parse_values(args.values)
    rows = []
    for path in args.inputs:
        name = _dataset_name(path)
        ds = _load(path, cfg)
        for v in values:
            try:
                c = replace(cfg, **{key: v})
                validate(c)
            except (ValueError, TypeError) as e:
                raise ConfigError(f"{args.param}={v}: {e}") from None
            rep = _evaluate(c, args.method, ds)
            rows.append((name, args.param, v, rep.f1, rep.std("f1"), rep.auc, rep.std("auc"),
                         rep.mean("balance_seconds")))
            log.info("%s %s=%g: F1 %.4f AUC %.4f", name, args.param, v, rep.f1, rep.auc)
    _write_rows(args.output, ["dataset", "param", "value", "f1_mean", "f1_std", "auc_mean", "auc_std",
                              "balance_seconds_mean"], rows)
    if args.report:
        _write_json(args.report, {"command": "sweep", "version": __version__, "param": args.param,
                                  "values": values, "inputs": args.inputs, "method": args.method,
                                  "config": cfg.to_dict()})
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simpor", description="Imbalanced-data oversampling toolkit.")
    p.add_argument("--version", action="version", version=f"simpor {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int, help="worker processes (default: $SIMPOR_WORKERS or 1)")
        sp.add_argument("--overwrite", action="store_true", help="replace existing outputs")
        sp.add_argument("-q", "--quiet", action="store_true")
        return sp

    def trials(sp):
        sp.add_argument("--trials", type=int)

    sp = common(sub.add_parser("moon", help="generate the imbalanced two-moons dataset"))
    sp.add_argument("--samples", type=int, default=3000)
    sp.add_argument("--ir", type=float, default=7.0, help="imbalance ratio")
    sp.add_argument("--noise", type=float, default=0.25)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_moon)

    sp = common(sub.add_parser("balance", help="oversample a CSV to class parity"))
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", choices=METHOD_NAMES, default="simpor")
    sp.add_argument("--output", required=True)
    sp.add_argument("--report", help="report JSON (default: output with .json suffix)")
    sp.add_argument("--normalize", action="store_true", help="min-max scale features first")
    sp.set_defaults(func=cmd_balance)

    sp = common(sub.add_parser("eval", help="repeated-holdout evaluation of one method"))
    sp.add_argument("--input")
    sp.add_argument("--moon", action="store_true", help="use the default Moon dataset")
    sp.add_argument("--train", help="externally balanced training CSV")
    sp.add_argument("--test", help="test CSV paired with --train")
    sp.add_argument("--method", choices=METHOD_NAMES, default="simpor")
    sp.add_argument("--output", required=True)
    trials(sp)
    sp.set_defaults(func=cmd_eval)

    sp = common(sub.add_parser("benchmark", help="methods x datasets with winning times and Wilcoxon"))
    sp.add_argument("--inputs", nargs="+", required=True)
    sp.add_argument("--methods", nargs="+", choices=METHOD_NAMES,
                    default=["simpor", "smote", "borderline_smote", "adasyn", "ros"])
    sp.add_argument("--external-scores", help="CSV of dataset,method,f1,auc from other tools")
    sp.add_argument("--outdir", required=True)
    trials(sp)
    sp.set_defaults(func=cmd_benchmark)

    sp = common(sub.add_parser("project", help="PCA projection and HDR report"))
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", choices=METHOD_NAMES, default="none")
    sp.add_argument("--components", type=int, default=2)
    sp.add_argument("--output-prefix", required=True)
    sp.set_defaults(func=cmd_project)

    sp = common(sub.add_parser("sweep", help="F1/AUC series over alpha or the informative portion"))
    sp.add_argument("--param", choices=("alpha", "ip"), required=True)
    sp.add_argument("--values", required=True, help="start:stop:step or a,b,c")
    sp.add_argument("--inputs", nargs="+", required=True)
    sp.add_argument("--method", choices=METHOD_NAMES, default="simpor")
    sp.add_argument("--output", required=True)
    sp.add_argument("--report", help="optional JSON with the effective config")
    trials(sp)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        cfg = load_config(args.config, args.set, seed=args.seed, workers=args.workers,
                          trials=getattr(args, "trials", None))
        return args.func(args, cfg)
    except ConfigError as e:
        log.error("%s", e)
        return EXIT_CONFIG
    except (DataError, OSError) as e:
        log.error("%s", e)
        return EXIT_DATA
    except (NumericalError, nnet.TrainingError, FloatingPointError) as e:
        log.error("numerical failure: %s", e)
        return EXIT_NUMERIC
    except ValueError as e:
        log.error("%s", e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
