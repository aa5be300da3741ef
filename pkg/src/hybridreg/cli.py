"""Command-line driver: ``hybridreg {synth,scan,train,predict,plot,compare}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Any option may also come from ``--config FILE`` (``key = value`` lines, keys
named like the long flags); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import archive, clustering as cl, hybrid as hy, lda, mlp, quality, report, svg
from .dataset import (FEATURES, TARGET, Dataset, SplitSpec, fit_scaler, ingest_csv,
                      read_features, split, synthesize)
from .errors import DataError, HybridRegError, NumericError

log = logging.getLogger("hybridreg")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
FIT_POINTS = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(text):
    return tuple(t.strip() for t in str(text).split(",") if t.strip())


@dataclass
class RunConfig:
    data: Optional[str] = None
    synth_n: Optional[int] = None
    synth_seed: Optional[int] = None
    kinds: tuple = cl.KINDS
    k: int = 4
    k_range: tuple = (2, 8)
    grid: mlp.GridSpec = field(default_factory=mlp.GridSpec)
    split: SplitSpec = field(default_factory=SplitSpec)
    out: str = "out"
    report_format: str = "both"
    seed: int = 42
    mode: str = "local_models"
    on_invalid: str = "error"

    @classmethod
    def from_args(cls, a):
        if getattr(a, "data", None) and getattr(a, "synth_n", None):
            raise UsageError("--data and --synth-n are mutually exclusive")
        kinds = tuple(getattr(a, "kind", None) or cl.KINDS)
        bad = [k for k in kinds if k not in cl.KINDS]
        if bad:
            raise UsageError(f"unknown clustering kind(s) {bad}; choose from {cl.KINDS}")
        try:
            grid = mlp.GridSpec(
                neuron_range=(getattr(a, "neurons_min", 12), getattr(a, "neurons_max", 30)),
                activations=getattr(a, "activations", mlp.ACTIVATIONS),
                solvers=getattr(a, "solvers", mlp.SOLVERS),
                folds=getattr(a, "folds", 5),
                seed=a.seed,
                max_iter=getattr(a, "max_iter", 500),
            )
            spl = SplitSpec(getattr(a, "val_fraction", 0.2), a.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        k_range = (getattr(a, "k_min", 2), getattr(a, "k_max", 8))
        if k_range[0] > k_range[1]:
            raise UsageError("--k-min exceeds --k-max")
        return cls(
            data=getattr(a, "data", None),
            synth_n=getattr(a, "synth_n", None),
            synth_seed=getattr(a, "synth_seed", None),
            kinds=kinds,
            k=getattr(a, "k", 4),
            k_range=k_range,
            grid=grid,
            split=spl,
            out=a.out,
            report_format=getattr(a, "format", "both"),
            seed=a.seed,
            mode=getattr(a, "mode", "local_models"),
            on_invalid=getattr(a, "on_invalid", "error"),
        )

    def load_data(self) -> Dataset:
        if self.data:
            return ingest_csv(self.data, on_invalid=self.on_invalid)
        if self.synth_n:
            seed = self.seed if self.synth_seed is None else self.synth_seed
            return synthesize(self.synth_n, seed)[0]
        raise UsageError("a data source is required: --data PATH or --synth-n N")

    def source(self):
        if self.data:
            return {"data": str(self.data)}
        return {"synth_n": self.synth_n,
                "synth_seed": self.seed if self.synth_seed is None else self.synth_seed}

    def grid_doc(self):
        g = self.grid
        return {"neuron_range": list(g.neuron_range), "activations": list(g.activations),
                "solvers": list(g.solvers), "folds": g.folds, "seed": g.seed,
                "max_iter": g.max_iter}


# ------------------------------------------------------------------ file output


def _prepare_out(path) -> Path:
    """Create the output directory and prove it is writable before any work."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe"):
            pass
    except OSError as exc:
        raise DataError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _write(path: Path, text: str):
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_reports(out, stem, text, doc, fmt):
    written = []
    if fmt in ("text", "both"):
        _write(out / f"{stem}.txt", text)
        written.append(out / f"{stem}.txt")
    if fmt in ("structured", "both"):
        _write(out / f"{stem}.json", report.dumps(doc))
        written.append(out / f"{stem}.json")
    return written


def _lda_artifact(kind, k, Xs, labels):
    proj = lda.fit_lda(Xs, labels)
    return {"format_version": report.FORMAT_VERSION, "artifact": "lda", "clustering": kind,
            "k": int(k), "basis": proj.basis, "global_mean": proj.global_mean,
            "points": lda.project(proj, Xs), "labels": np.asarray(labels)}


# -------------------------------------------------------------------- commands


def cmd_synth(a):
    out = _prepare_out(a.out)
    data, regimes = synthesize(a.n, a.seed)
    data.to_csv(out / "synth.csv")
    _write(out / "synth_regimes.csv",
           "regime\n" + "".join(f"{int(r)}\n" for r in regimes))
    print(out / "synth.csv")


def _training_partition(cfg):
    data = cfg.load_data()
    train, valid = split(data, cfg.split)
    return train, valid


def cmd_scan(a):
    cfg = RunConfig.from_args(a)
    out = _prepare_out(cfg.out)
    train, _ = _training_partition(cfg)
    Xs = fit_scaler(train).transform(train.features)
    hi = min(cfg.k_range[1], Xs.shape[0] - 1)
    scans, details = [], []
    for kind in cfg.kinds:
        try:
            res = quality.scan_k(Xs, kind, (cfg.k_range[0], hi), seed=cfg.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        err = None if res.best_k is not None else "every k failed"
        scans.append((kind, res, err))
        details.append(report.scan_detail_table(res))
        if res.best_k is not None:
            _, asg = cl.fit(kind, Xs, res.best_k, seed=cfg.seed + res.best_k)
            try:
                art = _lda_artifact(kind, res.best_k, Xs, asg.labels)
                _write(out / f"lda_{kind}.json", report.dumps(art))
            except (HybridRegError, ValueError) as exc:
                log.warning("no LDA projection for %s: %s", kind, exc)
    _write_reports(out, "scan", report.scan_table(scans),
                   report.scan_document(scans, cfg.k_range, cfg.seed), cfg.report_format)
    _write(out / "scan_detail.txt", "\n".join(details))
    sys.stdout.write(report.scan_table(scans))


def cmd_train(a):
    cfg = RunConfig.from_args(a)
    if len(cfg.kinds) != 1:
        raise UsageError("train takes exactly one --kind")
    kind = cfg.kinds[0]
    out = _prepare_out(cfg.out)
    train, valid = _training_partition(cfg)
    model = hy.train_hybrid(train, kind, cfg.k, cfg.grid, seed=cfg.seed, mode=cfg.mode)
    rep = hy.error_report(model, valid)

    prov = {"seed": cfg.seed, "source": cfg.source(), "split": {
        "validation_fraction": cfg.split.validation_fraction, "seed": cfg.split.seed},
        "grid": cfg.grid_doc(), "grid_winner": report.grid_winners(model)}
    archive.save(model, out / "model.json", prov)

    text = report.error_table(kind, rep) + "\n" + report.params_table(kind, model)
    _write(out / f"errors_{kind}.txt", text)
    _write(out / f"errors_{kind}.json", report.dumps(report.error_document(kind, model, rep)))
    _write(out / f"params_{kind}.txt", report.params_table(kind, model))

    y_hat, clusters = hy.predict_detailed(model, valid.features)
    _write(out / f"fit_{kind}.json", report.dumps({
        "format_version": report.FORMAT_VERSION, "artifact": "fit", "clustering": kind,
        "k": model.k, "observed": valid.target, "predicted": y_hat, "clusters": clusters}))
    if model.k >= 2:
        Xs = model.scaler.transform(train.features)
        labels = cl.route_many(model.cluster_model, Xs)
        try:
            _write(out / f"lda_{kind}.json", report.dumps(_lda_artifact(kind, model.k, Xs, labels)))
        except (HybridRegError, ValueError) as exc:
            log.warning("no LDA projection: %s", exc)
    sys.stdout.write(text)


def cmd_predict(a):
    if not a.archive:
        raise UsageError("--archive is required")
    if not a.data:
        raise UsageError("--data is required")
    out = _prepare_out(a.out)
    model, _ = archive.load(a.archive)
    X = read_features(a.data, on_invalid=getattr(a, "on_invalid", "error"))
    y_hat, clusters = hy.predict_detailed(model, X)
    lines = [f"{TARGET}_pred,cluster\n"]
    lines += [f"{float(v)!r},{int(c)}\n" for v, c in zip(y_hat, clusters)]
    _write(out / "predictions.csv", "".join(lines))
    print(out / "predictions.csv")


def _load_artifacts(src: Path, prefix):
    found = sorted(src.glob(f"{prefix}_*.json"))
    docs = []
    for p in found:
        try:
            docs.append(json.loads(p.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise DataError(f"{p}: unreadable artifact ({exc})") from exc
    return docs


def fit_series(observed, predicted, clusters, k, limit=FIT_POINTS):
    """First ``min(limit, size)`` validation samples of each cluster."""
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    clusters = np.asarray(clusters, dtype=int)
    out = []
    for j in range(k):
        idx = np.flatnonzero(clusters == j)[:limit]
        out.append((observed[idx], predicted[idx]))
    return out


def cmd_plot(a):
    out = _prepare_out(a.out)
    src = Path(a.source or a.out)
    written = []
    if a.what == "lda":
        docs = _load_artifacts(src, "lda")
        if not docs:
            raise DataError(f"no LDA projection found in {src}; run `scan` or `train` first")
        for d in docs:
            kind = d["clustering"]
            title = f"2D LDA projection, {report.KIND_LABELS.get(kind, kind)} (k={d['k']})"
            path = out / f"lda_{kind}.svg"
            _write(path, svg.scatter(d["points"], d["labels"], title))
            written.append(path)
    else:
        if a.archive:
            if not a.data:
                raise UsageError("--archive needs --data with observed targets")
            model, _ = archive.load(a.archive)
            data = ingest_csv(a.data)
            y_hat, clusters = hy.predict_detailed(model, data.features)
            kind = model.cluster_model.kind
            docs = [{"clustering": kind, "k": model.k, "observed": data.target,
                     "predicted": y_hat, "clusters": clusters}]
        else:
            docs = _load_artifacts(src, "fit")
        if not docs:
            raise DataError(f"no fit artifacts found in {src}; run `train` first")
        for d in docs:
            kind = d["clustering"]
            for j, (obs, pred) in enumerate(
                    fit_series(d["observed"], d["predicted"], d["clusters"], d["k"])):
                if obs.size == 0:
                    log.warning("%s cluster %d has no validation samples", kind, j + 1)
                    continue
                title = (f"Real data vs. MLP predictions, {report.KIND_LABELS.get(kind, kind)}"
                         f", cluster {j + 1}")
                path = out / f"fit_{kind}_cluster{j + 1}.svg"
                _write(path, svg.line_chart(
                    [("real", obs, "#1f77b4"), ("predicted", pred, "#d62728")],
                    title, "sample", f"{TARGET} (°C)"))
                written.append(path)
    for p in written:
        print(p)


def cmd_compare(a):
    cfg = RunConfig.from_args(a)
    out = _prepare_out(cfg.out)
    train, valid = _training_partition(cfg)
    comp = hy.compare_methods(train, valid, cfg.kinds, cfg.k, cfg.grid, seed=cfg.seed,
                              mode=cfg.mode)
    text = report.comparison_table(comp)
    _write_reports(out, "compare", text, report.comparison_document(comp), cfg.report_format)
    sys.stdout.write(text)


# ---------------------------------------------------------------------- parser


def _common(p, data=True):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="out", help="output directory")
    if data:
        p.add_argument("--data", help="CSV with header " + ",".join(FEATURES + (TARGET,)))
        p.add_argument("--synth-n", type=int, help="use N synthetic samples instead of --data")
        p.add_argument("--synth-seed", type=int, help="generator seed (default: --seed)")
        p.add_argument("--on-invalid", choices=("error", "drop"), default="error")
        p.add_argument("--val-fraction", type=float, default=0.2)
        p.add_argument("--format", choices=("text", "structured", "both"), default="both")


def _grid(p):
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--neurons-min", type=int, default=12)
    p.add_argument("--neurons-max", type=int, default=30)
    p.add_argument("--activations", type=_csv_list, default="tanh,relu")
    p.add_argument("--solvers", type=_csv_list, default="lbfgs,sgd,adam")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--mode", choices=hy.MODES, default="local_models")


def build_parser():
    parser = _Parser(prog="hybridreg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic regime dataset")
    _common(p, data=False)
    p.add_argument("--n", type=int, default=2000)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("scan", help="score cluster counts for each clustering kind")
    _common(p)
    p.add_argument("--kind", type=_csv_list, default=",".join(cl.KINDS))
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=8)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("train", help="train one hybrid model and report its errors")
    _common(p)
    p.add_argument("--kind", type=_csv_list, default="kmeans")
    _grid(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="train one hybrid per kind on the same split")
    _common(p)
    p.add_argument("--kind", "--kinds", dest="kind", type=_csv_list, default=",".join(cl.KINDS))
    _grid(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("predict", help="predict s4_temp for a feature CSV")
    _common(p, data=False)
    p.add_argument("--archive", help="model.json written by train")
    p.add_argument("--data", help="CSV with columns " + ",".join(FEATURES))
    p.add_argument("--on-invalid", choices=("error", "drop"), default="error")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plot", help="emit SVG figures from scan/train artifacts")
    _common(p, data=False)
    p.add_argument("--what", choices=("lda", "fit"), required=True)
    p.add_argument("--from", dest="source", help="artifact directory (default: --out)")
    p.add_argument("--archive", help="model.json; with --data, plot fits on that data")
    p.add_argument("--data", help="CSV with observed targets for --archive")
    p.set_defaults(func=cmd_plot)
    return parser


def read_config(path):
    """``key = value`` lines; '#' starts a comment; keys may use '-' or '_'."""
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required: synth, scan, train, predict, plot, compare")
    if getattr(args, "config", None):
        conf = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {act.dest: act for act in sub._actions}
        unknown = sorted(set(conf) - set(known) - {"config"})
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        # string defaults are converted by argparse exactly like command-line values
        sub.set_defaults(**{k: v for k, v in conf.items() if k != "config"})
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
