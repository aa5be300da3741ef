"""Plain-text tables and structured (JSON) documents for scans and error reports."""

from __future__ import annotations

import json
import math

from .metrics import METRICS

FORMAT_VERSION = 1

KIND_LABELS = {
    "gaussian_mixture": "Gaussian Mixture",
    "spectral": "Spectral Clustering",
    "agglomerative": "Agglomerative Clustering",
    "kmeans": "K-Means",
}
PARAM_LABELS = {
    "gaussian_mixture": "Gaussian clustering",
    "spectral": "Spectral clustering",
    "agglomerative": "Agglomerative clustering",
    "kmeans": "K-Means clustering",
}
SCAN_COLUMNS = ("Clustering", "Best number of clusters", "Silhouette",
                "Calinski-Harabasz", "Davies-Bouldin")
PARAM_ROWS = ("Number of neurons", "Activation function", "Solver")


def fmt(v, digits=4):
    if v is None:
        return "n/a"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v:.{digits}f}"
    # rounding noise should not print as "-0.00"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def table(header, rows):
    """Left-aligned first column, right-aligned remaining columns, two-space gaps."""
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for r in cells:
        parts = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
    return "\n".join(lines) + "\n"


def jsonable(v):
    """Plain JSON value; NaN becomes null and infinities the strings 'inf'/'-inf'."""
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return jsonable(v.tolist())
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    return v


def dumps(doc):
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------------- scanning


def scan_table(scans):
    """One row per clustering kind with the scores at its selected k.

    ``scans`` is a list of ``(kind, ScanResult | None, error | None)``.
    """
    rows, notes = [], []
    for kind, res, err in scans:
        label = KIND_LABELS.get(kind, kind)
        rep = res.best if res is not None else None
        if rep is None:
            rows.append([label, "n/a", "n/a", "n/a", "n/a"])
            notes.append(f"note: {label} failed: {err or 'no k in range could be fitted'}")
            continue
        rows.append([label, str(res.best_k), fmt(rep.silhouette),
                     fmt(rep.calinski_harabasz), fmt(rep.davies_bouldin)])
        failed = [e for e in res.entries if e.error]
        for e in failed:
            notes.append(f"note: {label} k={e.k} failed: {e.error}")
    out = table(SCAN_COLUMNS, rows)
    if notes:
        out += "\n" + "\n".join(notes) + "\n"
    return out


def scan_detail_table(res):
    rows = []
    for e in res.entries:
        if e.report is None:
            rows.append([str(e.k), "n/a", "n/a", "n/a", f"failed: {e.error}"])
        else:
            r = e.report
            rows.append([str(e.k), fmt(r.silhouette), fmt(r.calinski_harabasz),
                         fmt(r.davies_bouldin), ""])
    head = f"{KIND_LABELS.get(res.kind, res.kind)}\n"
    sel = (f"selected k: silhouette={res.best_silhouette_k}, "
           f"calinski-harabasz={res.best_calinski_harabasz_k}, "
           f"davies-bouldin={res.best_davies_bouldin_k}, best={res.best_k}\n")
    return head + table(("k", "Silhouette", "Calinski-Harabasz", "Davies-Bouldin", "status"),
                        rows) + sel


def scan_document(scans, k_range, seed):
    results = []
    for kind, res, err in scans:
        entry = {"clustering": kind, "error": err}
        if res is not None:
            entry.update({
                "best_k": res.best_k,
                "selected": {
                    "silhouette": res.best_silhouette_k,
                    "calinski_harabasz": res.best_calinski_harabasz_k,
                    "davies_bouldin": res.best_davies_bouldin_k,
                },
                "per_k": [
                    {"k": e.k,
                     "silhouette": e.report.silhouette if e.report else None,
                     "calinski_harabasz": e.report.calinski_harabasz if e.report else None,
                     "davies_bouldin": e.report.davies_bouldin if e.report else None,
                     "error": e.error}
                    for e in res.entries
                ],
            })
        results.append(entry)
    return {"format_version": FORMAT_VERSION, "report": "scan", "seed": seed,
            "k_range": list(k_range), "results": results}


# -------------------------------------------------------------- error reports


TABLE_METRICS = ("MSE", "MAE", "LMLS", "MAPE", "MASE", "SMAPE")


def error_table(kind, report):
    """Per-cluster error table plus a supplementary block (NMSE, validation sizes)."""
    k = report.k
    header = ["Cluster"] + [str(j + 1) for j in range(k)] + ["Weighted average"]

    def row(m):
        i = report.metrics.index(m)
        return ([m] + [fmt(report.per_cluster[j, i]) for j in range(k)]
                + [fmt(report.weighted_average[i])])

    title = f"MLP error for {KIND_LABELS.get(kind, kind)} clustering with {k} clusters\n"
    main = table(header, [row(m) for m in TABLE_METRICS])
    extra = [row(m) for m in report.metrics if m not in TABLE_METRICS]
    extra.append(["Size"] + [str(int(s)) for s in report.cluster_sizes]
                 + [str(int(report.cluster_sizes.sum()))])
    return title + main + "\nSupplementary\n" + table(header, extra)


def grid_winners(model):
    out = []
    for j, m in enumerate(model.locals):
        p = m.provenance
        out.append({"cluster": j, "neurons": m.n_hidden, "activation": m.activation,
                    "solver": p.solver if p else None, "cv_mse": p.cv_mse if p else None})
    return out


def error_document(kind, model, report):
    per = []
    for j in range(report.k):
        row = {"cluster": j, "size": int(report.cluster_sizes[j])}
        row.update({m: float(report.per_cluster[j, i]) for i, m in enumerate(report.metrics)})
        row["skipped"] = dict(report.skipped[j])
        per.append(row)
    return {
        "format_version": FORMAT_VERSION,
        "report": "errors",
        "clustering": kind,
        "k": report.k,
        "mode": model.mode,
        "per_cluster": per,
        "weighted_average": {m: float(v) for m, v in zip(report.metrics, report.weighted_average)},
        "grid_winner": grid_winners(model),
    }


def params_table(kind, model):
    """Best grid parameters per local model."""
    n = len(model.locals)
    header = ["Grid Parameter / Cluster"] + [str(j + 1) for j in range(n)]
    rows = [
        [PARAM_ROWS[0]] + [str(m.n_hidden) for m in model.locals],
        [PARAM_ROWS[1]] + [m.activation for m in model.locals],
        [PARAM_ROWS[2]] + [m.provenance.solver if m.provenance else "n/a" for m in model.locals],
    ]
    return f"{PARAM_LABELS.get(kind, kind)}\n" + table(header, rows)


# ----------------------------------------------------------------- comparison


def comparison_table(comp):
    rows, drows, notes = [], [], []
    for res, delta in zip(comp.results, comp.deltas):
        label = KIND_LABELS.get(res.kind, res.kind)
        if res.report is None:
            rows.append([label, str(res.k)] + ["n/a"] * len(METRICS))
            notes.append(f"note: {label} failed: {res.error}")
            continue
        rows.append([label, str(res.k)] + [fmt(v) for v in res.report.weighted_average])
        if delta is not None:
            drows.append([label] + [fmt(delta[m], 2) for m in METRICS])
    out = "Weighted average errors\n" + table(["Clustering", "k", *METRICS], rows)
    ref = KIND_LABELS.get(comp.reference, comp.reference)
    out += f"\nDifference from best MSE ({ref}), %\n"
    out += table(["Clustering", *METRICS], drows)
    if notes:
        out += "\n" + "\n".join(notes) + "\n"
    return out


def comparison_document(comp):
    rows = []
    for res, delta in zip(comp.results, comp.deltas):
        row = {"clustering": res.kind, "k": res.k, "error": res.error}
        if res.report is not None:
            row["weighted_average"] = {m: float(v) for m, v in
                                       zip(res.report.metrics, res.report.weighted_average)}
            row["cluster_sizes"] = res.report.cluster_sizes
            row["delta_percent"] = delta
            row["grid_winner"] = grid_winners(res.model)
        rows.append(row)
    return {"format_version": FORMAT_VERSION, "report": "compare",
            "reference": comp.reference, "results": rows}
