"""Self-describing JSON model archive.

Floats are written with Python's shortest round-trip representation, so
loading reproduces every parameter bit for bit.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
from pathlib import Path

import numpy as np

from . import clustering as cl
from .dataset import ScalerParams
from .errors import DataError
from .hybrid import HybridModel
from .mlp import MlpModel, Provenance

ARCHIVE_VERSION = 1


class ArchiveError(DataError):
    pass


def _arr(a):
    return np.asarray(a, dtype=np.float64).tolist()


def _scaler_doc(s: ScalerParams):
    return {"mins": _arr(s.mins), "maxs": _arr(s.maxs)}


def _cluster_doc(m: cl.ClusterModel):
    doc = {"kind": m.kind, "k": m.k, "centroids": _arr(m.centroids), "seed": m.seed,
           "linkage": m.linkage, "gamma": m.gamma, "inertia": m.inertia, "gmm": None}
    if m.gmm is not None:
        doc["gmm"] = {"weights": _arr(m.gmm.weights), "means": _arr(m.gmm.means),
                      "covariances": _arr(m.gmm.covariances)}
    return doc


def _mlp_doc(m: MlpModel):
    p = m.provenance
    return {
        "activation": m.activation,
        "w1": _arr(m.w1), "b1": _arr(m.b1), "w2": _arr(m.w2), "b2": float(m.b2),
        "provenance": None if p is None else
        {"solver": p.solver, "neurons": p.neurons, "cv_mse": p.cv_mse, "seed": p.seed},
    }


def to_document(model: HybridModel, provenance=None):
    created = os.environ.get("SOURCE_DATE_EPOCH")
    ts = (_dt.datetime.fromtimestamp(int(created), _dt.timezone.utc) if created
          else _dt.datetime.now(_dt.timezone.utc))
    return {
        "format_version": ARCHIVE_VERSION,
        "created": ts.isoformat(timespec="seconds"),
        "mode": model.mode,
        "scaler": _scaler_doc(model.scaler),
        "target_scaler": _scaler_doc(model.target_scaler),
        "cluster_model": _cluster_doc(model.cluster_model),
        "locals": [_mlp_doc(m) for m in model.locals],
        "mase_scales": list(model.mase_scales),
        "train_sizes": list(model.train_sizes),
        "provenance": provenance or {},
    }


def save(model: HybridModel, path, provenance=None):
    """Write atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    text = json.dumps(to_document(model, provenance), indent=1) + "\n"
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def from_document(doc):
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ArchiveError("not a model archive (no format_version)")
    if doc["format_version"] != ARCHIVE_VERSION:
        raise ArchiveError(f"unsupported archive version {doc['format_version']!r}; "
                           f"this build reads version {ARCHIVE_VERSION}")
    try:
        c = doc["cluster_model"]
        gmm = None
        if c.get("gmm"):
            g = c["gmm"]
            gmm = cl.GmmParams(np.array(g["weights"]), np.array(g["means"]),
                               np.array(g["covariances"]))
        cm = cl.ClusterModel(c["kind"], int(c["k"]), np.array(c["centroids"], dtype=np.float64),
                             seed=c.get("seed", 42), gmm=gmm, linkage=c.get("linkage"),
                             gamma=c.get("gamma"), inertia=c.get("inertia"))
        locals_ = []
        for m in doc["locals"]:
            p = m.get("provenance")
            prov = None if p is None else Provenance(p["solver"], p["neurons"], p["cv_mse"],
                                                     p["seed"])
            locals_.append(MlpModel(np.array(m["w1"]), np.array(m["b1"]), np.array(m["w2"]),
                                    m["b2"], m["activation"], prov))
        model = HybridModel(
            ScalerParams(doc["scaler"]["mins"], doc["scaler"]["maxs"]),
            cm,
            tuple(locals_),
            ScalerParams(doc["target_scaler"]["mins"], doc["target_scaler"]["maxs"]),
            doc.get("mode", "local_models"),
            tuple(doc.get("mase_scales", ())),
            tuple(doc.get("train_sizes", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveError(f"malformed archive: {exc}") from exc
    return model, doc.get("provenance", {})


def load(path):
    """Returns ``(HybridModel, provenance)``."""
    path = Path(path)
    if not path.is_file():
        raise ArchiveError(f"no such archive: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"{path}: not valid JSON ({exc})") from exc
    return from_document(doc)
