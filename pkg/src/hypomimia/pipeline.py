"""End-to-end analysis steps producing the serialisable outputs."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from importlib import resources

import jsonschema
import numpy as np

from . import reference
from .classifier import PipelineConfig, loocv_evaluate
from .cluster import RESTARTS, figure2_report, kmeans, pca_fit
from .logit import figure1_csv, figure1_report, regress
from .numcore import RandomStream
from .stats import table2_analysis, table2_csv

FEATURE_DESIGN = {
    "variance": "sample variance (divisor n-1) of AU magnitude over active frames",
    "never_active": "value 0 with missing flag when fewer than 2 active frames",
}


def load_schema(name):
    text = resources.files(__package__).joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    jsonschema.validate(doc, load_schema(name))
    return doc


def dumps(doc):
    return json.dumps(doc, indent=2) + "\n"


def _table2_reference(names):
    ref = {}
    for (e, au), (pm, ps, nm, ns, p) in reference.TABLE2.items():
        name = f"{e.value}_au{au:02d}"
        if name in names:
            ref[name] = {"pd_mean": pm, "pd_sd": ps, "nonpd_mean": nm, "nonpd_sd": ns, "p": p}
    return {"reference_only": True, "n_pd": reference.N_PD, "n_nonpd": reference.N_NONPD,
            "cells": ref}


def stats_outputs(table, mode="auto"):
    rows = table2_analysis(table, mode=mode)
    doc = {
        "family_size": len(rows),
        "test": "Mann-Whitney U, two-sided; U reported for the PD group",
        "feature_definition": FEATURE_DESIGN,
        "rows": [asdict(r) for r in rows],
        "reference": _table2_reference(table.names),
    }
    return {"table2.csv": table2_csv(rows), "table2.json": dumps(validate(doc, "table2"))}


def classify_outputs(table, config=PipelineConfig(), mode="fold-safe", seed=0, threads=1):
    res = loocv_evaluate(table.X, table.labels, config, mode, RandomStream(seed).substream("classify"),
                         threads)
    doc = res.to_dict()
    n = len(table)
    for f in doc["folds"]:
        f["participant_id"] = table.ids[f["index"]] if f["index"] < n else None
    doc["config"] = {
        "kernel": config.kernel,
        "C": config.C,
        "gamma": config.gamma if config.gamma is not None else "1/(d * mean feature variance)",
        "smote_k": config.smote_k,
        "mode": mode,
        "seed": seed,
        "standardize": config.standardize,
        "tol": config.tol,
        "positive_class": "PD",
    }
    doc["reference"] = {"reference_only": True,
                        "note": "published result on private clinical data; not a target",
                        **reference.CLASSIFIER_METRICS}
    return {"metrics.json": dumps(validate(doc, "metrics"))}


def regress_outputs(table, standardized=True):
    fit = regress(table, standardized)
    rows = figure1_report(fit)
    doc = {
        "standardized": standardized,
        "fit_on": "original rows (no oversampling)",
        "intercept": fit.intercept,
        "intercept_se": fit.intercept_se,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "log_likelihood": fit.log_likelihood,
        "rows": [asdict(r) for r in rows],
        "negative_weights": int(sum(r.weight < 0 for r in rows)),
        "reference": {"reference_only": True,
                      "negative_weights": reference.NEGATIVE_LOGIT_WEIGHTS, "of": 9},
    }
    return {"figure1.csv": figure1_csv(rows), "figure1.json": dumps(validate(doc, "figure1"))}


def cluster_outputs(table, k=3, standardize=False, seed=0, threads=1, restarts=RESTARTS):
    pca = pca_fit(table.X, standardize=standardize)
    P = pca.transform(table.X)
    part = kmeans(P, k=k, restarts=restarts, stream=RandomStream(seed).substream("cluster"),
                  threads=threads)
    summary = figure2_report(part, table.labels)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["participant_id", "pc1", "pc2", "cluster", "pd_label"])
    for pid, (x, y), c, l in zip(table.ids, P, part.assignments, table.labels):
        w.writerow([pid, repr(float(x)), repr(float(y)), int(c), int(l)])
    doc = {
        "k": k,
        "standardized": standardize,
        "pca": {"mean": pca.mean.tolist(), "components": pca.components.tolist(),
                "explained_variance": pca.explained_variance.tolist()},
        "inertia": part.inertia,
        "restart": part.restart,
        "clusters": [asdict(r) for r in summary],
        "reference": {"reference_only": True,
                      "top_cluster_pd_fraction": reference.TOP_CLUSTER_PD_FRACTION},
    }
    return {"figure2_points.csv": buf.getvalue(),
            "figure2_clusters.json": dumps(validate(doc, "figure2_clusters"))}


def features_outputs(table, qc=None):
    out = {"features.csv": table.to_csv(), "features.json": dumps(table.to_json())}
    if qc is not None:
        out["qc_peaks.json"] = dumps(qc)
    return out


def summary_counts(table):
    return {"participants": len(table), "pd": int(table.labels.sum()),
            "nonpd": int((~table.labels).sum()), "excluded": len(table.excluded),
            "with_missing_features": int(np.any(table.missing, axis=1).sum())}
