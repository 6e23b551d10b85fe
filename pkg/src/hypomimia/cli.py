"""Command line front end.

Every flag may also be set through an environment variable named
``HYPO_<FLAG>`` (upper case, dashes as underscores), e.g. ``HYPO_SEED=7``.
Explicit flags win over the environment.

Exit codes: 0 success, 1 data error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__, pipeline
from .classifier import PipelineConfig
from .errors import ConfigError, DataError
from .features import FeatureTable, extract_features, qc_expression_association
from .ingest import DEFAULT_CONFIDENCE, load_cohort
from .synth import CohortSpec, generate_features, generate_recordings

COMMANDS = ("synth", "ingest", "features", "stats", "classify", "regress", "cluster", "report")


def _env(name, default, cast=str):
    raw = os.environ.get("HYPO_" + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"HYPO_{name.upper()}: cannot parse {raw!r}") from None


def _bool(s):
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _seed(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=_env("out", None), help="output directory")
    common.add_argument("--seed", type=_seed, default=_env("seed", 0, int))
    common.add_argument("--threads", type=_positive_int, default=_env("threads", 1, int))

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--manifest", default=_env("manifest", None), help="cohort manifest JSON")
    inputs.add_argument("--features", default=_env("features", None),
                        help="feature table CSV (instead of --manifest)")
    inputs.add_argument("--confidence-threshold", type=float,
                        default=_env("confidence-threshold", DEFAULT_CONFIDENCE, float))

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--mode", choices=("fold-safe", "paper-faithful"),
                       default=_env("mode", "fold-safe"))
    model.add_argument("--kernel", choices=("rbf", "linear"), default=_env("kernel", "rbf"))
    model.add_argument("--c", type=float, default=_env("c", 1.0, float), dest="C")
    model.add_argument("--gamma", type=float, default=_env("gamma", None, float))
    model.add_argument("--smote-k", type=_positive_int, default=_env("smote-k", 5, int))

    clus = argparse.ArgumentParser(add_help=False)
    clus.add_argument("--k", type=_positive_int, default=_env("k", 3, int), help="clusters")
    clus.add_argument("--standardize", action=argparse.BooleanOptionalAction,
                      default=_env("standardize", False, _bool),
                      help="scale features to unit SD before PCA")

    p = argparse.ArgumentParser(prog="hypomimia", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    s = sub.add_parser("synth", parents=[common], help="generate a synthetic cohort")
    s.add_argument("--n-pd", type=_positive_int, default=_env("n-pd", 61, int))
    s.add_argument("--n-nonpd", type=_positive_int, default=_env("n-nonpd", 543, int))
    s.add_argument("--features-only", action="store_true",
                   default=_env("features-only", False, _bool))
    sub.add_parser("ingest", parents=[common, inputs], help="validate a manifest and its CSVs")
    sub.add_parser("features", parents=[common, inputs], help="extract the feature table")
    sub.add_parser("stats", parents=[common, inputs], help="group comparison table")
    sub.add_parser("classify", parents=[common, inputs, model], help="leave-one-out SVM metrics")
    sub.add_parser("regress", parents=[common, inputs], help="logistic weights and Wald tests")
    sub.add_parser("cluster", parents=[common, inputs, clus], help="PCA + k-means data")
    sub.add_parser("report", parents=[common, inputs, model, clus], help="run every analysis")
    return p


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_table(args):
    if bool(args.manifest) == bool(args.features):
        raise ConfigError("give exactly one of --manifest or --features")
    if args.features:
        return FeatureTable.from_csv(args.features), None
    cohort = load_cohort(args.manifest, args.confidence_threshold, args.threads)
    return extract_features(cohort), cohort


def _config_echo(args):
    skip = {"out", "threads", "command", "manifest", "features"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    for key in ("manifest", "features"):
        path = getattr(args, key, None)
        if path:
            cfg[key] = {"name": Path(path).name, "sha256": _digest(path)}
    return cfg


def _write(out, files):
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")


def run(args):
    if not args.out:
        raise ConfigError("--out is required")
    out = Path(args.out)
    files = {}
    cmd = args.command

    if cmd == "synth":
        spec = CohortSpec(n_pd=args.n_pd, n_nonpd=args.n_nonpd, seed=args.seed)
        if args.features_only:
            files["features.csv"] = generate_features(spec).to_csv()
        else:
            out.mkdir(parents=True, exist_ok=True)
            generate_recordings(spec, out)
            files_written = ["manifest.json", "targets.csv", "csv/"]
    else:
        table, cohort = _load_table(args)
        if cmd == "ingest":
            if cohort is None:
                raise ConfigError("ingest needs --manifest")
            files["ingest.json"] = pipeline.dumps({
                "participants": len(cohort.participants),
                "recordings": len(cohort.recordings),
                "files": cohort.parse_stats,
            })
        if cmd in ("features", "report"):
            qc = qc_expression_association(cohort) if cohort is not None else None
            files.update(pipeline.features_outputs(table, qc))
        if cmd in ("stats", "report"):
            files.update(pipeline.stats_outputs(table))
        if cmd in ("classify", "report"):
            cfg = PipelineConfig(kernel=args.kernel, C=args.C, gamma=args.gamma,
                                 smote_k=args.smote_k)
            files.update(pipeline.classify_outputs(table, cfg, args.mode, args.seed, args.threads))
        if cmd in ("regress", "report"):
            files.update(pipeline.regress_outputs(table))
        if cmd in ("cluster", "report"):
            files.update(pipeline.cluster_outputs(table, args.k, args.standardize, args.seed,
                                                  args.threads))
        if cmd != "ingest":
            files["summary.json"] = pipeline.dumps(pipeline.summary_counts(table))

    written = sorted(files) if cmd != "synth" or args.features_only else files_written
    run_doc = {
        "command": cmd,
        "seed": args.seed,
        "config": _config_echo(args),
        "versions": {"hypomimia": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "outputs": written,
    }
    files["run.json"] = pipeline.dumps(pipeline.validate(run_doc, "run"))
    _write(out, files)


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        return _fail(2, exc)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            run(args)
    except ConfigError as exc:
        return _fail(2, exc)
    except (DataError, OSError, json.JSONDecodeError) as exc:
        return _fail(1, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
