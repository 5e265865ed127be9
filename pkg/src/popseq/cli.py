"""Command-line front end.

Subcommands: synth, elbow, train, predict, eval, ablate, importances.
Outputs land in --out (created if absent) under fixed file names, so a
repeated invocation with identical inputs reproduces them byte for byte.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import clustering, datasets, evaluation, framework
from .sequences import NormScheme, decompose_matrix

CONFIG_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="popseq", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True):
        if data:
            p.add_argument("--data", required=True, help="dataset CSV path")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default 42)")
        p.add_argument("--out", default="popseq-out", help="output directory")
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.add_argument("--period-length", type=int, default=None)
        p.add_argument("--cluster-sizes", default=None,
                       help="comma-separated, e.g. 2,2,2")
        p.add_argument("--norm", choices=("none", "log", "ratio-log", "log-log"),
                       default=None)
        p.add_argument("--c-value", type=float, default=None,
                       help="c for the log-log scheme")
        p.add_argument("--classifier", choices=framework.MODEL_KINDS, default=None)
        p.add_argument("--regressor", choices=framework.MODEL_KINDS, default=None)
        p.add_argument("--trees", type=int, default=None,
                       help="trees per forest model")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--n", type=int, default=None, help="sample count")
    p.add_argument("--params", help="SynthParams JSON file")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="popseq-out")

    p = sub.add_parser("elbow", help="per-period K-vs-inertia curves")
    common(p)
    p.add_argument("--k-range", default="1:10", help="inclusive, e.g. 1:10")
    p.add_argument("--restarts", type=int, default=10)

    p = sub.add_parser("train", help="fit and persist a framework")
    common(p)

    p = sub.add_parser("predict", help="predict sequences for a feature CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="framework archive path")
    p.add_argument("--out", default="popseq-out")

    p = sub.add_parser("eval", help="cross-validated four-case report")
    common(p)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--trim", type=float, default=None, help="trim fraction")

    p = sub.add_parser("ablate", help="vary one axis, shared folds")
    common(p)
    p.add_argument("--axis", required=True, choices=evaluation.ABLATION_AXES)
    p.add_argument("--values", required=True,
                   help="comma-separated; cluster size lists split on ';'")
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--trim", type=float, default=None)

    p = sub.add_parser("importances", help="per-period feature importances")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="popseq-out")

    return parser


def _load_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError("config file must hold a JSON object")
    version = payload.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ValueError(f"unsupported config version {version!r}")
    known = {"version", "framework", "folds", "trim_fraction"}
    extra = set(payload) - known
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    return payload


def _resolve_config(args, horizon: int | None = None):
    """Merge config file and flag overrides into a FrameworkConfig."""
    payload = _load_config_file(args.config) if args.config else {}
    fw_dict = dict(payload.get("framework", {}))
    if horizon is not None and "horizon" not in fw_dict:
        fw_dict["horizon"] = horizon
    config = framework.FrameworkConfig.from_dict(fw_dict)

    if args.period_length is not None:
        config = config.with_period_length(args.period_length)
    if args.cluster_sizes is not None:
        sizes = tuple(int(s) for s in args.cluster_sizes.split(","))
        config = replace(config, cluster_sizes=sizes)
    if args.norm is not None or args.c_value is not None:
        kind = args.norm or config.norm_scheme.kind
        if kind == "log-log":
            scheme = NormScheme.log_log(args.c_value if args.c_value is not None
                                        else config.norm_scheme.c)
        elif kind == "ratio-log":
            scheme = NormScheme.ratio_log(horizon=config.horizon)
        elif kind == "log":
            scheme = NormScheme.log()
        else:
            scheme = NormScheme.none()
        config = replace(config, norm_scheme=scheme)
    if args.classifier is not None:
        config = replace(config, classifier_kind=args.classifier)
    if args.regressor is not None:
        config = replace(config, regressor_kind=args.regressor)
    if args.trees is not None:
        config = replace(
            config,
            classifier_params=replace(config.classifier_params, n_trees=args.trees),
            regressor_params=replace(config.regressor_params, n_trees=args.trees))
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    folds = payload.get("folds", 3)
    trim = payload.get("trim_fraction", 0.25)
    if getattr(args, "folds", None) is not None:
        folds = args.folds
    if getattr(args, "trim", None) is not None:
        trim = args.trim
    return config, int(folds), float(trim)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(args, need_sequences=True) -> datasets.Dataset:
    ds = datasets.load_csv(args.data)
    if need_sequences and ds.sequences is None:
        raise ValueError(f"{args.data} has no sequence columns")
    return ds


def _cmd_synth(args) -> int:
    params = datasets.SynthParams()
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            params = datasets.SynthParams.from_dict(json.load(fh))
    overrides = {}
    if args.n is not None:
        overrides["n_samples"] = args.n
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        params = replace(params, **overrides)
    ds = datasets.synth_generate(params)
    path = _out_dir(args) / "dataset.csv"
    datasets.write_csv(ds, path)
    print(f"wrote {path} ({len(ds)} samples)")
    return 0


def _cmd_elbow(args) -> int:
    ds = _load_dataset(args)
    config, _, _ = _resolve_config(args, horizon=ds.horizon)
    try:
        lo, hi = (int(v) for v in args.k_range.split(":"))
    except ValueError:
        raise ValueError(f"--k-range must look like 1:10, got {args.k_range!r}") from None
    shapes, _, degenerate = decompose_matrix(ds.sequences)
    shapes = shapes[~degenerate]
    out = _out_dir(args)
    for i, slice_i in enumerate(framework.split_periods(shapes, config.n_periods)):
        curve = clustering.elbow_scan(slice_i, (lo, hi), seed=config.seed,
                                      restarts=args.restarts)
        path = out / f"elbow_period{i}.csv"
        curve.to_csv(path)
        print(f"wrote {path}")
    return 0


def _cmd_train(args) -> int:
    ds = _load_dataset(args)
    config, _, _ = _resolve_config(args, horizon=ds.horizon)
    fw = framework.fit(ds.features, ds.sequences, config,
                       feature_names=ds.feature_names)
    path = _out_dir(args) / "framework.json"
    fw.save(path)
    print(f"wrote {path}")
    return 0


def _cmd_predict(args) -> int:
    fw = framework.TrainedFramework.load(args.model)
    ds = datasets.load_csv(args.data)
    preds = fw.predict(ds.features)
    path = _out_dir(args) / "predictions.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["post_id"]
                        + [f"pred_d{d:02d}" for d in range(1, fw.config.horizon + 1)])
        for pid, row in zip(ds.ids, preds):
            writer.writerow([pid] + [repr(float(v)) for v in row])
    print(f"wrote {path}")
    return 0


def _cmd_eval(args) -> int:
    ds = _load_dataset(args)
    config, folds, trim = _resolve_config(args, horizon=ds.horizon)
    seed = args.seed if args.seed is not None else config.seed
    report = evaluation.run_protocol(ds.features, ds.sequences, config,
                                     folds=folds, seed=seed, trim_fraction=trim)
    out = _out_dir(args)
    if args.format == "text":
        path = out / "report.txt"
        path.write_text(report.to_text(), encoding="utf-8")
    else:
        path = out / "report.json"
        path.write_text(report.to_json(), encoding="utf-8")
    sys.stdout.write(report.to_text())
    print(f"wrote {path}")
    return 0


def _parse_axis_values(axis: str, raw: str):
    if axis == "cluster_sizes":
        return [tuple(int(v) for v in group.split(","))
                for group in raw.split(";") if group]
    values = [v for v in raw.split(",") if v]
    if axis == "period_length":
        return [int(v) for v in values]
    if axis == "c_value":
        return [float(v) for v in values]
    return values


def _cmd_ablate(args) -> int:
    ds = _load_dataset(args)
    config, folds, trim = _resolve_config(args, horizon=ds.horizon)
    seed = args.seed if args.seed is not None else config.seed
    values = _parse_axis_values(args.axis, args.values)
    table = evaluation.run_ablation(ds.features, ds.sequences, args.axis, values,
                                    base_config=config, folds=folds, seed=seed,
                                    trim_fraction=trim)
    out = _out_dir(args)
    csv_path = out / "ablation.csv"
    csv_path.write_text(table.to_csv(), encoding="utf-8")
    json_path = out / "ablation.json"
    json_path.write_text(table.to_json(), encoding="utf-8")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def _cmd_importances(args) -> int:
    fw = framework.TrainedFramework.load(args.model)
    clf = fw.classifier_importances()
    reg = fw.regressor_importances()
    path = _out_dir(args) / "importances.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature"]
                        + [f"classifier_p{i}" for i in range(clf.shape[0])]
                        + ["regressor"])
        for f, name in enumerate(fw.feature_names):
            writer.writerow([name] + [repr(float(v)) for v in clf[:, f]]
                            + [repr(float(reg[f]))])
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "elbow": _cmd_elbow,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "ablate": _cmd_ablate,
    "importances": _cmd_importances,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"popseq {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
