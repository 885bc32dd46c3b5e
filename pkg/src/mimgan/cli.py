"""Command-line front end: ``python -m mimgan <command>``.

Exit codes: 0 success, 1 failed check or invalid input, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .data import (CsvFormatError, Dataset, SplitSpec, load_csv, make_manifest, make_two_cluster,
                   scale_apply, scale_fit, split, check_manifest)
from .detection import (ContaminationQuantile, ScoreParams, decide, normalize_scores,
                        parse_rule, run_pipeline, score_samples, threshold)
from .latent import InversionParams
from .metrics import EvalReport, evaluate, mean_std
from .objectives import GanKind
from .theory_checks import run_theory_checks
from .training import TrainConfig, TrainingDiverged, load_gan, reconstruction_error, save_gan, train

log = logging.getLogger("mimgan")

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


class CheckpointMissing(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_config(path) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _load_dataset(spec: str) -> Dataset:
    """A CSV path, or ``two-cluster[:seed]`` for the built-in synthetic set."""
    if spec.startswith("two-cluster"):
        _, _, seed = spec.partition(":")
        return make_two_cluster(seed=int(seed or 0))
    return load_csv(spec)


def _train_config(cfg: dict, args, kind=None, seed=None) -> TrainConfig:
    fields = dict(cfg.get("train", {}))
    if kind is not None:
        fields["kind"] = kind
    elif getattr(args, "kind", None):
        fields["kind"] = args.kind
    if getattr(args, "iterations", None) is not None:
        fields["iterations"] = args.iterations
    if seed is not None:
        fields["seed"] = seed
    return TrainConfig.from_json(fields)


def _score_params(cfg: dict, args) -> ScoreParams:
    fields = dict(cfg.get("score", {}))
    inversion = InversionParams(**fields.pop("inversion", {}))
    cfg_rule = fields.pop("threshold_rule", None)
    rule_text = getattr(args, "threshold_rule", None) or cfg_rule
    rule = parse_rule(rule_text) if rule_text else None
    return ScoreParams(inversion=inversion, rule=rule, **fields)


def _n_train(cfg: dict, args, ds: Dataset) -> int:
    if getattr(args, "n_train", None) is not None:
        return args.n_train
    if "n_train" in cfg.get("split", {}):
        return int(cfg["split"]["n_train"])
    return int(round(0.7 * ds.n))


def _split_seed(cfg: dict, default: int = 0) -> int:
    return int(cfg.get("split", {}).get("seed", default))


def _write_scores(path: Path, raw, norm, pred, truth=None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        header = ["index", "raw_score", "normalized_score", "predicted_label"]
        if truth is not None:
            header.append("true_label")
        w.writerow(header)
        for i in range(len(raw)):
            row = [i, repr(float(raw[i])), repr(float(norm[i])), int(pred[i])]
            if truth is not None:
                row.append(int(truth[i]))
            w.writerow(row)


def _read_scores(path: Path):
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "raw_score" not in rows[0]:
        raise CsvFormatError(f"{path}: not a scores file")
    if "true_label" not in rows[0]:
        raise CsvFormatError(f"{path}: no true_label column; evaluation needs labels")
    raw = np.array([float(r["raw_score"]) for r in rows])
    pred = np.array([int(r["predicted_label"]) for r in rows])
    truth = np.array([int(r["true_label"]) for r in rows])
    return raw, pred, truth


def _write_roc(path: Path, report: EvalReport) -> None:
    fpr, tpr, thr = report.roc
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fpr", "tpr", "threshold"])
        for a, b, c in zip(fpr, tpr, thr):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])


def model_seed(kind: GanKind, seed: int) -> int:
    """Independent, stable model seed per (kind, seed)."""
    digest = hashlib.sha256(f"{kind.value}:{seed}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


# ---------------------------------------------------------------- commands

def cmd_theory_check(args) -> int:
    report = run_theory_checks()
    failed = [r["check_name"] for r in report if r["status"] != "pass"]
    if args.out:
        _write_json(Path(args.out) / "theory_report.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    ds = _load_dataset(args.dataset)
    spec = SplitSpec(_n_train(cfg, args, ds), _split_seed(cfg, args.seed))
    train_ds, _ = split(ds, spec)
    scaler = scale_fit(train_ds)
    tc = _train_config(cfg, args, seed=args.seed)
    gan = train(tc, scale_apply(scaler, train_ds.features, clip=1.0), scaler)
    save_gan(gan, args.out, extra={
        "split": {"n_train": spec.n_train, "seed": spec.seed, "n_total": ds.n},
        "dataset": make_manifest(ds)})
    log.info("checkpoint written to %s", args.out)
    return EXIT_OK


def _checkpoint(args):
    path = Path(args.checkpoint)
    try:
        return load_gan(path)
    except FileNotFoundError as exc:
        raise CheckpointMissing(str(exc)) from None


def _test_rows(ds: Dataset, meta: dict) -> Dataset:
    """The held-out rows when ``ds`` is the dataset the checkpoint was trained on."""
    sp = meta.get("split")
    if sp and sp.get("n_total") == ds.n:
        return split(ds, SplitSpec(sp["n_train"], sp["seed"]))[1]
    log.info("dataset size differs from the training run; scoring every row")
    return ds


def cmd_detect(args) -> int:
    gan, meta = _checkpoint(args)
    cfg = _load_config(args.config)
    params = _score_params(cfg, args)
    ds = _test_rows(_load_dataset(args.dataset), meta)
    if gan.scaler is None:
        raise ValueError("checkpoint has no stored scaler")
    x = scale_apply(gan.scaler, ds.features)
    if x.shape[1] != gan.feature_dim:
        raise ValueError(f"dataset has {x.shape[1]} features, model expects {gan.feature_dim}")
    raw, _, _ = score_samples(x, gan, params, seed=args.seed)
    norm = normalize_scores(raw)
    rule = params.rule
    if rule is None:
        rate = meta.get("dataset", {}).get("anomaly_count")
        if rate is None:
            raise ValueError("no threshold rule given and the training data carried no labels")
        rule = ContaminationQuantile(rate / meta["dataset"]["n"])
    pred = decide(norm, rule)
    out = Path(args.out)
    _write_scores(out / "scores.csv", raw, norm, pred, ds.labels)
    _write_json(out / "detect.json", {"threshold": threshold(norm, rule), "rule": repr(rule),
                                      "n_scored": int(ds.n)})
    return EXIT_OK


def cmd_evaluate(args) -> int:
    raw, pred, truth = _read_scores(Path(args.scores))
    report = evaluate(raw, pred, truth)
    out = Path(args.out)
    _write_json(out / "report.json", report.to_json())
    out.mkdir(parents=True, exist_ok=True)
    _write_roc(out / "roc.csv", report)
    return EXIT_OK


def cmd_recon_error(args) -> int:
    gan, meta = _checkpoint(args)
    ds = _test_rows(_load_dataset(args.dataset), meta)
    x = scale_apply(gan.scaler, ds.features)
    cfg = _load_config(args.config)
    inv = InversionParams(**cfg.get("score", {}).get("inversion", {}))
    value = reconstruction_error(gan, x, inv, seed=args.seed)
    result = {"reconstruction_error": value, "n": int(ds.n)}
    if args.out:
        _write_json(Path(args.out) / "recon_error.json", result)
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


def _summary(reports: list[EvalReport]) -> dict:
    out = {"auc": {**mean_std([r.auc for r in reports]),
                   "median": float(np.median([r.auc for r in reports])),
                   "per_seed": [r.auc for r in reports]}}
    rec = [r.reconstruction_error for r in reports if r.reconstruction_error is not None]
    if rec:
        out["reconstruction_error"] = {**mean_std(rec), "median": float(np.median(rec)),
                                       "per_seed": rec}
    for conv in reports[0].metrics:
        out[conv] = {m: mean_std([getattr(r.metrics[conv], m) for r in reports])
                     for m in ("precision", "recall", "f1", "accuracy")}
    return out


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    ds = _load_dataset(args.dataset)
    kinds = [GanKind.parse(k) for k in args.kinds.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    params = _score_params(cfg, args)
    n_train = _n_train(cfg, args, ds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary, rows = {}, []
    for kind in kinds:
        reports = []
        for seed in seeds:
            tc = _train_config(cfg, args, kind=kind, seed=model_seed(kind, seed))
            # same split for every kind at a given seed
            res = run_pipeline(ds, tc, params, SplitSpec(n_train, seed), seed=seed,
                               with_reconstruction=not args.no_recon)
            if res.report is None:
                raise ValueError("comparison needs a labelled test split with both classes")
            reports.append(res.report)
            rows.append((kind.value, seed, res.report.auc))
            log.info("%s seed %d: auc %.4f", kind.value, seed, res.report.auc)
        aucs = np.array([r.auc for r in reports])
        median_idx = int(np.argmin(np.abs(aucs - np.median(aucs))))
        _write_roc(out / f"roc_{kind.value}.csv", reports[median_idx])
        summary[kind.value] = {**_summary(reports), "roc_seed": seeds[median_idx]}
    with (out / "auc_per_seed.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "seed", "auc"])
        for kind, seed, auc in rows:
            w.writerow([kind, seed, repr(auc)])
    manifest = make_manifest(ds)
    _write_json(out / "report.json", {
        "dataset": manifest, "manifest_warnings": check_manifest(manifest),
        "protocol": {"n_train": n_train, "seeds": seeds, "kinds": [k.value for k in kinds],
                     "train": _train_config(cfg, args, kind=kinds[0]).to_json() | {"seed": None, "kind": None},
                     "score": {"eta": params.eta, "beta": params.beta,
                               "inversion": asdict(params.inversion),
                               "rule": repr(params.rule) if params.rule else "contamination"}},
        "kinds": summary})
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimgan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory-check", help="run the closed-form identity suite")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory_check)

    def common(p, dataset=True, out=True):
        p.add_argument("--config", help="JSON with optional train/score/split sections")
        if dataset:
            p.add_argument("--dataset", required=True, help="CSV path or two-cluster[:seed]")
        p.add_argument("--out", required=out)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train one GAN and write a checkpoint")
    common(p)
    p.add_argument("--kind", choices=[k.value for k in GanKind])
    p.add_argument("--iterations", type=int)
    p.add_argument("--n-train", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="score held-out rows with a checkpoint")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threshold-rule", help="fixed:<gamma> | quantile:<rate> | contamination")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="metrics from a scores CSV with labels")
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recon-error", help="mean reconstruction error of held-out rows")
    common(p, out=False)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_recon_error)

    p = sub.add_parser("compare", help="train, detect and evaluate several kinds over seeds")
    common(p)
    p.add_argument("--kinds", default=",".join(k.value for k in GanKind))
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--iterations", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--threshold-rule")
    p.add_argument("--no-recon", action="store_true", help="skip the reconstruction-error pass")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CheckpointMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (CsvFormatError, ValueError, TrainingDiverged, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
