"""Batch command-line frontend.

Commands: ``generate``, ``screen``, ``evaluate``, ``sweep``, ``audit``.
Configuration files are flat ``key = value`` text with ``#`` comments; the
keys use the same hyphenated names the tool's reports use (``step-size``,
``reduced-size``, ``n-trees``, ...), so tabulated settings paste straight
into a config.  Unknown keys are rejected and every numeric range is
checked before any work starts.

Exit codes: 0 success, 2 validation error, 1 runtime failure.  ``audit``
additionally exits 1 when the screened set contains canary features.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

from .baselines import kbest_fscore, pca_fit, pca_transform, random_subset
from .data import CsvFormatError, Dataset, load_csv, write_csv
from .evaluate import (ClassifierSpec, EvaluationReport, ReportEntry, ScreenerSpec,
                       convergence_sweep, cross_validate, grid_search)
from .forest import ForestParams
from .rfms import ScreeningConfig, augment_with_canaries, screen
from .serialize import (pca_document, pca_model_from_document, read_json,
                        report_csv, report_document, screening_document,
                        subset_document, sweep_csv, sweep_document, write_json)
from .synth import GeneratorConfig, generate


class ValidationError(Exception):
    """User input problem detected before any work starts."""


def _positive(v):
    return v >= 1


def _nonnegative(v):
    return v >= 0


def _fraction(v):
    return 0.0 < v <= 1.0


def _usefulness(v):
    return 0.0 < v <= 1.0


def _int_list(raw: str):
    return [int(part.strip()) for part in raw.split(",") if part.strip()]


# key -> (converter, range check or None, default or _REQUIRED)
_REQUIRED = object()

_GENERATE_KEYS = {
    "n-classes": (int, lambda v: v >= 2, 10),
    "n-samples-per-class": (int, _positive, 16),
    "n-true-features": (int, _nonnegative, 20),
    "n-fake-features": (int, _nonnegative, 20),
    "min-usefulness": (float, _usefulness, 0.5),
    "max-usefulness": (float, _usefulness, 1.0),
    "location-sharing-extent": (int, _nonnegative, 0),
    "location-ordering-extent": (int, _nonnegative, 0),
    "n-features-out": (int, _positive, 200),
    "blending-mode": (str, lambda v: v in ("linear", "logarithmic"), "logarithmic"),
    "min-count": (int, _positive, 2),
    "max-count": (int, _positive, 4),
    "random-state": (int, None, 137),
}

_SCREEN_KEYS = {
    "step-size": (int, _positive, None),
    "reduced-size": (int, _positive, _REQUIRED),
    "n-trees": (int, _positive, 100),
    "n-subfeatures": (int, _nonnegative, 0),  # 0 = auto
    "min-samples-leaf": (int, _positive, 1),
    "min-purity-increase": (float, lambda v: v >= 0.0, 0.0),
    "partial-sampling": (float, _fraction, 0.7),
    "random-state": (int, None, 20230125),
    "n-canaries": (int, _nonnegative, 0),
}

_EVAL_KEYS = {
    "folds": (int, lambda v: v >= 2, 5),
    "random-state": (int, None, 20230125),
    "knn-k": (_int_list, lambda vs: vs and all(v >= 1 for v in vs), [1, 3, 5]),
    "rf-n-trees": (int, _positive, 50),
    "rf-n-subfeatures": (int, _nonnegative, 0),
    "rf-min-samples-leaf": (int, _positive, 1),
    "rf-min-purity-increase": (float, lambda v: v >= 0.0, 0.0),
    "rf-partial-sampling": (float, _fraction, 0.7),
}

_SWEEP_KEYS = {**_SCREEN_KEYS, **_EVAL_KEYS,
               # the sweep's feature-counts replace reduced-size
               "reduced-size": (int, _positive, None),
               "feature-counts": (_int_list, lambda vs: vs and all(v >= 1 for v in vs),
                                  _REQUIRED)}


def _parse_config_file(path) -> dict[str, str]:
    raw: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        if key in raw:
            raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _resolve_config(raw: dict[str, str], schema: dict, context: str) -> dict:
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(f"unknown {context} config key(s): {', '.join(unknown)}")
    resolved = {}
    for key, (convert, check, default) in schema.items():
        if key in raw:
            try:
                value = convert(raw[key])
            except ValueError:
                raise ValidationError(f"config key {key!r}: cannot parse {raw[key]!r}") from None
        elif default is _REQUIRED:
            raise ValidationError(f"config key {key!r} is required for {context}")
        else:
            value = default
        if value is not None and check is not None and not check(value):
            raise ValidationError(f"config key {key!r}: value {value!r} out of range")
        resolved[key] = value
    return resolved


def _load_config(args, schema, context) -> dict:
    raw = _parse_config_file(args.config) if args.config else {}
    cfg = _resolve_config(raw, schema, context)
    if getattr(args, "seed", None) is not None:
        cfg["random-state"] = args.seed
    if getattr(args, "folds", None) is not None:
        if args.folds < 2:
            raise ValidationError("--folds must be at least 2")
        cfg["folds"] = args.folds
    return cfg


def _load_dataset(args) -> Dataset:
    if not args.data:
        raise ValidationError("--data is required")
    try:
        return load_csv(args.data, label_column=args.label_column)
    except (OSError, CsvFormatError) as exc:
        raise ValidationError(str(exc)) from None


def _threads(args) -> int:
    if args.threads is not None:
        value = args.threads
    else:
        env = os.environ.get("RFSCREEN_THREADS", "1")
        try:
            value = int(env)
        except ValueError:
            raise ValidationError(f"RFSCREEN_THREADS={env!r} is not an integer") from None
    if value < 1:
        raise ValidationError("--threads must be at least 1")
    return value


def _auto_subfeatures(explicit: int, pool: int) -> int:
    if explicit > 0:
        return min(explicit, pool)
    return max(1, math.ceil(math.sqrt(pool)))


def _classifier_grid(cfg: dict, which: str) -> list[ClassifierSpec]:
    knn = [ClassifierSpec("knn", {"k": k}) for k in cfg["knn-k"]]
    rf_params = {
        "n_trees": cfg["rf-n-trees"],
        "min_samples_leaf": cfg["rf-min-samples-leaf"],
        "min_purity_increase": cfg["rf-min-purity-increase"],
        "partial_sampling": cfg["rf-partial-sampling"],
        "seed": cfg["random-state"],
    }
    if cfg["rf-n-subfeatures"] > 0:
        rf_params["n_subfeatures"] = cfg["rf-n-subfeatures"]
    rf = [ClassifierSpec("rf", rf_params)]
    majority = [ClassifierSpec("majority")]
    grids = {"knn": knn, "rf": rf, "majority": majority,
             "all": knn + rf + majority}
    return grids[which]


def cmd_generate(args) -> int:
    cfg = _load_config(args, _GENERATE_KEYS, "generate")
    if not args.out:
        raise ValidationError("--out is required")
    try:
        gen_config = GeneratorConfig(
            n_classes=cfg["n-classes"],
            n_samples_per_class=cfg["n-samples-per-class"],
            n_true_features=cfg["n-true-features"],
            n_fake_features=cfg["n-fake-features"],
            min_usefulness=cfg["min-usefulness"],
            max_usefulness=cfg["max-usefulness"],
            n_features_out=cfg["n-features-out"],
            min_count=cfg["min-count"],
            max_count=cfg["max-count"],
            blending_mode=cfg["blending-mode"],
            location_sharing_extent=cfg["location-sharing-extent"],
            location_ordering_extent=cfg["location-ordering-extent"],
            seed=cfg["random-state"],
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    dataset, provenance = generate(gen_config)
    out = Path(args.out)
    write_csv(dataset, out, label_column=args.label_column)
    sidecar = out.with_name(out.stem + ".provenance.json")
    write_json({"schema_version": 1, "kind": "provenance", **provenance.to_dict()}, sidecar)
    print(f"wrote {dataset.n_samples} samples x {dataset.n_features} features "
          f"({dataset.n_classes} classes) to {out}")
    print(f"wrote provenance to {sidecar}")
    return 0


def _screen_rfms(dataset: Dataset, cfg: dict, n_threads: int) -> dict:
    if cfg["step-size"] is None:
        raise ValidationError("config key 'step-size' is required for rfms")
    n_aug = dataset.n_features + cfg["n-canaries"]
    if cfg["step-size"] > n_aug:
        raise ValidationError(
            f"step-size={cfg['step-size']} exceeds the augmented feature count {n_aug}")
    try:
        config = ScreeningConfig(
            step_size=cfg["step-size"],
            reduced_size=cfg["reduced-size"],
            forest=ForestParams(
                n_trees=cfg["n-trees"],
                n_subfeatures=_auto_subfeatures(
                    cfg["n-subfeatures"], cfg["step-size"] + cfg["reduced-size"]),
                min_samples_leaf=cfg["min-samples-leaf"],
                min_purity_increase=cfg["min-purity-increase"],
                partial_sampling=cfg["partial-sampling"],
                seed=cfg["random-state"],
            ),
            n_canaries=cfg["n-canaries"],
            seed=cfg["random-state"],
        )
        config.forest.validate()
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    result = screen(dataset, config, n_threads=n_threads)
    return screening_document(result)


def _screen_baseline(dataset: Dataset, screener: str, cfg: dict) -> dict:
    k_out = cfg["reduced-size"]
    seed = cfg["random-state"]
    if screener == "pca":
        if cfg["n-canaries"] > 0:
            raise ValidationError("canaries are only meaningful for subset screeners; "
                                  "set n-canaries = 0 for pca")
        if not 1 <= k_out <= min(dataset.n_samples, dataset.n_features):
            raise ValidationError(
                f"reduced-size must be in 1..{min(dataset.n_samples, dataset.n_features)} for pca")
        wall0, cpu0 = time.perf_counter(), time.process_time()
        model = pca_fit(dataset, k_out)
        meta = {"n_samples": dataset.n_samples, "n_features": dataset.n_features,
                "n_classes": dataset.n_classes}
        return pca_document({"name": "pca", "n_out": k_out}, model, meta,
                            wall_s=time.perf_counter() - wall0,
                            cpu_s=time.process_time() - cpu0)
    augmented, canary_ids = augment_with_canaries(dataset, cfg["n-canaries"], seed)
    if not 1 <= k_out <= augmented.n_features:
        raise ValidationError(f"reduced-size must be in 1..{augmented.n_features}")
    if screener == "kbest" and dataset.n_classes < 2:
        raise ValidationError("k-best needs at least 2 classes")
    wall0, cpu0 = time.perf_counter(), time.process_time()
    if screener == "kbest":
        subset = kbest_fscore(augmented, k_out)
        screener_block = {"name": "kbest", "n_out": k_out}
    else:
        subset = random_subset(augmented.n_features, k_out, seed)
        screener_block = {"name": "random", "n_out": k_out, "random_state": seed}
    screener_block["n_canaries"] = cfg["n-canaries"]
    leaked = tuple(i for i in subset.indices if i in set(canary_ids))
    meta = {"n_samples": dataset.n_samples, "n_features": dataset.n_features,
            "n_classes": dataset.n_classes}
    return subset_document(screener_block, subset.indices, augmented.feature_names, meta,
                           canary_ids=canary_ids, leaked_ids=leaked,
                           wall_s=time.perf_counter() - wall0,
                           cpu_s=time.process_time() - cpu0)


def cmd_screen(args) -> int:
    cfg = _load_config(args, _SCREEN_KEYS, "screen")
    if not args.out:
        raise ValidationError("--out is required")
    n_threads = _threads(args)
    dataset = _load_dataset(args)
    if dataset.n_classes < 2:
        raise ValidationError("dataset has a single class; screening is undefined")
    if args.screener == "rfms":
        doc = _screen_rfms(dataset, cfg, n_threads)
    else:
        doc = _screen_baseline(dataset, args.screener, cfg)
    write_json(doc, args.out)
    leaks = doc.get("canaries", {}).get("leak_count", 0)
    print(f"screener={args.screener} selected={len(doc['selected'])} "
          f"canary_leaks={leaks} cpu={doc['timing']['cpu_s']:.2f}s -> {args.out}")
    return 0


def _selection_from_document(doc: dict, dataset: Dataset):
    """Reduced view of the dataset per a stored screening result."""
    if doc.get("kind") != "screening_result":
        raise ValidationError("result file is not a screening result document")
    if doc.get("schema_version") != 1:
        raise ValidationError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("transforming"):
        model = pca_model_from_document(doc)
        if model.n_features != dataset.n_features:
            raise ValidationError(
                f"result was fitted on {model.n_features} features, "
                f"dataset has {dataset.n_features}")
        return Dataset(
            features=pca_transform(model, dataset.features),
            labels=dataset.labels,
            feature_names=tuple(f"pc{i + 1}" for i in range(model.n_components)),
        )
    position = {name: i for i, name in enumerate(dataset.feature_names)}
    columns = []
    for item in doc["selected"]:
        if item.get("is_canary"):
            raise ValidationError(
                f"selected feature {item['name']!r} is a canary and does not exist "
                "in the dataset; audit the screening result")
        if item["name"] not in position:
            raise ValidationError(
                f"selected feature {item['name']!r} not found in the dataset; "
                "feature names do not match")
        columns.append(position[item["name"]])
    return dataset.select_features(columns)


def _screener_spec_from_document(doc: dict) -> ScreenerSpec:
    block = dict(doc["screener"])
    name = block.pop("name")
    if name == "rfms":
        return ScreenerSpec("rfms", {
            "n_out": block["reduced_size"],
            "step_size": block["step_size"],
            "n_trees": block["n_trees"],
            "n_subfeatures": block["n_subfeatures"],
            "min_samples_leaf": block["min_samples_leaf"],
            "min_purity_increase": block["min_purity_increase"],
            "partial_sampling": block["partial_sampling"],
            "seed": block["random_state"],
            "n_canaries": 0,  # canaries are a whole-table diagnostic, not a CV step
        })
    params = {"n_out": block["n_out"]}
    if "random_state" in block:
        params["seed"] = block["random_state"]
    return ScreenerSpec(name, params)


def _write_report(report: EvaluationReport, folds: int, out: str) -> Path:
    base = Path(out)
    if base.suffix == ".json":
        base = base.with_suffix("")
    write_json(report_document(report, folds), base.with_suffix(".json"))
    base.with_suffix(".csv").write_text(report_csv(report), encoding="utf-8")
    return base


def cmd_evaluate(args) -> int:
    cfg = _load_config(args, _EVAL_KEYS, "evaluate")
    if not args.out:
        raise ValidationError("--out is required")
    if not args.result:
        raise ValidationError("--result is required")
    n_threads = _threads(args)
    dataset = _load_dataset(args)
    try:
        doc = read_json(args.result)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read result file: {exc}") from None
    grid = _classifier_grid(cfg, args.classifier)
    folds = cfg["folds"]
    seed = cfg["random-state"]

    if args.leak_safe:
        spec = _screener_spec_from_document(doc)
        report = grid_search(dataset, [spec], grid, folds=folds, seed=seed,
                             n_threads=n_threads)
    else:
        reduced = _selection_from_document(doc, dataset)
        screener_label = f"{doc['screener']['name']}({reduced.n_features})"
        screening_cpu = float(doc["timing"]["cpu_s"])
        entries = []
        best_index = 0
        for c_spec in grid:
            cell = cross_validate(reduced, ScreenerSpec("identity"), c_spec,
                                  folds=folds, seed=seed, n_threads=n_threads)
            entries.append(ReportEntry(
                screener_id=screener_label,
                classifier_id=cell.classifier_id,
                n_features_out=reduced.n_features,
                fold_accuracies=cell.fold_accuracies,
                mean_accuracy=cell.mean_accuracy,
                screening_cpu_s=screening_cpu,
                fitting_cpu_s=cell.fitting_cpu_s,
            ))
            if entries[-1].mean_accuracy > entries[best_index].mean_accuracy:
                best_index = len(entries) - 1
        report = EvaluationReport(entries=tuple(entries), best_index=best_index)

    base = _write_report(report, folds, args.out)
    for entry in report.entries:
        print(f"{entry.screener_id} + {entry.classifier_id}: "
              f"accuracy={entry.mean_accuracy:.4f}")
    best = report.best
    print(f"best: {best.screener_id} + {best.classifier_id} "
          f"accuracy={best.mean_accuracy:.4f} -> {base.with_suffix('.json')}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args, _SWEEP_KEYS, "sweep")
    if not args.out:
        raise ValidationError("--out is required")
    n_threads = _threads(args)
    dataset = _load_dataset(args)
    if dataset.n_classes < 2:
        raise ValidationError("dataset has a single class; evaluation is undefined")
    counts = cfg["feature-counts"]
    if any(c > dataset.n_features for c in counts):
        raise ValidationError(f"feature-counts must be at most {dataset.n_features}")
    seed = cfg["random-state"]
    if args.screener == "rfms":
        if cfg["step-size"] is None:
            raise ValidationError("config key 'step-size' is required for rfms")
        if cfg["step-size"] > dataset.n_features + cfg["n-canaries"]:
            raise ValidationError("step-size exceeds the feature count")
        if any(c > cfg["step-size"] for c in counts):
            raise ValidationError("feature-counts may not exceed step-size for rfms")
        spec = ScreenerSpec("rfms", {
            "step_size": cfg["step-size"],
            "n_trees": cfg["n-trees"],
            "n_subfeatures": _auto_subfeatures(
                cfg["n-subfeatures"], cfg["step-size"] + max(counts)),
            "min_samples_leaf": cfg["min-samples-leaf"],
            "min_purity_increase": cfg["min-purity-increase"],
            "partial_sampling": cfg["partial-sampling"],
            "seed": seed,
            "n_canaries": cfg["n-canaries"],
        })
    elif args.screener == "pca":
        if any(c > min(dataset.n_samples, dataset.n_features) for c in counts):
            raise ValidationError("feature-counts exceed the PCA component limit")
        spec = ScreenerSpec("pca")
    elif args.screener == "random":
        spec = ScreenerSpec("random", {"seed": seed})
    else:
        spec = ScreenerSpec("kbest")
    grid = _classifier_grid(cfg, args.classifier)
    rows = convergence_sweep(dataset, spec, grid, counts, folds=cfg["folds"],
                             seed=seed, leak_safe=args.leak_safe, n_threads=n_threads)
    base = Path(args.out)
    if base.suffix == ".json":
        base = base.with_suffix("")
    write_json(sweep_document(rows, args.screener, cfg["folds"]), base.with_suffix(".json"))
    base.with_suffix(".csv").write_text(sweep_csv(rows), encoding="utf-8")
    for row in rows:
        print(f"n_features_out={row.n_features_out} best_accuracy={row.best_accuracy:.4f} "
              f"({row.best_classifier_id})")
    print(f"wrote {base.with_suffix('.json')} and {base.with_suffix('.csv')}")
    return 0


def cmd_audit(args) -> int:
    if not args.result:
        raise ValidationError("--result is required")
    try:
        doc = read_json(args.result)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read result file: {exc}") from None
    if doc.get("kind") != "screening_result":
        raise ValidationError("result file is not a screening result document")
    canaries = doc.get("canaries")
    if canaries is None:
        raise ValidationError("screening ran without canaries; nothing to audit")
    leaked = canaries["leaked_ids"]
    print(f"canaries={len(canaries['ids'])} leaks={canaries['leak_count']}")
    if leaked:
        names = {item["id"]: item["name"] for item in doc["selected"]}
        for fid in leaked:
            print(f"leaked: id={fid} name={names.get(fid, '?')}")
        return 1
    print("clean: no canary reached the screened set")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfscreen",
        description="Multiround random-forest feature screening toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False, out=False, result=False):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="override random-state")
        p.add_argument("--threads", type=int,
                       help="worker cap (default: $RFSCREEN_THREADS or 1)")
        p.add_argument("--label-column", default="label")
        if data:
            p.add_argument("--data", help="input dataset CSV")
        if out:
            p.add_argument("--out", help="output path")
        if result:
            p.add_argument("--result", help="screening result JSON")

    p = sub.add_parser("generate", help="generate a synthetic dataset")
    common(p, out=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("screen", help="run a feature screener")
    common(p, data=True, out=True)
    p.add_argument("--screener", choices=("rfms", "kbest", "pca", "random"),
                   default="rfms")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("evaluate", help="cross-validate classifiers on a screened set")
    common(p, data=True, out=True, result=True)
    p.add_argument("--classifier", choices=("knn", "rf", "majority", "all"),
                   default="knn")
    p.add_argument("--folds", type=int, help="override folds")
    p.add_argument("--leak-safe", action="store_true",
                   help="re-screen inside each fold instead of reusing the stored selection")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="accuracy as a function of screened feature count")
    common(p, data=True, out=True)
    p.add_argument("--screener", choices=("rfms", "kbest", "pca", "random"),
                   default="rfms")
    p.add_argument("--classifier", choices=("knn", "rf", "majority", "all"),
                   default="knn")
    p.add_argument("--folds", type=int, help="override folds")
    p.add_argument("--leak-safe", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="canary audit of a screening result")
    p.add_argument("--result", help="screening result JSON")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
