"""JSON and CSV emission for screening results and evaluation reports.

Documents carry ``schema_version`` 1.  Feature ids are reported 1-based;
internal arrays are 0-based.  Apart from the ``timing`` block, a document
is byte-stable for identical inputs (keys are sorted, floats use repr).
"""

from __future__ import annotations

import io
import json

import numpy as np

from .baselines import PcaModel
from .evaluate import EvaluationReport, ReportEntry, SweepRow
from .rfms import ScreeningResult

SCHEMA_VERSION = 1


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dumps(document: dict) -> str:
    return json.dumps(_plain(document), sort_keys=True, indent=2) + "\n"


def write_json(document: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(document))


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _selected_block(ids, names, canary_ids) -> list[dict]:
    canaries = set(canary_ids)
    return [
        {"id": i + 1, "name": names[i], "is_canary": i in canaries}
        for i in ids
    ]


def screening_document(result: ScreeningResult) -> dict:
    """Full multiround screening result, rounds and permutation included."""
    cfg = result.config
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "screening_result",
        "screener": {
            "name": "rfms",
            "step_size": cfg.step_size,
            "reduced_size": cfg.reduced_size,
            "n_trees": cfg.forest.n_trees,
            "n_subfeatures": cfg.forest.n_subfeatures,
            "min_samples_leaf": cfg.forest.min_samples_leaf,
            "min_purity_increase": cfg.forest.min_purity_increase,
            "partial_sampling": cfg.forest.partial_sampling,
            "n_canaries": cfg.n_canaries,
            "random_state": cfg.seed,
        },
        "dataset": {
            "n_samples": result.n_samples,
            "n_features": result.n_features_input,
            "n_classes": result.n_classes,
        },
        "transforming": False,
        "selected": _selected_block(result.selected.indices, result.feature_names,
                                    result.canary_ids),
        "rounds": [
            {
                "round": r.round_index,
                "chunk_ids": [i + 1 for i in r.chunk_ids],
                "carried_ids": [i + 1 for i in r.carried_ids],
                "pool_ids": [i + 1 for i in r.pool_ids],
                "importance": list(r.importance),
                "selected_ids": [i + 1 for i in r.selected_ids],
            }
            for r in result.rounds
        ],
        "permutation": [i + 1 for i in result.permutation],
        "timing": {"wall_s": result.wall_time_s, "cpu_s": result.cpu_time_s},
    }
    if result.canary_ids:
        doc["canaries"] = {
            "ids": [i + 1 for i in result.canary_ids],
            "leak_count": result.leak_count,
            "leaked_ids": [i + 1 for i in result.leaked_ids],
        }
    return doc


def subset_document(screener: dict, selected_ids, feature_names, dataset_meta: dict,
                    canary_ids=(), leaked_ids=(), wall_s: float = 0.0,
                    cpu_s: float = 0.0) -> dict:
    """Envelope for subset screeners (kbest, random) in the shared schema."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "screening_result",
        "screener": screener,
        "dataset": dataset_meta,
        "transforming": False,
        "selected": _selected_block(selected_ids, feature_names, canary_ids),
        "timing": {"wall_s": wall_s, "cpu_s": cpu_s},
    }
    if canary_ids:
        doc["canaries"] = {
            "ids": [i + 1 for i in canary_ids],
            "leak_count": len(leaked_ids),
            "leaked_ids": [i + 1 for i in leaked_ids],
        }
    return doc


def pca_document(screener: dict, model: PcaModel, dataset_meta: dict,
                 wall_s: float = 0.0, cpu_s: float = 0.0) -> dict:
    """Envelope for the transforming screener; the model rides along."""
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "screening_result",
        "screener": screener,
        "dataset": dataset_meta,
        "transforming": True,
        "selected": [
            {"id": i + 1, "name": f"pc{i + 1}", "is_canary": False}
            for i in range(model.n_components)
        ],
        "model": {
            "mean": model.mean,
            "components": [model.components[:, c] for c in range(model.n_components)],
            "eigenvalues": model.eigenvalues,
        },
        "timing": {"wall_s": wall_s, "cpu_s": cpu_s},
    }


def pca_model_from_document(doc: dict) -> PcaModel:
    model = doc["model"]
    components = np.array(model["components"], dtype=np.float64).T
    return PcaModel(
        mean=np.array(model["mean"], dtype=np.float64),
        components=components,
        eigenvalues=np.array(model["eigenvalues"], dtype=np.float64),
    )


def _entry_block(entry: ReportEntry) -> dict:
    return {
        "screener": entry.screener_id,
        "classifier": entry.classifier_id,
        "n_features_out": entry.n_features_out,
        "mean_accuracy": entry.mean_accuracy,
        "fold_accuracies": list(entry.fold_accuracies),
        "screening_cpu_s": entry.screening_cpu_s,
        "fitting_cpu_s": entry.fitting_cpu_s,
    }


def report_document(report: EvaluationReport, folds: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "evaluation_report",
        "folds": folds,
        "entries": [_entry_block(e) for e in report.entries],
        "best": _entry_block(report.best),
    }


def report_csv(report: EvaluationReport) -> str:
    out = io.StringIO()
    out.write("screener,classifier,n_features_out,mean_accuracy,screening_cpu_s,fitting_cpu_s\n")
    for e in report.entries:
        out.write(f"{e.screener_id},{e.classifier_id},{e.n_features_out},"
                  f"{e.mean_accuracy!r},{e.screening_cpu_s!r},{e.fitting_cpu_s!r}\n")
    return out.getvalue()


def sweep_document(rows: list[SweepRow], screener_label: str, folds: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "convergence_sweep",
        "screener": screener_label,
        "folds": folds,
        "rows": [
            {
                "n_features_out": r.n_features_out,
                "best_accuracy": r.best_accuracy,
                "best_classifier": r.best_classifier_id,
                "screening_cpu_s": r.screening_cpu_s,
                "fitting_cpu_s": r.fitting_cpu_s,
            }
            for r in rows
        ],
    }


def sweep_csv(rows: list[SweepRow]) -> str:
    out = io.StringIO()
    out.write("n_features_out,best_accuracy,best_classifier,screening_cpu_s,fitting_cpu_s\n")
    for r in rows:
        out.write(f"{r.n_features_out},{r.best_accuracy!r},{r.best_classifier_id},"
                  f"{r.screening_cpu_s!r},{r.fitting_cpu_s!r}\n")
    return out.getvalue()
