"""Versioned JSON artifacts exchanged between pipeline stages."""

from __future__ import annotations

import json
from pathlib import Path

from .features import FeatureSet, FeatureVector
from .harness import CostedLabel, Label, RuntimeMatrix
from .learners import TwoLevelSelector

FORMAT_VERSION = 1


class SchemaError(ValueError):
    pass


def dump_artifact(path, kind: str, payload: dict, config: dict | None = None) -> None:
    doc = {"format_version": FORMAT_VERSION, "kind": kind, "config": config or {}}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_artifact(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise SchemaError(f"{path}: missing format_version header")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(
            f"{path}: format version {doc['format_version']} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    if doc.get("kind") != kind:
        raise SchemaError(f"{path}: expected a {kind!r} file, found {doc.get('kind')!r}")
    return doc


# -- features ----------------------------------------------------------------


def save_features(path, vectors, config=None, include_time=True) -> None:
    fs = {v.feature_set for v in vectors}
    if len(fs) > 1:
        raise ValueError("mixed feature sets in one file")
    feature_set = fs.pop() if fs else FeatureSet.FULL
    dump_artifact(
        path,
        "features",
        {
            "feature_set": feature_set.value,
            "feature_names": list(feature_set.names),
            "records": [v.to_record(include_time) for v in vectors],
        },
        config,
    )


def load_features(path) -> dict[str, FeatureVector]:
    doc = load_artifact(path, "features")
    try:
        vectors = [FeatureVector.from_record(r) for r in doc["records"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed feature record ({exc})") from None
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return {v.instance: v for v in vectors}


def features_csv(vectors) -> str:
    import csv
    import io

    vectors = list(vectors)
    names = vectors[0].names if vectors else FeatureSet.FULL.names
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", *names])
    for v in vectors:
        w.writerow(v.csv_row())
    return buf.getvalue()


# -- runtime matrix ------------------------------------------------------------


def save_matrix(path, matrix: RuntimeMatrix, config=None) -> None:
    dump_artifact(
        path,
        "runtime-matrix",
        {"metadata": matrix.metadata(), "cells": matrix.to_records()},
        config,
    )


def load_matrix(path) -> RuntimeMatrix:
    doc = load_artifact(path, "runtime-matrix")
    try:
        return RuntimeMatrix.from_records(doc["cells"], doc["metadata"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed runtime matrix ({exc})") from None


# -- labels --------------------------------------------------------------------


def save_labels(path, labels, config=None) -> None:
    dump_artifact(
        path,
        "labels",
        {"labels": {c.instance: {"label": c.label.code, "cost": c.cost} for c in labels}},
        config,
    )


def load_labels(path) -> dict[str, CostedLabel]:
    doc = load_artifact(path, "labels")
    try:
        return {
            name: CostedLabel(name, Label.from_code(rec["label"]), float(rec["cost"]))
            for name, rec in doc["labels"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed labels ({exc})") from None


# -- model ---------------------------------------------------------------------


def save_model(path, model: TwoLevelSelector, config=None) -> None:
    dump_artifact(path, "ensemble", {"model": model.to_dict()}, config)


def load_model(path) -> TwoLevelSelector:
    doc = load_artifact(path, "ensemble")
    try:
        return TwoLevelSelector.from_dict(doc["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed model ({exc})") from None
