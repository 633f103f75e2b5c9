"""Versioned JSON envelope shared by both model kinds."""

from __future__ import annotations

import json
from pathlib import Path

from .table import DecisionTableModel
from .tree import DecisionTreeModel

FORMAT = "dfp-model"
VERSION = 1
KINDS = {"j48": DecisionTreeModel, "dtable": DecisionTableModel}


class ModelFormatError(ValueError):
    pass


def model_to_json(model) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "classes": list(model.classes),
        "features": list(model.features),
        "schema_fingerprint": model.schema_fingerprint,
        "metadata": model.metadata,
        "model": model.to_dict(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def model_from_json(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"malformed model document at line {exc.lineno} column {exc.colno} "
            f"(position {exc.pos}): {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("not a dfp model document")
    if doc.get("version") != VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r} (expected {VERSION})")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    try:
        return KINDS[kind].from_dict(doc["model"], doc["classes"], doc["features"],
                                     doc["schema_fingerprint"], doc.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid {kind} model: {exc}") from None


def save_model(model, sink) -> None:
    text = model_to_json(model)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text)
    elif hasattr(sink, "encoding"):
        sink.write(text)
    else:
        sink.write(text.encode())


def load_model(source):
    if isinstance(source, (str, Path)):
        return model_from_json(Path(source).read_text())
    data = source.read()
    return model_from_json(data.decode() if isinstance(data, bytes) else data)
