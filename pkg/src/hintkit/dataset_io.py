"""Canonical JSON serialization, compressed archives, and validation.

The JSON schema is the single source of truth for stored datasets.  Export
is byte-deterministic: schema keys appear in a fixed documented order,
instance keys are sorted, metric names are sorted, and metadata/detail maps
are emitted with sorted keys.  Import is strict: unknown keys are rejected
everywhere except inside metadata maps and metric detail payloads.

Archives are the same JSON, gzip-compressed and prefixed with the 8-byte
magic ``HINTDS01``.
"""

from __future__ import annotations

import gzip
import json
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import (
    BadMagic,
    CorruptArchive,
    MalformedJson,
    MetricRangeError,
    SchemaViolation,
    ValidationFailed,
)
from .model import (
    Answer,
    Dataset,
    Entity,
    EntityLabel,
    Hint,
    Instance,
    MetricResult,
    QTypeMajor,
    Question,
    QuestionType,
    Subset,
    check_metric_range,
)

ARCHIVE_MAGIC = b"HINTDS01"


@dataclass
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


# --- validation -------------------------------------------------------------

def _check_entities(text: str, entities: list[Entity], path: str, out: list[Violation]) -> None:
    for i, ent in enumerate(entities):
        epath = f"{path}/entities/{i}"
        if not isinstance(ent.label, EntityLabel):
            out.append(Violation(epath, f"unknown entity label {ent.label!r}"))
        if not (0 <= ent.start_index < ent.end_index <= len(text)):
            out.append(Violation(epath, f"offsets {ent.start_index}:{ent.end_index} out of range for text of length {len(text)}"))
        elif text[ent.start_index:ent.end_index] != ent.text:
            out.append(Violation(epath, "entity text does not equal the sliced span"))


def _check_metrics(metrics: dict[str, MetricResult], path: str, out: list[Violation]) -> None:
    for name, result in metrics.items():
        mpath = f"{path}/metrics/{name}"
        if not name:
            out.append(Violation(f"{path}/metrics", "empty metric name"))
            continue
        if name != result.name:
            out.append(Violation(mpath, f"metrics map key differs from result name {result.name!r}"))
        if isinstance(result.value, bool) or not isinstance(result.value, (int, float)):
            out.append(Violation(mpath, f"non-numeric value {result.value!r}"))
            continue
        try:
            check_metric_range(name, float(result.value))
        except MetricRangeError as exc:
            out.append(Violation(mpath, str(exc)))


def _check_scorable(obj: Question | Answer | Hint, path: str, out: list[Violation]) -> None:
    if not obj.text:
        out.append(Violation(f"{path}/text", "empty text"))
    _check_entities(obj.text, obj.entities, path, out)
    _check_metrics(obj.metrics, path, out)


def validate_dataset(dataset: Dataset) -> list[Violation]:
    """Check every model invariant; an empty list means the dataset is valid."""
    out: list[Violation] = []
    if not dataset.version:
        out.append(Violation("/version", "empty version"))
    for sname, subset in dataset.subsets.items():
        spath = f"/subsets/{sname}"
        if not sname:
            out.append(Violation("/subsets", "empty subset name"))
        if subset.name != sname:
            out.append(Violation(spath, f"subset name {subset.name!r} differs from its key"))
        for q_id, inst in subset.instances.items():
            if not q_id:
                out.append(Violation(f"{spath}/instances", "empty q_id"))
            ipath = f"{spath}/instances/{q_id}"
            _check_scorable(inst.question, f"{ipath}/question", out)
            if inst.question.question_type is not None and not isinstance(
                inst.question.question_type.major, QTypeMajor
            ):
                out.append(Violation(f"{ipath}/question/question_type/major",
                                     f"unknown major type {inst.question.question_type.major!r}"))
            for i, ans in enumerate(inst.answers):
                _check_scorable(ans, f"{ipath}/answers/{i}", out)
            for i, hint in enumerate(inst.hints):
                _check_scorable(hint, f"{ipath}/hints/{i}", out)
    return out


# --- export -----------------------------------------------------------------

def _canon(value: Any) -> Any:
    """Recursively sort map keys inside free-form JSON values."""
    if isinstance(value, dict):
        return {k: _canon(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    return value


def _entity_doc(ent: Entity) -> dict[str, Any]:
    return {
        "text": ent.text,
        "label": ent.label.value,
        "start_index": ent.start_index,
        "end_index": ent.end_index,
    }


def _metrics_doc(metrics: dict[str, MetricResult]) -> dict[str, Any]:
    return {
        name: {"value": metrics[name].value, "detail": _canon(metrics[name].detail)}
        for name in sorted(metrics)
    }


def _question_doc(q: Question) -> dict[str, Any]:
    qtype = None
    if q.question_type is not None:
        qtype = {"major": q.question_type.major.value, "minor": q.question_type.minor}
    return {
        "text": q.text,
        "question_type": qtype,
        "entities": [_entity_doc(e) for e in q.entities],
        "metrics": _metrics_doc(q.metrics),
        "metadata": _canon(q.metadata),
    }


def _answer_doc(a: Answer) -> dict[str, Any]:
    return {
        "text": a.text,
        "entities": [_entity_doc(e) for e in a.entities],
        "metrics": _metrics_doc(a.metrics),
        "metadata": _canon(a.metadata),
    }


def _hint_doc(h: Hint) -> dict[str, Any]:
    return {
        "text": h.text,
        "source": h.source,
        "entities": [_entity_doc(e) for e in h.entities],
        "metrics": _metrics_doc(h.metrics),
        "metadata": _canon(h.metadata),
    }


def _instance_doc(inst: Instance) -> dict[str, Any]:
    return {
        "question": _question_doc(inst.question),
        "answers": [_answer_doc(a) for a in inst.answers],
        "hints": [_hint_doc(h) for h in inst.hints],
        "metadata": _canon(inst.metadata),
    }


def export_json(dataset: Dataset) -> str:
    """Serialize to canonical JSON text; the dataset must be valid."""
    violations = validate_dataset(dataset)
    if violations:
        first = violations[0]
        raise ValidationFailed(first.path, f"{first.message} ({len(violations)} violation(s) total)")
    doc = {
        "name": dataset.name,
        "version": dataset.version,
        "url": dataset.url,
        "description": dataset.description,
        "metadata": _canon(dataset.metadata),
        "subsets": {
            sname: {
                "name": subset.name,
                "metadata": _canon(subset.metadata),
                "instances": {
                    q_id: _instance_doc(subset.instances[q_id])
                    for q_id in sorted(subset.instances)
                },
            }
            for sname, subset in dataset.subsets.items()
        },
    }
    try:
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    except TypeError as exc:
        raise ValidationFailed("/metadata", f"value not JSON-serializable: {exc}") from exc


# --- import -----------------------------------------------------------------

class _JsonObject:
    """JSON object kept as its raw key/value pairs so the strict parser can
    detect duplicate keys with an exact path."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: list[tuple[str, Any]]):
        self.pairs = pairs


def _fields(node: Any, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict[str, Any]:
    if not isinstance(node, _JsonObject):
        raise SchemaViolation(path or "/", "expected a JSON object")
    out: dict[str, Any] = {}
    for key, value in node.pairs:
        if key in out:
            raise ValidationFailed(path or "/", f"duplicate key {key!r}")
        if key not in required and key not in optional:
            raise SchemaViolation(f"{path}/{key}", "unknown key")
        out[key] = value
    for key in required:
        if key not in out:
            raise SchemaViolation(f"{path}/{key}", "missing required key")
    return out


def _map_items(node: Any, path: str, what: str) -> list[tuple[str, Any]]:
    if not isinstance(node, _JsonObject):
        raise SchemaViolation(path, "expected a JSON object")
    seen: set[str] = set()
    for key, _ in node.pairs:
        if key in seen:
            raise ValidationFailed(path, f"duplicate {what} {key!r}")
        seen.add(key)
    return node.pairs


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected string, got {type(value).__name__}")
    return value


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected integer, got {type(value).__name__}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaViolation(path, f"expected array, got {type(value).__name__}")
    return value


def _plain(value: Any, path: str) -> Any:
    """Convert a free-form JSON value (metadata, metric detail) to plain
    dict/list data, still rejecting duplicate keys."""
    if isinstance(value, _JsonObject):
        out = {}
        for key, sub in value.pairs:
            if key in out:
                raise ValidationFailed(path, f"duplicate key {key!r}")
            out[key] = _plain(sub, f"{path}/{key}")
        return out
    if isinstance(value, list):
        return [_plain(v, f"{path}/{i}") for i, v in enumerate(value)]
    return value


def _parse_entity(node: Any, path: str) -> Entity:
    f = _fields(node, path, ("text", "label", "start_index", "end_index"))
    label_str = _str(f["label"], f"{path}/label")
    try:
        label = EntityLabel(label_str)
    except ValueError:
        raise SchemaViolation(f"{path}/label", f"unknown entity label {label_str!r}") from None
    return Entity(
        text=_str(f["text"], f"{path}/text"),
        label=label,
        start_index=_int(f["start_index"], f"{path}/start_index"),
        end_index=_int(f["end_index"], f"{path}/end_index"),
    )


def _parse_metrics(node: Any, path: str) -> dict[str, MetricResult]:
    out: dict[str, MetricResult] = {}
    for name, value in _map_items(node, path, "metric name"):
        mpath = f"{path}/{name}"
        f = _fields(value, mpath, ("value",), ("detail",))
        out[name] = MetricResult(
            name=name,
            value=_number(f["value"], f"{mpath}/value"),
            detail=_plain(f.get("detail"), f"{mpath}/detail"),
        )
    return out


def _parse_question(node: Any, path: str) -> Question:
    f = _fields(node, path, ("text", "question_type", "entities", "metrics", "metadata"))
    qtype = None
    if f["question_type"] is not None:
        tf = _fields(f["question_type"], f"{path}/question_type", ("major", "minor"))
        major_str = _str(tf["major"], f"{path}/question_type/major")
        try:
            major = QTypeMajor(major_str)
        except ValueError:
            raise SchemaViolation(f"{path}/question_type/major", f"unknown major type {major_str!r}") from None
        qtype = QuestionType(major=major, minor=_str(tf["minor"], f"{path}/question_type/minor"))
    return Question(
        text=_str(f["text"], f"{path}/text"),
        question_type=qtype,
        entities=[_parse_entity(e, f"{path}/entities/{i}") for i, e in enumerate(_list(f["entities"], f"{path}/entities"))],
        metrics=_parse_metrics(f["metrics"], f"{path}/metrics"),
        metadata=_plain(f["metadata"], f"{path}/metadata"),
    )


def _parse_answer(node: Any, path: str) -> Answer:
    f = _fields(node, path, ("text", "entities", "metrics", "metadata"))
    return Answer(
        text=_str(f["text"], f"{path}/text"),
        entities=[_parse_entity(e, f"{path}/entities/{i}") for i, e in enumerate(_list(f["entities"], f"{path}/entities"))],
        metrics=_parse_metrics(f["metrics"], f"{path}/metrics"),
        metadata=_plain(f["metadata"], f"{path}/metadata"),
    )


def _parse_hint(node: Any, path: str) -> Hint:
    f = _fields(node, path, ("text", "source", "entities", "metrics", "metadata"))
    return Hint(
        text=_str(f["text"], f"{path}/text"),
        source=_str(f["source"], f"{path}/source"),
        entities=[_parse_entity(e, f"{path}/entities/{i}") for i, e in enumerate(_list(f["entities"], f"{path}/entities"))],
        metrics=_parse_metrics(f["metrics"], f"{path}/metrics"),
        metadata=_plain(f["metadata"], f"{path}/metadata"),
    )


def _parse_instance(node: Any, path: str) -> Instance:
    f = _fields(node, path, ("question", "answers", "hints", "metadata"))
    return Instance(
        question=_parse_question(f["question"], f"{path}/question"),
        answers=[_parse_answer(a, f"{path}/answers/{i}") for i, a in enumerate(_list(f["answers"], f"{path}/answers"))],
        hints=[_parse_hint(h, f"{path}/hints/{i}") for i, h in enumerate(_list(f["hints"], f"{path}/hints"))],
        metadata=_plain(f["metadata"], f"{path}/metadata"),
    )


def _parse_subset(node: Any, path: str) -> Subset:
    f = _fields(node, path, ("name", "metadata", "instances"))
    instances = {}
    for q_id, inst in _map_items(f["instances"], f"{path}/instances", "q_id"):
        instances[q_id] = _parse_instance(inst, f"{path}/instances/{q_id}")
    return Subset(
        name=_str(f["name"], f"{path}/name"),
        instances=instances,
        metadata=_plain(f["metadata"], f"{path}/metadata"),
    )


def parse_json(text: str | bytes) -> Dataset:
    """Strict structural parse without the final invariant validation.

    Raises :class:`MalformedJson` for non-JSON input and
    :class:`SchemaViolation`/:class:`ValidationFailed` (with paths) for
    structural problems such as unknown keys or duplicate q_ids.
    """
    try:
        root = json.loads(text, object_pairs_hook=_JsonObject)
    except json.JSONDecodeError as exc:
        raise MalformedJson(str(exc)) from exc
    f = _fields(root, "", ("name", "version", "url", "description", "metadata", "subsets"))
    subsets = {}
    for sname, snode in _map_items(f["subsets"], "/subsets", "subset name"):
        subsets[sname] = _parse_subset(snode, f"/subsets/{sname}")
    return Dataset(
        name=_str(f["name"], "/name"),
        version=_str(f["version"], "/version"),
        url=_str(f["url"], "/url"),
        description=_str(f["description"], "/description"),
        subsets=subsets,
        metadata=_plain(f["metadata"], "/metadata"),
    )


def import_json(text: str | bytes) -> Dataset:
    """Parse canonical JSON into a validated :class:`Dataset`.

    Raises :class:`MalformedJson` for non-JSON input, :class:`SchemaViolation`
    for structural problems, and :class:`ValidationFailed` for invariant
    breaches; the latter two carry the path of the offending field.
    """
    dataset = parse_json(text)
    violations = validate_dataset(dataset)
    if violations:
        first = violations[0]
        raise ValidationFailed(first.path, first.message)
    return dataset


# --- archive ----------------------------------------------------------------

def export_archive(dataset: Dataset) -> bytes:
    """Magic prefix plus gzip of the canonical JSON; byte-deterministic."""
    payload = export_json(dataset).encode("utf-8")
    return ARCHIVE_MAGIC + gzip.compress(payload, compresslevel=9, mtime=0)


def import_archive(data: bytes) -> Dataset:
    if len(data) < len(ARCHIVE_MAGIC) or data[: len(ARCHIVE_MAGIC)] != ARCHIVE_MAGIC:
        raise BadMagic("not a hint dataset archive")
    try:
        text = gzip.decompress(data[len(ARCHIVE_MAGIC):]).decode("utf-8")
    except (OSError, EOFError, zlib.error) as exc:
        raise CorruptArchive(str(exc)) from exc
    return import_json(text)


# --- file helpers -------------------------------------------------------------

def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset file; ``.json`` is parsed as text, anything else as an
    archive."""
    path = Path(path)
    if path.suffix == ".json":
        return import_json(path.read_text(encoding="utf-8"))
    return import_archive(path.read_bytes())


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(export_json(dataset), encoding="utf-8")
    else:
        path.write_bytes(export_archive(dataset))
