"""In-memory domain model: datasets of questions, answers, and hints.

A :class:`Dataset` holds named subsets; each subset maps a ``q_id`` to an
:class:`Instance` made of one question, its answers, and a list of hints.
Questions, answers, and hints all carry named entities, a metric-result map,
and a free-form metadata map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import MetricRangeError, UnknownInstance, UnknownSubset


class EntityLabel(str, Enum):
    PERSON = "PERSON"
    NORP = "NORP"
    FAC = "FAC"
    ORG = "ORG"
    GPE = "GPE"
    LOC = "LOC"
    PRODUCT = "PRODUCT"
    EVENT = "EVENT"
    WORK_OF_ART = "WORK_OF_ART"
    LAW = "LAW"
    LANGUAGE = "LANGUAGE"
    DATE = "DATE"
    TIME = "TIME"
    PERCENT = "PERCENT"
    MONEY = "MONEY"
    QUANTITY = "QUANTITY"
    ORDINAL = "ORDINAL"
    CARDINAL = "CARDINAL"
    OTHER = "OTHER"


class QTypeMajor(str, Enum):
    """Coarse question classes from the TREC question-typing scheme."""

    ABBR = "ABBR"
    DESC = "DESC"
    ENTY = "ENTY"
    HUM = "HUM"
    LOC = "LOC"
    NUM = "NUM"


@dataclass
class QuestionType:
    major: QTypeMajor
    minor: str


@dataclass
class Entity:
    """A typed span of the parent text; offsets are character-based,
    start inclusive, end exclusive."""

    text: str
    label: EntityLabel
    start_index: int
    end_index: int


@dataclass
class MetricResult:
    """A named score, e.g. ``relevance/rouge/rougeL`` -> 0.42.

    ``detail`` holds optional per-method diagnostics as JSON-compatible data
    (raw formula values, flags, per-candidate decisions, ...).
    """

    name: str
    value: float
    detail: Any | None = None


# Score families with a fixed range, keyed by the leading name segment.
# Values for unknown families are accepted unchecked.
_UNIT_RANGE_FAMILIES = frozenset({"relevance", "convergence", "familiarity", "answerleakage"})
_LEVEL_VALUES = (0.0, 1.0, 2.0)


def check_metric_range(name: str, value: float) -> None:
    """Raise :class:`MetricRangeError` if ``value`` is outside the declared
    range for the metric family named by the first segment of ``name``."""
    family = name.split("/", 1)[0]
    if family in _UNIT_RANGE_FAMILIES:
        if not 0.0 <= value <= 1.0:
            raise MetricRangeError(f"{name}: value {value} outside [0, 1]")
    elif family == "readability":
        if float(value) not in _LEVEL_VALUES:
            raise MetricRangeError(f"{name}: level {value} not in {{0, 1, 2}}")


class _Scorable:
    """Shared metric-attachment behaviour for questions, answers, and hints."""

    metrics: dict[str, MetricResult]

    def attach_metric(self, result: MetricResult) -> None:
        """Store ``result`` under its name; re-attaching overwrites."""
        if not result.name:
            raise ValueError("metric result must have a non-empty name")
        check_metric_range(result.name, result.value)
        self.metrics[result.name] = result


@dataclass
class Question(_Scorable):
    text: str
    question_type: QuestionType | None = None
    entities: list[Entity] = field(default_factory=list)
    metrics: dict[str, MetricResult] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class Answer(_Scorable):
    text: str
    entities: list[Entity] = field(default_factory=list)
    metrics: dict[str, MetricResult] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class Hint(_Scorable):
    """``source`` is a provenance label, e.g. ``model:llama-3.1-8b/answer-aware``
    or ``human``."""

    text: str
    source: str = ""
    entities: list[Entity] = field(default_factory=list)
    metrics: dict[str, MetricResult] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class Instance:
    """One question with its answers and hints.

    ``answers`` may be empty for answer-agnostic workflows; operations that
    need gold answers validate at call time.  Hint order is meaningful and is
    preserved through serialization.
    """

    question: Question
    answers: list[Answer] = field(default_factory=list)
    hints: list[Hint] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class Subset:
    name: str
    instances: dict[str, Instance] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class Dataset:
    name: str
    version: str
    url: str = ""
    description: str = ""
    subsets: dict[str, Subset] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_subset(self, subset: Subset) -> Subset:
        self.subsets[subset.name] = subset
        return subset

    def get_instance(self, subset: str, q_id: str) -> Instance:
        try:
            sub = self.subsets[subset]
        except KeyError:
            raise UnknownSubset(subset) from None
        try:
            return sub.instances[q_id]
        except KeyError:
            raise UnknownInstance(q_id) from None

    def all_instances(self):
        """Yield ``(subset_name, q_id, instance)`` triples in storage order."""
        for name, sub in self.subsets.items():
            for q_id, inst in sub.instances.items():
                yield name, q_id, inst

    def num_hints(self) -> int:
        return sum(len(inst.hints) for _, _, inst in self.all_instances())

    def num_questions(self) -> int:
        return sum(len(sub.instances) for sub in self.subsets.values())


def attach_metric(target: Question | Answer | Hint, result: MetricResult) -> None:
    """Module-level alias for :meth:`_Scorable.attach_metric`."""
    target.attach_metric(result)


def get_instance(dataset: Dataset, subset: str, q_id: str) -> Instance:
    return dataset.get_instance(subset, q_id)
