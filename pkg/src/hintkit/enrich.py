"""Question-type classification and named-entity extraction.

Both enrichers are pluggable: the built-ins are rule-based and fully
offline, and entity extraction can delegate to a remote NER endpoint for
fine-grained labels (the heuristic only emits OTHER and DATE).
"""

from __future__ import annotations

import re
from typing import Callable

from .errors import ProviderError
from .model import Entity, EntityLabel, QTypeMajor, Question, QuestionType
from .textstats import STOPWORDS, token_spans, tokenize

_YEAR_RE = re.compile(r"\d{4}")

# Head nouns refining "what"/"which" questions, checked in token order.
_WH_HEAD_RULES: list[tuple[frozenset[str], QTypeMajor, str]] = [
    (frozenset({"person"}), QTypeMajor.HUM, "HUM:ind"),
    (frozenset({"place", "city", "country"}), QTypeMajor.LOC, "LOC:other"),
    (frozenset({"year", "date"}), QTypeMajor.NUM, "NUM:date"),
    (frozenset({"abbreviation"}), QTypeMajor.ABBR, "ABBR:exp"),
    (frozenset({"mean", "means", "definition"}), QTypeMajor.DESC, "DESC:def"),
]


def classify_text(text: str) -> QuestionType:
    """Rule-based question typing over the raw question text.

    Non-wh questions (yes/no, imperatives, ...) fall back to DESC/"unknown";
    "what"/"which" questions without a recognized head noun fall back to
    ENTY/"unknown".
    """
    tokens = tokenize(text)
    for i, tok in enumerate(tokens):
        if tok in ("who", "whom"):
            return QuestionType(QTypeMajor.HUM, "HUM:ind")
        if tok == "where":
            return QuestionType(QTypeMajor.LOC, "LOC:other")
        if tok == "when":
            return QuestionType(QTypeMajor.NUM, "NUM:date")
        if tok == "how" and i + 1 < len(tokens) and tokens[i + 1] in ("many", "much"):
            return QuestionType(QTypeMajor.NUM, "NUM:count")
        if tok in ("what", "which"):
            for rest in tokens[i + 1:]:
                for heads, major, minor in _WH_HEAD_RULES:
                    if rest in heads:
                        return QuestionType(major, minor)
            return QuestionType(QTypeMajor.ENTY, "unknown")
    return QuestionType(QTypeMajor.DESC, "unknown")


def classify_question_type(question: Question | str) -> QuestionType:
    """Classify and, when given a :class:`Question`, assign the result."""
    if isinstance(question, str):
        return classify_text(question)
    qtype = classify_text(question.text)
    question.question_type = qtype
    return qtype


def _sentence_initial_positions(text: str) -> set[int]:
    """Character offsets at which a new sentence starts."""
    positions = set()
    expecting_start = True
    for i, ch in enumerate(text):
        if ch.isspace():
            continue
        if expecting_start:
            positions.add(i)
            expecting_start = False
        if ch in ".!?":
            expecting_start = True
    return positions


def heuristic_entities(text: str) -> list[Entity]:
    """Capitalized-run entities (OTHER) plus 4-digit years (DATE).

    A run is a maximal sequence of capitalized tokens separated only by
    whitespace.  A single-token run at a sentence start whose lowercase form
    is a stopword is discarded ("He was ..." yields nothing for "He").
    """
    spans = token_spans(text)
    starts = _sentence_initial_positions(text)
    entities: list[Entity] = []

    run: list[tuple[int, int, str]] = []

    def flush() -> None:
        if not run:
            return
        start, end = run[0][0], run[-1][1]
        if len(run) == 1 and start in starts and run[0][2].lower() in STOPWORDS:
            run.clear()
            return
        entities.append(Entity(text=text[start:end], label=EntityLabel.OTHER,
                               start_index=start, end_index=end))
        run.clear()

    for start, end, tok in spans:
        capitalized = tok[0].isupper()
        adjacent = bool(run) and text[run[-1][1]:start].isspace()
        if capitalized and (not run or adjacent):
            run.append((start, end, tok))
        else:
            flush()
            if capitalized:
                run.append((start, end, tok))
    flush()

    for start, end, tok in spans:
        if _YEAR_RE.fullmatch(tok):
            entities.append(Entity(text=tok, label=EntityLabel.DATE,
                                   start_index=start, end_index=end))

    entities.sort(key=lambda e: (e.start_index, e.end_index))
    return entities


# A provider is anything mapping text -> entities (e.g. the builtin
# heuristic or a RemoteNerClient.extract bound method).
EntityProvider = Callable[[str], "list[Entity]"]


def extract_entities(text: str, provider: EntityProvider | str = "builtin") -> list[Entity]:
    """Extract entities with the builtin heuristic or a remote provider.

    Every returned entity is checked against the offset invariants; a remote
    provider violating them raises :class:`ProviderError`.
    """
    if provider == "builtin":
        return heuristic_entities(text)
    if isinstance(provider, str):
        raise ValueError(f"unknown entity provider {provider!r}")
    entities = provider(text)
    for ent in entities:
        if not (0 <= ent.start_index < ent.end_index <= len(text)):
            raise ProviderError(f"entity offsets {ent.start_index}:{ent.end_index} out of range")
        if text[ent.start_index:ent.end_index] != ent.text:
            raise ProviderError(f"entity text {ent.text!r} does not match its span")
    return entities
