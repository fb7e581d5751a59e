"""Readability: difficulty level 0 (Beginner), 1 (Intermediate), 2 (Advanced).

Three methods: classic formulas over the shared text statistics, a loadable
linear scorer over a fixed feature set (stand-in for externally trained
models), and an LLM judge returning one of the three level labels.

Formula outputs live on different scales, so the raw value is kept in the
result detail and only the banded level is the metric value.  Default bands
(configurable): Flesch reading ease >=70 -> 0, 50-70 -> 1, <50 -> 2; the
grade-style formulas <=8 -> 0, 8-12 -> 1, >12 -> 2.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from ..clients import ChatClient, ChatMessage, ChatRequest
from ..errors import EmptyText, UnknownFeature, UnparseableCompletion
from ..model import MetricResult
from ..textstats import TextStats, analyze_text, is_stopword

TRADITIONAL_FORMULAS = ("flesch", "gunning_fog", "coleman_liau", "smog", "ari")

FLESCH_BANDS = (70.0, 50.0)
GRADE_BANDS = (8.0, 12.0)

READABILITY_LLM_MAX_TOKENS = 16

_LEVEL_WORDS = {"beginner": 0, "intermediate": 1, "advanced": 2}
_LEVEL_WORD_RE = re.compile(r"\b(beginner|intermediate|advanced)\b")

_READABILITY_PROMPT = (
    "Rate the reading difficulty of the following text. Reply with exactly "
    "one word: Beginner, Intermediate, or Advanced.\n\nText: {text}"
)


def flesch_reading_ease(stats: TextStats) -> float:
    return 206.835 - 1.015 * (stats.words / stats.sentences) - 84.6 * (stats.syllables / stats.words)


def gunning_fog(stats: TextStats) -> float:
    return 0.4 * (stats.words / stats.sentences + 100.0 * stats.complex_words / stats.words)


def coleman_liau(stats: TextStats) -> float:
    letters_per_100 = 100.0 * stats.letters / stats.words
    sentences_per_100 = 100.0 * stats.sentences / stats.words
    return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8


def smog(stats: TextStats) -> float:
    return 1.0430 * math.sqrt(stats.complex_words * 30.0 / stats.sentences) + 3.1291


def ari(stats: TextStats) -> float:
    return 4.71 * (stats.letters / stats.words) + 0.5 * (stats.words / stats.sentences) - 21.43


_FORMULAS = {
    "flesch": flesch_reading_ease,
    "gunning_fog": gunning_fog,
    "coleman_liau": coleman_liau,
    "smog": smog,
    "ari": ari,
}


def band_flesch(raw: float, bands: tuple[float, float] = FLESCH_BANDS) -> int:
    if raw >= bands[0]:
        return 0
    if raw >= bands[1]:
        return 1
    return 2


def band_grade(raw: float, bands: tuple[float, float] = GRADE_BANDS) -> int:
    if raw <= bands[0]:
        return 0
    if raw <= bands[1]:
        return 1
    return 2


def readability_traditional(text: str, formula: str = "flesch",
                            flesch_bands: tuple[float, float] = FLESCH_BANDS,
                            grade_bands: tuple[float, float] = GRADE_BANDS) -> MetricResult:
    """Level from one of the classic formulas; the raw value goes to detail."""
    if formula not in _FORMULAS:
        raise ValueError(f"unknown readability formula {formula!r}")
    stats = analyze_text(text)
    if stats.words == 0 or stats.sentences == 0:
        raise EmptyText("readability needs non-empty text")
    raw = _FORMULAS[formula](stats)
    if formula == "flesch":
        level = band_flesch(raw, flesch_bands)
    else:
        level = band_grade(raw, grade_bands)
    return MetricResult(name=f"readability/traditional/{formula}",
                        value=float(level), detail={"raw": raw})


# --- loadable linear scorer ---------------------------------------------------

def _feature_words_per_sentence(stats: TextStats) -> float:
    return stats.words / stats.sentences


def _feature_syllables_per_word(stats: TextStats) -> float:
    return stats.syllables / stats.words


def _feature_complex_word_ratio(stats: TextStats) -> float:
    return stats.complex_words / stats.words


def _feature_letters_per_word(stats: TextStats) -> float:
    return stats.letters / stats.words


def _feature_type_token_ratio(stats: TextStats) -> float:
    return len(set(stats.tokens)) / stats.words


def _feature_stopword_ratio(stats: TextStats) -> float:
    return sum(1 for t in stats.tokens if is_stopword(t)) / stats.words


FEATURES = {
    "words_per_sentence": _feature_words_per_sentence,
    "syllables_per_word": _feature_syllables_per_word,
    "complex_word_ratio": _feature_complex_word_ratio,
    "letters_per_word": _feature_letters_per_word,
    "type_token_ratio": _feature_type_token_ratio,
    "stopword_ratio": _feature_stopword_ratio,
}


@dataclass
class LinearScorer:
    """Linear model over the fixed feature set with two level cutpoints."""

    feature_names: list[str]
    weights: list[float]
    bias: float
    class_thresholds: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.feature_names):
            raise ValueError("weights and feature_names must have the same length")
        for name in self.feature_names:
            if name not in FEATURES:
                raise UnknownFeature(name)

    def raw_score(self, stats: TextStats) -> float:
        return self.bias + sum(w * FEATURES[name](stats)
                               for name, w in zip(self.feature_names, self.weights))

    def level(self, raw: float) -> int:
        lo, hi = self.class_thresholds
        if raw < lo:
            return 0
        if raw < hi:
            return 1
        return 2


def load_linear_scorer(path: str | Path) -> LinearScorer:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return LinearScorer(
        feature_names=list(doc["feature_names"]),
        weights=[float(w) for w in doc["weights"]],
        bias=float(doc["bias"]),
        class_thresholds=(float(doc["class_thresholds"][0]), float(doc["class_thresholds"][1])),
    )


def readability_linear(text: str, scorer: LinearScorer) -> MetricResult:
    stats = analyze_text(text)
    if stats.words == 0 or stats.sentences == 0:
        raise EmptyText("readability needs non-empty text")
    raw = scorer.raw_score(stats)
    return MetricResult(name="readability/linear", value=float(scorer.level(raw)),
                        detail={"raw": raw})


# --- LLM judge ------------------------------------------------------------------

def readability_llm(text: str, chat: ChatClient, model: str = "") -> MetricResult:
    if not text.strip():
        raise EmptyText("readability needs non-empty text")
    req = ChatRequest(
        model=model,
        messages=[ChatMessage("user", _READABILITY_PROMPT.format(text=text))],
        temperature=0.0,
        max_tokens=READABILITY_LLM_MAX_TOKENS,
    )
    reply = chat.complete(req)
    match = _LEVEL_WORD_RE.search(reply.lower())
    if not match:
        raise UnparseableCompletion(f"no level word in judge reply: {reply[:80]!r}")
    label = match.group(1)
    return MetricResult(name="readability/llm", value=float(_LEVEL_WORDS[label]),
                        detail={"label": label})
