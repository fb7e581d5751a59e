"""Familiarity: how well-known a text's vocabulary or entities are, in [0, 1].

Word-frequency familiarity averages per-token values from a reference table
(built offline from a large corpus and normalized to [0, 1]); the Wikipedia
method maps entity pageview counts through a log scale that saturates at a
million views over the window.
"""

from __future__ import annotations

import math
from pathlib import Path

from ..clients import PageviewsClient
from ..errors import MalformedLine
from ..model import Entity, MetricResult
from ..textstats import is_stopword, tokenize

# log10 normalization ceiling: ~1M views over the window maps to 1.0.
PAGEVIEW_LOG_CAP = 6.0


def load_frequency_table(path: str | Path) -> dict[str, float]:
    """Load ``token<TAB>familiarity`` lines; values must lie in [0, 1]."""
    table: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise MalformedLine(lineno, "expected 'token<TAB>value'")
            token, raw = parts
            try:
                value = float(raw)
            except ValueError:
                raise MalformedLine(lineno, f"non-numeric value {raw!r}") from None
            if not 0.0 <= value <= 1.0:
                raise MalformedLine(lineno, f"value {value} outside [0, 1]")
            table[token] = value
    return table


def familiarity_wordfreq(text: str, freq_table: dict[str, float],
                         include_stopwords: bool = False) -> MetricResult:
    """Mean per-token familiarity; out-of-vocabulary tokens count as 0."""
    variant = "stop" if include_stopwords else "nostop"
    name = f"familiarity/wordfreq/{variant}"
    tokens = tokenize(text)
    if not include_stopwords:
        tokens = [t for t in tokens if not is_stopword(t)]
    if not tokens:
        return MetricResult(name=name, value=0.0, detail={"flag": "empty-token-set"})
    value = sum(freq_table.get(t, 0.0) for t in tokens) / len(tokens)
    return MetricResult(name=name, value=value)


def pageview_familiarity(views: int) -> float:
    return min(1.0, math.log10(1 + views) / PAGEVIEW_LOG_CAP)


def familiarity_wikipedia(entities: list[Entity], client: PageviewsClient,
                          window_days: int = 30) -> MetricResult:
    """Mean pageview familiarity over the entities; with no entities there is
    nothing unfamiliar, so the score is 1.0 with a ``no-entity`` flag."""
    name = "familiarity/wikipedia"
    if not entities:
        return MetricResult(name=name, value=1.0, detail={"flag": "no-entity"})
    views_by_entity: dict[str, int] = {}
    scores = []
    for ent in entities:
        views, found = client.pageviews_with_status(ent.text, window_days)
        views_by_entity[ent.text] = views if found else 0
        scores.append(pageview_familiarity(views))
    return MetricResult(name=name, value=sum(scores) / len(scores),
                        detail={"views": views_by_entity})
