"""Answer leakage: how much of the answer a hint gives away, in [0, 1];
lower is better.

The lexical method measures token-set overlap with each answer and keeps
the worst (maximum) answer.  The contextual method embeds every hint token
and answer token and takes the maximum pairwise cosine similarity, catching
paraphrased giveaways that share no surface form.
"""

from __future__ import annotations

import numpy as np

from ..clients import EmbeddingClient
from ..model import MetricResult
from ..textstats import is_stopword, tokenize
from .relevance import clamp01, cosine


def _token_set(text: str, include_stopwords: bool) -> set[str]:
    tokens = tokenize(text)
    if not include_stopwords:
        tokens = [t for t in tokens if not is_stopword(t)]
    return set(tokens)


def answerleakage_lexical(hint_text: str, answers: list[str],
                          include_stopwords: bool = False) -> MetricResult:
    """Max over answers of |answer tokens in hint| / |answer tokens|."""
    variant = "stop" if include_stopwords else "nostop"
    name = f"answerleakage/lexical/{variant}"
    hint_tokens = _token_set(hint_text, include_stopwords)
    best = 0.0
    scored_any = False
    for answer in answers:
        answer_tokens = _token_set(answer, include_stopwords)
        if not answer_tokens:
            continue
        scored_any = True
        best = max(best, len(answer_tokens & hint_tokens) / len(answer_tokens))
    if not scored_any:
        return MetricResult(name=name, value=0.0, detail={"flag": "no-scorable-answer"})
    return MetricResult(name=name, value=best)


def answerleakage_contextual(hint_text: str, answers: list[str],
                             embed: EmbeddingClient) -> MetricResult:
    """Max pairwise token-embedding cosine between the hint and any answer."""
    name = "answerleakage/contextual"
    hint_tokens = sorted(set(tokenize(hint_text)))
    answer_tokens = sorted({t for a in answers for t in tokenize(a)})
    if not hint_tokens or not answer_tokens:
        return MetricResult(name=name, value=0.0, detail={"flag": "no-tokens"})
    vectors = embed.embed(hint_tokens + answer_tokens)
    hint_vecs = [np.array(v.values) for v in vectors[:len(hint_tokens)]]
    answer_vecs = [np.array(v.values) for v in vectors[len(hint_tokens):]]
    best = max(cosine(h, a) for h in hint_vecs for a in answer_vecs)
    return MetricResult(name=name, value=clamp01(best))
