"""Relevance: how semantically related a hint is to its question, in [0, 1].

Four methods, cheapest first: token-overlap ROUGE variants, static
word-vector cosine, remote sentence-embedding cosine, and an LLM judge that
treats the hint as an answer and compares synthetic questions generated for
it against the real question.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..clients import ChatClient, ChatMessage, ChatRequest, EmbeddingClient, VectorTable
from ..generation import parse_hint_list
from ..model import MetricResult
from ..textstats import tokenize

ROUGE_VARIANTS = ("rouge1", "rouge2", "rougeL")

RELEVANCE_LLM_MAX_TOKENS = 384

_SYNTH_QUESTION_PROMPT = (
    "The following text is the answer to some question. Write {m} short "
    "questions that this text would answer, as a numbered list.\n\nText: {text}"
)


def clamp01(x: float) -> float:
    return max(0.0, min(1.0, x))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _f1(overlap: int, hyp_total: int, ref_total: int) -> float:
    if hyp_total == 0 or ref_total == 0 or overlap == 0:
        return 0.0
    precision = overlap / hyp_total
    recall = overlap / ref_total
    return 2.0 * precision * recall / (precision + recall)


def _ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def _lcs_length(a: list[str], b: list[str]) -> int:
    # Two-row dynamic program; O(len(a) * len(b)) time, O(len(b)) space.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_from_tokens(hyp: list[str], ref: list[str], variant: str) -> float:
    """F1-style ROUGE over pre-tokenized sequences (hypothesis vs reference)."""
    if variant == "rougeL":
        return _f1(_lcs_length(hyp, ref), len(hyp), len(ref))
    if variant in ("rouge1", "rouge2"):
        n = 1 if variant == "rouge1" else 2
        hyp_ngrams = _ngrams(hyp, n)
        ref_ngrams = _ngrams(ref, n)
        ref_counts = Counter(ref_ngrams)
        overlap = sum(min(count, ref_counts[gram]) for gram, count in Counter(hyp_ngrams).items())
        return _f1(overlap, len(hyp_ngrams), len(ref_ngrams))
    raise ValueError(f"unknown rouge variant {variant!r}")


def rouge_score(hint_text: str, question_text: str, variant: str = "rougeL") -> float:
    return rouge_from_tokens(tokenize(hint_text), tokenize(question_text), variant)


def relevance_rouge(hint_text: str, question_text: str, variant: str = "rougeL") -> MetricResult:
    return MetricResult(name=f"relevance/rouge/{variant}",
                        value=rouge_score(hint_text, question_text, variant))


def _mean_pooled(tokens: list[str], table: VectorTable) -> np.ndarray | None:
    vectors = [table.get(t) for t in tokens]
    vectors = [v for v in vectors if v is not None]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)


def relevance_static_embedding(hint_text: str, question_text: str,
                               table: VectorTable) -> MetricResult:
    """Cosine of mean-pooled static word vectors; negative cosines clamp to 0.

    Sides with no in-vocabulary token score 0 with an ``oov`` detail flag.
    """
    hint_vec = _mean_pooled(tokenize(hint_text), table)
    question_vec = _mean_pooled(tokenize(question_text), table)
    if hint_vec is None or question_vec is None:
        oov = [side for side, v in (("hint", hint_vec), ("question", question_vec)) if v is None]
        return MetricResult(name="relevance/static", value=0.0, detail={"oov": oov})
    return MetricResult(name="relevance/static", value=clamp01(cosine(hint_vec, question_vec)))


def relevance_contextual(hint_text: str, question_text: str,
                         embed: EmbeddingClient) -> MetricResult:
    """Cosine of the two sentence embeddings, clamped to [0, 1]."""
    vectors = embed.embed([hint_text, question_text])
    value = clamp01(cosine(np.array(vectors[0].values), np.array(vectors[1].values)))
    return MetricResult(name="relevance/contextual", value=value)


def relevance_llm(hint_text: str, question_text: str, chat: ChatClient,
                  embed: EmbeddingClient, m: int = 3, model: str = "") -> MetricResult:
    """Treat the hint as an answer: generate ``m`` questions it could answer
    and average their embedding similarity to the real question."""
    req = ChatRequest(
        model=model,
        messages=[ChatMessage("user", _SYNTH_QUESTION_PROMPT.format(m=m, text=hint_text))],
        temperature=0.0,
        max_tokens=RELEVANCE_LLM_MAX_TOKENS,
    )
    synthetic = parse_hint_list(chat.complete(req), expected=m)
    vectors = embed.embed([question_text] + synthetic)
    real = np.array(vectors[0].values)
    sims = [clamp01(cosine(np.array(v.values), real)) for v in vectors[1:]]
    value = float(np.mean(sims))
    return MetricResult(name="relevance/llm", value=clamp01(value),
                        detail={"synthetic_questions": synthetic, "similarities": sims})
