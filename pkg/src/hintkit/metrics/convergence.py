"""Convergence: how strongly a hint narrows candidate answers toward the
gold one, in [0, 1].

The LLM protocol generates candidate answers for the question, then asks a
judge, per hint and candidate, whether the candidate is still plausible
given the hint.  A hint scores the fraction of incorrect candidates it
eliminates, zeroed when it also eliminates a gold candidate.  The trained
specificity/regression scorers stay external and are reached through the
remote scoring endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..clients import ChatClient, ChatMessage, ChatRequest, RemoteScorerClient
from ..errors import UnparseableCompletion
from ..generation import parse_hint_list
from ..model import MetricResult
from .relevance import clamp01

CANDIDATE_MAX_TOKENS = 512
JUDGE_MAX_TOKENS = 8

_CANDIDATES_PROMPT = (
    "List {k} plausible candidate answers to the question below, as a "
    "numbered list with one candidate per line.\n\nQuestion: {question}"
)

_JUDGE_PROMPT = (
    "Question: {question}\nHint: {hint}\nCandidate answer: {candidate}\n\n"
    "Given the hint, is this candidate still a plausible answer to the "
    "question? Reply with exactly one word: yes or no."
)

SCORED_BACKENDS = ("specificity", "regression")


@dataclass
class Candidate:
    text: str
    is_gold: bool


@dataclass
class HintConvergence:
    eliminated: list[int]
    survived_gold: bool
    score: float


@dataclass
class ConvergenceReport:
    candidates: list[Candidate]
    per_hint: list[HintConvergence]


def _judge_says_plausible(reply: str) -> bool:
    word = reply.strip().lower().rstrip(".!")
    if word.startswith("yes"):
        return True
    if word.startswith("no"):
        return False
    raise UnparseableCompletion(f"judge reply is not yes/no: {reply[:40]!r}")


def generate_candidates(question_text: str, gold_answers: list[str],
                        chat: ChatClient, k: int, model: str = "") -> list[Candidate]:
    req = ChatRequest(
        model=model,
        messages=[ChatMessage("user", _CANDIDATES_PROMPT.format(k=k, question=question_text))],
        temperature=0.0,
        max_tokens=CANDIDATE_MAX_TOKENS,
    )
    texts = parse_hint_list(chat.complete(req), expected=k)
    gold_lc = {a.strip().lower() for a in gold_answers}
    return [Candidate(text=t, is_gold=t.strip().lower() in gold_lc) for t in texts]


def score_transcript(candidates: list[Candidate], eliminated: list[int]) -> HintConvergence:
    """Apply the convergence formula to one hint's elimination decisions."""
    incorrect = [i for i, c in enumerate(candidates) if not c.is_gold]
    gold_eliminated = any(candidates[i].is_gold for i in eliminated)
    if not incorrect:
        score = 0.0 if gold_eliminated else 1.0
    else:
        eliminated_incorrect = sum(1 for i in eliminated if not candidates[i].is_gold)
        score = eliminated_incorrect / len(incorrect)
        if gold_eliminated:
            score = 0.0
    return HintConvergence(eliminated=sorted(eliminated),
                           survived_gold=not gold_eliminated, score=score)


def convergence_llm(question_text: str, gold_answers: list[str], hints: list[str],
                    chat: ChatClient, k: int = 10, model: str = "") -> ConvergenceReport:
    """Full candidate-generation + per-hint judging protocol."""
    if k < 2:
        raise ValueError("k must be >= 2")
    candidates = generate_candidates(question_text, gold_answers, chat, k, model=model)
    per_hint = []
    for hint in hints:
        eliminated = []
        for idx, cand in enumerate(candidates):
            req = ChatRequest(
                model=model,
                messages=[ChatMessage("user", _JUDGE_PROMPT.format(
                    question=question_text, hint=hint, candidate=cand.text))],
                temperature=0.0,
                max_tokens=JUDGE_MAX_TOKENS,
            )
            if not _judge_says_plausible(chat.complete(req)):
                eliminated.append(idx)
        per_hint.append(score_transcript(candidates, eliminated))
    return ConvergenceReport(candidates=candidates, per_hint=per_hint)


def convergence_results(report: ConvergenceReport) -> list[MetricResult]:
    """One MetricResult per hint from a convergence report."""
    results = []
    incorrect_total = sum(1 for c in report.candidates if not c.is_gold)
    for hc in report.per_hint:
        detail = {
            "eliminated": hc.eliminated,
            "survived_gold": hc.survived_gold,
            "num_candidates": len(report.candidates),
            "num_incorrect": incorrect_total,
        }
        if incorrect_total == 0:
            detail["flag"] = "no-incorrect-candidates"
        results.append(MetricResult(name="convergence/llm", value=hc.score, detail=detail))
    return results


def convergence_scored(hints: list[str], scorer: RemoteScorerClient,
                       backend: str = "specificity") -> list[MetricResult]:
    """Delegate hints to a remote trained scorer; results clamp to [0, 1]."""
    if backend not in SCORED_BACKENDS:
        raise ValueError(f"unknown convergence backend {backend!r}")
    scores = scorer.score(hints)
    return [MetricResult(name=f"convergence/{backend}", value=clamp01(s)) for s in scores]
