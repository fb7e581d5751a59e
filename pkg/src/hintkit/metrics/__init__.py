"""Metric implementations and the dataset-level orchestrator."""

from .convergence import (
    Candidate,
    ConvergenceReport,
    HintConvergence,
    convergence_llm,
    convergence_results,
    convergence_scored,
    score_transcript,
)
from .familiarity import familiarity_wikipedia, familiarity_wordfreq, load_frequency_table
from .leakage import answerleakage_contextual, answerleakage_lexical
from .readability import (
    LinearScorer,
    load_linear_scorer,
    readability_linear,
    readability_llm,
    readability_traditional,
)
from .relevance import (
    relevance_contextual,
    relevance_llm,
    relevance_rouge,
    relevance_static_embedding,
    rouge_score,
)
from .runner import Backends, EvalSummary, MethodSpec, MetricConfig, evaluate_dataset

__all__ = [
    "Backends",
    "Candidate",
    "ConvergenceReport",
    "EvalSummary",
    "HintConvergence",
    "LinearScorer",
    "MethodSpec",
    "MetricConfig",
    "answerleakage_contextual",
    "answerleakage_lexical",
    "convergence_llm",
    "convergence_results",
    "convergence_scored",
    "evaluate_dataset",
    "familiarity_wikipedia",
    "familiarity_wordfreq",
    "load_frequency_table",
    "load_linear_scorer",
    "readability_linear",
    "readability_llm",
    "readability_traditional",
    "relevance_contextual",
    "relevance_llm",
    "relevance_rouge",
    "relevance_static_embedding",
    "rouge_score",
    "score_transcript",
]
