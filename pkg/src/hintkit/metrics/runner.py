"""Metric suite orchestration over a whole dataset.

A :class:`MetricConfig` names the methods to run; :func:`evaluate_dataset`
resolves each against the configured backends, scores every hint (and
optionally questions/answers for text-level methods), attaches the results,
and returns per-subset means.  Methods whose backend is missing, or that
need the network while offline, are reported per method and the rest still
run.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from ..clients import ChatClient, EmbeddingClient, PageviewsClient, RemoteScorerClient, VectorTable, offline_mode
from ..errors import BackendUnavailable
from ..model import Answer, Dataset, Hint, Instance, MetricResult, Question
from . import convergence as conv
from . import familiarity as fam
from . import leakage as leak
from . import readability as read
from . import relevance as rel

log = logging.getLogger(__name__)

DEFAULT_VARIANTS = {
    ("relevance", "rouge"): "rougeL",
    ("readability", "traditional"): "flesch",
    ("familiarity", "wordfreq"): "nostop",
    ("answerleakage", "lexical"): "nostop",
}

# Methods the orchestrator accepts, with the backends each one needs.
_REMOTE_BACKENDS = frozenset({"chat", "embed", "pageviews", "specificity", "regression"})


@dataclass
class MethodSpec:
    metric: str
    method: str
    variant: str | None = None
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        parts = [p.strip() for p in text.strip().split("/")]
        if len(parts) == 2:
            return cls(metric=parts[0], method=parts[1])
        if len(parts) == 3:
            return cls(metric=parts[0], method=parts[1], variant=parts[2])
        raise ValueError(f"method descriptor must be metric/method[/variant], got {text!r}")

    @property
    def key(self) -> tuple[str, str, str | None]:
        return (self.metric, self.method, self.variant)

    def __str__(self) -> str:
        base = f"{self.metric}/{self.method}"
        return f"{base}/{self.variant}" if self.variant else base


@dataclass
class MetricConfig:
    enabled: list[MethodSpec]

    def __post_init__(self) -> None:
        seen = set()
        for spec in self.enabled:
            if spec.key in seen:
                raise ValueError(f"duplicate method descriptor {spec}")
            seen.add(spec.key)

    @classmethod
    def parse(cls, text: str) -> "MetricConfig":
        specs = [MethodSpec.parse(p) for p in text.split(",") if p.strip()]
        if not specs:
            raise ValueError("no methods given")
        return cls(enabled=specs)


@dataclass
class Backends:
    """Resolved backend handles for the metric methods."""

    chat: ChatClient | None = None
    embed: EmbeddingClient | None = None
    pageviews: PageviewsClient | None = None
    vectors: VectorTable | None = None
    freq_table: dict[str, float] | None = None
    linear_scorer: read.LinearScorer | None = None
    specificity: RemoteScorerClient | None = None
    regression: RemoteScorerClient | None = None
    chat_model: str = ""
    window_days: int = 30


Target = Question | Answer | Hint
# run(instance, hint_targets, text_targets) -> [(target, result)]
RunFn = Callable[[Instance, "list[Hint]", "list[Target]"], "list[tuple[Target, MetricResult]]"]


@dataclass
class ResolvedMethod:
    spec: MethodSpec
    result_name: str
    text_level: bool
    run: RunFn


def _variant(spec: MethodSpec) -> str:
    return spec.variant or DEFAULT_VARIANTS.get((spec.metric, spec.method), "")


def _require(backends: Backends, spec: MethodSpec, *names: str) -> None:
    for name in names:
        if getattr(backends, name) is None:
            raise BackendUnavailable(str(spec), f"backend {name!r} not configured")


def _resolve(spec: MethodSpec, backends: Backends, offline: bool) -> ResolvedMethod:
    key = (spec.metric, spec.method)
    needs_remote = {
        ("relevance", "contextual"): ("embed",),
        ("relevance", "llm"): ("chat", "embed"),
        ("readability", "llm"): ("chat",),
        ("convergence", "llm"): ("chat",),
        ("convergence", "specificity"): ("specificity",),
        ("convergence", "regression"): ("regression",),
        ("familiarity", "wikipedia"): ("pageviews",),
        ("answerleakage", "contextual"): ("embed",),
    }.get(key, ())
    if needs_remote and offline:
        raise BackendUnavailable(str(spec), "remote method unavailable in offline mode")
    if needs_remote:
        _require(backends, spec, *needs_remote)

    if key == ("relevance", "rouge"):
        variant = _variant(spec)
        if variant not in rel.ROUGE_VARIANTS:
            raise ValueError(f"unknown rouge variant {variant!r}")

        def run(inst: Instance, hints: list[Hint], texts: list[Target]):
            return [(h, rel.relevance_rouge(h.text, inst.question.text, variant)) for h in hints]

        return ResolvedMethod(spec, f"relevance/rouge/{variant}", False, run)

    if key == ("relevance", "static"):
        _require(backends, spec, "vectors")

        def run(inst, hints, texts):
            return [(h, rel.relevance_static_embedding(h.text, inst.question.text, backends.vectors))
                    for h in hints]

        return ResolvedMethod(spec, "relevance/static", False, run)

    if key == ("relevance", "contextual"):
        def run(inst, hints, texts):
            return [(h, rel.relevance_contextual(h.text, inst.question.text, backends.embed))
                    for h in hints]

        return ResolvedMethod(spec, "relevance/contextual", False, run)

    if key == ("relevance", "llm"):
        m = int(spec.params.get("m", 3))

        def run(inst, hints, texts):
            return [(h, rel.relevance_llm(h.text, inst.question.text, backends.chat,
                                          backends.embed, m=m, model=backends.chat_model))
                    for h in hints]

        return ResolvedMethod(spec, "relevance/llm", False, run)

    if key == ("readability", "traditional"):
        formula = _variant(spec)
        if formula not in read.TRADITIONAL_FORMULAS:
            raise ValueError(f"unknown readability formula {formula!r}")

        def run(inst, hints, texts):
            return [(t, read.readability_traditional(t.text, formula)) for t in [*hints, *texts]]

        return ResolvedMethod(spec, f"readability/traditional/{formula}", True, run)

    if key == ("readability", "linear"):
        _require(backends, spec, "linear_scorer")

        def run(inst, hints, texts):
            return [(t, read.readability_linear(t.text, backends.linear_scorer))
                    for t in [*hints, *texts]]

        return ResolvedMethod(spec, "readability/linear", True, run)

    if key == ("readability", "llm"):
        def run(inst, hints, texts):
            return [(t, read.readability_llm(t.text, backends.chat, model=backends.chat_model))
                    for t in [*hints, *texts]]

        return ResolvedMethod(spec, "readability/llm", True, run)

    if key == ("convergence", "llm"):
        k = int(spec.params.get("k", 10))

        def run(inst, hints, texts):
            if not hints:
                return []
            report = conv.convergence_llm(
                inst.question.text, [a.text for a in inst.answers],
                [h.text for h in hints], backends.chat, k=k, model=backends.chat_model)
            return list(zip(hints, conv.convergence_results(report)))

        return ResolvedMethod(spec, "convergence/llm", False, run)

    if key in (("convergence", "specificity"), ("convergence", "regression")):
        backend_name = key[1]
        client = getattr(backends, backend_name)

        def run(inst, hints, texts):
            if not hints:
                return []
            results = conv.convergence_scored([h.text for h in hints], client, backend=backend_name)
            return list(zip(hints, results))

        return ResolvedMethod(spec, f"convergence/{backend_name}", False, run)

    if key == ("familiarity", "wordfreq"):
        _require(backends, spec, "freq_table")
        variant = _variant(spec)
        if variant not in ("stop", "nostop"):
            raise ValueError(f"unknown wordfreq variant {variant!r}")
        include_stop = variant == "stop"

        def run(inst, hints, texts):
            return [(t, fam.familiarity_wordfreq(t.text, backends.freq_table, include_stop))
                    for t in [*hints, *texts]]

        return ResolvedMethod(spec, f"familiarity/wordfreq/{variant}", True, run)

    if key == ("familiarity", "wikipedia"):
        # Targets that were never enriched fall back to the builtin entity
        # heuristic so the CLI pipeline works without a separate enrich step.
        from ..enrich import heuristic_entities

        def run(inst, hints, texts):
            out = []
            for t in [*hints, *texts]:
                entities = t.entities or heuristic_entities(t.text)
                out.append((t, fam.familiarity_wikipedia(entities, backends.pageviews,
                                                         window_days=backends.window_days)))
            return out

        return ResolvedMethod(spec, "familiarity/wikipedia", True, run)

    if key == ("answerleakage", "lexical"):
        variant = _variant(spec)
        if variant not in ("stop", "nostop"):
            raise ValueError(f"unknown lexical variant {variant!r}")
        include_stop = variant == "stop"

        def run(inst, hints, texts):
            answers = [a.text for a in inst.answers]
            return [(h, leak.answerleakage_lexical(h.text, answers, include_stop)) for h in hints]

        return ResolvedMethod(spec, f"answerleakage/lexical/{variant}", False, run)

    if key == ("answerleakage", "contextual"):
        def run(inst, hints, texts):
            answers = [a.text for a in inst.answers]
            return [(h, leak.answerleakage_contextual(h.text, answers, backends.embed)) for h in hints]

        return ResolvedMethod(spec, "answerleakage/contextual", False, run)

    raise ValueError(f"unknown metric method {spec}")


@dataclass
class EvalSummary:
    per_subset: dict[str, dict[str, float]]
    computed: int
    skipped: int
    failures: dict[str, str]

    @property
    def method_names(self) -> list[str]:
        names = {name for means in self.per_subset.values() for name in means}
        return sorted(names)


def evaluate_dataset(dataset: Dataset, config: MetricConfig, backends: Backends, *,
                     overwrite: bool = False, include_questions: bool = False,
                     include_answers: bool = False, workers: int = 4,
                     progress: Callable[[int, int], None] | None = None,
                     offline: bool | None = None) -> EvalSummary:
    """Run every enabled method over the dataset and attach the results.

    Already-present results are skipped unless ``overwrite``.  Hint-level
    methods always target hints; text-level methods additionally target
    questions/answers when requested.  Remote methods are rejected upfront
    when offline.
    """
    if offline is None:
        offline = offline_mode()

    failures: dict[str, str] = {}
    methods: list[ResolvedMethod] = []
    for spec in config.enabled:
        try:
            methods.append(_resolve(spec, backends, offline))
        except BackendUnavailable as exc:
            failures[exc.method] = exc.reason
            log.warning("skipping %s: %s", exc.method, exc.reason)

    instances = [inst for _, _, inst in dataset.all_instances()]
    total = len(instances)
    computed = 0
    skipped = 0
    skip_lock = threading.Lock()
    dead_methods: set[str] = set()

    def work(inst: Instance) -> list[tuple[Target, MetricResult]]:
        nonlocal skipped
        out: list[tuple[Target, MetricResult]] = []
        for method in methods:
            if method.result_name in dead_methods:
                continue
            texts: list[Target] = []
            if method.text_level:
                if include_questions:
                    texts.append(inst.question)
                if include_answers:
                    texts.extend(inst.answers)
            wanted_hints = []
            wanted_texts = []
            n_skipped = 0
            for h in inst.hints:
                if overwrite or method.result_name not in h.metrics:
                    wanted_hints.append(h)
                else:
                    n_skipped += 1
            for t in texts:
                if overwrite or method.result_name not in t.metrics:
                    wanted_texts.append(t)
                else:
                    n_skipped += 1
            if n_skipped:
                with skip_lock:
                    skipped += n_skipped
            if not wanted_hints and not wanted_texts:
                continue
            try:
                out.extend(method.run(inst, wanted_hints, wanted_texts))
            except Exception as exc:  # per-method failure; other methods keep going
                failures.setdefault(method.result_name, str(exc))
                dead_methods.add(method.result_name)
                log.warning("method %s failed: %s", method.result_name, exc)
        return out

    if workers > 1 and total > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = pool.map(work, instances)
            done = 0
            for batch in batches:
                for target, result in batch:
                    target.attach_metric(result)
                    computed += 1
                done += 1
                if progress:
                    progress(done, total)
    else:
        for done, inst in enumerate(instances, start=1):
            for target, result in work(inst):
                target.attach_metric(result)
                computed += 1
            if progress:
                progress(done, total)

    enabled_names = {m.result_name for m in methods}
    per_subset: dict[str, dict[str, float]] = {}
    for sname, subset in dataset.subsets.items():
        sums: dict[str, list[float]] = {}
        for inst in subset.instances.values():
            for target in [inst.question, *inst.answers, *inst.hints]:
                for name, result in target.metrics.items():
                    if name in enabled_names:
                        sums.setdefault(name, []).append(result.value)
        per_subset[sname] = {name: sum(vals) / len(vals) for name, vals in sorted(sums.items())}

    return EvalSummary(per_subset=per_subset, computed=computed, skipped=skipped, failures=failures)
