"""Hint generation through chat completions.

Two built-in strategies: answer-aware (the prompt carries the gold answer,
and generated hints are filtered so they never contain an answer verbatim)
and answer-agnostic (question only, no filter).  Hints are appended to the
instances, never replacing what is already there.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .clients import ChatClient, ChatMessage, ChatRequest
from .errors import GenerationFailed, MissingAnswer, UnparseableCompletion
from .model import Hint, Instance

log = logging.getLogger(__name__)

GENERATION_MAX_TOKENS = 512

# Versioned built-in prompt templates.  User templates are plain UTF-8 text
# files with {question}, {answer}, and {n} placeholders and replace the user
# prompt; the system prompt stays fixed per mode.
PROMPT_TEMPLATES: dict[str, dict[str, str]] = {
    "answer-aware-v1": {
        "system": (
            "You write hints for trivia questions. Produce exactly {n} hints that "
            "guide toward the answer without revealing it. Never quote or state "
            "the answer itself. Reply with a numbered list only."
        ),
        "user": "Question: {question}\nAnswer: {answer}\n\nWrite {n} hints.",
    },
    "answer-agnostic-v1": {
        "system": (
            "You write hints for trivia questions. Produce exactly {n} hints that "
            "help someone work out the answer on their own. Reply with a numbered "
            "list only."
        ),
        "user": "Question: {question}\n\nWrite {n} hints.",
    },
}

_PLACEHOLDER_RE = re.compile(r"\{(question|answer|n)\}")

_LIST_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.)\]:]\s*|[-*•]\s+)(.+?)\s*$")


@dataclass
class GenerationConfig:
    num_hints: int = 5
    model: str = ""
    temperature: float = 0.7
    prompt_template_id: str = ""
    max_regeneration_rounds: int = 2

    def __post_init__(self) -> None:
        if self.num_hints < 1:
            raise ValueError("num_hints must be >= 1")


def render_template(template: str, **values: object) -> str:
    """Substitute {question}/{answer}/{n}; other braces pass through."""
    return _PLACEHOLDER_RE.sub(lambda m: str(values[m.group(1)]), template)


def load_prompt_template(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def parse_hint_list(completion_text: str, expected: int) -> list[str]:
    """Extract up to ``expected`` items from a numbered or bulleted list.

    Raises :class:`UnparseableCompletion` when no list items are found.
    """
    items = []
    for line in completion_text.splitlines():
        match = _LIST_ITEM_RE.match(line)
        if match and match.group(1).strip():
            items.append(match.group(1).strip())
    if not items:
        raise UnparseableCompletion(f"no list items in completion: {completion_text[:80]!r}")
    return items[:expected]


def _contains_answer(hint: str, answers_lc: list[str]) -> bool:
    hint_lc = hint.lower()
    return any(ans in hint_lc for ans in answers_lc)


def _hints_for_instance(instance: Instance, instance_id: str, cfg: GenerationConfig,
                        chat: ChatClient, *, answer_aware: bool,
                        filter_leaks: bool, user_template: str | None) -> list[str]:
    templates = PROMPT_TEMPLATES[
        cfg.prompt_template_id or ("answer-aware-v1" if answer_aware else "answer-agnostic-v1")
    ]
    answer = instance.answers[0].text if instance.answers else ""
    answers_lc = [a.text.lower() for a in instance.answers]

    collected: list[str] = []
    rounds = 1 + cfg.max_regeneration_rounds
    for round_no in range(rounds):
        need = cfg.num_hints - len(collected)
        if need <= 0:
            break
        values = {"question": instance.question.text, "answer": answer, "n": need}
        req = ChatRequest(
            model=cfg.model,
            messages=[
                ChatMessage("system", render_template(templates["system"], **values)),
                ChatMessage("user", render_template(user_template or templates["user"], **values)),
            ],
            temperature=cfg.temperature,
            max_tokens=GENERATION_MAX_TOKENS,
        )
        try:
            items = parse_hint_list(chat.complete(req), expected=need)
        except UnparseableCompletion:
            log.warning("instance %s: unparseable completion on round %d", instance_id, round_no + 1)
            continue
        for item in items:
            if filter_leaks and _contains_answer(item, answers_lc):
                log.warning("instance %s: dropping hint that contains an answer: %r", instance_id, item)
                continue
            collected.append(item)
    if len(collected) < cfg.num_hints:
        raise GenerationFailed(instance_id, f"got {len(collected)} of {cfg.num_hints} hints after {rounds} round(s)")
    return collected[:cfg.num_hints]


def _run(instances: Sequence[Instance], ids: Sequence[str] | None, cfg: GenerationConfig,
         chat: ChatClient, *, answer_aware: bool, filter_leaks: bool,
         user_template: str | None, workers: int) -> None:
    ids = list(ids) if ids is not None else [str(i) for i in range(len(instances))]
    if len(ids) != len(instances):
        raise ValueError("ids and instances must have the same length")

    if answer_aware:
        for inst, iid in zip(instances, ids):
            if not inst.answers:
                raise MissingAnswer(iid)

    source = f"model:{cfg.model}/{'answer-aware' if answer_aware else 'answer-agnostic'}"

    def produce(pair: tuple[Instance, str]) -> tuple[Instance, list[str]]:
        inst, iid = pair
        texts = _hints_for_instance(inst, iid, cfg, chat, answer_aware=answer_aware,
                                    filter_leaks=filter_leaks, user_template=user_template)
        return inst, texts

    pairs = list(zip(instances, ids))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            produced = list(pool.map(produce, pairs))
    else:
        produced = [produce(p) for p in pairs]

    # Serialized merge: hints are attached only after generation succeeded.
    for inst, texts in produced:
        inst.hints.extend(Hint(text=t, source=source) for t in texts)


def generate_answer_aware(instances: Sequence[Instance], cfg: GenerationConfig,
                          chat: ChatClient, *, ids: Sequence[str] | None = None,
                          filter_leaks: bool = True, user_template: str | None = None,
                          workers: int = 1) -> None:
    """Append ``cfg.num_hints`` hints per instance, using the gold answer.

    Every instance must have at least one answer.  Hints containing an
    answer verbatim (case-insensitive) are dropped and regenerated for up to
    ``cfg.max_regeneration_rounds`` extra rounds; if the target count is
    still not reached, :class:`GenerationFailed` is raised and the instance
    is left untouched.
    """
    _run(instances, ids, cfg, chat, answer_aware=True, filter_leaks=filter_leaks,
         user_template=user_template, workers=workers)


def generate_answer_agnostic(instances: Sequence[Instance], cfg: GenerationConfig,
                             chat: ChatClient, *, ids: Sequence[str] | None = None,
                             filter_leaks: bool = False, user_template: str | None = None,
                             workers: int = 1) -> None:
    """Append ``cfg.num_hints`` hints per instance from the question alone."""
    _run(instances, ids, cfg, chat, answer_aware=False, filter_leaks=filter_leaks,
         user_template=user_template, workers=workers)
