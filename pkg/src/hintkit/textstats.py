"""Deterministic text statistics shared by the metric implementations.

Tokenization, sentence counting, and syllable counting are intentionally
simple, rule-based, and stable: every metric that consumes them uses the
same counters, so relative scores stay consistent even where the heuristics
disagree with a dictionary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Word tokens: runs of letters/digits (underscore excluded), optionally
# joined by internal apostrophes ("don't", "o'clock").
_WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*", re.UNICODE)

# Sentence boundary: one or more of . ! ? followed by whitespace or the end.
_SENT_RE = re.compile(r"[.!?]+(?:\s+|$)")

_VOWEL_RUN_RE = re.compile(r"[aeiouy]+")
_VOWELS = frozenset("aeiouy")

# Fixed English stopword list used by the familiarity and answer-leakage
# metrics (and the sentence-initial filter of the entity heuristic).
STOPWORDS = frozenset("""
a about above after again against all am an and any are aren't as at be
because been before being below between both but by can cannot could
couldn't did didn't do does doesn't doing don't down during each few for
from further had hadn't has hasn't have haven't having he he'd he'll he's
her here here's hers herself him himself his how how's i i'd i'll i'm i've
if in into is isn't it it's its itself let's me more most mustn't my myself
no nor not of off on once only or other ought our ours ourselves out over
own same shan't she she'd she'll she's should shouldn't so some such than
that that's the their theirs them themselves then there there's these they
they'd they'll they're they've this those through to too under until up
very was wasn't we we'd we'll we're we've were weren't what what's when
when's where where's which while who who's whom why why's with won't would
wouldn't you you'd you'll you're you've your yours yourself yourselves
""".split())


@dataclass
class TextStats:
    """Counts feeding the readability formulas.

    Invariants: ``words == len(tokens)`` and
    ``len(syllables_per_token) == words``.
    """

    tokens: list[str]
    sentences: int
    syllables_per_token: list[int]
    letters: int
    words: int

    @property
    def syllables(self) -> int:
        return sum(self.syllables_per_token)

    @property
    def complex_words(self) -> int:
        """Tokens with three or more syllables."""
        return sum(1 for s in self.syllables_per_token if s >= 3)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens."""
    return [m.group().lower() for m in _WORD_RE.finditer(text)]


def token_spans(text: str) -> list[tuple[int, int, str]]:
    """``(start, end, token)`` triples with original casing."""
    return [(m.start(), m.end(), m.group()) for m in _WORD_RE.finditer(text)]


def count_sentences(text: str) -> int:
    """Number of sentence-like segments; at least 1 for non-empty text."""
    stripped = text.strip()
    if not stripped:
        return 0
    chunks = [c for c in _SENT_RE.split(stripped) if c.strip()]
    return max(len(chunks), 1)


def count_syllables(token: str) -> int:
    """Vowel-group syllable heuristic.

    Counts runs of ``aeiouy``, drops one for a terminal silent "e" (kept when
    the token ends in consonant+"le"), and never returns less than 1.
    """
    t = token.lower()
    n = len(_VOWEL_RUN_RE.findall(t))
    if t.endswith("e") and not (len(t) >= 3 and t.endswith("le") and t[-3] not in _VOWELS):
        n -= 1
    return max(n, 1)


def is_stopword(token: str) -> bool:
    return token.lower() in STOPWORDS


def analyze_text(text: str) -> TextStats:
    """Tokenize and count; deterministic for any input, empty text allowed."""
    tokens = tokenize(text)
    return TextStats(
        tokens=tokens,
        sentences=count_sentences(text),
        syllables_per_token=[count_syllables(t) for t in tokens],
        letters=sum(1 for t in tokens for ch in t if ch.isalnum()),
        words=len(tokens),
    )
