"""Remote backends: chat completions, text embeddings, Wikipedia pageviews,
remote scorers and NER, plus static word-vector tables.

All HTTP goes through a small transport abstraction so every higher layer
can run fully offline against mock transports.  Real calls get retries with
exponential backoff, an in-flight cap, an optional token-bucket rate limit,
and an optional content-addressed response cache keyed by the full request.

Setting ``HINTKIT_OFFLINE=1`` makes the HTTP transport refuse every call.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
import warnings
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, NamedTuple, Protocol
from urllib.parse import quote

import numpy as np
import requests

from .errors import (
    AuthError,
    DimensionMismatch,
    EmptyCompletion,
    InconsistentDimension,
    MalformedLine,
    OfflineError,
    ProviderError,
    RateLimited,
    TransportError,
)

USER_AGENT = "hintkit/0.1"


def offline_mode() -> bool:
    return os.environ.get("HINTKIT_OFFLINE") == "1"


class TransportReply(NamedTuple):
    status: int
    payload: Any


class Transport(Protocol):
    def request(self, method: str, url: str, *, json_body: Any = None,
                headers: dict[str, str] | None = None,
                raw: bool = False) -> TransportReply: ...


class HttpTransport:
    """requests-backed transport honouring HINTKIT_OFFLINE."""

    def __init__(self, timeout: float = 30.0, session: requests.Session | None = None):
        self._timeout = timeout
        self._session = session or requests.Session()

    def request(self, method: str, url: str, *, json_body: Any = None,
                headers: dict[str, str] | None = None,
                raw: bool = False) -> TransportReply:
        if offline_mode():
            raise OfflineError(f"HINTKIT_OFFLINE=1 forbids {method} {url}")
        merged = {"User-Agent": USER_AGENT}
        if headers:
            merged.update(headers)
        try:
            resp = self._session.request(method, url, json=json_body,
                                         headers=merged, timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if raw:
            return TransportReply(resp.status_code, resp.content)
        try:
            payload = resp.json()
        except ValueError:
            payload = resp.text
        return TransportReply(resp.status_code, payload)


@dataclass
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 0.5
    jitter: float = 0.1

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if not 0.0 <= self.jitter <= 1.0:
            raise ValueError("jitter must be in [0, 1]")

    def delay(self, failures: int, rng: random.Random) -> float:
        """Backoff before the retry following ``failures`` failed attempts;
        nondecreasing in ``failures`` before jitter."""
        base = self.base_backoff * (2 ** (failures - 1))
        return base * (1.0 + self.jitter * rng.random())


class TokenBucket:
    """Thread-safe token bucket; ``acquire`` blocks until a token is free."""

    def __init__(self, rate: float, capacity: float | None = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(rate, 1.0)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self, tokens: float = 1.0) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= tokens:
                    self._tokens -= tokens
                    return
                wait = (tokens - self._tokens) / self.rate
            self._sleep(wait)


class ResponseCache:
    """Content-addressed on-disk cache: request hash -> JSON response."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    @staticmethod
    def key_for(obj: Any) -> str:
        blob = json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> Any | None:
        path = self._path(key)
        with self._lock:
            if not path.exists():
                return None
            return json.loads(path.read_text(encoding="utf-8"))

    def put(self, key: str, value: Any) -> None:
        path = self._path(key)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp{os.getpid()}")
            tmp.write_text(json.dumps(value, ensure_ascii=False), encoding="utf-8")
            os.replace(tmp, path)


class _RemoteClient:
    """Shared retry/limit/cache plumbing for the concrete clients."""

    def __init__(self, transport: Transport | None = None,
                 retry: RetryPolicy | None = None,
                 cache: ResponseCache | None = None,
                 max_in_flight: int = 4,
                 rate_limiter: TokenBucket | None = None,
                 sleep: Callable[[float], None] = time.sleep,
                 rng: random.Random | None = None):
        self.transport = transport or HttpTransport()
        self.retry = retry or RetryPolicy()
        self.cache = cache
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._limiter = rate_limiter
        self._sleep = sleep
        self._rng = rng or random.Random()

    def _call(self, method: str, url: str, *, body: Any = None,
              headers: dict[str, str] | None = None,
              accept: tuple[int, ...] = ()) -> TransportReply:
        """Issue a request with retries; returns on 200 or any ``accept``
        status, retries 429/5xx/transport failures, raises otherwise."""
        last_status: int | None = None
        last_error: str | None = None
        for attempt in range(1, self.retry.max_attempts + 1):
            if attempt > 1:
                self._sleep(self.retry.delay(attempt - 1, self._rng))
            try:
                if self._limiter is not None:
                    self._limiter.acquire()
                with self._semaphore:
                    reply = self.transport.request(method, url, json_body=body, headers=headers)
            except OfflineError:
                raise
            except TransportError as exc:
                last_status, last_error = None, str(exc)
                continue
            if reply.status == 200 or reply.status in accept:
                return reply
            if reply.status in (401, 403):
                raise AuthError(f"HTTP {reply.status} from {url}")
            if reply.status == 429 or reply.status >= 500:
                last_status, last_error = reply.status, None
                continue
            raise TransportError(f"HTTP {reply.status} from {url}")
        if last_status == 429:
            raise RateLimited(f"still rate-limited after {self.retry.max_attempts} attempts: {url}")
        detail = last_error or f"HTTP {last_status}"
        raise TransportError(f"giving up after {self.retry.max_attempts} attempts: {detail} ({url})")

    def _cached_json_call(self, cache_obj: Any, method: str, url: str, *,
                          body: Any = None, headers: dict[str, str] | None = None) -> Any:
        if self.cache is not None:
            key = ResponseCache.key_for(cache_obj)
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        payload = self._call(method, url, body=body, headers=headers).payload
        if self.cache is not None:
            self.cache.put(key, payload)
        return payload


# --- chat ---------------------------------------------------------------

@dataclass
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role {self.role!r}")


@dataclass
class ChatRequest:
    model: str
    messages: list[ChatMessage]
    temperature: float = 0.0
    max_tokens: int = 512
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be > 0")

    def body(self) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        if self.seed is not None:
            body["seed"] = self.seed
        return body


class ChatClient(_RemoteClient):
    """OpenAI-compatible chat completions over any endpoint."""

    def __init__(self, endpoint: str, api_key: str | None = None, **kwargs: Any):
        super().__init__(**kwargs)
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key

    def _headers(self) -> dict[str, str] | None:
        return {"Authorization": f"Bearer {self.api_key}"} if self.api_key else None

    def complete(self, req: ChatRequest) -> str:
        url = f"{self.endpoint}/chat/completions"
        body = req.body()
        payload = self._cached_json_call({"url": url, "body": body}, "POST", url,
                                         body=body, headers=self._headers())
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise EmptyCompletion(f"malformed completion payload from {url}") from None
        if not content or not content.strip():
            raise EmptyCompletion(f"empty completion from {url}")
        return content


# --- embeddings -----------------------------------------------------------

@dataclass
class EmbeddingVector:
    values: list[float]
    model: str


class EmbeddingClient(_RemoteClient):
    """OpenAI-compatible embeddings with automatic batching."""

    def __init__(self, endpoint: str, api_key: str | None = None,
                 model: str = "", batch_size: int = 100, **kwargs: Any):
        super().__init__(**kwargs)
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.batch_size = batch_size

    def _headers(self) -> dict[str, str] | None:
        return {"Authorization": f"Bearer {self.api_key}"} if self.api_key else None

    def embed(self, texts: list[str], model: str | None = None) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("texts must be non-empty")
        model = model if model is not None else self.model
        url = f"{self.endpoint}/embeddings"
        vectors: list[EmbeddingVector] = []
        for i in range(0, len(texts), self.batch_size):
            chunk = texts[i:i + self.batch_size]
            body = {"model": model, "input": chunk}
            payload = self._cached_json_call({"url": url, "body": body}, "POST", url,
                                             body=body, headers=self._headers())
            try:
                data = sorted(payload["data"], key=lambda d: d["index"])
                chunk_vecs = [EmbeddingVector(values=[float(x) for x in d["embedding"]], model=model)
                              for d in data]
            except (KeyError, TypeError) as exc:
                raise ProviderError(f"malformed embeddings payload from {url}: {exc}") from None
            if len(chunk_vecs) != len(chunk):
                raise ProviderError(f"{url} returned {len(chunk_vecs)} vectors for {len(chunk)} inputs")
            vectors.extend(chunk_vecs)
        dims = {len(v.values) for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"provider returned mixed dimensions {sorted(dims)}")
        return vectors


# --- Wikipedia pageviews ----------------------------------------------------

WIKIMEDIA_PAGEVIEWS_URL = "https://wikimedia.org/api/rest_v1/metrics/pageviews"


def _yesterday_utc() -> date:
    return datetime.now(timezone.utc).date() - timedelta(days=1)


class PageviewsClient(_RemoteClient):
    """Per-article daily pageview totals from the Wikimedia REST API.

    Missing pages count as 0 views and are never an error; results are
    cached per (title, window).
    """

    def __init__(self, project: str = "en.wikipedia",
                 base_url: str = WIKIMEDIA_PAGEVIEWS_URL,
                 window_end: Callable[[], date] = _yesterday_utc,
                 **kwargs: Any):
        super().__init__(**kwargs)
        self.project = project
        self.base_url = base_url.rstrip("/")
        self._window_end = window_end
        self._mem: dict[tuple[str, int], tuple[int, bool]] = {}
        self._mem_lock = threading.Lock()

    def _url(self, title: str, window_days: int) -> str:
        end = self._window_end()
        start = end - timedelta(days=window_days - 1)
        slug = quote(title.strip().replace(" ", "_"), safe="")
        return (f"{self.base_url}/per-article/{self.project}/all-access/all-agents/"
                f"{slug}/daily/{start:%Y%m%d}/{end:%Y%m%d}")

    def pageviews_with_status(self, title: str, window_days: int = 30) -> tuple[int, bool]:
        """Total views over the window and whether the page exists."""
        if not title.strip():
            raise ValueError("title must be non-empty")
        memo_key = (title, window_days)
        with self._mem_lock:
            if memo_key in self._mem:
                return self._mem[memo_key]
        url = self._url(title, window_days)
        if self.cache is not None:
            key = ResponseCache.key_for({"pageviews": url})
            hit = self.cache.get(key)
            if hit is not None:
                result = (int(hit["views"]), bool(hit["found"]))
                with self._mem_lock:
                    self._mem[memo_key] = result
                return result
        reply = self._call("GET", url, accept=(404,))
        if reply.status == 404:
            result = (0, False)
        else:
            try:
                views = sum(int(item["views"]) for item in reply.payload["items"])
            except (KeyError, TypeError) as exc:
                raise ProviderError(f"malformed pageviews payload from {url}: {exc}") from None
            result = (views, True)
        if self.cache is not None:
            self.cache.put(key, {"views": result[0], "found": result[1]})
        with self._mem_lock:
            self._mem[memo_key] = result
        return result

    def pageviews(self, title: str, window_days: int = 30) -> int:
        return self.pageviews_with_status(title, window_days)[0]


# --- auxiliary remote endpoints ----------------------------------------------

class RemoteScorerClient(_RemoteClient):
    """Scoring endpoint: POST {"texts": [...]} -> {"scores": [...]}."""

    def __init__(self, url: str, api_key: str | None = None, **kwargs: Any):
        super().__init__(**kwargs)
        self.url = url
        self.api_key = api_key

    def score(self, texts: list[str]) -> list[float]:
        if not texts:
            return []
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else None
        body = {"texts": texts}
        payload = self._cached_json_call({"url": self.url, "body": body}, "POST",
                                         self.url, body=body, headers=headers)
        try:
            scores = [float(s) for s in payload["scores"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed scores payload from {self.url}: {exc}") from None
        if len(scores) != len(texts):
            raise ProviderError(f"{self.url} returned {len(scores)} scores for {len(texts)} texts")
        return scores


class RemoteNerClient(_RemoteClient):
    """NER endpoint: POST {"text": ...} -> {"entities": [{text, label,
    start_index, end_index}]} with the fixed label enumeration."""

    def __init__(self, url: str, api_key: str | None = None, **kwargs: Any):
        super().__init__(**kwargs)
        self.url = url
        self.api_key = api_key

    def extract(self, text: str):
        from .model import Entity, EntityLabel

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else None
        body = {"text": text}
        payload = self._cached_json_call({"url": self.url, "body": body}, "POST",
                                         self.url, body=body, headers=headers)
        try:
            raw = payload["entities"]
        except (KeyError, TypeError):
            raise ProviderError(f"malformed NER payload from {self.url}") from None
        entities = []
        for item in raw:
            try:
                label = EntityLabel(item["label"])
                entities.append(Entity(text=item["text"], label=label,
                                       start_index=int(item["start_index"]),
                                       end_index=int(item["end_index"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ProviderError(f"bad entity from {self.url}: {exc}") from None
        return entities


# --- static word vectors -------------------------------------------------------

@dataclass
class VectorTable:
    """Word -> vector lookup with a uniform dimension."""

    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    dim: int = 0

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_static_vectors(path: str | Path) -> VectorTable:
    """Load a GloVe-style text table: ``token v1 v2 ... vD`` per line.

    The first line fixes the dimension; duplicate tokens keep their first
    occurrence (with a warning).
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token, raw_values = parts[0], parts[1:]
            if not raw_values:
                raise MalformedLine(lineno, "no vector components")
            try:
                values = np.array([float(v) for v in raw_values], dtype=np.float64)
            except ValueError:
                raise MalformedLine(lineno, "non-numeric vector component") from None
            if dim is None:
                dim = len(raw_values)
            elif len(raw_values) != dim:
                raise InconsistentDimension(lineno, f"expected {dim} components, got {len(raw_values)}")
            if token in vectors:
                warnings.warn(f"duplicate token {token!r} at line {lineno}; keeping first occurrence")
                continue
            vectors[token] = values
    return VectorTable(vectors=vectors, dim=dim or 0)
