"""Shared fixtures: sample datasets, mock transports, and a local HTTP stub."""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable

import pytest

from hintkit.clients import ChatClient, EmbeddingClient, TransportReply
from hintkit.model import (
    Answer,
    Dataset,
    Entity,
    EntityLabel,
    Hint,
    Instance,
    MetricResult,
    QTypeMajor,
    Question,
    QuestionType,
    Subset,
)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch, tmp_path):
    """Isolate tests from ambient hintkit configuration and caches."""
    for var in ("HINTKIT_CHAT_URL", "HINTKIT_CHAT_KEY", "HINTKIT_EMBED_URL",
                "HINTKIT_EMBED_KEY", "HINTKIT_OFFLINE"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("HINTKIT_CONFIG", str(tmp_path / "no-config.toml"))
    monkeypatch.setenv("HINTKIT_CACHE_DIR", str(tmp_path / "hintkit-cache"))


# --- mock transports -------------------------------------------------------

class ScriptedTransport:
    """Replays canned (status, payload) replies in order and records calls."""

    def __init__(self, replies: list[Any]):
        self.replies = list(replies)
        self.calls: list[dict[str, Any]] = []

    def request(self, method, url, *, json_body=None, headers=None, raw=False):
        self.calls.append({"method": method, "url": url, "body": json_body,
                           "headers": headers, "raw": raw})
        item = self.replies.pop(0)
        if isinstance(item, Exception):
            raise item
        status, payload = item
        return TransportReply(status, payload)


class FnTransport:
    """Computes each reply from the request; handy for deterministic mocks."""

    def __init__(self, fn: Callable[[str, str, Any], tuple[int, Any]]):
        self.fn = fn
        self.calls: list[dict[str, Any]] = []

    def request(self, method, url, *, json_body=None, headers=None, raw=False):
        self.calls.append({"method": method, "url": url, "body": json_body, "raw": raw})
        status, payload = self.fn(method, url, json_body)
        return TransportReply(status, payload)


def chat_payload(text: str) -> dict:
    return {"choices": [{"message": {"content": text}}]}


def scripted_chat(replies: list[str], **kwargs) -> ChatClient:
    """Chat client replaying fixed completion texts, no sleeping."""
    transport = ScriptedTransport([(200, chat_payload(r)) for r in replies])
    return ChatClient("http://mock", transport=transport, sleep=lambda s: None, **kwargs)


def fn_chat(fn: Callable[[list[dict]], str], **kwargs) -> ChatClient:
    """Chat client whose completion is a function of the request messages."""
    transport = FnTransport(lambda m, u, body: (200, chat_payload(fn(body["messages"]))))
    return ChatClient("http://mock", transport=transport, sleep=lambda s: None, **kwargs)


def fn_embedder(fn: Callable[[str], list[float]], batch_size: int = 100, **kwargs) -> EmbeddingClient:
    """Embedding client mapping each text through ``fn``."""

    def reply(method, url, body):
        data = [{"index": i, "embedding": fn(t)} for i, t in enumerate(body["input"])]
        return 200, {"data": data}

    transport = FnTransport(reply)
    client = EmbeddingClient("http://mock", transport=transport, batch_size=batch_size,
                             sleep=lambda s: None, **kwargs)
    client.transport_mock = transport
    return client


# --- dataset fixtures ---------------------------------------------------------

def make_instance(question: str, answers: list[str], hints: list[str]) -> Instance:
    return Instance(
        question=Question(text=question),
        answers=[Answer(text=a) for a in answers],
        hints=[Hint(text=h, source="human") for h in hints],
    )


def make_fixture_dataset() -> Dataset:
    """Two instances, each one question / two answers / three hints."""
    ds = Dataset(name="fixture", version="1.0", url="https://example.org/fixture",
                 description="two-instance test fixture")
    subset = Subset(name="test")
    subset.instances["q1"] = make_instance(
        "Who wrote the novel Moby-Dick?",
        ["Herman Melville", "Melville"],
        [
            "He was an American writer born in 1819.",
            "His most famous book features a white whale.",
            "He also wrote Billy Budd.",
        ],
    )
    subset.instances["q2"] = make_instance(
        "Which country is the city of Innsbruck located in?",
        ["Austria", "Republic of Austria"],
        [
            "The country lies in the Alps.",
            "Its capital is Vienna.",
            "Mozart was born there.",
        ],
    )
    ds.add_subset(subset)
    return ds


@pytest.fixture
def fixture_dataset() -> Dataset:
    return make_fixture_dataset()


# --- random (but always valid) datasets -----------------------------------

_WORDS = ("alpha", "bravo", "Carbon", "delta", "Echo", "fox", "golf", "Hotel",
          "india", "Jumbo", "kilo", "Lima", "1964", "onyx", "Prague", "quartz")


def _random_text(rng: random.Random, lo: int = 1, hi: int = 8) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(lo, hi)))


def _random_entities(rng: random.Random, text: str) -> list[Entity]:
    entities = []
    for _ in range(rng.randint(0, 2)):
        start = rng.randrange(0, len(text))
        end = rng.randint(start + 1, len(text))
        entities.append(Entity(text=text[start:end], label=rng.choice(list(EntityLabel)),
                               start_index=start, end_index=end))
    return entities


def _random_metrics(rng: random.Random) -> dict[str, MetricResult]:
    metrics = {}
    if rng.random() < 0.7:
        name = rng.choice(["relevance/rouge/rouge1", "convergence/llm",
                           "familiarity/wordfreq/nostop", "answerleakage/lexical/stop"])
        metrics[name] = MetricResult(name=name, value=rng.random(),
                                     detail={"note": _random_text(rng, 1, 2)} if rng.random() < 0.3 else None)
    if rng.random() < 0.4:
        name = "readability/traditional/" + rng.choice(["flesch", "ari"])
        metrics[name] = MetricResult(name=name, value=float(rng.randint(0, 2)),
                                     detail={"raw": rng.uniform(-60.0, 120.0)})
    if rng.random() < 0.2:
        metrics["custom/score"] = MetricResult(name="custom/score", value=rng.uniform(-5, 5))
    return metrics


def random_dataset(rng: random.Random) -> Dataset:
    """A structurally valid dataset with randomized contents."""
    ds = Dataset(
        name=f"ds-{rng.randint(0, 999)}",
        version=f"{rng.randint(0, 3)}.{rng.randint(0, 9)}",
        url=rng.choice(["", "https://example.org/repo"]),
        description=_random_text(rng, 0, 5),
        metadata={"seeded": True, "tags": [_random_text(rng, 1, 2)]} if rng.random() < 0.5 else {},
    )
    for s in range(rng.randint(0, 3)):
        subset = Subset(name=f"subset{s}",
                        metadata={"idx": s} if rng.random() < 0.3 else {})
        for q in range(rng.randint(0, 4)):
            question = Question(text=_random_text(rng), entities=[], metrics=_random_metrics(rng))
            question.entities = _random_entities(rng, question.text)
            if rng.random() < 0.5:
                question.question_type = QuestionType(major=rng.choice(list(QTypeMajor)),
                                                      minor=rng.choice(["HUM:ind", "unknown"]))
            answers = []
            for _ in range(rng.randint(0, 2)):
                answer = Answer(text=_random_text(rng, 1, 3), metrics=_random_metrics(rng))
                answer.entities = _random_entities(rng, answer.text)
                answers.append(answer)
            hints = []
            for _ in range(rng.randint(0, 4)):
                hint = Hint(text=_random_text(rng), source=rng.choice(["human", "model:m/x"]),
                            metrics=_random_metrics(rng))
                hint.entities = _random_entities(rng, hint.text)
                if rng.random() < 0.3:
                    hint.metadata = {"rank": rng.randint(1, 5)}
                hints.append(hint)
            subset.instances[f"q{q}"] = Instance(question=question, answers=answers, hints=hints,
                                                 metadata={"k": "v"} if rng.random() < 0.2 else {})
        ds.add_subset(subset)
    return ds


# --- local HTTP stub ---------------------------------------------------------------

class StubServer:
    """Minimal loopback HTTP server with per-path canned or computed replies.

    Routes map a path to either ``(status, bytes, content_type)`` or a
    callable ``(method, body_bytes) -> (status, bytes, content_type)``.
    """

    def __init__(self):
        self.routes: dict[str, Any] = {}
        self.requests: list[tuple[str, str]] = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def _serve(self, method: str) -> None:
                stub.requests.append((method, self.path))
                route = stub.routes.get(self.path)
                if route is None:
                    self.send_response(404)
                    self.send_header("Content-Type", "application/json")
                    self.end_headers()
                    self.wfile.write(b"{}")
                    return
                if callable(route):
                    length = int(self.headers.get("Content-Length") or 0)
                    body = self.rfile.read(length) if length else b""
                    status, payload, ctype = route(method, body)
                else:
                    status, payload, ctype = route
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def do_GET(self):
                self._serve("GET")

            def do_POST(self):
                self._serve("POST")

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        self.url = f"http://127.0.0.1:{self._server.server_address[1]}"

    def add_json(self, path: str, obj: Any, status: int = 200) -> None:
        self.routes[path] = (status, json.dumps(obj).encode("utf-8"), "application/json")

    def add_bytes(self, path: str, data: bytes, status: int = 200) -> None:
        self.routes[path] = (status, data, "application/octet-stream")

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def http_stub():
    server = StubServer()
    yield server
    server.close()
