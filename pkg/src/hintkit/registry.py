"""Remote registry of preprocessed hint datasets.

The registry is a static JSON manifest at a configurable HTTPS URL listing
downloadable dataset archives with per-subset statistics and SHA-256
checksums.  Manifests and archives are cached under the cache directory
(``HINTKIT_CACHE_DIR`` overrides the default ``~/.cache/hintkit``);
concurrent downloads of the same dataset are serialized by a file lock.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from filelock import FileLock

from .clients import HttpTransport, Transport, TransportError
from .dataset_io import import_archive
from .errors import ChecksumMismatch, ManifestSchemaError, NetworkError, UnknownDataset
from .model import Dataset

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_SHA256_RE = re.compile(r"[0-9a-f]{64}")


def default_cache_dir() -> Path:
    env = os.environ.get("HINTKIT_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hintkit"


@dataclass
class SubsetStat:
    name: str
    finetuned: bool
    uses_answer: bool
    num_questions: int
    num_hints: int


@dataclass
class RegistryEntry:
    dataset_name: str
    subsets: list[SubsetStat]
    download_url: str
    checksum: str
    description: str = ""

    @property
    def num_questions(self) -> int:
        return sum(s.num_questions for s in self.subsets)

    @property
    def num_hints(self) -> int:
        return sum(s.num_hints for s in self.subsets)


@dataclass
class RegistryManifest:
    schema_version: int
    entries: list[RegistryEntry]
    fetched_at: str

    def entry(self, name: str) -> RegistryEntry:
        for entry in self.entries:
            if entry.dataset_name == name:
                return entry
        raise UnknownDataset(name)


def parse_manifest(doc: object, fetched_at: str = "") -> RegistryManifest:
    """Build a manifest from parsed JSON, checking the schema."""

    def fail(msg: str) -> ManifestSchemaError:
        return ManifestSchemaError(msg)

    if not isinstance(doc, dict):
        raise fail("manifest must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise fail(f"unsupported schema_version {doc.get('schema_version')!r}")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list):
        raise fail("entries must be an array")
    entries = []
    seen: set[str] = set()
    for raw in raw_entries:
        try:
            name = raw["dataset_name"]
            subsets = [
                SubsetStat(
                    name=s["name"],
                    finetuned=bool(s["finetuned"]),
                    uses_answer=bool(s["uses_answer"]),
                    num_questions=int(s["num_questions"]),
                    num_hints=int(s["num_hints"]),
                )
                for s in raw["subsets"]
            ]
            entry = RegistryEntry(
                dataset_name=name,
                subsets=subsets,
                download_url=raw["download_url"],
                checksum=str(raw["checksum"]).lower(),
                description=raw.get("description", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise fail(f"bad registry entry: {exc}") from exc
        if name in seen:
            raise fail(f"duplicate dataset name {name!r}")
        seen.add(name)
        if not _SHA256_RE.fullmatch(entry.checksum):
            raise fail(f"{name}: checksum must be 64 hex chars")
        for stat in entry.subsets:
            if stat.num_questions < 0 or stat.num_hints < 0:
                raise fail(f"{name}/{stat.name}: negative counts")
        entries.append(entry)
    return RegistryManifest(schema_version=SCHEMA_VERSION, entries=entries, fetched_at=fetched_at)


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _manifest_cache_path(cache_dir: Path) -> Path:
    return cache_dir / "registry.json"


def _load_cached_manifest(cache_dir: Path) -> RegistryManifest | None:
    path = _manifest_cache_path(cache_dir)
    if not path.exists():
        return None
    doc = json.loads(path.read_text(encoding="utf-8"))
    return parse_manifest(doc.get("manifest"), fetched_at=doc.get("fetched_at", ""))


def available_datasets(update: bool = False, cache_dir: str | Path | None = None,
                       registry_url: str | None = None,
                       transport: Transport | None = None) -> RegistryManifest:
    """Return the registry manifest, from cache when possible.

    ``update=True`` refetches from the registry URL; a fetch failure falls
    back to a warm cache with a warning, and raises :class:`NetworkError`
    only when there is no cache to fall back to.
    """
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    if not update:
        cached = _load_cached_manifest(cache_dir)
        if cached is not None:
            return cached
    if not registry_url:
        raise NetworkError("no registry URL configured")
    transport = transport or HttpTransport()
    try:
        reply = transport.request("GET", registry_url)
        if reply.status != 200:
            raise TransportError(f"HTTP {reply.status} from {registry_url}")
    except TransportError as exc:
        cached = _load_cached_manifest(cache_dir)
        if cached is not None:
            log.warning("registry fetch failed (%s); using cached manifest", exc)
            return cached
        raise NetworkError(str(exc)) from exc
    fetched_at = _now_iso()
    manifest = parse_manifest(reply.payload, fetched_at=fetched_at)
    path = _manifest_cache_path(cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    tmp.write_text(json.dumps({"fetched_at": fetched_at, "manifest": reply.payload},
                              ensure_ascii=False, indent=2), encoding="utf-8")
    os.replace(tmp, path)
    return manifest


def download_dataset(name: str, cache_dir: str | Path | None = None,
                     registry_url: str | None = None,
                     transport: Transport | None = None,
                     manifest: RegistryManifest | None = None) -> Dataset:
    """Fetch (or reuse from cache) a dataset archive, verify its checksum,
    and load it.

    A checksum failure never leaves a partial archive in the cache: bytes
    are verified before the atomic rename into place.
    """
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    if manifest is None:
        manifest = available_datasets(update=False, cache_dir=cache_dir,
                                      registry_url=registry_url, transport=transport)
    entry = manifest.entry(name)
    transport = transport or HttpTransport()

    archive_dir = cache_dir / "datasets"
    archive_dir.mkdir(parents=True, exist_ok=True)
    archive_path = archive_dir / f"{name}.hds"
    with FileLock(str(archive_path) + ".lock"):
        if archive_path.exists():
            data = archive_path.read_bytes()
            if hashlib.sha256(data).hexdigest() == entry.checksum:
                return import_archive(data)
            log.warning("cached archive for %s fails its checksum; refetching", name)
        try:
            reply = transport.request("GET", entry.download_url, raw=True)
        except TransportError as exc:
            raise NetworkError(str(exc)) from exc
        if reply.status != 200:
            raise NetworkError(f"HTTP {reply.status} from {entry.download_url}")
        data = reply.payload
        if not isinstance(data, (bytes, bytearray)):
            data = str(data).encode("utf-8")
        digest = hashlib.sha256(data).hexdigest()
        if digest != entry.checksum:
            raise ChecksumMismatch(f"{name}: expected {entry.checksum}, got {digest}")
        tmp = archive_path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_bytes(data)
        os.replace(tmp, archive_path)
    return import_archive(bytes(data))
