"""Text embeddings and role-aware node construction.

Turn texts are embedded by a pluggable provider (a deterministic
hash-projection provider for hermetic runs, or a remote embedding
endpoint). A node vector for a turn is the concatenation of its frozen
text embedding with a trainable projected role embedding, keyed by the
(role, stance) pair so the two teams' rebutters stay distinguishable.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import DebateRole, DebateTurn, Stance
from .gateway import API_KEY_ENV, MalformedResponseError, TransportError, _urllib_transport

# Fixed ordering of the trainable role vectors.
ROLE_STANCE_PAIRS = tuple((role, stance) for role in DebateRole for stance in Stance)
ROLE_PAIR_INDEX = {pair: i for i, pair in enumerate(ROLE_STANCE_PAIRS)}


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("embedding must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


_TOKEN_RE = re.compile(r"[\w']+")


class HashEmbeddingProvider:
    """Deterministic test-grade embedder.

    Each token gets a fixed pseudo-random basis vector derived from a
    salted hash of the token; a text embeds to the L2-normalized,
    count-weighted sum of its tokens' bases. Same text, same vector, on
    every platform.
    """

    def __init__(self, dim: int = 384, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed
        self.provider_id = f"hash-d{dim}-s{seed}"
        self._basis: dict[str, np.ndarray] = {}

    def _token_basis(self, token: str) -> np.ndarray:
        basis = self._basis.get(token)
        if basis is None:
            digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
            basis = rng.standard_normal(self.dim)
            self._basis[token] = basis
        return basis

    def embed_text(self, text: str) -> EmbeddingVector:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            tokens = [text]
        vec = np.zeros(self.dim)
        # Canonical summation order: equal token multisets embed to
        # bit-identical vectors regardless of word order.
        for token, count in sorted(Counter(tokens).items()):
            vec += count * self._token_basis(token)
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        return EmbeddingVector(vec, self.provider_id)


class RemoteEmbeddingProvider:
    """Embedding endpoint client: POSTs to <endpoint>/embeddings and
    reads data[0].embedding, checking the configured dimension."""

    def __init__(self, endpoint: str, dim: int, model: str = "text-embedding-3-small",
                 api_key: str | None = None, timeout: float = 60.0, transport=None):
        if not endpoint:
            raise ValueError("remote provider needs an endpoint URL")
        self.endpoint = endpoint.rstrip("/")
        self.dim = dim
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.transport = transport or _urllib_transport
        self.provider_id = f"remote:{model}-d{dim}"

    def embed_text(self, text: str) -> EmbeddingVector:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        body = json.dumps({"model": self.model, "input": text}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        status, payload = self.transport(f"{self.endpoint}/embeddings", body, headers, self.timeout)
        if status >= 500:
            raise TransportError(f"embedding endpoint returned {status}")
        if status != 200:
            raise MalformedResponseError(f"embedding endpoint returned {status}")
        try:
            values = json.loads(payload.decode("utf-8"))["data"][0]["embedding"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"could not parse embedding payload: {exc}") from exc
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise MalformedResponseError(
                f"embedding dimension {vec.shape} does not match configured {self.dim}"
            )
        return EmbeddingVector(vec, self.provider_id)


# --------------------------------------------------------------------------
# On-disk vector storage: little-endian float32 payload + JSON sidecar
# --------------------------------------------------------------------------


def write_f32(path: Path, array: np.ndarray, meta: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(array, dtype="<f4")
    path.write_bytes(data.tobytes())
    sidecar = dict(meta)
    sidecar["shape"] = list(array.shape)
    path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True), encoding="utf-8")


def read_f32(path: Path) -> tuple[np.ndarray, dict]:
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    flat = np.frombuffer(path.read_bytes(), dtype="<f4").astype(np.float64)
    return flat.reshape(meta["shape"]), meta


class EmbeddingCache:
    """Disk cache keyed by (provider_id, text digest)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, provider_id: str, text: str) -> Path:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        safe = re.sub(r"[^\w.-]", "_", provider_id)
        return self.root / safe / f"{digest}.f32"

    def get(self, provider_id: str, text: str) -> np.ndarray | None:
        path = self._path(provider_id, text)
        if not path.exists():
            return None
        values, meta = read_f32(path)
        if meta.get("provider_id") != provider_id:
            return None
        return values

    def put(self, provider_id: str, text: str, values: np.ndarray) -> None:
        path = self._path(provider_id, text)
        write_f32(path, values, {"dim": int(values.shape[0]), "provider_id": provider_id})


class CachedEmbedder:
    """Wrap a provider with the disk cache.

    Vectors are round-tripped through float32 even on a cache miss so
    cached and freshly computed embeddings are bit-identical.
    """

    def __init__(self, provider, cache: EmbeddingCache | None = None):
        self.provider = provider
        self.cache = cache
        self.provider_id = provider.provider_id
        self.dim = provider.dim

    def embed_text(self, text: str) -> EmbeddingVector:
        if self.cache is not None:
            hit = self.cache.get(self.provider_id, text)
            if hit is not None:
                return EmbeddingVector(hit, self.provider_id)
        vec = self.provider.embed_text(text)
        rounded = np.asarray(vec.values, dtype="<f4").astype(np.float64)
        if self.cache is not None:
            self.cache.put(self.provider_id, text, rounded)
        return EmbeddingVector(rounded, self.provider_id)


# --------------------------------------------------------------------------
# Role-aware nodes
# --------------------------------------------------------------------------


class RoleTable:
    """Trainable role vocabulary: one vector per (role, stance) pair plus
    the projection that lifts role vectors to the embedding dimension."""

    def __init__(self, embeddings: np.ndarray, projection: np.ndarray):
        embeddings = np.asarray(embeddings, dtype=np.float64)
        projection = np.asarray(projection, dtype=np.float64)
        if embeddings.shape[0] != len(ROLE_STANCE_PAIRS):
            raise ValueError(
                f"role table must cover all {len(ROLE_STANCE_PAIRS)} (role, stance) pairs"
            )
        if projection.shape[1] != embeddings.shape[1]:
            raise ValueError("projection columns must match role vector dimension")
        if not (np.all(np.isfinite(embeddings)) and np.all(np.isfinite(projection))):
            raise ValueError("role table parameters must be finite")
        self.embeddings = embeddings  # (num_pairs, d_r)
        self.projection = projection  # (d_h, d_r)

    @classmethod
    def create(cls, d_h: int, d_r: int, rng: np.random.Generator) -> "RoleTable":
        scale = 0.1
        embeddings = rng.uniform(-scale, scale, size=(len(ROLE_STANCE_PAIRS), d_r))
        projection = rng.uniform(-scale, scale, size=(d_h, d_r))
        return cls(embeddings, projection)

    @property
    def d_h(self) -> int:
        return int(self.projection.shape[0])

    @property
    def d_r(self) -> int:
        return int(self.projection.shape[1])

    @staticmethod
    def index_of(role: DebateRole, stance: Stance) -> int:
        try:
            return ROLE_PAIR_INDEX[(role, stance)]
        except KeyError as exc:
            raise KeyError(f"unknown (role, stance) pair: ({role}, {stance})") from exc

    def projected_role(self, role: DebateRole, stance: Stance) -> np.ndarray:
        return self.projection @ self.embeddings[self.index_of(role, stance)]


def build_node(turn: DebateTurn, emb: EmbeddingVector, table: RoleTable) -> np.ndarray:
    """Concatenate the turn's text embedding with its projected role
    vector; output has twice the embedding dimension."""
    if emb.dim != table.d_h:
        raise ValueError(
            f"embedding dimension {emb.dim} does not match role projection rows {table.d_h}"
        )
    return np.concatenate([emb.values, table.projected_role(turn.role, turn.stance)])
