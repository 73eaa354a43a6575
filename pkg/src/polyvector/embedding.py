"""Embedding providers, Matryoshka truncation and the on-disk vector cache."""

from __future__ import annotations

import hashlib
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import httpx
import numpy as np

logger = logging.getLogger(__name__)

API_KEY_ENV = "POLYVECTOR_API_KEY"


class EmbeddingInputError(ValueError):
    pass


class ProviderError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "hash"  # "hash" (deterministic test provider) or "remote"
    endpoint: Optional[str] = None
    model_name: Optional[str] = None
    native_dim: int = 256
    target_dim: int = 256
    batch_size: int = 64
    cache_path: Optional[str] = None
    renormalize: bool = True
    seed: int = 0
    max_in_flight: int = 4
    max_retries: int = 4
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.kind not in ("hash", "remote"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.target_dim > self.native_dim:
            raise ValueError("target_dim must not exceed native_dim")
        if self.target_dim < 1 or self.batch_size < 1 or self.max_in_flight < 1:
            raise ValueError("dimensions, batch size and in-flight limit must be positive")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote provider needs an endpoint")

    def fingerprint(self) -> str:
        """Identity of the vectors this config produces (cache key prefix)."""
        model = self.model_name or (f"hash-ngram-1-3-p{HASH_PROBES}" if self.kind == "hash" else "")
        parts = [self.kind, model, str(self.target_dim), "renorm" if self.renormalize else "raw"]
        if self.kind == "hash":
            parts.append(f"seed{self.seed}")
        return "|".join(parts)

    def public_dict(self) -> dict:
        """Serializable config without the cache location."""
        data = asdict(self)
        data.pop("cache_path")
        return data


def truncate(vectors: np.ndarray, dim: int, renormalize: bool = True) -> np.ndarray:
    """Keep the first ``dim`` components; rescale each row to unit length."""
    out = np.asarray(vectors, dtype=np.float64)[..., :dim].copy()
    if renormalize:
        norms = np.linalg.norm(out, axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise ProviderError("cannot renormalize a zero vector")
        out /= norms
    return out


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        raise ValueError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / denom, -1.0, 1.0))


# --- deterministic provider -------------------------------------------------

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def _ngrams(text: str, max_n: int = 3) -> list[str]:
    tokens = _TOKEN_RE.findall(text.lower())
    grams = []
    for n in range(1, max_n + 1):
        grams.extend("\x1f".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return grams


HASH_PROBES = 4


def hash_embed(text: str, dim: int = 256, seed: int = 0) -> np.ndarray:
    """Signed feature hashing of 1-3 gram counts, L2 normalized.

    Each n-gram adds +-1 to ``HASH_PROBES`` buckets, so one bucket collision
    between unrelated strings moves the cosine by a fraction of what a single
    probe would. Strings sharing many n-grams get high cosine; identical
    strings get exactly 1.0.
    """
    vec = np.zeros(dim, dtype=np.float64)
    salt = seed.to_bytes(8, "little", signed=False)
    for gram in _ngrams(text):
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8 * HASH_PROBES, salt=salt).digest()
        for p in range(HASH_PROBES):
            h = int.from_bytes(digest[8 * p:8 * p + 8], "little")
            vec[h % dim] += 1.0 if (h >> 63) & 1 else -1.0
    norm = np.linalg.norm(vec)
    if norm == 0:
        # every probe cancelled out; fall back to a single bucket per text
        h = int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8, salt=salt).digest(), "little")
        vec[h % dim] = 1.0
        norm = 1.0
    return vec / norm


# --- cache ------------------------------------------------------------------


class VectorCache:
    """Content-addressed store: one ``.npy`` file per (provider, text)."""

    def __init__(self, path: Optional[str] = None) -> None:
        self.path = Path(path) if path else None
        self._memory: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(fingerprint: str, text: str) -> str:
        return hashlib.sha256(f"{fingerprint}\x00{text}".encode("utf-8")).hexdigest()

    def _file(self, key: str) -> Path:
        return self.path / key[:2] / f"{key}.npy"

    def get(self, key: str) -> Optional[np.ndarray]:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        if self.path is None:
            return None
        f = self._file(key)
        if not f.exists():
            return None
        vec = np.load(f)
        with self._lock:
            self._memory[key] = vec
        return vec

    def put(self, key: str, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=np.float64)
        with self._lock:
            self._memory[key] = vec
        if self.path is not None:
            f = self._file(key)
            f.parent.mkdir(exist_ok=True)
            tmp = f.with_suffix(f".{threading.get_ident()}.tmp")
            with open(tmp, "wb") as fh:
                np.save(fh, vec)
            os.replace(tmp, f)


# --- providers --------------------------------------------------------------


class Embedder:
    """Turns strings into unit vectors through the configured provider, with caching."""

    def __init__(self, config: ProviderConfig, client: Optional[httpx.Client] = None) -> None:
        self.config = config
        self.cache = VectorCache(config.cache_path)
        self._client = client

    @property
    def dim(self) -> int:
        return self.config.target_dim

    def embed_batch(self, inputs: Sequence[str]) -> np.ndarray:
        if not inputs:
            raise EmbeddingInputError("inputs must be non-empty")
        for i, text in enumerate(inputs):
            if not isinstance(text, str) or not text.strip():
                raise EmbeddingInputError(f"input {i} is blank")

        fp = self.config.fingerprint()
        keys = [VectorCache.key(fp, t) for t in inputs]
        out: list[Optional[np.ndarray]] = [self.cache.get(k) for k in keys]
        missing = sorted({t for t, v in zip(inputs, out) if v is None})
        if missing:
            fresh = dict(zip(missing, self._compute(missing)))
            for i, text in enumerate(inputs):
                if out[i] is None:
                    self.cache.put(keys[i], fresh[text])
                    out[i] = self.cache.get(keys[i])
        return np.vstack(out)

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def _compute(self, texts: list[str]) -> list[np.ndarray]:
        cfg = self.config
        if cfg.kind == "hash":
            # hashed features carry no Matryoshka ordering, so project straight to the target size
            return [hash_embed(t, cfg.target_dim, cfg.seed) for t in texts]
        batches = [texts[i:i + cfg.batch_size] for i in range(0, len(texts), cfg.batch_size)]
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            results = list(pool.map(self._remote_batch, batches))
        return [row for batch in results for row in batch]

    def _remote_batch(self, texts: list[str]) -> list[np.ndarray]:
        cfg = self.config
        payload = {"model": cfg.model_name, "inputs": texts, "dimensions": cfg.native_dim}
        headers = {}
        if os.environ.get(API_KEY_ENV):
            headers["Authorization"] = f"Bearer {os.environ[API_KEY_ENV]}"
        client = self._client or httpx.Client(timeout=cfg.timeout)
        delay = 0.5
        try:
            for attempt in range(cfg.max_retries + 1):
                try:
                    resp = client.post(cfg.endpoint, json=payload, headers=headers)
                    resp.raise_for_status()
                    vectors = np.asarray(resp.json()["vectors"], dtype=np.float64)
                    break
                except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                    status = exc.response.status_code if isinstance(exc, httpx.HTTPStatusError) else None
                    if status is not None and status < 500 and status != 429:
                        raise ProviderError(f"embedding request rejected: {exc}") from exc
                    if attempt == cfg.max_retries:
                        raise ProviderError(f"embedding request failed: {exc}") from exc
                    logger.warning("embedding request failed (%s), retrying in %.1fs", exc, delay)
                    time.sleep(delay)
                    delay *= 2
                except (KeyError, ValueError, TypeError) as exc:
                    raise ProviderError(f"malformed embedding response: {exc}") from exc
        finally:
            if self._client is None:
                client.close()
        if vectors.ndim != 2 or vectors.shape[0] != len(texts) or vectors.shape[1] < cfg.target_dim:
            raise ProviderError(f"unexpected vector block shape {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise ProviderError("non-finite values in embedding response")
        return list(truncate(vectors, cfg.target_dim, cfg.renormalize))


def embed_batch(inputs: Sequence[str], cfg: ProviderConfig) -> np.ndarray:
    return Embedder(cfg).embed_batch(inputs)
