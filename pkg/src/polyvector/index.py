"""Unified embedding space with payload mapping, exact kNN and persistence.

Directory layout written by :meth:`PolyIndex.save`::

    manifest.json    method, record count, dim, dtype, provider fingerprint
    vectors.bin      record_count x dim little-endian floats, row-major
    records.jsonl    one metadata object per vector row, same order
    chunks.jsonl     payload chunks (text, token count, unit lineage)
"""

from __future__ import annotations

import json
import shutil
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .chunking import (
    Chunk,
    ReferenceRecord,
    chunk_blind,
    chunk_flat,
    chunk_multilayer,
    make_reference_records,
)
from .document_model import LegalTree, NormIdentity, UnitKind
from .embedding import Embedder
from .ingestion import enumerate_units
from .tokenizer import Tokenizer

FORMAT_VERSION = 1

# similarities equal to this many decimals are ties; floating-point noise in
# mathematically equal cosines must not decide the order
TIE_DECIMALS = 12


def tie_rounded(sims):
    return np.round(np.asarray(sims, dtype=np.float64), TIE_DECIMALS)


class IndexStoreError(LookupError):
    """Empty or inconsistent index."""


@dataclass(frozen=True)
class MethodConfig:
    method_id: str
    name: str
    strategy: str  # blind | flat | multilayer
    poly: bool
    normalize: bool
    window: int = 800
    overlap: int = 400


METHODS = {
    m.method_id: m
    for m in (
        MethodConfig("a", "Blind Segmentation Baseline", "blind", False, False),
        MethodConfig("b", "Flat Per-Article Baseline", "flat", False, False),
        MethodConfig("c", "Multi-layer Hierarchical Embeddings", "multilayer", False, False),
        MethodConfig("d", "Multi-layer + Query Normalization", "multilayer", False, True),
        MethodConfig("e", "Poly-Vector + Blind", "blind", True, False),
        MethodConfig("f", "Poly-Vector + Flat", "flat", True, False),
        MethodConfig("g", "Poly-Vector + Multi-layer", "multilayer", True, False),
        MethodConfig("h", "Poly-Vector + Multi-layer + Q. Norm.", "multilayer", True, True),
    )
}


def get_method(method_id: str) -> MethodConfig:
    try:
        return METHODS[method_id]
    except KeyError:
        raise ValueError(f"unknown method {method_id!r}; expected one of {''.join(METHODS)}") from None


@dataclass(frozen=True)
class EmbeddingRecord:
    record_id: str
    tag: str
    payload_chunk_id: str
    display_label: str
    token_count: int
    urn: Optional[str] = None


@dataclass(frozen=True)
class IndexManifest:
    method_id: str
    strategy: str
    poly: bool
    record_count: int
    chunk_count: int
    dim: int
    dtype: str
    provider: str
    provider_config: dict
    tokenizer: str
    format_version: int = FORMAT_VERSION


def _reference_display(ref: ReferenceRecord) -> str:
    if ref.tag == "LBL":
        return ref.payload.display_label
    if ref.tag == "URN":
        return ref.payload.urn or ""
    return f"{ref.payload.urn}, {ref.payload.display_label}"


class PolyIndex:
    def __init__(
        self,
        manifest: IndexManifest,
        records: list[EmbeddingRecord],
        vectors: np.ndarray,
        chunks: dict[str, Chunk],
    ) -> None:
        if len(records) != vectors.shape[0] or manifest.record_count != len(records):
            raise IndexStoreError("record count does not match stored vectors")
        missing = {r.payload_chunk_id for r in records} - chunks.keys()
        if missing:
            raise IndexStoreError(f"records point at unknown chunks: {sorted(missing)[:3]}")
        self.manifest = manifest
        self.records = records
        self.vectors = vectors
        self.chunks = chunks
        self._norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        self._tokens = np.array([r.token_count for r in records], dtype=np.int64)
        # rank of each record id in lexicographic order, for the tie-break
        order = sorted(range(len(records)), key=lambda i: records[i].record_id)
        self._id_rank = np.empty(len(records), dtype=np.int64)
        self._id_rank[order] = np.arange(len(records))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dim(self) -> int:
        return self.manifest.dim

    def similarities(self, query: np.ndarray) -> np.ndarray:
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query has shape {q.shape}, index dim is {self.dim}")
        qn = np.linalg.norm(q)
        if qn == 0:
            raise ValueError("zero query vector")
        return (self.vectors.astype(np.float64) @ q) / (self._norms * qn)

    def knn(self, query: np.ndarray, k: int) -> list[tuple[EmbeddingRecord, float]]:
        """Exact top-k by cosine, descending.

        Similarities equal to ``TIE_DECIMALS`` places are ties; ties go to
        the larger payload first, then the smaller record id.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.records:
            raise IndexStoreError("index is empty")
        sims = self.similarities(query)
        order = np.lexsort((self._id_rank, -self._tokens, -tie_rounded(sims)))[:k]
        return [(self.records[i], float(sims[i])) for i in order]

    # --- persistence --------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        """Write atomically: build in a sibling temp dir, then swap in."""
        directory = Path(directory)
        directory.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{directory.name}.", dir=directory.parent))
        try:
            (tmp / "manifest.json").write_text(
                json.dumps(asdict(self.manifest), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            dtype = np.dtype(self.manifest.dtype).newbyteorder("<")
            (tmp / "vectors.bin").write_bytes(np.ascontiguousarray(self.vectors, dtype=dtype).tobytes())
            with open(tmp / "records.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                for r in self.records:
                    fh.write(json.dumps(asdict(r), sort_keys=True, ensure_ascii=False) + "\n")
            with open(tmp / "chunks.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                for cid in sorted(self.chunks):
                    fh.write(json.dumps(self.chunks[cid].to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
            if directory.exists():
                shutil.rmtree(directory)
            tmp.rename(directory)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        return directory

    @classmethod
    def load(cls, directory: str | Path) -> "PolyIndex":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise FileNotFoundError(f"no index manifest in {directory}")
        manifest = IndexManifest(**json.loads(manifest_path.read_text(encoding="utf-8")))
        dtype = np.dtype(manifest.dtype).newbyteorder("<")
        raw = np.frombuffer((directory / "vectors.bin").read_bytes(), dtype=dtype)
        vectors = raw.reshape(manifest.record_count, manifest.dim).astype(manifest.dtype)
        with open(directory / "records.jsonl", encoding="utf-8") as fh:
            records = [EmbeddingRecord(**json.loads(line)) for line in fh]
        with open(directory / "chunks.jsonl", encoding="utf-8") as fh:
            chunks = {c.id: c for c in (Chunk.from_dict(json.loads(line)) for line in fh)}
        return cls(manifest, records, vectors, chunks)


def build_index(
    chunks: Sequence[Chunk],
    reference_records: Sequence[ReferenceRecord],
    embedder: Embedder,
    method: MethodConfig,
    tokenizer_name: str = "simple",
    dtype: str = "float64",
    out_dir: Optional[str | Path] = None,
) -> PolyIndex:
    """Embed content chunks and reference records into one index.

    Content records come first, in chunk order, then reference records.
    """
    if not chunks:
        raise ValueError("chunk set must be non-empty")
    payloads: dict[str, Chunk] = {c.id: c for c in chunks}
    for ref in reference_records:
        payloads.setdefault(ref.payload.id, ref.payload)

    records: list[EmbeddingRecord] = []
    inputs: list[str] = []
    for chunk in chunks:
        records.append(
            EmbeddingRecord(
                record_id=f"r{len(records):06d}",
                tag=chunk.tag,
                payload_chunk_id=chunk.id,
                display_label=chunk.display_label,
                token_count=chunk.token_count,
                urn=chunk.urn,
            )
        )
        inputs.append(chunk.embed_input)
    for ref in reference_records:
        records.append(
            EmbeddingRecord(
                record_id=f"r{len(records):06d}",
                tag=ref.tag,
                payload_chunk_id=ref.payload.id,
                display_label=_reference_display(ref),
                token_count=ref.payload.token_count,
                urn=ref.payload.urn,
            )
        )
        inputs.append(ref.embed_input)

    vectors = embedder.embed_batch(inputs).astype(dtype)
    manifest = IndexManifest(
        method_id=method.method_id,
        strategy=method.strategy,
        poly=method.poly,
        record_count=len(records),
        chunk_count=len(payloads),
        dim=embedder.dim,
        dtype=dtype,
        provider=embedder.config.fingerprint(),
        provider_config=embedder.config.public_dict(),
        tokenizer=tokenizer_name,
    )
    index = PolyIndex(manifest, records, vectors, payloads)
    if out_dir is not None:
        index.save(out_dir)
    return index


def method_inputs(
    tree: LegalTree,
    norm: NormIdentity,
    method: MethodConfig,
    tokenizer: Optional[Tokenizer] = None,
    label_style: str = "long",
) -> tuple[list[Chunk], list[ReferenceRecord]]:
    """Content chunks and reference records for one of the eight methods."""
    if method.strategy == "blind":
        chunks = chunk_blind(tree, method.window, method.overlap, tokenizer)
    elif method.strategy == "flat":
        chunks = chunk_flat(tree, norm, tokenizer)
    else:
        chunks = chunk_multilayer(tree, norm, tokenizer)
    refs = []
    if method.poly:
        units = enumerate_units(tree, set(UnitKind))
        refs = make_reference_records(units, tree, norm, tokenizer, label_style=label_style)
    return chunks, refs


def build_method_index(
    tree: LegalTree,
    norm: NormIdentity,
    method: MethodConfig,
    embedder: Embedder,
    tokenizer: Optional[Tokenizer] = None,
    **kwargs,
) -> PolyIndex:
    chunks, refs = method_inputs(tree, norm, method, tokenizer)
    name = getattr(tokenizer, "name", "simple")
    return build_index(chunks, refs, embedder, method, tokenizer_name=name, **kwargs)
