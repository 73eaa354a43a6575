"""Content chunk sets (blind, flat, multi-layer) and reference records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .document_model import (
    LegalTree,
    NormIdentity,
    StructuralUnit,
    StructureError,
    UnitKind,
    build_identifier_plus_label,
    build_label,
    build_urn,
)
from .ingestion import enumerate_units
from .tokenizer import SimpleTokenizer, Tokenizer

CONTENT_TAGS = ("Blind", "ART", "CPT", "PAR", "INC", "ALI", "SEC", "SUB", "CAP", "TIT", "DOC")
REFERENCE_TAGS = ("LBL", "URN", "I+L")


class ChunkingError(ValueError):
    pass


@dataclass(frozen=True)
class Chunk:
    id: str
    text: str
    token_count: int
    tag: str
    display_label: str
    embed_input: str
    unit_id: Optional[str] = None
    window_index: Optional[int] = None
    urn: Optional[str] = None
    ancestors: tuple[str, ...] = field(default=())  # unit ids, nearest first

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tag": self.tag,
            "display_label": self.display_label,
            "token_count": self.token_count,
            "unit_id": self.unit_id,
            "window_index": self.window_index,
            "urn": self.urn,
            "ancestors": list(self.ancestors),
            "text": self.text,
            "embed_input": self.embed_input,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "Chunk":
        return cls(
            id=row["id"],
            text=row["text"],
            token_count=row["token_count"],
            tag=row["tag"],
            display_label=row["display_label"],
            embed_input=row["embed_input"],
            unit_id=row["unit_id"],
            window_index=row["window_index"],
            urn=row["urn"],
            ancestors=tuple(row["ancestors"]),
        )


@dataclass(frozen=True)
class ReferenceRecord:
    payload: Chunk
    tag: str
    embed_input: str


def blind_windows(n_tokens: int, window: int, overlap: int) -> list[tuple[int, int]]:
    """Token ranges of sliding windows; a trailing partial window is kept."""
    if window <= overlap or overlap < 0:
        raise ChunkingError(f"window ({window}) must exceed overlap ({overlap}) >= 0")
    stride = window - overlap
    return [(start, min(start + window, n_tokens)) for start in range(0, n_tokens, stride)]


def chunk_blind(
    tree: LegalTree, window: int = 800, overlap: int = 400, tokenizer: Optional[Tokenizer] = None
) -> list[Chunk]:
    tokenizer = tokenizer or SimpleTokenizer()
    text = tree.root.full_text
    spans = tokenizer.spans(text)
    chunks = []
    for i, (start, stop) in enumerate(blind_windows(len(spans), window, overlap), start=1):
        body = text[spans[start][0]:spans[stop - 1][1]]
        chunks.append(
            Chunk(
                id=f"blind:{i:05d}",
                text=body,
                token_count=stop - start,
                tag="Blind",
                display_label=f"Chunk #{i}",
                embed_input=body,
                window_index=i,
            )
        )
    return chunks


def unit_chunk(
    unit: StructuralUnit, tree: LegalTree, norm: NormIdentity, tokenizer: Optional[Tokenizer] = None
) -> Chunk:
    """The content chunk of one structural unit (its full text)."""
    tokenizer = tokenizer or SimpleTokenizer()
    count = tokenizer.count(unit.full_text)
    if count < 1:
        raise ChunkingError(f"unit {unit.id} has no text")
    return Chunk(
        id=f"unit:{unit.id}",
        text=unit.full_text,
        token_count=count,
        tag=unit.kind.content_tag,
        display_label=build_label(unit, tree, norm).display,
        embed_input=unit.full_text,
        unit_id=unit.id,
        urn=build_urn(unit, tree, norm).value,
        ancestors=tuple(u.id for u in tree.ancestors(unit.id)),
    )


def chunk_flat(tree: LegalTree, norm: NormIdentity, tokenizer: Optional[Tokenizer] = None) -> list[Chunk]:
    return [unit_chunk(u, tree, norm, tokenizer) for u in enumerate_units(tree, {UnitKind.ARTICLE})]


def chunk_multilayer(tree: LegalTree, norm: NormIdentity, tokenizer: Optional[Tokenizer] = None) -> list[Chunk]:
    return [unit_chunk(u, tree, norm, tokenizer) for u in enumerate_units(tree, set(UnitKind))]


def make_reference_records(
    units: list[StructuralUnit],
    tree: LegalTree,
    norm: NormIdentity,
    tokenizer: Optional[Tokenizer] = None,
    label_style: str = "long",
) -> list[ReferenceRecord]:
    """Three reference records (LBL, URN, I+L) per unit, all pointing at the unit's text."""
    records = []
    for unit in units:
        try:
            urn = build_urn(unit, tree, norm).value
        except StructureError as exc:
            raise StructureError(f"unit {unit.id} has no URN: {exc}") from exc
        payload = unit_chunk(unit, tree, norm, tokenizer)
        label = build_label(unit, tree, norm, style=label_style).canonical
        records.append(ReferenceRecord(payload, "LBL", label))
        records.append(ReferenceRecord(payload, "URN", urn))
        records.append(
            ReferenceRecord(payload, "I+L", build_identifier_plus_label(unit, tree, norm, style=label_style))
        )
    return records
