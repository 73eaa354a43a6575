"""Line-oriented parser for legislation drafted in the Brazilian style.

Recognised markers (at line start, or inline after ``.``, ``;`` or ``:``)::

    TÍTULO II            CAPÍTULO I           Seção III        Subseção I
    Art. 5º ...          § 1º ...             Parágrafo único. ...
    IV – ...             a) ...

Anything else is text belonging to the innermost open unit.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .document_model import LegalTree, NormIdentity, StructuralUnit, UnitKind, build_urn

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, message: str, line_no: int) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class ParseReport:
    unit_count_by_kind: dict[str, int] = field(default_factory=dict)
    warnings: list[tuple[int, str]] = field(default_factory=list)

    @property
    def total_units(self) -> int:
        return sum(self.unit_count_by_kind.values())

    def to_dict(self) -> dict:
        return {
            "unit_count_by_kind": dict(self.unit_count_by_kind),
            "total_units": self.total_units,
            "warnings": [list(w) for w in self.warnings],
        }


_ROMAN = r"[IVXLCDM]+"
_DASH = "[\u2013\u2014-]"

_MARKERS: list[tuple[UnitKind, re.Pattern]] = [
    (UnitKind.TITLE, re.compile(rf"^T[ÍI]TULO\s+({_ROMAN}|[ÚU]NICO)\b")),
    (UnitKind.CHAPTER, re.compile(rf"^CAP[ÍI]TULO\s+({_ROMAN}(?:-[A-Z])?|[ÚU]NICO)\b")),
    (UnitKind.SUBSECTION, re.compile(rf"^(?:Subseção|SUBSEÇÃO)\s+({_ROMAN}(?:-[A-Z])?|[ÚU]NICA)\b")),
    (UnitKind.SECTION, re.compile(rf"^(?:Seção|SEÇÃO)\s+({_ROMAN}(?:-[A-Z])?|[ÚU]NICA)\b")),
    (UnitKind.ARTICLE, re.compile(r"^Art\.\s*(\d+(?:[º°])?(?:-[A-Z])?\.?)")),
    (UnitKind.SOLE_PARAGRAPH, re.compile(r"^Parágrafo\s+único\.?")),
    (UnitKind.PARAGRAPH, re.compile(r"^§\s*(\d+(?:[º°])?(?:-[A-Z])?\.?)")),
    (UnitKind.INCISO, re.compile(rf"^({_ROMAN}(?:-[A-Z])?)\s*{_DASH}\s")),
    (UnitKind.ALINEA, re.compile(r"^([a-z])\)\s")),
]

# markers that may open a unit mid-line, right after sentence punctuation
_INLINE_SPLIT = re.compile(
    rf"(?<=[.;:])\s+(?=Art\.\s*\d|§\s*\d|Parágrafo\s+único|{_ROMAN}(?:-[A-Z])?\s*{_DASH}\s|[a-z]\)\s)"
)

_RANK = {
    UnitKind.TITLE: 0,
    UnitKind.CHAPTER: 1,
    UnitKind.SECTION: 2,
    UnitKind.SUBSECTION: 3,
}


def _match_marker(line: str) -> Optional[tuple[UnitKind, str, str, str]]:
    """(kind, ordinal, marker text as printed, remaining text) or None."""
    for kind, pattern in _MARKERS:
        m = pattern.match(line)
        if m is None:
            continue
        ordinal = m.group(1) if pattern.groups else "único"
        return kind, ordinal, m.group(0).strip(), line[m.end():].strip()
    return None


class _Builder:
    def __init__(self) -> None:
        self.units: dict[str, StructuralUnit] = {}
        self.order: list[str] = []
        self.root = self._new(None, "", None)
        self.open_grouping: dict[UnitKind, Optional[str]] = {k: None for k in _RANK}
        self.article: Optional[str] = None
        self.caput: Optional[str] = None
        self.paragraph: Optional[str] = None
        self.inciso: Optional[str] = None
        self.alinea: Optional[str] = None
        self.heading_lines: dict[str, int] = {}
        self.warnings: list[tuple[int, str]] = []

    def _new(self, kind: Optional[UnitKind], ordinal: str, parent: Optional[str]) -> str:
        uid = f"u{len(self.order):05d}"
        self.units[uid] = StructuralUnit(id=uid, kind=kind, ordinal=ordinal, parent=parent)
        self.order.append(uid)
        if parent is not None:
            self.units[parent].children.append(uid)
        return uid

    def _append(self, uid: str, text: str) -> None:
        if text:
            unit = self.units[uid]
            unit.own_text = f"{unit.own_text} {text}" if unit.own_text else text

    def innermost(self) -> str:
        for uid in (self.alinea, self.inciso, self.paragraph, self.caput, self.article):
            if uid is not None:
                return uid
        for kind in sorted(_RANK, key=_RANK.get, reverse=True):
            if self.open_grouping[kind] is not None:
                return self.open_grouping[kind]
        return self.root

    def _close_article(self) -> None:
        self.article = self.caput = self.paragraph = self.inciso = self.alinea = None

    def _grouping_parent(self, rank: int) -> str:
        for kind in sorted(_RANK, key=_RANK.get, reverse=True):
            if _RANK[kind] < rank and self.open_grouping[kind] is not None:
                return self.open_grouping[kind]
        return self.root

    def open_unit(self, kind: UnitKind, ordinal: str, marker: str, rest: str, line_no: int) -> None:
        if kind.is_grouping:
            rank = _RANK[kind]
            parent = self._grouping_parent(rank)
            if kind is UnitKind.SUBSECTION and self.open_grouping[UnitKind.SECTION] is None:
                self.warnings.append((line_no, "Subseção outside any Seção"))
            self._close_article()
            for k, r in _RANK.items():
                if r >= rank:
                    self.open_grouping[k] = None
            uid = self._new(kind, ordinal, parent)
            self.open_grouping[kind] = uid
            self._append(uid, marker)
            self._append(uid, rest)
            self.heading_lines[uid] = 1 if rest else 0
            return

        if kind is UnitKind.ARTICLE:
            self._close_article()
            self.article = self._new(kind, ordinal, self._grouping_parent(len(_RANK)))
            self._append(self.article, marker)
            if rest:
                self.caput = self._new(UnitKind.CAPUT, "", self.article)
                self._append(self.caput, rest)
            return

        if self.article is None:
            raise ParseError(f"{kind.value} marker outside any article", line_no)

        if kind in (UnitKind.PARAGRAPH, UnitKind.SOLE_PARAGRAPH):
            if self.caput is None:
                self.warnings.append((line_no, "paragraph before any caput text"))
            self.paragraph = self._new(kind, ordinal, self.article)
            self.inciso = self.alinea = None
            self._append(self.paragraph, marker)
            self._append(self.paragraph, rest)
            return

        if kind is UnitKind.INCISO:
            parent = self.paragraph
            if parent is None:
                if self.caput is None:
                    self.warnings.append((line_no, "inciso before any caput text; empty caput created"))
                    self.caput = self._new(UnitKind.CAPUT, "", self.article)
                parent = self.caput
            self.inciso = self._new(kind, ordinal, parent)
            self.alinea = None
            self._append(self.inciso, marker)
            self._append(self.inciso, rest)
            return

        if kind is UnitKind.ALINEA:
            if self.inciso is None:
                self.warnings.append((line_no, f"alínea {ordinal}) outside any inciso; kept as text"))
                self._append(self.innermost(), f"{marker} {rest}".strip())
                return
            self.alinea = self._new(kind, ordinal, self.inciso)
            self._append(self.alinea, marker)
            self._append(self.alinea, rest)
            return

    def add_text(self, text: str, line_no: int) -> None:
        target = self.innermost()
        unit = self.units[target]
        if self.article is not None and self.caput is None and self.paragraph is None:
            self.caput = self._new(UnitKind.CAPUT, "", self.article)
            target = self.caput
        elif unit.kind is not None and unit.kind.is_grouping:
            self.heading_lines[target] += 1
            if self.heading_lines[target] > 1:
                self.warnings.append((line_no, f"extra heading text attached to {unit.kind.value} {unit.ordinal}"))
        elif unit.is_root and len(self.order) > 1:
            self.warnings.append((line_no, "unrecognised text attached to the document root"))
        self._append(target, text)


def _logical_lines(source_text: str) -> Iterable[tuple[int, str]]:
    for line_no, raw in enumerate(source_text.splitlines(), start=1):
        line = " ".join(raw.split())
        if not line:
            continue
        for piece in _INLINE_SPLIT.split(line):
            piece = piece.strip()
            if piece:
                yield line_no, piece


def parse_document(source_text: str, norm: NormIdentity) -> tuple[LegalTree, ParseReport]:
    """Parse ``source_text`` into a unit tree plus a count/warning report."""
    if not source_text.strip():
        raise ParseError("empty document", 0)
    builder = _Builder()
    for line_no, line in _logical_lines(source_text):
        marker = _match_marker(line)
        if marker is None:
            builder.add_text(line, line_no)
        else:
            builder.open_unit(*marker, line_no=line_no)

    tree = LegalTree(builder.units, builder.root)
    tree.compute_full_text()

    counts = Counter(u.kind.value for u in tree.preorder() if not u.is_root)
    report = ParseReport(
        unit_count_by_kind={k.value: counts.get(k.value, 0) for k in UnitKind},
        warnings=builder.warnings,
    )
    seen: dict[str, str] = {}
    for unit in enumerate_units(tree, set(UnitKind)):
        fragment = build_urn(unit, tree, norm).fragment
        if fragment in seen:
            report.warnings.append((0, f"duplicate URN fragment {fragment} ({seen[fragment]}, {unit.id})"))
        seen[fragment] = unit.id
    for line_no, message in report.warnings:
        logger.warning("line %d: %s", line_no, message)
    return tree, report


def enumerate_units(tree: LegalTree, layer_spec: set[UnitKind]) -> list[StructuralUnit]:
    """Units of the requested kinds in document order (root excluded)."""
    if not layer_spec:
        return []
    return [u for u in tree.preorder() if not u.is_root and u.kind in layer_spec]
