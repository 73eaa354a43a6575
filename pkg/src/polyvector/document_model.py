"""Legal-document hierarchy, canonical labels and urn:lex identifiers."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional


class StructureError(ValueError):
    """Raised when a unit or tree cannot be labelled or identified."""


class UnitKind(Enum):
    TITLE = "title"
    CHAPTER = "chapter"
    SECTION = "section"
    SUBSECTION = "subsection"
    ARTICLE = "article"
    CAPUT = "caput"
    PARAGRAPH = "paragraph"
    SOLE_PARAGRAPH = "sole_paragraph"
    INCISO = "inciso"
    ALINEA = "alinea"

    @property
    def is_grouping(self) -> bool:
        return self in GROUPING_KINDS

    @property
    def content_tag(self) -> str:
        return _CONTENT_TAGS[self]


GROUPING_KINDS = frozenset({UnitKind.TITLE, UnitKind.CHAPTER, UnitKind.SECTION, UnitKind.SUBSECTION})
TEXTUAL_KINDS = frozenset(UnitKind) - GROUPING_KINDS

_CONTENT_TAGS = {
    UnitKind.TITLE: "TIT",
    UnitKind.CHAPTER: "CAP",
    UnitKind.SECTION: "SEC",
    UnitKind.SUBSECTION: "SUB",
    UnitKind.ARTICLE: "ART",
    UnitKind.CAPUT: "CPT",
    UnitKind.PARAGRAPH: "PAR",
    UnitKind.SOLE_PARAGRAPH: "PAR",
    UnitKind.INCISO: "INC",
    UnitKind.ALINEA: "ALI",
}

_GROUPING_WORDS = {
    UnitKind.TITLE: "TÍTULO",
    UnitKind.CHAPTER: "CAPÍTULO",
    UnitKind.SECTION: "Seção",
    UnitKind.SUBSECTION: "Subseção",
}

_GROUPING_FRAGMENTS = {
    UnitKind.TITLE: "tit",
    UnitKind.CHAPTER: "cap",
    UnitKind.SECTION: "sec",
    UnitKind.SUBSECTION: "sub",
}


@dataclass(frozen=True)
class NormIdentity:
    """Name and URN prefix of the norm every unit belongs to."""

    full_name: str
    short_name: str
    urn_base: str

    def __post_init__(self) -> None:
        if not self.full_name.strip():
            raise ValueError("full_name must be non-empty")
        if not self.urn_base.strip():
            raise ValueError("urn_base must be non-empty")
        if "!" in self.urn_base:
            raise ValueError("urn_base must not contain '!'")


CRFB = NormIdentity(
    full_name="Constituição da República Federativa do Brasil de 1988",
    short_name="CRFB",
    urn_base="urn:lex:br:federal:constituicao:1988-10-05;1988",
)


@dataclass
class StructuralUnit:
    id: str
    kind: Optional[UnitKind]  # None only for the document root
    ordinal: str = ""
    parent: Optional[str] = None
    children: list[str] = field(default_factory=list)
    own_text: str = ""
    full_text: str = ""

    @property
    def is_root(self) -> bool:
        return self.kind is None


@dataclass(frozen=True)
class UnitLabel:
    canonical: str
    display: str


@dataclass(frozen=True)
class UnitUrn:
    value: str

    @property
    def fragment(self) -> str:
        return self.value.split("!", 1)[1]


class LegalTree:
    """Units of one document keyed by id, rooted at a single document node.

    Ids are assigned in pre-order so sorting by id gives document order.
    """

    def __init__(self, units: dict[str, StructuralUnit], root_id: str) -> None:
        self.units = units
        self.root_id = root_id

    @property
    def root(self) -> StructuralUnit:
        return self.units[self.root_id]

    def __getitem__(self, uid: str) -> StructuralUnit:
        return self.units[uid]

    def __len__(self) -> int:
        return len(self.units)

    def preorder(self, start: Optional[str] = None) -> Iterator[StructuralUnit]:
        stack = [start or self.root_id]
        while stack:
            unit = self.units[stack.pop()]
            yield unit
            stack.extend(reversed(unit.children))

    def ancestors(self, uid: str) -> list[StructuralUnit]:
        """Ancestors nearest-first, excluding the root."""
        out = []
        parent = self.units[uid].parent
        while parent is not None and parent != self.root_id:
            out.append(self.units[parent])
            parent = self.units[parent].parent
        return out

    def path(self, uid: str) -> list[StructuralUnit]:
        """Units from the top-level ancestor down to ``uid`` inclusive."""
        return list(reversed(self.ancestors(uid))) + [self.units[uid]]

    def compute_full_text(self) -> None:
        for unit in reversed(list(self.preorder())):
            parts = [unit.own_text] + [self.units[c].full_text for c in unit.children]
            unit.full_text = " ".join(p for p in parts if p)

    def to_dict(self) -> dict:
        return {
            "root": self.root_id,
            "units": [
                {
                    "id": u.id,
                    "kind": u.kind.value if u.kind else None,
                    "ordinal": u.ordinal,
                    "parent": u.parent,
                    "children": list(u.children),
                    "own_text": u.own_text,
                }
                for u in self.preorder()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LegalTree":
        units = {}
        for row in data["units"]:
            units[row["id"]] = StructuralUnit(
                id=row["id"],
                kind=UnitKind(row["kind"]) if row["kind"] else None,
                ordinal=row["ordinal"],
                parent=row["parent"],
                children=list(row["children"]),
                own_text=row["own_text"],
            )
        tree = cls(units, data["root"])
        tree.compute_full_text()
        return tree


# --- numerals ---------------------------------------------------------------

_ROMAN_RE = re.compile(r"^M{0,3}(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3})$")
_ROMAN_VALUES = {"I": 1, "V": 5, "X": 10, "L": 50, "C": 100, "D": 500, "M": 1000}


def roman_to_int(numeral: str) -> int:
    numeral = numeral.strip().upper()
    if not numeral or not _ROMAN_RE.match(numeral):
        raise StructureError(f"not a roman numeral: {numeral!r}")
    total = 0
    for ch, nxt in zip(numeral, numeral[1:] + " "):
        value = _ROMAN_VALUES[ch]
        total += -value if nxt != " " and _ROMAN_VALUES[nxt] > value else value
    return total


def normalize_ordinal(ordinal: str) -> str:
    """'5º' -> '5', '51.' -> '51', '103-A.' -> '103-a'."""
    cleaned = ordinal.strip().replace("º", "").replace("°", "").replace("ª", "").rstrip(".").strip()
    return cleaned.lower()


def _ordinal_number(ordinal: str) -> str:
    """Arabic form of a printed ordinal, converting roman numerals."""
    cleaned = normalize_ordinal(ordinal)
    if not cleaned:
        raise StructureError(f"empty ordinal {ordinal!r}")
    if cleaned in ("único", "unico"):
        return "1u"
    head, sep, suffix = cleaned.partition("-")
    if head.isdigit():
        return cleaned
    return str(roman_to_int(head)) + sep + suffix


# --- builders ---------------------------------------------------------------


def _require_linked(unit: StructuralUnit, tree: LegalTree) -> None:
    if unit.is_root:
        raise StructureError("the document root has no label or URN")
    if tree.units.get(unit.id) is not unit:
        raise StructureError(f"unit {unit.id} is not part of this tree")
    if unit.kind not in _CONTENT_TAGS:
        raise StructureError(f"unknown unit kind {unit.kind!r}")


def _article_ordinal(ordinal: str) -> str:
    return ordinal.strip().rstrip(".").strip()


def _label_parts(unit: StructuralUnit, tree: LegalTree, long_form: bool) -> list[str]:
    if unit.kind.is_grouping:
        return [f"{_GROUPING_WORDS[u.kind]} {u.ordinal}" for u in tree.path(unit.id) if u.kind.is_grouping]
    parts = []
    for u in tree.path(unit.id):
        kind = u.kind
        if kind.is_grouping:
            continue
        if kind is UnitKind.ARTICLE:
            parts.append(f"Artigo {_article_ordinal(u.ordinal)}" if long_form else f"Art. {u.ordinal}")
        elif kind is UnitKind.CAPUT:
            # the long form names the caput only when it is the unit itself
            if not long_form or u is unit:
                parts.append("caput")
        elif kind is UnitKind.PARAGRAPH:
            parts.append(f"§ {_article_ordinal(u.ordinal) if long_form else u.ordinal}")
        elif kind is UnitKind.SOLE_PARAGRAPH:
            parts.append("Parágrafo único" if long_form else "Parágrafo único.")
        elif kind is UnitKind.INCISO:
            parts.append(f"Inciso {u.ordinal}")
        elif kind is UnitKind.ALINEA:
            parts.append(f"Alínea {u.ordinal}")
    return parts


def build_label(unit: StructuralUnit, tree: LegalTree, norm: NormIdentity, style: str = "long") -> UnitLabel:
    """Canonical (embedded) and display labels of ``unit``.

    ``style="long"`` spells articles as ``Artigo 5º`` and omits caput
    ancestors; ``style="short"`` embeds the display path (``Art. 5º, caput,
    Inciso I``) under the full norm name instead.
    """
    if style not in ("long", "short"):
        raise ValueError(f"unknown label style {style!r}")
    _require_linked(unit, tree)
    short_parts = _label_parts(unit, tree, long_form=False)
    canonical_parts = _label_parts(unit, tree, long_form=True) if style == "long" else short_parts
    return UnitLabel(
        canonical=", ".join([norm.full_name] + canonical_parts),
        display=", ".join([norm.short_name] + short_parts),
    )


def _fragment_segment(unit: StructuralUnit) -> str:
    kind = unit.kind
    if kind in _GROUPING_FRAGMENTS:
        return _GROUPING_FRAGMENTS[kind] + _ordinal_number(unit.ordinal)
    if kind is UnitKind.ARTICLE:
        number = normalize_ordinal(unit.ordinal)
        if not number or not number.split("-")[0].isdigit():
            raise StructureError(f"article ordinal {unit.ordinal!r} is not numeric")
        return "art" + number
    if kind is UnitKind.CAPUT:
        return "cpt"
    if kind is UnitKind.PARAGRAPH:
        return "par" + _ordinal_number(unit.ordinal)
    if kind is UnitKind.SOLE_PARAGRAPH:
        return "par1u"
    if kind is UnitKind.INCISO:
        return "inc" + _ordinal_number(unit.ordinal)
    if kind is UnitKind.ALINEA:
        letter = normalize_ordinal(unit.ordinal)
        if not letter:
            raise StructureError("alinea without a letter")
        return "ali" + letter
    raise StructureError(f"unknown unit kind {kind!r}")


def build_urn(unit: StructuralUnit, tree: LegalTree, norm: NormIdentity) -> UnitUrn:
    _require_linked(unit, tree)
    if unit.kind.is_grouping:
        chain = [u for u in tree.path(unit.id) if u.kind.is_grouping]
    else:
        # articles are numbered across the whole norm, so groupings drop out
        chain = [u for u in tree.path(unit.id) if not u.kind.is_grouping]
    fragment = "_".join(_fragment_segment(u) for u in chain)
    if not fragment:
        raise StructureError(f"empty URN fragment for unit {unit.id}")
    return UnitUrn(f"{norm.urn_base}!{fragment}")


def build_identifier_plus_label(
    unit: StructuralUnit, tree: LegalTree, norm: NormIdentity, display: bool = False, style: str = "long"
) -> str:
    urn = build_urn(unit, tree, norm)
    label = build_label(unit, tree, norm, style=style)
    text = label.display if display else label.canonical
    if not urn.fragment or not text:
        raise StructureError(f"cannot build identifier+label for unit {unit.id}")
    return f"{urn.value}, {text}"
