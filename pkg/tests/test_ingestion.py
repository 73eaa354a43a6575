from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyvector import CRFB, SYNTHETIC_NORM, UnitKind, enumerate_units, parse_document, synthetic_statute
from polyvector.ingestion import ParseError


def test_minimal_article():
    tree, report = parse_document("Art. 1º Texto.", CRFB)
    units = enumerate_units(tree, set(UnitKind))
    assert [u.kind for u in units] == [UnitKind.ARTICLE, UnitKind.CAPUT]
    assert units[1].parent == units[0].id
    assert units[1].own_text == "Texto."
    assert report.total_units == 2
    assert report.warnings == []


@pytest.mark.parametrize("text", ["", "   \n\t\n"])
def test_empty_document_rejected(text):
    with pytest.raises(ParseError):
        parse_document(text, CRFB)


def test_orphan_paragraph_rejected():
    with pytest.raises(ParseError) as err:
        parse_document("TÍTULO I\nDISPOSIÇÕES\n§ 1º Texto solto.", CRFB)
    assert err.value.line_no == 3


def test_alinea_outside_inciso_is_warned_and_kept():
    tree, report = parse_document("Art. 1º Caput do artigo.\na) texto avulso;", CRFB)
    assert any("alínea" in msg for _, msg in report.warnings)
    assert report.unit_count_by_kind["alinea"] == 0
    assert "a) texto avulso;" in tree.root.full_text


def test_inline_markers_are_split():
    tree, _ = parse_document("Art. 9. Compreende: I – primeiro; II – segundo. Parágrafo único. Fim.", CRFB)
    kinds = [u.kind for u in enumerate_units(tree, set(UnitKind))]
    assert kinds == [UnitKind.ARTICLE, UnitKind.CAPUT, UnitKind.INCISO, UnitKind.INCISO, UnitKind.SOLE_PARAGRAPH]


def test_nesting_of_paragraph_incisos(excerpt):
    tree, _ = excerpt
    by_kind = Counter()
    for u in enumerate_units(tree, set(UnitKind)):
        by_kind[u.kind] += 1
        parent = tree[u.parent]
        if u.kind is UnitKind.ALINEA:
            assert parent.kind is UnitKind.INCISO
        if u.kind is UnitKind.INCISO:
            assert parent.kind in (UnitKind.CAPUT, UnitKind.PARAGRAPH)
        if u.kind in (UnitKind.CAPUT, UnitKind.PARAGRAPH, UnitKind.SOLE_PARAGRAPH):
            assert parent.kind is UnitKind.ARTICLE
    assert by_kind[UnitKind.ARTICLE] == by_kind[UnitKind.CAPUT] == 14


def test_report_counts_match_enumeration(excerpt):
    tree, report = excerpt
    for kind in UnitKind:
        assert report.unit_count_by_kind[kind.value] == len(enumerate_units(tree, {kind}))
    assert report.total_units == len(enumerate_units(tree, set(UnitKind)))


def test_enumerate_empty_layer(excerpt):
    tree, _ = excerpt
    assert enumerate_units(tree, set()) == []


def test_enumeration_is_document_order(excerpt):
    tree, _ = excerpt
    ids = [u.id for u in enumerate_units(tree, set(UnitKind))]
    assert ids == sorted(ids)


def _squash(text):
    return " ".join(text.split())


def test_full_text_round_trip(excerpt_text, excerpt):
    tree, _ = excerpt
    assert _squash(tree.root.full_text) == _squash(excerpt_text)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=45), st.integers(min_value=0, max_value=10_000))
def test_synthetic_statutes_parse_cleanly(n_articles, seed):
    text = synthetic_statute(n_articles, seed)
    tree, report = parse_document(text, SYNTHETIC_NORM)
    assert report.warnings == []
    assert report.unit_count_by_kind["article"] == n_articles
    assert report.unit_count_by_kind["caput"] == n_articles
    assert _squash(tree.root.full_text) == _squash(text)


def test_duplicate_fragments_warned():
    _, report = parse_document("Art. 1º Um.\nArt. 1º Outro.", CRFB)
    assert any("duplicate URN fragment art1" in msg for _, msg in report.warnings)


def test_parse_is_deterministic(excerpt_text):
    a, _ = parse_document(excerpt_text, CRFB)
    b, _ = parse_document(excerpt_text, CRFB)
    assert a.to_dict() == b.to_dict()
