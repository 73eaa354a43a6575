import csv
import json

import pytest

from polyvector import CRFB, Embedder, ProviderConfig
from polyvector.evaluation import (
    TABLE_COLUMNS,
    ExperimentResult,
    MissingIndexError,
    QuerySpec,
    designation_keys,
    emit_all,
    emit_boxplot_data,
    emit_heatmap,
    emit_tables,
    expected_rank,
    fmt4,
    heatmap_matrix,
    load_suite,
    read_tables,
    run_matrix,
    summary_cells,
)
from polyvector.index import METHODS, build_method_index, get_method
from polyvector.retrieval import SelectedItem, SelectionReport, compute_metrics


def report_of(sims, tokens, method="a", labels=None):
    labels = labels or [f"Chunk #{i + 1}" for i in range(len(sims))]
    items = [SelectedItem(f"c{i}", "Blind", lab, s, t) for i, (s, t, lab) in enumerate(zip(sims, tokens, labels))]
    return SelectionReport(items=items, metrics=compute_metrics(items), method_id=method)


def test_bundled_suite_has_eight_queries():
    suite = load_suite()
    assert [q.id for q in suite] == [f"Q{i}" for i in range(1, 9)]
    assert all(q.normalized for q in suite)
    assert all({"blind", "flat", "multilayer", "poly"} <= q.expected_top1.keys() for q in suite)


def test_duplicate_ids_rejected(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps([{"id": "a", "original": "x"}, {"id": "a", "original": "y"}]))
    with pytest.raises(ValueError):
        load_suite(path)


def test_blind_row_formatting(appendix):
    row = next(r for r in appendix["Q1"] if r["method"] == "a")
    report = report_of([i["similarity"] for i in row["items"]], [i["tokens"] for i in row["items"]])
    assert " & ".join(summary_cells(report.metrics)) == "0.5899 & 0.7067 & 0.6370 & 0.0530 & 4000 & 5"


@pytest.mark.parametrize("x, text", [(0.12345, "0.1235"), (0.12344999, "0.1234"), (1.0, "1.0000"),
                                     (0.00005, "0.0001"), (-0.00005, "-0.0001")])
def test_half_up_rounding(x, text):
    assert fmt4(x) == text


def test_empty_results_give_header_only(tmp_path):
    paths = emit_all([], tmp_path)
    for p in paths:
        if p.suffix == ".csv":
            assert len(p.read_text().splitlines()) == 1
    assert (tmp_path / "tables.csv").read_text() == ",".join(TABLE_COLUMNS) + "\n"


def test_emit_round_trip(tmp_path, appendix):
    results = []
    for qid, rows in appendix.items():
        for row in rows:
            rep = report_of([i["similarity"] for i in row["items"]], [i["tokens"] for i in row["items"]],
                            row["method"], [i["label"] for i in row["items"]])
            results.append(ExperimentResult(row["method"], qid, rep, 1))
    emit_tables(results, tmp_path)
    parsed = read_tables(tmp_path / "tables.csv")
    assert len(parsed) == len(results)
    for res, back in zip(results, parsed):
        m = res.report.metrics
        assert back["query"] == res.query_id and back["method"] == METHODS[res.method_id].name
        for key, value in (("min", m.min), ("max", m.max), ("mean", m.mean), ("std", m.stddev)):
            assert back[key] == pytest.approx(value, abs=5e-5)
        assert (back["tokens"], back["segments"]) == (m.total_tokens, m.segments)
        assert [i["label"] for i in back["items"]] == [i.display_label for i in res.report.items]
        assert [i["similarity"] for i in back["items"]] == [float(fmt4(i.similarity)) for i in res.report.items]
    per_query = read_tables(tmp_path / "table_Q3.csv")
    assert len(per_query) == 8 and {r["query"] for r in per_query} == {"Q3"}


def test_reemission_is_byte_identical(tmp_path):
    results = [ExperimentResult(m, q, report_of([0.9, 0.8, 0.7], [10, 20, 30], m)) for m in "ab" for q in ("Q1", "Q2")]
    emit_all(results, tmp_path / "one")
    emit_all(results, tmp_path / "two")
    for p in sorted((tmp_path / "one").iterdir()):
        assert p.read_bytes() == (tmp_path / "two" / p.name).read_bytes()


def test_heatmap_cells_and_single_cell(tmp_path):
    results = [ExperimentResult("a", "Q1", report_of([0.61234], [5]))]
    path = emit_heatmap(results, tmp_path)
    assert path.read_text() == "Method,Q1\na,0.6123\n"
    results = [ExperimentResult(m, q, report_of([0.5 + i / 10, 0.4], [1, 1], m))
               for i, m in enumerate("abc") for q in ("Q1", "Q2")]
    methods, queries, matrix = heatmap_matrix(results)
    for r in results:
        assert matrix[methods.index(r.method_id)][queries.index(r.query_id)] == r.report.metrics.max


def test_boxplot_counts_and_totals(tmp_path):
    results = [ExperimentResult(m, "Q1", report_of([0.9, 0.8, 0.7][: n], [1] * n, m)) for m, n in (("a", 3), ("b", 2))]
    path = emit_boxplot_data(results, tmp_path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["method"] for r in rows].count("a") == 3 and [r["method"] for r in rows].count("b") == 2
    for res in results:
        scores = [float(r["similarity"]) for r in rows if r["method"] == res.method_id]
        assert scores == [i.similarity for i in res.report.items]
        assert max(scores) == res.report.metrics.max


def test_designation_matching():
    assert designation_keys("Constituição da República Federativa do Brasil, Art. 3º, caput") == {"Art. 3º, caput"}
    assert designation_keys("CRFB, Art. 3º, caput") == {"Art. 3º, caput"}
    urn = "urn:lex:br:federal:constituicao:1988-10-05;1988!art3_cpt"
    assert designation_keys(urn) == {urn}
    assert designation_keys(f"{urn}, CRFB, Art. 3º, caput") == {urn, "Art. 3º, caput"}
    spec = QuerySpec("Q", "x", expected_top1={"flat": "Constituição, Art. 7º", "poly": [urn]})
    rep = report_of([0.9, 0.8], [1, 1], labels=["CRFB, Art. 5º", "CRFB, Art. 7º"])
    assert expected_rank(rep, spec, get_method("b")) == 2
    assert expected_rank(rep, spec, get_method("c")) is None


@pytest.fixture(scope="module")
def small_matrix(excerpt):
    tree, _ = excerpt
    emb = Embedder(ProviderConfig())
    indices = {m: build_method_index(tree, CRFB, get_method(m), emb) for m in METHODS}
    return indices, emb


def test_run_matrix_shape_and_recompute(small_matrix):
    indices, emb = small_matrix
    suite = load_suite()
    results = run_matrix(suite, list(METHODS.values()), indices, emb)
    assert len(results) == 64
    for r in results:
        assert r.report.metrics == compute_metrics(r.report.items)
        if r.expected_hit_rank is not None:
            assert 1 <= r.expected_hit_rank <= len(r.report.items)
    q7h = next(r for r in results if r.query_id == "Q7" and r.method_id == "h")
    assert q7h.expected_hit_rank == 1


def test_run_matrix_empty_suite_and_missing_index(small_matrix):
    indices, emb = small_matrix
    assert run_matrix([], list(METHODS.values()), indices, emb) == []
    with pytest.raises(MissingIndexError):
        run_matrix(load_suite(), [get_method("a")], {}, emb)
