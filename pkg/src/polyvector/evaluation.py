"""Method x query experiment matrix and its CSV outputs.

Files written by :func:`emit_all`:

``tables.csv``
    Every query's table in one file. Summary rows have an empty ``Rank``;
    item rows fill ``Rank``, ``Tag``, ``Label``, ``Tokens``, ``Similarity``.
``table_<query_id>.csv``
    The same rows for one query.
``heatmap_max_similarity.csv``
    ``Method`` column followed by one column per query id; cells are Max Sim.
``boxplot_scores.csv``
    Long format: ``method,query,rank,similarity`` with full-precision scores.
``results.jsonl``
    One serialized selection report per (method, query).

All similarities in the tables are rounded half-up to 4 decimals at write time.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .embedding import Embedder
from .index import METHODS, MethodConfig, PolyIndex
from .retrieval import NormalizationRules, SelectionPolicy, SelectionReport, retrieve

TABLE_COLUMNS = [
    "Query", "Method", "Rank", "Tag", "Label",
    "Min Sim.", "Max Sim.", "Mean Sim.", "Std Dev.", "Tokens", "Segments", "Similarity", "Expected Rank",
]


class MissingIndexError(KeyError):
    pass


@dataclass(frozen=True)
class QuerySpec:
    id: str
    original: str
    normalized: Optional[str] = None
    expected_top1: dict = field(default_factory=dict)  # strategy -> designation


@dataclass
class ExperimentResult:
    method_id: str
    query_id: str
    report: SelectionReport
    expected_hit_rank: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "method_id": self.method_id,
            "query_id": self.query_id,
            "expected_hit_rank": self.expected_hit_rank,
            "report": self.report.to_dict(),
        }


def load_suite(path: Optional[str | Path] = None) -> list[QuerySpec]:
    """Read a query suite (JSON list); defaults to the bundled eight questions."""
    if path is None:
        text = resources.files("polyvector").joinpath("data/queries_crfb.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    suite = [QuerySpec(**row) for row in json.loads(text)]
    ids = [q.id for q in suite]
    if len(set(ids)) != len(ids):
        raise ValueError("query ids must be unique within a suite")
    return suite


def _designation(label: str) -> str:
    """Label with the norm name stripped: 'CRFB, Art. 3º, caput' -> 'Art. 3º, caput'."""
    if label.startswith("Chunk #"):
        return label
    head, sep, tail = label.partition(", ")
    return tail if sep else label


def designation_keys(label: str) -> set[str]:
    """Comparable keys of a label: its URN (if it carries one) and its norm-free designation."""
    if label.startswith("urn:"):
        urn, _, rest = label.partition(", ")
        return {urn} | ({_designation(rest)} if rest else set())
    return {_designation(label)}


def expected_rank(report: SelectionReport, spec: QuerySpec, method: MethodConfig) -> Optional[int]:
    """1-based rank of the first selected item matching an expected designation."""
    keys = ["poly", method.strategy] if method.poly else [method.strategy]
    targets: set[str] = set()
    for k in keys:
        wanted = spec.expected_top1.get(k)
        if wanted is None:
            continue
        for designation in ([wanted] if isinstance(wanted, str) else wanted):
            targets |= designation_keys(designation)
    for rank, item in enumerate(report.items, start=1):
        if designation_keys(item.display_label) & targets:
            return rank
    return None


def run_matrix(
    suite: Sequence[QuerySpec],
    methods: Sequence[MethodConfig],
    indices: Mapping[str, PolyIndex],
    embedder: Embedder,
    policy: SelectionPolicy = SelectionPolicy(),
    rules: Optional[NormalizationRules] = None,
) -> list[ExperimentResult]:
    for m in methods if suite else ():
        if m.method_id not in indices:
            raise MissingIndexError(f"no index built for method {m.method_id}")
    results = []
    for spec in suite:
        for m in methods:
            query = spec.original
            if m.normalize and spec.normalized:
                report = retrieve(spec.normalized, indices[m.method_id], embedder, m, policy, rules, normalize=False)
                report.query = spec.original
            else:
                report = retrieve(query, indices[m.method_id], embedder, m, policy, rules)
            results.append(ExperimentResult(m.method_id, spec.id, report, expected_rank(report, spec, m)))
    return results


# --- emission ---------------------------------------------------------------


def fmt4(x: float) -> str:
    return str(Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def summary_cells(metrics) -> list[str]:
    """Min, Max, Mean, Std (4 decimals), Tokens, Segments: the order of a printed table row."""
    return [
        fmt4(metrics.min), fmt4(metrics.max), fmt4(metrics.mean), fmt4(metrics.stddev),
        str(metrics.total_tokens), str(metrics.segments),
    ]


def _table_rows(results: Sequence[ExperimentResult]) -> list[list[str]]:
    rows = []
    for res in results:
        m = res.report.metrics
        name = METHODS[res.method_id].name if res.method_id in METHODS else res.method_id
        rows.append([
            res.query_id, name, "", "", "",
            *summary_cells(m), "",
            "" if res.expected_hit_rank is None else str(res.expected_hit_rank),
        ])
        for rank, item in enumerate(res.report.items, start=1):
            rows.append([
                res.query_id, name, str(rank), item.tag, item.display_label,
                "", "", "", "", str(item.token_count), "", fmt4(item.similarity), "",
            ])
    return rows


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _query_order(results: Sequence[ExperimentResult]) -> list[str]:
    return list(dict.fromkeys(r.query_id for r in results))


def _method_order(results: Sequence[ExperimentResult]) -> list[str]:
    return sorted(dict.fromkeys(r.method_id for r in results))


def emit_tables(results: Sequence[ExperimentResult], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [_write_csv(out_dir / "tables.csv", TABLE_COLUMNS, _table_rows(results))]
    for qid in _query_order(results):
        subset = [r for r in results if r.query_id == qid]
        paths.append(_write_csv(out_dir / f"table_{qid}.csv", TABLE_COLUMNS, _table_rows(subset)))
    return paths


def read_tables(path: str | Path) -> list[dict]:
    """Parse a table file back into summary dicts with their item lists."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TABLE_COLUMNS:
            raise ValueError(f"unexpected columns {reader.fieldnames}")
        out: list[dict] = []
        for row in reader:
            if row["Rank"] == "":
                out.append({
                    "query": row["Query"],
                    "method": row["Method"],
                    "min": float(row["Min Sim."]),
                    "max": float(row["Max Sim."]),
                    "mean": float(row["Mean Sim."]),
                    "std": float(row["Std Dev."]),
                    "tokens": int(row["Tokens"]),
                    "segments": int(row["Segments"]),
                    "expected_rank": int(row["Expected Rank"]) if row["Expected Rank"] else None,
                    "items": [],
                })
            else:
                out[-1]["items"].append({
                    "rank": int(row["Rank"]),
                    "tag": row["Tag"],
                    "label": row["Label"],
                    "tokens": int(row["Tokens"]),
                    "similarity": float(row["Similarity"]),
                })
    return out


def heatmap_matrix(results: Sequence[ExperimentResult]) -> tuple[list[str], list[str], list[list[Optional[float]]]]:
    methods, queries = _method_order(results), _query_order(results)
    cells = {(r.method_id, r.query_id): r.report.metrics.max for r in results}
    return methods, queries, [[cells.get((m, q)) for q in queries] for m in methods]


def emit_heatmap(results: Sequence[ExperimentResult], out_dir: str | Path) -> Path:
    methods, queries, matrix = heatmap_matrix(results)
    rows = [[m] + ["" if v is None else fmt4(v) for v in row] for m, row in zip(methods, matrix)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _write_csv(out_dir / "heatmap_max_similarity.csv", ["Method"] + queries, rows)


def emit_boxplot_data(results: Sequence[ExperimentResult], out_dir: str | Path) -> Path:
    rows = []
    for res in results:
        for rank, item in enumerate(res.report.items, start=1):
            rows.append([res.method_id, res.query_id, str(rank), repr(float(item.similarity))])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _write_csv(out_dir / "boxplot_scores.csv", ["method", "query", "rank", "similarity"], rows)


def emit_results(results: Sequence[ExperimentResult], out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.jsonl"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for res in results:
            fh.write(json.dumps(res.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
    return path


def emit_all(results: Sequence[ExperimentResult], out_dir: str | Path) -> list[Path]:
    return [
        *emit_tables(results, out_dir),
        emit_heatmap(results, out_dir),
        emit_boxplot_data(results, out_dir),
        emit_results(results, out_dir),
    ]
