"""Query pipeline: normalization, unified search, dedup, pruning, selection."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .chunking import REFERENCE_TAGS
from .embedding import Embedder
from .index import EmbeddingRecord, MethodConfig, PolyIndex, tie_rounded

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATES = 100


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionPolicy:
    token_budget: int = 4000
    drop_fraction: float = 0.20
    min_segments: int = 5

    def __post_init__(self) -> None:
        if self.token_budget <= 0:
            raise ConfigError("token_budget must be positive")
        if not 0 < self.drop_fraction < 1:
            raise ConfigError("drop_fraction must lie strictly between 0 and 1")
        if self.min_segments < 1:
            raise ConfigError("min_segments must be at least 1")


@dataclass(frozen=True)
class Candidate:
    """A unique payload chunk with the best-scoring record that reached it."""

    chunk_id: str
    tag: str
    display_label: str
    similarity: float
    token_count: int
    record_id: str = ""
    unit_id: Optional[str] = None
    ancestors: tuple[str, ...] = ()


@dataclass(frozen=True)
class SelectedItem:
    chunk_id: str
    tag: str
    display_label: str
    similarity: float
    token_count: int


@dataclass(frozen=True)
class Metrics:
    max: float
    mean: float
    min: float
    stddev: float
    segments: int
    total_tokens: int


@dataclass
class SelectionReport:
    items: list[SelectedItem]
    metrics: Metrics
    query: str = ""
    effective_query: str = ""
    method_id: str = ""

    def to_dict(self) -> dict:
        return {
            "method_id": self.method_id,
            "query": self.query,
            "effective_query": self.effective_query,
            "items": [asdict(i) for i in self.items],
            "metrics": asdict(self.metrics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionReport":
        return cls(
            items=[SelectedItem(**i) for i in data["items"]],
            metrics=Metrics(**data["metrics"]),
            query=data.get("query", ""),
            effective_query=data.get("effective_query", ""),
            method_id=data.get("method_id", ""),
        )


# --- query normalization ----------------------------------------------------

# Query pairs from the evaluation suite; looked up before the generic rules.
KNOWN_NORMALIZATIONS = {
    "Quais são os objetivos fundamentais da República Federativa do Brasil?":
        "Objetivos fundamentais da República Federativa do Brasil",
    "Por favor, você poderia me explicar quais direitos a Constituição garante aos povos indígenas?":
        "Direitos garantidos aos povos indígenas pela Constituição",
    "Quais direitos são assegurados pelo art. 5º da Constituição?":
        "Direitos assegurados pelo art. 5º da Constituição",
    "Quais são os direitos previstos no art. 7º da Constituição?":
        "Direitos previstos no art. 7º da Constituição",
    "Qual o tema do Capítulo VI do Título VIII da Constituição?":
        "Tema do Capítulo VI do Título VIII da Constituição",
    "Qual o tema do Capítulo VI do Título VIII da Constituição de 1988?":
        "Tema do Capítulo VI do Título VIII da Constituição",
    "Explique o art. 69 da Constituição.": "Art. 69 da Constituição",
    "Explique o art. 69 da Constituição": "Art. 69 da Constituição",
    "Explique a norma urn:lex:br:federal:constituicao:1988-10-05;1988!art69":
        "Norma urn:lex:br:federal:constituicao:1988-10-05;1988!art69",
    "Quais as diferenças entre o Art. 51 e o Art. 52 da Constituição?":
        "Diferenças entre o Art. 51 e o Art. 52 da Constituição",
    "Quais as diferenças entre o art. 51 e o art. 52 da Constituição?":
        "Diferenças entre o art. 51 e o art. 52 da Constituição",
}

# Politeness and interrogative openers, matched case-insensitively at the start.
SPEECH_ACT_PREFIXES = (
    r"por favor,?",
    r"(?:você|voce) (?:poderia|pode|podia)(?: me)?(?: explicar| dizer| informar)?",
    r"(?:poderia|pode|podia)(?: me)?(?: explicar| dizer| informar)?",
    r"(?:gostaria de saber|quero saber|preciso saber|me diga|diga-me|me explique|explique-me)",
    r"explique(?: (?:o|a|os|as))?",
    r"(?:quais|qual) (?:são|é|seriam|seria)(?: (?:os|as|o|a))?",
    r"(?:quais|qual)(?: (?:os|as|o|a))?",
    r"o que (?:é|são|diz|dizem)",
)


@dataclass(frozen=True)
class NormalizationRules:
    prefixes: tuple[str, ...] = SPEECH_ACT_PREFIXES
    lookup: dict = field(default_factory=lambda: dict(KNOWN_NORMALIZATIONS))

    def compiled(self) -> list[re.Pattern]:
        return [re.compile(rf"^(?:{p})(?=\s|$)[\s,]*", re.IGNORECASE) for p in self.prefixes]


def _strip_markers(text: str, patterns: Sequence[re.Pattern]) -> str:
    text = " ".join(text.split())
    while True:
        before = text
        text = re.sub(r"[\s?!.]+$", "", text)
        for pattern in patterns:
            text = pattern.sub("", text, count=1)
        if text == before:
            return text


def normalize_query(query: str, rules: Optional[NormalizationRules] = None) -> str:
    """Strip politeness and interrogative markers, keeping the propositional content."""
    rules = rules or NormalizationRules()
    collapsed = " ".join(query.split())
    if collapsed in rules.lookup:
        return rules.lookup[collapsed]
    stripped = _strip_markers(collapsed, rules.compiled())
    if not stripped:
        logger.warning("normalization emptied the query %r; using it unchanged", query)
        return collapsed
    return stripped[0].upper() + stripped[1:]


# --- ranking stages ---------------------------------------------------------


def dedup_by_payload(
    hits: Iterable[tuple[EmbeddingRecord, float]], index: Optional[PolyIndex] = None
) -> list[Candidate]:
    """Collapse records that share a payload chunk, keeping the best score.

    The output is ordered like :meth:`PolyIndex.knn` orders records:
    similarity descending, larger payload first, then smaller record id.
    """
    best: dict[str, tuple[EmbeddingRecord, float]] = {}
    for record, sim in hits:
        cur = best.get(record.payload_chunk_id)
        if cur is None or sim > cur[1] or (sim == cur[1] and record.record_id < cur[0].record_id):
            best[record.payload_chunk_id] = (record, sim)
    out = []
    for chunk_id, (record, sim) in best.items():
        chunk = index.chunks.get(chunk_id) if index is not None else None
        out.append(
            Candidate(
                chunk_id=chunk_id,
                tag=record.tag,
                display_label=record.display_label,
                similarity=sim,
                token_count=record.token_count,
                record_id=record.record_id,
                unit_id=chunk.unit_id if chunk else None,
                ancestors=chunk.ancestors if chunk else (),
            )
        )
    out.sort(key=lambda c: (-float(tie_rounded(c.similarity)), -c.token_count, c.record_id))
    return out


def prune_contained(candidates: Sequence[Candidate], prune_reference_hits: bool = False) -> list[Candidate]:
    """Drop a chunk whose ancestor unit already appeared higher in the ranking.

    Only chunks reached through a content embedding are pruned unless
    ``prune_reference_hits`` is set; chunks without lineage are kept.
    """
    seen_units: set[str] = set()
    kept = []
    for cand in candidates:
        prunable = prune_reference_hits or cand.tag not in REFERENCE_TAGS
        if prunable and cand.unit_id is not None and seen_units.intersection(cand.ancestors):
            continue
        kept.append(cand)
        if cand.unit_id is not None:
            seen_units.add(cand.unit_id)
    return kept


def compute_metrics(items: Sequence[SelectedItem]) -> Metrics:
    """Summary statistics; the standard deviation is the n-1 sample form."""
    if not items:
        raise ValueError("need at least one item")
    sims = [i.similarity for i in items]
    n = len(sims)
    mean = math.fsum(sims) / n
    std = math.sqrt(math.fsum((s - mean) ** 2 for s in sims) / (n - 1)) if n > 1 else 0.0
    return Metrics(
        max=max(sims),
        mean=mean,
        min=min(sims),
        stddev=std,
        segments=n,
        total_tokens=sum(i.token_count for i in items),
    )


def select_context(candidates: Sequence[Candidate], policy: SelectionPolicy = SelectionPolicy()) -> SelectionReport:
    """Take a prefix of the ranking.

    A candidate is accepted while fewer than ``min_segments`` are selected, or
    while it is within ``drop_fraction`` of the top score and the tokens
    selected so far are still under budget. The item that crosses the budget
    is kept.
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    floor = (1.0 - policy.drop_fraction) * candidates[0].similarity
    items: list[SelectedItem] = []
    used = 0
    for cand in candidates:
        below_min = len(items) < policy.min_segments
        if not (below_min or (cand.similarity >= floor and used < policy.token_budget)):
            break
        items.append(SelectedItem(cand.chunk_id, cand.tag, cand.display_label, cand.similarity, cand.token_count))
        used += cand.token_count
    return SelectionReport(items=items, metrics=compute_metrics(items))


def retrieve(
    query: str,
    index: PolyIndex,
    embedder: Embedder,
    method: MethodConfig,
    policy: SelectionPolicy = SelectionPolicy(),
    rules: Optional[NormalizationRules] = None,
    k_candidates: int = DEFAULT_CANDIDATES,
    normalize: Optional[bool] = None,
) -> SelectionReport:
    if embedder.config.fingerprint() != index.manifest.provider:
        raise ConfigError(
            f"embedder {embedder.config.fingerprint()!r} does not match index provider {index.manifest.provider!r}"
        )
    do_normalize = method.normalize if normalize is None else normalize
    effective = normalize_query(query, rules) if do_normalize else query
    qvec = embedder.embed(effective)

    k = min(k_candidates, len(index))
    while True:
        candidates = dedup_by_payload(index.knn(qvec, k), index)
        if method.strategy == "multilayer":
            candidates = prune_contained(candidates)
        report = select_context(candidates, policy) if candidates else None
        # widen the search while selection ran off the end of the candidate list
        if k >= len(index) or (report is not None and len(report.items) < len(candidates)):
            break
        k = min(2 * k, len(index))

    if report is None:
        raise ValueError("index produced no candidates")
    report.query = query
    report.effective_query = effective
    report.method_id = method.method_id
    return report


def assemble_prompt(query: str, report: SelectionReport, index: PolyIndex) -> str:
    """Plain-text prompt: the question followed by the selected chunks in rank order."""
    lines = [f"Pergunta: {query}", "", "Contexto:"]
    for rank, item in enumerate(report.items, start=1):
        chunk = index.chunks[item.chunk_id]
        lines.append(f"[{rank}] {chunk.display_label} ({item.tag}, {item.similarity:.4f})")
        lines.append(chunk.text)
        lines.append("")
    return "\n".join(lines)
