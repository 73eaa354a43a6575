"""Poly-vector retrieval for structured legislation.

Each structural unit of a statute is indexed under several embeddings (its
text, its canonical label, its urn:lex identifier and the two combined), all
resolving to the same payload text.
"""

from .chunking import Chunk, ReferenceRecord, chunk_blind, chunk_flat, chunk_multilayer, make_reference_records
from .document_model import (
    CRFB,
    LegalTree,
    NormIdentity,
    StructuralUnit,
    StructureError,
    UnitKind,
    build_identifier_plus_label,
    build_label,
    build_urn,
)
from .embedding import Embedder, ProviderConfig, ProviderError, cosine, hash_embed, truncate
from .evaluation import QuerySpec, emit_all, emit_boxplot_data, emit_heatmap, emit_tables, load_suite, run_matrix
from .index import METHODS, MethodConfig, PolyIndex, build_index, build_method_index, get_method
from .ingestion import ParseError, ParseReport, enumerate_units, parse_document
from .retrieval import (
    SelectionPolicy,
    SelectionReport,
    assemble_prompt,
    compute_metrics,
    normalize_query,
    retrieve,
    select_context,
)
from .synthetic import SYNTHETIC_NORM, synthetic_statute

__version__ = "0.1.0"
