"""Command-line entry point: ``polyvector {synth,ingest,index,query,eval}``.

Exit codes: 0 success, 2 configuration or usage error, 3 parse error,
4 embedding provider error, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import evaluation
from .document_model import CRFB, LegalTree, NormIdentity, StructureError
from .embedding import EmbeddingInputError, Embedder, ProviderConfig, ProviderError
from .index import METHODS, IndexStoreError, MethodConfig, PolyIndex, build_method_index, get_method
from .ingestion import ParseError, parse_document
from .retrieval import ConfigError, SelectionPolicy, assemble_prompt, compute_metrics, retrieve
from .synthetic import SYNTHETIC_NORM, synthetic_statute
from .tokenizer import get_tokenizer

logger = logging.getLogger("polyvector")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_PROVIDER = 4
EXIT_IO = 5

NORMS = {"crfb": CRFB, "synthetic": SYNTHETIC_NORM}


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    corpus: Optional[Path] = None
    norm: NormIdentity = CRFB
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    policy: SelectionPolicy = field(default_factory=SelectionPolicy)
    methods: tuple[str, ...] = tuple(METHODS)
    out: Path = Path("out")

    def __post_init__(self) -> None:
        if self.corpus is not None and not Path(self.corpus).exists():
            raise CliError(f"corpus not found: {self.corpus}", EXIT_IO)
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise CliError(f"unknown method ids {unknown}; expected a..h", EXIT_CONFIG)


# --- tree artifacts ---------------------------------------------------------


def write_tree_artifact(tree: LegalTree, norm: NormIdentity, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"norm": asdict(norm), "tree": tree.to_dict()}
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_tree_artifact(path: Path) -> tuple[LegalTree, NormIdentity]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(f"tree artifact not found: {path}", EXIT_IO) from None
    return LegalTree.from_dict(data["tree"]), NormIdentity(**data["norm"])


def _resolve_norm(args: argparse.Namespace) -> NormIdentity:
    base = NORMS[args.norm]
    if args.norm_name or args.norm_short or args.urn_base:
        return NormIdentity(
            full_name=args.norm_name or base.full_name,
            short_name=args.norm_short or base.short_name,
            urn_base=args.urn_base or base.urn_base,
        )
    return base


def _provider_from_args(args: argparse.Namespace) -> ProviderConfig:
    try:
        return ProviderConfig(
            kind=args.provider,
            endpoint=args.endpoint,
            model_name=args.model,
            native_dim=args.native_dim,
            target_dim=args.dim or args.native_dim,
            batch_size=args.batch_size,
            cache_path=args.cache,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


def _policy_from_args(args: argparse.Namespace) -> SelectionPolicy:
    try:
        return SelectionPolicy(token_budget=args.budget, drop_fraction=args.drop, min_segments=args.min_segments)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


# --- commands ---------------------------------------------------------------


def cmd_synth(out: Path, n_articles: int = 30, seed: int = 7) -> Path:
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(synthetic_statute(n_articles, seed) + "\n", encoding="utf-8")
    return out


def cmd_ingest(corpus: Path, out: Path, norm: NormIdentity = CRFB) -> dict:
    """Parse ``corpus`` and write ``tree.json`` and ``parse_report.json`` into ``out``."""
    try:
        text = Path(corpus).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"corpus not found: {corpus}", EXIT_IO) from None
    tree, report = parse_document(text, norm)
    out.mkdir(parents=True, exist_ok=True)
    write_tree_artifact(tree, norm, out / "tree.json")
    (out / "parse_report.json").write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report.to_dict()


def cmd_index(
    tree_path: Path,
    method: MethodConfig,
    provider: ProviderConfig,
    out: Path,
    tokenizer: str = "simple",
    dtype: str = "float64",
) -> PolyIndex:
    tree, norm = read_tree_artifact(tree_path)
    embedder = Embedder(provider)
    return build_method_index(tree, norm, method, embedder, get_tokenizer(tokenizer), dtype=dtype, out_dir=out)


def _embedder_for(index: PolyIndex, cache: Optional[str]) -> Embedder:
    cfg = dict(index.manifest.provider_config)
    cfg["cache_path"] = cache
    return Embedder(ProviderConfig(**cfg))


def cmd_query(
    index_dir: Path,
    text: str,
    policy: SelectionPolicy = SelectionPolicy(),
    normalize: Optional[bool] = None,
    cache: Optional[str] = None,
    prompt_out: Optional[Path] = None,
):
    """Retrieve for ``text``; optionally write the assembled prompt to ``prompt_out``."""
    index = PolyIndex.load(index_dir)
    method = get_method(index.manifest.method_id)
    report = retrieve(text, index, _embedder_for(index, cache), method, policy, normalize=normalize)
    if prompt_out is not None:
        prompt_out.parent.mkdir(parents=True, exist_ok=True)
        prompt_out.write_text(assemble_prompt(text, report, index) + "\n", encoding="utf-8")
    return report


def load_or_build_index(
    root: Path, tree: LegalTree, norm: NormIdentity, method: MethodConfig, embedder: Embedder, tokenizer: str
) -> PolyIndex:
    path = root / method.method_id
    if (path / "manifest.json").exists():
        index = PolyIndex.load(path)
        if index.manifest.provider == embedder.config.fingerprint() and index.manifest.tokenizer == tokenizer:
            return index
        logger.info("index %s was built with a different provider or tokenizer; rebuilding", path)
    return build_method_index(tree, norm, method, embedder, get_tokenizer(tokenizer), out_dir=path)


def cmd_eval(
    tree_path: Path,
    out: Path,
    suite_path: Optional[Path] = None,
    methods: Sequence[str] = tuple(METHODS),
    provider: ProviderConfig = ProviderConfig(),
    policy: SelectionPolicy = SelectionPolicy(),
    index_root: Optional[Path] = None,
    tokenizer: str = "simple",
) -> list[Path]:
    """Run the method x query matrix and write every evaluation file into ``out``."""
    suite = evaluation.load_suite(suite_path)
    configs = [get_method(m) for m in methods]
    embedder = Embedder(provider)
    indices = {}
    if suite:
        tree, norm = read_tree_artifact(tree_path)
        root = index_root or (out / "indices")
        indices = {m.method_id: load_or_build_index(root, tree, norm, m, embedder, tokenizer) for m in configs}
    results = evaluation.run_matrix(suite, configs, indices, embedder, policy)
    return evaluation.emit_all(results, out)


# --- argument parsing -------------------------------------------------------


def _add_provider_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--provider", choices=["hash", "remote"], default="hash")
    p.add_argument("--endpoint", help="remote embedding endpoint URL")
    p.add_argument("--model", help="remote model name")
    p.add_argument("--native-dim", type=int, default=256)
    p.add_argument("--dim", type=int, default=None, help="truncated dimension (default: native)")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0, help="seed of the hash provider")
    p.add_argument("--cache", default=None, help="embedding cache directory")
    p.add_argument("--tokenizer", default="simple", help="'simple' or 'tiktoken[:encoding]'")


def _add_policy_args(p: argparse.ArgumentParser) -> None:
    defaults = SelectionPolicy()
    p.add_argument("--budget", type=int, default=defaults.token_budget)
    p.add_argument("--drop", type=float, default=defaults.drop_fraction)
    p.add_argument("--min-segments", type=int, default=defaults.min_segments)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyvector", description="Poly-vector retrieval over structured legislation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the synthetic test statute")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--articles", type=int, default=30)
    p.add_argument("--seed", type=int, default=7)

    p = sub.add_parser("ingest", help="parse a statute into a tree artifact")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--norm", choices=sorted(NORMS), default="crfb")
    p.add_argument("--norm-name")
    p.add_argument("--norm-short")
    p.add_argument("--urn-base")

    p = sub.add_parser("index", help="build the index of one method")
    p.add_argument("--tree", type=Path, required=True)
    p.add_argument("--method", choices=sorted(METHODS), required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dtype", choices=["float32", "float64"], default="float64")
    _add_provider_args(p)

    p = sub.add_parser("query", help="retrieve context for a question")
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("text")
    norm_group = p.add_mutually_exclusive_group()
    norm_group.add_argument("--normalize", dest="normalize", action="store_true", default=None)
    norm_group.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--cache", default=None)
    p.add_argument("--prompt-out", type=Path)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_policy_args(p)

    p = sub.add_parser("eval", help="run the method x query matrix")
    p.add_argument("--tree", type=Path, required=True)
    p.add_argument("--suite", type=Path, help="query suite JSON (default: bundled suite)")
    p.add_argument("--methods", default="".join(METHODS), help="method ids, e.g. 'abcdefgh' or 'c,g'")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--index-root", type=Path)
    _add_policy_args(p)
    _add_provider_args(p)
    return parser


def _print_report(report) -> None:
    m = report.metrics
    print(f"query: {report.query}")
    if report.effective_query != report.query:
        print(f"normalized: {report.effective_query}")
    for rank, item in enumerate(report.items, start=1):
        print(f"{rank:3d}  {item.similarity:.4f}  {item.token_count:6d}  {item.tag:5s} {item.display_label}")
    print(
        f"max {m.max:.4f}  mean {m.mean:.4f}  min {m.min:.4f}  std {m.stddev:.4f}  "
        f"segments {m.segments}  tokens {m.total_tokens}"
    )


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "synth":
        print(cmd_synth(args.out, args.articles, args.seed))
    elif args.command == "ingest":
        report = cmd_ingest(args.corpus, args.out, _resolve_norm(args))
        print(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True))
    elif args.command == "index":
        index = cmd_index(
            args.tree, get_method(args.method), _provider_from_args(args), args.out, args.tokenizer, args.dtype
        )
        print(f"method {index.manifest.method_id}: {index.manifest.record_count} records, "
              f"{index.manifest.chunk_count} payload chunks -> {args.out}")
    elif args.command == "query":
        report = cmd_query(
            args.index, args.text, _policy_from_args(args), args.normalize, args.cache, args.prompt_out
        )
        if compute_metrics(report.items) != report.metrics:
            raise CliError("report metrics disagree with their items", EXIT_CONFIG)
        if args.json:
            print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
        else:
            _print_report(report)
    elif args.command == "eval":
        methods = tuple(args.methods.replace(",", "").replace(" ", ""))
        RunConfig(methods=methods)  # validates method ids
        paths = cmd_eval(
            args.tree, args.out, args.suite, methods, _provider_from_args(args), _policy_from_args(args),
            args.index_root, args.tokenizer,
        )
        for path in paths:
            print(path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ProviderError, EmbeddingInputError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (ConfigError, ValueError, StructureError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IndexStoreError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
