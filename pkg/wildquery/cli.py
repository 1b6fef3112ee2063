#!/usr/bin/env python3
"""
WildQuery Command Line Interface
Corpus building, wildcard query evaluation, rule validation and the
ranking analysis experiments.

Exit codes: 0 success, 1 validation failure, 2 usage / IO / parse error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from . import config
from .env_loader import get_env_status
from .log_setup import setup_logging
from .modules.analysis import (
    GraphFamilySpec,
    converged_pt_hits,
    load_truth,
    pattern_subset_experiment,
    precision_recall,
    stability_experiment,
)
from .modules.corpus import Corpus, ingest, load_corpus, save_corpus
from .modules.errors import RuleError, WildQueryError
from .modules.extract import TupleTable, extract_all
from .modules.lexicon import Lexicon, load_lexicon
from .modules.query_model import parse_query
from .modules.rank import SCORERS, BipartiteGraph, apply_cutoff, run_ranker
from .modules.rewrite_engine import Pattern, RewriteRule, builtin_rules, expand_all, load_rules
from .modules.synthetic import build_states_corpus

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2

STABILITY_COLUMNS = ("family", "m", "n", "k", "metric", "observed_max", "bound", "pass", "scorer")


class UsageError(Exception):
    """Bad command-line input detected before the engine runs"""


# ============================================================================
# RUN CONFIGURATION
# ============================================================================

class RunConfig(BaseModel):
    corpus: Path = Field(..., description="Corpus file, .txt file or directory")
    rules: List[Path] = Field(default_factory=list, description="User rule files, applied after the built-ins")
    lexicon: List[Path] = Field(default_factory=list, description="Lexicon overlay directories")
    builtin_rules: bool = Field(True, description="Load the bundled hyponym and morphology packs")
    cap: int = Field(config.DEFAULT_CAP, ge=1, description="Snippets retrieved per pattern")
    rank: str = Field(config.DEFAULT_RANK, description="Ranking algorithm")
    cutoff: float = Field(config.DEFAULT_CUTOFF, ge=0, description="Minimum score shown")
    format: Literal["table", "tsv", "json"] = Field(config.DEFAULT_FORMAT, description="Output format")
    seed: int = Field(config.DEFAULT_SEED, description="Seed for sampled experiments")
    weighted_edges: bool = Field(False, description="PT-hits multiplies by edge weights")
    workers: int = Field(config.MAX_WORKERS, ge=1, description="Extraction threads")
    mi_pattern: Optional[str] = Field(None, description="Discriminative pattern for MI ranking")
    progress: bool = Field(False, description="Show progress bars")

    @field_validator("rank")
    @classmethod
    def _known_rank(cls, value: str) -> str:
        if value not in config.RANKERS and value != "all":
            raise ValueError(f"unknown ranker {value!r}")
        return value


@dataclass
class QueryRun:
    query: str
    patterns: List[Pattern]
    table: TupleTable
    graph: BipartiteGraph


@dataclass
class Ranking:
    ranker: str
    rows: List[Tuple[Tuple[str, ...], float]]
    pattern_weights: np.ndarray


def _run_config(args: argparse.Namespace) -> RunConfig:
    if args.corpus is None:
        raise UsageError("--corpus is required")
    return RunConfig(
        corpus=args.corpus,
        rules=args.rules or [],
        lexicon=args.lexicon or [],
        builtin_rules=not args.no_builtin_rules,
        cap=args.cap,
        rank=args.rank,
        cutoff=args.cutoff,
        format=args.format,
        seed=args.seed,
        weighted_edges=args.weighted_edges,
        workers=args.workers,
        mi_pattern=args.mi_pattern,
        progress=args.progress,
    )


# ============================================================================
# PIPELINE
# ============================================================================

def load_rule_set(cfg: RunConfig) -> List[RewriteRule]:
    rules = builtin_rules() if cfg.builtin_rules else []
    for path in cfg.rules:
        rules.extend(load_rules(path))
    return rules


def run_query(cfg: RunConfig, query_text: str, corpus: Optional[Corpus] = None,
              lex: Optional[Lexicon] = None) -> QueryRun:
    """
    Parse, expand, retrieve and extract for one wildcard query.

    Raises:
        UsageError for a query without % slots
    """
    ast = parse_query(query_text)
    if ast.arity == 0:
        raise UsageError("query must contain at least one %")
    lex = lex or load_lexicon(cfg.lexicon)
    corpus = corpus or load_corpus(cfg.corpus)
    patterns = expand_all(ast, load_rule_set(cfg), lex)
    table, graph = extract_all(patterns, corpus, cfg.cap, lex, workers=cfg.workers, progress=cfg.progress)
    return QueryRun(str(ast), patterns, table, graph)


def rank_run(run: QueryRun, ranker: str, cfg: RunConfig, corpus: Corpus) -> Ranking:
    """Score the extracted tuples; an empty graph ranks to nothing"""
    if run.graph.n == 0:
        return Ranking(ranker, [], np.zeros(run.graph.m))
    vector, weights = run_ranker(ranker, run.graph, weighted=cfg.weighted_edges, corpus=corpus,
                                 table=run.table, mi_pattern=cfg.mi_pattern or run.patterns[0].text)
    return Ranking(ranker, apply_cutoff(vector, cfg.cutoff), np.asarray(weights, dtype=float))


def _score(value: float) -> str:
    return f"{value:.{config.SCORE_DIGITS}f}"


def _pattern_rows(run: QueryRun, ranking: Ranking) -> List[Tuple[Pattern, float]]:
    """Patterns by weight, best first; ties keep expansion order"""
    rows = list(zip(run.patterns, (float(w) for w in ranking.pattern_weights)))
    order = sorted(range(len(rows)), key=lambda i: (-round(rows[i][1], config.SCORE_DIGITS), i))
    return [rows[i] for i in order]


# ============================================================================
# OUTPUT
# ============================================================================

def write_query_output(run: QueryRun, ranking: Ranking, fmt: str, out: TextIO):
    patterns = _pattern_rows(run, ranking)

    if fmt == "json":
        tuples = []
        for rank, (key, score) in enumerate(ranking.rows, start=1):
            record = run.table[key]
            tuples.append({
                "rank": rank,
                "tuple": list(record.display),
                "key": list(key),
                "score": round(score, config.SCORE_DIGITS),
                "variants": [{"values": list(v), "count": c} for v, c in record.variants.items()],
                "evidence": [{"pattern": ev.pattern, "doc_id": ev.doc_id, "offset": ev.offset}
                             for ev in record.evidence],
            })
        document = {
            "query": run.query,
            "rank": ranking.ranker,
            "patterns": [{"pattern": p.text, "weight": round(w, config.SCORE_DIGITS),
                          "source": str(p.provenance)} for p, w in patterns],
            "tuples": tuples,
        }
        out.write(json.dumps(document, ensure_ascii=False, indent=2) + "\n")
        return

    if fmt == "tsv":
        out.write("pattern\tweight\tsource\n")
        for p, w in patterns:
            out.write(f"{p.text}\t{_score(w)}\t{p.provenance}\n")
        out.write("\n")
        arity = len(ranking.rows[0][0]) if ranking.rows else 1
        slots = "\t".join(f"slot{i}" for i in range(1, arity + 1))
        out.write(f"rank\tscore\t{slots}\n")
        for rank, (key, score) in enumerate(ranking.rows, start=1):
            out.write(f"{rank}\t{_score(score)}\t" + "\t".join(run.table[key].display) + "\n")
        return

    width = max([len(p.text) for p, _ in patterns] + [7])
    out.write(f"Patterns ({len(patterns)}) ranked by {ranking.ranker}\n")
    out.write(f"  {'pattern':<{width}}  {'weight':>10}  source\n")
    for p, w in patterns:
        out.write(f"  {p.text:<{width}}  {_score(w):>10}  {p.provenance}\n")
    out.write(f"\nTuples ({len(ranking.rows)})\n")
    for rank, (key, score) in enumerate(ranking.rows, start=1):
        out.write(f"  {rank:>4}  {_score(score):>10}  {' | '.join(run.table[key].display)}\n")


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_corpus_build(args: argparse.Namespace, out: TextIO) -> int:
    corpus = ingest(args.paths)
    save_corpus(corpus, args.out)
    out.write(f"{corpus.summary()}\n")
    return EXIT_OK


def cmd_corpus_synth(args: argparse.Namespace, out: TextIO) -> int:
    docs_dir, truth_path = build_states_corpus(args.out_dir, args.seed)
    corpus = ingest([docs_dir])
    out.write(f"{docs_dir}\n{truth_path}\n{corpus.summary()}\n")
    return EXIT_OK


def cmd_query(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _run_config(args)
    if cfg.rank == "all":
        raise UsageError("--rank all is only available for eval")
    corpus = load_corpus(cfg.corpus)
    run = run_query(cfg, args.query, corpus)
    write_query_output(run, rank_run(run, cfg.rank, cfg, corpus), cfg.format, out)
    return EXIT_OK


def cmd_rules_check(args: argparse.Namespace, out: TextIO) -> int:
    paths = args.paths or [None]
    total = 0
    failed = False
    for path in paths:
        try:
            rules = load_rules(path) if path else builtin_rules(include_compound=True)
        except RuleError as e:
            out.write(f"error\t{e}\n")
            failed = True
            continue
        for rule in rules:
            out.write(f"{rule.id}\t{len(rule.heads)} heads\t{len(rule.body)} bodies\n")
        total += len(rules)
    out.write(f"{total} rules\n")
    return EXIT_VALIDATION if failed else EXIT_OK


def _stability_scorer(name: str, family: str):
    if name == "pt-hits" and family == "two-community":
        return converged_pt_hits
    if name not in SCORERS:
        raise UsageError(f"unknown scorer {name!r} (expected one of {', '.join(SCORERS)})")
    return SCORERS[name]


def cmd_stability(args: argparse.Namespace, out: TextIO) -> int:
    specs = [GraphFamilySpec(family=args.family, m=args.m, n=n, edge_probability=args.p,
                             weight_max=args.weight_max, bridge_edges=args.bridge_edges, seed=args.seed)
             for n in args.n]
    out.write("\t".join(STABILITY_COLUMNS) + "\n")
    passed = True
    for name in args.scorers:
        scorer = _stability_scorer(name, args.family)
        for k in args.k:
            report = stability_experiment(scorer, specs, k, samples=args.samples, name=name,
                                          progress=args.progress)
            passed = passed and report.passed
            for row in report.rows:
                verdict = {True: "yes", False: "no", None: "n/a"}[row.passed]
                bound = _score(row.bound) if row.bound is not None else "-"
                out.write(f"{row.family}\t{row.m}\t{row.n}\t{row.k}\t{row.metric}\t"
                          f"{_score(row.observed_max)}\t{bound}\t{verdict}\t{name}\n")
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_eval(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _run_config(args)
    truth = load_truth(args.truth)
    corpus = load_corpus(cfg.corpus)
    run = run_query(cfg, args.query, corpus)
    rankers = config.RANKERS if cfg.rank == "all" else (cfg.rank,)

    results: Dict[str, List[dict]] = {}
    for ranker in rankers:
        ranking = rank_run(run, ranker, cfg, corpus)
        points = precision_recall(ranking.rows, truth) if ranking.rows else []
        results[ranker] = [
            {"rank": rank, "recall": recall, "precision": precision, "tuple": list(run.table[key].display)}
            for rank, ((key, _), (recall, precision)) in enumerate(zip(ranking.rows, points), start=1)
        ]

    subsets = {}
    if args.subsets and run.graph.edge_count:
        subsets = pattern_subset_experiment(run.graph, truth, sizes=args.subsets, seed=cfg.seed)

    if cfg.format == "json":
        document = {
            "query": run.query,
            "points": {name: [{**row, "recall": round(row["recall"], config.SCORE_DIGITS),
                               "precision": round(row["precision"], config.SCORE_DIGITS)} for row in rows]
                       for name, rows in results.items()},
            "subsets": {str(size): [{"rank": r, "precision": round(p, config.SCORE_DIGITS)} for r, p in rows]
                        for size, rows in subsets.items()},
        }
        out.write(json.dumps(document, ensure_ascii=False, indent=2) + "\n")
        return EXIT_OK

    out.write("ranker\trank\trecall\tprecision\ttuple\n")
    for name, rows in results.items():
        for row in rows:
            out.write(f"{name}\t{row['rank']}\t{_score(row['recall'])}\t{_score(row['precision'])}\t"
                      f"{' | '.join(row['tuple'])}\n")
    if subsets:
        out.write("\nsubset_size\trank\tmean_precision\n")
        for size, rows in subsets.items():
            for rank, precision in rows:
                out.write(f"{size}\t{rank}\t{_score(precision)}\n")
    return EXIT_OK


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_cli() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="Log INFO (-v) or DEBUG (-vv) to stderr")
    common.add_argument("--progress", action="store_true", help="Show progress bars on stderr")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Seed for sampled experiments")

    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument("--corpus", type=Path, help="Corpus file, .txt file or directory")
    pipeline.add_argument("--rules", type=Path, action="append", help="Extra rule file (repeatable)")
    pipeline.add_argument("--no-builtin-rules", action="store_true", help="Skip the bundled rule packs")
    pipeline.add_argument("--lexicon", type=Path, action="append", help="Lexicon overlay directory (repeatable)")
    pipeline.add_argument("--cap", type=int, default=config.DEFAULT_CAP, help="Snippets per pattern")
    pipeline.add_argument("--rank", default=config.DEFAULT_RANK,
                          help=f"Ranking algorithm: {', '.join(config.RANKERS)} (eval also accepts all)")
    pipeline.add_argument("--cutoff", type=float, default=config.DEFAULT_CUTOFF, help="Minimum score shown")
    pipeline.add_argument("--format", default=config.DEFAULT_FORMAT, choices=config.OUTPUT_FORMATS,
                          help="Output format")
    pipeline.add_argument("--weighted-edges", action="store_true", help="PT-hits uses edge weights")
    pipeline.add_argument("--workers", type=int, default=config.MAX_WORKERS, help="Extraction threads")
    pipeline.add_argument("--mi-pattern", help="Discriminative pattern for MI (default: the query)")

    parser = argparse.ArgumentParser(
        prog="wildquery",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Wildcard query engine over a local text corpus.",
        epilog=(
            "Examples:\n"
            "  wildquery corpus synth states/\n"
            "  wildquery query --corpus states/docs \"US states such as %\"\n"
            "  wildquery eval --corpus states/docs --truth states/us_states.truth --rank all \"US states such as %\"\n"
            "  wildquery stability --n 50,100 --k 1,5"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_corpus = sub.add_parser("corpus", help="Build corpus files")
    corpus_sub = p_corpus.add_subparsers(dest="corpus_cmd", required=True, metavar="ACTION")
    p_build = corpus_sub.add_parser("build", parents=[common], help="Ingest .txt files into a corpus file")
    p_build.add_argument("paths", nargs="+", type=Path, help=".txt files or directories")
    p_build.add_argument("--out", "-o", type=Path, required=True, help="Corpus file to write")
    p_build.set_defaults(func=cmd_corpus_build)
    p_synth = corpus_sub.add_parser("synth", parents=[common], help="Write the synthetic US-states corpus")
    p_synth.add_argument("out_dir", type=Path, help="Output directory (docs/ and the truth file)")
    p_synth.set_defaults(func=cmd_corpus_synth)

    p_query = sub.add_parser(
        "query", parents=[common, pipeline], formatter_class=argparse.RawDescriptionHelpFormatter,
        help="Expand a wildcard query and rank the extracted tuples",
        description=(
            "TSV output: a pattern table (pattern, weight, source), a blank line,\n"
            "then the tuple table (rank, score, slot1..slotK)."
        ),
    )
    p_query.add_argument("query", help="Query with % slots and optional *term* stars")
    p_query.set_defaults(func=cmd_query)

    p_rules = sub.add_parser("rules", help="Rule file tools")
    rules_sub = p_rules.add_subparsers(dest="rules_cmd", required=True, metavar="ACTION")
    p_check = rules_sub.add_parser("check", parents=[common], help="Validate rule files (built-ins if none given)")
    p_check.add_argument("paths", nargs="*", type=Path, help="Rule files")
    p_check.set_defaults(func=cmd_rules_check)

    p_stab = sub.add_parser(
        "stability", parents=[common], formatter_class=argparse.RawDescriptionHelpFormatter,
        help="Measure rank changes under edge removal",
        description="TSV columns: " + ", ".join(STABILITY_COLUMNS) + ". Exit 1 when a bound is violated.",
    )
    p_stab.add_argument("--family", default="random", choices=("random", "two-community"))
    p_stab.add_argument("--m", type=int, default=12, help="Patterns per graph")
    p_stab.add_argument("--n", type=_int_list, default=[50, 100, 500, 1000], help="Tuple counts, comma-separated")
    p_stab.add_argument("--k", type=_int_list, default=[1, 5], help="Edges removed, comma-separated")
    p_stab.add_argument("--samples", type=int, default=config.STABILITY_SAMPLES, help="Edge subsets per graph")
    p_stab.add_argument("--p", type=float, default=0.25, help="Edge probability (random family)")
    p_stab.add_argument("--weight-max", type=int, default=3, help="Largest edge weight (random family)")
    p_stab.add_argument("--bridge-edges", type=int, default=0, help="Bridge tuples (two-community family)")
    p_stab.add_argument("--scorers", type=_name_list, default=["npatterns", "npages"],
                        help=f"Scorers, comma-separated: {', '.join(SCORERS)}")
    p_stab.set_defaults(func=cmd_stability)

    p_eval = sub.add_parser(
        "eval", parents=[common, pipeline], formatter_class=argparse.RawDescriptionHelpFormatter,
        help="Score a query's ranking against a truth file",
        description=(
            "TSV columns: ranker, rank, recall, precision, tuple.\n"
            "With --subsets a second table follows: subset_size, rank, mean_precision."
        ),
    )
    p_eval.add_argument("query", help="Query with % slots")
    p_eval.add_argument("--truth", type=Path, required=True, help="Truth file, '|'-separated alternates")
    p_eval.add_argument("--subsets", type=_int_list, help="PT-hits with random pattern subsets of these sizes")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_cli()
    args = parser.parse_args(argv)
    out = out or sys.stdout
    level = {0: None, 1: "INFO"}.get(args.verbose, "DEBUG")
    setup_logging(level)
    if args.verbose > 1:
        active = [var for var, status in get_env_status().items() if status["set"]]
        logger.debug("[CLI] environment overrides: %s", ", ".join(active) or "none")

    try:
        return int(args.func(args, out))
    except (UsageError, ValidationError, WildQueryError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
