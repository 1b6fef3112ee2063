#!/usr/bin/env python3
"""
EXTRACTION - NOUN PHRASE CHUNKING AND SLOT BINDING
Matched sentences are tagged with a small rule-based tagger, chunked with
an NLTK regexp grammar and the noun phrases found at % positions become
candidate tuples. Every (pattern, tuple, document) match is recorded as
evidence for the pattern/tuple graph.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import nltk
from tqdm import tqdm

from .. import config
from .corpus import Corpus, LocalScanBackend, RetrievalBackend, Sentence, all_alignments
from .lexicon import Lexicon
from .query_model import Segment, parse_query
from .rank import BipartiteGraph
from .rewrite_engine import Pattern
from .text import has_alpha, normalize_phrase

logger = logging.getLogger(__name__)

NP_GRAMMAR = r"NP: {<DT>?<JJ>*<NN.*>+}"

DETERMINERS = frozenset({
    "a", "an", "the", "this", "these", "those", "my", "our", "your", "his", "her",
    "its", "their", "some", "many", "several", "each", "every", "any", "no", "another",
})
CONJUNCTIONS = frozenset({"and", "or"})

_CHUNKER = nltk.RegexpParser(NP_GRAMMAR)

Span = Tuple[int, int]


# ============================================================================
# DATA TYPES
# ============================================================================

@dataclass(frozen=True)
class NounPhrase:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class CandidateTuple:
    values: Tuple[str, ...]
    key: Tuple[str, ...]

    @classmethod
    def from_values(cls, values: Sequence[str]) -> "CandidateTuple":
        return cls(tuple(values), tuple(normalize_phrase(v) for v in values))


@dataclass(frozen=True)
class Evidence:
    pattern: str
    key: Tuple[str, ...]
    doc_id: int
    offset: int


@dataclass
class TupleRecord:
    key: Tuple[str, ...]
    variants: Dict[Tuple[str, ...], int] = field(default_factory=dict)
    evidence: List[Evidence] = field(default_factory=list)

    @property
    def display(self) -> Tuple[str, ...]:
        """Most frequent surface variant; first seen wins ties"""
        return max(self.variants.items(), key=lambda item: item[1])[0]

    def documents(self, pattern: Optional[str] = None) -> Set[int]:
        return {ev.doc_id for ev in self.evidence if pattern is None or ev.pattern == pattern}


class TupleTable:
    """Candidate tuples keyed by normalized key, in first-seen order"""

    def __init__(self):
        self._records: Dict[Tuple[str, ...], TupleRecord] = {}
        self._seen: Set[Evidence] = set()

    def add(self, candidate: CandidateTuple, evidence: Evidence) -> bool:
        if evidence in self._seen:
            return False
        self._seen.add(evidence)
        record = self._records.setdefault(candidate.key, TupleRecord(candidate.key))
        record.variants[candidate.values] = record.variants.get(candidate.values, 0) + 1
        record.evidence.append(evidence)
        return True

    def __getitem__(self, key: Tuple[str, ...]) -> TupleRecord:
        return self._records[key]

    def __contains__(self, key) -> bool:
        return key in self._records

    def __iter__(self) -> Iterator[TupleRecord]:
        return iter(self._records.values())

    def __len__(self) -> int:
        return len(self._records)

    def keys(self) -> List[Tuple[str, ...]]:
        return list(self._records)

    def to_graph(self, pattern_texts: Sequence[str]) -> BipartiteGraph:
        """Edge p->t weighted by the number of distinct documents behind it"""
        p_index = {text: i for i, text in enumerate(pattern_texts)}
        docs: Dict[Tuple[int, int], Set[int]] = {}
        for t, record in enumerate(self._records.values()):
            for ev in record.evidence:
                docs.setdefault((p_index[ev.pattern], t), set()).add(ev.doc_id)
        edges = {edge: len(ids) for edge, ids in docs.items()}
        return BipartiteGraph(pattern_texts, self.keys(), edges)


# ============================================================================
# TAGGING AND CHUNKING
# ============================================================================

def _lowercase_tag(lex: Lexicon, word: str) -> str:
    if word in DETERMINERS:
        return "DT"
    if lex.is_noun(word):
        return "NN"
    if word in lex.adjectives:
        return "JJ"
    return "O"


def tag_sentence(sentence: Sentence, lex: Lexicon) -> List[str]:
    """
    Coarse tags: DT, JJ, NN (common noun), NNP (proper noun), O (other).
    Known multi-word nouns are tagged first, longest match wins.
    """
    surfaces, folded = sentence.surfaces, sentence.folded
    n = len(surfaces)
    tags = ["O"] * n
    longest = lex.max_phrase_len
    i = 0
    while i < n:
        width = 0
        for size in range(min(longest, n - i), 1, -1):
            if tuple(folded[i:i + size]) in lex.noun_phrases:
                width = size
                break
        if width:
            tags[i:i + width] = ["NN"] * width
            i += width
            continue

        surface, word = surfaces[i], folded[i]
        if not has_alpha(surface) or surface[0].isdigit():
            tags[i] = "O"
        elif surface[0].isupper():
            initial = not any(has_alpha(s) for s in surfaces[:i])
            if not initial:
                tags[i] = "O" if word == "i" else "NNP"
            elif word in lex.proper_stoplist or word in DETERMINERS:
                tags[i] = _lowercase_tag(lex, word)
            elif lex.is_noun(word):
                tags[i] = "NN"
            elif i + 1 < n and surfaces[i + 1][:1].isupper() and has_alpha(surfaces[i + 1]):
                tags[i] = "NNP"
            else:
                tags[i] = _lowercase_tag(lex, word)
        else:
            tags[i] = _lowercase_tag(lex, word)
        i += 1
    return tags


def chunk_spans(tags: Sequence[str], start: int = 0, end: Optional[int] = None) -> List[Span]:
    """Maximal left-greedy NP spans within tags[start:end]"""
    end = len(tags) if end is None else end
    if end <= start:
        return []
    tree = _CHUNKER.parse([(str(i), tags[i]) for i in range(start, end)])
    spans = []
    for subtree in tree.subtrees(filter=lambda t: t.label() == "NP"):
        leaves = subtree.leaves()
        spans.append((int(leaves[0][0]), int(leaves[-1][0]) + 1))
    return spans


def chunk_noun_phrases(sentence: Sentence, lex: Lexicon) -> List[NounPhrase]:
    tags = tag_sentence(sentence, lex)
    return [NounPhrase(" ".join(sentence.surfaces[s:e]), s, e) for s, e in chunk_spans(tags)]


# ============================================================================
# SLOT BINDING
# ============================================================================

def _separator_after(folded: Sequence[str], pos: int, end: int) -> Optional[int]:
    """Position after a list separator (',' 'and' 'or' ', and' ', or') at pos"""
    if pos < end and folded[pos] == ",":
        pos += 1
        if pos < end and folded[pos] in CONJUNCTIONS:
            pos += 1
        return pos
    if pos < end and folded[pos] in CONJUNCTIONS:
        return pos + 1
    return None


def _separator_before(folded: Sequence[str], pos: int, start: int) -> Optional[int]:
    """End position of the item preceding a separator that ends at pos"""
    if pos - 1 >= start and folded[pos - 1] in CONJUNCTIONS:
        pos -= 1
        if pos - 1 >= start and folded[pos - 1] == ",":
            pos -= 1
        return pos
    if pos - 1 >= start and folded[pos - 1] == ",":
        return pos - 1
    return None


def _list_forward(chunks: Sequence[Span], folded: Sequence[str], start: int, end: int) -> List[Span]:
    by_start = {s: (s, e) for s, e in chunks}
    if start not in by_start:
        return []
    items = [by_start[start]]
    while True:
        nxt = _separator_after(folded, items[-1][1], end)
        if nxt is None or nxt not in by_start:
            return items
        items.append(by_start[nxt])


def _list_backward(chunks: Sequence[Span], folded: Sequence[str], start: int, end: int) -> List[Span]:
    by_end = {e: (s, e) for s, e in chunks}
    if end not in by_end:
        return []
    items = [by_end[end]]
    while True:
        prev = _separator_before(folded, items[-1][0], start)
        if prev is None or prev not in by_end:
            return list(reversed(items))
        items.append(by_end[prev])


def _slot_bindings(kind: str, tags: Sequence[str], folded: Sequence[str], start: int, end: int) -> List[Span]:
    chunks = chunk_spans(tags, start, end)
    if kind == "whole":
        return chunks
    if kind == "trailing":
        return _list_forward(chunks, folded, start, end)
    if kind == "leading":
        return _list_backward(chunks, folded, start, end)
    items = _list_forward(chunks, folded, start, end)
    return items if items and items[-1][1] == end else []


def _slot_regions(layout: Sequence[Segment], positions: Sequence[int], n: int) -> List[Tuple[str, int, int]]:
    """(kind, start, end) of every slot for one placement of the literal runs"""
    bounds: List[Tuple[int, int]] = []
    run_index = 0
    for seg in layout:
        if not seg.is_slot:
            bounds.append((positions[run_index], positions[run_index] + len(seg.words)))
            run_index += 1
        else:
            bounds.append((-1, -1))

    regions = []
    for i, seg in enumerate(layout):
        if not seg.is_slot:
            continue
        has_before = i > 0
        has_after = i + 1 < len(layout)
        start = bounds[i - 1][1] if has_before else 0
        end = bounds[i + 1][0] if has_after else n
        if has_before and has_after:
            kind = "middle"
        elif has_before:
            kind = "trailing"
        elif has_after:
            kind = "leading"
        else:
            kind = "whole"
        regions.append((kind, start, end))
    return regions


def match_pattern(pattern: Pattern, sentence: Sentence, lex: Lexicon,
                  max_tuples: int = config.MAX_TUPLES_PER_SENTENCE) -> List[Tuple[CandidateTuple, Evidence]]:
    """
    Bind the noun phrases at a pattern's % positions in one sentence.

    A slot holding a conjunction list yields one tuple per conjunct;
    multi-slot patterns yield the cartesian product of their slot bindings,
    capped at max_tuples per sentence.
    """
    text = pattern if isinstance(pattern, str) else pattern.text
    ast = parse_query(text)
    if ast.arity == 0:
        return []
    layout = ast.literal_runs()
    folded = sentence.folded
    tags = tag_sentence(sentence, lex)

    results: Dict[Tuple[str, ...], Tuple[CandidateTuple, Evidence]] = {}
    for positions in all_alignments(layout, folded):
        per_slot = []
        for kind, start, end in _slot_regions(layout, positions, len(folded)):
            spans = _slot_bindings(kind, tags, folded, start, end)
            if not spans:
                break
            per_slot.append([" ".join(sentence.surfaces[s:e]) for s, e in spans])
        else:
            for values in itertools.product(*per_slot):
                candidate = CandidateTuple.from_values(values)
                if candidate.key not in results:
                    evidence = Evidence(text, candidate.key, sentence.doc_id, sentence.offset)
                    results[candidate.key] = (candidate, evidence)
                if len(results) >= max_tuples:
                    return list(results.values())
    return list(results.values())


# ============================================================================
# PIPELINE
# ============================================================================

def extract_all(patterns: Sequence[Pattern], corpus: Corpus, cap: int, lex: Lexicon,
                workers: Optional[int] = None, progress: bool = False,
                max_tuples: int = config.MAX_TUPLES_PER_SENTENCE,
                backend: Optional[RetrievalBackend] = None) -> Tuple[TupleTable, BipartiteGraph]:
    """
    Retrieve and extract for every pattern, then build the graph.

    Args:
        patterns: Extraction patterns (duplicate texts are ignored)
        corpus: Corpus to scan
        cap: Snippets per pattern
        lex: Lexicon for the chunker
        workers: Thread pool size (config.MAX_WORKERS by default)
        progress: Show a progress bar
        backend: Snippet source (a linear scan over corpus by default)

    Returns:
        (tuple table, pattern/tuple graph)
    """
    if not patterns:
        raise ValueError("extract_all needs at least one pattern")
    unique: Dict[str, Pattern] = {}
    for pattern in patterns:
        unique.setdefault(pattern.text, pattern)
    ordered = list(unique.values())
    backend = backend or LocalScanBackend(corpus)

    def work(pattern: Pattern) -> List[Tuple[CandidateTuple, Evidence]]:
        matches = []
        for sentence in backend.search(pattern.text, cap):
            matches.extend(match_pattern(pattern, sentence, lex, max_tuples))
        return matches

    table = TupleTable()
    with ThreadPoolExecutor(max_workers=workers or config.MAX_WORKERS) as pool:
        results = pool.map(work, ordered)
        for pattern, matches in tqdm(zip(ordered, results), total=len(ordered),
                                     desc="patterns", disable=not progress):
            for candidate, evidence in matches:
                table.add(candidate, evidence)
            logger.debug("[EXTRACT] %r: %d matches", pattern.text, len(matches))

    graph = table.to_graph([p.text for p in ordered])
    logger.info("[EXTRACT] %d patterns, %d tuples, %d edges", graph.m, graph.n, graph.edge_count)
    return table, graph
