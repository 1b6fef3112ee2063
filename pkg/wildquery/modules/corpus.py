#!/usr/bin/env python3
"""
CORPUS - INGEST, SENTENCE SPLITTING AND SNIPPET RETRIEVAL
Local stand-in for a web search engine: documents are plain UTF-8 text,
split into sentences, and scanned linearly for a pattern's literal runs.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import FrozenSet, Iterable, Iterator, List, Optional, Protocol, Sequence, Tuple, Union

from .errors import CorpusFormatError, CorpusIOError, NotUtf8Error
from .query_model import Segment, parse_query
from .text import fold, tokenize

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CORPUS_MAGIC = "wildquery-corpus"
CORPUS_VERSION = 1

ABBREVIATIONS = frozenset({
    "dr.", "mr.", "mrs.", "ms.", "st.", "jr.", "sr.", "prof.", "gen.", "gov.",
    "sen.", "rep.", "rev.", "capt.", "col.", "lt.", "sgt.", "mt.", "ft.",
    "inc.", "ltd.", "co.", "corp.", "vs.", "etc.", "e.g.", "i.e.", "no.",
    "u.s.", "u.k.", "u.n.", "d.c.", "a.m.", "p.m.",
    "jan.", "feb.", "mar.", "apr.", "aug.", "sept.", "sep.", "oct.", "nov.", "dec.",
})

_BLOCK_RE = re.compile(r"(?:(?!\n[ \t]*\n).)+", re.S)
_TERMINAL_RE = re.compile(r"[.!?]+[\"'’”)\]]*(?=\s)")
_OPENERS = "\"'“‘(["
_CLOSERS = "\"'’”)]"


# ============================================================================
# DATA TYPES
# ============================================================================

@dataclass(frozen=True)
class Sentence:
    doc_id: int
    index: int
    offset: int
    end: int
    surfaces: Tuple[str, ...]
    folded: Tuple[str, ...]

    def __post_init__(self):
        if not self.surfaces or len(self.surfaces) != len(self.folded):
            raise CorpusFormatError(f"sentence {self.doc_id}:{self.offset} has no tokens")

    @classmethod
    def from_text(cls, text: str, doc_id: int, index: int, offset: int) -> Optional["Sentence"]:
        surfaces = tuple(tokenize(text))
        if not surfaces:
            return None
        return cls(doc_id, index, offset, offset + len(text), surfaces, tuple(fold(t) for t in surfaces))

    @property
    def tokens(self) -> List[Tuple[str, str]]:
        return list(zip(self.surfaces, self.folded))

    @cached_property
    def vocabulary(self) -> FrozenSet[str]:
        return frozenset(self.folded)

    def __len__(self) -> int:
        return len(self.surfaces)


@dataclass(frozen=True)
class Document:
    id: int
    source: str
    text: str
    sentences: Tuple[Sentence, ...]

    @cached_property
    def vocabulary(self) -> FrozenSet[str]:
        words = set()
        for sentence in self.sentences:
            words.update(sentence.folded)
        return frozenset(words)


@dataclass
class Corpus:
    documents: Tuple[Document, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for expected, document in enumerate(self.documents):
            if document.id != expected:
                raise CorpusFormatError(f"document ids must be dense; found {document.id} at {expected}")

    @property
    def doc_count(self) -> int:
        return len(self.documents)

    @property
    def sentence_count(self) -> int:
        return sum(len(d.sentences) for d in self.documents)

    def sentences(self) -> Iterator[Sentence]:
        for document in self.documents:
            yield from document.sentences

    def summary(self) -> str:
        docs = self.doc_count
        return (f"{docs} document{'s' if docs != 1 else ''}, "
                f"{self.sentence_count} sentence{'s' if self.sentence_count != 1 else ''}")


# ============================================================================
# SENTENCE SPLITTING
# ============================================================================

def _is_abbreviation(text: str, start: int, period: int) -> bool:
    words = text[start:period + 1].split()
    if not words:
        return False
    word = words[-1].lstrip(_OPENERS).lower()
    if word in ABBREVIATIONS:
        return True
    # single initial, e.g. "J. R. R. Tolkien"
    return len(word) == 2 and word[0].isalpha() and word[1] == "."


def split_sentences(text: str) -> List[Tuple[int, int]]:
    """
    Character spans of the sentences in text. A sentence ends at . ! or ?
    followed by whitespace and a capital letter, unless the period closes
    a known abbreviation or an initial. Blank lines always end a sentence.
    """
    spans = []
    for block in _BLOCK_RE.finditer(text):
        start, stop = block.start(), block.end()
        for terminal in _TERMINAL_RE.finditer(text, start, stop):
            follow = terminal.end()
            while follow < stop and text[follow].isspace():
                follow += 1
            nxt = follow
            while nxt < stop and text[nxt] in _OPENERS:
                nxt += 1
            if nxt >= stop or not text[nxt].isupper():
                continue
            if terminal.group().rstrip(_CLOSERS) == "." and _is_abbreviation(text, start, terminal.start()):
                continue
            spans.append((start, terminal.end()))
            start = follow
        spans.append((start, stop))

    trimmed = []
    for start, stop in spans:
        chunk = text[start:stop]
        if not chunk.strip():
            continue
        lead = len(chunk) - len(chunk.lstrip())
        trimmed.append((start + lead, start + len(chunk.rstrip())))
    return trimmed


def build_document(doc_id: int, source: str, text: str) -> Document:
    sentences = []
    for start, end in split_sentences(text):
        sentence = Sentence.from_text(text[start:end], doc_id, len(sentences), start)
        if sentence is not None:
            sentences.append(sentence)
    return Document(doc_id, source, text, tuple(sentences))


# ============================================================================
# INGEST / SERIALIZATION
# ============================================================================

def _read_text(path: Path) -> str:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CorpusIOError(f"cannot read {path}: {e.strerror or e}", str(path)) from e
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise NotUtf8Error(f"{path} is not valid UTF-8 (byte {e.start})", str(path)) from e


def _expand_paths(paths: Sequence[PathLike]) -> List[Path]:
    files: List[Path] = []
    for entry in paths:
        path = Path(entry)
        if path.is_dir():
            files.extend(sorted(p for p in path.rglob("*.txt") if p.is_file()))
        elif path.exists():
            files.append(path)
        else:
            raise CorpusIOError(f"no such file or directory: {path}", str(path))
    return files


def ingest(paths: Sequence[PathLike]) -> Corpus:
    """
    Build a corpus from text files and directory trees.

    Args:
        paths: Files, or directories whose *.txt files are taken in
            alphabetical order

    Returns:
        Corpus with dense document ids in input order

    Raises:
        CorpusIOError, NotUtf8Error
    """
    documents = []
    for path in _expand_paths(paths):
        documents.append(build_document(len(documents), str(path), _read_text(path)))
    corpus = Corpus(tuple(documents))
    logger.info("[CORPUS] ingested %s", corpus.summary())
    return corpus


def corpus_from_texts(texts: Iterable[str], source_prefix: str = "text") -> Corpus:
    """In-memory corpus, one document per text"""
    return Corpus(tuple(build_document(i, f"{source_prefix}-{i}", text) for i, text in enumerate(texts)))


def save_corpus(corpus: Corpus, out: PathLike) -> Path:
    """
    Serialize as line-delimited JSON: a header object followed by one
    object per document. Sentences are re-derived on load.
    """
    out = Path(out)
    header = {
        "magic": CORPUS_MAGIC,
        "version": CORPUS_VERSION,
        "documents": corpus.doc_count,
        "sentences": corpus.sentence_count,
    }
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write(json.dumps(header, sort_keys=True) + "\n")
            for document in corpus.documents:
                record = {"id": document.id, "source": document.source, "text": document.text}
                handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    except OSError as e:
        raise CorpusIOError(f"cannot write {out}: {e.strerror or e}", str(out)) from e
    logger.info("[CORPUS] wrote %s (%s)", out, corpus.summary())
    return out


def _is_corpus_file(path: Path) -> bool:
    try:
        with path.open("r", encoding="utf-8") as handle:
            first = handle.readline()
    except (OSError, UnicodeDecodeError):
        return False
    return CORPUS_MAGIC in first and first.lstrip().startswith("{")


def read_corpus_file(path: PathLike) -> Corpus:
    path = Path(path)
    lines = _read_text(path).splitlines()
    try:
        header = json.loads(lines[0]) if lines else {}
    except json.JSONDecodeError as e:
        raise CorpusFormatError(f"{path}: bad header: {e}", str(path)) from e
    if header.get("magic") != CORPUS_MAGIC:
        raise CorpusFormatError(f"{path}: not a corpus file", str(path))
    if header.get("version") != CORPUS_VERSION:
        raise CorpusFormatError(f"{path}: unsupported corpus version {header.get('version')}", str(path))

    documents = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            documents.append(build_document(len(documents), record["source"], record["text"]))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise CorpusFormatError(f"{path}:{number}: bad document record: {e}", str(path)) from e
    if len(documents) != header.get("documents", len(documents)):
        raise CorpusFormatError(f"{path}: header promises {header['documents']} documents, "
                                f"found {len(documents)}", str(path))
    return Corpus(tuple(documents))


def load_corpus(path: PathLike) -> Corpus:
    """Load a serialized corpus file, a single .txt file or a directory tree"""
    path = Path(path)
    if path.is_file() and _is_corpus_file(path):
        corpus = read_corpus_file(path)
        logger.info("[CORPUS] loaded %s from %s", corpus.summary(), path)
        return corpus
    return ingest([path])


# ============================================================================
# RETRIEVAL
# ============================================================================

def _find_run(folded: Sequence[str], run: Sequence[str], start: int, stop: int) -> Iterator[int]:
    width = len(run)
    first = run[0]
    for i in range(start, stop - width + 1):
        if folded[i] == first and tuple(folded[i:i + width]) == tuple(run):
            yield i


def _min_tail(layout: Sequence[Segment], index: int) -> int:
    """Tokens still required after segment index"""
    return sum(1 if seg.is_slot else len(seg.words) for seg in layout[index + 1:])


def first_alignment(layout: Sequence[Segment], folded: Sequence[str]) -> Optional[List[int]]:
    """Earliest placement of every literal run (start index per run), or None"""
    positions = []
    pos = 0
    need = 0
    for seg in layout:
        if seg.is_slot:
            need += 1
            continue
        hit = next(_find_run(folded, seg.words, pos + need, len(folded)), None)
        if hit is None:
            return None
        positions.append(hit)
        pos = hit + len(seg.words)
        need = 0
    if pos + need > len(folded):
        return None
    return positions


def all_alignments(layout: Sequence[Segment], folded: Sequence[str], limit: int = 64) -> List[List[int]]:
    """Every placement of the literal runs leaving at least one token per slot"""
    results: List[List[int]] = []
    n = len(folded)

    def place(index: int, pos: int, need: int, chosen: List[int]):
        if len(results) >= limit:
            return
        if index == len(layout):
            if pos + need <= n:
                results.append(list(chosen))
            return
        seg = layout[index]
        if seg.is_slot:
            place(index + 1, pos, need + 1, chosen)
            return
        stop = n - _min_tail(layout, index)
        for hit in _find_run(folded, seg.words, pos + need, stop):
            chosen.append(hit)
            place(index + 1, hit + len(seg.words), 0, chosen)
            chosen.pop()

    place(0, 0, 0, [])
    return results


def sentence_matches(layout: Sequence[Segment], sentence: Sentence) -> bool:
    words = [w for seg in layout if not seg.is_slot for w in seg.words]
    if not sentence.vocabulary.issuperset(words):
        return False
    return first_alignment(layout, sentence.folded) is not None


class RetrievalBackend(Protocol):
    def search(self, pattern_text: str, cap: int) -> List[Sentence]:
        ...


class LocalScanBackend:
    """Linear scan over an in-memory corpus"""

    def __init__(self, corpus: Corpus):
        self.corpus = corpus

    def search(self, pattern_text: str, cap: int) -> List[Sentence]:
        if cap < 1:
            raise ValueError(f"cap must be >= 1, got {cap}")
        layout = parse_query(pattern_text).literal_runs()
        hits = []
        for sentence in self.corpus.sentences():
            if sentence_matches(layout, sentence):
                hits.append(sentence)
                if len(hits) >= cap:
                    break
        logger.debug("[CORPUS] %r: %d snippets (cap %d)", pattern_text, len(hits), cap)
        return hits


def retrieve(pattern, corpus: Corpus, cap: int) -> List[Sentence]:
    """Sentences matching a Pattern (or pattern text), in (doc, offset) order"""
    text = pattern if isinstance(pattern, str) else pattern.text
    return LocalScanBackend(corpus).search(text, cap)


def _contains_run(document: Document, run: Tuple[str, ...]) -> bool:
    for sentence in document.sentences:
        if next(_find_run(sentence.folded, run, 0, len(sentence.folded)), None) is not None:
            return True
    return False


def document_frequency(corpus: Corpus, runs: Iterable[Sequence[str]]) -> int:
    """Number of documents containing every one of the folded token runs"""
    runs = [tuple(r) for r in runs if r]
    if not runs:
        return corpus.doc_count
    words = {w for run in runs for w in run}
    count = 0
    for document in corpus.documents:
        if document.vocabulary.issuperset(words) and all(_contains_run(document, r) for r in runs):
            count += 1
    return count


def phrase_runs(text: str) -> Tuple[str, ...]:
    return tuple(fold(t) for t in tokenize(text))
