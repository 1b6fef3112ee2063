#!/usr/bin/env python3
"""
LEXICON - SIMILAR TERMS, NOUN INFLECTION AND VERB FORMS
Loaded from plain UTF-8 data files; '#' lines are comments.

  similar.tsv          word TAB comma-separated similar terms
  inflect.tsv          singular TAB plural
  verbs.tsv            base TAB past TAB past participle TAB 3rd-person present
  nouns.txt            one noun (or multi-word noun) per line
  adjectives.txt       one adjective per line
  proper_stoplist.txt  sentence-initial words never read as proper nouns
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .. import config
from .errors import CorpusIOError, NotUtf8Error
from .text import fold, tokenize

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

VERB_FORMS = ("base", "past", "past_participle", "present_3s")

_CONSONANT_Y = re.compile(r"[^aeiou]y$", re.IGNORECASE)
_SIBILANT = re.compile(r"(?:s|x|z|ch|sh)$", re.IGNORECASE)
_SIBILANT_ES = re.compile(r"(?:s|x|z|ch|sh)es$", re.IGNORECASE)


@dataclass(frozen=True)
class VerbForms:
    base: str
    past: str
    past_participle: str
    present_3s: str

    def get(self, form: str) -> str:
        return getattr(self, form)


@dataclass(frozen=True)
class Lexicon:
    """Immutable word tables. Keys are case-folded."""
    similar: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    plural_of: Dict[str, str] = field(default_factory=dict)
    singular_of: Dict[str, str] = field(default_factory=dict)
    noun_vocab: FrozenSet[str] = frozenset()
    noun_phrases: FrozenSet[Tuple[str, ...]] = frozenset()
    adjectives: FrozenSet[str] = frozenset()
    proper_stoplist: FrozenSet[str] = frozenset()
    verbs: Dict[str, VerbForms] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "Lexicon":
        return cls()

    def is_noun(self, word: str) -> bool:
        """Known noun, or a regular plural of one"""
        key = fold(word)
        if key in self.noun_vocab:
            return True
        return key.endswith("s") and fold(singularize(self, key)) in self.noun_vocab

    @property
    def max_phrase_len(self) -> int:
        return max((len(p) for p in self.noun_phrases), default=0)


# ============================================================================
# LOOKUPS
# ============================================================================

def similar_terms(lex: Lexicon, word: str) -> List[str]:
    """Similar terms in file order; empty for unknown words"""
    return list(lex.similar.get(fold(word), ()))


def _match_case(template: str, word: str) -> str:
    if template.isupper() and len(template) > 1:
        return word.upper()
    if template[:1].isupper():
        return word[:1].upper() + word[1:]
    return word


def _split_last(noun: str) -> Tuple[str, str]:
    head, _, last = noun.rstrip().rpartition(" ")
    return (head + " " if head else ""), last


def pluralize(lex: Lexicon, noun: str) -> str:
    """Plural of a noun; multi-word nouns inflect their last word"""
    prefix, word = _split_last(noun)
    if not word:
        return noun
    key = fold(word)
    if key in lex.plural_of:
        return prefix + _match_case(word, lex.plural_of[key])
    if key in lex.singular_of:
        return noun
    if _CONSONANT_Y.search(word):
        return prefix + word[:-1] + "ies"
    if _SIBILANT.search(word):
        return prefix + word + "es"
    return prefix + word + "s"


def singularize(lex: Lexicon, noun: str) -> str:
    prefix, word = _split_last(noun)
    if not word:
        return noun
    key = fold(word)
    if key in lex.singular_of:
        return prefix + _match_case(word, lex.singular_of[key])
    if key in lex.plural_of:
        return noun
    lowered = key
    if lowered.endswith("ies") and len(word) > 4:
        return prefix + word[:-3] + "y"
    if _SIBILANT_ES.search(word):
        return prefix + word[:-2]
    if lowered.endswith("ss") or lowered.endswith("us") or lowered.endswith("is"):
        return noun
    if lowered.endswith("s") and len(word) > 1:
        return prefix + word[:-1]
    return noun


def _regular_verb_forms(base: str) -> VerbForms:
    if base.endswith("e"):
        past = base + "d"
    elif _CONSONANT_Y.search(base):
        past = base[:-1] + "ied"
    else:
        past = base + "ed"
    if _CONSONANT_Y.search(base):
        present = base[:-1] + "ies"
    elif _SIBILANT.search(base):
        present = base + "es"
    else:
        present = base + "s"
    return VerbForms(base, past, past, present)


def _guess_base(word: str) -> str:
    w = word
    if w.endswith("ied") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("ed") and len(w) > 3:
        stem = w[:-2]
        if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in "lsz":
            return stem[:-1]
        if stem.endswith(("at", "iz", "bl", "ur", "ir", "iv", "ac", "uc", "ov")):
            return stem + "e"
        return stem
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if _SIBILANT_ES.search(w):
        return w[:-2]
    if w.endswith("s") and not w.endswith("ss") and len(w) > 2:
        return w[:-1]
    return w


def verb_forms(lex: Lexicon, verb: str) -> Optional[VerbForms]:
    """Forms of a verb given any of its forms; None if unknown to the table"""
    return lex.verbs.get(fold(verb))


def inflect_verb(lex: Lexicon, verb: str, form: str) -> str:
    """
    Inflect a verb (given in any form) to base / past / past_participle /
    present_3s. Table first, then regular-verb heuristics with a warning.
    """
    if form not in VERB_FORMS:
        raise ValueError(f"unknown verb form: {form}")
    forms = verb_forms(lex, verb)
    if forms is None:
        if not verb.isalpha():
            logger.warning("[LEXICON] cannot inflect %r; left unchanged", verb)
            return verb
        forms = _regular_verb_forms(_guess_base(fold(verb)))
        logger.warning("[LEXICON] %r not in verb table; guessed %s=%r", verb, form, forms.get(form))
    return _match_case(verb, forms.get(form))


# ============================================================================
# LOADING
# ============================================================================

def _read_lines(path: Path) -> Iterator[Tuple[int, str]]:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CorpusIOError(f"cannot read {path}: {e}", str(path)) from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise NotUtf8Error(f"{path} is not valid UTF-8", str(path)) from e
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield number, line.rstrip("\n")


class _Builder:
    """Mutable accumulator; later directories overlay earlier ones"""

    def __init__(self):
        self.similar: Dict[str, List[str]] = {}
        self.plural_of: Dict[str, str] = {}
        self.singular_of: Dict[str, str] = {}
        self.nouns: set = set()
        self.adjectives: set = set()
        self.stoplist: set = set()
        self.verbs: Dict[str, VerbForms] = {}

    def add_similar(self, path: Path):
        for number, line in _read_lines(path):
            key, _, values = line.partition("\t")
            key = fold(key.strip())
            if not key or " " in key:
                logger.warning("[LEXICON] %s:%d: similar-term key must be one word; skipped", path, number)
                continue
            terms = self.similar.setdefault(key, [])
            for value in values.split(","):
                value = " ".join(value.split())
                if value and fold(value) != key and value not in terms:
                    terms.append(value)

    def add_inflections(self, path: Path):
        for number, line in _read_lines(path):
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) != 2 or not all(parts):
                logger.warning("[LEXICON] %s:%d: expected 'singular<TAB>plural'; skipped", path, number)
                continue
            singular, plural = fold(parts[0]), fold(parts[1])
            self.plural_of[singular] = plural
            self.singular_of[plural] = singular

    def add_verbs(self, path: Path):
        for number, line in _read_lines(path):
            parts = [fold(p.strip()) for p in line.split("\t")]
            if len(parts) != 4 or not all(parts):
                logger.warning("[LEXICON] %s:%d: expected 4 verb forms; skipped", path, number)
                continue
            forms = VerbForms(*parts)
            for key in dict.fromkeys(parts):
                self.verbs[key] = forms

    def add_words(self, path: Path, target: set):
        for _, line in _read_lines(path):
            target.add(" ".join(fold(t) for t in tokenize(line.strip())))

    def build(self) -> Lexicon:
        nouns = set(self.nouns)
        nouns.update(self.plural_of)
        nouns.update(self.singular_of)
        # multi-word nouns inflect their last word
        for noun in list(nouns):
            if " " in noun:
                head, _, last = noun.rpartition(" ")
                if last in self.plural_of:
                    nouns.add(f"{head} {self.plural_of[last]}")
        single = frozenset(n for n in nouns if " " not in n)
        phrases = frozenset(tuple(n.split(" ")) for n in nouns if " " in n)
        return Lexicon(
            similar={k: tuple(v) for k, v in self.similar.items() if v},
            plural_of=dict(self.plural_of),
            singular_of=dict(self.singular_of),
            noun_vocab=single,
            noun_phrases=phrases,
            adjectives=frozenset(self.adjectives),
            proper_stoplist=frozenset(self.stoplist),
            verbs=dict(self.verbs),
        )


def load_lexicon(extra_dirs: Optional[Sequence[PathLike]] = None,
                 include_bundled: bool = True) -> Lexicon:
    """
    Load the bundled lexicon and overlay user directories in order.

    Args:
        extra_dirs: Directories holding any subset of the lexicon files
        include_bundled: Start from the package data directory

    Returns:
        Immutable Lexicon
    """
    dirs: List[Path] = [config.DATA_DIR] if include_bundled else []
    dirs.extend(Path(d) for d in (extra_dirs or ()))

    builder = _Builder()
    for directory in dirs:
        if not directory.is_dir():
            raise CorpusIOError(f"lexicon directory not found: {directory}", str(directory))
        loaded = []
        for name, loader in (
            ("similar.tsv", builder.add_similar),
            ("inflect.tsv", builder.add_inflections),
            ("verbs.tsv", builder.add_verbs),
            ("nouns.txt", lambda p: builder.add_words(p, builder.nouns)),
            ("adjectives.txt", lambda p: builder.add_words(p, builder.adjectives)),
            ("proper_stoplist.txt", lambda p: builder.add_words(p, builder.stoplist)),
        ):
            path = directory / name
            if path.is_file():
                loader(path)
                loaded.append(name)
        logger.info("[LEXICON] %s: loaded %s", directory, ", ".join(loaded) or "nothing")

    lex = builder.build()
    logger.debug("[LEXICON] %d similar keys, %d nouns, %d verbs",
                 len(lex.similar), len(lex.noun_vocab), len(lex.verbs))
    return lex


def lexicon_from_tables(similar: Optional[Dict[str, Iterable[str]]] = None,
                        inflections: Optional[Dict[str, str]] = None,
                        nouns: Iterable[str] = (),
                        adjectives: Iterable[str] = (),
                        proper_stoplist: Iterable[str] = (),
                        verbs: Iterable[Sequence[str]] = ()) -> Lexicon:
    """Build a Lexicon in memory (tests and embedding callers)"""
    builder = _Builder()
    for key, values in (similar or {}).items():
        terms = builder.similar.setdefault(fold(key), [])
        for value in values:
            if fold(value) != fold(key) and value not in terms:
                terms.append(value)
    for singular, plural in (inflections or {}).items():
        builder.plural_of[fold(singular)] = fold(plural)
        builder.singular_of[fold(plural)] = fold(singular)
    for row in verbs:
        forms = VerbForms(*(fold(v) for v in row))
        for key in dict.fromkeys(fold(v) for v in row):
            builder.verbs[key] = forms
    builder.nouns.update(" ".join(fold(t) for t in tokenize(n)) for n in nouns)
    builder.adjectives.update(fold(a) for a in adjectives)
    builder.stoplist.update(fold(s) for s in proper_stoplist)
    return builder.build()
