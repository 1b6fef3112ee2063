#!/usr/bin/env python3
"""
QUERY MODEL - WILDCARD QUERY PARSING AND RENDERING
Parses queries such as "% is a *country*" into an AST of literals,
% extraction slots and *term* expansion markers.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import (
    AdjacentPercentSlotsError,
    EmptyQueryError,
    MissingSubstitutionError,
    QueryError,
    StarAroundMultiWordError,
    UnbalancedStarError,
)
from .text import fold, join_words, tokenize

_PIECE_RE = re.compile(r"%|,|[^%,]+")


@dataclass(frozen=True)
class Literal:
    word: str


@dataclass(frozen=True)
class PercentSlot:
    ordinal: int


@dataclass(frozen=True)
class StarTerm:
    word: str


Token = Union[Literal, PercentSlot, StarTerm]


@dataclass(frozen=True)
class Segment:
    """One piece of a query layout: a literal token run or a slot"""
    kind: str  # "run" | "slot"
    words: Tuple[str, ...] = ()
    ordinal: int = -1

    @property
    def is_slot(self) -> bool:
        return self.kind == "slot"


@dataclass(frozen=True)
class QueryAst:
    tokens: Tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise EmptyQueryError("query has no tokens")
        expected = 0
        previous_slot = False
        for token in self.tokens:
            is_slot = isinstance(token, PercentSlot)
            if is_slot:
                if token.ordinal != expected:
                    raise QueryError(f"slot ordinal {token.ordinal} out of order")
                if previous_slot:
                    raise AdjacentPercentSlotsError("two % slots with no literal between them")
                expected += 1
            elif isinstance(token, StarTerm) and (not token.word or any(ch.isspace() for ch in token.word)):
                raise StarAroundMultiWordError("star term must be a single word", token.word)
            previous_slot = is_slot

    @property
    def arity(self) -> int:
        return sum(1 for token in self.tokens if isinstance(token, PercentSlot))

    def star_terms(self) -> List[StarTerm]:
        return [token for token in self.tokens if isinstance(token, StarTerm)]

    def literal_runs(self) -> Tuple[Segment, ...]:
        """
        Group the query into literal runs (folded, tokenized like corpus
        text) separated by slots. Star terms count as literals.
        """
        segments: List[Segment] = []
        run: List[str] = []
        for token in self.tokens:
            if isinstance(token, PercentSlot):
                if run:
                    segments.append(Segment("run", tuple(run)))
                    run = []
                segments.append(Segment("slot", ordinal=token.ordinal))
            else:
                run.extend(fold(word) for word in tokenize(token.word))
        if run:
            segments.append(Segment("run", tuple(run)))
        return tuple(segments)

    def __str__(self) -> str:
        return render_query(self)


def parse_query(text: str) -> QueryAst:
    """
    Parse a wildcard query.

    Args:
        text: Query text, e.g. "% is a *country*"

    Returns:
        Validated QueryAst

    Raises:
        EmptyQueryError, UnbalancedStarError, AdjacentPercentSlotsError,
        StarAroundMultiWordError
    """
    if text is None or not text.strip():
        raise EmptyQueryError("query is empty", text)
    if text.count("*") % 2:
        raise UnbalancedStarError("odd number of '*' in query", text)

    tokens: List[Token] = []
    ordinal = 0
    for raw in text.split():
        for piece in _PIECE_RE.findall(raw):
            if piece == "%":
                if tokens and isinstance(tokens[-1], PercentSlot):
                    raise AdjacentPercentSlotsError("two % slots with no literal between them", text)
                tokens.append(PercentSlot(ordinal))
                ordinal += 1
            elif piece == ",":
                tokens.append(Literal(","))
            elif "*" in piece:
                inner = piece[1:-1]
                if len(piece) < 3 or piece[0] != "*" or piece[-1] != "*" or "*" in inner:
                    raise StarAroundMultiWordError("'*' must wrap exactly one whole term", text)
                tokens.append(StarTerm(inner))
            else:
                tokens.append(Literal(piece))
    return QueryAst(tuple(tokens))


def render_query(ast: QueryAst) -> str:
    """Render with wildcards intact; parse(render_query(a)) == a"""
    words = []
    for token in ast.tokens:
        if isinstance(token, PercentSlot):
            words.append("%")
        elif isinstance(token, StarTerm):
            words.append(f"*{token.word}*")
        else:
            words.append(token.word)
    return join_words(words)


def render(ast: QueryAst, star_substitutions: Optional[Mapping[int, str]] = None) -> str:
    """
    Render an instantiated query text.

    Args:
        ast: Parsed query
        star_substitutions: star position (0-based, left to right) -> word;
            empty keeps every star's own word

    Raises:
        MissingSubstitutionError when a non-empty map misses a star
    """
    subs = star_substitutions or {}
    words = []
    star_index = 0
    for token in ast.tokens:
        if isinstance(token, PercentSlot):
            words.append("%")
        elif isinstance(token, StarTerm):
            if subs:
                if star_index not in subs:
                    raise MissingSubstitutionError(star_index, render_query(ast))
                words.append(subs[star_index])
            else:
                words.append(token.word)
            star_index += 1
        else:
            words.append(token.word)
    return join_words(words)


def substitute(ast: QueryAst, star_substitutions: Mapping[int, str]) -> QueryAst:
    """Replace star terms by plain literals (multi-word values split)"""
    tokens: List[Token] = []
    star_index = 0
    for token in ast.tokens:
        if isinstance(token, StarTerm):
            word = star_substitutions.get(star_index, token.word)
            tokens.extend(Literal(part) for part in word.split())
            star_index += 1
        else:
            tokens.append(token)
    return QueryAst(tuple(tokens))


def star_positions(ast: QueryAst) -> Dict[int, str]:
    return {i: term.word for i, term in enumerate(ast.star_terms())}
