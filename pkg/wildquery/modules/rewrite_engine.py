#!/usr/bin/env python3
"""
REWRITE ENGINE - RULE LANGUAGE, STAR FLATTENING AND QUERY REWRITING
Turns one wildcard query into the full set of extraction patterns:
star terms are flattened through the lexicon, then every flattened query
is rewritten by the rules whose head matches it.

Rule file grammar:

    # comment
    @id hyponym-class-plural        (optional)
    (.+),? such as (.+)             head regex, one per line
    ->
    $2, and other $1  && plural($1) body template, optional transforms
                                    blank line ends the rule
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .. import config
from .errors import (
    BadBackReferenceError,
    BadRegexError,
    BadTransformNameError,
    CorpusIOError,
    EmptyRuleError,
    QueryError,
)
from .lexicon import Lexicon, inflect_verb, pluralize, similar_terms, singularize
from .query_model import QueryAst, parse_query, render, substitute

logger = logging.getLogger(__name__)

HYPONYM_RULES_FILE = "hyponym.rules"
HYPONYM_COMPOUND_RULES_FILE = "hyponym_compound.rules"
MORPHOLOGY_RULES_FILE = "morphology.rules"

_BACKREF_RE = re.compile(r"\$(\d+)")
_TRANSFORM_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*\$(\d+)\s*\)\s*$")


def _verb_transform(form: str):
    def apply(lex: Lexicon, phrase: str) -> str:
        first, sep, rest = phrase.partition(" ")
        return inflect_verb(lex, first, form) + sep + rest
    return apply


# Noun transforms inflect the last word of the group, verb transforms the first.
TRANSFORMS: Dict[str, Callable[[Lexicon, str], str]] = {
    "plural": pluralize,
    "singular": singularize,
    "past": _verb_transform("past"),
    "past_participle": _verb_transform("past_participle"),
    "present_3s": _verb_transform("present_3s"),
}


# ============================================================================
# DATA TYPES
# ============================================================================

@dataclass(frozen=True)
class RewriteTemplate:
    text: str
    transforms: Tuple[Tuple[str, int], ...] = ()

    def back_references(self) -> List[int]:
        refs = [int(n) for n in _BACKREF_RE.findall(self.text)]
        refs.extend(ordinal for _, ordinal in self.transforms)
        return refs

    def instantiate(self, groups: Sequence[str], lex: Lexicon) -> str:
        values = list(groups)
        for name, ordinal in self.transforms:
            values[ordinal - 1] = TRANSFORMS[name](lex, values[ordinal - 1])
        return _BACKREF_RE.sub(lambda m: values[int(m.group(1)) - 1], self.text)


@dataclass(frozen=True)
class RewriteRule:
    id: str
    heads: Tuple[str, ...]
    body: Tuple[RewriteTemplate, ...]
    compiled: Tuple[re.Pattern, ...] = field(default=(), compare=False, repr=False)

    def match(self, query_text: str) -> Optional[re.Match]:
        """First head that matches the whole query text"""
        for regex in self.compiled or tuple(re.compile(h) for h in self.heads):
            found = regex.fullmatch(query_text)
            if found:
                return found
        return None


@dataclass(frozen=True)
class Provenance:
    kind: str  # "user" | "star" | "rule"
    detail: str = ""

    def __str__(self) -> str:
        if self.kind == "user":
            return "query"
        return f"{self.kind}:{self.detail}"


USER_QUERY = Provenance("user")


@dataclass(frozen=True)
class Pattern:
    text: str
    arity: int
    provenance: Provenance = USER_QUERY

    @property
    def ast(self) -> QueryAst:
        return parse_query(self.text)


# ============================================================================
# RULE PARSING
# ============================================================================

def _parse_template(line: str, source: str, number: int) -> RewriteTemplate:
    text, *clauses = line.split("&&")
    transforms = []
    for clause in clauses:
        found = _TRANSFORM_RE.match(clause)
        if not found:
            raise BadTransformNameError(f"malformed transform clause {clause.strip()!r}", source, number)
        name, ordinal = found.group(1), int(found.group(2))
        if name not in TRANSFORMS:
            raise BadTransformNameError(
                f"unknown transform {name!r} (expected one of {', '.join(TRANSFORMS)})", source, number)
        transforms.append((name, ordinal))
    text = " ".join(text.split())
    if not text:
        raise EmptyRuleError("empty body template", source, number)
    return RewriteTemplate(text, tuple(transforms))


def _finish_rule(rule_id: Optional[str], heads: List[Tuple[int, str]], body: List[Tuple[int, str]],
                 seen_arrow: bool, source: str, ordinal: int, start_line: int) -> RewriteRule:
    rule_id = rule_id or f"{source}#{ordinal}"
    if not heads:
        raise EmptyRuleError(f"rule {rule_id} has no head", source, start_line)
    if not seen_arrow or not body:
        raise EmptyRuleError(f"rule {rule_id} has no body", source, start_line)

    compiled = []
    for number, head in heads:
        try:
            compiled.append((number, re.compile(head)))
        except re.error as e:
            raise BadRegexError(f"bad head regex {head!r}: {e}", source, number) from e

    templates = [(number, _parse_template(line, source, number)) for number, line in body]
    min_groups = min(regex.groups for _, regex in compiled)
    for number, template in templates:
        for ref in template.back_references():
            if ref < 1 or ref > min_groups:
                raise BadBackReferenceError(rule_id, ref, source, number)

    return RewriteRule(
        id=rule_id,
        heads=tuple(head for _, head in heads),
        body=tuple(t for _, t in templates),
        compiled=tuple(regex for _, regex in compiled),
    )


def parse_rules(text: str, source: str = "<rules>") -> List[RewriteRule]:
    """
    Parse a rule file.

    Args:
        text: Rule file contents
        source: Name used in error messages and default rule ids

    Returns:
        Rules in file order

    Raises:
        BadRegexError, BadBackReferenceError, BadTransformNameError, EmptyRuleError
    """
    rules: List[RewriteRule] = []
    rule_id: Optional[str] = None
    heads: List[Tuple[int, str]] = []
    body: List[Tuple[int, str]] = []
    seen_arrow = False
    start_line = 0

    def flush():
        nonlocal rule_id, heads, body, seen_arrow
        if rule_id is not None or heads or body or seen_arrow:
            rules.append(_finish_rule(rule_id, heads, body, seen_arrow, source, len(rules) + 1, start_line))
        rule_id, heads, body, seen_arrow = None, [], [], False

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            flush()
            continue
        if not (rule_id or heads or body or seen_arrow):
            start_line = number
        if line.startswith("@id"):
            if heads or seen_arrow:
                raise EmptyRuleError("@id must come before the rule heads", source, number)
            rule_id = line[3:].strip() or None
        elif line == "->":
            if seen_arrow:
                raise EmptyRuleError("second '->' in one rule", source, number)
            seen_arrow = True
        elif seen_arrow:
            body.append((number, line))
        else:
            heads.append((number, line))
    flush()
    return rules


def load_rules(path: Union[str, Path]) -> List[RewriteRule]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusIOError(f"cannot read rule file {path}: {e}", str(path)) from e
    rules = parse_rules(text, source=path.name)
    logger.info("[REWRITE] %s: %d rules", path.name, len(rules))
    return rules


def builtin_hyponym_rules(include_compound: bool = False) -> List[RewriteRule]:
    rules = load_rules(config.RULES_DIR / HYPONYM_RULES_FILE)
    if include_compound:
        rules.extend(load_rules(config.RULES_DIR / HYPONYM_COMPOUND_RULES_FILE))
    return rules


def builtin_morphology_rules() -> List[RewriteRule]:
    return load_rules(config.RULES_DIR / MORPHOLOGY_RULES_FILE)


def builtin_rules(include_compound: bool = False) -> List[RewriteRule]:
    return builtin_hyponym_rules(include_compound) + builtin_morphology_rules()


# ============================================================================
# EXPANSION
# ============================================================================

def expand_stars(ast: QueryAst, lex: Lexicon) -> List[QueryAst]:
    """
    Flatten star terms: the query with every star kept as its own word,
    then the cartesian product of similar-term substitutions.
    """
    stars = [term.word for term in ast.star_terms()]
    if not stars:
        return [ast]
    choices = [[word] + similar_terms(lex, word) for word in stars]
    variants: Dict[str, QueryAst] = {}
    for combo in itertools.product(*choices):
        flattened = substitute(ast, dict(enumerate(combo)))
        variants.setdefault(render(flattened), flattened)
    return list(variants.values())


def _star_provenance(original: QueryAst, variant: QueryAst) -> Provenance:
    if render(original) == render(variant):
        return USER_QUERY
    return Provenance("star", render(variant))


def apply_rules(query_text: str, rules: Sequence[RewriteRule], lex: Lexicon,
                provenance: Provenance = USER_QUERY) -> List[Pattern]:
    """
    Rewrite one flattened query.

    Args:
        query_text: Rendered query without star terms
        rules: Rules to try, in order
        lex: Lexicon backing the transforms
        provenance: Provenance recorded for the query itself

    Returns:
        The query followed by every rewriting, earliest occurrence kept
    """
    source = parse_query(query_text)
    arity = source.arity
    text = render(source)
    patterns: Dict[str, Pattern] = {text: Pattern(text, arity, provenance)}

    for rule in rules:
        found = rule.match(text)
        if not found:
            continue
        groups = [g or "" for g in found.groups()]
        for template in rule.body:
            rewritten = template.instantiate(groups, lex)
            try:
                ast = parse_query(rewritten)
            except QueryError as e:
                logger.warning("[REWRITE] rule %s produced invalid query %r: %s", rule.id, rewritten, e)
                continue
            if ast.arity != arity:
                logger.warning("[REWRITE] rule %s changed slot count in %r; dropped", rule.id, rewritten)
                continue
            rendered = render(ast)
            if rendered not in patterns:
                patterns[rendered] = Pattern(rendered, arity, Provenance("rule", rule.id))
    return list(patterns.values())


def expand_all(ast: QueryAst, rules: Sequence[RewriteRule], lex: Lexicon) -> List[Pattern]:
    """Star flattening followed by rewriting of each variant; deduplicated by text"""
    patterns: Dict[str, Pattern] = {}
    for variant in expand_stars(ast, lex):
        for pattern in apply_rules(render(variant), rules, lex, _star_provenance(ast, variant)):
            patterns.setdefault(pattern.text, pattern)
    logger.info("[REWRITE] %r expanded to %d patterns", str(ast), len(patterns))
    return list(patterns.values())


def expansion_size(similar_counts: Iterable[int], rewritings: int) -> int:
    """Pattern count before dedup: product of (m_i + 1) over stars, times (n + 1)"""
    size = 1
    for count in similar_counts:
        size *= count + 1
    return size * (rewritings + 1)
