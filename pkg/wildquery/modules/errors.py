"""
Error types raised by the WildQuery engine.
Every error carries the offending value so the CLI can report it.
"""

from typing import Optional


class WildQueryError(Exception):
    """Base class for all engine errors"""


# ============================================================================
# QUERY ERRORS
# ============================================================================

class QueryError(WildQueryError):
    def __init__(self, message: str, text: Optional[str] = None):
        super().__init__(message)
        self.text = text


class EmptyQueryError(QueryError):
    pass


class UnbalancedStarError(QueryError):
    pass


class AdjacentPercentSlotsError(QueryError):
    pass


class StarAroundMultiWordError(QueryError):
    pass


class MissingSubstitutionError(QueryError):
    def __init__(self, position: int, text: Optional[str] = None):
        super().__init__(f"no substitution for star term #{position}", text)
        self.position = position


# ============================================================================
# RULE ERRORS
# ============================================================================

class RuleError(WildQueryError):
    def __init__(self, message: str, source: str = "<rules>", line: Optional[int] = None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line


class BadRegexError(RuleError):
    pass


class BadBackReferenceError(RuleError):
    def __init__(self, rule_id: str, ordinal: int, source: str = "<rules>", line: Optional[int] = None):
        super().__init__(f"rule {rule_id}: back-reference ${ordinal} has no capturing group", source, line)
        self.rule_id = rule_id
        self.ordinal = ordinal


class BadTransformNameError(RuleError):
    pass


class EmptyRuleError(RuleError):
    pass


# ============================================================================
# CORPUS ERRORS
# ============================================================================

class CorpusError(WildQueryError):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class CorpusIOError(CorpusError):
    pass


class NotUtf8Error(CorpusError):
    pass


class CorpusFormatError(CorpusError):
    pass


# ============================================================================
# RANKING ERRORS
# ============================================================================

class RankError(WildQueryError):
    pass


class UndefinedError(RankError):
    pass


class EmptyGraphError(RankError):
    pass


# ============================================================================
# ANALYSIS ERRORS
# ============================================================================

class AnalysisError(WildQueryError):
    pass


class DimensionMismatchError(AnalysisError):
    pass


class DimensionTooSmallError(AnalysisError):
    pass


class InsufficientEdgesError(AnalysisError):
    pass


class EdgeNotInGraphError(AnalysisError):
    pass


class EmptyTruthError(AnalysisError):
    pass
