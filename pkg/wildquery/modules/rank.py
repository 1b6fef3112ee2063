#!/usr/bin/env python3
"""
RANKING - PATTERN/TUPLE GRAPH AND SCORING FUNCTIONS
NPatterns, NPages, mutual information and the iterative PT-hits
reinforcement between patterns and the tuples they extract.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import sparse

from .. import config
from .corpus import Corpus, document_frequency, phrase_runs
from .errors import EdgeNotInGraphError, EmptyGraphError, RankError, UndefinedError
from .query_model import parse_query

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


# ============================================================================
# GRAPH
# ============================================================================

class BipartiteGraph:
    """
    Patterns (rows) and tuples (columns) joined by weighted edges.
    Edges are kept as parallel index/weight arrays sorted by (pattern, tuple).
    """

    def __init__(self, patterns: Sequence[Hashable], tuples: Sequence[Hashable],
                 edges: Optional[Mapping[Edge, int]] = None):
        items = sorted((edges or {}).items())
        p_idx = np.array([p for (p, _), _ in items], dtype=np.int64)
        t_idx = np.array([t for (_, t), _ in items], dtype=np.int64)
        weights = np.array([w for _, w in items], dtype=np.int64)
        self._init(tuple(patterns), tuple(tuples), p_idx, t_idx, weights)

    def _init(self, patterns, tuples, p_idx, t_idx, weights):
        self.patterns = patterns
        self.tuples = tuples
        m, n = len(patterns), len(tuples)
        if p_idx.size:
            if p_idx.min() < 0 or p_idx.max() >= m or t_idx.min() < 0 or t_idx.max() >= n:
                raise ValueError("edge endpoint outside the graph")
            if weights.min() < 1:
                raise ValueError("edge weights must be positive integers")
            flat = p_idx * n + t_idx
            if np.unique(flat).size != flat.size:
                raise ValueError("parallel edges are not allowed")
        self._p = p_idx
        self._t = t_idx
        self._w = weights
        self._edge_map: Optional[Dict[Edge, int]] = None

    @classmethod
    def from_arrays(cls, patterns: Sequence[Hashable], tuples: Sequence[Hashable],
                    p_idx, t_idx, weights=None) -> "BipartiteGraph":
        p_idx = np.asarray(p_idx, dtype=np.int64)
        t_idx = np.asarray(t_idx, dtype=np.int64)
        weights = np.ones_like(p_idx) if weights is None else np.asarray(weights, dtype=np.int64)
        order = np.lexsort((t_idx, p_idx))
        graph = cls.__new__(cls)
        graph._init(tuple(patterns), tuple(tuples), p_idx[order], t_idx[order], weights[order])
        return graph

    @classmethod
    def from_matrix(cls, matrix) -> "BipartiteGraph":
        """Graph from an m x n matrix of non-negative integer weights (0 = no edge)"""
        dense = np.asarray(matrix, dtype=np.int64)
        p_idx, t_idx = np.nonzero(dense)
        return cls.from_arrays(range(dense.shape[0]), range(dense.shape[1]), p_idx, t_idx, dense[p_idx, t_idx])

    # ------------------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.patterns)

    @property
    def n(self) -> int:
        return len(self.tuples)

    @property
    def edge_count(self) -> int:
        return int(self._p.size)

    @property
    def edges(self) -> Dict[Edge, int]:
        if self._edge_map is None:
            self._edge_map = {(int(p), int(t)): int(w) for p, t, w in zip(self._p, self._t, self._w)}
        return self._edge_map

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._p, self._t, self._w

    def edge_list(self) -> List[Edge]:
        return [(int(p), int(t)) for p, t in zip(self._p, self._t)]

    def weight(self, p: int, t: int) -> int:
        return self.edges.get((p, t), 0)

    @property
    def max_weight(self) -> int:
        return int(self._w.max()) if self._w.size else 0

    def tuple_patterns(self, t: int) -> Dict[int, int]:
        mask = self._t == t
        return {int(p): int(w) for p, w in zip(self._p[mask], self._w[mask])}

    def pattern_tuples(self, p: int) -> Dict[int, int]:
        mask = self._p == p
        return {int(t): int(w) for t, w in zip(self._t[mask], self._w[mask])}

    def adjacency(self, weighted: bool = False) -> sparse.csr_matrix:
        data = self._w.astype(float) if weighted else np.ones(self._p.size)
        return sparse.csr_matrix((data, (self._p, self._t)), shape=(self.m, self.n))

    def dense(self, weighted: bool = True) -> np.ndarray:
        return self.adjacency(weighted).toarray()

    def drop_edge_indices(self, indices: Iterable[int]) -> "BipartiteGraph":
        """Copy without the edges at the given positions of edge_list()"""
        keep = np.ones(self._p.size, dtype=bool)
        keep[np.asarray(list(indices), dtype=np.int64)] = False
        graph = BipartiteGraph.__new__(BipartiteGraph)
        graph._init(self.patterns, self.tuples, self._p[keep], self._t[keep], self._w[keep])
        return graph

    def remove_edges(self, removed: Iterable[Edge]) -> "BipartiteGraph":
        position = {edge: i for i, edge in enumerate(self.edge_list())}
        indices = []
        for edge in removed:
            edge = (int(edge[0]), int(edge[1]))
            if edge not in position:
                raise EdgeNotInGraphError(f"edge {edge} is not in the graph")
            indices.append(position[edge])
        return self.drop_edge_indices(indices)

    def __repr__(self) -> str:
        return f"BipartiteGraph(m={self.m}, n={self.n}, edges={self.edge_count})"


# ============================================================================
# RANK VECTORS
# ============================================================================

@dataclass(frozen=True)
class RankVector:
    scores: np.ndarray
    algorithm: str
    keys: Tuple[Hashable, ...] = ()

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        if not np.all(np.isfinite(scores)) or np.any(scores < 0):
            raise RankError(f"{self.algorithm}: scores must be finite and non-negative")
        object.__setattr__(self, "scores", scores)
        if not self.keys:
            object.__setattr__(self, "keys", tuple(range(scores.size)))
        elif len(self.keys) != scores.size:
            raise RankError(f"{self.algorithm}: {len(self.keys)} keys for {scores.size} scores")

    def __len__(self) -> int:
        return int(self.scores.size)

    def as_dict(self) -> Dict[Hashable, float]:
        return {key: float(score) for key, score in zip(self.keys, self.scores)}


def apply_cutoff(v: RankVector, threshold: float = 0.0) -> List[Tuple[Hashable, float]]:
    """Tuples scoring at least threshold, best first; ties by key ascending"""
    ranked = [(key, float(score)) for key, score in zip(v.keys, v.scores) if score >= threshold]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


# ============================================================================
# HEURISTIC SCORES
# ============================================================================

def npatterns(g: BipartiteGraph) -> RankVector:
    """Number of distinct patterns extracting each tuple"""
    _, t_idx, _ = g.arrays()
    return RankVector(np.bincount(t_idx, minlength=g.n).astype(float), "npatterns", g.tuples)


def npages(g: BipartiteGraph) -> RankVector:
    """Total supporting documents per tuple, summed over patterns"""
    _, t_idx, weights = g.arrays()
    return RankVector(np.bincount(t_idx, weights=weights, minlength=g.n).astype(float), "npages", g.tuples)


def pattern_aggregate(g: BipartiteGraph, v: RankVector) -> np.ndarray:
    """Sum of the scores of the tuples each pattern extracts"""
    return g.adjacency(weighted=False) @ v.scores


# ============================================================================
# PT-HITS
# ============================================================================

def pt_hits(g: BipartiteGraph, tol: float = config.PT_HITS_TOL, max_iter: int = config.PT_HITS_MAX_ITER,
            weighted: bool = False, init: Optional[Sequence[float]] = None
            ) -> Tuple[RankVector, RankVector, int]:
    """
    Mutual reinforcement between patterns and tuples.

    Each iteration sets tuple weights to the sum of the weights of the
    patterns extracting them, then pattern weights to the sum of the
    weights of their tuples; both vectors are L1-normalized afterwards.

    Args:
        g: Pattern/tuple graph with at least one edge
        tol: Stop once no weight moves by this much
        max_iter: Iteration cap
        weighted: Multiply each summand by the edge weight
        init: Initial pattern weights (all ones by default)

    Returns:
        (tuple weights, pattern weights, iterations run)
    """
    if g.edge_count == 0:
        raise EmptyGraphError("PT-hits needs a graph with at least one edge")
    A = g.adjacency(weighted)
    AT = A.T.tocsr()

    w_p = np.ones(g.m) if init is None else np.asarray(init, dtype=float)
    if w_p.shape != (g.m,) or np.any(w_p < 0):
        raise RankError(f"initial pattern weights must be {g.m} non-negative values")
    if w_p.sum() <= 0:
        raise RankError("initial pattern weights sum to zero")
    w_p = w_p / w_p.sum()
    w_t = np.zeros(g.n)

    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_t = AT @ w_p
        total_t = new_t.sum()
        if total_t <= 0:
            raise RankError("initial pattern weights reach no tuple")
        new_p = A @ new_t
        new_t = new_t / total_t
        new_p = new_p / new_p.sum()
        delta = max(np.abs(new_t - w_t).max(), np.abs(new_p - w_p).max())
        w_t, w_p = new_t, new_p
        if delta < tol:
            break
    else:
        logger.warning("[RANK] PT-hits stopped at max_iter=%d before reaching tol=%g", max_iter, tol)

    logger.debug("[RANK] PT-hits converged after %d iterations", iterations)
    tag = "pt-hits-weighted" if weighted else "pt-hits"
    return RankVector(w_t, tag, g.tuples), RankVector(w_p, tag, g.patterns), iterations


# ============================================================================
# MUTUAL INFORMATION
# ============================================================================

class MiCounts(BaseModel):
    """Document frequencies behind the mutual-information score"""
    df_q: int = Field(..., ge=0, description="Documents containing the query's literal text")
    df_r: int = Field(..., ge=0, description="Documents containing the candidate")
    df_qr: int = Field(..., ge=0, description="Documents where the candidate fills the query")
    N: int = Field(..., ge=1, description="Corpus size in documents")

    @model_validator(mode="after")
    def _check_bounds(self):
        if not (self.df_qr <= min(self.df_q, self.df_r) and max(self.df_q, self.df_r) <= self.N):
            raise ValueError("expected df_qr <= min(df_q, df_r) and max(df_q, df_r) <= N")
        return self


def mutual_information(counts: MiCounts) -> Tuple[float, float, float]:
    """
    Returns:
        (mi, score, weighted_mi): natural-log pointwise mutual information,
        the reduced ranking score df_qr / df_r, and mi multiplied by P(q,r).
        A candidate never seen in the query gets (-inf, 0, 0).

    Raises:
        UndefinedError when either marginal is zero
    """
    if counts.df_q == 0 or counts.df_r == 0:
        raise UndefinedError(f"mutual information undefined for zero marginal ({counts.df_q}, {counts.df_r})")
    if counts.df_qr == 0:
        return -math.inf, 0.0, 0.0
    N = counts.N
    p_qr = counts.df_qr / N
    mi = math.log(p_qr / ((counts.df_q / N) * (counts.df_r / N)))
    return mi, counts.df_qr / counts.df_r, p_qr * mi


def mi_counts(corpus: Corpus, pattern_text: str, record) -> MiCounts:
    """
    Count documents for one candidate against one pattern.

    Args:
        corpus: Corpus the graph was extracted from
        pattern_text: Pattern acting as the query q
        record: Tuple record whose evidence gives the co-occurrence count
    """
    runs = [seg.words for seg in parse_query(pattern_text).literal_runs() if not seg.is_slot]
    df_q = document_frequency(corpus, runs)
    df_r = document_frequency(corpus, [phrase_runs(value) for value in record.key])
    df_qr = len({ev.doc_id for ev in record.evidence if ev.pattern == pattern_text})
    return MiCounts(df_q=df_q, df_r=df_r, df_qr=df_qr, N=max(corpus.doc_count, 1))


def mi_rank(g: BipartiteGraph, table, corpus: Corpus, pattern_text: str) -> RankVector:
    """Rank every tuple of the graph by the reduced MI score against one pattern"""
    scores = np.zeros(g.n)
    for i, key in enumerate(g.tuples):
        try:
            _, scores[i], _ = mutual_information(mi_counts(corpus, pattern_text, table[key]))
        except UndefinedError as e:
            logger.warning("[RANK] MI for %r: %s", key, e)
    return RankVector(scores, "mi", g.tuples)


# ============================================================================
# DISPATCH
# ============================================================================

def run_ranker(name: str, g: BipartiteGraph, *, weighted: bool = False, corpus=None, table=None,
               mi_pattern: Optional[str] = None) -> Tuple[RankVector, np.ndarray]:
    """
    Score tuples with the named ranker.

    Returns:
        (tuple scores, per-pattern weights) where pattern weights are the
        PT-hits pattern vector or the ranker's per-pattern aggregate
    """
    if name == "pt-hits":
        tuples, patterns, _ = pt_hits(g, weighted=weighted)
        return tuples, patterns.scores
    if name == "npages":
        vector = npages(g)
    elif name == "npatterns":
        vector = npatterns(g)
    elif name == "mi":
        if corpus is None or table is None:
            raise RankError("MI ranking needs the corpus and tuple table")
        vector = mi_rank(g, table, corpus, mi_pattern or g.patterns[0])
    else:
        raise RankError(f"unknown ranker {name!r} (expected one of {', '.join(config.RANKERS)})")
    return vector, pattern_aggregate(g, vector)


SCORERS: Dict[str, Callable[[BipartiteGraph], RankVector]] = {
    "npatterns": npatterns,
    "npages": npages,
    "pt-hits": lambda g: pt_hits(g)[0],
}
