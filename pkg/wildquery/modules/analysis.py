#!/usr/bin/env python3
"""
ANALYSIS - RANK DISTANCES, STABILITY, LOCALITY, MONOTONICITY AND P/R
Empirical checks of how the scoring functions react to edge removal,
plus precision/recall scoring of a ranked list against a truth file.
"""

import itertools
import logging
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm

from .. import config
from .errors import (
    CorpusIOError,
    DimensionMismatchError,
    DimensionTooSmallError,
    EdgeNotInGraphError,
    EmptyTruthError,
    InsufficientEdgesError,
)
from .rank import BipartiteGraph, RankVector, pt_hits
from .text import normalize_phrase

logger = logging.getLogger(__name__)

Scorer = Callable[[BipartiteGraph], Union[RankVector, np.ndarray]]
TruthEntry = FrozenSet[Tuple[str, ...]]

TIE_TOLERANCE = 1e-12


def _scores(v: Union[RankVector, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(v, RankVector):
        return v.scores
    return np.asarray(v, dtype=float)


# ============================================================================
# DISTANCES
# ============================================================================

def kendall_tau(w1, w2) -> float:
    """
    Normalized Kendall tau distance: the fraction of tuple pairs ordered
    strictly one way by w1 and strictly the other way by w2. Ties count 0.
    """
    a, b = _scores(w1), _scores(w2)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vectors have {a.size} and {b.size} entries")
    n = a.size
    if n < 2:
        raise DimensionTooSmallError(f"Kendall tau needs at least 2 entries, got {n}")
    disagree = (a[:, None] < a[None, :]) & (b[:, None] > b[None, :])
    return 2.0 * int(np.count_nonzero(disagree)) / (n * (n - 1))


def manhattan(w1, w2) -> float:
    """Mean absolute difference"""
    a, b = _scores(w1), _scores(w2)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vectors have {a.size} and {b.size} entries")
    if a.size < 1:
        raise DimensionTooSmallError("Manhattan distance needs at least 1 entry")
    return float(np.abs(a - b).sum() / a.size)


DISTANCES: Dict[str, Callable] = {"kendall_tau": kendall_tau, "manhattan": manhattan}


# ============================================================================
# GRAPH FAMILIES
# ============================================================================

def random_graph(m: int, n: int, edge_probability: float, weight_max: int = 1,
                 seed: int = config.DEFAULT_SEED) -> BipartiteGraph:
    """Each pattern/tuple pair is an edge with the given probability"""
    rng = np.random.default_rng(seed)
    mask = rng.random((m, n)) < edge_probability
    weights = rng.integers(1, weight_max + 1, size=(m, n))
    p_idx, t_idx = np.nonzero(mask)
    return BipartiteGraph.from_arrays(range(m), range(n), p_idx, t_idx, weights[p_idx, t_idx])


def two_community_sizes(m: int, n: int, bridge_edges: int = 0) -> Tuple[int, int, int, int]:
    """
    Block sizes (a, N, b, M) for the two-community construction:
    block A is K(a, N), block B is K(b, M) with b = a - 1 and b*M = a*N - 1.
    """
    if m < 3:
        raise ValueError("two-community graphs need at least 3 patterns")
    b = (m - 1) // 2
    a = b + 1
    # a*N - 1 divisible by b  <=>  N = 1 + j*b, which gives M = 1 + j*a
    budget = n - bridge_edges
    j = max(1, (budget - 2) // (a + b))
    N, M = 1 + j * b, 1 + j * a
    if N + M + bridge_edges > n:
        raise ValueError(f"n={n} too small for a two-community graph with m={m}")
    return a, N, b, M


def two_community_graph(m: int, n: int, bridge_edges: int = 0, seed: int = config.DEFAULT_SEED) -> BipartiteGraph:
    """
    Two complete blocks whose principal values differ by one, so removing
    any single edge of the larger block hands dominance to the smaller one.
    Bridge tuples are linked to one random pattern of each block; leftover
    patterns and tuples stay isolated.
    """
    a, N, b, M = two_community_sizes(m, n, bridge_edges)
    rng = np.random.default_rng(seed)
    edges = {}
    for p in range(a):
        for t in range(N):
            edges[(p, t)] = 1
    for p in range(a, a + b):
        for t in range(N, N + M):
            edges[(p, t)] = 1
    for i in range(bridge_edges):
        t = N + M + i
        edges[(int(rng.integers(0, a)), t)] = 1
        edges[(int(rng.integers(a, a + b)), t)] = 1
    return BipartiteGraph(range(m), range(n), edges)


def all_bipartite_graphs(m: int, n: int, weights: Sequence[int] = (1,)) -> Iterator[BipartiteGraph]:
    """Every graph over m patterns and n tuples with edge weights from weights"""
    choices = (0,) + tuple(weights)
    for cells in itertools.product(choices, repeat=m * n):
        yield BipartiteGraph.from_matrix(np.array(cells, dtype=np.int64).reshape(m, n))


def restrict_patterns(g: BipartiteGraph, keep: Iterable[int]) -> BipartiteGraph:
    """Same node sets, only the edges of the kept patterns"""
    p_idx, t_idx, weights = g.arrays()
    mask = np.isin(p_idx, np.asarray(list(keep), dtype=np.int64))
    return BipartiteGraph.from_arrays(g.patterns, g.tuples, p_idx[mask], t_idx[mask], weights[mask])


class GraphFamilySpec(BaseModel):
    family: Literal["random", "two-community"] = Field(..., description="Graph family")
    m: int = Field(..., ge=1, description="Number of patterns")
    n: int = Field(..., ge=1, description="Number of tuples")
    edge_probability: float = Field(0.25, gt=0, le=1, description="Edge probability (random)")
    weight_max: int = Field(1, ge=1, description="Largest edge weight (random)")
    bridge_edges: int = Field(0, ge=0, description="Bridge tuples (two-community)")
    seed: int = Field(config.DEFAULT_SEED, description="Generator seed")

    @model_validator(mode="after")
    def _check_family(self):
        if self.family == "two-community":
            two_community_sizes(self.m, self.n, self.bridge_edges)
        return self

    def generate(self) -> BipartiteGraph:
        if self.family == "random":
            return random_graph(self.m, self.n, self.edge_probability, self.weight_max, self.seed)
        return two_community_graph(self.m, self.n, self.bridge_edges, self.seed)


# ============================================================================
# STABILITY
# ============================================================================

def _kt_bound(n: int, k: int, c: int) -> float:
    return 2.0 * k / (n - 1) if n > 1 else 0.0


# metric -> bound(n, k, max edge weight) for the scorers with proven bounds
BOUNDS: Dict[str, Dict[str, Callable[[int, int, int], float]]] = {
    "npatterns": {"kendall_tau": _kt_bound, "manhattan": lambda n, k, c: k / n},
    "npages": {"kendall_tau": _kt_bound, "manhattan": lambda n, k, c: c * k / n},
}


@dataclass
class StabilityRow:
    family: str
    m: int
    n: int
    k: int
    metric: str
    observed_max: float
    bound: Optional[float]
    samples: int

    @property
    def passed(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return self.observed_max <= self.bound + TIE_TOLERANCE


@dataclass
class StabilityReport:
    scorer: str
    rows: List[StabilityRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed is not False for row in self.rows)

    def violations(self) -> List[StabilityRow]:
        return [row for row in self.rows if row.passed is False]


def _edge_subsets(edge_count: int, k: int, samples: int, rng: np.random.Generator,
                  exhaustive_limit: int) -> Iterator[Tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    if edge_count <= exhaustive_limit:
        yield from itertools.combinations(range(edge_count), k)
        return
    for _ in range(samples):
        yield tuple(int(i) for i in rng.choice(edge_count, size=k, replace=False))


def stability_experiment(scorer: Scorer, specs: Sequence[GraphFamilySpec], k: int,
                         samples: int = config.STABILITY_SAMPLES, name: Optional[str] = None,
                         exhaustive_limit: int = config.EXHAUSTIVE_EDGE_LIMIT,
                         progress: bool = False) -> StabilityReport:
    """
    Largest score-vector distance after removing k edges.

    Args:
        scorer: Graph -> scores
        specs: Graph families, typically one per n
        k: Edges removed per sample
        samples: Random k-subsets per graph (graphs with few edges are
            enumerated exhaustively instead)
        name: Scorer name selecting the proven bounds (npatterns, npages)

    Returns:
        StabilityReport with one row per (graph, metric)

    Raises:
        InsufficientEdgesError when a graph has no more than k edges
    """
    name = name or getattr(scorer, "__name__", "scorer")
    bounds = BOUNDS.get(name, {})
    report = StabilityReport(name)

    for spec in specs:
        graph = spec.generate()
        if k < 0 or (k > 0 and k >= graph.edge_count):
            raise InsufficientEdgesError(
                f"{spec.family} m={spec.m} n={spec.n}: {graph.edge_count} edges, cannot remove k={k}")
        base = _scores(scorer(graph))
        rng = np.random.default_rng([spec.seed, spec.n, k])
        worst = {metric: 0.0 for metric in DISTANCES}
        count = 0
        subsets = _edge_subsets(graph.edge_count, k, samples, rng, exhaustive_limit)
        for subset in tqdm(subsets, desc=f"{name} n={spec.n} k={k}", disable=not progress, leave=False):
            perturbed = _scores(scorer(graph.drop_edge_indices(subset))) if subset else base
            for metric, distance in DISTANCES.items():
                if metric == "kendall_tau" and graph.n < 2:
                    continue
                worst[metric] = max(worst[metric], distance(base, perturbed))
            count += 1

        for metric, observed in worst.items():
            bound_fn = bounds.get(metric)
            bound = bound_fn(spec.n, k, graph.max_weight) if bound_fn else None
            row = StabilityRow(spec.family, spec.m, spec.n, k, metric, observed, bound, count)
            report.rows.append(row)
            if row.passed is False:
                logger.warning("[STABILITY] %s %s n=%d k=%d: %.6g exceeds bound %.6g",
                               name, metric, spec.n, k, observed, bound)
    return report


# ============================================================================
# LOCALITY AND MONOTONICITY
# ============================================================================

def _flipped(s1: np.ndarray, s2: np.ndarray, i: int, j: int, atol: float) -> bool:
    d1 = s1[i] - s1[j]
    d2 = s2[i] - s2[j]
    return (d1 > atol and d2 < -atol) or (d1 < -atol and d2 > atol)


def locality_check(scorer: Scorer, g: BipartiteGraph, e: Tuple[int, int],
                   atol: float = TIE_TOLERANCE) -> List[Tuple[int, int]]:
    """
    Pairs of tuples not touching edge e whose strict order flips when e
    is removed.

    Raises:
        EdgeNotInGraphError
    """
    if tuple(e) not in g.edges:
        raise EdgeNotInGraphError(f"edge {tuple(e)} is not in the graph")
    before = _scores(scorer(g))
    after = _scores(scorer(g.remove_edges([e])))
    others = [t for t in range(g.n) if t != e[1]]
    return [(i, j) for i, j in itertools.combinations(others, 2) if _flipped(before, after, i, j, atol)]


def monotonicity_check(scorer: Scorer, g: BipartiteGraph,
                       atol: float = TIE_TOLERANCE) -> List[Tuple[int, int, float, float]]:
    """
    Violations of: if every pattern extracting t1 also extracts t2 with at
    least the same edge weight, then score(t2) >= score(t1).

    Returns:
        (t1, t2, score(t1), score(t2)) per violating pair
    """
    scores = _scores(scorer(g))
    W = g.dense(weighted=True)
    dominated = np.all(W[:, :, None] <= W[:, None, :], axis=0)
    np.fill_diagonal(dominated, False)
    lower = scores[None, :] < scores[:, None] - atol
    return [(int(i), int(j), float(scores[i]), float(scores[j]))
            for i, j in zip(*np.nonzero(dominated & lower))]


def converged_pt_hits(g: BipartiteGraph) -> RankVector:
    """PT-hits run far enough to separate near-degenerate blocks"""
    return pt_hits(g, tol=1e-13, max_iter=max(20000, 40 * g.n))[0]


# ============================================================================
# PRECISION / RECALL
# ============================================================================

def _as_key(candidate) -> Tuple[str, ...]:
    if isinstance(candidate, str):
        return (normalize_phrase(candidate),)
    return tuple(normalize_phrase(v) for v in candidate)


def load_truth(path: Union[str, Path]) -> List[TruthEntry]:
    """
    One entry per line; '|' separates alternates, TAB separates the
    columns of k-ary tuples. '#' lines are comments.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusIOError(f"cannot read truth file {path}: {e}", str(path)) from e
    entries = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        columns = [[normalize_phrase(alt) for alt in col.split("|") if alt.strip()] for col in line.split("\t")]
        if all(columns):
            entries.append(frozenset(itertools.product(*columns)))
    if not entries:
        raise EmptyTruthError(f"truth file {path} has no entries")
    return entries


def _is_scored(item) -> bool:
    return isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], numbers.Real) \
        and not isinstance(item[1], bool)


def precision_recall(ranked: Sequence, truth: Sequence[TruthEntry]) -> List[Tuple[float, float]]:
    """
    (recall, precision) after each rank position. A candidate is correct
    when its key matches any alternate of any truth entry; recall counts
    distinct entries found.

    Args:
        ranked: Candidate keys, or (key, score) pairs, best first
        truth: Entries from load_truth (or sets of alternates)
    """
    if not truth:
        raise EmptyTruthError("truth set is empty")
    entries = [frozenset(_as_key(alt) for alt in entry) for entry in truth]
    lookup: Dict[Tuple[str, ...], List[int]] = {}
    for index, entry in enumerate(entries):
        for alt in entry:
            lookup.setdefault(alt, []).append(index)

    points = []
    correct = 0
    found = set()
    for rank, item in enumerate(ranked, start=1):
        key = item[0] if _is_scored(item) else item
        hits = lookup.get(_as_key(key), [])
        if hits:
            correct += 1
            found.update(hits)
        points.append((len(found) / len(entries), correct / rank))
    return points


def precision_at_recall(points: Sequence[Tuple[float, float]], recall: float) -> float:
    """Precision at the first rank reaching the given recall (0 if never reached)"""
    for r, p in points:
        if r >= recall - 1e-12:
            return p
    return 0.0


def pattern_subset_experiment(g: BipartiteGraph, truth: Sequence[TruthEntry], sizes: Sequence[int] = (2, 3, 4),
                              repetitions: int = 20, max_rank: int = 50,
                              seed: int = config.DEFAULT_SEED) -> Dict[int, List[Tuple[int, float]]]:
    """
    PT-hits precision at each rank when only a random subset of the
    patterns is available, averaged over repetitions.

    Returns:
        size -> [(rank, mean precision)] for ranks reached by any repetition
    """
    rng = np.random.default_rng(seed)
    results: Dict[int, List[Tuple[int, float]]] = {}
    for size in sizes:
        if size > g.m:
            logger.warning("[ANALYSIS] only %d patterns; subset size %d skipped", g.m, size)
            continue
        totals = np.zeros(max_rank)
        counts = np.zeros(max_rank)
        for _ in range(repetitions):
            keep = rng.choice(g.m, size=size, replace=False)
            sub = restrict_patterns(g, keep)
            if sub.edge_count == 0:
                continue
            scores = pt_hits(sub)[0].scores
            order = sorted((i for i in range(sub.n) if scores[i] > 0), key=lambda i: (-scores[i], sub.tuples[i]))
            points = precision_recall([sub.tuples[i] for i in order[:max_rank]], truth)
            for rank, (_, precision) in enumerate(points):
                totals[rank] += precision
                counts[rank] += 1
        results[size] = [(rank + 1, float(totals[rank] / counts[rank]))
                         for rank in range(max_rank) if counts[rank] > 0]
    return results
