"""Random subgraphs of the Cayley graphs: each edge kept with probability lambda.

An edge is identified by the ordered rank pair ``(lo, hi)`` of its endpoints.
Its presence in the sample with seed s is ``edge_uniform(s, lo, hi) < lambda``,
so two samples with the same seed are coupled: raising lambda only adds
edges. The explicit sampler evaluates that test for every edge slot with
numpy; the lazy explorer evaluates it on demand while walking out from one
vertex, and both see the same graph.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from rrgraph.errors import InfeasibleParameterError, InvalidParameterError, ResourceLimitError
from rrgraph.seeding import derive_seed, edge_uniform, edge_uniform_array
from rrgraph.signed_perm import (
    GeneratorSet,
    SignedPerm,
    all_signed_perms,
    compose_array,
    compose_entries,
    group_order,
    identity,
    rank_array,
    rank_entries,
)
from rrgraph.workers import map_trials

logger = logging.getLogger(__name__)

EXPLICIT_N = 8
LAZY_N = 16
MAX_EDGES_EXAMINED = 5_000_000


@dataclass(frozen=True)
class SampleConfig:
    n: int
    gens: GeneratorSet
    seed: int
    lam: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.lam is None) == (self.c is None):
            raise InvalidParameterError("give exactly one of an absolute lambda or a scaled c")
        if self.gens.n != self.n:
            raise InvalidParameterError(f"generator set is for n={self.gens.n}, not {self.n}")
        if self.c is not None and self.c < 0:
            raise InvalidParameterError(f"c must be >= 0, got {self.c}")
        if not 0.0 <= self.lambda_ <= 1.0:
            raise InvalidParameterError(f"lambda must lie in [0, 1], got {self.lambda_}")

    @classmethod
    def scaled(cls, n: int, c: float, gens: GeneratorSet, seed: int) -> SampleConfig:
        return cls(n=n, gens=gens, seed=seed, c=c)

    @property
    def lambda_(self) -> float:
        if self.lam is not None:
            return float(self.lam)
        return float(self.c) / self.gens.degree

    @property
    def c_value(self) -> float:
        return self.lambda_ * self.gens.degree

    @property
    def vertex_count(self) -> int:
        return group_order(self.n)


@dataclass(frozen=True)
class SampledSubgraph:
    config: SampleConfig
    edges: np.ndarray  # (E, 2) int64 rows (lo, hi), lo < hi, sorted

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.config.vertex_count))
        g.add_edges_from(map(tuple, self.edges.tolist()))
        return g


@dataclass(frozen=True)
class ComponentStats:
    sizes: np.ndarray  # descending
    vertex_count: int

    @property
    def largest(self) -> int:
        return int(self.sizes[0]) if self.sizes.size else 0

    @property
    def second(self) -> int:
        return int(self.sizes[1]) if self.sizes.size > 1 else 0

    @property
    def component_count(self) -> int:
        return int(self.sizes.size)

    @property
    def largest_fraction(self) -> float:
        return self.largest / self.vertex_count

    @property
    def second_over_first(self) -> float:
        return self.second / self.largest if self.largest else 0.0

    def size_histogram(self) -> Dict[int, int]:
        values, counts = np.unique(self.sizes, return_counts=True)
        return {int(v): int(k) for v, k in zip(values, counts)}


class ExplorationResult(BaseModel):
    component_size: int
    hit_cutoff: bool
    edges_examined: int


class GiantEstimate(BaseModel):
    mean: float
    std_error: float
    trials: int
    hits: int


class UnionFind:
    """Disjoint sets over 0..n-1 with union by rank and path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        x_root = self.find(x)
        y_root = self.find(y)
        if x_root == y_root:
            return
        if self.rank[x_root] < self.rank[y_root]:
            self.parent[x_root] = y_root
        elif self.rank[x_root] > self.rank[y_root]:
            self.parent[y_root] = x_root
        else:
            self.parent[y_root] = x_root
            self.rank[x_root] += 1

    def is_same(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def labels(self) -> np.ndarray:
        return np.fromiter((self.find(x) for x in range(len(self.parent))),
                           dtype=np.int64, count=len(self.parent))


def sample_subgraph_explicit(config: SampleConfig, limit: int = EXPLICIT_N) -> SampledSubgraph:
    if config.n > limit:
        raise InfeasibleParameterError(f"explicit sampling refuses n={config.n} (limit {limit})")
    lam = config.lambda_
    vertices = all_signed_perms(config.n)
    ranks = np.arange(len(vertices), dtype=np.int64)
    chunks: List[np.ndarray] = []
    if lam > 0.0:
        for columns, sign in config.gens.index_arrays:
            other = rank_array(compose_array(vertices, columns, sign))
            lower = ranks < other
            lo, hi = ranks[lower], other[lower]
            keep = edge_uniform_array(config.seed, lo, hi) < lam
            chunks.append(np.column_stack((lo[keep], hi[keep])))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    logger.debug("n=%d lambda=%.6g seed=%d: %d edges", config.n, lam, config.seed, len(edges))
    return SampledSubgraph(config=config, edges=edges)


def _labels(g: SampledSubgraph, backend: str) -> np.ndarray:
    count = g.config.vertex_count
    if backend == "scipy":
        data = np.ones(g.edge_count, dtype=np.int8)
        matrix = coo_matrix((data, (g.edges[:, 0], g.edges[:, 1])), shape=(count, count))
        _, labels = connected_components(matrix, directed=False)
        return labels
    if backend == "union_find":
        uf = UnionFind(count)
        for lo, hi in g.edges.tolist():
            uf.union(lo, hi)
        return uf.labels()
    raise InvalidParameterError(f"unknown components backend: {backend}")


def components(g: SampledSubgraph, backend: str = "scipy") -> ComponentStats:
    labels = _labels(g, backend)
    sizes = np.bincount(labels)
    sizes = np.sort(sizes[sizes > 0])[::-1]
    return ComponentStats(sizes=sizes, vertex_count=g.config.vertex_count)


def component_of(g: SampledSubgraph, vertex: int, backend: str = "scipy") -> int:
    """Size of the component containing the vertex with the given rank."""
    labels = _labels(g, backend)
    return int(np.count_nonzero(labels == labels[vertex]))


def explore_component_lazy(
    n: int,
    lam: float,
    start: SignedPerm,
    cutoff: Optional[int],
    gens: GeneratorSet,
    seed: int,
    max_edges_examined: int = MAX_EDGES_EXAMINED,
    limit: int = LAZY_N,
) -> ExplorationResult:
    """Breadth-first walk of the start vertex's component, deciding edges on demand.

    ``cutoff=None`` explores the whole component.
    """
    if cutoff is not None and cutoff < 1:
        raise InvalidParameterError("cutoff must be >= 1")
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError(f"lambda must lie in [0, 1], got {lam}")
    if start.n != n or gens.n != n:
        raise InvalidParameterError("start vertex and generators must share n")
    if n > limit:
        raise InfeasibleParameterError(f"lazy exploration refuses n={n} (limit {limit})")

    bound = math.inf if cutoff is None else cutoff
    elements = [g.entries for g in gens.elements]
    decided: Dict[Tuple[int, int], bool] = {}
    start_rank = rank_entries(start.entries)
    visited = {start_rank}
    queue = deque([start.entries])

    while queue and len(visited) < bound:
        v = queue.popleft()
        rv = rank_entries(v)
        for g in elements:
            w = compose_entries(v, g)
            rw = rank_entries(w)
            if rw in visited:
                continue
            key = (rv, rw) if rv < rw else (rw, rv)
            present = decided.get(key)
            if present is None:
                present = edge_uniform(seed, key[0], key[1]) < lam
                decided[key] = present
                if len(decided) > max_edges_examined:
                    raise ResourceLimitError(
                        f"exploration examined more than {max_edges_examined} edges"
                    )
            if present:
                visited.add(rw)
                queue.append(w)
                if len(visited) >= bound:
                    break

    return ExplorationResult(
        component_size=len(visited),
        hit_cutoff=len(visited) >= bound,
        edges_examined=len(decided),
    )


def _explore_hit(n: int, lam: float, cutoff: int, gens: GeneratorSet, seed: int,
                 max_edges_examined: int) -> bool:
    result = explore_component_lazy(n, lam, identity(n), cutoff, gens, seed, max_edges_examined)
    return result.hit_cutoff


def estimate_giant_fraction(
    n: int,
    lam: float,
    cutoff: int,
    trials: int,
    gens: GeneratorSet,
    master_seed: int,
    threads: int = 1,
    max_edges_examined: int = MAX_EDGES_EXAMINED,
) -> GiantEstimate:
    """Fraction of independent explorations from the identity that reach ``cutoff``.

    Starting at the identity is unbiased by vertex-transitivity.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    tasks = [
        (n, lam, cutoff, gens, derive_seed(master_seed, t), max_edges_examined)
        for t in range(trials)
    ]
    hits = sum(map_trials(_explore_hit, tasks, threads))
    mean = hits / trials
    return GiantEstimate(
        mean=mean,
        std_error=math.sqrt(mean * (1.0 - mean) / trials),
        trials=trials,
        hits=hits,
    )
