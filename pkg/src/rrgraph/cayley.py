"""Deterministic structure of the full Cayley graphs of B_n.

Vertices are identified with their ranks (see ``signed_perm.rank``), so the
whole graph of a given n lives in a dense ``(|B_n|, degree)`` neighbor table
and breadth-first search runs frontier-at-a-time in numpy.

Cayley graphs are vertex-transitive: left multiplication by any group element
is an automorphism. The eccentricity of the identity therefore equals the
diameter, and statistics gathered at the identity hold for every vertex.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional

import networkx as nx
import numpy as np
from pydantic import BaseModel

from rrgraph.errors import InfeasibleParameterError, InvalidParameterError
from rrgraph.signed_perm import (
    GeneratorKind,
    GeneratorSet,
    SignedPerm,
    all_signed_perms,
    compose,
    compose_array,
    group_order,
    rank,
    rank_array,
    unrank,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_N = 6
DISTANCE_N = 7


@dataclass(frozen=True)
class GraphSpec:
    n: int
    gens: GeneratorSet

    def __post_init__(self) -> None:
        if self.gens.n != self.n:
            raise InvalidParameterError(f"generator set is for n={self.gens.n}, not {self.n}")

    @property
    def vertex_count(self) -> int:
        return group_order(self.n)

    @property
    def degree(self) -> int:
        return self.gens.degree


@dataclass(frozen=True)
class VertexSet:
    members: FrozenSet[int]
    n: int

    def __post_init__(self) -> None:
        members = frozenset(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        order = group_order(self.n)
        bad = [m for m in members if not 0 <= m < order]
        if bad:
            raise InvalidParameterError(f"ranks out of range for n={self.n}: {sorted(bad)[:5]}")

    @classmethod
    def of(cls, perms: Iterable[SignedPerm], n: int) -> VertexSet:
        return cls(frozenset(rank(p) for p in perms), n)

    @classmethod
    def full(cls, n: int) -> VertexSet:
        return cls(frozenset(range(group_order(n))), n)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, r: object) -> bool:
        return r in self.members

    def perms(self) -> List[SignedPerm]:
        return [unrank(self.n, r) for r in sorted(self.members)]

    def as_array(self) -> np.ndarray:
        return np.fromiter(sorted(self.members), dtype=np.int64, count=len(self.members))


class BoundaryReport(BaseModel):
    lhs: int
    rhs: float
    holds: bool
    set_size: int
    diameter: int


def _require(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise InfeasibleParameterError(f"{what} refuses n={n} (limit {limit})")


@lru_cache(maxsize=8)
def neighbor_table(n: int, gens: GeneratorSet) -> np.ndarray:
    """Row r lists the ranks of ``compose(unrank(n, r), g)`` for every generator g."""
    vertices = all_signed_perms(n)
    table = np.empty((len(vertices), gens.degree), dtype=np.int64)
    for k, (columns, sign) in enumerate(gens.index_arrays):
        table[:, k] = rank_array(compose_array(vertices, columns, sign))
    table.setflags(write=False)
    return table


def neighbors(v: SignedPerm, gens: GeneratorSet) -> List[SignedPerm]:
    if gens.n != v.n:
        raise InvalidParameterError(f"generator set is for n={gens.n}, vertex has n={v.n}")
    return [compose(v, g) for g in gens.elements]


def _bfs(table: np.ndarray, sources: np.ndarray, max_depth: Optional[int] = None,
         target: Optional[int] = None) -> np.ndarray:
    dist = np.full(table.shape[0], -1, dtype=np.int32)
    dist[sources] = 0
    frontier = np.unique(sources)
    depth = 0
    while frontier.size and (max_depth is None or depth < max_depth):
        if target is not None and dist[target] >= 0:
            break
        candidates = np.unique(table[frontier].ravel())
        fresh = candidates[dist[candidates] < 0]
        depth += 1
        dist[fresh] = depth
        frontier = fresh
    return dist


def bfs_distance(v: SignedPerm, w: SignedPerm, gens: GeneratorSet, max_depth: int,
                 limit: int = DISTANCE_N) -> Optional[int]:
    """Shortest generator-path length from v to w, or None past ``max_depth``."""
    if v.n != w.n or gens.n != v.n:
        raise InvalidParameterError("bfs_distance needs v, w and gens on the same n")
    if max_depth < 0:
        raise InvalidParameterError("max_depth must be >= 0")
    _require(v.n, limit, "bfs_distance")
    table = neighbor_table(v.n, gens)
    target = rank(w)
    dist = _bfs(table, np.array([rank(v)]), max_depth=max_depth, target=target)
    d = int(dist[target])
    return d if d >= 0 else None


def distances_from_identity(spec: GraphSpec, limit: int = EXHAUSTIVE_N) -> np.ndarray:
    _require(spec.n, limit, "exhaustive BFS")
    return _bfs(neighbor_table(spec.n, spec.gens), np.array([0]))


def diameter(spec: GraphSpec, limit: int = EXHAUSTIVE_N) -> int:
    """Eccentricity of the identity, which is the diameter by vertex-transitivity."""
    dist = distances_from_identity(spec, limit)
    if (dist < 0).any():
        raise InvalidParameterError(f"graph for {spec.gens.kind.value} at n={spec.n} is disconnected")
    value = int(dist.max())
    if spec.gens.kind is GeneratorKind.REVERSALS and value != spec.n + 1:
        logger.warning("reversal graph at n=%d has diameter %d, not n+1=%d",
                       spec.n, value, spec.n + 1)
    return value


def is_connected(spec: GraphSpec, limit: int = EXHAUSTIVE_N) -> bool:
    return bool((distances_from_identity(spec, limit) >= 0).all())


def ball(a: VertexSet, j: int, gens: GeneratorSet, limit: int = DISTANCE_N) -> VertexSet:
    if j < 0:
        raise InvalidParameterError("ball radius must be >= 0")
    if gens.n != a.n:
        raise InvalidParameterError("vertex set and generators disagree on n")
    if not a.members or j == 0:
        return a
    _require(a.n, limit, "ball")
    dist = _bfs(neighbor_table(a.n, gens), a.as_array(), max_depth=j)
    return VertexSet(frozenset(np.flatnonzero(dist >= 0).tolist()), a.n)


def vertex_boundary(a: VertexSet, gens: GeneratorSet, limit: int = DISTANCE_N) -> VertexSet:
    if not a.members:
        raise InvalidParameterError("vertex boundary needs a nonempty set")
    grown = ball(a, 1, gens, limit)
    return VertexSet(grown.members - a.members, a.n)


def is_dense(e: VertexSet, gens: GeneratorSet, limit: int = EXHAUSTIVE_N) -> bool:
    """True iff every radius-1 ball of B_n meets ``e``."""
    _require(e.n, limit, "is_dense")
    if not e.members:
        return False
    return len(ball(e, 1, gens, limit)) == group_order(e.n)


def check_boundary_bound(a: VertexSet, gens: GeneratorSet,
                         diam: Optional[int] = None,
                         limit: int = EXHAUSTIVE_N) -> BoundaryReport:
    """Compare |d(A)| with |A| (1 - |A|/|B_n|) / diam."""
    if not a.members:
        raise InvalidParameterError("the boundary bound needs a nonempty set")
    if diam is None:
        diam = diameter(GraphSpec(a.n, gens), limit)
    size = len(a)
    lhs = len(vertex_boundary(a, gens, limit))
    rhs = size * (1.0 - size / group_order(a.n)) / diam
    return BoundaryReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs, set_size=size, diameter=diam)


def to_networkx(spec: GraphSpec, limit: int = EXHAUSTIVE_N) -> nx.Graph:
    """The full graph with rank-labelled nodes, for inspection and cross-checks."""
    _require(spec.n, limit, "to_networkx")
    table = neighbor_table(spec.n, spec.gens)
    g = nx.Graph()
    g.add_nodes_from(range(table.shape[0]))
    src = np.repeat(np.arange(table.shape[0]), table.shape[1])
    dst = table.ravel()
    keep = src < dst
    g.add_edges_from(zip(src[keep].tolist(), dst[keep].tolist()))
    return g
