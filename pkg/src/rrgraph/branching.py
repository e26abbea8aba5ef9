"""Survival probabilities and branching processes.

Three things live here: the fixed point x + exp(-lambda x) = 1 that gives the
predicted giant fraction, Monte Carlo Galton-Watson processes with binomial and
Poisson offspring, and the restricted tree-growth process run inside the
reversal graph starting at the identity.
"""

from __future__ import annotations

import heapq
import logging
import math
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator
from scipy.stats import binom, norm

from rrgraph.errors import InfeasibleParameterError, InvalidParameterError
from rrgraph.seeding import derive_seed, numpy_rng
from rrgraph.signed_perm import SignedPerm, identity, lex_key
from rrgraph.workers import map_trials

logger = logging.getLogger(__name__)


class SurvivalResult(BaseModel):
    epsilon: float
    lam: float
    root: float
    residual: float
    iterations: int


class WpReport(BaseModel):
    epsilon: float
    n: int
    root: float
    small_epsilon_branch: float
    in_range: bool


def survival_fixed_point(epsilon: float, tol: float = 1e-12, max_iter: int = 500) -> SurvivalResult:
    """Positive root of 1 - exp(-(1+eps) x) - x, or 0 when 1+eps <= 1.

    Safeguarded Newton: a step leaving the current bracket is replaced by bisection.
    """
    if not math.isfinite(epsilon):
        raise InvalidParameterError(f"epsilon must be finite, got {epsilon}")
    if tol <= 0:
        raise InvalidParameterError("tol must be > 0")
    lam = 1.0 + epsilon
    if lam <= 1.0:
        return SurvivalResult(epsilon=epsilon, lam=lam, root=0.0, residual=0.0, iterations=0)

    def f(x: float) -> float:
        return -math.expm1(-lam * x) - x

    # f > 0 on (0, root) and f < 0 on (root, 1]
    lo, hi = 0.0, 1.0
    x = 1.0 - math.exp(-lam)
    iterations = 0
    while True:
        fx = f(x)
        iterations += 1
        slope = lam * math.exp(-lam * x) - 1.0
        if abs(fx) <= tol * min(1.0, abs(slope)) or iterations >= max_iter:
            break
        if fx > 0:
            lo = x
        else:
            hi = x
        step = x - fx / slope if slope != 0.0 else lo
        x = step if lo < step < hi else 0.5 * (lo + hi)
    return SurvivalResult(epsilon=epsilon, lam=lam, root=x, residual=fx, iterations=iterations)


def wp_report(epsilon_n: float, n: int) -> WpReport:
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    root = survival_fixed_point(epsilon_n).root
    in_range = n ** -0.25 <= epsilon_n < 1.0
    if epsilon_n >= 1.0:
        logger.warning("epsilon_n=%g >= 1 lies outside the supercritical window", epsilon_n)
    return WpReport(
        epsilon=epsilon_n,
        n=n,
        root=root,
        small_epsilon_branch=2.0 * epsilon_n,
        in_range=in_range,
    )


def wp(epsilon_n: float, n: int) -> float:
    """Predicted giant fraction for lambda = (1 + eps_n) / C(n+1, 2)."""
    return wp_report(epsilon_n, n).root


# -- Galton-Watson simulation -------------------------------------------------


class OffspringLaw(str, Enum):
    # Binomial(m, p) at the root, Binomial(m - 1, p) below it
    P0 = "p0"
    BINOMIAL = "binomial"
    POISSON = "poisson"


class BranchingConfig(BaseModel):
    offspring: OffspringLaw
    m: int = 1
    p: float = 0.0
    lam: float = 0.0
    max_generations: int = 200
    population_cap: int = 10_000

    @model_validator(mode="after")
    def _check(self) -> BranchingConfig:
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {self.p}")
        if self.m < 1:
            raise InvalidParameterError("m must be >= 1")
        if self.offspring is OffspringLaw.P0 and self.m < 2:
            raise InvalidParameterError("the P0 process needs m >= 2")
        if self.lam < 0:
            raise InvalidParameterError("lambda must be >= 0")
        return self

    @classmethod
    def build(cls, **data) -> BranchingConfig:
        """Construct, surfacing the first failed check as ``InvalidParameterError``."""
        try:
            return cls(**data)
        except ValidationError as e:
            error = e.errors()[0].get("ctx", {}).get("error")
            if isinstance(error, InvalidParameterError):
                raise error from None
            raise InvalidParameterError(str(e)) from e

    @classmethod
    def p0(cls, m: int, p: float, **kw) -> BranchingConfig:
        return cls.build(offspring=OffspringLaw.P0, m=m, p=p, **kw)

    @classmethod
    def binomial(cls, m: int, p: float, **kw) -> BranchingConfig:
        return cls.build(offspring=OffspringLaw.BINOMIAL, m=m, p=p, **kw)

    @classmethod
    def poisson(cls, lam: float, **kw) -> BranchingConfig:
        return cls.build(offspring=OffspringLaw.POISSON, lam=lam, **kw)


class SurvivalEstimate(BaseModel):
    mean: float
    lower: float
    upper: float
    trials: int
    survivors: int


def _simulate_block(config: BranchingConfig, size: int, seed: int) -> int:
    rng = numpy_rng(seed)
    z = np.ones(size, dtype=np.int64)
    survived = np.zeros(size, dtype=bool)
    for generation in range(config.max_generations):
        active = (z > 0) & ~survived
        if not active.any():
            break
        parents = z[active]
        if config.offspring is OffspringLaw.POISSON:
            z[active] = rng.poisson(config.lam * parents)
        else:
            width = config.m
            if config.offspring is OffspringLaw.P0 and generation > 0:
                width = config.m - 1
            z[active] = rng.binomial(width * parents, config.p)
        survived |= z >= config.population_cap
    survived |= z > 0
    return int(survived.sum())


def simulate_branching(
    config: BranchingConfig,
    trials: int,
    master_seed: int,
    block_size: int = 1000,
    threads: int = 1,
) -> SurvivalEstimate:
    """Share of trials reaching ``population_cap`` or alive after ``max_generations``."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    tasks = []
    for block, start in enumerate(range(0, trials, block_size)):
        tasks.append((config, min(block_size, trials - start), derive_seed(master_seed, block)))
    survivors = sum(map_trials(_simulate_block, tasks, threads))
    mean = survivors / trials
    half = norm.ppf(0.975) * math.sqrt(mean * (1.0 - mean) / trials)
    return SurvivalEstimate(
        mean=mean,
        lower=max(0.0, mean - half),
        upper=min(1.0, mean + half),
        trials=trials,
        survivors=survivors,
    )


def total_progeny_tail(m: int, p: float, k: int) -> float:
    """P(total size >= k) for a Galton-Watson tree with Binomial(m, p) offspring.

    Uses P(T = j) = P(S_j = j - 1) / j with S_j ~ Binomial(j m, p).
    """
    if k <= 1:
        return 1.0
    below = sum(binom.pmf(j - 1, j * m, p) / j for j in range(1, k))
    return float(max(0.0, 1.0 - below))


# -- restricted tree process --------------------------------------------------


class RestrictedTreeParameters(BaseModel):
    n: int
    half_floor: int  # floor(n^(3/4) / 2)
    target_size: int  # floor(n^(3/4) / 4)
    admissible_count: int  # |N|
    m_offspring: int


def restricted_tree_parameters(n: int) -> RestrictedTreeParameters:
    root = math.isqrt(math.isqrt(n**3))  # floor(n^(3/4))
    half, quarter = root // 2, root // 4
    width = n - half
    admissible = math.comb(width + 1, 2)
    m = admissible - width * quarter
    params = RestrictedTreeParameters(
        n=n, half_floor=half, target_size=quarter, admissible_count=admissible, m_offspring=m
    )
    if quarter < 2 or m < 1:
        raise InfeasibleParameterError(
            f"restricted tree needs target >= 2 and m >= 1; n={n} gives target={quarter}, m={m}"
        )
    return params


@lru_cache(maxsize=16)
def _reversal_pool(n: int, first: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reversals rho(l, r), first <= l <= r <= n, as (pairs, source index, sign) arrays."""
    pairs, cols, signs = [], [], []
    base = np.arange(n)
    for left in range(first, n + 1):
        for right in range(left, n + 1):
            col = base.copy()
            sign = np.ones(n, dtype=np.int64)
            seg = np.arange(left - 1, right)
            col[seg] = seg[::-1]
            sign[seg] = -1
            pairs.append((left, right))
            cols.append(col)
            signs.append(sign)
    return np.array(pairs, dtype=np.int64), np.array(cols), np.array(signs)


class RestrictedTreeRun(BaseModel):
    n: int
    lam: float
    seed: int
    vertices: List[Tuple[int, ...]]
    parent_edges: List[Tuple[int, int, Tuple[int, int]]]
    target_size: int
    m_offspring: int
    succeeded: bool
    duplicates: int = 0

    def perms(self) -> List[SignedPerm]:
        return [SignedPerm.trusted(v) for v in self.vertices]


def grow_restricted_tree(n: int, lam: float, seed: int) -> RestrictedTreeRun:
    """Grow a tree from the identity using only reversals with a large left end.

    Each frontier element, taken in lexicographic order, tries exactly m admissible
    reversals (unused, left end not yet used) in lexicographic order of the
    resulting permutation, each succeeding with probability ``lam``. The run stops
    when the tree reaches the target size or the frontier empties.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError(f"lambda must lie in [0, 1], got {lam}")
    params = restricted_tree_parameters(n)
    target, m = params.target_size, params.m_offspring
    logger.debug("restricted tree n=%d: floor/2=%d target=%d |N|=%d m=%d",
                 n, params.half_floor, target, params.admissible_count, m)

    pairs, cols, signs = _reversal_pool(n, params.half_floor + 1)
    rng = numpy_rng(seed)
    root = identity(n).entries
    vertices: List[Tuple[int, ...]] = [root]
    index: Dict[Tuple[int, ...], int] = {root: 0}
    edges: List[Tuple[int, int, Tuple[int, int]]] = []
    used_pairs: set = set()
    used_left: set = set()
    duplicates = 0
    frontier: List[Tuple[Tuple[int, ...], int]] = [(lex_key(SignedPerm.trusted(root)), 0)]

    while frontier and len(vertices) < target:
        _, parent = heapq.heappop(frontier)
        omega = np.asarray(vertices[parent], dtype=np.int64)
        open_left = np.isin(pairs[:, 0], list(used_left), invert=True)
        open_pair = np.array([tuple(pr) not in used_pairs for pr in pairs.tolist()])
        mask = open_left & open_pair
        rows = omega[cols[mask]] * signs[mask]
        keys = 2 * np.abs(rows) - (rows < 0)
        order = np.lexsort(keys.T[::-1])
        candidates = pairs[mask][order].tolist()
        children = rows[order]

        tried = 0
        for (left, right), child in zip(candidates, children):
            if tried == m or len(vertices) == target:
                break
            if (left, right) in used_pairs or left in used_left:
                continue
            tried += 1
            if rng.random() >= lam:
                continue
            entries = tuple(int(x) for x in child)
            if entries in index:
                duplicates += 1
                continue
            used_pairs.add((left, right))
            used_left.add(left)
            index[entries] = len(vertices)
            edges.append((parent, len(vertices), (left, right)))
            vertices.append(entries)
            heapq.heappush(frontier, (lex_key(SignedPerm.trusted(entries)), index[entries]))
        if tried < m and len(vertices) < target:
            logger.debug("only %d of m=%d admissible reversals left at vertex %d", tried, m, parent)

    return RestrictedTreeRun(
        n=n,
        lam=lam,
        seed=seed,
        vertices=vertices,
        parent_edges=edges,
        target_size=target,
        m_offspring=m,
        succeeded=len(vertices) == target,
        duplicates=duplicates,
    )


class TreeSummary(BaseModel):
    n: int
    lam: float
    runs: int
    successes: int
    frequency: float
    std_error: float
    duplicates: int
    predicted_tail: float


def _tree_outcome(n: int, lam: float, seed: int) -> Tuple[bool, int]:
    run = grow_restricted_tree(n, lam, seed)
    return run.succeeded, run.duplicates


def simulate_restricted_trees(
    n: int, lam: float, runs: int, master_seed: int, threads: int = 1
) -> TreeSummary:
    params = restricted_tree_parameters(n)
    outcomes = map_trials(
        _tree_outcome, [(n, lam, derive_seed(master_seed, t)) for t in range(runs)], threads
    )
    successes = sum(1 for ok, _ in outcomes if ok)
    frequency = successes / runs
    return TreeSummary(
        n=n,
        lam=lam,
        runs=runs,
        successes=successes,
        frequency=frequency,
        std_error=math.sqrt(frequency * (1.0 - frequency) / runs),
        duplicates=sum(d for _, d in outcomes),
        predicted_tail=total_progeny_tail(params.m_offspring, lam, params.target_size),
    )
