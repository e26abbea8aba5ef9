"""Threshold sweeps and the suites built on them.

Seeds: a sweep cell (n, c) draws trial t from ``derive_seed(derive_seed(master, i), t)``
where i is the position of n in the grid. Every c on the same n therefore sees
the same edge uniforms, and the explicit and lazy methods of the same trial
explore the same graph.
"""

from __future__ import annotations

import logging
import math
import time
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rrgraph.branching import survival_fixed_point
from rrgraph.errors import InfeasibleParameterError, InvalidParameterError, ResourceLimitError
from rrgraph.random_graph import (
    SampleConfig,
    components,
    explore_component_lazy,
    sample_subgraph_explicit,
)
from rrgraph.seeding import derive_seed
from rrgraph.settings import Settings
from rrgraph.signed_perm import GeneratorKind, GeneratorSet, group_order, identity
from rrgraph.telemetry import get_metrics
from rrgraph.trace import TraceWriter
from rrgraph.workers import map_trials

logger = logging.getLogger(__name__)

DEFAULT_C_VALUES = (0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0)
DEFAULT_EXPLICIT_N = (5, 6, 7)
DEFAULT_LAZY_N = (8, 9, 10, 11, 12)
# genes per synteny block, hemiascomycete yeast pairs
YEAST_BLOCK_LENGTHS = (7.6, 6.0, 6.6, 5.0, 5.0, 8.8, 2.6, 2.5, 2.7, 2.9)


class Method(str, Enum):
    EXPLICIT = "explicit"
    LAZY = "lazy"
    BOTH = "both"


class SweepConfig(BaseModel):
    n_values: List[int]
    c_values: List[float] = Field(default_factory=list)
    lambda_values: List[float] = Field(default_factory=list)  # absolute; c = lambda * degree per n
    trials_per_cell: int = 10
    master_seed: int = 0
    method: Method = Method.EXPLICIT
    cutoff: Optional[int] = None  # None means settings' n ** cutoff_exponent
    gens_kind: GeneratorKind = GeneratorKind.REVERSALS
    include_no_flips: bool = True


class TrialRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int
    c: float
    lam: float = Field(alias="lambda")
    method: str
    trial: int
    largest: int
    second: Optional[int]
    vertex_count: int
    seed: int
    gens: str


class SweepRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int
    c: float
    lam: float = Field(alias="lambda")
    method: str
    gens: str
    mean_largest_fraction: Optional[float]
    std_largest_fraction: Optional[float]
    std_error: Optional[float]
    mean_second_over_first: Optional[float]
    predicted_wp: float
    small_epsilon_branch: Optional[float] = None
    trials: int
    status: str = "ok"


class SweepResult(BaseModel):
    rows: List[SweepRow]
    trials: List[TrialRecord]


class CriticalRateRow(BaseModel):
    block_length: float
    critical_probability: float
    rounded: float


class SubcriticalReport(BaseModel):
    n: int
    epsilon: float
    trials: int
    largest_sizes: List[int]
    max_largest: int
    mean_fraction: float
    max_fraction: float
    ratio_n_log_n: float
    ratio_log_order: float
    fraction_bound_holds: bool


class ScalingReport(BaseModel):
    epsilon: float
    reports: List[SubcriticalReport]
    strictly_decreasing: bool


class UniquenessReport(BaseModel):
    n: int
    epsilon: float
    trials: int
    ratios: List[float]
    max_ratio: float
    mean_largest_fraction: float


def predicted_wp(c: float) -> float:
    return survival_fixed_point(c - 1.0).root if c > 1.0 else 0.0


def critical_rate_table(block_lengths: Sequence[float] = YEAST_BLOCK_LENGTHS) -> List[CriticalRateRow]:
    """Threshold 1/C(n+1, 2) evaluated at real-valued mean block lengths."""
    rows = []
    for length in block_lengths:
        if length < 1:
            raise InvalidParameterError(f"block length must be >= 1, got {length}")
        p = 2.0 / ((length + 1.0) * length)
        rows.append(CriticalRateRow(block_length=length, critical_probability=p, rounded=round(p, 2)))
    return rows


def _explicit_trial(n: int, c: float, gens: GeneratorSet, seed: int,
                    limit: int) -> Tuple[int, int, int]:
    graph = sample_subgraph_explicit(SampleConfig.scaled(n, c, gens, seed), limit=limit)
    stats = components(graph)
    return stats.largest, stats.second, graph.edge_count


def _lazy_trial(n: int, lam: float, cutoff: int, gens: GeneratorSet, seed: int,
                max_edges: int, limit: int) -> Tuple[int, bool]:
    result = explore_component_lazy(n, lam, identity(n), cutoff, gens, seed,
                                    max_edges_examined=max_edges, limit=limit)
    return result.component_size, result.hit_cutoff


class ExperimentRunner:
    def __init__(self, settings: Settings, trace_run_id: Optional[str] = None):
        self.settings = settings
        self.metrics = get_metrics(settings)
        self.threads = settings.runtime.threads
        self.backend = settings.runtime.backend
        self.trace_run_id = trace_run_id
        self.tracer = TraceWriter(settings.paths.traces_dir) if trace_run_id else None

    def _trace(self, event: dict) -> None:
        if self.tracer is not None:
            self.tracer.append(self.trace_run_id, event)

    # -- single cells ------------------------------------------------------

    def _explicit_cell(self, n: int, c: float, gens: GeneratorSet, cell_seed: int,
                       trials: int) -> Tuple[SweepRow, List[TrialRecord]]:
        count = group_order(n)
        lam = c / gens.degree
        seeds = [derive_seed(cell_seed, t) for t in range(trials)]
        started = time.perf_counter()
        outcomes = map_trials(
            _explicit_trial,
            [(n, c, gens, s, self.settings.limits.explicit_n) for s in seeds],
            self.threads,
            self.backend,
        )
        self.metrics.record_trials("explicit", trials, time.perf_counter() - started)
        self.metrics.record_edges(sum(edges for _, _, edges in outcomes))

        largest = np.array([o[0] for o in outcomes], dtype=np.float64)
        second = np.array([o[1] for o in outcomes], dtype=np.float64)
        fractions = largest / count
        std = float(fractions.std(ddof=1)) if trials > 1 else 0.0
        records = [
            TrialRecord(n=n, c=c, lam=lam, method="explicit", trial=t, largest=o[0],
                        second=o[1], vertex_count=count, seed=s, gens=gens.kind.value)
            for t, (o, s) in enumerate(zip(outcomes, seeds))
        ]
        row = SweepRow(
            n=n, c=c, lam=lam, method="explicit", gens=gens.kind.value,
            mean_largest_fraction=float(fractions.mean()),
            std_largest_fraction=std,
            std_error=std / math.sqrt(trials),
            mean_second_over_first=float((second / largest).mean()),
            predicted_wp=predicted_wp(c),
            trials=trials,
        )
        return row, records

    def _lazy_cell(self, n: int, c: float, gens: GeneratorSet, cell_seed: int, trials: int,
                   cutoff: int) -> Tuple[SweepRow, List[TrialRecord]]:
        count = group_order(n)
        lam = c / gens.degree
        seeds = [derive_seed(cell_seed, t) for t in range(trials)]
        limits = self.settings.limits
        started = time.perf_counter()
        outcomes = map_trials(
            _lazy_trial,
            [(n, lam, cutoff, gens, s, limits.max_edges_examined, limits.lazy_n) for s in seeds],
            self.threads,
            self.backend,
        )
        self.metrics.record_trials("lazy", trials, time.perf_counter() - started)
        hits = np.array([hit for _, hit in outcomes], dtype=np.float64)
        self.metrics.record_explorations(int(hits.sum()), trials - int(hits.sum()))
        std = float(hits.std(ddof=1)) if trials > 1 else 0.0
        records = [
            TrialRecord(n=n, c=c, lam=lam, method="lazy", trial=t, largest=size, second=None,
                        vertex_count=count, seed=s, gens=gens.kind.value)
            for t, ((size, _), s) in enumerate(zip(outcomes, seeds))
        ]
        row = SweepRow(
            n=n, c=c, lam=lam, method="lazy", gens=gens.kind.value,
            mean_largest_fraction=float(hits.mean()),
            std_largest_fraction=std,
            std_error=std / math.sqrt(trials),
            mean_second_over_first=None,
            predicted_wp=predicted_wp(c),
            trials=trials,
        )
        return row, records

    def _cell(self, method: Method, n: int, c: float, gens: GeneratorSet, cell_seed: int,
              trials: int, cutoff: int) -> Tuple[SweepRow, List[TrialRecord]]:
        lam = c / gens.degree
        try:
            if not 0.0 <= lam <= 1.0:
                raise InvalidParameterError(f"c={c} gives lambda={lam} outside [0, 1]")
            if method is Method.EXPLICIT:
                return self._explicit_cell(n, c, gens, cell_seed, trials)
            return self._lazy_cell(n, c, gens, cell_seed, trials, cutoff)
        except (InfeasibleParameterError, InvalidParameterError) as e:
            status = f"infeasible: {e}"
        except ResourceLimitError as e:
            status = f"resource limit: {e}"
        logger.warning("cell n=%d c=%g %s skipped: %s", n, c, method.value, status)
        row = SweepRow(
            n=n, c=c, lam=lam, method=method.value, gens=gens.kind.value,
            mean_largest_fraction=None, std_largest_fraction=None, std_error=None,
            mean_second_over_first=None, predicted_wp=predicted_wp(c), trials=trials,
            status=status,
        )
        return row, []

    # -- sweeps --------------------------------------------------------------

    def run_threshold_sweep(self, config: SweepConfig) -> SweepResult:
        methods = [Method.EXPLICIT, Method.LAZY] if config.method is Method.BOTH else [config.method]
        rows: List[SweepRow] = []
        records: List[TrialRecord] = []
        for i, n in enumerate(config.n_values):
            try:
                gens = GeneratorSet(config.gens_kind, n)
            except InvalidParameterError as e:
                logger.warning("n=%d skipped: %s", n, e)
                continue
            cell_seed = derive_seed(config.master_seed, i)
            cutoff = config.cutoff or self.settings.cutoff_for(n)
            c_values = config.c_values or [lam * gens.degree for lam in config.lambda_values]
            for c in c_values:
                for method in methods:
                    row, trial_records = self._cell(method, n, c, gens, cell_seed,
                                                    config.trials_per_cell, cutoff)
                    logger.info("n=%d c=%g lambda=%.6g %s: largest fraction %s",
                                n, c, row.lam, method.value, row.mean_largest_fraction)
                    self._trace({"type": "cell", **row.model_dump(by_alias=True)})
                    rows.append(row)
                    records.extend(trial_records)
        return SweepResult(rows=rows, trials=records)

    def run_transposition_analogue(self, config: SweepConfig) -> SweepResult:
        if config.gens_kind is GeneratorKind.REVERSALS:
            raise InvalidParameterError("the transposition analogue needs a transposition generator set")
        result = self.run_threshold_sweep(config)
        if config.include_no_flips and config.gens_kind is GeneratorKind.TRANSPOSITIONS:
            variant = config.model_copy(update={"gens_kind": GeneratorKind.TRANSPOSITIONS_NO_FLIPS})
            extra = self.run_threshold_sweep(variant)
            result = SweepResult(rows=result.rows + extra.rows, trials=result.trials + extra.trials)
        return result

    def window_rows(self, n_values: Sequence[int], trials: int, master_seed: int,
                    method: Method = Method.EXPLICIT, cutoff: Optional[int] = None,
                    gens_kind: GeneratorKind = GeneratorKind.REVERSALS) -> SweepResult:
        """Cells with c = 1 + n^(-1/8), where the small-epsilon branch 2 eps applies."""
        rows: List[SweepRow] = []
        records: List[TrialRecord] = []
        for i, n in enumerate(n_values):
            eps = n ** -0.125
            config = SweepConfig(n_values=[n], c_values=[1.0 + eps], trials_per_cell=trials,
                                 master_seed=derive_seed(master_seed, i), method=method,
                                 cutoff=cutoff, gens_kind=gens_kind)
            result = self.run_threshold_sweep(config)
            for row in result.rows:
                rows.append(row.model_copy(update={"small_epsilon_branch": 2.0 * eps}))
            records.extend(result.trials)
        return SweepResult(rows=rows, trials=records)

    # -- suites --------------------------------------------------------------

    def run_subcritical_suite(self, n: int, epsilon: float, trials: int,
                              master_seed: int) -> SubcriticalReport:
        if epsilon <= 0:
            raise InvalidParameterError(f"subcritical suite needs epsilon > 0, got {epsilon}")
        if n > self.settings.limits.explicit_n:
            raise InfeasibleParameterError(
                f"subcritical suite samples explicitly; n={n} exceeds {self.settings.limits.explicit_n}"
            )
        c = max(0.0, 1.0 - epsilon)
        row, records = self._explicit_cell(n, c, GeneratorSet.reversals(n),
                                           derive_seed(master_seed, n), trials)
        count = group_order(n)
        sizes = [r.largest for r in records]
        largest = max(sizes)
        report = SubcriticalReport(
            n=n,
            epsilon=epsilon,
            trials=trials,
            largest_sizes=sizes,
            max_largest=largest,
            mean_fraction=row.mean_largest_fraction,
            max_fraction=largest / count,
            ratio_n_log_n=largest / (n * math.log(n)) if n > 1 else float(largest),
            ratio_log_order=largest / math.log(count),
            fraction_bound_holds=largest / count <= 1e-3,
        )
        self._trace({"type": "subcritical", **report.model_dump()})
        return report

    def subcritical_scaling(self, n_values: Sequence[int], epsilon: float, trials: int,
                            master_seed: int) -> ScalingReport:
        reports = [self.run_subcritical_suite(n, epsilon, trials, master_seed) for n in n_values]
        fractions = [r.mean_fraction for r in reports]
        decreasing = all(a > b for a, b in zip(fractions, fractions[1:]))
        return ScalingReport(epsilon=epsilon, reports=reports, strictly_decreasing=decreasing)

    def run_uniqueness_check(self, n: int, epsilon: float, trials: int,
                             master_seed: int) -> UniquenessReport:
        if epsilon <= 0:
            raise InvalidParameterError(f"uniqueness check needs epsilon > 0, got {epsilon}")
        gens = GeneratorSet.reversals(n)
        c = min(1.0 + epsilon, float(gens.degree))
        _, records = self._explicit_cell(n, c, gens, derive_seed(master_seed, n), trials)
        ratios = [(r.second or 0) / r.largest for r in records]
        report = UniquenessReport(
            n=n,
            epsilon=epsilon,
            trials=trials,
            ratios=ratios,
            max_ratio=max(ratios),
            mean_largest_fraction=float(np.mean([r.largest / r.vertex_count for r in records])),
        )
        self._trace({"type": "uniqueness", **report.model_dump()})
        return report


def run_threshold_sweep(config: SweepConfig, settings: Optional[Settings] = None) -> List[SweepRow]:
    return ExperimentRunner(settings or Settings()).run_threshold_sweep(config).rows


def run_transposition_analogue(config: SweepConfig,
                               settings: Optional[Settings] = None) -> List[SweepRow]:
    return ExperimentRunner(settings or Settings()).run_transposition_analogue(config).rows


def run_subcritical_suite(n: int, epsilon: float, trials: int, master_seed: int,
                          settings: Optional[Settings] = None) -> SubcriticalReport:
    return ExperimentRunner(settings or Settings()).run_subcritical_suite(n, epsilon, trials, master_seed)


def run_uniqueness_check(n: int, epsilon: float, trials: int, master_seed: int,
                         settings: Optional[Settings] = None) -> UniquenessReport:
    return ExperimentRunner(settings or Settings()).run_uniqueness_check(n, epsilon, trials, master_seed)


def subcritical_scaling(n_values: Sequence[int], epsilon: float, trials: int, master_seed: int,
                        settings: Optional[Settings] = None) -> ScalingReport:
    return ExperimentRunner(settings or Settings()).subcritical_scaling(
        n_values, epsilon, trials, master_seed
    )


def window_rows(n_values: Sequence[int], trials: int, master_seed: int,
                method: Method = Method.EXPLICIT, settings: Optional[Settings] = None) -> List[SweepRow]:
    return ExperimentRunner(settings or Settings()).window_rows(n_values, trials, master_seed, method).rows
