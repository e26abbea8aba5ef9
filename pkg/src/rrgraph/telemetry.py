from __future__ import annotations

from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

from rrgraph.settings import Settings


class MetricsCollector:
    def __init__(self, settings: Settings):
        self.settings = settings
        self.enabled = settings.monitoring.enable_metrics
        self.registry = CollectorRegistry()

        self.trials = Counter(
            'rrg_trials_total',
            'Total number of simulation trials run',
            ['kind'],
            registry=self.registry,
        )

        self.trial_seconds = Histogram(
            'rrg_trial_seconds',
            'Wall time of a batch of trials in seconds',
            ['kind'],
            buckets=[0.01, 0.1, 1.0, 10.0, 60.0, 600.0],
            registry=self.registry,
        )

        self.edges_sampled = Counter(
            'rrg_edges_sampled_total',
            'Edges kept by explicit samples',
            registry=self.registry,
        )

        self.explorations = Counter(
            'rrg_explorations_total',
            'Lazy explorations by outcome',
            ['outcome'],
            registry=self.registry,
        )

        self.commands = Counter(
            'rrg_commands_total',
            'CLI commands by exit status',
            ['command', 'status'],
            registry=self.registry,
        )

    def record_trials(self, kind: str, count: int, duration: float) -> None:
        self.trials.labels(kind=kind).inc(count)
        self.trial_seconds.labels(kind=kind).observe(duration)

    def record_edges(self, count: int) -> None:
        self.edges_sampled.inc(count)

    def record_explorations(self, hits: int, misses: int) -> None:
        self.explorations.labels(outcome="cutoff").inc(hits)
        self.explorations.labels(outcome="exhausted").inc(misses)

    def record_command(self, command: str, status: str) -> None:
        self.commands.labels(command=command, status=status).inc()

    def write_textfile(self, path: Optional[str] = None) -> None:
        if self.enabled:
            write_to_textfile(path or self.settings.paths.metrics_file, self.registry)


# Global metrics instance
_metrics_instance: Optional[MetricsCollector] = None


def get_metrics(settings: Settings) -> MetricsCollector:
    """Get or create metrics collector"""
    global _metrics_instance
    if _metrics_instance is None:
        _metrics_instance = MetricsCollector(settings)
    return _metrics_instance
