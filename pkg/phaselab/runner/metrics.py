"""
Prometheus metrics for scenario runs.

Each run owns a fresh CollectorRegistry and exports it as a text file
into its run directory; nothing is served over the network.
"""
import logging
from pathlib import Path
from typing import Dict, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

logger = logging.getLogger(__name__)

METRICS_FILENAME = "metrics.prom"


class RunMetrics:
    """Counters and histograms for a single scenario run."""

    def __init__(self):
        self.registry = CollectorRegistry()
        self.runs = Counter(
            "phaselab_scenario_runs_total",
            "Scenario runs by outcome",
            ["kind", "status"],
            registry=self.registry,
        )
        self.duration = Histogram(
            "phaselab_scenario_duration_seconds",
            "Wall-clock duration of a scenario",
            ["kind"],
            buckets=(0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0),
            registry=self.registry,
        )
        self.clamp_events = Counter(
            "phaselab_madelung_clamp_events_total",
            "Negative densities clamped during direct Madelung integration",
            registry=self.registry,
        )
        self.bytes_written = Counter(
            "phaselab_output_bytes_total",
            "Bytes written to the run directory",
            ["role"],
            registry=self.registry,
        )
        self.headline = Gauge(
            "phaselab_headline_metric",
            "Numeric headline metrics of the run",
            ["name"],
            registry=self.registry,
        )

    def record_outcome(self, kind: str, status: str, seconds: float) -> None:
        self.runs.labels(kind=kind, status=status).inc()
        self.duration.labels(kind=kind).observe(seconds)

    def record_output(self, role: str, size: int) -> None:
        self.bytes_written.labels(role=role).inc(size)

    def record_headline(self, metrics: Dict[str, Union[float, int, bool, str]]) -> None:
        for name, value in metrics.items():
            if isinstance(value, (int, float)):
                self.headline.labels(name=name).set(float(value))

    def export(self, run_dir: Path) -> Path:
        target = Path(run_dir) / METRICS_FILENAME
        write_to_textfile(str(target), self.registry)
        return target
