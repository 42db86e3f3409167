"""OTEL metrics for the realization search.

Provides counters and histograms:
- crn.milp.solves_total: Counter of branch-and-bound runs (with status label)
- crn.milp.nodes_total: Counter of explored nodes
- crn.milp.lp_iterations_total: Counter of simplex pivots
- crn.milp.solve_duration_ms: Histogram of solve durations
- crn.realization.resamples_total: Counter of resamples after failed certification
- crn.cli.commands_total: Counter of CLI invocations (with command label)

Recording functions are no-ops until configure_metrics() has succeeded.
"""

import logging
from typing import Optional

from opentelemetry import metrics
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import (
    ConsoleMetricExporter,
    PeriodicExportingMetricReader,
)
from opentelemetry.sdk.resources import Resource, SERVICE_NAME, SERVICE_NAMESPACE

from crn_dot.config import CrnConfig, get_config

logger = logging.getLogger(__name__)

_meter_provider: Optional[MeterProvider] = None
_meter: Optional[metrics.Meter] = None

# Metric instruments (initialized lazily)
_solves_counter: Optional[metrics.Counter] = None
_nodes_counter: Optional[metrics.Counter] = None
_lp_iterations_counter: Optional[metrics.Counter] = None
_solve_duration_histogram: Optional[metrics.Histogram] = None
_resamples_counter: Optional[metrics.Counter] = None
_commands_counter: Optional[metrics.Counter] = None


def _create_metric_exporter(config: CrnConfig):
    """Create the metric exporter for the configured backend."""
    if config.metrics_exporter == "console":
        return ConsoleMetricExporter()
    if config.is_grpc:
        from opentelemetry.exporter.otlp.proto.grpc.metric_exporter import OTLPMetricExporter
        return OTLPMetricExporter(endpoint=config.endpoint, insecure=True)
    from opentelemetry.exporter.otlp.proto.http.metric_exporter import OTLPMetricExporter
    endpoint = config.http_endpoint
    if not endpoint.endswith("/v1/metrics"):
        endpoint = endpoint.rstrip("/") + "/v1/metrics"
    return OTLPMetricExporter(endpoint=endpoint)


def _create_resource(config: CrnConfig) -> Resource:
    attrs = {
        SERVICE_NAME: config.service_name,
        SERVICE_NAMESPACE: config.service_namespace,
    }
    attrs.update(config.resource_attributes)
    return Resource.create(attrs)


def configure_metrics(config: Optional[CrnConfig] = None) -> Optional[MeterProvider]:
    """Configure OTEL metrics.

    Args:
        config: Optional CrnConfig. If None, loads from environment.

    Returns:
        MeterProvider if metrics enabled, None otherwise.
    """
    global _meter_provider, _meter

    if config is None:
        config = get_config()

    if not config.metrics_enabled:
        logger.debug("metrics export disabled")
        return None

    if _meter_provider is not None:
        return _meter_provider

    try:
        reader = PeriodicExportingMetricReader(
            _create_metric_exporter(config),
            export_interval_millis=10000,
        )
        _meter_provider = MeterProvider(resource=_create_resource(config), metric_readers=[reader])
        metrics.set_meter_provider(_meter_provider)
        _meter = _meter_provider.get_meter("crn-dot", "0.1.0")
        logger.debug("metrics configured: %s", config.metrics_exporter)
    except Exception as e:
        logger.warning("failed to configure metrics: %s", e)
        return None

    return _meter_provider


def get_meter() -> Optional[metrics.Meter]:
    return _meter


def _ensure_instruments():
    """Lazily initialize metric instruments."""
    global _solves_counter, _nodes_counter, _lp_iterations_counter
    global _solve_duration_histogram, _resamples_counter, _commands_counter

    if _meter is None:
        return

    if _solves_counter is None:
        _solves_counter = _meter.create_counter(
            name="crn.milp.solves_total",
            description="Total number of branch-and-bound runs",
            unit="1",
        )

    if _nodes_counter is None:
        _nodes_counter = _meter.create_counter(
            name="crn.milp.nodes_total",
            description="Total number of branch-and-bound nodes explored",
            unit="1",
        )

    if _lp_iterations_counter is None:
        _lp_iterations_counter = _meter.create_counter(
            name="crn.milp.lp_iterations_total",
            description="Total number of simplex pivots",
            unit="1",
        )

    if _solve_duration_histogram is None:
        _solve_duration_histogram = _meter.create_histogram(
            name="crn.milp.solve_duration_ms",
            description="Duration of branch-and-bound runs in milliseconds",
            unit="ms",
        )

    if _resamples_counter is None:
        _resamples_counter = _meter.create_counter(
            name="crn.realization.resamples_total",
            description="Total number of resamples after a failed certification",
            unit="1",
        )

    if _commands_counter is None:
        _commands_counter = _meter.create_counter(
            name="crn.cli.commands_total",
            description="Total number of CLI commands run",
            unit="1",
        )


def record_milp_solve(status: str, nodes: int, lp_iterations: int, duration_ms: float):
    """Record one branch-and-bound run.

    Args:
        status: Final solver status (optimal, infeasible, limit).
        nodes: Nodes explored.
        lp_iterations: Simplex pivots over all nodes.
        duration_ms: Wall time in milliseconds.
    """
    _ensure_instruments()

    if _solves_counter is None:
        return

    attributes = {"status": status}
    _solves_counter.add(1, attributes)
    _nodes_counter.add(nodes, attributes)
    _lp_iterations_counter.add(lp_iterations, attributes)
    _solve_duration_histogram.record(duration_ms, attributes)


def record_resample(seed: int):
    _ensure_instruments()

    if _resamples_counter is None:
        return

    _resamples_counter.add(1, {"seed": seed})


def record_command(command: str, exit_code: int = 0):
    """Record a CLI invocation.

    Args:
        command: Subcommand name.
        exit_code: Process exit code.
    """
    _ensure_instruments()

    if _commands_counter is None:
        return

    _commands_counter.add(1, {"command": command, "exit_code": exit_code})


def shutdown_metrics():
    """Shutdown the meter provider and flush pending metrics."""
    global _meter_provider, _meter, _solves_counter, _nodes_counter
    global _lp_iterations_counter, _solve_duration_histogram
    global _resamples_counter, _commands_counter

    if _meter_provider is not None:
        _meter_provider.shutdown()
        _meter_provider = None

    _meter = None
    _solves_counter = None
    _nodes_counter = None
    _lp_iterations_counter = None
    _solve_duration_histogram = None
    _resamples_counter = None
    _commands_counter = None
