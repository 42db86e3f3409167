"""OTEL trace exporter configuration.

Tracing is off unless OTEL_TRACES_EXPORTER is ``console`` or ``otlp``. OTLP
supports both gRPC (default, port 4317) and HTTP (port 4318) protocols; the
exporter packages are imported only when selected.

Spans emitted by the package:
    crn.find              one realization search, including resampling
    milp.build_model      model construction (sizes as attributes)
    milp.solve            branch-and-bound (status, node count)
    realization.certify   decode-independent certification of a target
"""

import atexit
import logging
from typing import Optional

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource, SERVICE_NAME, SERVICE_NAMESPACE
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    ConsoleSpanExporter,
    SimpleSpanProcessor,
)

from crn_dot.config import CrnConfig, get_config

logger = logging.getLogger(__name__)

TRACER_NAME = "crn-dot"

_tracer_provider: Optional[TracerProvider] = None
_configured = False


def _create_resource(config: CrnConfig) -> Resource:
    """Create OTEL resource with service info and custom attributes."""
    attrs = {
        SERVICE_NAME: config.service_name,
        SERVICE_NAMESPACE: config.service_namespace,
    }
    attrs.update(config.resource_attributes)
    return Resource.create(attrs)


def _create_otlp_exporter(config: CrnConfig):
    """Create the OTLP span exporter for the configured protocol."""
    if config.is_grpc:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
        return OTLPSpanExporter(endpoint=config.endpoint, insecure=True)
    from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
    endpoint = config.http_endpoint
    if not endpoint.endswith("/v1/traces"):
        endpoint = endpoint.rstrip("/") + "/v1/traces"
    return OTLPSpanExporter(endpoint=endpoint)


def configure_tracing(config: Optional[CrnConfig] = None) -> Optional[TracerProvider]:
    """Configure the tracer provider for the configured exporter.

    Args:
        config: Optional CrnConfig. If None, loads from environment.

    Returns:
        TracerProvider if tracing is enabled, None otherwise.

    Raises:
        RuntimeError: If tracing is already configured.
    """
    global _tracer_provider, _configured

    if _configured:
        raise RuntimeError("tracing already configured; call shutdown_tracing() first")

    if config is None:
        config = get_config()

    if not config.traces_enabled:
        return None

    provider = TracerProvider(resource=_create_resource(config))
    if config.traces_exporter == "console":
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
    else:
        try:
            provider.add_span_processor(BatchSpanProcessor(_create_otlp_exporter(config)))
        except Exception as e:
            logger.warning("failed to configure OTLP trace export: %s", e)
            return None

    _tracer_provider = provider
    _configured = True
    atexit.register(shutdown_tracing)
    logger.debug("tracing configured: %s", config.traces_exporter)
    return _tracer_provider


def get_tracer(name: str = TRACER_NAME) -> trace.Tracer:
    """Get a tracer for creating spans; a no-op tracer when unconfigured."""
    if _tracer_provider is None:
        return trace.get_tracer(name)
    return _tracer_provider.get_tracer(name)


def shutdown_tracing() -> None:
    """Flush pending spans and drop the provider."""
    global _tracer_provider, _configured

    if _tracer_provider is not None:
        _tracer_provider.shutdown()
        _tracer_provider = None

    _configured = False
