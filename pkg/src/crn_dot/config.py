"""Centralized configuration via environment variables.

Supported environment variables:
  CRN_EPS                       - Big-M parameter epsilon, in (0, 1) (default: 1/10)
  CRN_SEED                      - Seed for the random span weights (default: 0)
  CRN_MODE                      - conjugate or dynequiv (default: conjugate)
  CRN_THEOREM                   - dot or boros (default: dot)
  CRN_SOLVER                    - highs, internal or lpfile (default: highs)
  CRN_RETRIES                   - Resampling attempts after a failed certification (default: 3)
  CRN_THREADS                   - Worker threads for branch-and-bound (default: 1)
  CRN_MAX_NODES                 - Branch-and-bound node limit (default: 200000)
  CRN_TIME_LIMIT                - Solver time limit in seconds (default: 1800)
  CRN_ARITHMETIC                - exact or float node LPs for the internal solver (default: exact)
  CRN_WPRIME_CAP                - literal or scaled cap on supplemental flows (default: literal)
  CRN_DEBUG                     - Enable debug logging (default: false)

Telemetry:
  OTEL_SERVICE_NAME             - Service name (default: crn-dot)
  OTEL_SERVICE_NAMESPACE        - Service namespace (default: crn)
  OTEL_RESOURCE_ATTRIBUTES      - Comma-separated key=value pairs
  OTEL_TRACES_EXPORTER          - none, console or otlp (default: none)
  OTEL_METRICS_EXPORTER         - none, console or otlp (default: none)
  OTEL_EXPORTER_OTLP_ENDPOINT   - Collector endpoint (default: http://localhost:4317)
  OTEL_EXPORTER_OTLP_PROTOCOL   - Protocol: grpc or http (default: grpc)

Precedence: defaults < environment < explicit command-line flags.
"""

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from crn_dot.linalg import to_fraction

DEFAULT_EPS = Fraction(1, 10)
DEFAULT_SEED = 0
DEFAULT_MODE = "conjugate"
DEFAULT_THEOREM = "dot"
DEFAULT_SOLVER = "highs"
DEFAULT_RETRIES = 3
DEFAULT_THREADS = 1
DEFAULT_MAX_NODES = 200_000
DEFAULT_TIME_LIMIT = 1800
DEFAULT_ARITHMETIC = "exact"
DEFAULT_WPRIME_CAP = "literal"

DEFAULT_ENDPOINT = "http://localhost:4317"
DEFAULT_PROTOCOL = "grpc"
DEFAULT_SERVICE_NAME = "crn-dot"
DEFAULT_SERVICE_NAMESPACE = "crn"

MODES = ("conjugate", "dynequiv")
THEOREMS = ("dot", "boros")
SOLVERS = ("highs", "internal", "lpfile")
ARITHMETICS = ("exact", "float")
WPRIME_CAPS = ("literal", "scaled")
EXPORTERS = ("none", "console", "otlp")


@dataclass
class CrnConfig:
    """Parsed configuration from the environment."""

    # Model and search
    eps: Fraction = DEFAULT_EPS
    seed: int = DEFAULT_SEED
    mode: str = DEFAULT_MODE
    theorem: str = DEFAULT_THEOREM
    solver: str = DEFAULT_SOLVER
    retries: int = DEFAULT_RETRIES
    threads: int = DEFAULT_THREADS
    max_nodes: int = DEFAULT_MAX_NODES
    time_limit: int = DEFAULT_TIME_LIMIT
    arithmetic: str = DEFAULT_ARITHMETIC
    wprime_cap: str = DEFAULT_WPRIME_CAP

    # Telemetry
    endpoint: str = DEFAULT_ENDPOINT
    protocol: str = DEFAULT_PROTOCOL
    service_name: str = DEFAULT_SERVICE_NAME
    service_namespace: str = DEFAULT_SERVICE_NAMESPACE
    resource_attributes: dict = field(default_factory=dict)
    traces_exporter: str = "none"
    metrics_exporter: str = "none"

    debug: bool = False

    @property
    def traces_enabled(self) -> bool:
        """Check if trace export is enabled."""
        return self.traces_exporter.lower() != "none"

    @property
    def metrics_enabled(self) -> bool:
        """Check if metrics export is enabled."""
        return self.metrics_exporter.lower() != "none"

    @property
    def is_grpc(self) -> bool:
        return self.protocol.lower() == "grpc"

    @property
    def http_endpoint(self) -> str:
        """Get endpoint formatted for HTTP (ensures http:// prefix)."""
        if not self.endpoint.startswith(("http://", "https://")):
            return f"http://{self.endpoint}"
        return self.endpoint


@dataclass
class RunConfig:
    """Settings for one command, after flags have been applied."""

    command: str
    inputs: tuple[str, ...] = ()
    eps: Fraction = DEFAULT_EPS
    seed: int = DEFAULT_SEED
    mode: str = DEFAULT_MODE
    theorem: str = DEFAULT_THEOREM
    solver: str = DEFAULT_SOLVER
    output: Optional[str] = None
    retries: int = DEFAULT_RETRIES
    threads: int = DEFAULT_THREADS
    max_nodes: int = DEFAULT_MAX_NODES
    time_limit: int = DEFAULT_TIME_LIMIT
    arithmetic: str = DEFAULT_ARITHMETIC
    wprime_cap: str = DEFAULT_WPRIME_CAP

    @classmethod
    def from_flags(cls, command: str, inputs=(), base: Optional[CrnConfig] = None, **flags) -> "RunConfig":
        """Overlay the flags that were given (not None) on the loaded config.

        Raises:
            ValueError: If the resulting settings are invalid.
        """
        base = base or get_config()
        run = cls(
            command=command,
            inputs=tuple(str(p) for p in inputs),
            eps=base.eps,
            seed=base.seed,
            mode=base.mode,
            theorem=base.theorem,
            solver=base.solver,
            retries=base.retries,
            threads=base.threads,
            max_nodes=base.max_nodes,
            time_limit=base.time_limit,
            arithmetic=base.arithmetic,
            wprime_cap=base.wprime_cap,
        )
        overrides = {k: v for k, v in flags.items() if v is not None}
        if "eps" in overrides:
            overrides["eps"] = to_fraction(overrides["eps"])
        run = replace(run, **overrides)
        run.validate()
        return run

    def validate(self) -> None:
        """Raise ValueError on the first invalid setting."""
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.max_nodes < 1:
            raise ValueError(f"max_nodes must be >= 1, got {self.max_nodes}")
        if self.time_limit <= 0:
            raise ValueError(f"time_limit must be positive, got {self.time_limit}")
        for name, value, allowed in (
            ("mode", self.mode, MODES),
            ("theorem", self.theorem, THEOREMS),
            ("solver", self.solver, SOLVERS),
            ("arithmetic", self.arithmetic, ARITHMETICS),
            ("wprime_cap", self.wprime_cap, WPRIME_CAPS),
        ):
            if value not in allowed:
                raise ValueError(f"unknown {name} {value!r}; expected one of {', '.join(allowed)}")

    def echo(self) -> dict:
        """Settings that determine the result, for JSON output."""
        return {
            "eps": str(self.eps),
            "seed": self.seed,
            "mode": self.mode,
            "theorem": self.theorem,
            "solver": self.solver,
            "arithmetic": self.arithmetic,
            "wprime_cap": self.wprime_cap,
        }


def parse_resource_attributes(attr_string: str) -> dict:
    """Parse OTEL_RESOURCE_ATTRIBUTES format: key1=val1,key2=val2."""
    attrs = {}
    if not attr_string:
        return attrs

    for pair in attr_string.split(","):
        pair = pair.strip()
        if "=" in pair:
            key, value = pair.split("=", 1)
            attrs[key.strip()] = value.strip()

    return attrs


def _parse_int_env(name: str, default: int) -> int:
    """Parse integer from environment variable with fallback to default."""
    val = os.environ.get(name, "")
    if not val:
        return default
    try:
        return int(val)
    except ValueError:
        return default


def _parse_fraction_env(name: str, default: Fraction) -> Fraction:
    val = os.environ.get(name, "")
    if not val:
        return default
    try:
        return to_fraction(val)
    except ValueError:
        return default


def _parse_choice_env(name: str, default: str, allowed: tuple[str, ...]) -> str:
    val = os.environ.get(name, "").strip().lower()
    return val if val in allowed else default


def load_config() -> CrnConfig:
    """Load configuration from environment variables."""
    debug_val = os.environ.get("CRN_DEBUG", "").lower()

    return CrnConfig(
        eps=_parse_fraction_env("CRN_EPS", DEFAULT_EPS),
        seed=_parse_int_env("CRN_SEED", DEFAULT_SEED),
        mode=_parse_choice_env("CRN_MODE", DEFAULT_MODE, MODES),
        theorem=_parse_choice_env("CRN_THEOREM", DEFAULT_THEOREM, THEOREMS),
        solver=_parse_choice_env("CRN_SOLVER", DEFAULT_SOLVER, SOLVERS),
        retries=_parse_int_env("CRN_RETRIES", DEFAULT_RETRIES),
        threads=_parse_int_env("CRN_THREADS", DEFAULT_THREADS),
        max_nodes=_parse_int_env("CRN_MAX_NODES", DEFAULT_MAX_NODES),
        time_limit=_parse_int_env("CRN_TIME_LIMIT", DEFAULT_TIME_LIMIT),
        arithmetic=_parse_choice_env("CRN_ARITHMETIC", DEFAULT_ARITHMETIC, ARITHMETICS),
        wprime_cap=_parse_choice_env("CRN_WPRIME_CAP", DEFAULT_WPRIME_CAP, WPRIME_CAPS),
        endpoint=os.environ.get("OTEL_EXPORTER_OTLP_ENDPOINT", DEFAULT_ENDPOINT),
        protocol=os.environ.get("OTEL_EXPORTER_OTLP_PROTOCOL", DEFAULT_PROTOCOL),
        service_name=os.environ.get("OTEL_SERVICE_NAME", DEFAULT_SERVICE_NAME),
        service_namespace=os.environ.get("OTEL_SERVICE_NAMESPACE", DEFAULT_SERVICE_NAMESPACE),
        resource_attributes=parse_resource_attributes(
            os.environ.get("OTEL_RESOURCE_ATTRIBUTES", "")
        ),
        traces_exporter=_parse_choice_env("OTEL_TRACES_EXPORTER", "none", EXPORTERS),
        metrics_exporter=_parse_choice_env("OTEL_METRICS_EXPORTER", "none", EXPORTERS),
        debug=debug_val in ("1", "true", "yes"),
    )


# Singleton config instance (lazy-loaded)
_config: Optional[CrnConfig] = None


def get_config() -> CrnConfig:
    """Get the current configuration (singleton)."""
    global _config
    if _config is None:
        _config = load_config()
    return _config


def reset_config() -> None:
    """Reset config singleton (useful for testing)."""
    global _config
    _config = None
