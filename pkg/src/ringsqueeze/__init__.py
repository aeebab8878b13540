"""Quadrature squeezing from dual-pump four-wave mixing in a Kerr microring.

Five-resonance model (m, p1, s, p2, n) with classical CW pumps and linearised
quantum fluctuations; see ``README.md`` for the command-line interface.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    FoldError,
    IllConditionedError,
    PhysicsError,
    RingSqueezeError,
    UnstableError,
)
from .model import (  # noqa: E402
    ProcessToggles,
    SystemConfig,
    baseline_config,
    derive_rates,
    load_config,
    loads_config,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "FoldError",
    "IllConditionedError",
    "PhysicsError",
    "ProcessToggles",
    "RingSqueezeError",
    "SystemConfig",
    "UnstableError",
    "baseline_config",
    "derive_rates",
    "load_config",
    "loads_config",
]
