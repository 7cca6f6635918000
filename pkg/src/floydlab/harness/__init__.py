"""Configuration, experiment registry, orchestration and oracle suites."""
from .config import ConfigError, RunConfig, parse_config, serialize_config

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config"]
