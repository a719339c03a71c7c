from .config import ConfigError, ScenarioConfig, parse_config, render_config
from .metrics import MetricsReport, compute_throughput
from .scenario import RunResult, run_scenario

__all__ = ["ConfigError", "MetricsReport", "RunResult", "ScenarioConfig", "compute_throughput",
           "parse_config", "render_config", "run_scenario"]
