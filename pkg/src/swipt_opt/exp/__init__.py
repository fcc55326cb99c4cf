"""Monte-Carlo experiments: configuration, sweeps, CSV output and the command line."""

from .config import SCHEMES, ConfigError, ExperimentConfig, load_config
from .csvio import emit_csv, format_value, read_records
from .sweep import SummaryRow, TradeoffRecord, percentage_gain, run_sweep, solve_scheme, summarize

__all__ = [
    "SCHEMES",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "emit_csv",
    "format_value",
    "read_records",
    "SummaryRow",
    "TradeoffRecord",
    "percentage_gain",
    "run_sweep",
    "solve_scheme",
    "summarize",
]
