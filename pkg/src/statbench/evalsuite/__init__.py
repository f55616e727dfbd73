"""Metrics, ALE, surrogate analysis, and replicated-experiment orchestration."""

from .ale import AleCurve, ale
from .metrics import (bias_variance, classification_risk, excess_risk,
                      linear_surrogate, zero_one_error)
from .records import (METRIC_NAMES, SUMMARY_REPLICATE, MetricsRecord, aggregate,
                      read_records_csv, sort_records, write_aggregate_csv,
                      write_records_csv, write_records_jsonl)
from .runner import (ConfigError, ExperimentConfig, RunResult, build_predictor,
                     estimator_name, run_replicated, validate_config)

__all__ = [
    "ale", "AleCurve",
    "linear_surrogate", "bias_variance", "excess_risk", "classification_risk",
    "zero_one_error",
    "MetricsRecord", "METRIC_NAMES", "SUMMARY_REPLICATE", "aggregate",
    "read_records_csv", "write_records_csv", "write_records_jsonl",
    "write_aggregate_csv", "sort_records",
    "ExperimentConfig", "ConfigError", "RunResult", "run_replicated",
    "validate_config", "build_predictor", "estimator_name",
]
