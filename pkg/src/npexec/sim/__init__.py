"""Executor simulation: the five executor variants plus the ideal reference."""
from .engine import (EXECUTORS, ExecutorConfig, ScheduleTrace, Variant, default_horizon,
                     executor_config, next_timestamp, simulate)
from .metrics import (LatencyError, SimMetrics, TaskMetrics, compute_metrics, measure_latency,
                      measure_sampled_latency, measure_sequence_latency)
from .reference import reference_np_schedule

__all__ = [
    "EXECUTORS", "ExecutorConfig", "LatencyError", "ScheduleTrace", "SimMetrics", "TaskMetrics",
    "Variant", "compute_metrics", "default_horizon", "executor_config", "measure_latency",
    "measure_sampled_latency", "measure_sequence_latency", "next_timestamp",
    "reference_np_schedule", "simulate",
]
