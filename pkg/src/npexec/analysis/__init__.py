"""Response-time and latency bounds for the priority-based events executor."""
from .bounds import (AnalysisError, busy_period, dbf, e2e_bound, edf_schedulable, overhead_re,
                     overhead_ro, overhead_tightened, wcrt_np_fp, wcrt_np_fp_all)
from .pipeline import AnalysisReport, ReleaseOption, TaskBound, analyze, periodic_view

__all__ = [
    "AnalysisError", "AnalysisReport", "ReleaseOption", "TaskBound", "analyze", "busy_period",
    "dbf", "e2e_bound", "edf_schedulable", "overhead_re", "overhead_ro", "overhead_tightened",
    "periodic_view", "wcrt_np_fp", "wcrt_np_fp_all",
]
