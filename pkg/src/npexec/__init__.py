"""Simulation and analysis of ROS 2 executor scheduling for periodic tasks."""
from .model import (Chain, ChainMode, Job, ModelError, PriorityPolicy, TaskKind, TaskSet,
                    TaskSpec, assign_priorities, fmt_ms, hyperperiod, ms, to_ms)

__version__ = "0.1.0"
