from relregion.planner.common import PlanResult, Status, TraceEvent, replan, rgg_k
from relregion.planner.relregion import PlannerConfig, RelevantRegionPlanner, Sample, plan
from relregion.planner.sampling import NotPromising, estimate_step, sample_relevant, step_size, weight_vertices

__all__ = [
    "NotPromising",
    "PlanResult",
    "PlannerConfig",
    "RelevantRegionPlanner",
    "Sample",
    "Status",
    "TraceEvent",
    "estimate_step",
    "plan",
    "replan",
    "rgg_k",
    "sample_relevant",
    "step_size",
    "weight_vertices",
]
