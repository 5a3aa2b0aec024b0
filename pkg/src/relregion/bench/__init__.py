from relregion.bench.output import CSV_HEADER, BenchIOError, emit, read_report, report_csv, report_json
from relregion.bench.registry import PLANNERS, get_planner, make_config
from relregion.bench.runner import (
    BenchConfig,
    BenchReport,
    CalibrationFailed,
    RunRecord,
    calibrate_c_opt,
    load_bench_config,
    resolve_scenario,
    run_benchmark,
)
from relregion.bench.stats import aggregate, cost_at, time_grid

__all__ = [
    "BenchConfig",
    "BenchIOError",
    "BenchReport",
    "CSV_HEADER",
    "CalibrationFailed",
    "PLANNERS",
    "RunRecord",
    "aggregate",
    "calibrate_c_opt",
    "cost_at",
    "emit",
    "get_planner",
    "load_bench_config",
    "make_config",
    "read_report",
    "report_csv",
    "report_json",
    "resolve_scenario",
    "run_benchmark",
    "time_grid",
]
