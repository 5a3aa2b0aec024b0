import csv
import io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from relregion.bench import (
    CSV_HEADER,
    BenchConfig,
    BenchIOError,
    CalibrationFailed,
    RunRecord,
    aggregate,
    calibrate_c_opt,
    cost_at,
    emit,
    load_bench_config,
    make_config,
    read_report,
    report_csv,
    run_benchmark,
    time_grid,
)
from relregion.bench.cli import main
from relregion.bench.runner import PROFILES, THREADS_ENV, thread_count
from relregion.bench.stats import cell_stats, quartiles
from relregion.planner.common import TraceEvent
from relregion.world.corpus import load_builtin, scenario_path


def _cfg(**kw):
    base = dict(scenarios=["empty"], planners={"relregion": {}, "rrtstar": {}}, runs=3, time_budget=0.3,
                clock="work")
    base.update(kw)
    return BenchConfig(**base)


@pytest.fixture(scope="module")
def small_report():
    return run_benchmark(_cfg(target_cost=8.5))


def _rec(trace, target=None, seed=0):
    trace = [TraceEvent(t, c, 0, i) for i, (t, c) in enumerate(trace)]
    rec = RunRecord("p", "s", seed, "Solved" if trace else "Timeout", trace[-1].cost if trace else None, trace, {},
                    target)
    if target is not None:
        hit = next((e for e in trace if e.cost <= target), None)
        rec.time_to_target = hit.elapsed if hit else None
        rec.evals_to_target = hit.edge_evals if hit else None
    return rec


def test_record_count_and_seeds(small_report):
    assert len(small_report.records) == 6
    assert [r.seed for r in small_report.cell("empty", "rrtstar")] == [0, 1, 2]
    assert small_report.planners() == ["relregion", "rrtstar"]


def test_time_to_target_is_first_event_at_or_below_target(small_report):
    for r in small_report.records:
        hits = [e for e in r.trace if e.cost <= 8.5]
        if hits:
            assert r.time_to_target == hits[0].elapsed and r.evals_to_target == hits[0].edge_evals
        else:
            assert r.dnf


def test_csv_schema_and_determinism(small_report):
    text = report_csv(small_report)
    rows = list(csv.reader(io.StringIO(text)))
    assert text.splitlines()[0] == "planner,scenario,seed,elapsed_s,cost,edge_evals"
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) - 1 == sum(len(r.trace) for r in small_report.records)
    assert report_csv(run_benchmark(_cfg(target_cost=8.5))) == text


def test_json_round_trip_and_recompute(small_report, tmp_path):
    written = emit(small_report, tmp_path, ["json"])
    back = read_report(written[0])
    assert back == small_report
    assert json.loads(json.dumps(aggregate(back))) == json.loads(json.dumps(aggregate(small_report)))


def test_svg_parses_with_fixed_viewbox(small_report, tmp_path):
    paths = emit(small_report, tmp_path, ["svg"])
    assert [p.name for p in paths] == ["empty.svg"]
    root = ET.parse(paths[0]).getroot()
    assert root.tag.endswith("svg") and root.get("viewBox")
    again = emit(small_report, tmp_path / "again", ["svg"])
    assert again[0].read_text() == paths[0].read_text()


def test_emit_errors(small_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(BenchIOError) as err:
        emit(small_report, blocker / "sub", ["csv"])
    assert str(blocker) in err.value.path
    with pytest.raises(ValueError):
        emit(small_report, tmp_path, ["png"])


def test_quantile_examples():
    assert quartiles([1, 2, 3, 4])[1] == 2.5
    trace = [(0.05, 10.0), (0.2, 9.0), (1.0, 8.0)]
    st = cell_stats([_rec(trace)], 2.0)
    for t, lo, med, hi in zip(st["grid"], st["q25"], st["median"], st["q75"]):
        want = cost_at(_rec(trace).trace, t)
        assert lo == med == hi == want
    assert st["t50"] == st["t95"] == pytest.approx(min(t for t in st["grid"] if t >= 0.05))


def test_all_dnf_cell():
    recs = [_rec([], target=5.0, seed=s) for s in range(4)]
    st = cell_stats(recs, 1.0)
    assert st["curve"] == [] and st["t50"] is None
    assert st["time_to_target"]["dnf"] == 4 and st["time_to_target"]["median"] is None


def test_band_is_drawn_between_half_and_most_solved():
    recs = [_rec([(t, 5.0)], seed=i) for i, t in enumerate((0.1, 0.2, 0.5, 0.9))]
    st = cell_stats(recs, 1.0)
    drawn = [st["grid"][i] for i in st["curve"]]
    assert drawn[0] >= 0.2 and min(t for t in st["grid"] if t >= 0.2) == drawn[0]
    assert drawn[-1] == min(t for t in st["grid"] if t >= 0.9)


def test_aggregate_never_below_contributing_costs(small_report):
    for sc, cells in aggregate(small_report).items():
        for name, st in cells.items():
            recs = small_report.cell(sc, name)
            for t, lo in zip(st["grid"], st["q25"]):
                costs = [c for c in (cost_at(r.trace, t) for r in recs) if c is not None]
                if costs:
                    assert lo >= min(costs)


def test_time_grid():
    g = time_grid(20.0)
    assert len(g) == 200 and g[-1] == pytest.approx(20.0) and g[0] > 0.01
    assert np.all(np.diff(np.log(g)) > 0)


def test_cost_at_is_a_step_function():
    trace = _rec([(1.0, 5.0), (2.0, 4.0)]).trace
    assert cost_at(trace, 0.5) is None
    assert cost_at(trace, 1.0) == 5.0 and cost_at(trace, 1.99) == 5.0 and cost_at(trace, 3.0) == 4.0


def test_config_validation_and_profiles():
    with pytest.raises(ValueError):
        _cfg(runs=0)
    with pytest.raises(ValueError):
        _cfg(target_ratio=1.5)
    with pytest.raises(ValueError):
        _cfg(target_ratio=0.9, target_cost=3.0)
    with pytest.raises(KeyError):
        _cfg(planners={"nope": {}})
    ci = _cfg().with_profile("ci")
    assert (ci.runs, ci.time_budget) == (PROFILES["ci"]["runs"], PROFILES["ci"]["time_budget"])
    assert _cfg().with_profile(None) == _cfg()
    assert make_config("relregion", {"mag_clamp": [0.2, 0.9]}, seed=3).mag_clamp == (0.2, 0.9)
    with pytest.raises(ValueError):
        make_config("rrtstar", {"m": 5})


def test_crashed_run_is_a_dnf_not_an_abort():
    rep = run_benchmark(_cfg(planners={"rrtstar": {"eta": -1.0}}, runs=2))
    assert len(rep.records) == 2
    assert all(r.status == "Error" and r.dnf and "eta" in r.error for r in rep.records)


def test_ratio_target_uses_fixed_c_opt():
    rep = run_benchmark(_cfg(planners={"rrtstar": {}}, runs=1, target_ratio=0.5, c_opt={"empty": 20.0}))
    assert rep.targets == {"empty": 10.0} and rep.c_opt == {"empty": 20.0}


def test_parallel_matches_serial(monkeypatch):
    cfg = _cfg(runs=2)
    serial = run_benchmark(cfg, threads=1)
    monkeypatch.setenv(THREADS_ENV, "2")
    assert thread_count() == 2
    assert report_csv(run_benchmark(cfg)) == report_csv(serial)
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ValueError):
        thread_count()


def test_load_config_resolves_relative_paths(tmp_path):
    (tmp_path / "w.json").write_text(scenario_path("empty").read_text())
    (tmp_path / "cfg.json").write_text(json.dumps({"scenarios": ["w.json", "maze"], "planners": ["rrtstar"]}))
    cfg = load_bench_config(tmp_path / "cfg.json")
    assert cfg.scenarios == [str(tmp_path / "w.json"), "maze"]
    assert cfg.planners == {"rrtstar": {}}


def test_calibration():
    sc = load_builtin("empty")
    c = calibrate_c_opt(sc, 1.0, clock="work")
    assert c == calibrate_c_opt(sc, 1.0, clock="work")
    assert c <= 1.05 * (8.0 - sc.goal_radius)
    with pytest.raises(CalibrationFailed):
        calibrate_c_opt(load_builtin("wall"), 0.3)


# -- CLI ---------------------------------------------------------------------

def test_cli_plan(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["plan", "--scenario", "empty", "--planner", "relregion", "--budget", "1",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "Solved" and doc["path"]
    assert "relregion empty seed=0" in capsys.readouterr().out
    assert main(["plan", "--scenario", "wall", "--planner", "rrtstar", "--budget", "0.3"]) == 2
    assert main(["plan", "--scenario", "empty", "--planner", "rrtstar", "--budget", "0.3",
                 "--target", "1.0"]) == 2
    assert main(["plan", "--scenario", "empty", "--planner", "rrtstar", "--budget", "2",
                 "--target-ratio", "1.0", "--c-opt", "9.0"]) == 0
    assert main(["plan", "--scenario", str(tmp_path / "missing.json"), "--planner", "rrtstar"]) == 1


def test_cli_bench_and_calibrate(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": ["empty"], "planners": {"rrtstar": {}}, "runs": 2,
                               "time_budget": 0.3, "clock": "work"}))
    out = tmp_path / "out"
    assert main(["bench", "--config", str(cfg), "--out-dir", str(out), "--formats", "csv,json"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["report.json", "traces.csv"]
    cfg.write_text(json.dumps({"scenarios": ["wall"], "planners": {"rrtstar": {}}, "runs": 1,
                               "time_budget": 0.2}))
    assert main(["bench", "--config", str(cfg), "--out-dir", str(out)]) == 2
    assert main(["bench", "--config", str(tmp_path / "nope.json"), "--out-dir", str(out)]) == 1
    assert main(["calibrate", "--scenario", "wall", "--budget", "0.2"]) == 2
    capsys.readouterr()
    assert main(["calibrate", "--scenario", "empty", "--budget", "0.5", "--clock", "work"]) == 0
    assert math.isfinite(float(capsys.readouterr().out))
