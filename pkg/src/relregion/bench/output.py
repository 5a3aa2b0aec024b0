"""Report writers: per-event CSV, full JSON, per-scenario SVG charts."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from relregion.bench.runner import BenchReport
from relregion.bench.stats import aggregate

CSV_HEADER = ("planner", "scenario", "seed", "elapsed_s", "cost", "edge_evals")
FORMATS = ("csv", "json", "svg")


class BenchIOError(OSError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")


def report_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.records:
        for ev in r.trace:
            w.writerow((r.planner, r.scenario, r.seed, repr(ev.elapsed), repr(ev.cost), ev.edge_evals))
    return buf.getvalue()


def report_json(report: BenchReport) -> str:
    """Records plus the aggregates derived from them, so readers can recompute and compare."""
    doc = report.to_dict()
    doc["aggregates"] = aggregate(report)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_report(path) -> BenchReport:
    return BenchReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def scenario_svg(scenario: str, stats: Dict[str, dict], target: Optional[float]) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "relregion", "svg.fonttype": "none"}):
        fig, (ax_cost, ax_ttt) = plt.subplots(1, 2, figsize=(10, 4))
        names = list(stats)
        for name in names:
            st = stats[name]
            idx = st["curve"]
            if not idx:
                continue
            t = [st["grid"][i] for i in idx]
            line, = ax_cost.plot(t, [st["median"][i] for i in idx], label=name, drawstyle="steps-post")
            ax_cost.fill_between(t, [st["q25"][i] for i in idx], [st["q75"][i] for i in idx],
                                 step="post", alpha=0.25, color=line.get_color())
        if target is not None:
            ax_cost.axhline(target, color="k", ls="--", lw=0.8, label="target")
        ax_cost.set_xscale("log")
        ax_cost.set_xlabel("time [s]")
        ax_cost.set_ylabel("solution cost (median, IQR)")
        ax_cost.set_title(scenario)
        if ax_cost.lines:
            ax_cost.legend(fontsize="small")

        med, err_lo, err_hi, labels = [], [], [], []
        for name in names:
            tt = stats[name]["time_to_target"]
            labels.append(f"{name}\n(DNF {tt['dnf']}/{tt['runs']})")
            if tt["median"] is None:
                med.append(0.0)
                err_lo.append(0.0)
                err_hi.append(0.0)
            else:
                med.append(tt["median"])
                err_lo.append(tt["median"] - tt["q25"])
                err_hi.append(tt["q75"] - tt["median"])
        ax_ttt.bar(range(len(names)), med, yerr=[err_lo, err_hi], capsize=4, color="0.6")
        ax_ttt.set_xticks(range(len(names)))
        ax_ttt.set_xticklabels(labels, fontsize="small")
        ax_ttt.set_ylabel("time to target [s]")
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise BenchIOError(path, exc.strerror or str(exc)) from exc


def emit(report: BenchReport, out_dir, formats: Iterable[str] = FORMATS) -> List[Path]:
    out = Path(out_dir)
    formats = list(formats)
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown formats {sorted(unknown)}")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BenchIOError(out, exc.strerror or str(exc)) from exc
    written = []
    if "csv" in formats:
        written.append(out / "traces.csv")
        _write(written[-1], report_csv(report))
    if "json" in formats:
        written.append(out / "report.json")
        _write(written[-1], report_json(report))
    if "svg" in formats:
        agg = aggregate(report)
        for sc, stats in agg.items():
            written.append(out / f"{sc}.svg")
            _write(written[-1], scenario_svg(sc, stats, report.targets.get(sc)))
    return written
