"""Report tables and plot-ready CSV exports computed from campaign records."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

from .baseline.metrics import (
    EARLY_STOP_FACTORS,
    ConfusionCounts,
    compute_metrics,
    cost_curves,
    tests_per_failure,
)
from .fsutil import atomic_write_text
from .records import Campaign, dumps
from .search.episode import FAIL_INIT, FAIL_SEARCH, OUTCOMES

FAILURE_LABELS = (FAIL_SEARCH, FAIL_INIT)


def _by_kind(campaigns: list[Campaign], kind: str, source: str | None = None) -> list[Campaign]:
    out = [c for c in campaigns if c.kind == kind]
    if source is not None:
        out = [c for c in out if c.config.get("source_kind") == source]
    return out


def _counts(rows: list[dict], threshold: float) -> ConfusionCounts:
    c = ConfusionCounts()
    for r in rows:
        fails = r["fails"][str(threshold)]
        c.add(r["label"], fails if r["label"] in FAILURE_LABELS else not fails)
    return c


def _clean(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def build_report(campaigns: list[Campaign]) -> dict:
    """Everything in the report is a pure function of the campaigns' records."""
    report: dict = {"inputs": [{"kind": c.kind, "n_records": len(c.records),
                                "checksum": c.records_checksum()} for c in campaigns]}

    searches = _by_kind(campaigns, "search")
    if searches:
        outcome = {o: 0 for o in OUTCOMES}
        tests = 0
        for c in searches:
            for r in c.records:
                outcome[r["outcome"]] += 1
                tests += r["iterations"]
        report["search"] = {**outcome, "episodes": sum(outcome.values()), "total_tests": tests}

    validation = {}
    for source in ("search", "grid"):
        vals = _by_kind(campaigns, "validate", source)
        if not vals:
            continue
        rows = [r for c in vals for r in c.records]
        thresholds = sorted({float(t) for r in rows for t in r["fails"]})
        validation[source] = {}
        for t in thresholds:
            counts = _counts(rows, t)
            validation[source][str(t)] = {"counts": counts.to_dict(), "metrics": compute_metrics(counts),
                                          "validated_failures": counts.tp}
    if validation:
        report["validation"] = validation

    grids = _by_kind(campaigns, "grid")
    efficiency = []
    for t in sorted({t for v in validation.values() for t in v}, key=float):
        for method, n_tests in (("gradient", report.get("search", {}).get("total_tests")),
                                ("grid", sum(len(c.records) for c in grids) if grids else None)):
            source = "search" if method == "gradient" else "grid"
            if n_tests is None or t not in validation.get(source, {}):
                continue
            found = validation[source][t]["validated_failures"]
            efficiency.append({"threshold": float(t), "method": method, "tests": n_tests,
                               "validated_failures": found,
                               "tests_per_failure": _clean(tests_per_failure(n_tests, found))})
    if efficiency:
        report["efficiency"] = efficiency
    report["checksum"] = hashlib.sha256(dumps(report).encode()).hexdigest()
    return report


def verify_report(report: dict, campaigns: list[Campaign]) -> bool:
    return build_report(campaigns) == report


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def render_text(report: dict) -> str:
    out = []
    if "search" in report:
        s = report["search"]
        out.append("Search outcomes")
        out.append(f"  episodes {s['episodes']}  FailSearch {s['FailSearch']}  FailInit {s['FailInit']}  "
                   f"NotFail {s['NotFail']}  tests {s['total_tests']}")
    for source, per_t in report.get("validation", {}).items():
        for t, block in per_t.items():
            c, m = block["counts"], block["metrics"]
            out.append(f"Validation of {source} labels, T={float(t):g}")
            out.append(f"  {'class':<11}{'true':>6}{'false':>7}")
            for label, key in (("FailSearch", "fail_search"), ("FailInit", "fail_init"), ("NotFail", "not_fail")):
                out.append(f"  {label:<11}{c[key + '_true']:>6}{c[key + '_false']:>7}")
            out.append(f"  accuracy {_fmt(m['accuracy'])}  precision {_fmt(m['precision'])}  "
                       f"recall {_fmt(m['recall'])}")
    if "efficiency" in report:
        out.append("Efficiency")
        out.append(f"  {'T':>4} {'method':<9}{'tests':>7}{'failures':>10}{'tests/failure':>15}")
        for r in report["efficiency"]:
            tpf = r["tests_per_failure"]
            tpf = tpf if isinstance(tpf, str) else f"{tpf:.1f}"
            out.append(f"  {r['threshold']:>4g} {r['method']:<9}{r['tests']:>7}{r['validated_failures']:>10}{tpf:>15}")
    out.append(f"checksum {report['checksum']}")
    return "\n".join(out) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


TRAJECTORY_COLUMNS = ["episode", "iteration", "speed", "delay_spread", "snr", "loss", "ber_t", "ber_ai", "lr"]
FAILURE_COLUMNS = ["episode", "outcome", "speed", "delay_spread", "snr", "ber_t", "ber_ai"]
COST_COLUMNS = ["d", "k", "factor", "grid_tests", "gradient_tests"]


def trajectory_rows(campaigns: list[Campaign]) -> list[list]:
    rows = []
    for c in _by_kind(campaigns, "search"):
        for r in c.records:
            for it in r["trace"]:
                sc = it["scenario"]
                rows.append([r["episode"], it["iteration"], sc["speed"], sc["delay_spread"], sc["snr"],
                             it["loss"], it["ber_t"], it["ber_ai"], it["lr"]])
    return rows


def failure_rows(campaigns: list[Campaign]) -> list[list]:
    rows = []
    for c in _by_kind(campaigns, "search"):
        for r in c.records:
            if r["outcome"] in FAILURE_LABELS:
                last = r["trace"][-1]
                sc = last["scenario"]
                rows.append([r["episode"], r["outcome"], sc["speed"], sc["delay_spread"], sc["snr"],
                             last["ber_t"], last["ber_ai"]])
    return rows


def export_plot_data(campaigns: list[Campaign], out_dir: str | Path, k: int = 10, d_max: int = 10,
                     n_episodes: int = 100, max_iters: int = 100) -> dict[str, Path]:
    out_dir = Path(out_dir)
    cost = [[r["d"], r["k"], r["factor"], r["grid_tests"], r["gradient_tests"]]
            for r in cost_curves(k, d_max, n_episodes, max_iters, EARLY_STOP_FACTORS)]
    files = {
        "trajectories": (TRAJECTORY_COLUMNS, trajectory_rows(campaigns)),
        "failures": (FAILURE_COLUMNS, failure_rows(campaigns)),
        "cost": (COST_COLUMNS, cost),
    }
    paths = {}
    for name, (header, rows) in files.items():
        paths[name] = out_dir / f"{name}.csv"
        atomic_write_text(paths[name], _csv(header, rows))
    return paths


def write_report(campaigns: list[Campaign], out_dir: str | Path) -> dict:
    out_dir = Path(out_dir)
    report = build_report(campaigns)
    atomic_write_text(out_dir / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    atomic_write_text(out_dir / "report.txt", render_text(report))
    export_plot_data(campaigns, out_dir)
    return report
