"""Aggregate campaign output directories into a per-method table."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .persist import load_json, read_log

REPORT_FIELDS = ("method", "runs", "violations", "sac", "savc", "violation_patterns", "first_failure",
                 "mean_mutation_time", "mean_feedback_time")


class ReportError(ValueError):
    pass


def run_record(run_dir: str | Path) -> dict:
    """Metrics of one campaign directory, recomputed from its log where possible."""
    run_dir = Path(run_dir)
    if not (run_dir / "summary.json").exists() or not (run_dir / "log.csv").exists():
        raise ReportError(f"{run_dir}: no summary.json/log.csv found")
    summary = load_json(run_dir / "summary.json")
    version, rows = read_log(run_dir / "log.csv")
    ok = [r for r in rows if r["result"] != "error"]
    last = rows[-1] if rows else None
    rec = {
        "schema_version": (summary.get("schema_version"), version),
        "method": summary["method"],
        "violations": int(last["ft"]) if last else summary["violations"],
        "sac": int(last["sac"]) if last else summary["sac"],
        "savc": int(last["savc"]) if last else summary["savc"],
        "violation_patterns": int(last["patterns"]) if last else summary["violation_patterns"],
        "first_failure": summary["first_failure"],
        "mean_mutation_time": float(np.mean([float(r["mutation_time"]) for r in ok])) if ok else 0.0,
        "mean_feedback_time": float(np.mean([float(r["feedback_time"]) for r in ok])) if ok else 0.0,
    }
    return rec


def aggregate(run_dirs: Sequence[str | Path]) -> list[dict]:
    if not run_dirs:
        raise ReportError("no run directories given")
    records = [run_record(d) for d in run_dirs]
    versions = {r["schema_version"] for r in records}
    if len(versions) != 1:
        raise ReportError(f"mixed schema versions: {sorted(versions, key=str)}")
    by_method: dict[str, list[dict]] = defaultdict(list)
    for r in records:
        by_method[r["method"]].append(r)
    out = []
    for method in sorted(by_method):
        rs = by_method[method]
        row = {"method": method, "runs": len(rs)}
        for k in REPORT_FIELDS[2:]:
            row[k] = float(np.mean([r[k] for r in rs]))
        out.append(row)
    return out


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
