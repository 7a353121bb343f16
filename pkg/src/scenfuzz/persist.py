"""Reading and writing campaign artifacts (JSON for structures, CSV for logs)."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .causal import CausalGraph
from .config import CampaignConfig
from .fuzzer import LOG_FIELDS, CampaignState, CorpusEntry, summarize
from .scenario import SCHEMA_VERSION, ScenarioSpec
from .sim import Trace


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=False) + "\n")


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def save_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    dump_json(spec.to_dict(), path)


def load_scenario(path: str | Path) -> ScenarioSpec:
    return ScenarioSpec.from_dict(load_json(path))


def save_trace(trace: Trace, path: str | Path) -> None:
    dump_json(trace.to_dict(), path)


def load_trace(path: str | Path) -> Trace:
    return Trace.from_dict(load_json(path))


def save_graph(g: CausalGraph, path: str | Path) -> None:
    Path(path).write_text(g.to_json() + "\n")


def load_graph(path: str | Path) -> CausalGraph:
    return CausalGraph.from_dict(load_json(path))


def trace_csv(trace: Trace) -> str:
    """One row per instant with ego and NPC poses (wide format)."""
    head = ["t", "ego_x", "ego_y", "ego_heading", "ego_speed", "ego_accel"]
    for k in range(trace.n_npcs):
        head += [f"npc{k}_x", f"npc{k}_y", f"npc{k}_heading", f"npc{k}_speed"]
    head += ["collision", "f_ego", "f_npc", "min_distance"]
    lines = [",".join(head)]
    for t in range(len(trace)):
        row = [trace.time[t], *trace.ego[t, :5]]
        for k in range(trace.n_npcs):
            row += list(trace.npcs[t, k, :4])
        row += [int(trace.collision[t]), *trace.fault[t], trace.min_distance[t]]
        lines.append(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in map(_py, row)))
    return "\n".join(lines) + "\n"


def _py(v):
    return v.item() if hasattr(v, "item") else v


def write_log(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.DictWriter(fh, fieldnames=LOG_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def read_log(path: str | Path) -> tuple[int, list[dict]]:
    """(schema version, rows) of a campaign log."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema_version="):
            raise ValueError(f"{path}: missing schema header")
        version = int(first.split("=", 1)[1])
        rows = list(csv.DictReader(fh))
    return version, rows


def _write_entries(entries: list[CorpusEntry], folder: Path) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    for e in entries:
        save_scenario(e.spec, folder / f"{e.id:05d}.scenario.json")
        save_graph(e.graph, folder / f"{e.id:05d}.graph.json")


def write_outputs(state: CampaignState, cfg: CampaignConfig, out: str | Path) -> dict:
    """Write log, summary, config and the FT/SAC/SAVC members; returns the summary."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(state, cfg)
    dump_json(cfg.to_dict(), out / "config.json")
    dump_json(summary, out / "summary.json")
    write_log(state.log, out / "log.csv")
    _write_entries(state.ft, out / "ft")
    _write_entries(state.sac, out / "sac")
    _write_entries(state.savc, out / "savc")
    return summary
