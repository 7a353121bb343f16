"""Command-line front end: run, replay, discover, synth, report, generate."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import persist, report, synth
from .abstraction import AbstractionConfig, TraceTooShortError, abstract_scenario
from .archetypes import ARCHETYPES, generate
from .causal import DiscoveryConfig, discover, violation_signature
from .config import METHODS, CampaignConfig, ConfigError, load_config
from .feedback import oracle, violation_degree
from .fuzzer import run
from .planner import EgoPlanner
from .scenario import InvalidScenarioError, SchemaVersionError
from .sim import simulate

log = logging.getLogger("scenfuzz")


class CliError(Exception):
    pass


def _writable_dir(path: str | Path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {p}: {exc}") from exc
    probe = p / ".write_probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {p} is not writable: {exc}") from exc
    return p


def cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else CampaignConfig()
    cfg = cfg.with_overrides(seed=args.seed, budget=args.budget, method=args.method, out=args.out,
                             archetype=args.archetype, time_budget=args.time_budget)
    if not cfg.out:
        raise CliError("no output directory: pass --out or set 'out' in the config")
    out = _writable_dir(cfg.out)
    seeds = generate(cfg.archetype, cfg.seed, cfg.n_seeds)
    state = run(seeds, cfg, EgoPlanner(cfg.planner))
    summary = persist.write_outputs(state, cfg, out)
    print(f"{cfg.method}: {summary['executions']} executions, {summary['violations']} violations, "
          f"SAC {summary['sac']}, SAVC {summary['savc']}, patterns {summary['violation_patterns']}, "
          f"first failure {summary['first_failure']}")
    return 0


def cmd_replay(args) -> int:
    spec = persist.load_scenario(args.scenario)
    trace = simulate(spec)
    verdict = oracle(trace)
    out = _writable_dir(args.out) if args.out else None
    if out is not None:
        persist.save_trace(trace, out / "trace.json")
        (out / "trace.csv").write_text(persist.trace_csv(trace))
    print(f"{verdict} outcome={trace.outcome} steps={len(trace)} degree={violation_degree(trace):.4f}")
    return 0


def cmd_discover(args) -> int:
    trace = persist.load_trace(args.trace)
    acfg = AbstractionConfig(stride=args.stride)
    dcfg = DiscoveryConfig(threshold=args.threshold, jitter=0.0 if args.no_jitter else 1e-3, seed=args.seed)
    g = discover(abstract_scenario(trace, acfg), dcfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    persist.save_graph(g, out)
    out.with_suffix(".edges.txt").write_text(g.to_edge_list())
    out.with_suffix(".dot").write_text(g.to_dot())
    sig = sorted(violation_signature(g))
    print(f"{len(g.edges())} edges; violation signature: "
          + (", ".join(f"{s}->{t}" for s, t in sig) if sig else "(empty)"))
    if g.low_confidence:
        print("warning: fewer samples than variables, graph is low confidence", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.weights:
        W = np.asarray(json.loads(Path(args.weights).read_text()), dtype=float)
    else:
        W = synth.chain(args.chain, rng)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        X = synth.sample(W, args.q, args.noise, seed=args.seed)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = _writable_dir(args.out)
    np.savetxt(out / "data.csv", X, delimiter=",", fmt="%.10g")
    persist.dump_json({"W": W.tolist(), "B": (W != 0).astype(int).tolist(), "noise": args.noise,
                       "q": args.q, "seed": args.seed}, out / "truth.json")
    print(f"wrote {X.shape[0]}x{X.shape[1]} samples to {out / 'data.csv'}")
    return 0


def cmd_report(args) -> int:
    rows = report.aggregate(args.runs)
    text = report.to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_generate(args) -> int:
    out = _writable_dir(args.out)
    for i, spec in enumerate(generate(args.archetype, args.seed, args.count)):
        persist.save_scenario(spec, out / f"{args.archetype}-{args.seed}-{i}.json")
    print(f"wrote {args.count} scenario(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scenfuzz", description="Causality-guided scenario fuzzing for driving policies")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a fuzzing campaign")
    r.add_argument("config", nargs="?", help="campaign config JSON")
    r.add_argument("--method", help=f"one of {', '.join(METHODS)}")
    r.add_argument("--archetype", help=f"one of {', '.join(ARCHETYPES)}")
    r.add_argument("--seed", type=int)
    r.add_argument("--budget", type=int, help="number of mutant executions")
    r.add_argument("--time-budget", type=float, help="optional wall-clock limit in seconds")
    r.add_argument("--out", help="output directory")
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("replay", help="re-execute a scenario file")
    rp.add_argument("scenario")
    rp.add_argument("--out", help="directory for trace.json and trace.csv")
    rp.set_defaults(func=cmd_replay)

    d = sub.add_parser("discover", help="causal graph of a trace file")
    d.add_argument("trace")
    d.add_argument("--out", required=True, help="graph JSON path (edge list and DOT are written alongside)")
    d.add_argument("--stride", type=int, default=1)
    d.add_argument("--threshold", type=float, default=0.05)
    d.add_argument("--no-jitter", action="store_true")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_discover)

    s = sub.add_parser("synth", help="synthetic LiNGAM data with known truth")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--chain", type=int, default=5, help="random chain over this many variables")
    g.add_argument("--weights", help="JSON file with a square weight matrix (W[i][j]: j -> i)")
    s.add_argument("--noise", default="uniform", choices=synth.NOISE_KINDS)
    s.add_argument("-q", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    rep = sub.add_parser("report", help="aggregate campaign directories")
    rep.add_argument("runs", nargs="*")
    rep.add_argument("--out", help="write the CSV here as well")
    rep.set_defaults(func=cmd_report)

    gen = sub.add_parser("generate", help="write archetype scenarios to JSON")
    gen.add_argument("--archetype", default="lane-follow", choices=ARCHETYPES)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CliError, report.ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidScenarioError, SchemaVersionError, TraceTooShortError, ValueError, OSError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
