"""Causality-guided fuzzing loop and the two feedback-free baselines.

Every execution goes through the same pipeline (simulate, abstract,
discover, evaluate) and is classified the same way in all modes:

* violated -> FT,
* novel scene->action graph (ts >= theta_ts) with a strictly better
  violation degree than its parent -> SAC,
* otherwise a scene-action-violation graph unlike any stored one
  (vd > theta_vd) -> SAVC.

Besides the SAVC admission set, the number of distinct non-empty violation
signatures over FT members is tracked as the violation-diversity count.

Only the causal mode uses that classification to decide what enters the
corpus; the baselines add every mutant. Violating runs also store their
full graph in the reference set used for vd, so vd measures novelty
against known violations as well.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .abstraction import abstract_scenario
from .causal import CausalGraph, ace_per_npc, discover, subgraph_sa, violation_signature
from .config import CampaignConfig
from .feedback import FeedbackRecord, evaluate
from .mutation import causal_adaptive_mutation, uniform_mutation
from .planner import EgoPlanner
from .scenario import SCHEMA_VERSION, ScenarioSpec
from .sim import Trace, simulate

log = logging.getLogger(__name__)

LOG_FIELDS = ("iteration", "parent", "result", "admitted", "ts", "vd", "degree",
              "ft", "sac", "savc", "patterns", "corpus", "mutation_time", "execution_time", "feedback_time")


class EmptyCorpusError(RuntimeError):
    pass


@dataclass
class Execution:
    spec: ScenarioSpec
    trace: Trace
    graph: CausalGraph
    b_sa: np.ndarray
    b_sav: np.ndarray
    ace: np.ndarray


@dataclass
class CorpusEntry:
    id: int
    spec: ScenarioSpec
    graph: CausalGraph
    fitness: float
    b_sa: np.ndarray
    b_sav: np.ndarray
    ace: np.ndarray
    result: str
    parent: Optional[int]
    iteration: int
    outcome: str = ""

    @property
    def signature(self) -> frozenset:
        return violation_signature(self.graph)


@dataclass
class CampaignState:
    corpus: list[CorpusEntry] = field(default_factory=list)
    ft: list[CorpusEntry] = field(default_factory=list)
    sac: list[CorpusEntry] = field(default_factory=list)
    savc: list[CorpusEntry] = field(default_factory=list)
    sac_refs: list[np.ndarray] = field(default_factory=list)
    savc_refs: list[np.ndarray] = field(default_factory=list)
    # distinct non-empty violation signatures among FT members
    patterns: list[frozenset] = field(default_factory=list)
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    iteration: int = 0
    executions: int = 0
    errors: int = 0
    first_failure: Optional[int] = None
    next_id: int = 0
    log: list[dict] = field(default_factory=list)

    def rng_state(self) -> dict:
        return self.rng.bit_generator.state


def execute(spec: ScenarioSpec, cfg: CampaignConfig, planner: Optional[EgoPlanner] = None) -> Execution:
    trace = simulate(spec, planner or EgoPlanner(cfg.planner))
    X = abstract_scenario(trace, cfg.abstraction)
    g = discover(X, cfg.discovery)
    return Execution(spec, trace, g, subgraph_sa(g), g.B.copy(), ace_per_npc(trace, g, cfg.abstraction))


def select_seed(state: CampaignState) -> CorpusEntry:
    """Entry with the lowest fitness; the most recently added wins ties."""
    if not state.corpus:
        raise EmptyCorpusError("corpus is empty")
    best = state.corpus[0]
    for e in state.corpus[1:]:
        if e.fitness <= best.fitness:
            best = e
    return best


def fitness_weights(fitness: Sequence[float]) -> np.ndarray:
    """Selection probabilities favouring low violation degree: w = 1 / (1 + d)."""
    w = 1.0 / (1.0 + np.asarray(fitness, dtype=float))
    return w / w.sum()


def fitness_proportionate(fitness: Sequence[float], rng: np.random.Generator, size: Optional[int] = None):
    return rng.choice(len(fitness), size=size, p=fitness_weights(fitness))


def _entry(state: CampaignState, ex: Execution, fb: FeedbackRecord, parent: Optional[int]) -> CorpusEntry:
    e = CorpusEntry(state.next_id, ex.spec, ex.graph, fb.degree, ex.b_sa, ex.b_sav, ex.ace,
                    fb.result, parent, state.iteration, ex.trace.outcome)
    state.next_id += 1
    return e


def classify(state: CampaignState, fb: FeedbackRecord, parent_fitness: float, cfg: CampaignConfig) -> str:
    if fb.violated:
        return "ft"
    if fb.ts >= cfg.theta_ts and fb.degree < parent_fitness:
        return "sac"
    if fb.vd > cfg.theta_vd:
        return "savc"
    return "none"


def _record(state: CampaignState, entry: CorpusEntry, label: str) -> None:
    if label == "ft":
        state.ft.append(entry)
        state.savc_refs.append(entry.b_sav)
        sig = entry.signature
        if sig and sig not in state.patterns:
            state.patterns.append(sig)
        if state.first_failure is None:
            state.first_failure = state.iteration
    elif label == "sac":
        state.sac.append(entry)
        state.sac_refs.append(entry.b_sa)
    elif label == "savc":
        state.savc.append(entry)
        state.savc_refs.append(entry.b_sav)


def initialize(seeds: Sequence[ScenarioSpec], cfg: CampaignConfig, planner: EgoPlanner) -> CampaignState:
    if not seeds:
        raise EmptyCorpusError("need at least one initial seed")
    state = CampaignState(rng=np.random.default_rng(cfg.seed))
    for spec in seeds:
        ex = execute(spec, cfg, planner)
        fb = evaluate(ex.trace, ex.b_sa, ex.b_sav, state.sac_refs, state.savc_refs)
        e = _entry(state, ex, fb, None)
        state.corpus.append(e)
        if fb.violated:
            _record(state, e, "ft")
    return state


def _step(state: CampaignState, cfg: CampaignConfig, planner: EgoPlanner, parent: CorpusEntry,
          mutate: Callable[[CorpusEntry], ScenarioSpec], admit_all: bool) -> None:
    state.iteration += 1
    row = {"iteration": state.iteration, "parent": parent.id, "ts": "", "vd": "", "degree": "",
           "mutation_time": 0.0, "execution_time": 0.0, "feedback_time": 0.0}
    try:
        t0 = time.perf_counter()
        spec = mutate(parent)
        t1 = time.perf_counter()
        trace = simulate(spec, planner)
        t2 = time.perf_counter()
        X = abstract_scenario(trace, cfg.abstraction)
        g = discover(X, cfg.discovery)
        ex = Execution(spec, trace, g, subgraph_sa(g), g.B.copy(), ace_per_npc(trace, g, cfg.abstraction))
        fb = evaluate(trace, ex.b_sa, ex.b_sav, state.sac_refs, state.savc_refs)
        t3 = time.perf_counter()
    except Exception as exc:  # noqa: BLE001 - a broken mutant must not end the campaign
        log.warning("iteration %d failed: %s", state.iteration, exc)
        state.executions += 1
        state.errors += 1
        row.update(result="error", admitted="none")
        _log(state, row)
        return
    state.executions += 1
    label = classify(state, fb, parent.fitness, cfg)
    entry = _entry(state, ex, fb, parent.id)
    _record(state, entry, label)
    if admit_all or label != "none":
        state.corpus.append(entry)
    row.update(result=fb.result, admitted=label, ts=fb.ts, vd=fb.vd, degree=fb.degree,
               mutation_time=t1 - t0, execution_time=t2 - t1, feedback_time=t3 - t2)
    _log(state, row)


def _log(state: CampaignState, row: dict) -> None:
    row.update(ft=len(state.ft), sac=len(state.sac), savc=len(state.savc), patterns=len(state.patterns),
               corpus=len(state.corpus))
    state.log.append({k: row[k] for k in LOG_FIELDS})


def _out_of_budget(state: CampaignState, cfg: CampaignConfig, t_start: float) -> bool:
    if state.executions >= cfg.budget:
        return True
    return cfg.time_budget is not None and time.perf_counter() - t_start >= cfg.time_budget


def run_campaign(seeds: Sequence[ScenarioSpec], cfg: CampaignConfig,
                 planner: Optional[EgoPlanner] = None) -> CampaignState:
    """Causal-feedback fuzzing loop."""
    planner = planner or EgoPlanner(cfg.planner)
    t_start = time.perf_counter()
    state = initialize(seeds, cfg, planner)
    while not _out_of_budget(state, cfg, t_start):
        parent = select_seed(state)
        _step(state, cfg, planner, parent,
              lambda p: causal_adaptive_mutation(p.spec, p.ace, cfg.mutation, state.rng), admit_all=False)
    return state


def run_baseline_random(seeds: Sequence[ScenarioSpec], cfg: CampaignConfig,
                        planner: Optional[EgoPlanner] = None) -> CampaignState:
    """Uniform selection and mutation; feedback is only logged."""
    planner = planner or EgoPlanner(cfg.planner)
    t_start = time.perf_counter()
    state = initialize(seeds, cfg, planner)
    while not _out_of_budget(state, cfg, t_start):
        parent = state.corpus[int(state.rng.integers(len(state.corpus)))]
        _step(state, cfg, planner, parent, lambda p: uniform_mutation(p.spec, cfg.mutation, state.rng),
              admit_all=True)
    return state


def run_baseline_ga(seeds: Sequence[ScenarioSpec], cfg: CampaignConfig,
                    planner: Optional[EgoPlanner] = None) -> CampaignState:
    """Generational GA: fitness-proportionate parents, uniform mutation, elitist survival."""
    planner = planner or EgoPlanner(cfg.planner)
    t_start = time.perf_counter()
    state = initialize(seeds, cfg, planner)
    population = [state.corpus[i % len(state.corpus)] for i in range(cfg.population)]
    generation = 0
    while not _out_of_budget(state, cfg, t_start):
        if cfg.generations is not None and generation >= cfg.generations:
            break
        picks = fitness_proportionate([e.fitness for e in population], state.rng, size=len(population))
        n_before = len(state.corpus)
        for i in picks:
            if _out_of_budget(state, cfg, t_start):
                break
            _step(state, cfg, planner, population[int(i)],
                  lambda p: uniform_mutation(p.spec, cfg.mutation, state.rng), admit_all=True)
        offspring = state.corpus[n_before:]
        pool = population + offspring
        order = sorted(range(len(pool)), key=lambda j: (pool[j].fitness, -j))
        population = [pool[j] for j in order[:cfg.population]]
        generation += 1
    return state


RUNNERS = {"causal": run_campaign, "random": run_baseline_random, "ga": run_baseline_ga}


def run(seeds: Sequence[ScenarioSpec], cfg: CampaignConfig, planner: Optional[EgoPlanner] = None) -> CampaignState:
    return RUNNERS[cfg.method](seeds, cfg, planner)


def _sig_list(sig: frozenset) -> list[list[str]]:
    return [list(e) for e in sorted(sig)]


def summarize(state: CampaignState, cfg: CampaignConfig) -> dict:
    """Run summary; contains no timings so identical runs give identical files."""
    first = state.first_failure if state.first_failure is not None else cfg.budget + 1
    return {
        "schema_version": SCHEMA_VERSION,
        "method": cfg.method,
        "archetype": cfg.archetype,
        "seed": cfg.seed,
        "budget": cfg.budget,
        "executions": state.executions,
        "errors": state.errors,
        "violations": len(state.ft),
        "sac": len(state.sac),
        "savc": len(state.savc),
        "violation_patterns": len(state.patterns),
        "corpus": len(state.corpus),
        "first_failure": first,
        "best_fitness": min(e.fitness for e in state.corpus),
        "ft": [{"id": e.id, "iteration": e.iteration, "outcome": e.outcome,
                "signature": _sig_list(e.signature)} for e in state.ft],
        "sac_ids": [e.id for e in state.sac],
        "savc_ids": [e.id for e in state.savc],
    }
