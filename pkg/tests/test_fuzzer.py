import json

import numpy as np
import pytest

from scenfuzz.archetypes import generate
from scenfuzz.config import CampaignConfig, ConfigError, load_config
from scenfuzz.fuzzer import (CampaignState, CorpusEntry, EmptyCorpusError, fitness_proportionate, fitness_weights,
                             initialize, run, run_baseline_ga, run_baseline_random, run_campaign, select_seed,
                             summarize)
from scenfuzz.planner import EgoPlanner
from scenfuzz.scenario import NpcSpec, Waypoint


def entry(i, fit):
    return CorpusEntry(i, None, None, fit, None, None, None, "passed", None, 0)


def test_select_seed_examples():
    st = CampaignState(corpus=[entry(0, 14.5), entry(1, 2.0), entry(2, 9.0)])
    assert select_seed(st).id == 1
    st = CampaignState(corpus=[entry(0, 2.0), entry(1, 2.0)])
    assert select_seed(st).id == 1
    assert select_seed(CampaignState(corpus=[entry(5, 3.0)])).id == 5
    with pytest.raises(EmptyCorpusError):
        select_seed(CampaignState())


def test_fitness_proportionate_prefers_low_degree():
    rng = np.random.default_rng(0)
    picks = fitness_proportionate([9.0, 0.5, 4.0], rng, size=10_000)
    counts = np.bincount(picks, minlength=3)
    assert counts.argmax() == 1
    expected = fitness_weights([9.0, 0.5, 4.0]) * 10_000
    assert np.all(np.abs(counts - expected) < 5 * np.sqrt(expected))


def test_fitness_proportionate_clones_uniform():
    assert np.allclose(fitness_weights([3.0] * 4), 0.25)


@pytest.fixture(scope="module")
def seeds():
    return generate("lane-follow", 0, 2)


def small(method, budget=12, **kw):
    return CampaignConfig(method=method, budget=budget, seed=0, n_seeds=2, **kw)


def test_budget_zero_is_initial_state(seeds):
    cfg = small("causal", budget=0)
    st = run_campaign(seeds, cfg)
    assert len(st.corpus) == 2 and st.log == [] and st.executions == 0
    assert [e.id for e in st.ft] == [e.id for e in st.corpus if e.result == "violated"]


def test_violating_seed_lands_in_ft(seeds):
    spec = seeds[0]
    # an NPC parked on the ego's lane just ahead of it: guaranteed rear-end
    blocker = NpcSpec((Waypoint(30.0, -1.75, 0.0), Waypoint(31.5, -1.75, 0.0)))
    bad = spec.with_npcs([blocker] + list(spec.npcs))
    st = initialize([bad], small("causal"), EgoPlanner())
    # the planner stops behind a parked car, so the run fails on the destination
    assert st.corpus[0].result == "violated" and st.ft == [st.corpus[0]]


@pytest.mark.parametrize("method", ["causal", "random", "ga"])
def test_campaign_invariants(seeds, method):
    cfg = small(method)
    st = run(seeds, cfg)
    assert len(st.log) == cfg.budget == st.executions
    for col in ("ft", "sac", "savc", "patterns", "corpus"):
        vals = [r[col] for r in st.log]
        assert vals == sorted(vals), col
    for e in st.ft:
        assert e.result == "violated"
    corpus_ids = {e.id for e in st.corpus}
    assert {e.id for e in st.ft} <= corpus_ids
    for r in st.log:
        if r["admitted"] == "sac":
            assert r["ts"] >= cfg.theta_ts
        if r["admitted"] == "savc":
            assert r["vd"] > cfg.theta_vd
    if method != "causal":
        assert len(st.corpus) == len(seeds) + cfg.budget - st.errors


def test_sac_members_pairwise_far(seeds):
    from scenfuzz.feedback import graph_distance
    st = run_campaign(seeds, small("random", budget=20))
    for i, a in enumerate(st.sac):
        for b in st.sac[:i]:
            assert graph_distance(a.b_sa, b.b_sa) >= 0.3


@pytest.mark.parametrize("method", ["causal", "random", "ga"])
def test_determinism(seeds, method):
    cfg = small(method, budget=8)
    a = summarize(run(seeds, cfg), cfg)
    b = summarize(run(seeds, cfg), cfg)
    assert json.dumps(a) == json.dumps(b)


def test_ga_generations_limit(seeds):
    st = run_baseline_ga(seeds, small("ga", budget=50, population=3, generations=2))
    assert st.executions == 6


def test_summary_first_failure_default(seeds):
    cfg = small("random", budget=0)
    s = summarize(run_baseline_random(seeds, cfg), cfg)
    assert s["first_failure"] in (0, cfg.budget + 1)


def test_config_roundtrip_and_errors(tmp_path):
    cfg = CampaignConfig(method="ga", budget=7)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert load_config(p) == cfg
    with pytest.raises(ConfigError):
        CampaignConfig(method="annealing").validate()
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"theta_ts": 2})
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"planner": {"desired_speed": -1}})
