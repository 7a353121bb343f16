import numpy as np
import pytest
from scipy.stats import chisquare

from scenfuzz.mutation import (MutationConfig, causal_adaptive_mutation, mutate_npc, select_npcs,
                               selection_probabilities, uniform_mutation)
from scenfuzz.scenario import V_MAX


def test_two_npc_selection_probabilities():
    assert selection_probabilities([0.04, 0.73]) == pytest.approx([0.052, 0.948], abs=1e-3)


def test_zero_ace_falls_back_to_uniform():
    assert selection_probabilities([0.0, 0.0]).tolist() == [0.5, 0.5]


def test_uniform_when_exploring_always():
    rng = np.random.default_rng(0)
    cfg = MutationConfig(epsilon=1.0)
    counts = np.zeros(3)
    for _ in range(10_000):
        for k in select_npcs([0.0, 0.9, 5.0], cfg, rng)[0]:
            counts[k] += 1
    assert chisquare(counts).pvalue > 0.01


def test_greedy_follows_ace():
    rng = np.random.default_rng(1)
    cfg = MutationConfig(epsilon=0.0)
    counts = np.zeros(2)
    for _ in range(5000):
        chosen, explore = select_npcs([0.04, 0.73], cfg, rng)
        assert not explore
        counts[chosen] += 1
    assert counts[1] / counts.sum() > 0.9


def test_at_least_one_selected():
    rng = np.random.default_rng(2)
    for _ in range(500):
        assert len(select_npcs([0.1] * 5, MutationConfig(), rng)[0]) >= 1


def test_mutants_valid_and_changed(lane_follow_spec):
    rng = np.random.default_rng(3)
    spec = lane_follow_spec
    for _ in range(30):
        m = causal_adaptive_mutation(spec, [0.2, 0.1, 0.0], MutationConfig(), rng)
        m.validate()
        assert m.to_dict() != spec.to_dict()
        for npc in m.npcs:
            assert all(0 <= w.speed <= V_MAX for w in npc.waypoints)


def test_jitter_bounds(lane_follow_spec):
    rng = np.random.default_rng(4)
    cfg = MutationConfig(waypoint_prob=1.0)
    npc = lane_follow_spec.npcs[0]
    m = lane_follow_spec.map
    for _ in range(50):
        out = mutate_npc(npc, m, cfg, rng)
        if len(out.waypoints) != len(npc.waypoints):
            continue
        for a, b in zip(npc.waypoints, out.waypoints):
            assert abs(a.x - b.x) <= cfg.longitudinal + 1e-6
            assert abs(a.y - b.y) <= cfg.lateral * 3.5 + 1e-6
            assert abs(a.speed - b.speed) <= cfg.speed + 1e-6
            assert m.on_map(b.x, b.y)


def test_mutation_deterministic(lane_follow_spec):
    a = uniform_mutation(lane_follow_spec, MutationConfig(), np.random.default_rng(9))
    b = uniform_mutation(lane_follow_spec, MutationConfig(), np.random.default_rng(9))
    assert a.to_dict() == b.to_dict()


def test_ace_length_must_match(lane_follow_spec):
    with pytest.raises(ValueError):
        causal_adaptive_mutation(lane_follow_spec, [1.0], MutationConfig(), np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(ValueError):
        MutationConfig(epsilon=1.5)
    with pytest.raises(ValueError):
        MutationConfig(speed=0)
    assert MutationConfig.from_dict(MutationConfig().to_dict()) == MutationConfig()
