"""Causality-guided fuzzing of driving policies in a small 2D traffic simulator."""
from .abstraction import AbstractionConfig, ScenarioMatrix, abstract_scenario
from .archetypes import ARCHETYPES, generate
from .causal import CausalGraph, DiscoveryConfig, ace_per_npc, discover, subgraph_sa, violation_signature
from .config import CampaignConfig, load_config
from .feedback import graph_distance, min_distance_to_set, oracle, violation_degree
from .fuzzer import run, run_baseline_ga, run_baseline_random, run_campaign, select_seed
from .mutation import MutationConfig, causal_adaptive_mutation
from .planner import EgoPlanner, PlannerConfig
from .scenario import ScenarioSpec
from .sim import Trace, simulate

__version__ = "0.1.0"
