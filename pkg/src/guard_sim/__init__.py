"""Online patrol allocation against crop raiders under confounded feedback.

The defender guards ``K`` of ``N`` boundary segments each round and only sees
interceptions at guarded segments plus one aggregate crop-loss number.
"""
from .env import BoundaryWorld, BoundedRationalAttacker, MyopicAttacker, make_attacker, make_world, resolve_round
from .game import GameConfig, PayoffTable, RoundObservation, RoundRecord, reward_vector, utility
from .harness import ExperimentPlan, derive_seed, load_plan, plan_from_dict, run_game, run_plan
from .metrics import cumulative_regret, hindsight_best, interception_rate, regret_bound, summarize_run
from .oracle import best_response, sample_perturbation, top_k
from .payoffs import PayoffEstimate
from .policies import FplUE, FplUEAdaptive, Herds, PolicySpec, StaticPolicy, UniformRandomPolicy, make_policy
from .resampling import apply_reward_update, geometric_resample

__version__ = "0.1.0"

__all__ = [
    "BoundaryWorld", "BoundedRationalAttacker", "MyopicAttacker", "make_attacker", "make_world", "resolve_round",
    "GameConfig", "PayoffTable", "RoundObservation", "RoundRecord", "reward_vector", "utility",
    "ExperimentPlan", "derive_seed", "load_plan", "plan_from_dict", "run_game", "run_plan",
    "cumulative_regret", "hindsight_best", "interception_rate", "regret_bound", "summarize_run",
    "best_response", "sample_perturbation", "top_k", "PayoffEstimate",
    "FplUE", "FplUEAdaptive", "Herds", "PolicySpec", "StaticPolicy", "UniformRandomPolicy", "make_policy",
    "apply_reward_update", "geometric_resample",
]
