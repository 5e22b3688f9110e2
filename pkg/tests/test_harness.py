import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from guard_sim.game import GameConfig
from guard_sim.harness import (AGGREGATE_COLUMNS, ROUND_COLUMNS, ConfigError, ExperimentPlan, WorldSpec, aggregate,
                               derive_seed, load_plan, plan_from_dict, resolve_jobs, rounds_csv, run_game, run_plan)
from guard_sim.policies import PolicySpec


def small_plan(**kw):
    tree = {"game": {"n_targets": 12, "defender_budget": 3, "horizon": 20}, "replications": 2, "base_seed": 5,
            "policies": ["HERDS", "FPL-UE", "Static"]}
    tree.update(kw)
    return plan_from_dict(tree)


def test_same_seed_gives_identical_csv():
    plan = small_plan()
    cell = plan.cells()[0]
    for p in range(len(plan.policies)):
        assert rounds_csv(run_game(plan, cell, 0, p)) == rounds_csv(run_game(plan, cell, 0, p))
    other = replace(plan, base_seed=6)
    assert rounds_csv(run_game(plan, cell, 0, 0)) != rounds_csv(run_game(other, other.cells()[0], 0, 0))


def test_csv_schema_and_static_rows():
    plan = plan_from_dict({"game": {"horizon": 100}, "attacker": {"kind": "MAM"}, "policies": ["Static"]})
    res = run_game(plan, plan.cells()[0], 0, 0)
    rows = list(csv.DictReader(io.StringIO(rounds_csv(res))))
    assert list(rows[0]) == ROUND_COLUMNS
    assert len(rows) == 100
    assert len({r["coverage"] for r in rows}) == 1
    assert rows[0]["coverage"].count("1") == 5


def test_herds_gamma_zero_after_first_lossless_round():
    plan = plan_from_dict({"game": {"n_targets": 6, "defender_budget": 6, "attacker_budget": 2, "horizon": 10},
                           "policies": ["HERDS"]})
    res = run_game(plan, plan.cells()[0], 0, 0)
    gammas = [float(r["gamma"]) for r in csv.DictReader(io.StringIO(rounds_csv(res)))]
    assert gammas[0] == 1.0 and gammas[1:] == [0.0] * 9


def test_derived_seeds_distinct_and_pure():
    plan = replace(small_plan(), sweep={"defender_budget": [2, 3], "attacker": ["MAM", "BRSAM"]})
    seeds = {derive_seed(plan.base_seed, c, r, p) for c, r, p in plan.tasks()}
    assert len(plan.cells()) == 4
    assert len(seeds) == len(plan.tasks()) == 4 * 2 * 3
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3) != derive_seed(1, 2, 4)


def test_aggregate_examples():
    base = {"defender_budget": 5, "gr_truncation": 8, "attacker": "BRSAM", "policy": "HERDS",
            "final_regret_norm": 0.0, "mean_crop_loss_kg": 1.0, "convergence_round": 10, "interception_rate": 0.1}
    one = aggregate([{**base, "run_id": "a", "final_regret": 0.2}])
    assert one[0]["final_regret_mean"] == 0.2 and one[0]["final_regret_sd"] == 0.0
    rows = [{**base, "run_id": "a", "final_regret": 0.2}, {**base, "run_id": "b", "final_regret": 0.4}]
    two = aggregate(rows)[0]
    assert two["final_regret_mean"] == pytest.approx(0.3)
    assert two["final_regret_sd"] == pytest.approx(0.1 * math.sqrt(2))
    assert aggregate(rows[::-1]) == aggregate(rows)
    assert list(two) == AGGREGATE_COLUMNS
    with pytest.raises(ValueError):
        aggregate([])


def test_config_errors_carry_field_paths():
    with pytest.raises(ConfigError) as exc:
        plan_from_dict({"game": {"defender_budget": 99, "eta": -1}, "attacker": {"kind": "X", "bogus": 1},
                        "policies": [{"kind": "HERDS", "fixed_gamma": 0.3}], "replications": 0,
                        "sweep": {"horizon": [5]}, "colour": "red"})
    msg = str(exc.value)
    for path in ("game.defender_budget", "game.eta", "attacker.kind", "attacker.bogus", "policies[0]",
                 "replications", "sweep.horizon", "colour"):
        assert path in msg


def test_shipped_config_loads():
    plan = load_plan("configs/default.yaml")
    assert plan.game == GameConfig(rng_seed=plan.base_seed)
    assert plan.attacker.kind == "BRSAM" and plan.replications == 30
    assert [p.kind for p in plan.policies] == ["HERDS", "FPL-UE", "FPL-UE-A", "Static", "UniformRandom"]


def test_jobs_env_fallback(monkeypatch):
    monkeypatch.setenv("GUARD_SIM_JOBS", "3")
    assert resolve_jobs(None) == 3
    assert resolve_jobs(2) == 2
    monkeypatch.delenv("GUARD_SIM_JOBS")
    assert resolve_jobs(None) == 1


def test_parallel_output_matches_serial(tmp_path):
    a = replace(small_plan(), output_dir=str(tmp_path / "a"))
    b = replace(small_plan(), output_dir=str(tmp_path / "b"))
    run_plan(a, jobs=1)
    run_plan(b, jobs=3)
    for f in sorted((tmp_path / "a" / "rounds").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / "rounds" / f.name).read_bytes()
    assert (tmp_path / "a" / "aggregate.csv").read_bytes() == (tmp_path / "b" / "aggregate.csv").read_bytes()
    assert len(list((tmp_path / "a" / "rewards").iterdir())) == 6


def test_explicit_world_values():
    plan = replace(small_plan(), world=WorldSpec(target_value=tuple(np.arange(1.0, 13.0))),
                   policies=(PolicySpec("UniformRandom"),))
    res = run_game(plan, plan.cells()[0], 0, 0)
    assert res.learned["target_value_kg"] == list(np.arange(1.0, 13.0))
