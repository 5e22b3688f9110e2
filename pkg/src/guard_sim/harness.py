"""Experiment plans, seeded execution and result files.

A plan is a base game plus optional sweep axes (defender budget, GR
truncation, attacker kind). Each grid cell is replicated and every listed
policy plays every replication. Seeds are derived by hashing, never drawn
from shared state, so any run can be reproduced in isolation.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .env import (DEFAULT_MEMORY_DECAY, DEFAULT_MEMORY_GAIN, DEFAULT_RAID_NOISE, DEFAULT_VALUE_FLOOR,
                  DEFAULT_VALUE_SCALE_KG)
from .env import make_attacker, make_world, resolve_round
from .game import GameConfig, bitstring
from .metrics import RunSummary, summarize_run
from .policies import PolicySpec, build_static_coverage, make_policy

log = logging.getLogger(__name__)

ROUND_COLUMNS = [
    "run_id", "seed", "world_seed", "policy", "t", "gamma", "k_expl", "coverage",
    "crop_loss_kg", "interceptions", "raw_regret", "norm_regret",
]
AGGREGATE_COLUMNS = [
    "defender_budget", "gr_truncation", "attacker", "policy", "n_runs",
    "final_regret_mean", "final_regret_sd", "final_regret_norm_mean", "final_regret_norm_sd",
    "mean_crop_loss_kg_mean", "mean_crop_loss_kg_sd", "interception_rate_mean",
    "convergence_round_mean", "convergence_round_sd",
]
REWARD_COLUMNS = ["target", "target_value_kg", "covered_est", "uncovered_est", "r_hat", "r_hat_normalized"]

DEFAULT_SWEEP = {
    "defender_budget": [3, 4, 5, 6, 7, 8],
    "gr_truncation": [3, 8, 15],
    "attacker": ["MAM", "BRSAM"],
}
SWEEP_AXES = tuple(DEFAULT_SWEEP)
JOBS_ENV = "GUARD_SIM_JOBS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WorldSpec:
    value_scale_kg: float = DEFAULT_VALUE_SCALE_KG
    raid_noise: float = DEFAULT_RAID_NOISE
    n_clusters: int = 4
    value_floor: float = DEFAULT_VALUE_FLOOR
    target_value: tuple | None = None


@dataclass(frozen=True)
class AttackerSpec:
    kind: str = "BRSAM"
    memory_gain: float = DEFAULT_MEMORY_GAIN
    memory_decay: float = DEFAULT_MEMORY_DECAY

    def build(self, attack_budget: int, n_targets: int):
        if self.kind == "BRSAM":
            return make_attacker("BRSAM", attack_budget, n_targets,
                                 memory_gain=self.memory_gain, memory_decay=self.memory_decay)
        return make_attacker(self.kind, attack_budget, n_targets)


@dataclass(frozen=True)
class ExperimentPlan:
    game: GameConfig = field(default_factory=GameConfig)
    world: WorldSpec = field(default_factory=WorldSpec)
    attacker: AttackerSpec = field(default_factory=AttackerSpec)
    policies: tuple = (PolicySpec("HERDS"), PolicySpec("FPL-UE"), PolicySpec("FPL-UE-A"), PolicySpec("Static"))
    replications: int = 1
    base_seed: int = 0
    sweep: dict = field(default_factory=dict)
    static_warmup_rounds: int = 50
    penalty_distribution: str = "uniform-full"
    smoothing: float | None = None
    output_dir: str = "runs"

    def cells(self) -> list["Cell"]:
        axes = [(name, self.sweep[name]) for name in SWEEP_AXES if self.sweep.get(name)]
        out = []
        for i, combo in enumerate(itertools.product(*(vals for _, vals in axes))):
            over = dict(zip((name for name, _ in axes), combo))
            kind = over.pop("attacker", self.attacker.kind)
            game = replace(self.game, **over)
            out.append(Cell(i, game, replace(self.attacker, kind=kind)))
        return out

    def tasks(self) -> list[tuple[int, int, int]]:
        return [(c, r, p) for c in range(len(self.cells()))
                for r in range(self.replications) for p in range(len(self.policies))]


@dataclass(frozen=True)
class Cell:
    index: int
    game: GameConfig
    attacker: AttackerSpec


@dataclass
class RunResult:
    run_id: str
    seed: int
    world_seed: int
    policy: str
    cell: Cell
    replication: int
    records: list
    telemetry: list
    summary: RunSummary
    learned: dict


def derive_seed(*parts) -> int:
    """Stable unsigned 64-bit seed from any sequence of ints/strings."""
    key = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


# ---------------------------------------------------------------- config


def _fields_of(cls) -> set:
    return set(cls.__dataclass_fields__)


def _take(tree: dict, cls, path: str, errors: list, exclude=()) -> dict:
    if tree is None:
        return {}
    if not isinstance(tree, dict):
        errors.append(f"{path}: expected a mapping")
        return {}
    unknown = set(tree) - (_fields_of(cls) - set(exclude))
    for key in sorted(unknown):
        errors.append(f"{path}.{key}: unknown field")
    return {k: v for k, v in tree.items() if k not in unknown}


def plan_from_dict(tree: dict) -> ExperimentPlan:
    """Validate a config tree and build a plan. All problems are reported at once."""
    errors: list[str] = []
    if not isinstance(tree, dict):
        raise ConfigError("config: top level must be a mapping")
    known = _fields_of(ExperimentPlan)
    for key in sorted(set(tree) - known):
        errors.append(f"{key}: unknown field")

    game_kw = _take(tree.get("game"), GameConfig, "game", errors)
    if "base_seed" in tree:
        game_kw.setdefault("rng_seed", tree["base_seed"])
    game = None
    try:
        game = GameConfig(**game_kw)
    except (TypeError, ValueError) as exc:
        errors.extend(f"game.{msg}" for msg in str(exc).split("; "))

    world = WorldSpec(**_take(tree.get("world"), WorldSpec, "world", errors))
    if world.target_value is not None:
        world = replace(world, target_value=tuple(float(x) for x in world.target_value))
    if not 0 <= world.raid_noise <= 1:
        errors.append("world.raid_noise: must be in [0, 1]")
    if not 0 < world.value_floor <= 1:
        errors.append("world.value_floor: must be in (0, 1]")
    if world.value_scale_kg <= 0:
        errors.append("world.value_scale_kg: must be positive")

    attacker = AttackerSpec(**_take(tree.get("attacker"), AttackerSpec, "attacker", errors))
    if attacker.kind not in ("MAM", "BRSAM"):
        errors.append(f"attacker.kind: must be MAM or BRSAM, got {attacker.kind!r}")
    if not 0 < attacker.memory_gain <= 1:
        errors.append("attacker.memory_gain: must be in (0, 1]")
    if not 0 <= attacker.memory_decay < 1:
        errors.append("attacker.memory_decay: must be in [0, 1)")

    policies = []
    raw_policies = tree.get("policies", [{"kind": p.kind} for p in ExperimentPlan.policies])
    for i, item in enumerate(raw_policies or []):
        if isinstance(item, str):
            item = {"kind": item}
        kw = _take(item, PolicySpec, f"policies[{i}]", errors)
        if "static_coverage" in kw and kw["static_coverage"] is not None:
            kw["static_coverage"] = tuple(int(x) for x in kw["static_coverage"])
        try:
            policies.append(PolicySpec(**kw))
        except (TypeError, ValueError) as exc:
            errors.append(f"policies[{i}]: {exc}")
    if not policies:
        errors.append("policies: at least one policy is required")

    sweep = tree.get("sweep") or {}
    if not isinstance(sweep, dict):
        errors.append("sweep: expected a mapping")
        sweep = {}
    for key in sorted(set(sweep) - set(SWEEP_AXES)):
        errors.append(f"sweep.{key}: unknown axis; expected one of {SWEEP_AXES}")
    sweep = {k: list(v) for k, v in sweep.items() if k in SWEEP_AXES and v}
    for kind in sweep.get("attacker", []):
        if kind not in ("MAM", "BRSAM"):
            errors.append(f"sweep.attacker: unknown attacker {kind!r}")
    if game is not None:
        for k in sweep.get("defender_budget", []):
            if not 1 <= k <= game.n_targets:
                errors.append(f"sweep.defender_budget: {k} outside [1, {game.n_targets}]")
        for m in sweep.get("gr_truncation", []):
            if m < 1:
                errors.append(f"sweep.gr_truncation: {m} must be >= 1")

    reps = tree.get("replications", 1)
    if not isinstance(reps, int) or reps < 1:
        errors.append(f"replications: must be a positive integer, got {reps!r}")
    base_seed = tree.get("base_seed", 0)
    if not isinstance(base_seed, int) or not 0 <= base_seed < 2**64:
        errors.append("base_seed: must be an unsigned 64-bit integer")
    warm = tree.get("static_warmup_rounds", 50)
    if not isinstance(warm, int) or warm < 1:
        errors.append("static_warmup_rounds: must be a positive integer")
    pen = tree.get("penalty_distribution", "uniform-full")
    if pen not in ("uniform-full", "per-share"):
        errors.append("penalty_distribution: must be uniform-full or per-share")
    smoothing = tree.get("smoothing")
    if smoothing is not None and not 0 < smoothing <= 1:
        errors.append("smoothing: must be in (0, 1] or null")

    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    return ExperimentPlan(
        game=game, world=world, attacker=attacker, policies=tuple(policies),
        replications=reps, base_seed=base_seed, sweep=sweep, static_warmup_rounds=warm,
        penalty_distribution=pen, smoothing=smoothing,
        output_dir=str(tree.get("output_dir", "runs")),
    )


def load_plan(path) -> ExperimentPlan:
    with open(path) as fh:
        tree = yaml.safe_load(fh) or {}
    return plan_from_dict(tree)


# ---------------------------------------------------------------- running


def play_game(cfg: GameConfig, world, attacker, policy, env_rng: np.random.Generator):
    """Run the round loop. Returns ``(records, telemetry)``.

    The policy only ever receives the :class:`RoundObservation`.
    """
    records, telemetry = [], []
    for t in range(cfg.horizon):
        v = policy.decide()
        telemetry.append(policy.telemetry())
        a = attacker.attack(world, env_rng)
        record, obs = resolve_round(world, v, a, env_rng, t=t + 1)
        attacker.learn(v, a)
        policy.observe(obs)
        records.append(record)
    return records, telemetry


def build_world(plan: ExperimentPlan, cfg: GameConfig, seed: int):
    w = plan.world
    return make_world(cfg.n_targets, seed, w.value_scale_kg, w.raid_noise, w.n_clusters, w.target_value,
                      w.value_floor)


def run_game(plan: ExperimentPlan, cell: Cell, replication: int, policy_index: int) -> RunResult:
    cfg = cell.game
    spec = plan.policies[policy_index]
    world_seed = derive_seed(plan.base_seed, "world", replication)
    seed = derive_seed(plan.base_seed, cell.index, replication, policy_index)
    # Attacker and raid noise share a stream across policies in the same replication.
    env_seed = derive_seed(plan.base_seed, "env", cell.index, replication)
    world = build_world(plan, cfg, world_seed)
    pol_rng, gr_rng, warm_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))

    static_cov = None
    if spec.kind == "Static" and spec.static_coverage is None:
        fresh = cell.attacker.build(cfg.attacker_budget, cfg.n_targets)
        static_cov = build_static_coverage(world, fresh, plan.static_warmup_rounds, cfg.defender_budget, warm_rng)
    elif spec.static_coverage is not None:
        static_cov = np.zeros(cfg.n_targets, dtype=bool)
        static_cov[list(spec.static_coverage)] = True
    policy = make_policy(spec, cfg, pol_rng, gr_rng, static_coverage=static_cov,
                         penalty_distribution=plan.penalty_distribution, smoothing=plan.smoothing)
    attacker = cell.attacker.build(cfg.attacker_budget, cfg.n_targets)

    records, telemetry = play_game(cfg, world, attacker, policy, np.random.default_rng(env_seed))
    summary = summarize_run(records, [tm["gamma"] for tm in telemetry], cfg)
    run_id = f"c{cell.index:03d}-r{replication:03d}-{spec.label}"
    return RunResult(run_id, seed, world_seed, spec.label, cell, replication,
                     records, telemetry, summary, _learned(policy, world))


def _learned(policy, world) -> dict:
    n = world.n_targets
    r_hat = getattr(policy, "r_hat", np.zeros(n))
    payoffs = getattr(policy, "payoffs", None)
    top = r_hat.max() if r_hat.max() > 0 else 1.0
    return {
        "nonzero_uncovered_rewards": int(getattr(policy, "uncovered_reward_count", 0)),
        "target_value_kg": world.target_value.tolist(),
        "covered_est": (payoffs.covered_est if payoffs else np.zeros(n)).tolist(),
        "uncovered_est": (payoffs.uncovered_est if payoffs else np.zeros(n)).tolist(),
        "r_hat": np.asarray(r_hat, dtype=float).tolist(),
        "r_hat_normalized": (np.asarray(r_hat, dtype=float) / top).tolist(),
    }


def _run_task(args):
    plan, task = args
    c, r, p = task
    result = run_game(plan, plan.cells()[c], r, p)
    write_run(result, Path(plan.output_dir))
    return run_row(result)


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get(JOBS_ENV, "1"))
    return max(1, jobs)


def run_plan(plan: ExperimentPlan, jobs: int | None = None, write: bool = True) -> list[dict]:
    """Execute every (cell, replication, policy) task and return one summary row per run.

    With ``write`` the per-run files go under ``plan.output_dir`` and the
    aggregate CSV is written after all runs finish.
    """
    jobs = resolve_jobs(jobs)
    tasks = plan.tasks()
    if write:
        Path(plan.output_dir).mkdir(parents=True, exist_ok=True)
    if write:
        if jobs == 1:
            rows = [_run_task((plan, t)) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_run_task, [(plan, t) for t in tasks], chunksize=4))
    else:
        cells = plan.cells()
        rows = [run_row(run_game(plan, cells[c], r, p)) for c, r, p in tasks]
    rows.sort(key=lambda row: row["run_id"])
    if write:
        write_aggregate(aggregate(rows), Path(plan.output_dir) / "aggregate.csv")
    return rows


def run_row(result: RunResult) -> dict:
    s = result.summary
    row = {
        "run_id": result.run_id,
        "seed": result.seed,
        "world_seed": result.world_seed,
        "policy": result.policy,
        "replication": result.replication,
        "cell": result.cell.index,
        "defender_budget": result.cell.game.defender_budget,
        "gr_truncation": result.cell.game.gr_truncation,
        "attacker": result.cell.attacker.kind,
        "horizon": result.cell.game.horizon,
    }
    row.update(s.as_dict())
    row["nonzero_uncovered_rewards"] = result.learned["nonzero_uncovered_rewards"]
    return row


# ---------------------------------------------------------------- output


def round_rows(result: RunResult) -> list[list]:
    rows = []
    for rec, tm, pr in zip(result.records, result.telemetry, result.summary.per_round):
        t, _, raw, norm, loss, icp, gamma = pr
        rows.append([result.run_id, result.seed, result.world_seed, result.policy, t,
                     repr(float(tm["gamma"])), tm["k_expl"], bitstring(rec.defender),
                     repr(loss), icp, repr(raw), repr(norm)])
    return rows


def rounds_csv(result: RunResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROUND_COLUMNS)
    w.writerows(round_rows(result))
    return buf.getvalue()


def write_run(result: RunResult, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    (out_dir / "rounds").mkdir(parents=True, exist_ok=True)
    (out_dir / "summaries").mkdir(parents=True, exist_ok=True)
    (out_dir / "rewards").mkdir(parents=True, exist_ok=True)
    (out_dir / "rounds" / f"{result.run_id}.csv").write_text(rounds_csv(result))
    doc = run_row(result)
    doc["game"] = asdict(result.cell.game)
    doc["attacker_params"] = asdict(result.cell.attacker)
    doc["telemetry"] = [{"t": i + 1, **tm} for i, tm in enumerate(result.telemetry)]
    (out_dir / "summaries" / f"{result.run_id}.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REWARD_COLUMNS)
    L = result.learned
    for i in range(len(L["r_hat"])):
        w.writerow([i, repr(L["target_value_kg"][i]), repr(L["covered_est"][i]), repr(L["uncovered_est"][i]),
                    repr(L["r_hat"][i]), repr(L["r_hat_normalized"][i])])
    (out_dir / "rewards" / f"{result.run_id}.csv").write_text(buf.getvalue())


def _mean_sd(values) -> tuple[float, float]:
    x = np.array([v for v in values if v is not None], dtype=float)
    if x.size == 0:
        return float("nan"), float("nan")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return float(np.mean(x)), sd


def aggregate(rows) -> list[dict]:
    """Mean and sample SD of the per-run metrics, grouped by (K, M, attacker, policy)."""
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to aggregate")
    groups: dict[tuple, list] = {}
    for row in rows:
        key = (int(row["defender_budget"]), int(row["gr_truncation"]), row["attacker"], row["policy"])
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups):
        items = sorted(groups[key], key=lambda r: r["run_id"])
        agg = dict(zip(AGGREGATE_COLUMNS[:4], key))
        agg["n_runs"] = len(items)
        for name in ("final_regret", "final_regret_norm", "mean_crop_loss_kg", "convergence_round"):
            agg[f"{name}_mean"], agg[f"{name}_sd"] = _mean_sd(float(r[name]) for r in items)
        agg["interception_rate_mean"] = _mean_sd(r["interception_rate"] for r in items)[0]
        out.append({k: agg[k] for k in AGGREGATE_COLUMNS})
    return out


def write_aggregate(table: list[dict], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in table:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def load_run_rows(out_dir) -> list[dict]:
    """Read back every per-run JSON summary under ``out_dir/summaries``."""
    paths = sorted(Path(out_dir, "summaries").glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no run summaries under {out_dir}/summaries")
    return [json.loads(p.read_text()) for p in paths]
