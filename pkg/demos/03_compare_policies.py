"""
Five defenders, two raiders
===========================

Paired comparison over 20 replications: every policy faces the same world and
the same raid noise within a replication, so differences are paired.
"""
from dataclasses import replace

import numpy as np

from guard_sim.harness import AttackerSpec, aggregate, load_plan, run_plan

plan = load_plan("configs/default.yaml")
plan = replace(plan, replications=20)

for kind in ("MAM", "BRSAM"):
    rows = run_plan(replace(plan, attacker=AttackerSpec(kind=kind)), write=False)
    print(f"\n{kind}")
    print(f"{'policy':<14}{'regret':>9}{'crop kg':>10}{'caught':>8}{'conv':>7}")
    for g in aggregate(rows):
        print(f"{g['policy']:<14}{g['final_regret_mean']:>9.2f}{g['mean_crop_loss_kg_mean']:>10.1f}"
              f"{g['interception_rate_mean']:>8.3f}{g['convergence_round_mean']:>7.1f}")

# regret per round should shrink with a longer horizon against the memoryless raider
for T in (100, 400):
    p = replace(plan, game=replace(plan.game, horizon=T), attacker=AttackerSpec(kind="MAM"),
                policies=plan.policies[:1])
    regret = np.array([r["final_regret"] for r in run_plan(p, write=False)])
    print(f"HERDS vs MAM, T={T}: regret per round {regret.mean() / T:.4f}")
