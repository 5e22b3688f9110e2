"""
One game, round by round
========================

HERDS guards 5 of 57 boundary segments for 100 rounds against a raider that
remembers where it met guards. We watch the exploration rate react to crop
loss and the regret curve bend.
"""
import numpy as np

from guard_sim.harness import plan_from_dict, run_game

plan = plan_from_dict({"policies": ["HERDS"], "base_seed": 1})
res = run_game(plan, plan.cells()[0], replication=0, policy_index=0)

# gamma starts at 1 (all guards placed at random), then tracks last round's loss
gammas = np.array([tm["gamma"] for tm in res.telemetry])
print("gamma, first 10 rounds:", np.round(gammas[:10], 2))
print("mean gamma:", gammas.mean().round(3))

# raw regret against the best fixed 5 segments in hindsight, every 10 rounds
raw = np.array([pr[2] for pr in res.summary.per_round])
print("regret every 10 rounds:", np.round(raw[9::10], 1))

s = res.summary
print(f"final regret {s.final_regret:.2f} (bound {s.regret_bound:.0f})")
print(f"mean crop loss {s.mean_crop_loss_kg:.1f} kg, interception rate {s.interception_rate:.3f}")
print("hindsight segments:", np.flatnonzero(s.hindsight_coverage))

# which segments did the learner end up rating highest?
r_hat = np.array(res.learned["r_hat"])
print("top learned segments:", np.argsort(-r_hat)[:5])
