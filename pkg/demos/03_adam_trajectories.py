"""Run ADAM on the unlifted and the order-3 lifted objective from tiny
random starts and follow the lifted runs through their rank-1 projection."""

import numpy as np

from liftsense import AdamConfig, Problem, project_trajectory, run_trial, success_rate

p = Problem.benchmark(3, 0.3)

for l in (1, 3):
    rate, recs = success_rate(p, l, 10)
    print(f"l = {l}: {rate:.0%} of 10 trials reach ±z^{l}")

cfg = AdamConfig(record_every=1000)
_, lifted = success_rate(p, 3, 10)
picks = {r.success: r.seed for r in lifted}  # one seed of each outcome
for outcome in (True, False):
    if outcome not in picks:
        continue
    rec = run_trial(p, 3, seed=picks[outcome], cfg=cfg)
    path = project_trajectory(rec)
    print(f"\nseed {rec.seed}, order 3 ({'reaches z' if rec.success else 'stalls'})")
    print("iteration, loss, projected point, projection residual")
    for k, loss, pt, res in zip(path.iters, path.losses, path.points, path.residuals):
        print(f"{k:6d}  {loss:9.5f}  {np.round(pt, 3)}  {res:.3f}")
    print("terminal distance to ±z^3:", round(rec.distance, 4))

# the stalled runs sit at points where the full-tensor Hessian is positive
# definite: local minima of the lifted problem that are not rank-1 powers
