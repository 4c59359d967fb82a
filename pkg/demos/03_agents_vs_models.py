"""The shuffle protocol itself next to its population models.

A network of 2500 nodes (gmax = 9) runs the actual cache exchanges. Coverage
is compared with the classic and refined three-state model.

Starting from a single copy, the occupancy of the holder state is of order
1/N while the epidemic grows geometrically, so the 1/N correction is large
during take-off. The refined curve even leaves [0, 1] for a while before
settling near the simulation. The expansion is only trustworthy once every
state carries a macroscopic share of the population.
"""

import numpy as np

from gossip_rmf import build_model, coverage_measure, measure_series, refined_trajectory
from gossip_rmf.agentsim import simulate_agent_runs
from gossip_rmf.experiment import load_config
from gossip_rmf.meanfield import first_crossing

cfg = load_config("fig1")
runs = 10
model = build_model(cfg.model, cfg.params)
h = coverage_measure(cfg.model)
rt = refined_trajectory(model, np.array(cfg.counts) / cfg.N, cfg.t_max, cfg.N)
_, cov = simulate_agent_runs(cfg.params, cfg.t_max, runs, cfg.seed)
agents = cov.mean(axis=0) / cfg.N

curves = {"classic": measure_series(rt.mu, h), "refined": rt.measure(h), f"agents ({runs} runs)": agents}
print("    t  " + "  ".join(f"{k:>16}" for k in curves))
for t in range(0, cfg.t_max + 1, 100):
    print(f"{t:5d}  " + "  ".join(f"{v[t]:16.4f}" for v in curves.values()))
for name, series in curves.items():
    print(f"{name}: coverage reaches 0.99 at t = {first_crossing(series, 0.99)}")
