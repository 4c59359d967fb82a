"""A small network can forget.

With 120 nodes and only four initial copies, the delay-resolved replication
model loses the item in most runs. The six-state model keeps one permanent
holder and never does.
"""

import numpy as np

from gossip_rmf import build_model
from gossip_rmf.experiment import load_config
from gossip_rmf.popsim import simulate_runs

cfg = load_config("fig5")
runs = 200
full = simulate_runs(build_model(cfg.model, cfg.params), cfg.counts, cfg.t_max, runs, cfg.seed)
holders = full[:, :, 4:].sum(axis=2)
lost_at = [int(np.argmax(h == 0)) for h in holders if (h == 0).any()]
print(f"full-replication: {len(lost_at)}/{runs} runs lose the item; median loss time {np.median(lost_at):.0f}")

six = simulate_runs(build_model("six-state", cfg.params), (116, 3, 0, 0, 1, 0), cfg.t_max, runs, cfg.seed)
print(f"six-state: smallest number of holders ever seen {int((six[:, :, 1] + six[:, :, 4]).min())}")
