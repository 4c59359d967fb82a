"""Watching the 1/N expansion become exact.

For small populations the law of the count process can be computed exactly.
N (E[M(t)] - mu(t)) should approach the correction term V_t as N grows,
so the printed residual shrinks each time N doubles.
"""

from gossip_rmf import GossipParams, build_model
from gossip_rmf.exact import corollary_convergence_table

model = build_model("three-state", GossipParams(gmax=3))
for t in (5, 20):
    print(f"t = {t}")
    for N, err in corollary_convergence_table(model, [0.0, 0.1, 0.9], t, [10, 20, 40]):
        print(f"  N = {N:3d}   max |N (E - mu) - V| = {err:.3e}")
