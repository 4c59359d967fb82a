"""Agent-level simulation of the shuffle protocol.

Every node keeps a cache of item ids. Item ids ``0 .. n_items - 1`` are the
background items; id ``n_items`` is the fresh item whose spread is measured.
Nodes are split into ``gmax + 1`` delay groups; the group with delay 0 is
active and contacts uniformly random peers.

A shuffle between an active node A and a passive node B:

* A picks ``s_A``, B picks ``s_B``: ``s`` items each, uniformly from their caches.
* A keeps ``c_A \\ (s_A \\ s_B)``, adds the received items it did not have,
  ``s_B \\ c_A``, and refills up to its previous size with items of
  ``s_A \\ s_B`` chosen uniformly. So a node only gives up sent items to make
  room for new ones. B does the same with the roles swapped.

No item disappears from the union of the two caches and cache sizes never
change.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .kernels import GossipParams
from .popsim import SimStats, derive_seed, make_rng, stats_from_samples


def exchange(cache_a, cache_b, sel_a, sel_b, rng=None):
    """Apply one shuffle for given selections; returns the new caches as sets.

    ``rng`` (a :class:`random.Random`) picks which sent items are dropped when
    fewer slots are freed than there are candidates.
    """
    cache_a, cache_b = set(cache_a), set(cache_b)
    sel_a, sel_b = set(sel_a), set(sel_b)
    if not sel_a <= cache_a or not sel_b <= cache_b:
        raise ValueError("selections must be taken from the caches")
    rng = rng or random.Random(0)
    return (
        _keep(cache_a, sel_a, sel_b, rng),
        _keep(cache_b, sel_b, sel_a, rng),
    )


def _keep(cache, sent, received, rng):
    new = received - cache
    candidates = sorted(sent - received)
    dropped = set(rng.sample(candidates, len(new)))
    return (cache - dropped) | new


def shuffle_pair(cache_a, cache_b, s: int, rng: random.Random):
    """One shuffle with uniformly drawn selections of size ``min(s, |cache|)``."""
    cache_a, cache_b = set(cache_a), set(cache_b)
    sel_a = rng.sample(sorted(cache_a), min(s, len(cache_a)))
    sel_b = rng.sample(sorted(cache_b), min(s, len(cache_b)))
    return exchange(cache_a, cache_b, sel_a, sel_b, rng)


@dataclass
class Node:
    cache: frozenset
    seen_new: bool
    delay: int


@dataclass
class RoundReport:
    replication: int
    coverage: int
    shuffles: int
    collisions: int


class Network:
    """Mutable state of the protocol: caches, seen flags and gossip delays.

    Caches are stored as an ``(N, c)`` array of item ids together with an
    ``(N, n_items + 1)`` membership table.
    """

    def __init__(self, params: GossipParams, cache, delay, seen):
        self.params = params
        self.cache = cache
        self.delay = delay
        self.seen = seen
        self.round = 0
        self.member = np.zeros((cache.shape[0], params.n_items + 1), dtype=bool)
        np.put_along_axis(self.member, cache, True, axis=1)

    @property
    def size(self) -> int:
        return self.cache.shape[0]

    @property
    def fresh(self) -> int:
        return self.params.n_items

    def node(self, i: int) -> Node:
        return Node(frozenset(int(x) for x in self.cache[i]), bool(self.seen[i]), int(self.delay[i]))

    def replication(self) -> int:
        return int(self.member[:, self.fresh].sum())

    def coverage(self) -> int:
        return int(self.seen.sum())


def init_network(p: GossipParams, seed) -> Network:
    """Full random caches, round-robin delays, fresh item placed in one cache."""
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    N, n, c = p.n_population, p.n_items, p.c
    if N < 2:
        raise ValueError("the protocol needs at least two nodes")
    cache = np.argsort(rng.random((N, n)), axis=1)[:, :c].astype(np.int64)
    delay = np.empty(N, dtype=np.int64)
    delay[rng.permutation(N)] = np.arange(N) % (p.gmax + 1)
    holder = int(rng.integers(N))
    cache[holder, int(rng.integers(c))] = n
    seen = np.zeros(N, dtype=bool)
    seen[holder] = True
    return Network(p, cache, delay, seen)


def _pick(rng, cache_rows, s):
    """Uniformly ordered selections of ``s`` cache positions per row."""
    k, c = cache_rows.shape
    pos = np.argsort(rng.random((k, c)), axis=1)[:, :s]
    return pos, np.take_along_axis(cache_rows, pos, axis=1)


def _plan(member, rows, pos_sent, sent, received):
    """Positions to overwrite and the items written there for one side of each pair."""
    k, s = sent.shape
    new = ~member[rows[:, None], received]
    n_new = new.sum(axis=1)
    got = np.zeros((k, member.shape[1]), dtype=bool)
    got[np.arange(k)[:, None], received] = True
    candidate = ~got[np.arange(k)[:, None], sent]
    # the selection order is uniformly random, so the first n_new candidates are a uniform subset
    drop = candidate & (np.cumsum(candidate, axis=1) <= n_new[:, None])
    row_rep = np.repeat(rows, n_new)
    return row_rep, pos_sent[drop], sent[drop], received[new]


def run_round(net: Network, rng: np.random.Generator) -> RoundReport:
    """Advance the network by one synchronous round.

    Every active node contacts a uniform peer. The contact becomes a shuffle
    only if the peer is passive and no other active node contacted it;
    otherwise it is a collision and nobody involved exchanges anything.
    Afterwards all delays count down and active nodes restart at ``gmax``.
    """
    p = net.params
    N = net.size
    active = np.flatnonzero(net.delay == 0)
    k = active.size
    shuffles = collisions = 0
    if k:
        target = rng.integers(0, N - 1, size=k)
        target += target >= active
        hits = np.bincount(target, minlength=N)
        ok = (net.delay[target] > 0) & (hits[target] == 1)
        a, b = active[ok], target[ok]
        shuffles = int(ok.sum())
        collisions = k - shuffles
        if shuffles:
            s = min(p.s, net.cache.shape[1])
            pos_a, sel_a = _pick(rng, net.cache[a], s)
            pos_b, sel_b = _pick(rng, net.cache[b], s)
            plan_a = _plan(net.member, a, pos_a, sel_a, sel_b)
            plan_b = _plan(net.member, b, pos_b, sel_b, sel_a)
            for rows, pos, dropped, added in (plan_a, plan_b):
                net.member[rows, dropped] = False
                net.member[rows, added] = True
                net.cache[rows, pos] = added
            net.seen |= net.member[:, net.fresh]
    net.delay = np.where(net.delay == 0, p.gmax, net.delay - 1)
    net.round += 1
    return RoundReport(net.replication(), net.coverage(), shuffles, collisions)


def simulate_run(p: GossipParams, t_max: int, seed: int):
    """Replication and coverage counts for rounds 0..t_max of a single run."""
    rng = make_rng(seed)
    net = init_network(p, rng)
    rep = np.empty(t_max + 1, dtype=np.int64)
    cov = np.empty(t_max + 1, dtype=np.int64)
    rep[0], cov[0] = net.replication(), net.coverage()
    for t in range(1, t_max + 1):
        r = run_round(net, rng)
        rep[t], cov[t] = r.replication, r.coverage
    return rep, cov


def simulate_agent_runs(p: GossipParams, t_max: int, runs: int, base_seed: int):
    """Count series of every run, two arrays of shape (runs, t_max + 1)."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    out = [simulate_run(p, t_max, derive_seed(base_seed, r)) for r in range(runs)]
    return np.stack([o[0] for o in out]), np.stack([o[1] for o in out])


def run_experiment(p: GossipParams, t_max: int, runs: int, base_seed: int):
    """Per-round mean/std of replication and coverage as fractions of N."""
    rep, cov = simulate_agent_runs(p, t_max, runs, base_seed)
    N = p.n_population
    return stats_from_samples(rep / N, base_seed), stats_from_samples(cov / N, base_seed)


__all__ = [
    "Network",
    "Node",
    "RoundReport",
    "SimStats",
    "exchange",
    "init_network",
    "run_experiment",
    "run_round",
    "shuffle_pair",
    "simulate_agent_runs",
    "simulate_run",
]
