"""Exact transient law of the count process for small populations.

Every object moves independently according to ``K(counts / N)``, so the
destination counts of the objects currently in state ``i`` are multinomial
and the next count vector is the sum of these independent multinomials.
The law after one step is obtained by enumerating, for every support point,
the destination compositions of each state and accumulating the products of
their multinomial probabilities.

A distribution is a dict mapping count tuples to probabilities.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
from scipy.special import gammaln

from .model import CountVector, PopulationModel
from .refined import refined_trajectory

DEFAULT_CAP = 10**6


class StateSpaceTooLarge(RuntimeError):
    pass


def support_size(N: int, n_states: int) -> int:
    """Number of count vectors of ``N`` objects over ``n_states`` states."""
    return comb(N + n_states - 1, n_states - 1)


def _check_size(N, n, cap):
    size = support_size(N, n)
    grid = (N + 1) ** (n - 1)
    if size > cap or grid > 20 * cap:
        raise StateSpaceTooLarge(f"N={N} over {n} states has {size} count vectors (cap {cap})")


@lru_cache(maxsize=None)
def compositions(total: int, parts: int) -> np.ndarray:
    """All ways to write ``total`` as an ordered sum of ``parts`` non-negative ints.

    Stars and bars: shape (C(total + parts - 1, parts - 1), parts).
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for bars in combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(parts)])
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


def multinomial_outcomes(count: int, p):
    """Destination count vectors of ``count`` objects with move probabilities ``p``.

    Only destinations with positive probability are enumerated. Returns
    ``(outcomes, probs)`` with ``outcomes`` of shape (k, n).
    """
    p = np.asarray(p, dtype=float)
    dest = np.flatnonzero(p > 0)
    comp = compositions(count, dest.size)
    logp = gammaln(count + 1) - gammaln(comp + 1).sum(axis=1) + (comp * np.log(p[dest])).sum(axis=1)
    outcomes = np.zeros((comp.shape[0], p.size), dtype=np.int64)
    outcomes[:, dest] = comp
    return outcomes, np.exp(logp)


def _from_grid(grid: np.ndarray, N: int) -> dict:
    out = {}
    for idx in zip(*np.nonzero(grid)):
        head = tuple(int(i) for i in idx)
        out[head + (N - sum(head),)] = float(grid[idx])
    return out


def _population(dist: dict) -> tuple:
    sizes = {sum(c) for c in dist}
    lengths = {len(c) for c in dist}
    if len(sizes) != 1 or len(lengths) != 1:
        raise ValueError("all support vectors must share the same population and dimension")
    return sizes.pop(), lengths.pop()


def exact_step(model: PopulationModel, dist: dict, cap: int = DEFAULT_CAP) -> dict:
    N, n = _population(dist)
    if n != model.n_states:
        raise ValueError("count vectors do not match the model dimension")
    _check_size(N, n, cap)
    strides = (N + 1) ** np.arange(n - 2, -1, -1)
    acc = np.zeros((N + 1) ** (n - 1))
    for counts in sorted(dist):
        prob = dist[counts]
        if prob == 0.0:
            continue
        K = model.kernel(np.array(counts, dtype=float) / N)
        idx, w = np.zeros(1, dtype=np.int64), np.array([prob])
        for i, c in enumerate(counts):
            if c == 0:
                continue
            outcomes, probs = multinomial_outcomes(c, K[i])
            idx = (idx[:, None] + (outcomes[:, :-1] @ strides)[None, :]).ravel()
            w = (w[:, None] * probs[None, :]).ravel()
        acc += np.bincount(idx, weights=w, minlength=acc.size)
    return _from_grid(acc.reshape((N + 1,) * (n - 1)), N)


def point_mass(counts) -> dict:
    return {tuple(CountVector(counts).counts): 1.0}


def exact_distribution(model: PopulationModel, counts0, t: int, cap: int = DEFAULT_CAP) -> dict:
    dist = point_mass(counts0)
    for _ in range(t):
        dist = exact_step(model, dist, cap)
    return dist


def expected_occupancy(dist: dict) -> np.ndarray:
    N, n = _population(dist)
    mean = np.zeros(n)
    for counts in sorted(dist):
        mean += dist[counts] * np.array(counts, dtype=float)
    return mean / N


def exact_expected_occupancy(model: PopulationModel, counts0, t: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """E[M(t)] under the exact law, starting from the count vector ``counts0``."""
    return expected_occupancy(exact_distribution(model, counts0, t, cap))


def exact_expected_series(model: PopulationModel, counts0, t_max: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """E[M(t)] for every t in 0..t_max, shape (t_max + 1, n)."""
    dist = point_mass(counts0)
    rows = [expected_occupancy(dist)]
    for _ in range(t_max):
        dist = exact_step(model, dist, cap)
        rows.append(expected_occupancy(dist))
    return np.array(rows)


def corollary_convergence_table(model: PopulationModel, occupancy0, t: int, N_list, cap: int = DEFAULT_CAP):
    """Rows ``(N, max_i |N (E[M_i(t)] - mu_i(t)) - V_t[i]|)`` for each N.

    The residual is o(1) in N when the refined expansion holds.
    """
    occupancy0 = np.asarray(occupancy0, dtype=float)
    rt = refined_trajectory(model, occupancy0, t)
    mu, V = rt.mu[t], rt.V[t]
    rows = []
    for N in N_list:
        counts = occupancy0 * N
        if not np.allclose(counts, np.round(counts), atol=1e-9):
            raise ValueError(f"N={N} times the initial occupancy is not integral")
        E = exact_expected_occupancy(model, np.round(counts).astype(int), t, cap)
        rows.append((int(N), float(np.max(np.abs(N * (E - mu) - V)))))
    return rows
