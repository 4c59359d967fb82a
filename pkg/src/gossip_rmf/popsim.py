"""Monte Carlo simulation of the count process.

Each of the N objects moves independently according to ``K(counts / N)``.
Destination counts per state are drawn by sequential binomial splitting.

Run ``r`` of an experiment seeded with ``base`` uses a PCG64 stream seeded
with :func:`derive_seed` ``(base, r)``, so any single run can be replayed
on its own and results do not depend on how runs are scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import CountVector, Measure, PopulationModel

SEED_MULTIPLIER = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, run: int) -> int:
    """Child seed of run ``run``: ``base XOR (0x9E3779B97F4A7C15 * (run + 1))`` mod 2**64."""
    return (int(base_seed) ^ (SEED_MULTIPLIER * (run + 1))) & _MASK64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def worker_count() -> int:
    """Run-level parallelism cap from ``RMF_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("RMF_THREADS", "1")))
    except ValueError:
        return 1


def sample_row(rng: np.random.Generator, count: int, probs) -> np.ndarray:
    """Multinomial(count, probs) by sequential binomial draws."""
    n = len(probs)
    out = np.zeros(n, dtype=np.int64)
    remaining = int(count)
    mass = 1.0
    for j in range(n - 1):
        if remaining == 0:
            break
        pj = probs[j]
        if pj <= 0.0:
            mass -= pj
            continue
        q = 1.0 if mass <= pj else pj / mass
        x = int(rng.binomial(remaining, q)) if q < 1.0 else remaining
        out[j] = x
        remaining -= x
        mass -= pj
    out[n - 1] += remaining
    return out


def _counts0(model, counts0):
    c = CountVector(counts0).counts
    if len(c) != model.n_states:
        raise ValueError(f"expected {model.n_states} counts, got {len(c)}")
    return np.array(c, dtype=np.int64)


def simulate_counts(model: PopulationModel, counts0, t_max: int, rng_seed: int) -> np.ndarray:
    """One trajectory of counts, shape (t_max + 1, n_states); every row sums to N."""
    counts = _counts0(model, counts0)
    N = int(counts.sum())
    rng = make_rng(rng_seed)
    out = np.empty((t_max + 1, counts.size), dtype=np.int64)
    out[0] = counts
    for t in range(t_max):
        K = model.kernel(counts / N)
        new = np.zeros_like(counts)
        for i in np.flatnonzero(counts):
            new += sample_row(rng, counts[i], K[i])
        counts = new
        out[t + 1] = counts
    return out


def simulate_runs(model: PopulationModel, counts0, t_max: int, runs: int, base_seed: int) -> np.ndarray:
    """Count trajectories of ``runs`` independent runs, shape (runs, t_max + 1, n_states)."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    counts0 = _counts0(model, counts0)

    def one(r):
        return simulate_counts(model, counts0, t_max, derive_seed(base_seed, r))

    workers = min(worker_count(), runs)
    if workers == 1:
        results = [one(r) for r in range(runs)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(runs)))
    return np.stack(results)


@dataclass(frozen=True)
class SimStats:
    mean: np.ndarray
    std: np.ndarray  # population standard deviation over runs (0 for a single run)
    runs: int
    seed: int

    @property
    def stderr(self) -> np.ndarray:
        """Standard error of the mean, using the unbiased variance."""
        if self.runs < 2:
            return np.zeros_like(self.std)
        return self.std / np.sqrt(self.runs - 1)


def stats_from_samples(samples, seed: int) -> SimStats:
    """Mean and standard deviation over axis 0, accumulated in run order."""
    samples = np.asarray(samples, dtype=float)
    runs = samples.shape[0]
    total = np.zeros(samples.shape[1:])
    for r in range(runs):
        total += samples[r]
    mean = total / runs
    sq = np.zeros_like(total)
    for r in range(runs):
        sq += (samples[r] - mean) ** 2
    return SimStats(mean, np.sqrt(sq / runs), runs, seed)


def simulate_measure(model: PopulationModel, counts0, t_max: int, runs: int, base_seed: int, h: Measure) -> SimStats:
    traj = simulate_runs(model, counts0, t_max, runs, base_seed)
    N = traj[0, 0].sum()
    occ = traj / N
    values = np.array([[h(m) for m in run] for run in occ]) if not h.is_linear else occ @ h.weights
    return stats_from_samples(values, base_seed)
