"""Fast property checks behind ``gossip-rmf verify`` and timings behind ``bench``."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass

import numpy as np

from .agentsim import exchange
from .autodiff import fd_check
from .exact import exact_expected_occupancy
from .kernels import GossipParams, ModelKind, build_model, pair_probs
from .meanfield import classic_trajectory
from .model import constant_model
from .refined import refined_trajectory, structure_errors


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def random_simplex(rng, n, size):
    return rng.dirichlet(np.ones(n), size=size)


def kernel_rows(points=50, seed=1, gmax=3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, neg = 0.0, 0.0
    for kind in ModelKind:
        model = build_model(kind, GossipParams(gmax=gmax))
        for m in random_simplex(rng, model.n_states, points):
            K = model.kernel(m)
            worst = max(worst, float(np.max(np.abs(K.sum(axis=1) - 1.0))))
            neg = min(neg, float(K.min()))
    return CheckResult("kernel rows", worst <= 1e-12 and neg >= 0.0, f"max |row sum - 1| = {worst:.2e}, min entry = {neg:.2e}")


def pair_prob_rows(samples=200, seed=2) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(samples):
        n = rng.randint(3, 2000)
        c = rng.randint(2, n - 1)
        s = rng.randint(1, c - 1)
        pp = pair_probs(GossipParams(n_items=n, c=c, s=s))
        for total in (
            pp.p_od_od + pp.p_dd_od + pp.p_do_od,
            pp.p_do_do + pp.p_dd_do + pp.p_od_do,
            pp.p_dd_dd + pp.p_od_dd + pp.p_do_dd,
        ):
            worst = max(worst, abs(total - 1.0))
    return CheckResult("pair probabilities", worst <= 1e-12, f"max |row sum - 1| = {worst:.2e}")


def derivative_agreement(points=3, seed=3) -> CheckResult:
    rng = np.random.default_rng(seed)
    e1 = e2 = 0.0
    for kind in ModelKind:
        model = build_model(kind, GossipParams())
        for m in random_simplex(rng, model.n_states, points):
            e1 = max(e1, fd_check(model.phi, m, h=1e-5, order=1))
            e2 = max(e2, fd_check(model.phi, m, h=1e-4, order=2))
    return CheckResult("derivatives vs finite differences", e1 <= 1e-6 and e2 <= 1e-4, f"first {e1:.1e}, second {e2:.1e}")


def refined_structure(t_max=200) -> CheckResult:
    model = build_model(ModelKind.SIX_STATE, GossipParams(n_population=100))
    err = structure_errors(refined_trajectory(model, [0, 0, 0.99, 0, 0.01, 0], t_max, 100))
    ok = max(err["sum_V"], err["asym_W"], err["rowsum_W"]) <= 1e-9 and err["min_eig_W"] >= -1e-9
    return CheckResult("refined structure", ok, ", ".join(f"{k} {v:.1e}" for k, v in err.items()))


def shuffle_conservation(items=6, c=3) -> CheckResult:
    cases = bad = 0
    universe = range(items)
    rng = random.Random(0)
    for ca, cb in itertools.product(itertools.combinations(universe, c), repeat=2):
        for s in range(1, c + 1):
            for sa in itertools.combinations(ca, s):
                for sb in itertools.combinations(cb, s):
                    a2, b2 = exchange(ca, cb, sa, sb, rng)
                    cases += 1
                    if a2 | b2 != set(ca) | set(cb) or len(a2) > c or len(b2) > c:
                        bad += 1
    return CheckResult("shuffle conservation", bad == 0, f"{cases} cases, {bad} violations")


def exact_linearity() -> CheckResult:
    K = np.array([[0.5, 0.3, 0.2], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]])
    model = constant_model(K)
    counts = (3, 2, 1)
    E = exact_expected_occupancy(model, counts, 4)
    mu = classic_trajectory(model, np.array(counts) / 6, 4)[-1]
    err = float(np.max(np.abs(E - mu)))
    return CheckResult("exact vs classic (constant kernel)", err <= 1e-12, f"max diff {err:.1e}")


CHECKS = (kernel_rows, pair_prob_rows, derivative_agreement, refined_structure, shuffle_conservation, exact_linearity)


def run_checks() -> list:
    return [check() for check in CHECKS]


@dataclass(frozen=True)
class Timing:
    N: int
    classic: float
    refined: float


def time_meanfield(N: int, t_max: int = 1500, gmax: int = 3) -> Timing:
    """Wall-clock seconds for classic and refined six-state trajectories."""
    model = build_model(ModelKind.SIX_STATE, GossipParams(gmax=gmax, n_population=N))
    mu0 = np.zeros(6)
    mu0[4] = 1.0 / N
    mu0[2] = 1.0 - mu0[4]
    start = time.perf_counter()
    classic_trajectory(model, mu0, t_max)
    mid = time.perf_counter()
    refined_trajectory(model, mu0, t_max, N)
    end = time.perf_counter()
    return Timing(N, mid - start, end - mid)
