"""Classic (deterministic) mean-field trajectories."""

from __future__ import annotations

import numpy as np

from .model import Measure, PopulationModel, step, validate_occupancy


def classic_trajectory(model: PopulationModel, mu0, t_max: int) -> np.ndarray:
    """Iterate ``mu(t+1) = mu(t) K(mu(t))``.

    Returns an array of shape ``(t_max + 1, n_states)`` whose row ``t`` is
    ``mu(t)``; every row is a checked simplex point.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    mu = validate_occupancy(mu0, model.n_states)
    traj = np.empty((t_max + 1, model.n_states))
    traj[0] = mu
    for t in range(t_max):
        traj[t + 1] = step(model, traj[t])
    return traj


def measure_series(traj, h: Measure) -> np.ndarray:
    traj = np.asarray(traj, dtype=float)
    if h.is_linear:
        if h.weights.size != traj.shape[1]:
            raise ValueError("measure dimension does not match the trajectory")
        return traj @ h.weights
    return np.array([h(m) for m in traj])


def first_crossing(series, level: float):
    """First index at which ``series`` reaches ``level``, or None."""
    hit = np.flatnonzero(np.asarray(series) >= level)
    return int(hit[0]) if hit.size else None
