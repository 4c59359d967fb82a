"""Refined mean field: the 1/N correction to the classic trajectory.

With ``A_t`` and ``B_t`` the Jacobian and Hessian of the one-step map at
``mu(t)``, the correction terms follow

    V_{t+1} = A_t V_t + 1/2 B_t . W_t
    W_{t+1} = Gamma(mu(t)) + A_t W_t A_t^T,        V_0 = 0, W_0 = 0,

and ``E[M_i(t)] = mu_i(t) + V_t[i] / N + o(1/N)``. Occupancies are row
vectors throughout; ``A[i, j] = d phi_i / d m_j``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .autodiff import derivatives
from .model import Measure, PopulationModel, step, validate_occupancy


class RefinedOutOfRange(UserWarning):
    """A refined occupancy left [0, 1]; the expansion is asymptotic in N."""


def gamma(model: PopulationModel, m) -> np.ndarray:
    """Covariance of one step of multinomial moves, per object.

    ``Gamma[j, j] = sum_i m_i K_ij (1 - K_ij)`` and
    ``Gamma[j, k] = -sum_i m_i K_ij K_ik`` for ``j != k``.
    """
    m = np.asarray(m, dtype=float)
    K = model.kernel(m)
    G = -np.einsum("i,ij,ik->jk", m, K, K)
    G[np.diag_indices_from(G)] += m @ K
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


@dataclass(frozen=True)
class RefinedState:
    mu: np.ndarray
    V: np.ndarray
    W: np.ndarray


@dataclass(frozen=True)
class RefinedTrajectory:
    mu: np.ndarray  # (T+1, n)
    V: np.ndarray  # (T+1, n)
    W: np.ndarray  # (T+1, n, n)
    n_population: int

    def __len__(self):
        return self.mu.shape[0]

    def state(self, t: int) -> RefinedState:
        return RefinedState(self.mu[t], self.V[t], self.W[t])

    @property
    def states(self):
        return [self.state(t) for t in range(len(self))]

    def occupancy(self, N=None) -> np.ndarray:
        N = self.n_population if N is None else N
        return self.mu + self.V / N

    def measure(self, h: Measure, N=None) -> np.ndarray:
        N = self.n_population if N is None else N
        return np.array([refined_measure(self.state(t), h, N) for t in range(len(self))])


def contract(B, W) -> np.ndarray:
    """``(B . W)_i = sum_j sum_k B[i, j, k] W[j, k]`` in a fixed summation order."""
    return (B * W[None, :, :]).sum(axis=2).sum(axis=1)


def refined_trajectory(model: PopulationModel, mu0, t_max: int, n_population: int = 1) -> RefinedTrajectory:
    if n_population <= 0:
        raise ValueError("population size must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n = model.n_states
    mu = np.empty((t_max + 1, n))
    V = np.zeros((t_max + 1, n))
    W = np.zeros((t_max + 1, n, n))
    mu[0] = validate_occupancy(mu0, n)
    for t in range(t_max):
        _, A, B = derivatives(model.phi, mu[t])
        mu[t + 1] = step(model, mu[t])
        V[t + 1] = A @ V[t] + 0.5 * contract(B, W[t])
        W[t + 1] = gamma(model, mu[t]) + A @ W[t] @ A.T
    return RefinedTrajectory(mu, V, W, n_population)


def refined_occupancy(state: RefinedState, N) -> np.ndarray:
    """``mu + V / N``. Values outside [0, 1] are returned unchanged with a warning."""
    if N <= 0:
        raise ValueError("N must be positive")
    out = state.mu + state.V / N
    if np.any(out < 0) or np.any(out > 1):
        warnings.warn(f"refined occupancy outside [0, 1] at N={N}", RefinedOutOfRange, stacklevel=2)
    return out


def refined_measure(state: RefinedState, h: Measure, N) -> float:
    """``h(mu) + (Dh V + 1/2 sum_jk D2h_jk W_jk) / N``."""
    if N <= 0:
        raise ValueError("N must be positive")
    if h.is_linear:
        return float(h.weights @ (state.mu + state.V / N))
    corr = h.gradient(state.mu) @ state.V + 0.5 * float(np.sum(h.hessian(state.mu) * state.W))
    return float(h(state.mu) + corr / N)


def structure_errors(traj: RefinedTrajectory) -> dict:
    """Worst-case violations of the conservation and covariance structure of (V, W)."""
    W = traj.W
    eig = np.linalg.eigvalsh(0.5 * (W + np.swapaxes(W, 1, 2)))
    return {
        "sum_V": float(np.max(np.abs(traj.V.sum(axis=1)))),
        "asym_W": float(np.max(np.abs(W - np.swapaxes(W, 1, 2)))),
        "rowsum_W": float(np.max(np.abs(W.sum(axis=2)))),
        "min_eig_W": float(eig.min()),
    }
