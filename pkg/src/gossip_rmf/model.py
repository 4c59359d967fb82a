"""Population models: occupancy vectors, occupancy-dependent kernels and the one-step map."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autodiff import hessian, jacobian

SIMPLEX_TOL = 1e-12


class OccupancyError(ValueError):
    pass


class NegativeEntry(OccupancyError):
    def __init__(self, index, value):
        super().__init__(f"entry {index} is negative ({value!r})")
        self.index = index
        self.value = value


class SumNotOne(OccupancyError):
    def __init__(self, deviation):
        super().__init__(f"entries sum to 1 {deviation:+.3e}")
        self.deviation = deviation


class DimensionMismatch(OccupancyError):
    pass


def validate_occupancy(v, n_states=None, tol=SIMPLEX_TOL) -> np.ndarray:
    """Check that ``v`` is a point of the unit simplex and return it as a float array.

    Raises :class:`NegativeEntry` for entries below ``-tol`` or above ``1 + tol``
    and :class:`SumNotOne` when the entries do not sum to 1 within ``tol``;
    the exception carries the signed deviation ``sum(v) - 1``.
    """
    m = np.asarray(v, dtype=float)
    if m.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {m.shape}")
    if n_states is not None and m.size != n_states:
        raise DimensionMismatch(f"expected {n_states} entries, got {m.size}")
    if not np.all(np.isfinite(m)):
        raise OccupancyError("occupancy has non-finite entries")
    neg = np.flatnonzero(m < -tol)
    if neg.size:
        raise NegativeEntry(int(neg[0]), float(m[neg[0]]))
    big = np.flatnonzero(m > 1 + tol)
    if big.size:
        raise OccupancyError(f"entry {int(big[0])} exceeds 1 ({m[big[0]]!r})")
    dev = float(m.sum()) - 1.0
    if abs(dev) > tol:
        raise SumNotOne(dev)
    return m


@dataclass(frozen=True)
class CountVector:
    """Integer state counts of a population of ``sum(counts)`` objects."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count in {counts}")
        if sum(counts) <= 0:
            raise ValueError("population must be positive")
        object.__setattr__(self, "counts", counts)

    @property
    def population(self) -> int:
        return sum(self.counts)

    def occupancy(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.population

    def __len__(self):
        return len(self.counts)


KernelFn = Callable[[Sequence], list]


@dataclass(frozen=True)
class PopulationModel:
    """A population of objects with ``n_states`` local states.

    ``entries(m)`` returns the transition matrix K(m) as a nested list whose
    elements are built from the entries of ``m`` with ``+ - * /`` and
    :func:`gossip_rmf.autodiff.exp`. Keeping the kernel generic over the
    scalar type lets the same code run on floats, numpy batches and jets.
    Entries that are structurally zero should be the literal ``0.0``.
    """

    name: str
    state_names: tuple
    entries: KernelFn = field(repr=False)

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def index(self, state: str) -> int:
        return self.state_names.index(state)

    def kernel(self, m) -> np.ndarray:
        """Dense float transition matrix at occupancy ``m``."""
        m = np.asarray(m, dtype=float)
        return np.array(self.entries(m), dtype=float)

    def phi(self, m) -> list:
        """One-step map, generic over the scalar type: ``phi(m)_j = sum_i m_i K_ij(m)``."""
        K = self.entries(m)
        n = self.n_states
        out = []
        for j in range(n):
            acc = 0.0
            for i in range(n):
                k = K[i][j]
                if type(k) is float and k == 0.0:
                    continue
                acc = acc + m[i] * k
            out.append(acc)
        return out


def step(model: PopulationModel, m) -> np.ndarray:
    """``m K(m)`` for a valid occupancy ``m``; the result is checked, never renormalised."""
    m = validate_occupancy(m, model.n_states)
    out = m @ model.kernel(m)
    return validate_occupancy(out, model.n_states)


def iterate(model: PopulationModel, m0, t: int) -> np.ndarray:
    """t-fold composition of :func:`step`; ``t = 0`` returns ``m0``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    m = validate_occupancy(m0, model.n_states)
    for _ in range(t):
        m = step(model, m)
    return m


def constant_model(K, names=None, name="constant") -> PopulationModel:
    """Model whose kernel does not depend on the occupancy."""
    K = np.asarray(K, dtype=float)
    rows = [[float(x) for x in row] for row in K]
    names = tuple(names) if names is not None else tuple(f"s{i}" for i in range(len(rows)))
    return PopulationModel(name, names, lambda m: rows)


def identity_model(n: int) -> PopulationModel:
    return constant_model(np.eye(n), name="identity")


@dataclass(frozen=True)
class Measure:
    """A scalar function of the occupancy.

    Linear measures are given by ``weights``. General measures supply ``func``
    (generic over the scalar type, so it can be differentiated by
    :mod:`gossip_rmf.autodiff`) and optionally explicit ``grad`` / ``hess``
    evaluators.
    """

    name: str
    weights: np.ndarray | None = None
    func: Callable | None = field(default=None, repr=False)
    grad: Callable | None = field(default=None, repr=False)
    hess: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.weights is None) == (self.func is None):
            raise ValueError("give exactly one of weights or func")
        if self.weights is not None:
            object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def is_linear(self) -> bool:
        return self.weights is not None

    def __call__(self, m):
        if self.is_linear:
            return np.asarray(m, dtype=float) @ self.weights
        return float(self.func(list(np.asarray(m, dtype=float))))

    def gradient(self, m) -> np.ndarray:
        if self.is_linear:
            return self.weights.copy()
        if self.grad is not None:
            return np.asarray(self.grad(m), dtype=float)
        return jacobian(lambda x: [self.func(x)], m)[0]

    def hessian(self, m) -> np.ndarray:
        if self.is_linear:
            n = self.weights.size
            return np.zeros((n, n))
        if self.hess is not None:
            return np.asarray(self.hess(m), dtype=float)
        return hessian(lambda x: [self.func(x)], m)[0]
