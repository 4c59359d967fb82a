"""Population models of the gossip shuffle protocol.

Pairwise exchange probabilities P(A'B'|AB) give the chance that an
active/passive pair whose caches are in states A, B (D: holds the fresh
item, O: does not) ends in states A', B' after one shuffle, assuming the
``n_items`` items are spread uniformly over caches of size ``c`` and ``s``
items are exchanged.

Five models are built from them:

* ``full-replication``: states O0..O_g, D0..D_g, the index being the gossip
  delay (``g = gmax``); delay 0 is active.
* ``full-coverage``: adds I0..I_g, nodes that never held the item.
* ``two-state`` / ``three-state``: delay classes aggregated into O, D (and I).
* ``six-state``: O, D, I, FD, PD, LD, separating copies gained by exchange
  (FD, LD) from replication (D) and keeping one permanent holder (PD).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .autodiff import exp
from .model import Measure, PopulationModel


class InvalidParams(ValueError):
    pass


class MeasureUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class GossipParams:
    n_items: int = 500
    c: int = 100
    s: int = 50
    gmax: int = 3
    n_population: int = 100

    def __post_init__(self):
        if not 0 < self.s <= self.c <= self.n_items:
            raise InvalidParams(f"need 0 < s <= c <= n_items, got s={self.s}, c={self.c}, n_items={self.n_items}")
        if self.s == self.n_items:
            raise InvalidParams("s == n_items makes (n_items - s) vanish")
        if self.gmax < 1:
            raise InvalidParams(f"gmax must be >= 1, got {self.gmax}")
        if self.n_population < 1:
            raise InvalidParams(f"population must be positive, got {self.n_population}")


@dataclass(frozen=True)
class PairProbs:
    p_od_do: float
    p_do_od: float
    p_od_od: float
    p_do_do: float
    p_dd_od: float
    p_dd_do: float
    p_od_dd: float
    p_do_dd: float
    p_dd_dd: float
    p_oo_oo: float = 1.0

    @property
    def degenerate(self) -> bool:
        """True when the whole cache is sent (s == c): an exchanged item is never kept."""
        return self.p_od_od == 0.0


def pair_probs(p: GossipParams) -> PairProbs:
    n, c, s = p.n_items, p.c, p.s
    if s >= n:
        raise InvalidParams("s must be smaller than n_items")
    swap = (s / c) * (n - c) / (n - s)
    keep = (c - s) / c
    dup = (s / c) * (c - s) / (n - s)
    lose_one = (s / c) * ((c - s) / c) * (n - c) / (n - s)
    return PairProbs(
        p_od_do=swap,
        p_do_od=swap,
        p_od_od=keep,
        p_do_do=keep,
        p_dd_od=dup,
        p_dd_do=dup,
        p_od_dd=lose_one,
        p_do_dd=lose_one,
        p_dd_dd=1.0 - 2.0 * lose_one,
    )


def noc_aggregated(gmax: int) -> float:
    """No-collision probability when a fraction 1/(gmax+1) of nodes is active."""
    if gmax < 1:
        raise InvalidParams("gmax must be >= 1")
    return math.exp(-2.0 / (gmax + 1))


def noc_full(m_active_o, m_active_d):
    """No-collision probability e^{-2(m_O0 + m_D0)}; differentiable in both arguments."""
    return exp(-2.0 * (m_active_o + m_active_d))


class ModelKind(enum.Enum):
    TWO_STATE = "two-state"
    THREE_STATE = "three-state"
    SIX_STATE = "six-state"
    FULL_REPLICATION = "full-replication"
    FULL_COVERAGE = "full-coverage"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown model kind {value!r} (expected one of {names})") from None

    def n_states(self, gmax: int) -> int:
        return {
            ModelKind.TWO_STATE: 2,
            ModelKind.THREE_STATE: 3,
            ModelKind.SIX_STATE: 6,
            ModelKind.FULL_REPLICATION: 2 * (gmax + 1),
            ModelKind.FULL_COVERAGE: 3 * (gmax + 1),
        }[self]


def state_names(kind: ModelKind, gmax: int) -> tuple:
    kind = ModelKind.parse(kind)
    delays = range(gmax + 1)
    if kind is ModelKind.TWO_STATE:
        return ("O", "D")
    if kind is ModelKind.THREE_STATE:
        return ("O", "D", "I")
    if kind is ModelKind.SIX_STATE:
        return ("O", "D", "I", "FD", "PD", "LD")
    names = [f"O{i}" for i in delays] + [f"D{i}" for i in delays]
    if kind is ModelKind.FULL_COVERAGE:
        names += [f"I{i}" for i in delays]
    return tuple(names)


def _zeros(n):
    return [[0.0] * n for _ in range(n)]


def _aggregated_kernel(pp: PairProbs, gmax: int, with_i: bool):
    g = float(gmax)
    a = 1.0 / (gmax + 1)
    noc = noc_aggregated(gmax)
    n = 3 if with_i else 2

    def entries(m):
        m_o, m_d = m[0], m[1]
        m_passive_o = m_o + m[2] if with_i else m_o
        ogs = a * m_d * (pp.p_od_do + pp.p_dd_do) * noc
        dls = a * (m_passive_o * pp.p_do_od + m_d * pp.p_do_dd) * noc
        ogr = g * a * m_d * (pp.p_do_od + pp.p_dd_od) * noc
        # the reset-loss term uses P(DO|DD); it equals P(OD|DD)
        dlr = g * a * (m_passive_o * pp.p_od_do + m_d * pp.p_do_dd) * noc
        get = g * a * ogs + a * ogr
        loose = g * a * dls + a * dlr
        K = _zeros(n)
        K[0][0] = 1.0 - get
        K[0][1] = get
        K[1][0] = loose
        K[1][1] = 1.0 - loose
        if with_i:
            K[2][1] = get
            K[2][2] = 1.0 - get
        return K

    return entries


def _six_state_kernel(pp: PairProbs, gmax: int):
    O, D, I, FD, PD, LD = range(6)
    rate = 2.0 * gmax / (gmax + 1) ** 2 * noc_aggregated(gmax)

    def entries(m):
        holders = m[D] + m[PD]
        get_exc = rate * holders * pp.p_od_do
        get_rep = rate * holders * pp.p_dd_do
        loose_exc = rate * (m[O] + m[I] + m[LD] + m[FD]) * pp.p_od_do
        loose_rep = rate * holders * pp.p_do_dd
        K = _zeros(6)
        stay_out = 1.0 - get_rep - get_exc
        K[O][O] = stay_out
        K[O][D] = get_rep
        K[O][LD] = get_exc
        K[D][O] = loose_rep
        K[D][D] = 1.0 - loose_rep
        K[I][I] = stay_out
        K[I][D] = get_rep
        K[I][FD] = get_exc
        stay_exc = 1.0 - loose_exc - get_rep
        for x in (FD, LD):
            K[x][O] = loose_exc
            K[x][D] = get_rep
            K[x][x] = stay_exc
        K[PD][PD] = 1.0
        return K

    return entries


def _full_kernel(pp: PairProbs, gmax: int, with_i: bool):
    g1 = gmax + 1
    O = list(range(g1))
    D = [g1 + i for i in range(g1)]
    I = [2 * g1 + i for i in range(g1)] if with_i else []
    n = len(O) + len(D) + len(I)
    o_getd = pp.p_do_od + pp.p_dd_od
    o_getd_passive = pp.p_od_do + pp.p_dd_do

    def _passive(m, idx):
        acc = m[idx[1]]
        for i in idx[2:]:
            acc = acc + m[i]
        return acc

    def entries(m):
        active_o = m[O[0]] + m[I[0]] if with_i else m[O[0]]
        noc = noc_full(active_o, m[D[0]])
        passive_d = _passive(m, D)
        passive_o = _passive(m, O)
        if with_i:
            passive_o = passive_o + _passive(m, I)
        o_getd_reset = passive_d * o_getd * noc
        o_getd_step = m[D[0]] * o_getd_passive * noc
        d_loss_reset = passive_o * pp.p_od_do * noc + passive_d * pp.p_od_dd * noc
        d_loss_step = active_o * pp.p_do_od * noc + m[D[0]] * pp.p_do_dd * noc

        K = _zeros(n)
        chains = [O, I] if with_i else [O]
        for X in chains:
            K[X[0]][X[gmax]] = 1.0 - o_getd_reset
            K[X[0]][D[gmax]] = o_getd_reset
            for i in range(1, g1):
                K[X[i]][X[i - 1]] = 1.0 - o_getd_step
                K[X[i]][D[i - 1]] = o_getd_step
        K[D[0]][O[gmax]] = d_loss_reset
        K[D[0]][D[gmax]] = 1.0 - d_loss_reset
        for i in range(1, g1):
            K[D[i]][O[i - 1]] = d_loss_step
            K[D[i]][D[i - 1]] = 1.0 - d_loss_step
        return K

    return entries


def build_model(kind, p: GossipParams) -> PopulationModel:
    kind = ModelKind.parse(kind)
    pp = pair_probs(p)
    if kind is ModelKind.TWO_STATE:
        entries = _aggregated_kernel(pp, p.gmax, with_i=False)
    elif kind is ModelKind.THREE_STATE:
        entries = _aggregated_kernel(pp, p.gmax, with_i=True)
    elif kind is ModelKind.SIX_STATE:
        entries = _six_state_kernel(pp, p.gmax)
    elif kind is ModelKind.FULL_REPLICATION:
        entries = _full_kernel(pp, p.gmax, with_i=False)
    else:
        entries = _full_kernel(pp, p.gmax, with_i=True)
    return PopulationModel(kind.value, state_names(kind, p.gmax), entries)


def _weights(names, states):
    return np.array([1.0 if x in states else 0.0 for x in names])


def replication_measure(kind, gmax: int = 3) -> Measure:
    """Fraction of nodes holding the fresh item."""
    kind = ModelKind.parse(kind)
    names = state_names(kind, gmax)
    if kind is ModelKind.SIX_STATE:
        held = {"D", "PD"}
    elif kind in (ModelKind.TWO_STATE, ModelKind.THREE_STATE):
        held = {"D"}
    else:
        held = {x for x in names if x.startswith("D")}
    return Measure("replication", weights=_weights(names, held))


def coverage_measure(kind, gmax: int = 3) -> Measure:
    """Fraction of nodes that have held the fresh item at some point."""
    kind = ModelKind.parse(kind)
    if kind in (ModelKind.TWO_STATE, ModelKind.FULL_REPLICATION):
        raise MeasureUnavailable(f"{kind.value} has no never-seen states, coverage is undefined")
    names = state_names(kind, gmax)
    seen = {x for x in names if not x.startswith("I")}
    return Measure("coverage", weights=_weights(names, seen))


def measure(kind, name: str, gmax: int = 3) -> Measure:
    if name == "replication":
        return replication_measure(kind, gmax)
    if name == "coverage":
        return coverage_measure(kind, gmax)
    raise ValueError(f"unknown measure {name!r}")
