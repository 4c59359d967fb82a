"""Forward-mode second-order differentiation.

A :class:`Jet2` carries a value, two first-order coefficients (one per seed
direction) and the mixed second-order coefficient for the two seeded
directions. The coefficients are numpy arrays so that many direction pairs
are propagated through a single evaluation of the function; every pair is
computed independently of the others, so the result is identical to running
one pass per pair.

Functions to be differentiated take a sequence of scalars and return a
sequence of scalars, using only ``+ - * /``, integer powers and :func:`exp`.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np


class NonFiniteDerivative(ArithmeticError):
    """Raised when a derivative entry is NaN or infinite."""


class Jet2:
    __slots__ = ("value", "d1", "d2", "d12")

    def __init__(self, value, d1, d2, d12):
        self.value = value
        self.d1 = d1
        self.d2 = d2
        self.d12 = d12

    def __repr__(self):
        return f"Jet2({self.value!r}, d1={self.d1!r}, d2={self.d2!r}, d12={self.d12!r})"

    def _chain(self, g0, g1, g2):
        # g0, g1, g2: g(u), g'(u), g''(u) at u = self.value
        return Jet2(
            g0,
            g1 * self.d1,
            g1 * self.d2,
            g1 * self.d12 + g2 * self.d1 * self.d2,
        )

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.value + other.value,
                self.d1 + other.d1,
                self.d2 + other.d2,
                self.d12 + other.d12,
            )
        return Jet2(self.value + other, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2, -self.d12)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.value - other.value,
                self.d1 - other.d1,
                self.d2 - other.d2,
                self.d12 - other.d12,
            )
        return Jet2(self.value - other, self.d1, self.d2, self.d12)

    def __rsub__(self, other):
        return Jet2(other - self.value, -self.d1, -self.d2, -self.d12)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            a, b = self, other
            return Jet2(
                a.value * b.value,
                a.value * b.d1 + b.value * a.d1,
                a.value * b.d2 + b.value * a.d2,
                a.value * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + b.value * a.d12,
            )
        return Jet2(self.value * other, self.d1 * other, self.d2 * other, self.d12 * other)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.value
        if v == 0:
            raise ZeroDivisionError("Jet2 reciprocal of zero value")
        inv = 1.0 / v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("Jet2 supports integer exponents only")
        if k == 0:
            return Jet2(1.0, 0.0 * self.d1, 0.0 * self.d2, 0.0 * self.d12)
        v = self.value
        g1 = k * v ** (k - 1)
        g2 = k * (k - 1) * v ** (k - 2) if k != 1 else 0.0
        return self._chain(v**k, g1, g2)

    def exp(self):
        e = math.exp(self.value)
        return self._chain(e, e, e)


def exp(x):
    """Exponential that dispatches on floats, numpy arrays and jets."""
    if isinstance(x, Jet2):
        return x.exp()
    if isinstance(x, float):
        return math.exp(x)
    if isinstance(x, np.ndarray) and x.dtype == object:
        return np.array([mpmath.exp(v) for v in x.flat], dtype=object).reshape(x.shape)
    if isinstance(x, mpmath.mpf):
        return mpmath.exp(x)
    return np.exp(x)


def _seed(m, first, second):
    """Build jets for point ``m`` with direction pairs (first[p], second[p])."""
    n = len(m)
    idx = np.arange(n)[:, None]
    d1 = (idx == np.asarray(first)[None, :]).astype(float)
    d2 = (idx == np.asarray(second)[None, :]).astype(float)
    zero = np.zeros(len(first))
    return [Jet2(float(m[i]), d1[i], d2[i], zero) for i in range(n)]


def _coeffs(out, attr, size):
    rows = []
    for y in out:
        if isinstance(y, Jet2):
            rows.append(np.broadcast_to(getattr(y, attr), (size,)))
        else:
            rows.append(np.zeros(size))
    return np.array(rows, dtype=float)


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteDerivative(f"{what} has non-finite entries")
    return arr


def jacobian(f, m):
    """Jacobian ``J[i, j] = d f_i / d m_j`` by forward mode (one direction per column)."""
    m = np.asarray(m, dtype=float)
    n = m.size
    cols = np.arange(n)
    out = f(_seed(m, cols, cols))
    jac = _coeffs(out, "d1", n)
    return _check_finite(jac, "jacobian")


def _pairs(n):
    j, k = np.triu_indices(n)
    return j, k


def derivatives(f, m):
    """Value, Jacobian and Hessian tensor of ``f`` at ``m`` in one evaluation.

    Returns
    -------
    value : (p,) ndarray
    jac : (p, n) ndarray
    hess : (p, n, n) ndarray, symmetric in the last two axes by construction.
    """
    m = np.asarray(m, dtype=float)
    n = m.size
    j, k = _pairs(n)
    out = f(_seed(m, j, k))
    value = np.array([y.value if isinstance(y, Jet2) else y for y in out], dtype=float)
    d1 = _coeffs(out, "d1", j.size)
    mixed = _coeffs(out, "d12", j.size)
    diag = j == k
    jac = np.empty((len(out), n))
    jac[:, j[diag]] = d1[:, diag]
    hess = np.empty((len(out), n, n))
    hess[:, j, k] = mixed
    hess[:, k, j] = mixed
    return value, _check_finite(jac, "jacobian"), _check_finite(hess, "hessian")


def hessian(f, m):
    """Second-derivative tensor ``H[i, j, k] = d^2 f_i / d m_j d m_k``."""
    return derivatives(f, m)[2]


def mixed_coefficients(f, m, first, second):
    """Mixed second-order coefficients for explicit ordered direction pairs.

    Used to check that seeding (j, k) and (k, j) gives the same result.
    """
    m = np.asarray(m, dtype=float)
    out = f(_seed(m, first, second))
    return _coeffs(out, "d12", len(first))


FD_DIGITS = 34


def _evaluate_batch(f, points):
    """Evaluate ``f`` on the columns of ``points`` (n x B) in one call."""
    out = f([points[i] for i in range(points.shape[0])])
    rows = []
    for y in out:
        y = np.asarray(y, dtype=object)
        rows.append(np.broadcast_to(y, points.shape[1:]) if y.ndim == 0 else y)
    return np.stack(rows)


def _mp_array(x):
    return np.array([mpmath.mpf(float(v)) for v in np.ravel(x)], dtype=object).reshape(np.shape(x))


def _to_float(a):
    return np.array([float(v) for v in a.flat]).reshape(a.shape)


def fd_jacobian(f, m, h=1e-5, digits=FD_DIGITS):
    """Central-difference Jacobian ``(f(m + h e_j) - f(m - h e_j)) / 2h``.

    The perturbed points are evaluated in ``digits``-digit arithmetic so that
    only the truncation error of the stencil remains.
    """
    with mpmath.workdps(digits):
        m = _mp_array(m)
        n = m.size
        hh = mpmath.mpf(h)
        step = np.where(np.eye(n, dtype=bool), hh, mpmath.mpf(0)).astype(object)
        pts = np.concatenate([m[:, None] + step, m[:, None] - step], axis=1)
        vals = _evaluate_batch(f, pts)
        return _to_float((vals[:, :n] - vals[:, n:]) / (2 * hh))


def fd_hessian(f, m, h=1e-4, digits=FD_DIGITS):
    """Second derivatives by the 4-point central stencil (3-point on the diagonal)."""
    with mpmath.workdps(digits):
        m = _mp_array(m)
        n = m.size
        hh = mpmath.mpf(h)
        eye = np.where(np.eye(n, dtype=bool), hh, mpmath.mpf(0)).astype(object)
        j, k = np.triu_indices(n, 1)
        ej, ek = eye[:, j], eye[:, k]
        cols = [m[:, None], m[:, None] + eye, m[:, None] - eye]
        for sj, sk in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            cols.append(m[:, None] + sj * ej + sk * ek)
        vals = _evaluate_batch(f, np.concatenate(cols, axis=1))
        f0 = vals[:, :1]
        fp, fm = vals[:, 1 : n + 1], vals[:, n + 1 : 2 * n + 1]
        q = j.size
        base = 2 * n + 1
        fpp, fpm, fmp, fmm = (vals[:, base + r * q : base + (r + 1) * q] for r in range(4))
        hess = np.empty((vals.shape[0], n, n))
        diag = np.arange(n)
        hess[:, diag, diag] = _to_float((fp - 2 * f0 + fm) / (hh * hh))
        off = _to_float((fpp - fpm - fmp + fmm) / (4 * hh * hh))
        hess[:, j, k] = off
        hess[:, k, j] = off
        return hess


def _max_rel(a, b, floor=1e-8):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def fd_check(f, m, h=1e-5, order=1):
    """Largest relative gap between forward-mode and central-difference derivatives.

    ``order=1`` compares Jacobians, ``order=2`` Hessian tensors. Denominators
    are floored at 1e-8 so entries that are zero on both sides compare as
    absolute errors.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    if order == 1:
        return _max_rel(jacobian(f, m), fd_jacobian(f, m, h))
    if order == 2:
        return _max_rel(hessian(f, m), fd_hessian(f, m, h))
    raise ValueError("order must be 1 or 2")
