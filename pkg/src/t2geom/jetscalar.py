"""Dense truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients of a (possibly array-valued)
function around a fixed point, in ``nvars`` variables, up to total degree
``order``. Coefficients are kept in a degree-major monomial basis so that
truncating to a lower order is a prefix slice. Partial derivatives are
recovered as ``alpha! * c_alpha``.

Differentiating a jet lowers its order by one, so a quantity built from
``k``-th derivatives of a degree-``d`` expansion is reliable only up to
degree ``d - k``. Arithmetic between jets of different order truncates to
the smaller one, which keeps that bookkeeping automatic.

The module also hosts the scalar dispatch functions (:func:`exp`,
:func:`log`, ...) used by expression and built-in Lagrangians, so the same
code runs on Python floats, numpy arrays (including ``longdouble``) and
jets.
"""
from __future__ import annotations

import functools
import itertools
import math
from typing import Sequence

import numpy as np

from .errors import DomainError

# Division and reciprocal treat magnitudes below this as zero.
TINY = 1e-300


class _Tables:
    """Monomial basis and operation tables for (nvars, order)."""

    def __init__(self, m: int, d: int):
        exps = [(0,) * m]
        for deg in range(1, d + 1):
            for combo in itertools.combinations_with_replacement(range(m), deg):
                e = [0] * m
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
        self.m = m
        self.d = d
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), m)
        self.size = len(exps)
        self.degs = self.exps.sum(axis=1)
        self.index = {e: i for i, e in enumerate(exps)}
        self.factorial = np.array(
            [math.prod(math.factorial(int(a)) for a in e) for e in exps], dtype=float
        )
        # counts[k] = number of monomials of degree <= k
        self.counts = [int(np.count_nonzero(self.degs <= k)) for k in range(d + 1)]

        base = (d + 1) ** np.arange(m, dtype=np.int64)
        codes = self.exps @ base
        sorter = np.argsort(codes)
        ia, ib, ic = [], [], []
        for a in range(self.size):
            nb = self.counts[d - self.degs[a]]
            csum = codes[a] + codes[:nb]
            pos = sorter[np.searchsorted(codes, csum, sorter=sorter)]
            ia.append(np.full(nb, a))
            ib.append(np.arange(nb))
            ic.append(pos)
        ia = np.concatenate(ia)
        ib = np.concatenate(ib)
        ic = np.concatenate(ic)
        order = np.argsort(ic, kind="stable")
        self.mul_a = ia[order]
        self.mul_b = ib[order]
        ic = ic[order]
        self.mul_starts = np.flatnonzero(np.r_[True, ic[1:] != ic[:-1]])

        self.diff = []
        lower = tables(m, d - 1) if d > 0 else None
        for k in range(m):
            src = np.flatnonzero(self.exps[:, k] > 0)
            if lower is None:
                self.diff.append((src, src, np.zeros(0)))
                continue
            dst = []
            for s in src:
                e = list(self.exps[s])
                e[k] -= 1
                dst.append(lower.index[tuple(e)])
            self.diff.append((src, np.array(dst, dtype=np.int64), self.exps[src, k].astype(float)))


@functools.lru_cache(maxsize=None)
def tables(m: int, d: int) -> _Tables:
    return _Tables(m, d)


class Jet:
    """Truncated Taylor expansion, possibly array-valued.

    ``coef`` has shape ``shape + (N,)`` where ``N`` is the number of
    monomials of degree <= ``order`` in ``nvars`` variables.
    """

    __slots__ = ("coef", "nvars", "order")
    __array_ufunc__ = None

    def __init__(self, coef, nvars: int, order: int):
        self.coef = coef
        self.nvars = nvars
        self.order = order

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (tables(nvars, order).size,))
        coef[..., 0] = value
        return cls(coef, nvars, order)

    @classmethod
    def variable(cls, value, k: int, nvars: int, order: int) -> "Jet":
        """Coordinate ``k``; an array ``value`` gives a batch of independent jets."""
        t = tables(nvars, order)
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (t.size,))
        coef[..., 0] = value
        if order >= 1:
            e = [0] * nvars
            e[k] = 1
            coef[..., t.index[tuple(e)]] = 1.0
        return cls(coef, nvars, order)

    @staticmethod
    def stack(items: Sequence["Jet"], axis: int = 0) -> "Jet":
        order = min(j.order for j in items)
        nvars = items[0].nvars
        coefs = [j.truncate(order).coef for j in items]
        if axis < 0:
            axis -= 1
        return Jet(np.stack(coefs, axis=axis), nvars, order)

    @staticmethod
    def coerce_array(items, nvars: int, order: int) -> "Jet":
        """Nested list of jets/numbers -> one array-valued jet."""
        flat = np.asarray(items, dtype=object)
        shape = flat.shape
        parts = []
        for v in flat.ravel():
            parts.append(v if isinstance(v, Jet) else Jet.constant(v, nvars, order))
        return Jet.stack(parts).reshape(shape)

    # -- basic properties --------------------------------------------------
    @property
    def shape(self):
        return self.coef.shape[:-1]

    @property
    def value(self):
        return self.coef[..., 0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order}, value={self.value!r})"

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        n = tables(self.nvars, self.order).counts[order]
        return Jet(self.coef[..., :n], self.nvars, order)

    def copy(self) -> "Jet":
        return Jet(self.coef.copy(), self.nvars, self.order)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return Jet(self.coef[idx], self.nvars, self.order)

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.coef.reshape(tuple(shape) + (self.coef.shape[-1],)), self.nvars, self.order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def transpose(self, *axes) -> "Jet":
        nd = len(self.shape)
        if not axes:
            axes = tuple(reversed(range(nd)))
        return Jet(self.coef.transpose(tuple(axes) + (nd,)), self.nvars, self.order)

    def sum(self, axis=None) -> "Jet":
        nd = len(self.shape)
        if axis is None:
            axis = tuple(range(nd))
        elif isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % nd for a in axis)
        return Jet(self.coef.sum(axis=axis), self.nvars, self.order)

    # -- derivatives -------------------------------------------------------
    def derivative(self, k: int) -> "Jet":
        """d/d(variable k); the result has order ``self.order - 1``."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, dst, fac = tables(self.nvars, self.order).diff[k]
        out = np.zeros(self.shape + (tables(self.nvars, self.order - 1).size,))
        out[..., dst] = self.coef[..., src] * fac
        return Jet(out, self.nvars, self.order - 1)

    def partial(self, multi_index: Sequence[int]):
        """Value of the partial derivative given as a tuple of variable indices."""
        if len(multi_index) > self.order:
            raise ValueError(
                f"partial of order {len(multi_index)} requested from an order-{self.order} jet"
            )
        e = [0] * self.nvars
        for v in multi_index:
            e[v] += 1
        t = tables(self.nvars, self.order)
        i = t.index[tuple(e)]
        return self.coef[..., i] * t.factorial[i]

    def gradient(self) -> np.ndarray:
        """First partials, shape ``self.shape + (nvars,)``."""
        return np.stack([self.partial((k,)) for k in range(self.nvars)], axis=-1)

    # -- arithmetic --------------------------------------------------------
    def _align(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, None

    def __neg__(self):
        return Jet(-self.coef, self.nvars, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._align(other)
        if b is not None:
            return Jet(a.coef + b.coef, a.nvars, a.order)
        other = np.asarray(other)
        coef = np.array(np.broadcast_to(a.coef, np.broadcast_shapes(a.coef.shape, other.shape + (1,))))
        coef[..., 0] += other
        return Jet(coef, a.nvars, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._align(other)
        if b is None:
            return Jet(a.coef * np.asarray(other)[..., None], a.nvars, a.order)
        t = tables(a.nvars, a.order)
        prod = a.coef[..., t.mul_a] * b.coef[..., t.mul_b]
        return Jet(np.add.reduceat(prod, t.mul_starts, axis=-1), a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(np.abs(other) < TINY):
            raise DomainError("division by zero")
        return Jet(self.coef / other[..., None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, r):
        if isinstance(r, Jet):
            raise TypeError("jet exponents are not supported")
        if float(r).is_integer() and r >= 0:
            return self._ipow(int(r))
        return self._series(_power_derivs(float(r)), name="power")

    def _ipow(self, k: int) -> "Jet":
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        if result is None:
            return Jet.constant(np.ones(self.shape), self.nvars, self.order)
        return result

    # -- elementary functions ---------------------------------------------
    def _series(self, derivs, name: str) -> "Jet":
        """f(u) = sum_k f^(k)(u0)/k! (u-u0)^k, with derivs(u0, d) -> list."""
        u0 = self.value
        ds = derivs(u0, self.order, name)
        du = self.copy()
        du.coef[..., 0] = 0.0
        out = Jet.constant(ds[0], self.nvars, self.order)
        power = du
        for k in range(1, self.order + 1):
            out = out + power * (ds[k] / math.factorial(k))
            if k < self.order:
                power = power * du
        return out

    def exp(self):
        return self._series(lambda u0, d, _: [np.exp(u0)] * (d + 1), "exp")

    def log(self):
        return self._series(_log_derivs, "log")

    def sin(self):
        def derivs(u0, d, _):
            cyc = [np.sin(u0), np.cos(u0), -np.sin(u0), -np.cos(u0)]
            return [cyc[k % 4] for k in range(d + 1)]

        return self._series(derivs, "sin")

    def cos(self):
        def derivs(u0, d, _):
            cyc = [np.cos(u0), -np.sin(u0), -np.cos(u0), np.sin(u0)]
            return [cyc[k % 4] for k in range(d + 1)]

        return self._series(derivs, "cos")

    def sqrt(self):
        return self._series(_power_derivs(0.5), "sqrt")

    def reciprocal(self):
        return self._series(_power_derivs(-1.0), "reciprocal")


def _log_derivs(u0, d, name):
    if np.any(u0 <= 0):
        raise DomainError("log of a nonpositive value")
    out = [np.log(u0)]
    for k in range(1, d + 1):
        out.append((-1) ** (k - 1) * math.factorial(k - 1) / u0**k)
    return out


def _power_derivs(r: float):
    integer = float(r).is_integer()

    def derivs(u0, d, name):
        if integer:
            if r < 0 and np.any(np.abs(u0) < TINY):
                raise DomainError(f"{name} of zero")
        elif np.any(u0 < 0) or (d > 0 and np.any(u0 <= 0)):
            raise DomainError(f"{name} of a nonpositive value")
        out = []
        coeff = 1.0
        for k in range(d + 1):
            out.append(coeff * u0 ** (r - k))
            coeff *= r - k
        return out

    return derivs


# -- scalar dispatch --------------------------------------------------------
# Plain floats go through ``math`` (fast path for evaluation loops), arrays
# through numpy, jets through their own methods.


def _check_array(cond, message):
    if np.any(cond):
        raise DomainError(message)


def exp(v):
    if isinstance(v, Jet):
        return v.exp()
    if isinstance(v, float):
        try:
            return math.exp(v)
        except OverflowError as e:
            raise DomainError("exp overflow") from e
    return np.exp(v)


def log(v):
    if isinstance(v, Jet):
        return v.log()
    if isinstance(v, (float, int)):
        if v <= 0:
            raise DomainError("log of a nonpositive value")
        return math.log(v)
    _check_array(np.asarray(v) <= 0, "log of a nonpositive value")
    return np.log(v)


def sin(v):
    if isinstance(v, Jet):
        return v.sin()
    if isinstance(v, float):
        return math.sin(v)
    return np.sin(v)


def cos(v):
    if isinstance(v, Jet):
        return v.cos()
    if isinstance(v, float):
        return math.cos(v)
    return np.cos(v)


def sqrt(v):
    if isinstance(v, Jet):
        return v.sqrt()
    if isinstance(v, (float, int)):
        if v < 0:
            raise DomainError("sqrt of a negative value")
        return math.sqrt(v)
    _check_array(np.asarray(v) < 0, "sqrt of a negative value")
    return np.sqrt(v)


def power(v, r):
    if isinstance(v, Jet):
        return v ** r
    if float(r).is_integer():
        if r < 0:
            _check_array(np.abs(np.asarray(v, dtype=float)) < TINY, "negative power of zero")
        return v ** int(r)
    _check_array(np.asarray(v) < 0, "fractional power of a negative value")
    return v ** r


def divide(a, b):
    if isinstance(b, Jet) or isinstance(a, Jet):
        return a / b
    if isinstance(b, (float, int)):
        if abs(b) < TINY:
            raise DomainError("division by zero")
        return a / b
    _check_array(np.abs(np.asarray(b)) < TINY, "division by zero")
    return a / b


FUNCTIONS = {"exp": exp, "log": log, "sin": sin, "cos": cos, "sqrt": sqrt}


# -- jet matrix helpers -----------------------------------------------------


def matmul(a, b):
    """Matrix-matrix or matrix-vector product; either factor may be a jet."""
    if not (isinstance(a, Jet) or isinstance(b, Jet)):
        return np.asarray(a) @ np.asarray(b)
    if not isinstance(a, Jet):
        a = np.asarray(a)
    if not isinstance(b, Jet):
        b = np.asarray(b)
    if len(b.shape) == 1:
        return (a * b[None, :]).sum(axis=1)
    return (a[:, :, None] * b[None, :, :]).sum(axis=1)


def inverse(mat: Jet) -> Jet:
    """Inverse of a square jet matrix via a terminating Neumann series."""
    a0 = np.asarray(mat.value)
    a0inv = np.linalg.inv(a0)
    e = mat - a0
    step = -matmul(a0inv, e)
    term = Jet.constant(a0inv, mat.nvars, mat.order)
    out = term
    for _ in range(mat.order):
        term = matmul(step, term)
        out = out + term
    return out
