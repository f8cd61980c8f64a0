"""Exact partial derivatives of scalar fields on T²M.

A scalar field is any callable ``f(x, y1, y2)`` written against the generic
scalar functions of :mod:`t2geom.jetscalar`; Lagrangians are scalar fields.
Coordinates are numbered ``0..3n-1`` in the order x, y1, y2.
"""
from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .jets import Jet2Point
from .jetscalar import Jet

MAX_ORDER = 4

BLOCKS = ("x", "y1", "y2")

# Finite-difference oracle settings.
FD_STEP = 1e-2
FD_LEVELS = 3  # h, h/2, h/4 -> two Richardson extrapolations

_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def coord_index(name: str, n: int) -> int:
    """``"y2_1"`` -> flat coordinate index."""
    kind, idx = name.split("_")
    i = int(idx)
    if kind not in BLOCKS or not 1 <= i <= n:
        raise ValueError(f"unknown coordinate {name!r} for n={n}")
    return BLOCKS.index(kind) * n + i - 1


def coord_name(k: int, n: int) -> str:
    return f"{BLOCKS[k // n]}_{k % n + 1}"


def request(*names: str, n: int) -> tuple:
    """Build a partial request from coordinate names, e.g. ``request("x_1", "y2_1", n=1)``."""
    return tuple(sorted(coord_index(s, n) for s in names))


def _normalize(req: Sequence[int], n: int) -> tuple:
    req = tuple(sorted(int(k) for k in req))
    if len(req) > MAX_ORDER:
        raise ValueError(f"partial order {len(req)} exceeds {MAX_ORDER}")
    if any(k < 0 or k >= 3 * n for k in req):
        raise ValueError(f"coordinate index out of range in {req}")
    return req


def seed(p: Jet2Point, order: int, variables: Sequence[int] | None = None):
    """Coordinate arguments with the chosen coordinates promoted to jets.

    Returns ``(x, y1, y2, variables)``; unseeded coordinates stay floats.
    """
    n = p.n
    flat = p.as_array()
    if variables is None:
        variables = range(3 * n)
    variables = list(variables)
    m = len(variables)
    args = [float(v) for v in flat]
    for slot, k in enumerate(variables):
        args[k] = Jet.variable(flat[k], slot, m, order)
    return args[:n], args[n : 2 * n], args[2 * n :], variables


def taylor(f, p: Jet2Point, order: int = MAX_ORDER, variables: Sequence[int] | None = None) -> Jet:
    """Taylor expansion of ``f`` at ``p`` in the chosen coordinates."""
    x, y1, y2, variables = seed(p, order, variables)
    out = f(x, y1, y2)
    if not isinstance(out, Jet):
        out = Jet.constant(float(out), len(variables), order)
    return out


def partials(L, p: Jet2Point, requests: Iterable[Sequence[int]]) -> dict:
    """Exact partial derivatives of ``L`` at ``p``.

    Each request is a tuple of coordinate indices (repetition allowed).
    Only the coordinates that appear in some request are seeded.
    """
    reqs = [_normalize(r, p.n) for r in requests]
    if not reqs:
        return {}
    variables = sorted({k for r in reqs for k in r})
    slot = {k: i for i, k in enumerate(variables)}
    order = max(len(r) for r in reqs)
    T = taylor(L, p, order, variables)
    return {r: float(T.partial(tuple(slot[k] for k in r))) for r in reqs}


def fd_oracle_partials(L, p: Jet2Point, requests: Iterable[Sequence[int]], h0: float = FD_STEP) -> dict:
    """Finite-difference estimates of partial derivatives (test oracle).

    Products of central difference stencils with step ``h0 * max(1, |coord|)``
    are evaluated at ``h, h/2, h/4`` and combined by two Richardson steps.
    Function values are computed in ``np.longdouble`` so that fourth-order
    stencils are not swamped by rounding. All stencil points for all requests
    are evaluated in a single vectorized call.
    """
    n = p.n
    base = p.as_array().astype(np.longdouble)
    scale = np.maximum(1.0, np.abs(p.as_array()))
    reqs = [_normalize(r, n) for r in requests]

    offsets, weights, owners = [], [], []
    for ri, r in enumerate(reqs):
        mult = Counter(r)
        keys = list(mult)
        for level in range(FD_LEVELS):
            h = np.longdouble(h0) / 2**level * scale
            stencils = [_STENCILS[mult[k]] for k in keys]
            for combo in itertools.product(*[list(zip(*s)) for s in stencils]):
                off = np.zeros(3 * n, dtype=np.longdouble)
                w = np.longdouble(1.0)
                for k, (o, c) in zip(keys, combo):
                    off[k] = o * h[k]
                    w *= np.longdouble(c) / h[k] ** mult[k]
                offsets.append(off)
                weights.append(w)
                owners.append((ri, level))
    pts = base[None, :] + np.array(offsets, dtype=np.longdouble)
    cols = [pts[:, k] for k in range(3 * n)]
    vals = L(cols[:n], cols[n : 2 * n], cols[2 * n :])
    vals = np.broadcast_to(np.asarray(vals, dtype=np.longdouble), (len(pts),))

    est = np.zeros((len(reqs), FD_LEVELS), dtype=np.longdouble)
    for v, w, (ri, level) in zip(vals, weights, owners):
        est[ri, level] += w * v
    r1 = (4 * est[:, 1:] - est[:, :-1]) / 3
    r2 = (16 * r1[:, 1] - r1[:, 0]) / 15
    return {r: float(v) for r, v in zip(reqs, r2)}


def fd_oracle_partial(L, p: Jet2Point, req: Sequence[int], h0: float = FD_STEP) -> float:
    return next(iter(fd_oracle_partials(L, p, [req], h0).values()))


def tulczyjew_dT(f, p: Jet2Point) -> float:
    """Total derivative y1·∂f/∂x + 2 y2·∂f/∂y1 at ``p``."""
    n = p.n
    T = taylor(f, p, 1, range(2 * n))
    grad = T.gradient()
    return float(p.y1 @ grad[:n] + 2.0 * p.y2 @ grad[n:])


def directional_derivative(f, p: Jet2Point, v) -> float:
    """Derivative of ``f`` along natural-frame components ``v`` (length 3n)."""
    T = taylor(f, p, 1)
    return float(T.gradient() @ np.asarray(v, dtype=float))


def batch_derivatives(f, points: np.ndarray):
    """Value, gradient and Hessian of ``f`` at many points at once.

    ``points`` has shape ``(Q, 3n)``. Returns arrays of shapes ``(Q,)``,
    ``(Q, 3n)`` and ``(Q, 3n, 3n)``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[1]
    if m % 3:
        raise ValueError("points must have 3n columns")
    n = m // 3
    args = [Jet.variable(pts[:, k], k, m, 2) for k in range(m)]
    T = f(args[:n], args[n : 2 * n], args[2 * n :])
    if not isinstance(T, Jet):
        T = Jet.constant(np.broadcast_to(np.asarray(T, dtype=float), (len(pts),)), m, 2)
    grad = np.stack([T.partial((k,)) for k in range(m)], axis=-1)
    hess = np.empty((len(pts), m, m))
    for a in range(m):
        for b in range(a, m):
            hess[:, a, b] = hess[:, b, a] = T.partial((a, b))
    return np.broadcast_to(T.value, (len(pts),)).copy(), grad, hess
