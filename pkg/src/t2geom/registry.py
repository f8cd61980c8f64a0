"""Named built-in Lagrangians addressable from code and from CLI configs."""
from __future__ import annotations

from . import jetscalar as js
from . import semiriemann as sr
from .lagrangian import BuiltinLagrangian

POLAR_BOX = {"x": ([0.5, -1.0], [3.0, 1.0])}


def flat(n: int) -> BuiltinLagrangian:
    """sum (y2_i)^2, the L2 of the Euclidean metric."""
    def L(x, y1, y2):
        return sum(v * v for v in y2)

    return BuiltinLagrangian("flat", n, L, (("n", n),), {}, metric_spec=sr.euclidean(n))


def quartic(n: int) -> BuiltinLagrangian:
    """sum (y2_i)^2 + sum (y1_i)^4; regular but not of metric type."""
    def L(x, y1, y2):
        return sum(v * v for v in y2) + sum(js.power(v, 4) for v in y1)

    return BuiltinLagrangian("quartic", n, L, (("n", n),))


def warped1d() -> BuiltinLagrangian:
    """x-dependent, non-metric n=1 Lagrangian with ∇g ≠ 0."""
    def L(x, y1, y2):
        u, v, w = x[0], y1[0], y2[0]
        return js.exp(u) * w * w + u * v * v * w + 0.25 * js.power(v, 4)

    return BuiltinLagrangian("warped1d", 1, L)


def warped2d() -> BuiltinLagrangian:
    """Coupled n=2 Lagrangian with x-dependent metric and y1·y2 cross terms."""
    def L(x, y1, y2):
        g11 = js.exp(x[0])
        g22 = 1.0 + 0.5 * x[1] * x[1]
        return (
            g11 * y2[0] * y2[0]
            + g22 * y2[1] * y2[1]
            + 0.5 * y2[0] * y2[1]
            + y1[0] * y1[1] * y2[0]
            + x[0] * y1[1] * y2[1]
            + js.sin(x[1]) * y1[0] * y1[0]
        )

    return BuiltinLagrangian("warped2d", 2, L)


def conformal1d() -> BuiltinLagrangian:
    return sr.lagrangian_L2(sr.conformal1d())


def diag_exp(n: int = 2) -> BuiltinLagrangian:
    return sr.lagrangian_L2(sr.diag_exp(n))


def polar2d() -> BuiltinLagrangian:
    return sr.lagrangian_L2(sr.polar2d())


# name -> (factory, allowed dimensions or None for any, default n)
_FACTORIES = {
    "flat": (flat, None, 1),
    "quartic": (quartic, None, 1),
    "conformal1d": (lambda n: conformal1d(), (1,), 1),
    "diag-exp": (diag_exp, None, 2),
    "polar2d": (lambda n: polar2d(), (2,), 2),
    "warped1d": (lambda n: warped1d(), (1,), 1),
    "warped2d": (lambda n: warped2d(), (2,), 2),
}

NAMES = tuple(_FACTORIES)

# Every (name, n) pair exercised by the acceptance suite.
CASES = (
    ("flat", 1),
    ("flat", 2),
    ("quartic", 1),
    ("quartic", 2),
    ("conformal1d", 1),
    ("diag-exp", 2),
    ("polar2d", 2),
    ("warped1d", 1),
    ("warped2d", 2),
)

_cache: dict = {}


def builtin(name: str, n: int | None = None) -> BuiltinLagrangian:
    """Look up a registry Lagrangian; instances are cached so per-point caches hit."""
    if name not in _FACTORIES:
        raise KeyError(f"unknown builtin Lagrangian {name!r}; known: {', '.join(NAMES)}")
    factory, dims, default = _FACTORIES[name]
    n = default if n is None else int(n)
    if n < 1 or (dims is not None and n not in dims):
        raise ValueError(f"builtin {name!r} does not support n={n}")
    key = (name, n)
    if key not in _cache:
        _cache[key] = factory(n)
    return _cache[key]


def cases() -> list:
    return [builtin(name, n) for name, n in CASES]
