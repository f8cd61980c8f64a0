import itertools

import numpy as np
import pytest

from t2geom import registry
from t2geom.calculus import (
    batch_derivatives,
    fd_oracle_partial,
    fd_oracle_partials,
    partials,
    request,
    tulczyjew_dT,
)
from t2geom.jets import Jet2Point
from t2geom.lagrangian import ExpressionLagrangian


def P(x, y1, y2):
    return Jet2Point(np.atleast_1d(x), np.atleast_1d(y1), np.atleast_1d(y2))


def expr(src, n=1):
    return ExpressionLagrangian.parse(src, n)


def test_flat_hessian_entry():
    L = expr("y2_1^2")
    r = request("y2_1", "y2_1", n=1)
    assert partials(L, P(0.3, 1.0, -2.0), [r])[r] == 2.0


def test_conformal_third_partial():
    L = expr("exp(2*x_1)*y2_1^2")
    r = request("x_1", "y2_1", "y2_1", n=1)
    assert partials(L, P(0.0, 0.4, 0.9), [r])[r] == pytest.approx(4.0, rel=1e-15)


def test_fd_bilinear():
    L = expr("x_1*y1_1")
    assert fd_oracle_partial(L, P(0.2, 0.7, 0.0), request("x_1", "y1_1", n=1)) == pytest.approx(1.0, abs=1e-8)


def test_fd_quartic_monomial():
    L = expr("y2_1^4")
    assert fd_oracle_partial(L, P(0.0, 0.0, 1.0), (2, 2, 2, 2)) == pytest.approx(24.0, abs=1e-4)


def test_fd_matches_exact_on_flat():
    L = registry.builtin("flat", 2)
    p = P([0.1, 0.2], [0.3, -0.4], [0.5, 0.6])
    reqs = [c for k in (1, 2) for c in itertools.combinations_with_replacement(range(6), k)]
    ad, fd = partials(L, p, reqs), fd_oracle_partials(L, p, reqs)
    for r in reqs:
        assert ad[r] == pytest.approx(fd[r], abs=1e-6)


@pytest.mark.parametrize("name,n", [("warped2d", 2), ("polar2d", 2), ("conformal1d", 1)])
def test_fd_matches_exact_up_to_order4(name, n):
    L = registry.builtin(name, n)
    reqs = [c for k in range(1, 5) for c in itertools.combinations_with_replacement(range(3 * n), k)]
    for p in L.sample_points(3, seed=11):
        ad, fd = partials(L, p, reqs), fd_oracle_partials(L, p, reqs)
        for r in reqs:
            assert abs(ad[r] - fd[r]) <= 1e-6 * max(1.0, abs(fd[r])), r


def test_tulczyjew_reads_off_definition():
    p = P(2.0, 3.0, 5.0)
    assert tulczyjew_dT(lambda x, y1, y2: x[0], p) == 3.0
    assert tulczyjew_dT(lambda x, y1, y2: y1[0], p) == 10.0
    assert tulczyjew_dT(lambda x, y1, y2: x[0] * y1[0], p) == 29.0


def test_request_validation():
    with pytest.raises(ValueError):
        request("y3_1", n=1)
    with pytest.raises(ValueError):
        partials(expr("y2_1^2"), P(0, 0, 0), [(0, 0, 0, 0, 0)])


def test_batch_matches_pointwise():
    L = registry.builtin("warped2d")
    pts = L.sample_points(5, seed=2)
    val, grad, hess = batch_derivatives(L, np.array([p.as_array() for p in pts]))
    for q, p in enumerate(pts):
        assert val[q] == pytest.approx(L.value(p), rel=1e-14)
        for a in range(6):
            assert grad[q, a] == pytest.approx(partials(L, p, [(a,)])[(a,)], rel=1e-13, abs=1e-14)
            for b in range(6):
                r = tuple(sorted((a, b)))
                assert hess[q, a, b] == pytest.approx(partials(L, p, [r])[r], rel=1e-13, abs=1e-13)
