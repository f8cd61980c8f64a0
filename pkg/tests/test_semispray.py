import numpy as np
import pytest

from t2geom import registry
from t2geom.jets import Jet2Point
from t2geom.lagrangian import ExpressionLagrangian, metric_tensor, omega2, theta1, theta2
from t2geom.semispray import (
    apply_S,
    apply_S2,
    js_equals_c2,
    lie_omega2_equals_omega1,
    lie_theta2,
    lie_theta2_general,
    semispray_identity_residuals,
    s_c1_minus_c2,
    semispray_coeffs,
    semispray_vector,
    sl2_residual,
    solve_G_from_lie,
    lie_theta_residual,
    verify_isomega,
)

CASES = registry.cases()
IDS = [f"{L.name}{L.n}" for L in CASES]
flat1 = registry.builtin("flat", 1)
conf = registry.builtin("conformal1d")


def P(x, y1, y2):
    return Jet2Point([x], [y1], [y2])


def test_flat_G_vanishes():
    for p in registry.builtin("flat", 2).sample_points(5):
        assert not semispray_coeffs(registry.builtin("flat", 2), p).G.any()


@pytest.mark.parametrize("p,G", [(P(0, 1, 0), 1 / 6), (P(0, 2, 1), 10 / 3)])
def test_conformal_G(p, G):
    assert semispray_coeffs(conf, p).G[0] == pytest.approx(G, rel=1e-14)


def test_semispray_vectors():
    assert semispray_vector(flat1, P(0, 1, 1)).components().tolist() == [1.0, 2.0, 0.0]
    assert semispray_vector(conf, P(0, 1, 0)).components() == pytest.approx([1.0, 0.0, -0.5])


def test_quartic_expression_G():
    L = ExpressionLagrangian.parse("y2_1^2 + y1_1^4", 1)
    assert semispray_coeffs(L, P(0, 1, 1)).G[0] == pytest.approx(-2 / 3)


def test_apply_S_on_coordinates():
    p = P(0.3, 0.7, -0.2)
    x = lambda x, y1, y2: x[0]
    assert apply_S(flat1, x, p) == pytest.approx(0.7)
    assert apply_S2(flat1, x, p) == pytest.approx(-0.4)
    assert apply_S(flat1, lambda x, y1, y2: y2[0], p) == 0.0


def test_apply_S2_matches_nested_difference():
    # S²(f) = d²/dt² f along the flow: compare with the flow expansion
    L = registry.builtin("warped1d")
    f = lambda x, y1, y2: x[0] * y1[0] + y2[0] ** 2
    p = P(0.2, 0.5, -0.3)
    Sf_at = lambda q: apply_S(L, f, q)
    v = semispray_vector(L, p).components()
    h = 1e-5
    fd = (Sf_at(Jet2Point.from_array(p.as_array() + h * v)) - Sf_at(Jet2Point.from_array(p.as_array() - h * v))) / (2 * h)
    assert apply_S2(L, f, p) == pytest.approx(fd, rel=1e-7)


def test_lie_theta2_flat():
    p = P(0, 1, 1)
    assert lie_theta2(flat1, p).components().tolist() == [0.0, 2.0, 0.0]
    assert theta1(flat1, p).components().tolist() == [0.0, 2.0, 0.0]


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_lie_theta2_equals_theta1(L):
    for p in L.sample_points(10, seed=1):
        assert np.abs(lie_theta2(L, p).components() - theta1(L, p).components()).max() <= 1e-10
        assert lie_theta_residual(L, p) <= 1e-10


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_perturbed_G_linear_response(L):
    eps = 1e-3
    p = L.sample_points(1, seed=2)[0]
    e = np.zeros(L.n)
    e[0] = eps
    G = semispray_coeffs(L, p).G
    diff = lie_theta2(L, p, G + e).ax - theta1(L, p).ax
    assert diff == pytest.approx(-6.0 * metric_tensor(L, p).g @ e, abs=1e-9)
    # the general component formula agrees with the local one under the shift
    assert lie_theta2_general(L, p, e)[: L.n] == pytest.approx(lie_theta2(L, p, G + e).ax, abs=1e-12)


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_uniqueness_recovers_G(L):
    for p in L.sample_points(3, seed=4):
        assert solve_G_from_lie(L, p) == pytest.approx(semispray_coeffs(L, p).G, abs=1e-10)


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_isomega_consequences(L):
    for p in L.sample_points(10, seed=5):
        assert verify_isomega(L, p) <= 1e-10
        assert lie_omega2_equals_omega1(L, p) <= 1e-9
        assert s_c1_minus_c2(L, p) == pytest.approx(0.0, abs=1e-10)
        assert sl2_residual(L, p) <= 1e-10
        assert js_equals_c2(L, p) == 0.0
        S = semispray_vector(L, p)
        assert abs(omega2(L, p)(S, S)) <= 1e-14


def test_flat_isomega_exact():
    for p in flat1.sample_points(5):
        assert verify_isomega(flat1, p) <= 1e-15


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_semispray_identities(L):
    for p in L.sample_points(10, seed=6):
        r = semispray_identity_residuals(L, p)
        assert max(r.values()) <= 1e-10, r


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_theta_pairings_with_S(L):
    from t2geom.jets import liouville_C1, liouville_C2
    from t2geom.lagrangian import differential

    for p in L.sample_points(5, seed=7):
        S = semispray_vector(L, p)
        dL = differential(L, p)
        assert theta1(L, p)(S) == pytest.approx(dL(liouville_C2(p)), abs=1e-12)
        assert theta2(L, p)(S) == pytest.approx(dL(liouville_C1(p)), abs=1e-12)


@pytest.mark.parametrize("L", CASES, ids=IDS)
def test_perturbation_is_detected(L):
    p = L.sample_points(1, seed=9)[0]
    e = np.zeros(L.n)
    e[0] = 1e-3
    assert lie_theta_residual(L, p, e) > 1e-5
    assert verify_isomega(L, p, e) > 1e-5
    shift = lambda x, y1, y2: [(1.0 + w) * 1e-2 for w in y2]
    assert lie_omega2_equals_omega1(L, p, shift) >= 1e-4
    # these identities hold for every semispray, not just the canonical one
    assert max(semispray_identity_residuals(L, p, e).values()) <= 1e-10
