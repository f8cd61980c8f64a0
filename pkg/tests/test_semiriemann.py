import numpy as np
import pytest

from t2geom import registry
from t2geom.connection import connection
from t2geom.errors import SingularMetric
from t2geom.jets import Diffeo2, Jet2Point, jet_transform
from t2geom.semiriemann import (
    SemiRiemannianSpec,
    christoffel_derivative,
    christoffels,
    closed_form_G,
    closed_form_N1,
    conformal1d,
    diag_exp,
    euclidean,
    lagrangian_L1,
    lagrangian_L2,
    polar2d,
    pullback_metric,
    z2,
)
from t2geom.semispray import semispray_coeffs

rng = np.random.default_rng(1)


def test_euclidean_christoffels_vanish():
    assert not christoffels(euclidean(3), rng.normal(size=3)).any()


def test_conformal_christoffel():
    assert christoffels(conformal1d(), [0.37])[0, 0, 0] == pytest.approx(1.0)


def test_polar_christoffels():
    r = 1.7
    gam = christoffels(polar2d(), [r, 0.2])
    assert gam[0, 1, 1] == pytest.approx(-r)
    assert gam[1, 0, 1] == pytest.approx(1 / r) and gam[1, 1, 0] == pytest.approx(1 / r)


def test_symmetry_for_random_metric():
    spec = SemiRiemannianSpec(
        "rand", 3,
        (("2 + sin(x_1)", "x_2/5", "0.1*x_3"), ("x_2/5", "3 + x_1^2/4", "cos(x_2)/4"), ("0.1*x_3", "cos(x_2)/4", "exp(x_3/3)")),
    )
    for _ in range(5):
        gam = christoffels(spec, rng.uniform(-1, 1, 3))
        assert np.array_equal(gam, np.swapaxes(gam, 1, 2)) or np.abs(gam - np.swapaxes(gam, 1, 2)).max() < 1e-15


def test_christoffel_derivative_matches_differences():
    spec = polar2d()
    x = np.array([1.3, 0.4])
    d = christoffel_derivative(spec, x)
    h = 1e-6
    for m in range(2):
        e = np.zeros(2)
        e[m] = h
        fd = (christoffels(spec, x + e) - christoffels(spec, x - e)) / (2 * h)
        assert d[m] == pytest.approx(fd, abs=1e-8)


def test_z2_values():
    p = Jet2Point([0.1, 0.2], [0.3, 0.4], [0.5, 0.6])
    assert z2(euclidean(2), p) == pytest.approx(p.y2)
    assert z2(conformal1d(), Jet2Point([0.0], [2.0], [1.0]))[0] == pytest.approx(3.0)


def test_L2_flat_value():
    L = lagrangian_L2(euclidean(2))
    assert L.value(Jet2Point([0.0, 0.0], [0.3, 0.1], [1.0, 2.0])) == pytest.approx(5.0)


def test_L1_energy():
    L1 = lagrangian_L1(diag_exp(2))
    assert L1([0.5, 0.0], [1.0, 2.0]) == pytest.approx(np.exp(1.0) + 4.0)


@pytest.mark.parametrize("name,n", [("conformal1d", 1), ("diag-exp", 2), ("polar2d", 2), ("flat", 2)])
def test_closed_forms(name, n):
    L = registry.builtin(name, n)
    spec = L.metric_spec
    for p in L.sample_points(20, seed=2):
        assert semispray_coeffs(L, p).G == pytest.approx(closed_form_G(spec, p), abs=1e-10)
        assert connection(L, p).N1 == pytest.approx(closed_form_N1(spec, p), abs=1e-10)


def test_closed_form_examples():
    p = Jet2Point([0.0], [1.0], [0.0])
    assert closed_form_G(conformal1d(), p)[0] == pytest.approx(1 / 6)
    assert closed_form_N1(conformal1d(), p)[0, 0] == pytest.approx(1.0)
    flat = Jet2Point([0.4], [1.0], [2.0])
    assert not closed_form_G(euclidean(1), flat).any() and not closed_form_N1(euclidean(1), flat).any()


def test_singular_metric():
    with pytest.raises(SingularMetric):
        christoffels(polar2d(), [0.0, 0.3])


def test_spec_validation():
    with pytest.raises(ValueError):
        SemiRiemannianSpec("bad", 2, (("1", "x_1"), ("0", "1")))
    with pytest.raises(ValueError):
        SemiRiemannianSpec("bad", 1, (("y1_1",),))
    with pytest.raises(ValueError):
        SemiRiemannianSpec("bad", 2, (("1",),))


@pytest.mark.parametrize(
    "spec,phi",
    [
        (conformal1d(), ["x_1 + x_1^3/10"]),
        (diag_exp(2), ["x_1 + x_2^2/5", "x_2 + sin(x_1)/3"]),
        (polar2d(), ["x_1 + x_2^2/10", "x_2 + x_1/4"]),
    ],
)
def test_z2_is_a_d_vector(spec, phi):
    phi = Diffeo2(phi)
    pulled = pullback_metric(spec, phi)
    lo = np.array([0.8, -0.5][: spec.n])
    for _ in range(10):
        x = lo + rng.uniform(0, 1, spec.n)
        p = Jet2Point(x, rng.normal(size=spec.n), rng.normal(size=spec.n))
        D = phi.check_jacobian(p.x)
        assert z2(spec, jet_transform(phi, p)) == pytest.approx(D @ z2(pulled, p), abs=1e-10)
