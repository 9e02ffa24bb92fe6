import numpy as np
import numpy.polynomial.legendre as leg
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from lk_sharp.poly_core import (
    OrthonormalPolyBasis,
    PiecewisePolynomial,
    differentiate,
    gauss_nodes,
    inner_product,
    l2_norm,
    markov_constant,
    markov_representer,
    u0_endpoint,
    u0_interior,
)

X = Polynomial([0.0, 1.0])


def pp(poly):
    return PiecewisePolynomial.from_callable_poly(poly)


# --------------------------------------------------------------------------- PiecewisePolynomial


def test_breakpoints_validated():
    with pytest.raises(ValueError):
        PiecewisePolynomial(np.array([-1.0, 0.5]), (Polynomial([1.0]),))
    with pytest.raises(ValueError):
        PiecewisePolynomial(np.array([-1.0, 0.3, 0.2, 1.0]), (Polynomial([1.0]),) * 3)
    with pytest.raises(ValueError):
        PiecewisePolynomial(np.array([-1.0, 0.0, 1.0]), (Polynomial([1.0]),))


def test_one_sided_evaluation():
    p = u0_interior(1, 0, 0.0)
    assert p.jump(0.0) == pytest.approx(-1.0, abs=1e-14)
    assert p(0.0, "right") - p(0.0, "left") == pytest.approx(-1.0, abs=1e-14)
    with pytest.raises(ValueError):
        p(0.0, "middle")


def test_reflection():
    p = u0_interior(3, 1, -0.4)
    x = np.linspace(-0.99, 0.99, 31)
    np.testing.assert_allclose(p.reflected()(x), p(-x), atol=1e-13)


# --------------------------------------------------------------------------- differentiate


def test_derivative_of_zero_is_zero():
    z = differentiate(PiecewisePolynomial.constant(0.0), 1)
    assert z.max_abs() == 0.0


def test_derivative_of_linear():
    p = pp((X - 1) / 2)
    np.testing.assert_allclose(differentiate(p, 1)(np.linspace(-1, 1, 7)), 0.5, atol=1e-15)
    assert differentiate(p, 2).max_abs() == 0.0


def test_second_derivative_matches_finite_differences():
    p = u0_endpoint(2, 1)
    d2 = differentiate(p, 2)
    h = 1e-4
    x = np.linspace(-0.9, 0.9, 10)
    fd = (p(x + h) - 2 * p(x) + p(x - h)) / h**2
    np.testing.assert_allclose(d2(x), fd, atol=1e-6)


# --------------------------------------------------------------------------- inner products


def test_inner_product_examples():
    one = PiecewisePolynomial.constant(1.0)
    assert inner_product(one, one) == pytest.approx(2.0, rel=1e-15)
    assert inner_product(pp(X), pp(X)) == pytest.approx(2 / 3, rel=1e-15)
    p = pp((1 - X) / 2)
    assert inner_product(p, p) == pytest.approx(2 / 3, rel=1e-15)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=21))
def test_quadrature_exact_to_degree_40(c):
    # ||p||^2 = sum c_n^2 * 2/(2n+1) for p in Legendre form
    p = pp(leg.Legendre(c).convert(kind=Polynomial))
    exact = float(np.sum(np.asarray(c) ** 2 * 2.0 / (2 * np.arange(len(c)) + 1)))
    if exact == 0:
        assert l2_norm(p) == 0.0
    else:
        assert inner_product(p, p) == pytest.approx(exact, rel=1e-13, abs=1e-300)


def test_inner_product_across_breakpoints():
    p = u0_interior(2, 0, 0.3)
    xs, ws = gauss_nodes(-1.0, 0.3, 20)
    xt, wt = gauss_nodes(0.3, 1.0, 20)
    ref = ws @ p(xs) ** 2 + wt @ p(xt) ** 2
    assert inner_product(p, p) == pytest.approx(ref, rel=1e-14)


# --------------------------------------------------------------------------- Markov constants


@pytest.mark.parametrize("t", [-1.0, -0.3, 0.0, 0.8, 1.0])
def test_markov_r1(t):
    assert markov_constant(1, 0, t) == pytest.approx(1 / np.sqrt(2), rel=1e-15)


@pytest.mark.parametrize("t", [-1.0, 0.2, 1.0])
def test_markov_r2_k1(t):
    assert markov_constant(2, 1, t) == pytest.approx(np.sqrt(1.5), rel=1e-15)


def test_markov_r2_k0_endpoint_brute_force(rng):
    assert markov_constant(2, 0, -1.0) == pytest.approx(np.sqrt(2.0), rel=1e-15)
    ratio = 0.0
    for a, b in rng.normal(size=(20000, 2)):
        q = a + b * X
        ratio = max(ratio, abs(q(-1.0)) / np.sqrt((q * q).integ()(1) - (q * q).integ()(-1)))
    assert ratio <= np.sqrt(2.0) * (1 + 1e-12)
    assert ratio > np.sqrt(2.0) * (1 - 1e-3)


@given(st.integers(1, 6), st.data(), st.floats(0, 1))
def test_markov_symmetric(r, data, t):
    k = data.draw(st.integers(0, r - 1))
    assert markov_constant(r, k, t) == pytest.approx(markov_constant(r, k, -t), rel=1e-13)


@pytest.mark.parametrize("r", range(1, 7))
def test_markov_sup_at_endpoints(r):
    ts = np.linspace(-1, 1, 1001)
    for k in range(r):
        vals = np.array([markov_constant(r, k, t) for t in ts])
        assert vals.max() <= vals[0] * (1 + 1e-13)
        assert vals[-1] == pytest.approx(vals[0], rel=1e-13)


@given(st.integers(1, 6), st.data(), st.floats(-1, 1))
def test_markov_representer_reproduces_derivative(r, data, t):
    k = data.draw(st.integers(0, r - 1))
    R = markov_representer(r, k, t)
    basis = OrthonormalPolyBasis(r)
    for n in range(r):
        q = basis.as_polynomial(n)
        prod = (q * R).integ()
        assert prod(1) - prod(-1) == pytest.approx(q.deriv(k)(t), rel=1e-10, abs=1e-10)
    assert np.sqrt(((R * R).integ()(1) - (R * R).integ()(-1))) == pytest.approx(
        markov_constant(r, k, t), rel=1e-10)


@pytest.mark.parametrize("r,k", [(1, 1), (2, -1), (0, 0)])
def test_markov_rejects_bad_indices(r, k):
    with pytest.raises(ValueError):
        markov_constant(r, k, 0.0)


def test_markov_rejects_t_outside():
    with pytest.raises(ValueError):
        markov_constant(2, 0, 1.5)


# --------------------------------------------------------------------------- u0


def test_u0_endpoint_r1():
    p = u0_endpoint(1, 0)
    x = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(p(x), (x - 1) / 2, atol=1e-15)
    assert p(-1.0) == pytest.approx(-1.0)
    assert p(1.0) == pytest.approx(0.0, abs=1e-15)
    assert l2_norm(p.derivative(1)) == pytest.approx(1 / np.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("r", range(1, 7))
def test_u0_endpoint_boundary_data(r):
    for k in range(r):
        p = u0_endpoint(r, k)
        for s in range(r):
            target = (-1.0) ** (k - 1) if s == r - k - 1 else 0.0
            assert p.derivative(s)(-1.0) == pytest.approx(target, abs=1e-10)
            assert p.derivative(s)(1.0) == pytest.approx(0.0, abs=1e-10)
        # u0^{(r)} is the Markov representer, so its norm is M_{-1}
        assert l2_norm(p.derivative(r)) == pytest.approx(markov_constant(r, k, -1.0), rel=1e-9)


def test_u0_interior_r1_t0():
    p = u0_interior(1, 0, 0.0)
    assert p(-1.0) == pytest.approx(0.0, abs=1e-12)
    assert p(1.0) == pytest.approx(0.0, abs=1e-12)
    assert p.jump(0.0) == pytest.approx(-1.0, abs=1e-12)
    # jump -1 with continuous u': (1+x)/2 on the left, -(1-x)/2 on the right
    x = np.array([-0.5, 0.5])
    np.testing.assert_allclose(p(x), [0.25, -0.25], atol=1e-12)


@pytest.mark.parametrize("r", range(1, 6))
@pytest.mark.parametrize("t", [-0.9, -0.2, 0.0, 0.55])
def test_u0_interior_defining_conditions(r, t):
    for k in range(r):
        p = u0_interior(r, k, t)
        m = r - k - 1
        for s in range(r):
            d = p.derivative(s)
            assert abs(d(-1.0)) <= 1e-9 and abs(d(1.0)) <= 1e-9
        for s in range(2 * r):
            target = (-1.0) ** (k - 1) if s == m else 0.0
            # derivatives of order >= r - k carry no jump
            assert p.derivative(s).jump(t) == pytest.approx(target, abs=1e-9)
        # u0^{(r)} restricted to each side is of degree < r on the whole interval
        assert l2_norm(p.derivative(r)) == pytest.approx(markov_constant(r, k, t), rel=1e-8)


def test_u0_interior_rejects_endpoint():
    with pytest.raises(ValueError):
        u0_interior(2, 0, 1.0)
