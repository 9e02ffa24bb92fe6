import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lk_sharp.bvp import ProblemSpec, solve
from lk_sharp.poly_core import l2_norm, u0_endpoint, u0_interior
from lk_sharp.spectral import (
    GreensKernel,
    apply_inverse,
    decompose,
    determinant_eigenvalues,
    eigen_derivative_profile,
    eigen_determinant,
    kernel_value,
    series_solution,
)

# clamped beam on [-1, 1]: cos(2w) cosh(2w) = 1, lowest root (mpmath, 20 digits)
BEAM_OMEGA = 2.365020372431352013
BEAM_LAMBDA = 31.285243858777037248
R1_B2_AT_1 = 0.44263553052570294869


@pytest.fixture(scope="module")
def decs():
    return {r: decompose(r, 40, 120) for r in (1, 2, 3, 4)}


def u0_of(r, k, t):
    return u0_endpoint(r, k) if t == -1.0 else u0_interior(r, k, t)


# --------------------------------------------------------------------------- eigenvalues


def test_r1_eigenvalues(decs):
    n = np.arange(1, 21)
    np.testing.assert_allclose(decs[1].eigenvalues[:20], np.pi**2 * n**2 / 4, rtol=1e-10)


def test_clamped_beam_root():
    assert eigen_determinant(2, BEAM_LAMBDA) == pytest.approx(0.0, abs=1e-10)
    assert BEAM_OMEGA**4 == pytest.approx(BEAM_LAMBDA, rel=1e-15)
    assert determinant_eigenvalues(2, 1)[0] == pytest.approx(BEAM_LAMBDA, rel=1e-12)
    assert decompose(2, 10).eigenvalues[0] == pytest.approx(BEAM_LAMBDA, rel=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_two_oracle_eigenvalues(r, decs):
    det = determinant_eigenvalues(r, 10)
    np.testing.assert_allclose(decs[r].eigenvalues[:10], det, rtol=1e-8)


def test_determinant_rejects_nonpositive():
    with pytest.raises(ValueError):
        eigen_determinant(2, 0.0)


def test_decompose_validation():
    with pytest.raises(ValueError):
        decompose(0, 5)
    with pytest.raises(ValueError):
        decompose(2, 0)
    with pytest.raises(ValueError):
        decompose(2, 10, 15)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_orthonormal_and_energy(r, decs):
    dec = decs[r]
    # accuracy of the eigenvectors of gamma = 1/lambda degrades like lambda_n / lambda_1,
    # reaching ~6e-10 at mode 40 for r = 4; the first 20 modes are orthonormal to 1e-10
    n = 20
    np.testing.assert_allclose(dec.inner(0)[:n, :n], np.eye(n), atol=1e-10)
    np.testing.assert_allclose(dec.inner(0), np.eye(dec.n_modes), atol=1e-8)
    E = dec.inner(r)[:n, :n] / np.sqrt(np.outer(dec.eigenvalues[:n], dec.eigenvalues[:n]))
    np.testing.assert_allclose(E, np.eye(n), atol=1e-10)
    assert np.all(np.diff(dec.eigenvalues) > 0)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_modes_are_clamped_eigenfunctions(r, decs):
    dec = decs[r]
    for n in (1, 4, 9):
        for s in range(r):
            for x in (-1.0, 1.0):
                assert abs(dec.mode_values(n, s, x)) <= 1e-8 * max(1.0, dec.eigenvalues[n - 1])
        x = np.linspace(-0.9, 0.9, 11)
        lhs = (-1.0) ** r * dec.mode_values(n, 2 * r, x)
        np.testing.assert_allclose(lhs, dec.eigenvalues[n - 1] * dec.mode_values(n, 0, x),
                                   atol=1e-6 * dec.eigenvalues[n - 1])


# --------------------------------------------------------------------------- Fourier identity, Parseval


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("t", [-1.0, 0.0, 0.5])
def test_fourier_identity(r, t, decs):
    dec = decs[r]
    for k in range(r):
        c = dec.fourier(u0_of(r, k, t))[:10]
        rhs = np.array([-dec.mode_values(n, r + k, t) / dec.eigenvalues[n - 1] for n in range(1, 11)])
        scale = np.max(np.abs(rhs))
        # relative to the coefficient scale: entries vanish by parity at t = 0
        assert np.max(np.abs(c - rhs)) <= 1e-6 * scale


@pytest.mark.parametrize("r", [1, 2, 3])
def test_parseval_monotone(r, decs):
    for k in range(r):
        for t in (-1.0, 0.3):
            u0 = u0_of(r, k, t)
            partial = np.cumsum(decs[r].fourier(u0) ** 2)
            assert np.all(np.diff(partial) >= 0)
            assert partial[-1] <= l2_norm(u0) ** 2 * (1 + 1e-12)


# --------------------------------------------------------------------------- series


def test_series_at_zero_is_u0(decs):
    u0 = u0_endpoint(2, 1)
    ser = series_solution(decs[2], u0, 0.0)
    assert ser.norm_u == pytest.approx(l2_norm(u0), rel=1e-15)
    assert ser.norm_ur == pytest.approx(l2_norm(u0.derivative(2)), rel=1e-15)
    assert np.all(ser.weights == 0)


def test_series_r1_closed_form():
    ser = series_solution(decompose(1, 200), u0_endpoint(1, 0), 1.0)
    assert ser.norm_u**2 == pytest.approx(R1_B2_AT_1, rel=1e-6)


def test_series_rejects_negative():
    with pytest.raises(ValueError):
        series_solution(decompose(1, 5), u0_endpoint(1, 0), -1.0)


@pytest.fixture(scope="module")
def dec400():
    return {r: decompose(r, 400, 800) for r in (1, 2, 3)}


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0, 100.0])
def test_series_vs_direct(r, lam, dec400):
    x = np.linspace(-1, 1, 801)
    for k in range(r):
        for t in (-1.0, 0.0, 0.5):
            ser = series_solution(dec400[r], u0_of(r, k, t), lam)
            sol = solve(ProblemSpec(r, k, t), lam)
            diff = ser(x, 0) - sol.evaluate(0, x)
            l2 = np.sqrt(np.trapezoid(diff**2, x))
            assert l2 <= 1e-5
            assert ser.norm_u == pytest.approx(sol.B, rel=1e-6)
            assert ser.norm_ur == pytest.approx(sol.A, rel=1e-6)


# --------------------------------------------------------------------------- Green's kernel


@pytest.mark.parametrize("r", [1, 2, 3])
def test_green_inverse(r, decs):
    ker = GreensKernel.build(r)
    dec = decs[r]
    x = np.linspace(-1, 1, 201)
    for n in range(1, 6):
        phi = lambda z, n=n: dec.mode_values(n, 0, z)
        got = apply_inverse(ker, phi, x)
        want = phi(x) / dec.eigenvalues[n - 1]
        err = np.sqrt(np.trapezoid((got - want) ** 2, x) / np.trapezoid(want**2, x))
        assert err <= 1e-6


@given(st.integers(1, 4), st.floats(-1, 1), st.floats(-1, 1))
def test_kernel_symmetric(r, x, xi):
    ker = GreensKernel.build(r)
    a, b = kernel_value(ker, x, xi), kernel_value(ker, xi, x)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(st.integers(1, 4), st.floats(-1, 1))
def test_kernel_clamped(r, xi):
    ker = GreensKernel.build(r)
    assert kernel_value(ker, -1.0, xi) == pytest.approx(0.0, abs=1e-12)
    assert kernel_value(ker, 1.0, xi) == pytest.approx(0.0, abs=1e-12)


def test_r1_kernel_closed_form():
    # u'' = -f, u(+-1) = 0: K(x, xi) = (1 + min)(1 - max) / 2
    ker = GreensKernel.build(1)
    for x, xi in [(-0.5, 0.25), (0.3, 0.3), (0.9, -0.1)]:
        lo, hi = min(x, xi), max(x, xi)
        assert abs(kernel_value(ker, x, xi)) == pytest.approx((1 + lo) * (1 - hi) / 2, rel=1e-12)


# --------------------------------------------------------------------------- profiles


def test_eigen_derivative_profile(decs):
    x, v = eigen_derivative_profile(decs[4], 1, 4, 101)
    assert x.shape == v.shape == (101,)
    assert x[0] == -1.0 and x[-1] == 1.0
    with pytest.raises(ValueError):
        eigen_derivative_profile(decs[4], 1, 8)
