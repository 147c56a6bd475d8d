import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoconvex import dualnum as dm


def f_scalar(x, y):
    return dm.sin(x) * y + x**3 / (2.0 + dm.cos(y)) + dm.exp(0.3 * x) * dm.sqrt(y + 5.0)


def f_analytic_grad(x, y):
    dx = np.cos(x) * y + 3 * x**2 / (2 + np.cos(y)) + 0.3 * np.exp(0.3 * x) * np.sqrt(y + 5)
    dy = (
        np.sin(x)
        + x**3 * np.sin(y) / (2 + np.cos(y)) ** 2
        + np.exp(0.3 * x) * 0.5 / np.sqrt(y + 5)
    )
    return np.array([dx, dy])


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=60, deadline=None)
def test_dual_gradient_matches_analytic(x, y):
    seeds = dm.seed_dual([x, y])
    out = f_scalar(*seeds)
    np.testing.assert_allclose(out.grad, f_analytic_grad(x, y), rtol=1e-12, atol=1e-12)
    assert out.val == pytest.approx(f_scalar(x, y))


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=40, deadline=None)
def test_dual2_hessian_matches_central_difference(x, y):
    seeds = dm.seed_dual2([x, y])
    out = f_scalar(*seeds)
    _, grad_fd, hess_fd = dm.central_hessian(lambda p: f_scalar(p[0], p[1]), [x, y])
    np.testing.assert_allclose(out.grad, grad_fd, rtol=1e-5, atol=1e-5)
    np.testing.assert_allclose(out.hess, hess_fd, rtol=2e-3, atol=2e-3)
    np.testing.assert_allclose(out.hess, out.hess.T, atol=1e-14)


def test_dual_product_and_chain_rules_exact():
    (x,) = dm.seed_dual([0.7])
    out = dm.sin(x) * x**2
    assert out.grad[0] == pytest.approx(np.cos(0.7) * 0.49 + np.sin(0.7) * 1.4, abs=1e-15)
    out = 1.0 / (1.0 + x * x)
    assert out.grad[0] == pytest.approx(-2 * 0.7 / (1 + 0.49) ** 2, abs=1e-15)


def test_dual2_known_second_derivative():
    (x,) = dm.seed_dual2([0.5])
    out = dm.exp(x * x)
    # d2/dx2 exp(x^2) = (2 + 4x^2) exp(x^2)
    expected = (2 + 4 * 0.25) * np.exp(0.25)
    assert out.hess[0, 0] == pytest.approx(expected, rel=1e-14)


def test_float_passthrough():
    assert dm.sin(0.3) == pytest.approx(np.sin(0.3))
    arr = dm.cos(np.array([0.0, 1.0]))
    np.testing.assert_allclose(arr, np.cos([0.0, 1.0]))


def test_abs_and_comparisons():
    (x,) = dm.seed_dual([-1.5])
    out = abs(x)
    assert out.val == 1.5
    assert out.grad[0] == -1.0
    assert (x < 0.0) and not (x > 0.0)


def test_pow_with_dual_exponent():
    x, y = dm.seed_dual([1.3, 0.4])
    out = x**y
    val = 1.3**0.4
    np.testing.assert_allclose(
        out.grad,
        [0.4 * 1.3 ** (0.4 - 1), val * np.log(1.3)],
        rtol=1e-12,
    )


def test_central_jacobian_matrix_field():
    def comps(x):
        r = x[0]
        return [[1.0, 0.0], [0.0, r * r]]

    g, dg = dm.central_jacobian(comps, [2.0, 0.3])
    np.testing.assert_allclose(g, [[1, 0], [0, 4]], atol=1e-12)
    assert dg[0][1][1] == pytest.approx(4.0, rel=1e-8)  # d(r^2)/dr at r=2
    assert abs(dg[1]).max() == pytest.approx(0.0, abs=1e-9)
