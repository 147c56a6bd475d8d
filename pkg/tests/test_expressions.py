import numpy as np
import pytest

from geoconvex import dualnum as dm
from geoconvex.errors import ExpressionError
from geoconvex.expressions import compile_matrix, compile_predicate, compile_scalar


def test_scalar_eval_and_params():
    f = compile_scalar("1 - 2*M/r", ("t", "r"), {"M": 1.0})
    assert f([0.0, 4.0]) == pytest.approx(0.5)


def test_scalar_dual_gradient():
    f = compile_scalar("sin(x) * y + x**2", ("x", "y"))
    out = f(dm.seed_dual([0.3, 2.0]))
    np.testing.assert_allclose(
        out.grad, [np.cos(0.3) * 2 + 0.6, np.sin(0.3)], rtol=1e-14
    )


def test_matrix_field():
    comps = compile_matrix([["1", "0"], ["0", "r**2"]], ("r", "theta"))
    g = np.asarray(comps([2.0, 0.1]), dtype=float)
    np.testing.assert_allclose(g, [[1, 0], [0, 4]])


def test_predicate_with_comparisons():
    pred = compile_predicate("(x**2 + y**2 > 1) & (x**2 + y**2 < 4)", ("x", "y"))
    assert pred([1.5, 0.0])
    assert not pred([0.5, 0.0])
    assert not pred([2.5, 0.0])


def test_constants_and_functions():
    f = compile_scalar("sqrt(exp(0.0)) + cos(pi)", ())
    assert f(()) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "bad",
    [
        "__import__('os').system('true')",
        "x.real",
        "(lambda: 1)()",
        "[1,2][0]",
        "open('f')",
        "unknown_name + 1",
        "'str'",
    ],
)
def test_rejects_disallowed_syntax(bad):
    with pytest.raises(ExpressionError):
        compile_scalar(bad, ("x",))


def test_numeric_literal_shortcut():
    f = compile_scalar(2.5, ("x",))
    assert f([100.0]) == 2.5
