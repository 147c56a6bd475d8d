"""Expression strings for metric components, defining functions and regions.

Config files and the CLI accept closed-form expressions over named coordinates
("1 - 2*M/r", "(x**2 + y**2 > 1) & (x**2 + y**2 < 4)").  The string is parsed
with :mod:`ast`, every node is checked against a whitelist, and the validated
tree is compiled to Python bytecode evaluated against dual-aware math
functions, so compiled fields differentiate exactly in dual mode.
"""

from __future__ import annotations

import ast

from . import dualnum as dm
from .errors import ExpressionError

_ALLOWED_FUNCS = {
    "sin": dm.sin,
    "cos": dm.cos,
    "tan": dm.tan,
    "exp": dm.exp,
    "log": dm.log,
    "sqrt": dm.sqrt,
    "sinh": dm.sinh,
    "cosh": dm.cosh,
    "tanh": dm.tanh,
    "arctan": dm.arctan,
    "atan": dm.arctan,
    "abs": abs,
}

_ALLOWED_CONSTANTS = {"pi": 3.141592653589793, "e": 2.718281828459045}

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.BoolOp,
    ast.Compare,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
    ast.And,
    ast.Or,
    ast.BitAnd,
    ast.BitOr,
    ast.Lt,
    ast.LtE,
    ast.Gt,
    ast.GtE,
)


def _validate(tree, names):
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(f"disallowed syntax: {type(node).__name__}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_FUNCS:
                raise ExpressionError("only whitelisted math functions may be called")
            if node.keywords:
                raise ExpressionError("keyword arguments are not allowed")
        if isinstance(node, ast.Name) and node.id not in names:
            raise ExpressionError(f"unknown name {node.id!r} in expression")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ExpressionError("only numeric literals are allowed")


def compile_scalar(expr, coord_names, params=None):
    """Compile an expression string into ``f(point) -> scalar``.

    ``point`` is an indexable of coordinate values (floats or duals) matching
    ``coord_names``; ``params`` supplies extra named constants.
    """
    params = dict(params or {})
    names = set(coord_names) | set(params) | set(_ALLOWED_FUNCS) | set(_ALLOWED_CONSTANTS)
    if isinstance(expr, (int, float)):
        const = float(expr)
        return lambda point: const
    tree = ast.parse(str(expr), mode="eval")
    _validate(tree, names)
    code = compile(tree, f"<expr {expr!r}>", "eval")
    env = {"__builtins__": {}}
    env.update(_ALLOWED_FUNCS)
    env.update(_ALLOWED_CONSTANTS)
    env.update(params)
    idx = {name: i for i, name in enumerate(coord_names)}

    def field(point, _code=code, _env=env, _idx=idx):
        local = {name: point[i] for name, i in _idx.items()}
        return eval(_code, _env, local)

    field.expression = str(expr)
    return field


def compile_matrix(entries, coord_names, params=None):
    """Compile a nested list of expression strings into ``f(point) -> matrix``."""
    rows = [[compile_scalar(e, coord_names, params) for e in row] for row in entries]

    def matrix_field(point, _rows=rows):
        return [[f(point) for f in row] for row in _rows]

    matrix_field.expressions = [[str(e) for e in row] for row in entries]
    return matrix_field


def compile_predicate(expr, coord_names, params=None):
    """Compile a boolean expression string into ``f(point) -> bool``."""
    scalar = compile_scalar(expr, coord_names, params)

    def predicate(point, _scalar=scalar):
        return bool(_scalar(point))

    predicate.expression = str(expr)
    return predicate
