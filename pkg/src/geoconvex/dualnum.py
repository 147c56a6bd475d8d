"""Forward-mode differentiation with dual scalars.

``Dual`` carries a value and a gradient row (first order); ``Dual2`` also
carries a Hessian block (second order, the collected form of dual-over-dual
arithmetic).  Scalar fields written with ordinary Python arithmetic and the
math functions below evaluate unchanged on floats, ``Dual`` or ``Dual2``
inputs, which is how metric components and defining functions get exact
derivatives without symbolic machinery.

Central-difference helpers are provided as the fallback derivative mode for
black-box component functions.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Dual",
    "Dual2",
    "seed_dual",
    "seed_dual2",
    "value_of",
    "grad_of",
    "hess_of",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "sinh",
    "cosh",
    "tanh",
    "arctan",
    "central_jacobian",
    "central_hessian",
]


class Dual:
    """First-order dual scalar: value + gradient with respect to seed directions."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.grad * other.val + other.grad * self.val)
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            val = self.val / other.val
            return Dual(val, (self.grad - val * other.grad) / other.val)
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        val = other / self.val
        return Dual(val, -val / self.val * self.grad)

    def __pow__(self, n):
        if isinstance(n, Dual):
            return exp(n * log(self))
        if n == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        return Dual(self.val**n, n * self.val ** (n - 1) * self.grad)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __abs__(self):
        s = 1.0 if self.val >= 0.0 else -1.0
        return Dual(abs(self.val), s * self.grad)

    # comparisons act on the value part (branching in field definitions)
    def __lt__(self, other):
        return self.val < _val(other)

    def __le__(self, other):
        return self.val <= _val(other)

    def __gt__(self, other):
        return self.val > _val(other)

    def __ge__(self, other):
        return self.val >= _val(other)

    def __float__(self):
        return self.val


class Dual2:
    """Second-order dual scalar: value, gradient and Hessian."""

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    def __repr__(self):
        return f"Dual2({self.val!r}, {self.grad!r}, {self.hess!r})"

    def __add__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        return Dual2(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.val - other.val, self.grad - other.grad, self.hess - other.hess)
        return Dual2(self.val - other, self.grad, self.hess)

    def __rsub__(self, other):
        return Dual2(other - self.val, -self.grad, -self.hess)

    def __mul__(self, other):
        if isinstance(other, Dual2):
            cross = np.outer(self.grad, other.grad)
            return Dual2(
                self.val * other.val,
                self.grad * other.val + other.grad * self.val,
                self.hess * other.val + other.hess * self.val + cross + cross.T,
            )
        return Dual2(self.val * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual2):
            val = self.val / other.val
            grad = (self.grad - val * other.grad) / other.val
            cross = np.outer(grad, other.grad)
            hess = (self.hess - val * other.hess - cross - cross.T) / other.val
            return Dual2(val, grad, hess)
        return Dual2(self.val / other, self.grad / other, self.hess / other)

    def __rtruediv__(self, other):
        return _chain2(self, other / self.val, -other / self.val**2, 2.0 * other / self.val**3)

    def __pow__(self, n):
        if isinstance(n, Dual2):
            return exp(n * log(self))
        if n == 0:
            return Dual2(1.0, np.zeros_like(self.grad), np.zeros_like(self.hess))
        return _chain2(
            self,
            self.val**n,
            n * self.val ** (n - 1),
            n * (n - 1) * self.val ** (n - 2) if n != 1 else 0.0,
        )

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def __neg__(self):
        return Dual2(-self.val, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __abs__(self):
        s = 1.0 if self.val >= 0.0 else -1.0
        return Dual2(abs(self.val), s * self.grad, s * self.hess)

    def __lt__(self, other):
        return self.val < _val(other)

    def __le__(self, other):
        return self.val <= _val(other)

    def __gt__(self, other):
        return self.val > _val(other)

    def __ge__(self, other):
        return self.val >= _val(other)

    def __float__(self):
        return self.val


def _val(x):
    return x.val if isinstance(x, (Dual, Dual2)) else x


def _chain2(u, f, df, d2f):
    """Apply a scalar function with derivatives (f, df, d2f) at u.val to a Dual2."""
    return Dual2(f, df * u.grad, df * u.hess + d2f * np.outer(u.grad, u.grad))


def _lift(fn_float, fn_d1, fn_d2):
    """Build a float/Dual/Dual2 polymorphic elementary function."""

    def wrapped(x):
        if isinstance(x, Dual):
            f, df = fn_d1(x.val)
            return Dual(f, df * x.grad)
        if isinstance(x, Dual2):
            f, df, d2f = fn_d2(x.val)
            return _chain2(x, f, df, d2f)
        return fn_float(x)

    return wrapped


sin = _lift(
    np.sin,
    lambda v: (math.sin(v), math.cos(v)),
    lambda v: (math.sin(v), math.cos(v), -math.sin(v)),
)
cos = _lift(
    np.cos,
    lambda v: (math.cos(v), -math.sin(v)),
    lambda v: (math.cos(v), -math.sin(v), -math.cos(v)),
)
tan = _lift(
    np.tan,
    lambda v: (math.tan(v), 1.0 / math.cos(v) ** 2),
    lambda v: (math.tan(v), 1.0 / math.cos(v) ** 2, 2.0 * math.tan(v) / math.cos(v) ** 2),
)
exp = _lift(
    np.exp,
    lambda v: (math.exp(v),) * 2,
    lambda v: (math.exp(v),) * 3,
)
log = _lift(
    np.log,
    lambda v: (math.log(v), 1.0 / v),
    lambda v: (math.log(v), 1.0 / v, -1.0 / v**2),
)
sqrt = _lift(
    np.sqrt,
    lambda v: (math.sqrt(v), 0.5 / math.sqrt(v)),
    lambda v: (math.sqrt(v), 0.5 / math.sqrt(v), -0.25 / math.sqrt(v) ** 3),
)
sinh = _lift(
    np.sinh,
    lambda v: (math.sinh(v), math.cosh(v)),
    lambda v: (math.sinh(v), math.cosh(v), math.sinh(v)),
)
cosh = _lift(
    np.cosh,
    lambda v: (math.cosh(v), math.sinh(v)),
    lambda v: (math.cosh(v), math.sinh(v), math.cosh(v)),
)
tanh = _lift(
    np.tanh,
    lambda v: (math.tanh(v), 1.0 - math.tanh(v) ** 2),
    lambda v: (
        math.tanh(v),
        1.0 - math.tanh(v) ** 2,
        -2.0 * math.tanh(v) * (1.0 - math.tanh(v) ** 2),
    ),
)
arctan = _lift(
    np.arctan,
    lambda v: (math.atan(v), 1.0 / (1.0 + v**2)),
    lambda v: (math.atan(v), 1.0 / (1.0 + v**2), -2.0 * v / (1.0 + v**2) ** 2),
)


_EYE_CACHE: dict[int, np.ndarray] = {}


def _eye(m):
    if m not in _EYE_CACHE:
        _EYE_CACHE[m] = np.eye(m)
    return _EYE_CACHE[m]


def seed_dual(x):
    """Coordinates of x as Dual scalars seeded with the identity directions."""
    x = np.asarray(x, dtype=float)
    eye = _eye(x.size)
    return [Dual(x[i], eye[i]) for i in range(x.size)]


def seed_dual2(x):
    """Coordinates of x as second-order duals (zero initial Hessians)."""
    x = np.asarray(x, dtype=float)
    m = x.size
    eye = _eye(m)
    zero = np.zeros((m, m))
    return [Dual2(x[i], eye[i], zero) for i in range(m)]


def value_of(entry):
    return entry.val if isinstance(entry, (Dual, Dual2)) else float(entry)


def grad_of(entry, m):
    if isinstance(entry, (Dual, Dual2)):
        return entry.grad
    return np.zeros(m)


def hess_of(entry, m):
    if isinstance(entry, Dual2):
        return entry.hess
    return np.zeros((m, m))


def central_jacobian(fn, x, rel_step=1e-5):
    """First partials of a matrix-valued fn by central differences.

    Returns (value, d) with d[k] = d fn / d x^k; steps are rel_step*(1+|x_k|).
    """
    x = np.asarray(x, dtype=float)
    m = x.size
    value = np.asarray(fn(x), dtype=float)
    d = np.empty((m,) + value.shape)
    for k in range(m):
        h = rel_step * (1.0 + abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        d[k] = (np.asarray(fn(xp), float) - np.asarray(fn(xm), float)) / (2.0 * h)
    return value, d


def central_hessian(fn, x, rel_step=5e-5):
    """Value, gradient and Hessian of a scalar fn by central differences."""
    x = np.asarray(x, dtype=float)
    m = x.size
    f0 = float(fn(x))
    grad = np.empty(m)
    hess = np.empty((m, m))
    steps = rel_step * (1.0 + np.abs(x))
    for i in range(m):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        fp, fm = float(fn(xp)), float(fn(xm))
        grad[i] = (fp - fm) / (2.0 * steps[i])
        hess[i, i] = (fp - 2.0 * f0 + fm) / steps[i] ** 2
    for i in range(m):
        for j in range(i + 1, m):
            xpp = x.copy()
            xpm = x.copy()
            xmp = x.copy()
            xmm = x.copy()
            xpp[[i, j]] += [steps[i], steps[j]]
            xpm[i] += steps[i]
            xpm[j] -= steps[j]
            xmp[i] -= steps[i]
            xmp[j] += steps[j]
            xmm[[i, j]] -= [steps[i], steps[j]]
            hess[i, j] = hess[j, i] = (
                float(fn(xpp)) - float(fn(xpm)) - float(fn(xmp)) + float(fn(xmm))
            ) / (4.0 * steps[i] * steps[j])
    return f0, grad, hess
