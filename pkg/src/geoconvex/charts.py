"""Coordinate charts with semi-Riemannian metric fields.

A :class:`MetricChart` bundles a single coordinate chart: dimension, domain,
a component field (dual-friendly callable returning the symmetric matrix of
metric coefficients), the declared signature and the derivative mode used for
Christoffel symbols.  All operations are pure functions of their inputs;
charts are immutable and safe to share across workers.

Sign and tolerance conventions:

* the auxiliary Riemannian metric used for norms and tolerances is the chart
  Euclidean one (identity matrix in chart coordinates);
* a vector is null when |g(v,v)| <= null_tol * |v|_aux^2, with the timelike /
  spacelike sides defined by the strict inequalities;
* Lorentzian charts declare a future covector ``omega``; v is future-pointing
  iff omega . v < 0.  Charts built here declare omega = -dt so that
  increasing coordinate time is the future.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import dualnum as dm
from .errors import DegenerateMetric, OutOfDomain

__all__ = [
    "Region",
    "Box",
    "ExprRegion",
    "FuncRegion",
    "AllSpace",
    "intersect",
    "CausalClass",
    "MetricChart",
    "metric_at",
    "metric_inverse_at",
    "christoffel_at",
    "causal_class",
    "is_future_pointing",
    "aux_norm",
    "validate_chart",
    "minkowski_chart",
    "euclidean_chart",
    "polar_euclidean_chart",
    "static_spherical_chart",
    "schwarzschild_chart",
    "reissner_nordstrom_chart",
    "chart_from_config",
]


# ---------------------------------------------------------------------------
# regions


class Region:
    """Predicate over coordinate points, with optional sampling bounds."""

    bounds: Optional[tuple[np.ndarray, np.ndarray]] = None

    def contains(self, x) -> bool:  # pragma: no cover - interface
        raise NotImplementedError


class AllSpace(Region):
    def contains(self, x):
        return True

    def __repr__(self):
        return "AllSpace()"


class Box(Region):
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.bounds = (self.lo, self.hi)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x > self.lo) and np.all(x < self.hi))

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"


class FuncRegion(Region):
    def __init__(self, fn, bounds=None, label=""):
        self._fn = fn
        self.label = label
        if bounds is not None:
            bounds = (np.asarray(bounds[0], float), np.asarray(bounds[1], float))
        self.bounds = bounds

    def contains(self, x):
        return bool(self._fn(x))

    def __repr__(self):
        return f"FuncRegion({self.label or self._fn!r})"


class ExprRegion(FuncRegion):
    def __init__(self, expr, coord_names, bounds=None, params=None):
        from .expressions import compile_predicate

        super().__init__(compile_predicate(expr, coord_names, params), bounds, label=expr)
        self.expression = expr


def intersect(*regions):
    bounds = None
    for r in regions:
        if r.bounds is not None:
            if bounds is None:
                bounds = (r.bounds[0].copy(), r.bounds[1].copy())
            else:
                bounds = (np.maximum(bounds[0], r.bounds[0]), np.minimum(bounds[1], r.bounds[1]))
    return FuncRegion(
        lambda x: all(r.contains(x) for r in regions),
        bounds,
        label=" & ".join(repr(r) for r in regions),
    )


# ---------------------------------------------------------------------------
# causal classification


class CausalClass(enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"
    ZERO_VECTOR = "zero_vector"


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart carrying a semi-Riemannian metric component field."""

    dim: int
    components: Callable
    domain: Region
    signature: tuple[int, ...]
    coord_names: tuple[str, ...]
    derivative_mode: str = "dual_number"  # or "central_difference"
    fd_step: float = 1e-5
    null_tol: float = 1e-9
    time_orientation: Optional[tuple[float, ...]] = None  # future covector
    constant_metric: bool = False
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.signature) != self.dim:
            raise ValueError("signature length must equal dim")
        if len(self.coord_names) != self.dim:
            raise ValueError("coord_names length must equal dim")
        if self.derivative_mode not in ("dual_number", "central_difference"):
            raise ValueError(f"unknown derivative_mode {self.derivative_mode!r}")

    @property
    def n_negative(self) -> int:
        return sum(1 for s in self.signature if s < 0)

    @property
    def is_lorentzian(self) -> bool:
        return self.n_negative == 1


def aux_norm(v) -> float:
    """Norm in the auxiliary (chart Euclidean) metric."""
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


def _degeneracy_tol(g: np.ndarray) -> float:
    scale = float(np.max(np.abs(g)))
    return 1e-12 * max(scale, 1e-300) ** g.shape[0]


def _check_domain(chart: MetricChart, x):
    if not chart.domain.contains(x):
        raise OutOfDomain(x)


def metric_at(chart: MetricChart, x, *, check_domain: bool = True) -> np.ndarray:
    """Symmetric metric matrix at x (raises on asymmetry or degeneracy)."""
    if check_domain:
        _check_domain(chart, x)
    g = np.asarray(chart.components(np.asarray(x, dtype=float)), dtype=float)
    asym = float(np.max(np.abs(g - g.T)))
    if asym > 1e-12 * max(1.0, float(np.max(np.abs(g)))):
        raise DegenerateMetric(f"metric components asymmetric by {asym:.3e} at {x}")
    g = 0.5 * (g + g.T)
    if abs(np.linalg.det(g)) <= _degeneracy_tol(g):
        raise DegenerateMetric(f"metric degenerate at {x}")
    return g


def metric_inverse_at(chart: MetricChart, x, *, check_domain: bool = True) -> np.ndarray:
    return np.linalg.inv(metric_at(chart, x, check_domain=check_domain))


def _metric_value_and_partials(chart: MetricChart, x):
    """(g, dg) with dg[k, i, j] = d g_ij / d x^k, per the chart derivative mode."""
    x = np.asarray(x, dtype=float)
    m = chart.dim
    if chart.constant_metric:
        return metric_at(chart, x, check_domain=False), np.zeros((m, m, m))
    if chart.derivative_mode == "central_difference":
        g, dg = dm.central_jacobian(
            lambda p: np.asarray(chart.components(p), dtype=float), x, chart.fd_step
        )
        return g, dg
    seeds = dm.seed_dual(x)
    rows = chart.components(seeds)
    g = np.empty((m, m))
    dg = np.empty((m, m, m))
    for i in range(m):
        for j in range(m):
            e = rows[i][j]
            g[i, j] = dm.value_of(e)
            dg[:, i, j] = dm.grad_of(e, m)
    return g, dg


def christoffel_at(chart: MetricChart, x, *, check_domain: bool = True) -> np.ndarray:
    """Christoffel symbols Gamma[l, i, j] of the Levi-Civita connection at x.

    Gamma^l_ij = 1/2 g^{lk} (d_i g_kj + d_j g_ki - d_k g_ij); symmetric in (i, j).
    """
    if check_domain:
        _check_domain(chart, x)
    if chart.constant_metric:
        return np.zeros((chart.dim,) * 3)
    g, dg = _metric_value_and_partials(chart, x)
    g = 0.5 * (g + g.T)
    if abs(np.linalg.det(g)) <= _degeneracy_tol(g):
        raise DegenerateMetric(f"metric degenerate at {x}")
    g_inv = np.linalg.inv(g)
    # T[k, i, j] = d_i g_kj + d_j g_ki - d_k g_ij
    t = np.einsum("ikj->kij", dg) + np.einsum("jki->kij", dg) - dg
    return 0.5 * np.einsum("lk,kij->lij", g_inv, t)


def causal_class(chart: MetricChart, x, v, *, check_domain: bool = True) -> CausalClass:
    """Classify a tangent vector as timelike / null / spacelike / zero.

    The null band is relative to the auxiliary norm: |g(v,v)| <= null_tol*|v|^2,
    which makes the classification invariant under positive rescaling of v.
    """
    if check_domain:
        _check_domain(chart, x)
    v = np.asarray(v, dtype=float)
    n = float(v @ v)
    if n == 0.0:
        return CausalClass.ZERO_VECTOR
    g = metric_at(chart, x, check_domain=False)
    q = float(v @ g @ v)
    band = chart.null_tol * n
    if q < -band:
        return CausalClass.TIMELIKE
    if q > band:
        return CausalClass.SPACELIKE
    return CausalClass.NULL


def is_future_pointing(chart: MetricChart, v, tol: float = 1e-12) -> bool:
    """Future test against the chart's declared time-orientation covector."""
    if chart.time_orientation is None:
        raise ValueError(f"chart {chart.name!r} declares no time orientation")
    omega = np.asarray(chart.time_orientation, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(omega @ v) < tol * max(1.0, aux_norm(v))


def validate_chart(chart: MetricChart, points: Sequence) -> None:
    """Check symmetry, nondegeneracy and signature count at sample points."""
    for x in points:
        g = metric_at(chart, x)
        eigs = np.linalg.eigvalsh(g)
        n_neg = int(np.sum(eigs < 0.0))
        if n_neg != chart.n_negative:
            raise DegenerateMetric(
                f"signature mismatch at {x}: {n_neg} negative eigenvalues, "
                f"declared {chart.n_negative}"
            )


# ---------------------------------------------------------------------------
# chart families


def minkowski_chart(dim: int = 4, extent: float = 100.0) -> MetricChart:
    """Flat Lorentzian chart diag(-1, 1, ..., 1); first coordinate is time."""
    eta = [[-1.0 if i == 0 and j == 0 else (1.0 if i == j else 0.0) for j in range(dim)] for i in range(dim)]
    names = ("t",) + tuple("xyzw"[: dim - 1])
    omega = (-1.0,) + (0.0,) * (dim - 1)
    return MetricChart(
        dim=dim,
        components=lambda x, _eta=eta: _eta,
        domain=Box([-extent] * dim, [extent] * dim),
        signature=(-1,) + (1,) * (dim - 1),
        coord_names=names,
        time_orientation=omega,
        constant_metric=True,
        name=f"minkowski-{dim}d",
    )


def euclidean_chart(dim: int = 3, extent: float = 100.0) -> MetricChart:
    eye = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return MetricChart(
        dim=dim,
        components=lambda x, _eye=eye: _eye,
        domain=Box([-extent] * dim, [extent] * dim),
        signature=(1,) * dim,
        coord_names=tuple("xyzw"[:dim]),
        constant_metric=True,
        name=f"euclid-{dim}d",
    )


def polar_euclidean_chart(r_min: float = 1e-3, r_max: float = 100.0) -> MetricChart:
    """Euclidean plane in polar coordinates (r, theta): g = diag(1, r^2)."""

    def comps(x):
        r = x[0]
        return [[1.0, 0.0], [0.0, r * r]]

    return MetricChart(
        dim=2,
        components=comps,
        domain=Box([r_min, -50.0], [r_max, 50.0]),
        signature=(1, 1),
        coord_names=("r", "theta"),
        name="polar-euclid",
    )


def static_spherical_chart(f_of_r, name, params, r_min, r_max, theta_margin=0.05) -> MetricChart:
    """Static spherically symmetric Lorentzian chart (t, r, theta, phi).

    ds^2 = -f(r) dt^2 + dr^2 / f(r) + r^2 dOmega^2 for a dual-friendly f.
    """

    def comps(x):
        _, r, theta = x[0], x[1], x[2]
        f = f_of_r(r)
        s = dm.sin(theta)
        return [
            [-f, 0.0, 0.0, 0.0],
            [0.0, 1.0 / f, 0.0, 0.0],
            [0.0, 0.0, r * r, 0.0],
            [0.0, 0.0, 0.0, r * r * s * s],
        ]

    return MetricChart(
        dim=4,
        components=comps,
        domain=Box(
            [-1e6, r_min, theta_margin, -50.0],
            [1e6, r_max, np.pi - theta_margin, 50.0],
        ),
        signature=(-1, 1, 1, 1),
        coord_names=("t", "r", "theta", "phi"),
        time_orientation=(-1.0, 0.0, 0.0, 0.0),
        name=name,
        params=params,
    )


def schwarzschild_chart(mass: float = 1.0, r_min: Optional[float] = None, r_max: float = 60.0) -> MetricChart:
    if r_min is None:
        r_min = 2.0 * mass * 1.02
    return static_spherical_chart(
        lambda r, _m=mass: 1.0 - 2.0 * _m / r,
        name="schwarzschild",
        params={"M": mass},
        r_min=r_min,
        r_max=r_max,
    )


def reissner_nordstrom_chart(
    mass: float = 1.0, charge: float = 0.5, r_min: Optional[float] = None, r_max: float = 60.0
) -> MetricChart:
    if r_min is None:
        # outer horizon of 1 - 2M/r + q^2/r^2, padded
        r_plus = mass + np.sqrt(mass**2 - charge**2)
        r_min = r_plus * 1.02
    return static_spherical_chart(
        lambda r, _m=mass, _q=charge: 1.0 - 2.0 * _m / r + _q * _q / (r * r),
        name="reissner-nordstrom",
        params={"M": mass, "q": charge},
        r_min=r_min,
        r_max=r_max,
    )


_FAMILIES = {
    "minkowski": lambda cfg: minkowski_chart(
        dim=int(cfg.get("dim", 4)), extent=float(cfg.get("extent", 100.0))
    ),
    "euclidean": lambda cfg: euclidean_chart(
        dim=int(cfg.get("dim", 3)), extent=float(cfg.get("extent", 100.0))
    ),
    "polar-euclid": lambda cfg: polar_euclidean_chart(
        r_min=float(cfg.get("r_min", 1e-3)), r_max=float(cfg.get("r_max", 100.0))
    ),
    "schwarzschild": lambda cfg: schwarzschild_chart(
        mass=float(cfg.get("M", 1.0)),
        r_min=cfg.get("r_min"),
        r_max=float(cfg.get("r_max", 60.0)),
    ),
    "reissner-nordstrom": lambda cfg: reissner_nordstrom_chart(
        mass=float(cfg.get("M", 1.0)),
        charge=float(cfg.get("q", 0.5)),
        r_min=cfg.get("r_min"),
        r_max=float(cfg.get("r_max", 60.0)),
    ),
}


def chart_from_config(cfg: dict) -> MetricChart:
    """Build a chart from a config mapping.

    Catalog families: {"metric": "schwarzschild", "M": 1.0}.  Custom metrics
    supply coordinate names and a matrix of expression strings:
    {"metric": "custom", "coords": ["r", "theta"],
     "components": [["1", "0"], ["0", "r**2"]],
     "domain": {"lo": [...], "hi": [...]}, "signature": [1, 1]}.
    """
    from .expressions import compile_matrix

    kind = cfg.get("metric")
    if kind in _FAMILIES:
        return _FAMILIES[kind](cfg)
    if kind != "custom":
        raise ValueError(f"unknown metric family {kind!r}")
    coords = tuple(cfg["coords"])
    entries = cfg["components"]
    params = cfg.get("params", {})
    comps = compile_matrix(entries, coords, params)
    dom_cfg = cfg.get("domain", {})
    if "expr" in dom_cfg:
        domain: Region = ExprRegion(
            dom_cfg["expr"],
            coords,
            bounds=(dom_cfg["lo"], dom_cfg["hi"]) if "lo" in dom_cfg else None,
            params=params,
        )
    elif "lo" in dom_cfg:
        domain = Box(dom_cfg["lo"], dom_cfg["hi"])
    else:
        domain = AllSpace()
    signature = tuple(int(s) for s in cfg.get("signature", (1,) * len(coords)))
    omega = cfg.get("time_orientation")
    return MetricChart(
        dim=len(coords),
        components=comps,
        domain=domain,
        signature=signature,
        coord_names=coords,
        derivative_mode=cfg.get("derivative_mode", "dual_number"),
        time_orientation=tuple(omega) if omega is not None else None,
        name=cfg.get("name", "custom"),
        params=dict(params),
    )
