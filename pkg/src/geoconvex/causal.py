"""Lorentzian length, causal relation, and length-maximizing geodesic search.

Inside an open region of a time-oriented Lorentzian chart, the time separation
between causally related points is estimated from below by multi-start
shooting over the future causal cone: cone directions are discretized on the
compact section { e0 + u, |u| < 1 } of a g-orthonormal frame, each start seeds
a two-point shooting solve, and the causal future-pointing solutions are
ranked by Lorentzian length.  Searches report lower bounds and convergence
diagnostics only; a sup that fails to stabilize is flagged, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .charts import MetricChart, Region, aux_norm, is_future_pointing, metric_at
from .errors import BVPNotFound, NotCausal
from .geodesics import BVPSolution, Trajectory, solve_bvp
from .surfaces import LevelSetHypersurface

__all__ = [
    "lorentzian_length",
    "CausalRelationResult",
    "causal_relation",
    "CausalSearchParams",
    "CausalSearchResult",
    "max_causal_geodesic",
]


def _causal_margins(chart: MetricChart, traj: Trajectory, tol: float):
    """Worst causality and future-pointing margins over the trajectory grid."""
    omega = np.asarray(chart.time_orientation, dtype=float)
    speed2 = np.einsum("ki,ki->k", traj.v, traj.v)
    causal_excess = traj.energy - tol * (1.0 + speed2)
    pairing = traj.v @ omega - tol * (1.0 + np.sqrt(speed2))
    return causal_excess, pairing


def lorentzian_length(chart: MetricChart, curve: Trajectory, *, causal_tol: float = 1e-9) -> float:
    """Integral of sqrt(-g(gamma', gamma')) over a causal future-pointing curve.

    The integrand is clipped at zero inside the causal tolerance band, and the
    composite quadrature runs on the curve's own parameter grid, which makes
    the value reparametrization-invariant up to quadrature error.  Raises
    :class:`NotCausal` with the worst offending grid point otherwise.
    """
    if chart.time_orientation is None:
        raise ValueError(f"chart {chart.name!r} declares no time orientation")
    causal_excess, pairing = _causal_margins(chart, curve, causal_tol)
    k_bad = int(np.argmax(causal_excess))
    if causal_excess[k_bad] > 0.0:
        raise NotCausal(k_bad, float(curve.energy[k_bad]), "curve is not causal")
    k_bad = int(np.argmax(pairing))
    if pairing[k_bad] > 0.0:
        raise NotCausal(
            k_bad, float(pairing[k_bad]), "curve is not future-pointing"
        )
    integrand = np.sqrt(np.maximum(0.0, -curve.energy))
    if len(curve.s) < 3:
        return float(np.trapezoid(integrand, curve.s))
    return float(simpson(integrand, x=curve.s))


def _constant_trajectory(chart: MetricChart, p) -> Trajectory:
    p = np.asarray(p, dtype=float)
    s = np.linspace(0.0, 1.0, 3)
    x = np.tile(p, (3, 1))
    v = np.zeros_like(x)
    return Trajectory(chart, s, x, v, np.zeros(3), "completed", 0.0)


def _segment(
    chart: MetricChart,
    omega_region: Region,
    a,
    b,
    *,
    causal_tol: float,
    bvp_tol: float,
    integrator_tol: float,
) -> Optional[BVPSolution]:
    """Future-pointing causal geodesic segment from a to b inside the region."""
    try:
        sol = solve_bvp(
            chart, a, b, region=omega_region, bvp_tol=bvp_tol, integrator_tol=integrator_tol
        )
    except BVPNotFound:
        return None
    if not sol.interior_ok:
        return None
    causal_excess, pairing = _causal_margins(chart, sol.trajectory, causal_tol)
    if float(np.max(causal_excess)) > 0.0 or float(np.max(pairing)) > 0.0:
        return None
    return sol


@dataclass
class CausalRelationResult:
    """Outcome of the causal-relation search; false is best-effort only."""

    related: bool
    witness: list[Trajectory] = field(default_factory=list)
    attempts: int = 0
    exhausted: bool = False

    def __bool__(self):
        return self.related


def causal_relation(
    chart: MetricChart,
    omega_region: Region,
    p,
    q,
    *,
    seed: int = 0,
    n_attempts: int = 64,
    causal_tol: float = 1e-9,
    bvp_tol: float = 1e-9,
    integrator_tol: float = 1e-10,
) -> CausalRelationResult:
    """Search for a future-pointing causal broken geodesic from p to q in omega.

    The direct segment is tried first, then two-segment broken curves with a
    random interior vertex.  A True answer carries the witnessing segments;
    a False answer only means the search budget ran out and is flagged so.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if not (omega_region.contains(p) and omega_region.contains(q)):
        raise ValueError("p and q must lie in the region")
    direct = _segment(
        chart, omega_region, p, q,
        causal_tol=causal_tol, bvp_tol=bvp_tol, integrator_tol=integrator_tol,
    )
    if direct is not None:
        return CausalRelationResult(True, [direct.trajectory], attempts=1)

    rng = np.random.default_rng(seed)
    center = 0.5 * (p + q)
    spread = 0.75 * (np.abs(q - p) + aux_norm(q - p))
    attempts = 1
    for _ in range(n_attempts):
        attempts += 1
        w = center + spread * (rng.random(p.size) - 0.5)
        if not (omega_region.contains(w) and chart.domain.contains(w)):
            continue
        first = _segment(
            chart, omega_region, p, w,
            causal_tol=causal_tol, bvp_tol=bvp_tol, integrator_tol=integrator_tol,
        )
        if first is None:
            continue
        second = _segment(
            chart, omega_region, w, q,
            causal_tol=causal_tol, bvp_tol=bvp_tol, integrator_tol=integrator_tol,
        )
        if second is None:
            continue
        return CausalRelationResult(
            True, [first.trajectory, second.trajectory], attempts=attempts
        )
    return CausalRelationResult(False, [], attempts=attempts, exhausted=True)


@dataclass
class CausalSearchParams:
    """Knobs of the multi-start cone search."""

    n_starts: Optional[int] = None  # default by cone-section dimension
    seed: int = 0
    causal_tol: float = 1e-9
    bvp_tol: float = 1e-9
    integrator_tol: float = 1e-10
    check_relation: bool = True
    relation_attempts: int = 32
    refine_iters: int = 8
    dedupe_decimals: int = 6


@dataclass
class CausalSearchResult:
    """Best causal geodesic found and the search trail."""

    status: str  # "maximizer_found" | "no_causal_curve" | "inconclusive"
    geodesic: Optional[Trajectory]
    length: float
    interior_ok: Optional[bool]
    search_log: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "status": self.status,
            "length": self.length,
            "interior_ok": self.interior_ok,
            "search_log": dict(self.search_log),
        }


def _future_frame(chart: MetricChart, p):
    """g-orthonormal frame at p: future unit timelike e0 plus spacelike e_i."""
    g = metric_at(chart, p)
    eigvals, eigvecs = np.linalg.eigh(g)
    if eigvals[0] >= 0.0 or np.sum(eigvals < 0.0) != 1:
        raise ValueError("cone search needs a Lorentzian chart")
    e0 = eigvecs[:, 0] / np.sqrt(-eigvals[0])
    if not is_future_pointing(chart, e0):
        e0 = -e0
    spatial = [eigvecs[:, i] / np.sqrt(eigvals[i]) for i in range(1, len(eigvals))]
    return e0, np.array(spatial)


def _default_starts(section_dim: int) -> int:
    if section_dim <= 2:
        return 24
    if section_dim == 3:
        return 128
    return 32 * section_dim


def max_causal_geodesic(
    chart: MetricChart,
    omega_region: Region,
    p,
    q,
    params: Optional[CausalSearchParams] = None,
    *,
    boundary_convex: Optional[bool] = None,
) -> CausalSearchResult:
    """Length-maximizing future causal geodesic from p to q inside the region.

    Multi-start shooting over the future cone section at p, followed by a
    golden-section sweep around the best start when distinct solutions appear.
    ``interior_ok`` reports whether the winner stays inside the open region;
    with ``boundary_convex=True`` a False value is flagged as a discrepancy
    event in the search log (a convex boundary should keep maximizers inside).
    """
    params = params or CausalSearchParams()
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    log: dict = {"n_converged": 0, "n_starts": 0, "best_lengths": []}

    if aux_norm(q - p) == 0.0:
        return CausalSearchResult(
            "maximizer_found", _constant_trajectory(chart, p), 0.0, True, log
        )

    if params.check_relation:
        rel = causal_relation(
            chart, omega_region, p, q,
            seed=params.seed, n_attempts=params.relation_attempts,
            causal_tol=params.causal_tol, bvp_tol=params.bvp_tol,
            integrator_tol=params.integrator_tol,
        )
        if not rel.related:
            return CausalSearchResult(
                "no_causal_curve", None, 0.0, None,
                {**log, "relation_attempts": rel.attempts, "relation_exhausted": rel.exhausted},
            )

    e0, spatial = _future_frame(chart, p)
    section_dim = spatial.shape[0]
    n_starts = params.n_starts or _default_starts(section_dim)
    rng = np.random.default_rng(params.seed)

    chord = q - p
    # chord direction expressed on the cone section (clipped into the open ball)
    g_p = metric_at(chart, p)
    c0 = -float(chord @ g_p @ e0)
    u_aim = np.array([float(chord @ g_p @ e) for e in spatial])
    if c0 > 1e-12:
        u_aim = u_aim / c0
        r = np.linalg.norm(u_aim)
        if r >= 0.999:
            u_aim = u_aim * (0.999 / r)
    else:
        u_aim = np.zeros(section_dim)

    starts = [np.zeros(section_dim), u_aim]
    while len(starts) < n_starts:
        u = rng.standard_normal(section_dim)
        r = np.linalg.norm(u)
        if r == 0.0:
            continue
        radius = rng.random() ** (1.0 / section_dim)
        starts.append(u / r * radius * 0.98)
    log["n_starts"] = len(starts)

    chord_scale = aux_norm(chord)

    def try_start(u) -> Optional[tuple[float, BVPSolution]]:
        direction = e0 + u @ spatial
        v_init = direction * (chord_scale / max(aux_norm(direction), 1e-12))
        try:
            sol = solve_bvp(
                chart, p, q, region=omega_region, v_guess=v_init,
                bvp_tol=params.bvp_tol, integrator_tol=params.integrator_tol,
            )
        except BVPNotFound:
            return None
        causal_excess, pairing = _causal_margins(chart, sol.trajectory, params.causal_tol)
        if float(np.max(causal_excess)) > 0.0 or float(np.max(pairing)) > 0.0:
            return None
        return lorentzian_length(chart, sol.trajectory, causal_tol=params.causal_tol), sol

    candidates: dict[tuple, tuple[float, BVPSolution, np.ndarray]] = {}
    for u in starts:
        out = try_start(u)
        if out is None:
            continue
        length, sol = out
        key = tuple(np.round(sol.v0, params.dedupe_decimals))
        if key not in candidates or length > candidates[key][0]:
            candidates[key] = (length, sol, np.asarray(u))
    log["n_converged"] = len(candidates)

    if not candidates:
        return CausalSearchResult("inconclusive", None, 0.0, None, log)

    ranked = sorted(candidates.values(), key=lambda item: -item[0])
    log["best_lengths"] = [round(item[0], 12) for item in ranked[:5]]
    best_length, best_sol, best_u = ranked[0]
    if not best_sol.interior_ok:
        inside = [item for item in ranked if item[1].interior_ok]
        if inside:
            log["best_interior_length"] = inside[0][0]

    # local golden-section sweep per section coordinate when solutions differ
    lengths = [item[0] for item in ranked]
    if params.refine_iters > 0 and len(lengths) > 1 and (lengths[0] - lengths[-1]) > 1e-12:
        gr = 0.5 * (np.sqrt(5.0) - 1.0)
        for axis in range(section_dim):
            lo, hi = best_u[axis] - 0.25, best_u[axis] + 0.25

            def length_at(t):
                u = best_u.copy()
                u[axis] = t
                if np.linalg.norm(u) >= 0.999:
                    return -np.inf, None
                out = try_start(u)
                return (out[0], out[1]) if out else (-np.inf, None)

            a, b = lo, hi
            c = b - gr * (b - a)
            d = a + gr * (b - a)
            fc, sol_c = length_at(c)
            fd, sol_d = length_at(d)
            for _ in range(params.refine_iters):
                if fc > fd:
                    b, d, fd, sol_d = d, c, fc, sol_c
                    c = b - gr * (b - a)
                    fc, sol_c = length_at(c)
                else:
                    a, c, fc, sol_c = c, d, fd, sol_d
                    d = a + gr * (b - a)
                    fd, sol_d = length_at(d)
            for val, sol in ((fc, sol_c), (fd, sol_d)):
                if sol is not None and val > best_length:
                    best_length, best_sol = val, sol

    interior_ok = best_sol.interior_ok
    if boundary_convex and not interior_ok:
        log["convexity_discrepancy"] = True
    return CausalSearchResult(
        "maximizer_found", best_sol.trajectory, best_length, interior_ok, log
    )
