"""Geodesic integration, exponential map and two-point shooting.

The geodesic ODE  x'' ^l + Gamma^l_ij x'^i x'^j = 0  is integrated with an
embedded Dormand-Prince 5(4) pair under PI step-size control (fixed-step RK4
is available for reproducibility runs).  Chart-domain exit is localized by
bisecting the last step's dense-output interpolant down to parameter width
1e-10, and the crossing state is appended before the trajectory stops with
``exit_reason="left_domain"``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .charts import MetricChart, Region, aux_norm, christoffel_at, metric_at
from .errors import BVPNotFound, LeftDomain

__all__ = [
    "GeodesicState",
    "Trajectory",
    "integrate_geodesic",
    "exp_map",
    "BVPSolution",
    "solve_bvp",
]

# Dormand-Prince 5(4) tableau (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense-output constants
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)


@dataclass(frozen=True)
class GeodesicState:
    """One point of a discretized geodesic: position, velocity, parameter."""

    x: np.ndarray
    v: np.ndarray
    s: float


@dataclass
class Trajectory:
    """Discretized geodesic with quality diagnostics."""

    chart: MetricChart
    s: np.ndarray
    x: np.ndarray
    v: np.ndarray
    energy: np.ndarray  # g(gamma', gamma') on the grid
    exit_reason: str  # "completed" | "left_domain" | "step_failure"
    tol: float

    @property
    def states(self) -> list[GeodesicState]:
        return [GeodesicState(self.x[k], self.v[k], float(self.s[k])) for k in range(len(self.s))]

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    @property
    def last_state(self) -> GeodesicState:
        return GeodesicState(self.x[-1], self.v[-1], float(self.s[-1]))

    def endpoint(self) -> np.ndarray:
        return self.x[-1]

    def to_csv(self, path) -> None:
        """Write grid columns: s, coordinates, velocities, g(gamma',gamma')."""
        names = self.chart.coord_names
        header = ["s"] + [f"x_{n}" for n in names] + [f"v_{n}" for n in names] + ["g_vv"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(len(self.s)):
                writer.writerow(
                    [repr(float(self.s[k]))]
                    + [repr(float(c)) for c in self.x[k]]
                    + [repr(float(c)) for c in self.v[k]]
                    + [repr(float(self.energy[k]))]
                )


def _rhs(chart: MetricChart, y: np.ndarray) -> np.ndarray:
    m = chart.dim
    x, v = y[:m], y[m:]
    gamma = christoffel_at(chart, x, check_domain=False)
    acc = -np.einsum("lij,i,j->l", gamma, v, v)
    return np.concatenate([v, acc])


def _energy(chart: MetricChart, x, v) -> float:
    g = metric_at(chart, x, check_domain=False)
    return float(v @ g @ v)


def _dense_state(y0, y1, ks, h, theta):
    """DOPRI5 quartic interpolant over one accepted step (state at fraction theta)."""
    ydiff = y1 - y0
    bspl = h * ks[0] - ydiff
    r4 = ydiff - h * ks[6] - bspl
    r5 = h * (ks @ _D)
    return y0 + theta * (ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)))


def _rk4_step(chart, y, h):
    k1 = _rhs(chart, y)
    k2 = _rhs(chart, y + 0.5 * h * k1)
    k3 = _rhs(chart, y + 0.5 * h * k2)
    k4 = _rhs(chart, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_geodesic(
    chart: MetricChart,
    x0,
    v0,
    s_max: float,
    tol: float = 1e-9,
    *,
    s0: float = 0.0,
    max_step: Optional[float] = None,
    method: str = "rkdp54",
    n_steps: int = 256,
    max_steps: int = 200_000,
    exit_param_tol: float = 1e-10,
) -> Trajectory:
    """Integrate the geodesic from (x0, v0) over [s0, s0 + s_max].

    ``tol`` controls the local error per step (mixed absolute/relative).
    Integration stops early with ``exit_reason="left_domain"`` when the chart
    domain is exited (crossing localized to parameter width exit_param_tol) or
    with ``"step_failure"`` when the adaptive step underflows.
    ``method="rk4"`` runs ``n_steps`` fixed steps instead.
    """
    if s_max <= 0.0:
        raise ValueError("s_max must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if not chart.domain.contains(x0):
        from .errors import OutOfDomain

        raise OutOfDomain(x0)

    m = chart.dim
    y = np.concatenate([x0, v0])
    s = float(s0)
    s_end = s0 + float(s_max)

    grid_s = [s]
    grid_y = [y.copy()]

    def finalize(reason):
        ss = np.array(grid_s)
        ys = np.array(grid_y)
        xs, vs = ys[:, :m], ys[:, m:]
        en = np.array([_energy(chart, xs[k], vs[k]) for k in range(len(ss))])
        return Trajectory(chart, ss, xs, vs, en, reason, tol)

    def exit_bisect(y_a, y_b, ks, h, s_a):
        # predicate bisection on the dense interpolant of the offending step
        lo, hi = 0.0, 1.0
        width_target = exit_param_tol * max(1.0, abs(s_a) + abs(h))
        while (hi - lo) * abs(h) > width_target:
            mid = 0.5 * (lo + hi)
            y_mid = _dense_state(y_a, y_b, ks, h, mid)
            if chart.domain.contains(y_mid[:m]):
                lo = mid
            else:
                hi = mid
        y_cross = _dense_state(y_a, y_b, ks, h, lo)
        grid_s.append(s_a + lo * h)
        grid_y.append(y_cross)

    if method == "rk4":
        h = (s_end - s) / n_steps
        for _ in range(n_steps):
            y_new = _rk4_step(chart, y, h)
            if not chart.domain.contains(y_new[:m]):
                # no dense output: plain bisection on the step size
                lo, hi = 0.0, 1.0
                while (hi - lo) * abs(h) > exit_param_tol * max(1.0, abs(s)):
                    mid = 0.5 * (lo + hi)
                    if chart.domain.contains(_rk4_step(chart, y, mid * h)[:m]):
                        lo = mid
                    else:
                        hi = mid
                grid_s.append(s + lo * h)
                grid_y.append(_rk4_step(chart, y, lo * h))
                return finalize("left_domain")
            s += h
            y = y_new
            grid_s.append(s)
            grid_y.append(y.copy())
        return finalize("completed")

    if method != "rkdp54":
        raise ValueError(f"unknown method {method!r}")

    # initial step size heuristic
    f0 = _rhs(chart, y)
    scale = tol + tol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h = 0.01 * d0 / d1 if d1 > 1e-300 else 0.1 * (s_end - s)
    h = min(h, s_end - s)
    if max_step is not None:
        h = min(h, max_step)
    h = max(h, 1e-12 * (s_end - s0))

    safety, alpha, beta = 0.9, 0.17, 0.04
    min_factor, max_factor = 0.2, 6.0
    err_prev = 1.0
    ks = np.empty((7, 2 * m))
    ks[0] = f0
    fsal_valid = True
    n_taken = 0

    while s < s_end:
        if n_taken > max_steps:
            return finalize("step_failure")
        h = min(h, s_end - s)
        if h <= 1e-14 * max(1.0, abs(s)):
            return finalize("step_failure")
        if not fsal_valid:
            ks[0] = _rhs(chart, y)
            fsal_valid = True
        for i in range(1, 7):
            yi = y + h * (ks[:i].T @ _A[i])
            ks[i] = _rhs(chart, yi)
        y_new = y + h * (_B5 @ ks)
        err_vec = h * (_ERR @ ks)
        sc = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))
        n_taken += 1
        if err <= 1.0:
            ks_step = ks.copy()
            h_used = h
            s_new = s + h
            if not chart.domain.contains(y_new[:m]):
                exit_bisect(y, y_new, ks_step, h_used, s)
                return finalize("left_domain")
            s = s_new
            y = y_new
            ks[0] = ks_step[6]  # FSAL
            grid_s.append(s)
            grid_y.append(y.copy())
            factor = safety * (err + 1e-16) ** (-alpha) * (err_prev + 1e-16) ** beta
            err_prev = max(err, 1e-10)
            h *= min(max_factor, max(min_factor, factor))
            if max_step is not None:
                h = min(h, max_step)
        else:
            # rejected: y unchanged, so ks[0] stays valid
            h *= max(0.1, safety * err ** (-0.2))

    return finalize("completed")


def exp_map(chart: MetricChart, p, v, tol: float = 1e-11, **kwargs) -> np.ndarray:
    """gamma(1) for the geodesic with gamma(0)=p, gamma'(0)=v.

    Shares the integrator code path with :func:`integrate_geodesic`; raises
    :class:`LeftDomain` (last valid state attached) if the chart is exited.
    """
    v = np.asarray(v, dtype=float)
    if aux_norm(v) == 0.0:
        return np.asarray(p, dtype=float).copy()
    traj = integrate_geodesic(chart, p, v, 1.0, tol, **kwargs)
    if traj.exit_reason != "completed":
        raise LeftDomain(traj.last_state)
    return traj.endpoint()


@dataclass
class BVPSolution:
    """Converged two-point geodesic with diagnostics."""

    trajectory: Trajectory
    v0: np.ndarray
    residual: float
    iterations: int
    interior_ok: bool


def _shoot(chart, p, v, tol):
    """Endpoint of exp_map without raising on domain exit (returns point, ok)."""
    if aux_norm(v) == 0.0:
        return np.asarray(p, float).copy(), True
    traj = integrate_geodesic(chart, p, v, 1.0, tol)
    return traj.endpoint(), traj.exit_reason == "completed"


def solve_bvp(
    chart: MetricChart,
    p,
    q,
    region: Optional[Region] = None,
    v_guess=None,
    *,
    bvp_tol: float = 1e-9,
    integrator_tol: float = 1e-11,
    max_iterations: int = 30,
    fd_step: float = 1e-6,
    max_halvings: int = 20,
    n_interior: int = 64,
) -> BVPSolution:
    """Newton shooting for the geodesic from p to q on parameter [0, 1].

    The initial velocity is iterated with a finite-difference Jacobian and
    backtracking damping.  On success the returned trajectory is re-integrated
    with a dense grid and ``interior_ok`` reports whether all interior grid
    points satisfy the region predicate.  Raises :class:`BVPNotFound` with the
    final residual otherwise.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = chart.dim
    v = np.asarray(v_guess, dtype=float) if v_guess is not None else (q - p)
    if not np.all(np.isfinite(v)):
        raise ValueError("v_guess must be finite")
    res_scale = 1.0 + aux_norm(q - p)

    end, _ = _shoot(chart, p, v, integrator_tol)
    f = end - q
    best_res = aux_norm(f)
    iterations = 0
    while best_res > bvp_tol * res_scale and iterations < max_iterations:
        iterations += 1
        jac = np.empty((m, m))
        for k in range(m):
            dv = fd_step * (1.0 + abs(v[k]))
            vk = v.copy()
            vk[k] += dv
            end_k, _ = _shoot(chart, p, vk, integrator_tol)
            jac[:, k] = (end_k - end) / dv
        try:
            delta = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -f, rcond=None)[0]
        lam = 1.0
        improved = False
        for _ in range(max_halvings):
            v_try = v + lam * delta
            end_try, _ = _shoot(chart, p, v_try, integrator_tol)
            f_try = end_try - q
            if aux_norm(f_try) < best_res * (1.0 - 1e-4 * lam):
                v, end, f = v_try, end_try, f_try
                best_res = aux_norm(f_try)
                improved = True
                break
            lam *= 0.5
        if not improved:
            raise BVPNotFound(best_res, iterations)
    if best_res > bvp_tol * res_scale:
        raise BVPNotFound(best_res, iterations)

    traj = integrate_geodesic(
        chart, p, v, 1.0, integrator_tol, max_step=1.0 / n_interior
    )
    interior_ok = True
    if region is not None:
        for k in range(len(traj.s)):
            if 0.0 < traj.s[k] < 1.0 and not region.contains(traj.x[k]):
                interior_ok = False
                break
    return BVPSolution(traj, v, best_res, iterations, interior_ok)
