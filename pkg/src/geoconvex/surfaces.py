"""Level-set hypersurfaces: differentials, Hessian form, curvature, sampling.

A hypersurface is the zero set of a defining function phi with 0 a regular
value.  The central object is the Hessian bilinear form

    B_ij = d^2 phi / dx^i dx^j  -  (d phi / dx^l) Gamma^l_ij,

whose restriction to tangent vectors drives every convexity notion.  The
second fundamental form is only defined away from degenerate points
(g(grad phi, grad phi) ~ 0); the Hessian form stays meaningful there and all
audits use it directly.

Orientation convention: with n = grad phi / |grad phi|, the side containing
tangent geodesics (the local convex side) is {phi <= 0} when the tangent
Hessian form is <= 0 and {phi >= 0} when it is >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import dualnum as dm
from .charts import CausalClass, MetricChart, aux_norm, causal_class, christoffel_at, metric_at
from .errors import (
    DegeneratePoint,
    NotOnSurface,
    NotRegular,
    NotTangent,
    OutOfDomain,
)

__all__ = [
    "LevelSetHypersurface",
    "GradientResult",
    "TangentSample",
    "phi_with_gradient",
    "grad_phi",
    "hessian_form",
    "hessian_phi",
    "second_fundamental_form",
    "on_surface_band",
    "tangent_basis",
    "tangent_sample",
    "surface_points",
]

TANGENCY_TOL = 1e-10


@dataclass(frozen=True)
class LevelSetHypersurface:
    """Hypersurface phi^{-1}(0) with its numerical tolerances."""

    phi: Callable
    grad_tol: float = 1e-7
    surface_band_tol: float = 1e-9
    degen_band_tol: float = 1e-9
    derivative_mode: str = "dual_number"
    name: str = ""
    orientation_note: str = (
        "convex side is {phi <= 0} when the tangent Hessian form is <= 0, "
        "{phi >= 0} when it is >= 0"
    )


@dataclass(frozen=True)
class GradientResult:
    """Raised gradient of phi with degeneracy diagnostics."""

    value: float  # phi(x)
    covector: np.ndarray  # d phi
    vector: np.ndarray  # g^{-1} d phi
    g_norm2: float  # g(grad phi, grad phi)
    degenerate: bool  # |g_norm2| within the degeneracy band


@dataclass(frozen=True)
class TangentSample:
    x: np.ndarray
    v: np.ndarray
    causal: CausalClass


def phi_with_gradient(surface: LevelSetHypersurface, x) -> tuple[float, np.ndarray]:
    """(phi(x), d phi(x)) by the surface's derivative mode."""
    x = np.asarray(x, dtype=float)
    if surface.derivative_mode == "central_difference":
        val, grad, _ = dm.central_hessian(surface.phi, x)
        return val, grad
    out = surface.phi(dm.seed_dual(x))
    return dm.value_of(out), dm.grad_of(out, x.size)


def _phi_second_order(surface: LevelSetHypersurface, x):
    """(phi, d phi, coordinate Hessian of phi)."""
    x = np.asarray(x, dtype=float)
    if surface.derivative_mode == "central_difference":
        return dm.central_hessian(surface.phi, x)
    out = surface.phi(dm.seed_dual2(x))
    return dm.value_of(out), dm.grad_of(out, x.size), dm.hess_of(out, x.size)


def grad_phi(chart: MetricChart, surface: LevelSetHypersurface, x) -> GradientResult:
    """Index-raised gradient g^{-1} d phi with the degeneracy flag.

    Raises :class:`NotRegular` when |d phi|_aux falls below grad_tol (the
    regular-value condition fails numerically) and :class:`OutOfDomain` when
    x violates the chart domain.
    """
    if not chart.domain.contains(x):
        raise OutOfDomain(x)
    value, dphi = phi_with_gradient(surface, x)
    dphi_norm = aux_norm(dphi)
    if dphi_norm <= surface.grad_tol:
        raise NotRegular(f"|d phi| = {dphi_norm:.3e} <= grad_tol at {tuple(x)}")
    g_inv = np.linalg.inv(metric_at(chart, x, check_domain=False))
    vec = g_inv @ dphi
    g_norm2 = float(dphi @ vec)
    degenerate = abs(g_norm2) <= surface.degen_band_tol * dphi_norm**2
    return GradientResult(value, dphi, vec, g_norm2, degenerate)


def hessian_form(chart: MetricChart, surface: LevelSetHypersurface, x) -> np.ndarray:
    """Matrix B with B_ij u^i v^j the Hessian of phi at x."""
    if not chart.domain.contains(x):
        raise OutOfDomain(x)
    _, dphi, d2phi = _phi_second_order(surface, x)
    gamma = christoffel_at(chart, x, check_domain=False)
    return d2phi - np.einsum("l,lij->ij", dphi, gamma)


def hessian_phi(chart: MetricChart, surface: LevelSetHypersurface, x, u, v) -> float:
    """Hessian of phi evaluated on the pair (u, v); bilinear and symmetric."""
    b = hessian_form(chart, surface, x)
    return float(np.asarray(u, float) @ b @ np.asarray(v, float))


def on_surface_band(surface: LevelSetHypersurface, x) -> bool:
    """|phi(x)| <= band_tol * (1 + |d phi|_aux): the point counts as on-surface."""
    value, dphi = phi_with_gradient(surface, x)
    return abs(value) <= surface.surface_band_tol * (1.0 + aux_norm(dphi))


def second_fundamental_form(
    chart: MetricChart, surface: LevelSetHypersurface, x, v
) -> float:
    """Pi(v, v) with respect to n = grad phi/|grad phi| at a non-degenerate point.

    Computed as -H_phi(v,v)/|grad phi| with |grad phi| = sqrt(|g(grad,grad)|).
    The sign flips with the normal: replacing phi by -phi flips both n and Pi.
    Raises :class:`DegeneratePoint` where the induced metric degenerates
    (callers must fall back to the Hessian form there) and :class:`NotTangent`
    when d phi(v) is not zero within tolerance.
    """
    grad = grad_phi(chart, surface, x)
    if abs(grad.value) > surface.surface_band_tol * (1.0 + aux_norm(grad.covector)):
        raise NotOnSurface(f"phi = {grad.value:.3e} at {tuple(np.asarray(x, float))}")
    v = np.asarray(v, dtype=float)
    if abs(float(grad.covector @ v)) > TANGENCY_TOL * max(aux_norm(v), 1e-300):
        raise NotTangent(f"d phi(v) = {float(grad.covector @ v):.3e}")
    if grad.degenerate:
        raise DegeneratePoint(
            "g(grad phi, grad phi) ~ 0: second fundamental form undefined; "
            "use the Hessian form directly"
        )
    norm = np.sqrt(abs(grad.g_norm2))
    return -hessian_phi(chart, surface, x, v, v) / norm


def tangent_basis(surface: LevelSetHypersurface, x, dphi: Optional[np.ndarray] = None) -> np.ndarray:
    """Aux-orthonormal basis of ker d phi as rows, shape (m-1, m)."""
    if dphi is None:
        _, dphi = phi_with_gradient(surface, x)
    m = dphi.size
    # SVD null space of the 1 x m row
    _, _, vt = np.linalg.svd(dphi.reshape(1, m))
    return vt[1:]


def _project_tangent(dphi: np.ndarray, v: np.ndarray) -> np.ndarray:
    return v - (float(dphi @ v) / float(dphi @ dphi)) * dphi


@dataclass
class TangentSampleBatch:
    """Samples plus the diagnostic trail of the rejection filter."""

    samples: list[TangentSample]
    requested: int
    attempts: int
    empty_cone: bool = False
    note: str = ""

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def tangent_sample(
    chart: MetricChart,
    surface: LevelSetHypersurface,
    x,
    causal_filter="all",
    count: int = 8,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> TangentSampleBatch:
    """Up to ``count`` aux-unit tangent vectors at x, filtered by causal class.

    Vectors are drawn from an isotropic Gaussian in ker d phi; timelike and
    spacelike filters are rejection-based.  Null vectors are constructed
    exactly: given a spacelike tangent u and a timelike tangent direction w
    (the negative-eigenvalue direction of the restricted metric), the roots of
    g(u + t w, u + t w) = 0 land on the cone.  When the restricted metric has
    no negative direction the cone section degenerates: its kernel directions
    are returned for the null filter, and the timelike filter is empty.
    Returns fewer samples (possibly zero, flagged ``empty_cone``) when the
    requested cone section is empty.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    grad = grad_phi(chart, surface, x)  # raises NotRegular / OutOfDomain
    dphi = grad.covector
    basis = tangent_basis(surface, x, dphi)
    k = basis.shape[0]
    g = metric_at(chart, x, check_domain=False)

    if isinstance(causal_filter, CausalClass):
        causal_filter = causal_filter.value

    def finish(v):
        v = _project_tangent(dphi, v)
        n = aux_norm(v)
        if n == 0.0:
            return None
        v = v / n
        return TangentSample(x, v, causal_class(chart, x, v, check_domain=False))

    samples: list[TangentSample] = []
    attempts = 0

    if causal_filter == "null":
        g_restricted = basis @ g @ basis.T
        eigvals, eigvecs = np.linalg.eigh(g_restricted)
        scale = max(1.0, float(np.max(np.abs(eigvals))))
        if eigvals[0] < -chart.null_tol * scale:
            w = basis.T @ eigvecs[:, 0]
            a = float(w @ g @ w)
            while len(samples) < count and attempts < 60 * count:
                attempts += 1
                u = basis.T @ rng.standard_normal(k)
                b = 2.0 * float(u @ g @ w)
                c = float(u @ g @ u)
                disc = b * b - 4.0 * a * c
                if disc <= 0.0:
                    continue
                t = (-b + np.sqrt(disc)) / (2.0 * a) if attempts % 2 else (
                    -b - np.sqrt(disc)
                ) / (2.0 * a)
                sample = finish(u + t * w)
                if sample is not None and sample.causal == CausalClass.NULL:
                    samples.append(sample)
            return TangentSampleBatch(samples, count, attempts, empty_cone=not samples)
        if eigvals[0] <= chart.null_tol * scale:
            # degenerate cone section: kernel directions are the null tangents
            kernel = [
                basis.T @ eigvecs[:, i]
                for i in range(k)
                if abs(eigvals[i]) <= chart.null_tol * scale
            ]
            for i in range(count):
                attempts += 1
                direction = kernel[i % len(kernel)] * (1.0 if (i // len(kernel)) % 2 == 0 else -1.0)
                sample = finish(direction)
                if sample is not None and sample.causal == CausalClass.NULL:
                    samples.append(sample)
            return TangentSampleBatch(
                samples, count, attempts, empty_cone=not samples, note="degenerate cone section"
            )
        return TangentSampleBatch(
            [], count, 0, empty_cone=True, note="tangent space has no causal directions"
        )

    wanted = None if causal_filter == "all" else CausalClass(causal_filter)
    max_attempts = max(60 * count, 240)
    while len(samples) < count and attempts < max_attempts:
        attempts += 1
        v = basis.T @ rng.standard_normal(k)
        sample = finish(v)
        if sample is None:
            continue
        if wanted is None or sample.causal == wanted:
            samples.append(sample)
    note = "" if len(samples) == count else "rejection budget exhausted"
    return TangentSampleBatch(samples, count, attempts, empty_cone=not samples, note=note)


def surface_points(
    chart: MetricChart,
    surface: LevelSetHypersurface,
    region,
    count: int,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
    *,
    phi_target: float = 1e-12,
    secant_iterations: int = 60,
    max_tries: Optional[int] = None,
) -> list[np.ndarray]:
    """Sample points of phi^{-1}(0) inside a region by secant root-finding.

    Random anchor points are drawn in the region's bounds; along a random
    aux-unit line through each anchor, the secant method drives phi to
    |phi| <= phi_target.  Points failing domain/region/regularity checks are
    discarded.  Raises :class:`NoSurfacePoints` when nothing is found.
    """
    from .errors import NoSurfacePoints

    if rng is None:
        rng = np.random.default_rng(seed)
    if region.bounds is None:
        raise ValueError("region needs sampling bounds")
    lo, hi = region.bounds
    m = lo.size
    points: list[np.ndarray] = []
    tries = 0
    budget = max_tries if max_tries is not None else 200 * count

    def phi_at(pt):
        return float(dm.value_of(surface.phi(pt)))

    while len(points) < count and tries < budget:
        tries += 1
        anchor = lo + (hi - lo) * rng.random(m)
        if not region.contains(anchor) or not chart.domain.contains(anchor):
            continue
        direction = rng.standard_normal(m)
        direction /= aux_norm(direction)
        span = float(np.min(hi - lo))
        t0, t1 = 0.0, 0.25 * span * (rng.random() - 0.5)
        if t1 == 0.0:
            continue
        f0, f1 = phi_at(anchor), phi_at(anchor + t1 * direction)
        converged = False
        for _ in range(secant_iterations):
            if f1 == f0:
                break
            t2 = t1 - f1 * (t1 - t0) / (f1 - f0)
            t0, f0, t1 = t1, f1, t2
            candidate = anchor + t1 * direction
            if not chart.domain.contains(candidate):
                break
            f1 = phi_at(candidate)
            if abs(f1) <= phi_target:
                converged = True
                break
        if not converged:
            continue
        x = anchor + t1 * direction
        if not region.contains(x) or not chart.domain.contains(x):
            continue
        try:
            grad_phi(chart, surface, x)
        except (NotRegular, OutOfDomain):
            continue
        points.append(x)
    if not points:
        raise NoSurfacePoints(
            f"no surface points found in region after {tries} tries"
        )
    return points
