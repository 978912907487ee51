"""Parabolic rescaling, Gaussian density, tangent flows and self-shrinker residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, OutOfRange
from .gaussian import GaussianCenter, f_functional
from .geometry import DiscreteHypersurface, compute_curvature, hausdorff_distance
from .shapes import boundary_vertices

#: Relative geometric error below which a model fit is accepted.
FIT_TOLERANCE = 2e-2


def parabolic_rescale(traj, x0, t0: float, lam: float, s: float) -> DiscreteHypersurface:
    """``(M_(lam^2 s + t0) - x0) / lam``, the space-time zoom about ``(x0, t0)``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    t = lam * lam * s + t0
    surface = traj.surface_at(t)  # raises OutOfRange
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (surface.ambient,):
        raise ValueError(f"centre must have {surface.ambient} coordinates")
    return surface.with_vertices((surface.vertices - x0) / lam)


# -- density ------------------------------------------------------------------


@dataclass
class DensityEstimate:
    value: float
    samples: list
    extrapolation_error: float

    def to_dict(self):
        return {
            "value": self.value,
            "extrapolation_error": self.extrapolation_error,
            "samples": [[t, f] for t, f in self.samples],
        }


def gaussian_density(traj, x0, t0: float, times) -> DensityEstimate:
    """Limit of the Gaussian integral centred at ``(x0, t0)`` as ``t`` increases to ``t0``.

    Consecutive samples are combined by first-order Richardson extrapolation
    in ``h = t0 - t``; the error estimate is the spread of the last two
    extrapolants.
    """
    times = [float(t) for t in times]
    if len(times) < 3:
        raise InsufficientSamples(f"need at least 3 sample times, got {len(times)}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("sample times must be strictly increasing")
    if times[-1] >= t0:
        raise OutOfRange(f"sample time {times[-1]} is not before t0={t0}")
    x0 = np.asarray(x0, dtype=float)
    samples = [(t, f_functional(traj.surface_at(t), GaussianCenter(x0, t0 - t))) for t in times]
    h = np.array([t0 - t for t in times])
    f = np.array([v for _, v in samples])
    extrap = (h[:-1] * f[1:] - h[1:] * f[:-1]) / (h[:-1] - h[1:])
    return DensityEstimate(float(extrap[-1]), samples, float(abs(extrap[-1] - extrap[-2])))


# -- shrinker residual and model fits ----------------------------------------------


@dataclass
class Classification:
    kind: str  # "Plane", "Sphere", "Cylinder" or "Unknown"
    radius: float | None = None
    center: np.ndarray | None = None
    axis: np.ndarray | None = None
    fit_error: float = math.inf
    # relative gap between the fitted radius and the shrinker radius sqrt(2k)
    shrinker_radius_error: float | None = None
    fit_errors: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "radius": self.radius,
            "center": None if self.center is None else self.center.tolist(),
            "axis": None if self.axis is None else self.axis.tolist(),
            "fit_error": self.fit_error,
            "shrinker_radius_error": self.shrinker_radius_error,
            "fit_errors": dict(self.fit_errors),
        }


@dataclass
class ShrinkerReport:
    residuals: np.ndarray
    l2_residual: float
    linf_residual: float
    classification: Classification
    interior: np.ndarray | None = None

    def to_dict(self):
        return {
            "l2_residual": self.l2_residual,
            "linf_residual": self.linf_residual,
            "classification": self.classification.to_dict(),
        }


def _plane_fit(x):
    c = x.mean(0)
    _, sv, vt = np.linalg.svd(x - c, full_matrices=False)
    normal = vt[-1]
    dist = (x - c) @ normal
    spread = math.sqrt(np.mean(np.sum((x - c) ** 2, axis=1)))
    return float(np.sqrt(np.mean(dist ** 2)) / spread), c, normal


def _sphere_fit(x):
    # |x|^2 = 2 c.x + (r^2 - |c|^2), linear in (c, r^2 - |c|^2)
    a = np.column_stack([2 * x, np.ones(len(x))])
    b = np.sum(x * x, axis=1)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    c = sol[:-1]
    r2 = sol[-1] + c @ c
    if not r2 > 0:
        return math.inf, c, math.nan
    r = math.sqrt(r2)
    err = np.sqrt(np.mean((np.linalg.norm(x - c, axis=1) - r) ** 2)) / r
    return float(err), c, r


def _cylinder_fit(x):
    """Best circular cylinder with axis along one of the principal directions."""
    c0 = x.mean(0)
    _, _, vt = np.linalg.svd(x - c0, full_matrices=False)
    best = (math.inf, None, math.nan, None)
    for axis in vt:
        basis = np.linalg.svd(np.eye(3) - np.outer(axis, axis))[0][:, :2]
        err, centre2, r = _sphere_fit((x - c0) @ basis)
        if err < best[0]:
            best = (err, c0 + basis @ centre2, r, axis)
    return best


def classify(surface: DiscreteHypersurface, tolerance: float = FIT_TOLERANCE) -> Classification:
    """Fit plane, sphere and (for surfaces) cylinder; the first below ``tolerance`` wins."""
    x = surface.vertices
    n = surface.n
    errors = {}
    plane_err, c, normal = _plane_fit(x)
    errors["plane"] = plane_err
    sphere_err, sc, sr = _sphere_fit(x)
    errors["sphere"] = sphere_err
    if n == 2:
        cyl_err, cc, cr, axis = _cylinder_fit(x)
        errors["cylinder"] = cyl_err
    if plane_err < tolerance:
        return Classification("Plane", None, c, normal, plane_err, None, errors)
    if sphere_err < tolerance:
        target = math.sqrt(2 * n)
        return Classification("Sphere", float(sr), sc, None, sphere_err, abs(sr - target) / target, errors)
    if n == 2 and cyl_err < tolerance:
        target = math.sqrt(2 * (n - 1))
        return Classification("Cylinder", float(cr), cc, axis, cyl_err, abs(cr - target) / target, errors)
    best = min(errors.values())
    return Classification("Unknown", fit_error=best, fit_errors=errors)


def shrinker_residual(surface: DiscreteHypersurface, tolerance: float = FIT_TOLERANCE) -> ShrinkerReport:
    """Per-vertex ``H - <X, nu> / 2`` with area-weighted RMS and max norms.

    On open patches the boundary vertices carry no mean curvature, so the
    norms are taken over interior vertices only.
    """
    curv = compute_curvature(surface, second_form=False)
    support = np.einsum("ij,ij->i", surface.vertices, curv.normal)
    r = curv.mean_curvature - 0.5 * support
    interior = np.ones(len(r), dtype=bool)
    if not surface.closed:
        interior[boundary_vertices(surface)] = False
    ri = r[interior]
    m = curv.vertex_area[interior]
    l2 = float(np.sqrt(np.sum(m * ri * ri) / np.sum(m)))
    linf = float(np.max(np.abs(ri)))
    return ShrinkerReport(r, l2, linf, classify(surface, tolerance), interior)


# -- tangent flows ---------------------------------------------------------------


@dataclass
class RescaleSequence:
    base: object
    center: np.ndarray
    singular_time: float
    scales: list
    rescaled: dict = field(default_factory=dict)  # (j, s) -> surface

    def at(self, j: int, s: float = -1.0) -> DiscreteHypersurface:
        key = (j, float(s))
        if key not in self.rescaled:
            self.rescaled[key] = parabolic_rescale(self.base, self.center, self.singular_time, self.scales[j], s)
        return self.rescaled[key]


@dataclass
class TangentFlowReport:
    scales: list
    consecutive_distances: list
    shrinkers: list
    self_similarity: list

    def to_dict(self):
        return {
            "scales": list(self.scales),
            "consecutive_hausdorff": list(self.consecutive_distances),
            "self_similarity_hausdorff": list(self.self_similarity),
            "shrinker": [r.to_dict() for r in self.shrinkers],
        }


def tangent_flow_extract(traj, x0, t0: float, scale_count: int) -> tuple[RescaleSequence, TangentFlowReport]:
    """Dyadic blow-up sequence ``lam_j = 2^-j sqrt(t0 - t_mid)`` at ``(x0, t0)``.

    ``t_mid`` is halfway between the first snapshot and ``t0``, so the
    coarsest ``s = -2`` slice is the initial surface.
    """
    if scale_count < 3:
        raise ValueError("scale_count must be at least 3")
    t_first = float(traj.times[0])
    if not t0 > t_first:
        raise OutOfRange(f"t0={t0} does not follow the first snapshot at {t_first}")
    base = math.sqrt(t0 - 0.5 * (t_first + t0))
    scales = [base * 2.0 ** -j for j in range(scale_count)]
    seq = RescaleSequence(traj, np.asarray(x0, dtype=float), float(t0), scales)
    unit = [seq.at(j, -1.0) for j in range(scale_count)]
    consecutive = [hausdorff_distance(a, b) for a, b in zip(unit, unit[1:])]
    shrinkers = [shrinker_residual(m) for m in unit]
    similarity = []
    for j, m in enumerate(unit):
        doubled = seq.at(j, -2.0)
        similarity.append(hausdorff_distance(m.with_vertices(math.sqrt(2.0) * m.vertices), doubled))
    return seq, TangentFlowReport(scales, consecutive, shrinkers, similarity)
