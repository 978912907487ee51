"""Gaussian kernels, the F-functional, entropy, and closed-form sphere entropies."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import erfc

from .errors import NonpositiveScale, OptimizerDiverged, UnsupportedIndex
from .geometry import DiscreteHypersurface

logger = logging.getLogger(__name__)

#: Entropy of a hyperplane, the flat factor of every generalized cylinder.
PLANE_ENTROPY = 1.0


@dataclass(frozen=True)
class GaussianCenter:
    """Space-time Gaussian parameters: centre ``x0`` and scale ``t0 > 0``."""

    center: np.ndarray
    scale: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        if not self.scale > 0:
            raise NonpositiveScale(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))


@dataclass(frozen=True)
class CutoffSpec:
    """Space-time centre ``(x0, t0)`` and radius ``rho`` of the cubic cutoff."""

    center: np.ndarray
    time: float
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("cutoff radius must be positive")


@dataclass
class EntropyOptions:
    starts: int = 8
    scale_fractions: tuple = (0.25, 0.5, 1.0)
    max_iter: int = 200
    gtol: float = 1e-8
    seed: int | None = None
    min_scale: float | None = None
    max_scale_factor: float = 1e4
    workers: int | None = None


@dataclass
class EntropyResult:
    entropy: float
    argmax: GaussianCenter
    starts_tried: int
    converged: bool
    best_gradient_norm: float
    values: list = field(default_factory=list, repr=False)


def phi_kernel(x, t, n):
    """Backward heat kernel ``(4 pi t)^(-n/2) exp(-|x|^2 / 4t)``; ``x`` may be batched."""
    if not t > 0:
        raise NonpositiveScale(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return (4 * np.pi * t) ** (-n / 2) * np.exp(-r2 / (4 * t))


def _weights(surface, center, scale):
    nodes, w = surface.quadrature
    d = nodes - center
    r2 = np.einsum("ij,ij->i", d, d)
    g = w * np.exp(-r2 / (4 * scale))
    return d, r2, g


def f_functional(surface: DiscreteHypersurface, g: GaussianCenter) -> float:
    """Gaussian-weighted measure of the surface at centre/scale ``g``."""
    _, _, wg = _weights(surface, g.center, g.scale)
    return float((4 * np.pi * g.scale) ** (-surface.n / 2) * wg.sum())


def f_gradient(surface: DiscreteHypersurface, g: GaussianCenter) -> tuple[np.ndarray, float]:
    """Exact gradient of the quadrature value in ``x0`` and ``log t0``."""
    t = g.scale
    n = surface.n
    d, r2, wg = _weights(surface, g.center, t)
    norm = (4 * np.pi * t) ** (-n / 2)
    value = norm * wg.sum()
    grad_x = norm * (wg[:, None] * d).sum(0) / (2 * t)
    grad_logt = -0.5 * n * value + norm * (wg * r2).sum() / (4 * t)
    return grad_x, float(grad_logt)


def _default_min_scale(surface):
    # below roughly an edge length squared the quadrature no longer resolves the kernel
    return float(np.mean(surface.edge_lengths)) ** 2


def _start_points(surface, opts):
    nv = surface.num_vertices
    k = min(opts.starts, nv)
    if opts.seed is None:
        idx = (np.arange(k) * nv) // k
    else:
        idx = np.sort(np.random.default_rng(opts.seed).choice(nv, size=k, replace=False))
    centres = [surface.centroid] + [surface.vertices[i] for i in idx]
    diam = surface.diameter
    return [(c, (f * diam) ** 2) for c in centres for f in opts.scale_fractions]


def _ascend(surface, start, opts, ref, length, bounds):
    """Maximise F over (x0, log t0) from one start, in coordinates scaled by ``length``."""
    n_amb = surface.ambient
    best = {"value": -np.inf, "z": None, "grad": np.inf}
    log_l2 = 2 * math.log(length)

    def unpack(z):
        return ref + length * z[:n_amb], math.exp(z[n_amb] + log_l2)

    def objective(z):
        x0, t0 = unpack(z)
        g = GaussianCenter(x0, t0)
        val = f_functional(surface, g)
        gx, gt = f_gradient(surface, g)
        if not (np.isfinite(val) and np.all(np.isfinite(gx)) and np.isfinite(gt)):
            raise OptimizerDiverged(f"non-finite F or gradient at x0={x0}, t0={t0}")
        grad = np.append(gx * length, gt)
        if val > best["value"]:
            best.update(value=val, z=z.copy(), grad=_projected_norm(z, grad, bounds))
        return -val, -grad

    z0 = np.append((start[0] - ref) / length, math.log(start[1]) - log_l2)
    z0[n_amb] = np.clip(z0[n_amb], bounds[0], bounds[1])
    minimize(objective, z0, jac=True, method="L-BFGS-B",
             bounds=[(None, None)] * n_amb + [bounds],
             options={"maxiter": opts.max_iter, "gtol": opts.gtol, "ftol": 0.0, "maxls": 40})
    x0, t0 = unpack(best["z"])
    return best["value"], GaussianCenter(x0, t0), best["grad"]


def _projected_norm(z, grad, bounds):
    g = grad.copy()
    s = z[-1]
    # at an active scale bound only the inward component counts
    if (s <= bounds[0] + 1e-12 and g[-1] < 0) or (s >= bounds[1] - 1e-12 and g[-1] > 0):
        g[-1] = 0.0
    return float(np.linalg.norm(g))


def entropy(surface: DiscreteHypersurface, opts: EntropyOptions | None = None) -> EntropyResult:
    """Multi-start maximisation of the F-functional over centres and scales.

    Starts are the centroid plus ``opts.starts`` evenly indexed vertices, each
    paired with scales ``(f * diam)^2``.  Each start runs L-BFGS on
    ``(x0 / diam, log(t0 / diam^2))``; the scale is kept above a floor of the
    mean edge length squared where the quadrature stops resolving the kernel.
    The reported value is the largest F evaluated anywhere.
    """
    opts = opts or EntropyOptions()
    diam = surface.diameter
    min_scale = opts.min_scale if opts.min_scale is not None else _default_min_scale(surface)
    bounds = (math.log(min_scale / diam ** 2), math.log(opts.max_scale_factor))
    starts = _start_points(surface, opts)
    ref = surface.centroid
    workers = opts.workers or int(os.environ.get("ENTROFLOW_THREADS", "1"))
    run = lambda s: _ascend(surface, s, opts, ref, diam, bounds)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    values = [r[0] for r in results]
    # first index wins ties
    k = int(np.argmax(values))
    value, g, gnorm = results[k]
    logger.debug("entropy %.12g from start %d of %d", value, k, len(starts))
    return EntropyResult(value, g, len(starts), gnorm < opts.gtol * 10, gnorm, values)


# -- closed forms ------------------------------------------------------------


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere in R^(k+1)."""
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def stone_entropy(k: int) -> float:
    """Entropy of the round k-sphere, equal to that of S^k x R^(n-k)."""
    if int(k) != k or k < 0:
        raise UnsupportedIndex(f"k must be a non-negative integer, got {k}")
    if k == 0:
        raise UnsupportedIndex("k = 0 is not covered; use PLANE_ENTROPY for the flat factor")
    return sphere_area(k) * (k / (2 * math.pi)) ** (k / 2) * math.exp(-k / 2)


def cylinder_product_check(k: int, truncation_radius: float, nodes: int = 64) -> tuple[float, float]:
    """F of S^k(sqrt(2k)) x [-L, L] at (0, 1) by product quadrature, and a tail bound.

    The exact F of the untruncated cylinder lies in ``[value, value + bound]``
    up to the quadrature error, which is far below the bound's size for the
    default node count.
    """
    if k not in (1, 2):
        raise UnsupportedIndex("cylinder check covers k in {1, 2}")
    L = float(truncation_radius)
    if not L > 0:
        raise ValueError("truncation radius must be positive")
    r = math.sqrt(2 * k)
    n = k + 1
    if k == 1:
        theta = 2 * np.pi * np.arange(nodes) / nodes
        pts = r * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        sphere_w = np.full(nodes, 2 * np.pi * r / nodes)
    else:
        u, wu = np.polynomial.legendre.leggauss(nodes)
        phi = 2 * np.pi * np.arange(2 * nodes) / (2 * nodes)
        U, P = np.meshgrid(u, phi, indexing="ij")
        s = np.sqrt(1 - U ** 2)
        pts = r * np.stack([s * np.cos(P), s * np.sin(P), U], axis=-1).reshape(-1, 3)
        sphere_w = (np.outer(wu, np.full(2 * nodes, 2 * np.pi / (2 * nodes))) * r * r).ravel()
    sphere_part = np.sum(sphere_w * np.exp(-np.sum(pts ** 2, axis=1) / 4))
    # axial factor: composite Gauss-Legendre on unit panels
    panels = max(1, int(math.ceil(2 * L)))
    zn, zw = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(-L, L, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    z = (mids[:, None] + half[:, None] * zn[None, :]).ravel()
    w = (half[:, None] * zw[None, :]).ravel()
    axial = np.sum(w * np.exp(-z ** 2 / 4))
    norm = (4 * math.pi) ** (-n / 2)
    value = norm * sphere_part * axial
    # int_{|z|>L} e^{-z^2/4} dz = 2 sqrt(pi) erfc(L/2) <= (4/L) e^{-L^2/4}
    tail = min(2 * math.sqrt(math.pi) * erfc(L / 2) * (1 + 1e-12), 4 / L * math.exp(-L * L / 4))
    return float(value), float(norm * sphere_part * tail)


# -- Ecker's localisation ----------------------------------------------------------


def ecker_cutoff(x, t, spec: CutoffSpec, n: int):
    """``max(0, 1 - (|x - x0|^2 + 2n (t - t0)) / rho^2)^3``; ``x`` may be batched."""
    d = np.asarray(x, dtype=float) - spec.center
    r2 = np.sum(d * d, axis=-1)
    base = 1.0 - (r2 + 2 * n * (t - spec.time)) / spec.radius ** 2
    return np.maximum(base, 0.0) ** 3


def localized_f(surface: DiscreteHypersurface, g: GaussianCenter, t: float, spec: CutoffSpec) -> float:
    """Quadrature of ``Phi_(x0, t0)(., t) * phi_(x0, t0), rho(., t)`` over the surface.

    ``g.scale`` carries the target time ``t0`` of the backward kernel, so the
    kernel scale is ``t0 - t``.
    """
    tau = g.scale - t
    if not tau > 0:
        raise NonpositiveScale(f"flow time {t} is not before the kernel time {g.scale}")
    nodes, w = surface.quadrature
    kernel = phi_kernel(nodes - g.center, tau, surface.n)
    cut = ecker_cutoff(nodes, t, spec, surface.n)
    return float(np.sum(w * kernel * cut))
