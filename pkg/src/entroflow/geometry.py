"""Discrete closed hypersurfaces: polylines in R^2 and triangle meshes in R^3.

Curvature conventions: ``nu`` is the outward unit normal and ``H = div nu``,
so a round sphere of radius R in R^{n+1} has ``H = n / R``.  The mean
curvature vector is ``-H nu`` and equals the Laplace-Beltrami of position.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.spatial import ConvexHull, cKDTree

from .errors import DegenerateElement, DimensionMismatch, InvalidSurface, RemeshFailure

logger = logging.getLogger(__name__)

#: Relative (to the diameter) tolerance used for every degeneracy test.
DEGENERACY_TOL = 1e-12

_GAUSS2 = 0.5 / np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class DiscreteHypersurface:
    """A closed polyline (n=1) or oriented triangle mesh (n=2).

    ``orientation`` is +1 when the stored order is the outward convention
    (counter-clockwise polylines, right-hand-rule faces pointing out) and -1
    after an orientation-reversing map.  ``closed=False`` is only accepted for
    triangle meshes and exists for planar patches and graphs.
    """

    vertices: np.ndarray
    faces: np.ndarray | None = None
    orientation: int = 1
    closed: bool = True

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise InvalidSurface(f"vertices must have shape (V, 2) or (V, 3), got {v.shape}")
        if len(v) < 3:
            raise InvalidSurface("need at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidSurface("non-finite vertex coordinates")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        if self.orientation not in (1, -1):
            raise InvalidSurface("orientation must be +1 or -1")

        if v.shape[1] == 2:
            if self.faces is not None:
                raise InvalidSurface("polylines carry no faces")
            if not self.closed:
                raise InvalidSurface("open polylines are not supported")
        else:
            if self.faces is None:
                raise InvalidSurface("triangle meshes need faces")
            f = np.array(self.faces, dtype=np.int64)
            if f.ndim != 2 or f.shape[1] != 3 or len(f) == 0:
                raise InvalidSurface("faces must have shape (F, 3)")
            if f.min() < 0 or f.max() >= len(v):
                raise InvalidSurface("face index out of range")
            f.flags.writeable = False
            object.__setattr__(self, "faces", f)
            if self.closed:
                self._check_closed_manifold()

        if self.edge_lengths.min() <= DEGENERACY_TOL * self.bbox_diagonal:
            raise DegenerateElement("zero-length edge")

    def _check_closed_manifold(self):
        f = self.faces
        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        if np.any(directed[:, 0] == directed[:, 1]):
            raise InvalidSurface("face with repeated vertex")
        nv = len(self.vertices)
        key = directed[:, 0] * nv + directed[:, 1]
        rev = directed[:, 1] * nv + directed[:, 0]
        uniq, counts = np.unique(key, return_counts=True)
        if np.any(counts > 1):
            raise InvalidSurface("directed edge used twice (inconsistent orientation or non-manifold)")
        if not np.all(np.isin(rev, uniq, assume_unique=False)):
            raise InvalidSurface("boundary edge on a surface declared closed")

    # -- basic structure -------------------------------------------------

    @property
    def n(self) -> int:
        """Intrinsic dimension."""
        return self.vertices.shape[1] - 1

    @property
    def ambient(self) -> int:
        return self.vertices.shape[1]

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def elements(self) -> np.ndarray:
        """Segments ``(V, 2)`` for polylines, faces ``(F, 3)`` for meshes."""
        if self.n == 1:
            idx = np.arange(self.num_vertices)
            return np.stack([idx, np.roll(idx, -1)], axis=1)
        return self.faces

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted index pairs."""
        if self.n == 1:
            return self.elements
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)

    @cached_property
    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(np.ptp(self.vertices, axis=0)))

    @cached_property
    def diameter(self) -> float:
        pts = self.vertices
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:  # flat point sets have no full-dimensional hull
            pass
        best = 0.0
        for start in range(0, len(pts), 512):
            block = pts[start:start + 512]
            d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
            best = max(best, float(d2.max()))
        return float(np.sqrt(best))

    @cached_property
    def element_measures(self) -> np.ndarray:
        p = self.vertices[self.elements]
        if self.n == 1:
            return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @cached_property
    def total_measure(self) -> float:
        """Length (n=1) or area (n=2)."""
        return float(self.element_measures.sum())

    @cached_property
    def centroid(self) -> np.ndarray:
        p = self.vertices[self.elements].mean(axis=1)
        w = self.element_measures
        return (w[:, None] * p).sum(0) / w.sum()

    @cached_property
    def enclosed_volume(self) -> float:
        """Signed enclosed area (n=1, shoelace) or volume (n=2, divergence theorem)."""
        v = self.vertices
        if self.n == 1:
            w = np.roll(v, -1, axis=0)
            vol = 0.5 * np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1])
        else:
            p = v[self.faces]
            vol = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0
        return float(self.orientation * vol)

    @cached_property
    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights: 2-point Gauss per segment, mid-edge rule per triangle."""
        p = self.vertices[self.elements]
        m = self.element_measures
        if self.n == 1:
            d = p[:, 1] - p[:, 0]
            nodes = np.concatenate([p[:, 0] + (0.5 - _GAUSS2) * d, p[:, 0] + (0.5 + _GAUSS2) * d])
            weights = np.concatenate([0.5 * m, 0.5 * m])
        else:
            nodes = np.concatenate([0.5 * (p[:, 0] + p[:, 1]), 0.5 * (p[:, 1] + p[:, 2]),
                                    0.5 * (p[:, 2] + p[:, 0])])
            weights = np.tile(m / 3.0, 3)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        return nodes, weights

    def with_vertices(self, vertices) -> "DiscreteHypersurface":
        """Same connectivity and orientation, new positions.

        Connectivity was validated when ``self`` was built, so only the
        per-vertex checks run again.
        """
        v = np.array(vertices, dtype=float)
        if v.shape != self.vertices.shape:
            raise InvalidSurface("vertex array shape differs from the template")
        if not np.all(np.isfinite(v)):
            raise InvalidSurface("non-finite vertex coordinates")
        v.flags.writeable = False
        out = object.__new__(DiscreteHypersurface)
        for name, value in (("vertices", v), ("faces", self.faces), ("orientation", self.orientation),
                            ("closed", self.closed)):
            object.__setattr__(out, name, value)
        for name in ("elements", "edges"):
            if name in self.__dict__:
                out.__dict__[name] = self.__dict__[name]
        if out.edge_lengths.min() <= DEGENERACY_TOL * out.bbox_diagonal:
            raise DegenerateElement("zero-length edge")
        return out

    def validate(self) -> None:
        """Full invariant check, including the O(V^2) simple-polygon test for n=1."""
        tol = DEGENERACY_TOL * self.diameter
        if self.edge_lengths.min() <= tol:
            raise DegenerateElement("zero-length edge")
        if self.n == 2 and self.element_measures.min() <= tol * tol:
            raise DegenerateElement("zero-area triangle")
        if self.n == 1 and _polyline_self_intersects(self.vertices, tol):
            raise InvalidSurface("polyline is not simple")


def _polyline_self_intersects(v: np.ndarray, tol: float) -> bool:
    a = v
    b = np.roll(v, -1, axis=0)
    nv = len(v)
    idx = np.arange(nv)

    def cross(o, p, q):
        return (p[..., 0] - o[..., 0]) * (q[..., 1] - o[..., 1]) - (p[..., 1] - o[..., 1]) * (q[..., 0] - o[..., 0])

    for start in range(0, nv, 256):
        i = idx[start:start + 256]
        ai, bi = a[i][:, None], b[i][:, None]
        aj, bj = a[None], b[None]
        d1 = cross(ai, bi, aj)
        d2 = cross(ai, bi, bj)
        d3 = cross(aj, bj, ai)
        d4 = cross(aj, bj, bi)
        hit = (d1 * d2 < -tol * tol) & (d3 * d4 < -tol * tol)
        gap = np.abs(i[:, None] - idx[None, :])
        hit &= (gap > 1) & (gap < nv - 1)
        if hit.any():
            return True
    return False


@dataclass(frozen=True, eq=False)
class CurvatureField:
    mean_curvature: np.ndarray
    normal: np.ndarray
    vertex_area: np.ndarray
    second_form_norm_sq: np.ndarray | None = None
    # mean curvature from the same local fit as |A|^2 (equal to H for curves)
    fitted_mean_curvature: np.ndarray | None = None

    @property
    def mean_curvature_vector(self) -> np.ndarray:
        return -self.mean_curvature[:, None] * self.normal


# -- curvature ---------------------------------------------------------------


def laplacian(surface: DiscreteHypersurface) -> tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness matrix ``L`` (positive semi-definite) and lumped vertex areas ``m``.

    The Laplace-Beltrami of a vertex function f is ``-(L f) / m``.  For n=1
    this is the arc-length second difference; for n=2 the cotangent Laplacian
    with mixed Voronoi areas.
    """
    if surface.n == 1:
        return _polyline_laplacian(surface)
    return _cotan_laplacian(surface)


def _polyline_laplacian(surface):
    v = surface.vertices
    nv = len(v)
    seg = surface.elements
    lengths = surface.element_measures
    if lengths.min() <= DEGENERACY_TOL * surface.bbox_diagonal:
        raise DegenerateElement("zero-length segment")
    w = 1.0 / lengths
    i, j = seg[:, 0], seg[:, 1]
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-w, -w, w, w])
    L = sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
    mass = 0.5 * (lengths + np.roll(lengths, 1))
    return L, mass


def _face_geometry(surface):
    v = surface.vertices
    f = surface.faces
    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    # e_k is the edge opposite corner k
    e0, e1, e2 = p2 - p1, p0 - p2, p1 - p0
    n = np.cross(p1 - p0, p2 - p0)
    dbl_area = np.linalg.norm(n, axis=1)
    if dbl_area.min() <= (DEGENERACY_TOL * surface.bbox_diagonal) ** 2:
        raise DegenerateElement("zero-area triangle")
    # cot at corner k = <a, b> / |a x b| for the two edges leaving corner k
    cot0 = -np.einsum("ij,ij->i", e1, e2) / dbl_area
    cot1 = -np.einsum("ij,ij->i", e2, e0) / dbl_area
    cot2 = -np.einsum("ij,ij->i", e0, e1) / dbl_area
    return (e0, e1, e2), np.stack([cot0, cot1, cot2], axis=1), n, dbl_area


def _mixed_areas(surface, edges, cots, dbl_area):
    f = surface.faces
    nv = surface.num_vertices
    area = 0.5 * dbl_area
    sq = np.stack([np.einsum("ij,ij->i", e, e) for e in edges], axis=1)
    # Voronoi share of corner k uses the two edges incident to k
    vor = np.empty_like(sq)
    vor[:, 0] = (sq[:, 2] * cots[:, 2] + sq[:, 1] * cots[:, 1]) / 8.0
    vor[:, 1] = (sq[:, 0] * cots[:, 0] + sq[:, 2] * cots[:, 2]) / 8.0
    vor[:, 2] = (sq[:, 1] * cots[:, 1] + sq[:, 0] * cots[:, 0]) / 8.0
    obtuse = cots < 0
    any_obtuse = obtuse.any(axis=1)
    share = np.where(any_obtuse[:, None], np.where(obtuse, area[:, None] / 2, area[:, None] / 4), vor)
    mass = np.bincount(f.ravel(), weights=share.ravel(), minlength=nv)
    return mass


def _cotan_laplacian(surface):
    f = surface.faces
    nv = surface.num_vertices
    edges, cots, _, dbl_area = _face_geometry(surface)
    # edge opposite corner k joins the other two corners
    i = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    j = np.concatenate([f[:, 2], f[:, 0], f[:, 1]])
    w = 0.5 * np.concatenate([cots[:, 0], cots[:, 1], cots[:, 2]])
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-w, -w, w, w])
    L = sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
    mass = _mixed_areas(surface, edges, cots, dbl_area)
    if mass.min() <= (DEGENERACY_TOL * surface.bbox_diagonal) ** 2:
        raise DegenerateElement("mixed area underflow")
    return L, mass


def vertex_normals(surface: DiscreteHypersurface) -> np.ndarray:
    """Outward unit normals; angle-weighted face normals for meshes."""
    v = surface.vertices
    if surface.n == 1:
        t = np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)
        nrm = surface.orientation * np.stack([t[:, 1], -t[:, 0]], axis=1)
        return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
    f = surface.faces
    p = v[f]
    fn = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    fn /= np.linalg.norm(fn, axis=1, keepdims=True)
    acc = np.zeros_like(v)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        np.add.at(acc, f[:, k], ang[:, None] * fn)
    acc *= surface.orientation
    return acc / np.linalg.norm(acc, axis=1, keepdims=True)


def compute_curvature(surface: DiscreteHypersurface, second_form: bool = True) -> CurvatureField:
    """Per-vertex mean curvature, outward normal, lumped area and |A|^2.

    Polylines use the circumscribed circle through each vertex and its two
    neighbours (exact on circular arcs) with half-adjacent-length weights.
    Meshes use the cotangent Laplacian of position with mixed Voronoi areas,
    and fit a quadric over the two-ring for the principal curvatures.
    ``second_form=False`` skips the quadric fit.
    """
    if surface.n == 1:
        return _polyline_curvature(surface)
    L, mass = _cotan_laplacian(surface)
    hvec = -(L @ surface.vertices) / mass[:, None]
    nu = vertex_normals(surface)
    mag = np.linalg.norm(hvec, axis=1)
    sign = np.where(np.einsum("ij,ij->i", hvec, nu) > 0, -1.0, 1.0)
    H = sign * mag
    A2, Hfit = _quadric_second_form(surface, nu) if second_form else (None, None)
    return CurvatureField(H, nu, mass, A2, Hfit)


def _polyline_curvature(surface):
    v = surface.vertices
    a = np.roll(v, 1, axis=0)
    c = np.roll(v, -1, axis=0)
    u = a - v
    w = c - v
    uu = np.einsum("ij,ij->i", u, u)
    ww = np.einsum("ij,ij->i", w, w)
    tol = (DEGENERACY_TOL * surface.bbox_diagonal) ** 2
    if min(uu.min(), ww.min()) <= tol:
        raise DegenerateElement("zero-length segment")
    d = 2.0 * (u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0])
    # circumcentre relative to v is p / d; curvature vector is p * d / |p|^2
    p = np.stack([w[:, 1] * uu - u[:, 1] * ww, u[:, 0] * ww - w[:, 0] * uu], axis=1)
    kvec = p * (d / np.einsum("ij,ij->i", p, p))[:, None]
    chord_normal = vertex_normals(surface)
    kmag = np.linalg.norm(kvec, axis=1)
    sign = np.where(np.einsum("ij,ij->i", kvec, chord_normal) > 0, -1.0, 1.0)
    H = sign * kmag
    flat = kmag <= 1e-14 / surface.bbox_diagonal
    nu = np.where(flat[:, None], chord_normal, -kvec / np.where(flat, 1.0, H)[:, None])
    mass = 0.5 * (np.sqrt(uu) + np.sqrt(ww))
    return CurvatureField(H, nu, mass, H * H, H)


def _two_ring(surface):
    nv = surface.num_vertices
    e = surface.edges
    adj = sp.csr_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])),
                        shape=(nv, nv))
    ring = (adj + adj @ adj).tocsr()
    ring.setdiag(0)
    ring.eliminate_zeros()
    ring.sort_indices()
    counts = np.diff(ring.indptr)
    kmax = counts.max()
    idx = np.zeros((nv, kmax), dtype=np.int64)
    mask = np.arange(kmax)[None, :] < counts[:, None]
    idx[mask] = ring.indices
    return idx, mask


def _quadric_second_form(surface, nu):
    v = surface.vertices
    idx, mask = _two_ring(surface)
    # tangent frame
    helper = np.where(np.abs(nu[:, [0]]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    t1 = np.cross(nu, helper)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(nu, t1)
    d = v[idx] - v[:, None, :]
    x = np.einsum("vkj,vj->vk", d, t1)
    y = np.einsum("vkj,vj->vk", d, t2)
    z = np.einsum("vkj,vj->vk", d, nu)
    # scale-free design matrix
    h = np.sqrt((np.where(mask, x * x + y * y, 0.0)).sum(1) / mask.sum(1))[:, None]
    xs, ys, zs = x / h, y / h, z / h
    # the centre vertex enters as one more sample rather than as a hard
    # constraint, so a vertex sitting slightly off the smooth surface (a fresh
    # edge midpoint, say) does not bend the fitted quadric around itself
    ones = np.ones_like(xs[:, :1])
    zero = np.zeros_like(xs[:, :1])
    xs, ys, zs = (np.concatenate([zero, q], 1) for q in (xs, ys, zs))
    mask = np.concatenate([ones.astype(bool), mask], 1)
    design = np.stack([xs * xs, xs * ys, ys * ys, xs, ys, np.ones_like(xs)], axis=2) * mask[..., None]
    rhs = zs * mask
    ata = np.einsum("vki,vkj->vij", design, design)
    atb = np.einsum("vki,vk->vi", design, rhs)
    ridge = 1e-12 * np.trace(ata, axis1=1, axis2=2)[:, None, None] * np.eye(6)
    try:
        coef = np.linalg.solve(ata + ridge, atb[..., None])[..., 0]
    except np.linalg.LinAlgError:
        coef = np.einsum("vij,vj->vi", np.linalg.pinv(ata), atb)
    a, b, c, gx, gy = coef.T[:5]
    a, b, c = a / h[:, 0], b / h[:, 0], c / h[:, 0]
    g = 1.0 + gx * gx + gy * gy
    first = np.stack([np.stack([1 + gx * gx, gx * gy], -1), np.stack([gx * gy, 1 + gy * gy], -1)], -2)
    second = np.stack([np.stack([2 * a, b], -1), np.stack([b, 2 * c], -1)], -2) / np.sqrt(g)[:, None, None]
    shape = np.linalg.solve(first, second)
    tr = shape[:, 0, 0] + shape[:, 1, 1]
    det = shape[:, 0, 0] * shape[:, 1, 1] - shape[:, 0, 1] * shape[:, 1, 0]
    # the fit's z axis is the outward normal, so convex surfaces have negative trace
    return tr * tr - 2.0 * det, -tr


# -- distances -----------------------------------------------------------------


def _closest_on_segments(p, a, b):
    d = b - a
    t = np.einsum("ij,ij->i", p - a, d) / np.einsum("ij,ij->i", d, d)
    t = np.clip(t, 0.0, 1.0)
    return a + t[:, None] * d


def _closest_on_triangles(p, a, b, c):
    # Region tests follow Ericson, Real-Time Collision Detection, 5.1.5.
    ab, ac = b - a, c - a
    ap, bp, cp = p - a, p - b, p - c
    dot = lambda x, y: np.einsum("ij,ij->i", x, y)  # noqa: E731
    d1, d2 = dot(ab, ap), dot(ac, ap)
    d3, d4 = dot(ab, bp), dot(ac, bp)
    d5, d6 = dot(ab, cp), dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        out = a + ab * (vb / denom)[:, None] + ac * (vc / denom)[:, None]
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        cond = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
        out = np.where(cond[:, None], b + w[:, None] * (c - b), out)
        w = d2 / (d2 - d6)
        cond = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        out = np.where(cond[:, None], a + w[:, None] * ac, out)
        cond = (d6 >= 0) & (d5 <= d6)
        out = np.where(cond[:, None], c, out)
        v = d1 / (d1 - d3)
        cond = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        out = np.where(cond[:, None], a + v[:, None] * ab, out)
        cond = (d3 >= 0) & (d4 <= d3)
        out = np.where(cond[:, None], b, out)
        cond = (d1 <= 0) & (d2 <= 0)
        out = np.where(cond[:, None], a, out)
    return out


def point_to_surface_distance(points: np.ndarray, surface: DiscreteHypersurface) -> np.ndarray:
    """Exact distance from each point to the union of the surface's elements."""
    points = np.asarray(points, dtype=float)
    v = surface.vertices
    elem = surface.elements
    corners = v[elem]
    centres = corners.mean(axis=1)
    radius = np.linalg.norm(corners - centres[:, None, :], axis=2).max()
    upper, _ = cKDTree(v).query(points)
    cand = cKDTree(centres).query_ball_point(points, upper + radius * (1 + 1e-12))
    counts = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(points))
    pi = np.repeat(np.arange(len(points)), counts)
    ei = np.fromiter((e for c in cand for e in c), dtype=np.int64, count=int(counts.sum()))
    p = points[pi]
    if surface.n == 1:
        q = _closest_on_segments(p, v[elem[ei, 0]], v[elem[ei, 1]])
    else:
        q = _closest_on_triangles(p, v[elem[ei, 0]], v[elem[ei, 1]], v[elem[ei, 2]])
    dist = np.linalg.norm(p - q, axis=1)
    best = upper.copy()
    np.minimum.at(best, pi, dist)
    return best


def hausdorff_distance(a: DiscreteHypersurface, b: DiscreteHypersurface) -> float:
    """Symmetric Hausdorff distance, vertices of one against elements of the other."""
    if a.ambient != b.ambient:
        raise DimensionMismatch(f"ambient dimensions {a.ambient} and {b.ambient} differ")
    return float(max(point_to_surface_distance(a.vertices, b).max(),
                     point_to_surface_distance(b.vertices, a).max()))


# -- rigid motions and dilations -------------------------------------------------


def transform(surface: DiscreteHypersurface, rotation=None, translation=None,
              dilation: float = 1.0) -> DiscreteHypersurface:
    """Map vertices by ``x -> dilation * rotation @ x + translation``.

    Orientation-reversing orthogonal maps flip the ``orientation`` flag so the
    outward normal stays outward.
    """
    d = surface.ambient
    R = np.eye(d) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(d) if translation is None else np.asarray(translation, dtype=float)
    if R.shape != (d, d) or t.shape != (d,):
        raise DimensionMismatch("rotation/translation do not match the ambient dimension")
    if not dilation > 0:
        raise ValueError("dilation must be positive")
    if np.abs(R.T @ R - np.eye(d)).max() > 1e-12:
        raise ValueError("rotation is not orthogonal")
    if rotation is None and translation is None and dilation == 1.0:
        return surface
    v = dilation * (surface.vertices @ R.T) + t
    sign = 1 if np.linalg.det(R) > 0 else -1
    return DiscreteHypersurface(v, surface.faces, surface.orientation * sign, surface.closed)


# -- remeshing -----------------------------------------------------------------


def remesh(surface: DiscreteHypersurface, target_edge: float, iterations: int = 20) -> DiscreteHypersurface:
    """Bring edge lengths near ``target_edge``.

    Returns ``surface`` itself when every edge is already inside the accepted
    band ([0.8, 1.2] for polylines, [0.66, 1.33] for meshes), so callers can
    detect "no change" by identity.
    """
    if not target_edge > 0:
        raise ValueError("target_edge must be positive")
    if surface.n == 1:
        return _remesh_polyline(surface, target_edge)
    return _remesh_mesh(surface, target_edge, iterations)


def _remesh_polyline(surface, target):
    lengths = surface.element_measures
    if lengths.min() >= 0.8 * target and lengths.max() <= 1.2 * target:
        return surface
    total = lengths.sum()
    count = max(3, int(round(total / target)))
    v = surface.vertices
    s = np.concatenate([[0.0], np.cumsum(lengths)])
    spline = CubicSpline(s, np.vstack([v, v[:1]]), bc_type="periodic")
    # reparametrise by the spline's own arc length
    fine = np.linspace(0.0, s[-1], 16 * max(len(v), count) + 1)
    pts = spline(fine)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    wanted = np.linspace(0.0, arc[-1], count, endpoint=False)
    params = np.interp(wanted, arc, fine)
    out = DiscreteHypersurface(spline(params), None, surface.orientation)
    logger.debug("polyline remesh %d -> %d vertices", len(v), count)
    return out


class _EditableMesh:
    """Mutable triangle soup with vertex-to-face incidence for local edits."""

    def __init__(self, vertices, faces):
        self.v = [np.array(p) for p in vertices]
        self.f = [list(map(int, t)) for t in faces]
        self.alive = [True] * len(self.f)
        self.vf = [set() for _ in self.v]
        for fi, t in enumerate(self.f):
            for k in t:
                self.vf[k].add(fi)
        self.removed_vertices = set()

    def neighbors(self, i):
        out = set()
        for fi in self.vf[i]:
            out.update(self.f[fi])
        out.discard(i)
        return out

    def edge_faces(self, i, j):
        return [fi for fi in self.vf[i] if j in self.f[fi]]

    def edges(self, order=0):
        """Unique edges as tuples; ``order`` +1/-1 sorts by increasing/decreasing length."""
        faces = np.array([t for fi, t in enumerate(self.f) if self.alive[fi]])
        e = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
        e = np.unique(e, axis=0)
        if order:
            v = np.array(self.v)
            length = np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1)
            e = e[np.argsort(order * length, kind="stable")]
        return [(int(a), int(b)) for a, b in e]

    def face_normal(self, t, override=None):
        p = [override.get(k, self.v[k]) if override else self.v[k] for k in t]
        a = p[1] - p[0]
        b = p[2] - p[0]
        return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])

    def vertex_normal(self, i):
        acc = sum(self.face_normal(self.f[fi]) for fi in self.vf[i])
        return acc / np.linalg.norm(acc)

    def _oriented(self, fi, a, b):
        """Third vertex of face ``fi`` and whether it traverses a->b."""
        t = self.f[fi]
        k = t.index(a)
        if t[(k + 1) % 3] == b:
            return t[(k + 2) % 3], True
        return t[(k + 1) % 3], False

    def midpoint(self, i, j):
        p, q = self.v[i], self.v[j]
        ni, nj = self.vertex_normal(i), self.vertex_normal(j)
        avg = ni + nj
        avg /= np.linalg.norm(avg)
        # curved-edge midpoint, exact on circles through p and q with normals ni, nj
        return 0.5 * (p + q) + np.dot(q - p, nj - ni) / 8.0 * avg

    def split(self, i, j):
        fs = self.edge_faces(i, j)
        if len(fs) != 2:
            return False
        m = len(self.v)
        self.v.append(self.midpoint(i, j))
        self.vf.append(set())
        for fi in fs:
            k, forward = self._oriented(fi, i, j)
            a, b = (i, j) if forward else (j, i)
            # face a->b->k becomes a->m->k and m->b->k
            self.f[fi] = [a, m, k]
            self.vf[b].discard(fi)
            self.vf[m].add(fi)
            nf = len(self.f)
            self.f.append([m, b, k])
            self.alive.append(True)
            for x in (m, b, k):
                self.vf[x].add(nf)
        return True

    def collapse(self, i, j, pos, max_len):
        fs = self.edge_faces(i, j)
        if len(fs) != 2:
            return False
        opposite = {self._oriented(fi, i, j)[0] for fi in fs}
        if self.neighbors(i) & self.neighbors(j) != opposite:
            return False
        if len(self.neighbors(i)) <= 3 or len(self.neighbors(j)) <= 3:
            return False
        if any(len(self.neighbors(k)) <= 4 for k in opposite):
            return False
        ring = self.neighbors(i) | self.neighbors(j)
        ring -= {i, j}
        if any(np.linalg.norm(self.v[k] - pos) > max_len for k in ring):
            return False
        override = {i: pos, j: pos}
        for fi in (self.vf[i] | self.vf[j]) - set(fs):
            t = self.f[fi]
            old = self.face_normal(t)
            new = self.face_normal(t, override)
            if np.dot(old, new) <= 0.2 * np.linalg.norm(old) * np.linalg.norm(new):
                return False
        for fi in fs:
            self.alive[fi] = False
            for x in self.f[fi]:
                self.vf[x].discard(fi)
        for fi in list(self.vf[j]):
            self.f[fi] = [i if x == j else x for x in self.f[fi]]
            self.vf[i].add(fi)
        self.vf[j] = set()
        self.v[i] = pos
        self.removed_vertices.add(j)
        return True

    def flip(self, i, j):
        fs = self.edge_faces(i, j)
        if len(fs) != 2:
            return False
        f1, f2 = fs
        k, fwd1 = self._oriented(f1, i, j)
        l, fwd2 = self._oriented(f2, i, j)
        if fwd1 == fwd2 or k == l:
            return False
        if not fwd1:
            f1, f2, k, l = f2, f1, l, k
        # f1 traverses i->j->k, f2 traverses j->i->l
        # interior valence equals the incident face count
        vi, vj = len(self.vf[i]), len(self.vf[j])
        vk, vl = len(self.vf[k]), len(self.vf[l])
        if vi <= 4 or vj <= 4:
            return False
        before = abs(vi - 6) + abs(vj - 6) + abs(vk - 6) + abs(vl - 6)
        after = abs(vi - 7) + abs(vj - 7) + abs(vk - 5) + abs(vl - 5)
        if after >= before:
            return False
        if l in self.neighbors(k):
            return False
        n_old = self.face_normal(self.f[f1]) + self.face_normal(self.f[f2])
        t1, t2 = [k, i, l], [l, j, k]
        n1, n2 = self.face_normal(t1), self.face_normal(t2)
        if min(np.dot(n1, n_old), np.dot(n2, n_old)) <= 0:
            return False
        if np.dot(n1, n2) <= 0.9 * np.linalg.norm(n1) * np.linalg.norm(n2):
            return False
        for fi in (f1, f2):
            for x in self.f[fi]:
                self.vf[x].discard(fi)
        self.f[f1], self.f[f2] = t1, t2
        for fi in (f1, f2):
            for x in self.f[fi]:
                self.vf[x].add(fi)
        return True

    def relax(self, weight=0.5):
        """Move each vertex part way to its neighbour average, within its tangent plane."""
        faces = np.array([t for fi, t in enumerate(self.f) if self.alive[fi]])
        v = np.array(self.v)
        fn = np.cross(v[faces[:, 1]] - v[faces[:, 0]], v[faces[:, 2]] - v[faces[:, 0]])
        nrm = np.zeros_like(v)
        for k in range(3):
            np.add.at(nrm, faces[:, k], fn)
        e = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
        e = np.unique(e, axis=0)
        total = np.zeros_like(v)
        count = np.zeros(len(v))
        np.add.at(total, e[:, 0], v[e[:, 1]])
        np.add.at(total, e[:, 1], v[e[:, 0]])
        np.add.at(count, e.ravel(), 1.0)
        live = count > 0
        nrm[live] /= np.linalg.norm(nrm[live], axis=1, keepdims=True)
        d = np.zeros_like(v)
        d[live] = total[live] / count[live, None] - v[live]
        d -= np.einsum("ij,ij->i", d, nrm)[:, None] * nrm
        moved = v + weight * d
        for i in np.flatnonzero(live):
            self.v[i] = moved[i]

    def compact(self, orientation, closed):
        used = sorted({x for fi, t in enumerate(self.f) if self.alive[fi] for x in t})
        remap = {old: new for new, old in enumerate(used)}
        faces = [[remap[x] for x in t] for fi, t in enumerate(self.f) if self.alive[fi]]
        verts = np.array([self.v[k] for k in used])
        return DiscreteHypersurface(verts, np.array(faces), orientation, closed)


def _remesh_mesh(surface, target, iterations):
    lo, hi = 0.66 * target, 1.33 * target
    lengths = surface.edge_lengths
    if lengths.min() >= lo and lengths.max() <= hi:
        return surface
    mesh = _EditableMesh(surface.vertices, surface.faces)
    for _ in range(iterations):
        changed = False
        # splits, longest first
        for i, j in mesh.edges(order=-1):
            if j in mesh.neighbors(i) and np.linalg.norm(mesh.v[i] - mesh.v[j]) > hi:
                changed |= mesh.split(i, j)
        # collapses, shortest first
        for i, j in mesh.edges(order=1):
            if i in mesh.removed_vertices or j in mesh.removed_vertices:
                continue
            if j not in mesh.neighbors(i) or np.linalg.norm(mesh.v[i] - mesh.v[j]) >= lo:
                continue
            changed |= mesh.collapse(i, j, mesh.midpoint(i, j), hi)
        for i, j in mesh.edges():
            if j in mesh.neighbors(i):
                changed |= mesh.flip(i, j)
        mesh.relax()
        lengths = np.linalg.norm(np.diff(np.array(mesh.v)[np.array(mesh.edges())], axis=1)[:, 0], axis=1)
        if not changed or (lengths.min() >= lo and lengths.max() <= hi):
            break
    try:
        out = mesh.compact(surface.orientation, surface.closed)
    except (InvalidSurface, DegenerateElement) as exc:
        raise RemeshFailure(str(exc)) from exc
    logger.debug("mesh remesh %d -> %d vertices", surface.num_vertices, out.num_vertices)
    return out
