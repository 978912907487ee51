"""Generators for the test geometries: polygons, icospheres, ellipsoids, planar patches."""

import numpy as np
from scipy.spatial import Delaunay

from .geometry import DiscreteHypersurface


def circle(radius=1.0, segments=256, center=(0.0, 0.0), phase=0.0):
    """Regular polygon inscribed in a circle, counter-clockwise."""
    if not radius > 0 or segments < 3:
        raise ValueError("need radius > 0 and at least 3 segments")
    theta = phase + 2 * np.pi * np.arange(segments) / segments
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=1) * radius + np.asarray(center, dtype=float)
    return DiscreteHypersurface(pts)


def ellipse(axes=(2.0, 1.0), segments=256):
    a, b = axes
    theta = 2 * np.pi * np.arange(segments) / segments
    return DiscreteHypersurface(np.stack([a * np.cos(theta), b * np.sin(theta)], axis=1))


def _icosahedron():
    t = (1 + np.sqrt(5)) / 2
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _subdivide(v, f):
    cache = {}
    verts = list(v)

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            p = verts[a] + verts[b]
            verts.append(p / np.linalg.norm(p))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in f:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(out)


def icosphere(radius=1.0, subdivisions=3, center=(0.0, 0.0, 0.0)):
    """Subdivided icosahedron projected to a sphere; 10 * 4**s + 2 vertices."""
    if not radius > 0 or not 0 <= subdivisions <= 7:
        raise ValueError("need radius > 0 and 0 <= subdivisions <= 7")
    v, f = _icosahedron()
    for _ in range(subdivisions):
        v, f = _subdivide(v, f)
    return DiscreteHypersurface(v * radius + np.asarray(center, dtype=float), f)


def ellipsoid(axes=(2.0, 1.0, 1.0), subdivisions=3):
    """Icosphere scaled along the coordinate axes."""
    if min(axes) <= 0:
        raise ValueError("axes must be positive")
    s = icosphere(1.0, subdivisions)
    return s.with_vertices(s.vertices * np.asarray(axes, dtype=float))


def planar_disk(radius=1.0, spacing=0.1, height=None):
    """Open triangulated disk in the plane z = 0, optionally lifted to a graph.

    Vertices lie on concentric rings with near-uniform spacing.  ``height`` is
    a callable ``(x, y) -> z`` applied to the vertices.
    """
    rings = max(1, int(np.ceil(radius / spacing)))
    pts = [np.zeros(2)]
    for k in range(1, rings + 1):
        r = radius * k / rings
        m = max(6, int(round(2 * np.pi * r / spacing)))
        th = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        pts.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))
    xy = np.vstack([p.reshape(-1, 2) for p in pts])
    tri = Delaunay(xy).simplices
    a, b, c = xy[tri[:, 0]], xy[tri[:, 1]], xy[tri[:, 2]]
    orient = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tri[orient < 0] = tri[orient < 0][:, [0, 2, 1]]
    z = np.zeros(len(xy)) if height is None else np.asarray(height(xy[:, 0], xy[:, 1]), dtype=float)
    return DiscreteHypersurface(np.column_stack([xy, z]), tri, closed=False)


def boundary_vertices(surface):
    """Indices of vertices on boundary edges of an open mesh."""
    f = surface.faces
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return np.unique(uniq[counts == 1])
