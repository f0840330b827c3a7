"""Brute-force nested-triangle oracle used to cross-check the exact solver.

Works purely in floating point and shares no code with the exact wrap
analysis: support lines of the inner hull are swept over a fine grid of
outward normals, each line's chord through the outer polygon seeds a
three-chord tangent walk computed from angles, and the resulting triangle
is tested for containment of every inner point.  A hit is confirmed with
an LP before the oracle answers yes.
"""

from __future__ import annotations

import numpy as np

from .lp import float_feasible

DIRECTIONS = 40_000


def _halfplanes(outer: np.ndarray):
    """Rows (a, b, c) with a x + b y <= c describing the CCW polygon."""
    nxt = np.roll(outer, -1, axis=0)
    d = nxt - outer
    normals = np.stack([d[:, 1], -d[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    c = np.einsum("ij,ij->i", normals, outer)
    return normals, c


def _chord_end(s: np.ndarray, w: np.ndarray, normals, c) -> np.ndarray:
    """Farthest point of each ray s + lam w inside the polygon (vectorised)."""
    rate = w @ normals.T
    slack = c[None, :] - s @ normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(rate > 1e-14, slack / rate, np.inf)
    lam = lam.min(axis=1)
    lam = np.where(np.isfinite(lam), np.clip(lam, 0.0, None), 0.0)
    return s + lam[:, None] * w


def _tangent_step(s: np.ndarray, inner: np.ndarray, normals, c) -> np.ndarray:
    """Chord from each s leaving the inner points on its left, as far round as possible."""
    w = inner[None, :, :] - s[:, None, :]
    w = np.where(np.isfinite(w), w, 0.0)
    dist = np.linalg.norm(w, axis=2)
    ang = np.arctan2(w[..., 1], w[..., 0])
    # the inner points all sit within a half-turn seen from s: measure angles
    # clockwise from the direction opposite to their mean
    ref = np.arctan2(w[..., 1].sum(1), w[..., 0].sum(1))
    rel = np.mod(ang - ref[:, None] + np.pi, 2 * np.pi)
    rel = np.where(dist < 1e-12, np.inf, rel)
    idx = rel.argmin(axis=1)
    u = inner[idx]
    return _chord_end(s, u - s, normals, c)


def _contains(tri: np.ndarray, pts: np.ndarray, tol: float) -> np.ndarray:
    a, b, cc = tri[:, 0], tri[:, 1], tri[:, 2]

    def side(p, q, z):
        return (q[:, None, 0] - p[:, None, 0]) * (z[None, :, 1] - p[:, None, 1]) - (
            q[:, None, 1] - p[:, None, 1]
        ) * (z[None, :, 0] - p[:, None, 0])

    s1, s2, s3 = side(a, b, pts), side(b, cc, pts), side(cc, a, pts)
    return ((s1 >= -tol) & (s2 >= -tol) & (s3 >= -tol)).all(axis=1)


def _lp_confirm(tri: np.ndarray, inner: np.ndarray, outer_n, outer_c, tol: float) -> bool:
    if (tri @ outer_n.T - outer_c[None, :]).max() > 1e-7:
        return False
    G = np.vstack([tri.T, np.ones(3)])
    return all(float_feasible(G, np.append(z, 1.0), 1e-7) is not None for z in inner)


def triangle_exists(inner, outer, directions: int = DIRECTIONS, tol: float = 1e-9):
    """Float brute-force answer to "is there a nested triangle?" plus the triangle found."""
    inner = np.asarray([[float(x) for x in p] for p in inner])
    outer = np.asarray([[float(x) for x in p] for p in outer])
    normals, c = _halfplanes(outer)
    theta = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
    nrm = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    # point of the support line, then its chord start (walking against the CCW direction)
    along = np.stack([-nrm[:, 1], nrm[:, 0]], axis=1)
    touch = inner[(inner @ nrm.T).argmax(axis=0)]
    start = _chord_end(touch, -along, normals, c)
    v1 = _tangent_step(start, inner, normals, c)
    v2 = _tangent_step(v1, inner, normals, c)
    tris = np.stack([start, v1, v2], axis=1)
    ok = _contains(tris, inner, tol)
    for i in np.flatnonzero(ok):
        if _lp_confirm(tris[i], inner, normals, c, tol):
            return True, tris[i]
    return False, None
