"""Column geometry in the simplex and the non-negative rank decision.

A stochastic n x m matrix is a cloud of m points in the simplex.  Its
non-negative rank is the fewest vertices of a polytope squeezed between the
cloud and the simplex.  For rank-3 matrices the cloud spans a plane, and the
question becomes a planar nested-polygon problem between the hull of the
cloud and the polygon cut out of the simplex by that plane.

The planar solver follows the greedy tangent-chord wrap: from a boundary
point, draw the chord of the outer polygon that touches the inner hull with
the hull on its left, jump to its far end and repeat.  Whether ``k`` chords
can close up is decided exactly by splitting the outer boundary into pieces
on which the k-fold wrap map is a single fractional-linear function of the
start parameter, then maximising the resulting quadratic on every piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import lp
from .errors import (
    DegenerateSection,
    DimensionMismatch,
    InnerOutsideOuter,
    NegativeEntry,
    NotStochastic,
    WrongRank,
)
from .factorize import (
    FIT_TOL,
    Factorization,
    NmfOptions,
    make_factorization,
    nnrank_upper_witness,
    trivial_factorization,
)
from .matcore import Matrix, rank, to_stochastic

#: absolute tolerance for float-backend geometry; the exact backend uses none
TAU_GEO = 1e-9


# ---------------------------------------------------------------- data types


@dataclass(frozen=True)
class PointCloud:
    dim: int
    points: tuple
    labels: tuple


@dataclass(frozen=True)
class Chart:
    """Affine map ``(a, b) -> origin + a*e1 + b*e2`` into the dropped-coordinate simplex."""

    origin: tuple
    e1: tuple
    e2: tuple

    def lift(self, p) -> tuple:
        """Chart point -> full stochastic n-vector (last coordinate restored)."""
        a, b = p
        x = [o + a * u + b * v for o, u, v in zip(self.origin, self.e1, self.e2)]
        one = Fraction(1) if isinstance(a, Fraction) else 1.0
        return tuple(x) + (one - sum(x),)


@dataclass(frozen=True)
class NestedInstance:
    inner: tuple
    outer: tuple
    chart: Chart
    exact: bool

    @property
    def tol(self) -> float:
        return 0 if self.exact else TAU_GEO


@dataclass
class RankResult:
    ordinary_rank: int
    nn_lower: int
    nn_upper: int
    exact: bool
    witness: Optional[Factorization] = None
    method: str = ""
    triangle: Optional[tuple] = None
    instance: Optional[NestedInstance] = field(default=None, repr=False)

    def to_json_obj(self) -> dict:
        out = {
            "rank": self.ordinary_rank,
            "nn_lower": self.nn_lower,
            "nn_upper": self.nn_upper,
            "exact": self.exact,
            "method": self.method,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json_obj()
        return out


# ------------------------------------------------------------- 2D primitives


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def orient(a, b, c):
    """Twice the signed area of (a, b, c); positive when counterclockwise."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _sign(x, tol) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def _close(p, q, tol) -> bool:
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def convex_hull(points: Sequence, tol=0) -> list:
    """Counterclockwise hull vertices (Andrew's monotone chain), collinear points dropped."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        if len(pts) == 2 and _close(pts[0], pts[1], tol):
            return [pts[0]]
        return pts

    def half(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and orient(h[-2], h[-1], p) <= tol:
                h.pop()
            h.append(p)
        return h

    lower, upper = half(pts), half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and _close(hull[0], hull[1], tol):
        return hull[:1]
    return hull


def polygon_contains(poly: Sequence, z, tol=0) -> bool:
    """Closed containment of ``z`` in a counterclockwise convex polygon."""
    k = len(poly)
    if k == 1:
        return _close(poly[0], z, tol)
    if k == 2:
        a, b = poly
        if _sign(orient(a, b, z), tol) != 0:
            return False
        dot = (z[0] - a[0]) * (b[0] - a[0]) + (z[1] - a[1]) * (b[1] - a[1])
        ll = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
        return -tol <= dot <= ll + tol
    return all(orient(poly[i], poly[(i + 1) % k], z) >= -tol for i in range(k))


# ---------------------------------------------------------- matrix geometry


def project_columns(P: Matrix) -> PointCloud:
    """Columns of a stochastic matrix with the last coordinate dropped."""
    tol = 0 if P.is_exact else TAU_GEO
    if P.is_exact:
        ok = P.is_nonnegative() and all(s == 1 for s in P.column_sums())
    else:
        ok = all(x >= -tol for r in P.entries for x in r) and all(
            abs(s - 1) <= tol for s in P.column_sums()
        )
    if not ok:
        raise NotStochastic("columns must be non-negative and sum to one")
    pts = tuple(tuple(c[:-1]) for c in P.columns())
    return PointCloud(P.rows - 1, pts, tuple(range(P.cols)))


def point_in_hull(q: Sequence, generators: Sequence[Sequence], tol: float = TAU_GEO) -> bool:
    """Is ``q`` a convex combination of ``generators``?

    Exact when every coordinate is rational, otherwise an LP with tolerance ``tol``.
    """
    if not generators:
        return False
    d = len(q)
    if any(len(g) != d for g in generators):
        raise DimensionMismatch("all vectors must share one dimension")
    exact = all(isinstance(x, (int, Fraction)) for x in q) and all(
        isinstance(x, (int, Fraction)) for g in generators for x in g
    )
    return lp.convex_weights(q, generators, exact, tol) is not None


def _affine_basis(points: Sequence, exact: bool):
    """Indices of three affinely independent points, or None."""
    tol = 0 if exact else 1e-12
    a = 0
    diffs = [[x - y for x, y in zip(p, points[a])] for p in points]
    b = next((i for i, d in enumerate(diffs) if any(abs(x) > tol for x in d)), None)
    if b is None:
        return None
    db = diffs[b]
    for c, dc in enumerate(diffs):
        if exact:
            if rank(Matrix.exact([db, dc])) == 2:
                return a, b, c
        else:
            sv = np.linalg.svd(np.array([db, dc], dtype=float), compute_uv=False)
            if sv[1] > 1e-9 * max(sv[0], 1.0):
                return a, b, c
    return None


def _chart_for(points: Sequence, exact: bool) -> Chart:
    basis = _affine_basis(points, exact)
    if basis is None:
        raise WrongRank("projected columns do not span a plane")
    a, b, c = basis
    o = tuple(points[a])
    e1 = tuple(x - y for x, y in zip(points[b], o))
    e2 = tuple(x - y for x, y in zip(points[c], o))
    if exact:
        return Chart(o, e1, e2)
    # orthonormal chart centred on the barycentre for the float backend
    o = np.mean(np.array(points, dtype=float), axis=0)
    u = np.array(e1, dtype=float)
    u /= np.linalg.norm(u)
    v = np.array(e2, dtype=float)
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    return Chart(tuple(o.tolist()), tuple(u.tolist()), tuple(v.tolist()))


def chart_coords(chart: Chart, x: Sequence, exact: bool) -> tuple:
    """Coordinates of a point of the chart's plane."""
    d = [xi - oi for xi, oi in zip(x, chart.origin)]
    if not exact:
        return (
            sum(di * ui for di, ui in zip(d, chart.e1)),
            sum(di * vi for di, vi in zip(d, chart.e2)),
        )
    e1, e2 = chart.e1, chart.e2
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            det = e1[i] * e2[j] - e1[j] * e2[i]
            if det:
                a = (d[i] * e2[j] - d[j] * e2[i]) / det
                b = (e1[i] * d[j] - e1[j] * d[i]) / det
                return (a, b)
    raise DegenerateSection("chart basis is degenerate")


def _section_vertices(chart: Chart, exact: bool) -> list:
    """Vertices of {chart point : lifted point >= 0}, counterclockwise."""
    tol = 0 if exact else TAU_GEO
    o, e1, e2 = chart.origin, chart.e1, chart.e2
    # half-planes c0 + a*ca + b*cb >= 0, one per simplex facet
    planes = [(oi, ui, vi) for oi, ui, vi in zip(o, e1, e2)]
    one = Fraction(1) if exact else 1.0
    planes.append((one - sum(o), -sum(e1), -sum(e2)))
    live = []
    for c0, ca, cb in planes:
        if _sign(ca, tol) == 0 and _sign(cb, tol) == 0:
            if c0 < -tol:
                raise DegenerateSection("plane misses the simplex")
            continue
        live.append((c0, ca, cb))
    verts = []
    for i in range(len(live)):
        for j in range(i + 1, len(live)):
            c0, ca, cb = live[i]
            d0, da, db = live[j]
            det = ca * db - cb * da
            if _sign(det, tol * tol) == 0:
                continue
            a = (-c0 * db + cb * d0) / det
            b = (-ca * d0 + c0 * da) / det
            if all(e0 + a * ea + b * eb >= -tol for e0, ea, eb in live):
                verts.append((a, b))
    hull = convex_hull(verts, tol)
    if len(hull) < 3:
        raise DegenerateSection("section of the simplex is not two-dimensional")
    return hull


def section_polygon(P: Matrix) -> NestedInstance:
    """Planar nested-polygon instance of a rank-3 stochastic matrix."""
    cloud = project_columns(P)
    if rank(P) != 3:
        raise WrongRank(f"section needs rank 3, got {rank(P)}")
    exact = P.is_exact
    chart = _chart_for(cloud.points, exact)
    inner = tuple(chart_coords(chart, p, exact) for p in cloud.points)
    outer = tuple(_section_vertices(chart, exact))
    return NestedInstance(inner, outer, chart, exact)


# ------------------------------------------------------ nested polygon solver


class _Wrap:
    """Greedy tangent-chord map on the boundary of the outer polygon.

    Boundary positions are ``(i, t)`` with ``t`` in ``[0, 1)`` on the edge from
    vertex ``i`` to vertex ``i + 1``.  Lifted positions add whole turns to ``i``.
    """

    def __init__(self, inner_hull: Sequence, outer: Sequence, tol):
        self.I = list(inner_hull)
        self.Q = list(outer)
        self.q = len(outer)
        self.tol = tol
        self.D = [
            (self.Q[(i + 1) % self.q][0] - self.Q[i][0], self.Q[(i + 1) % self.q][1] - self.Q[i][1])
            for i in range(self.q)
        ]

    # -- positions

    def point(self, pos):
        i, t = pos
        i %= self.q
        V, D = self.Q[i], self.D[i]
        return (V[0] + t * D[0], V[1] + t * D[1])

    def locate(self, p):
        """Canonical boundary position of a boundary point."""
        tol = self.tol
        best = None
        for i in range(self.q):
            V, D = self.Q[i], self.D[i]
            w = (p[0] - V[0], p[1] - V[1])
            dd = D[0] * D[0] + D[1] * D[1]
            t = (w[0] * D[0] + w[1] * D[1]) / dd
            off = abs(_cross(D[0], D[1], w[0], w[1]))
            if tol:
                off /= math.sqrt(dd)
            if off > tol or not -tol <= t <= 1 + tol:
                continue
            if best is None or off < best[0]:
                best = (off, i, t)
            if not tol:
                break
        if best is None:
            raise InnerOutsideOuter("point is not on the outer boundary")
        _, i, t = best
        if t >= 1 - tol:
            return ((i + 1) % self.q, 0 * t)
        if t <= tol:
            return (i, 0 * t)
        return (i, t)

    # -- one greedy chord

    def _tangent(self, s, pos, forward: bool):
        """Inner vertex the chord from ``s`` pivots on, and whether it runs along the edge."""
        i, t = pos
        tol = self.tol
        if forward:
            B = self.D[i]
            sg = 1
        else:
            edge = i if t != 0 else (i - 1) % self.q
            B = (-self.D[edge][0], -self.D[edge][1])
            sg = -1
        along = False
        best = None
        for z in self.I:
            w = (z[0] - s[0], z[1] - s[1])
            if abs(w[0]) <= tol and abs(w[1]) <= tol:
                continue
            c = sg * _cross(B[0], B[1], w[0], w[1])
            if _sign(c, tol) == 0:
                if B[0] * w[0] + B[1] * w[1] > 0:
                    along = True
                continue
            if best is None:
                best = w
                continue
            o = sg * _cross(best[0], best[1], w[0], w[1])
            if o < -tol or (abs(o) <= tol and w[0] ** 2 + w[1] ** 2 > best[0] ** 2 + best[1] ** 2):
                best = w
        return best, along, B

    def _exit(self, s, w):
        lam = None
        for j in range(self.q):
            V, D = self.Q[j], self.D[j]
            rate = _cross(D[0], D[1], w[0], w[1])
            if rate < -self.tol:
                slack = _cross(D[0], D[1], s[0] - V[0], s[1] - V[1])
                cand = -slack / rate
                if lam is None or cand < lam:
                    lam = cand
        return (s[0] + lam * w[0], s[1] + lam * w[1])

    def step(self, pos, forward: bool = True):
        """Next boundary position and the inner pivot (None when running along an edge)."""
        i, t = pos
        s = self.point(pos)
        w, along, B = self._tangent(s, (i % self.q, t), forward)
        if along or w is None:
            if forward:
                return ((i + 1) % self.q, 0 * t), None
            # backwards along the edge to its start vertex
            edge = i if t != 0 else (i - 1) % self.q
            return (edge, 0 * t), None
        u = (s[0] + w[0], s[1] + w[1])
        p = self._exit(s, w)
        return self.locate(p), u

    # -- lifted iteration

    def advance(self, L: int, t):
        """Forward step from a lifted position; returns (L', t', pivot)."""
        i = L % self.q
        (j, t2), u = self.step((i, t))
        dj = (j - i) % self.q
        if dj == 0 and t2 <= t:
            dj = self.q
        return L + dj, t2, u

    def wraps(self, pos, k):
        """Does the k-chord greedy from ``pos`` close (reach one full turn)?"""
        L, t = pos
        path = [(L, t)]
        for _ in range(k):
            L, t, _ = self.advance(L, t)
            path.append((L, t))
        L0, t0 = path[0]
        ok = (L, t) >= (L0 + self.q, t0 - self.tol) if self.tol else (L, t) >= (L0 + self.q, t0)
        return ok, path

    def mobius(self, pos, u):
        """Homogeneous 2x2 map of edge parameters for the chord through pivot ``u``."""
        i, _ = pos
        one = 1 if not self.tol else 1.0
        j, t2 = self.step(pos)[0]
        if u is None or t2 == 0:
            return (0 * one, t2, 0 * one, one), j
        De, Dj = self.D[i], self.D[j]
        A = (self.Q[i][0] - u[0], self.Q[i][1] - u[1])
        C = (self.Q[j][0] - u[0], self.Q[j][1] - u[1])
        a = -_cross(De[0], De[1], C[0], C[1])
        b = -_cross(A[0], A[1], C[0], C[1])
        c = _cross(De[0], De[1], Dj[0], Dj[1])
        d = _cross(A[0], A[1], Dj[0], Dj[1])
        return (a, b, c, d), j

    # -- breakpoints

    def _line_hits(self, p, r):
        """Boundary positions where the line through p and r meets the outer polygon."""
        out = []
        dx, dy = r[0] - p[0], r[1] - p[1]
        if abs(dx) <= self.tol and abs(dy) <= self.tol:
            return out
        for i in range(self.q):
            V, D = self.Q[i], self.D[i]
            den = _cross(dx, dy, D[0], D[1])
            if den == 0 or (self.tol and abs(den) <= self.tol):
                continue
            t = _cross(dx, dy, p[0] - V[0], p[1] - V[1]) / den
            if 0 <= t < 1:
                out.append((i, t))
        return out

    def base_breakpoints(self):
        pts = [(i, 0 * self.Q[0][0]) for i in range(self.q)]
        for z in self.I:
            try:
                pts.append(self.locate(z))
            except InnerOutsideOuter:
                pass
        for a in range(len(self.I)):
            for b in range(a + 1, len(self.I)):
                pts += self._line_hits(self.I[a], self.I[b])
            for V in self.Q:
                pts += self._line_hits(self.I[a], V)
        return pts

    def dedupe(self, positions):
        out = []
        for p in sorted(positions):
            if out and out[-1][0] == p[0] and abs(out[-1][1] - p[1]) <= self.tol:
                continue
            out.append(p)
        return out


def _candidates(W: _Wrap, k: int):
    """Start positions that decide whether k chords can close, exactly."""
    level = W.dedupe(W.base_breakpoints())
    allpts = list(level)
    for _ in range(k - 1):
        level = W.dedupe([W.step(p, forward=False)[0] for p in level])
        allpts += level
    bps = W.dedupe(allpts)
    cands = list(bps)
    for idx, (i, l) in enumerate(bps):
        nxt = bps[(idx + 1) % len(bps)]
        r = nxt[1] if nxt[0] == i else (1 if not W.tol else 1.0)
        if nxt[0] != i and nxt[0] != (i + 1) % W.q:
            r = 1 if not W.tol else 1.0
        if r <= l:
            continue
        m = (l + r) / 2
        cands.append((i, m))
        # compose the fractional-linear maps along the path from the midpoint
        L, t = i, m
        M = (1, 0, 0, 1)
        for _ in range(k):
            (a, b, c, d), _ = W.mobius((L % W.q, t), W.advance(L, t)[2])
            M = (
                a * M[0] + b * M[2],
                a * M[1] + b * M[3],
                c * M[0] + d * M[2],
                c * M[1] + d * M[3],
            )
            L, t, _ = W.advance(L, t)
        if L != i + W.q:
            continue
        a, b, c, d = M
        den = c * m + d
        if den == 0:
            continue
        sg = 1 if den > 0 else -1
        # sg * ((a s + b) - s (c s + d)) is a quadratic with leading coefficient -sg*c
        if -sg * c < 0:
            v = (a - d) / (2 * c)
            if l < v < r:
                cands.append((i, v))
    return cands


def nested_polygon_exists(inst: NestedInstance, k: int):
    """Vertex list of a k-gon nested between inner hull and outer polygon, or None."""
    tol = inst.tol
    hull = convex_hull(inst.inner, tol)
    if len(hull) <= k:
        return list(hull)
    if k < 3:
        return None
    W = _Wrap(hull, inst.outer, tol)
    for pos in _candidates(W, k):
        ok, path = W.wraps(pos, k)
        if ok:
            poly = [W.point((L % W.q, t)) for L, t in path[:k]]
            if all(polygon_contains(_ccw(poly, tol), z, tol * 10) for z in hull):
                return poly
    return None


def _ccw(poly, tol):
    h = convex_hull(poly, tol)
    return h if len(h) >= 3 else poly


def greedy_polygon(inst: NestedInstance, start=None):
    """Greedy wrap from one start; its size exceeds the optimum by at most one."""
    tol = inst.tol
    hull = convex_hull(inst.inner, tol)
    W = _Wrap(hull, inst.outer, tol)
    L, t = start if start is not None else (0, 0 * inst.outer[0][0])
    L0, t0 = L, t
    poly = [W.point((L, t))]
    for _ in range(4 * (len(hull) + W.q) + 4):
        L, t, _ = W.advance(L, t)
        if (L, t) >= (L0 + W.q, t0):
            return poly
        poly.append(W.point((L % W.q, t)))
    raise RuntimeError("greedy wrap failed to close")


def min_nested_polygon(inst: NestedInstance) -> tuple[int, list]:
    """Fewest vertices of a convex polygon between the inner hull and the outer polygon."""
    tol = inst.tol
    outer = list(inst.outer)
    for z in inst.inner:
        if not polygon_contains(outer, z, tol):
            raise InnerOutsideOuter(f"inner point {z} lies outside the outer polygon")
    hull = convex_hull(inst.inner, tol)
    if len(hull) <= 2:
        return len(hull), list(hull)
    greedy = greedy_polygon(inst)
    for k in range(3, len(greedy)):
        poly = nested_polygon_exists(inst, k)
        if poly is not None:
            return k, poly
    return len(greedy), greedy


# ------------------------------------------------------------ rank decision


def _barycentric(tri, z):
    a, b, c = tri
    det = orient(a, b, c)
    l1 = orient(z, b, c) / det
    l2 = orient(a, z, c) / det
    return (l1, l2, 1 - l1 - l2)


def _lift_witness(P: Matrix, inst: NestedInstance, poly: Sequence) -> Factorization:
    """Dyads from a nested polygon: lifted vertices times convex weights of each column."""
    exact = inst.exact
    sig = P.column_sums()
    left = []
    for v in poly:
        x = inst.chart.lift(v)
        if not exact:
            x = tuple(max(0.0, xi) for xi in x)
        left.append(x)
    k = len(poly)
    right = [[None] * P.cols for _ in range(k)]
    for j, z in enumerate(inst.inner):
        if k == 3 and exact:
            w = _barycentric(tuple(poly), z)
        else:
            w = lp.convex_weights(z, poly, exact)
            if w is None:
                raise InnerOutsideOuter("column not covered by the nested polygon")
        for h in range(k):
            wh = w[h] if exact else max(0.0, float(w[h]))
            right[h][j] = wh * sig[j]
    return make_factorization(left, right, P)


def _segment_witness(P: Matrix) -> Factorization:
    """Rank <= 2: the two extreme stochastic columns generate every other one."""
    S = to_stochastic(P)
    cols = S.columns()
    sig = P.column_sums()
    exact = P.is_exact
    base = cols[0]
    far = max(range(len(cols)), key=lambda j: sum((x - y) ** 2 for x, y in zip(cols[j], base)))
    a = cols[far]
    d = [x - y for x, y in zip(base, a)]
    dd = sum(x * x for x in d)
    if dd == 0:
        return make_factorization([a], [sig], P)
    ts = [sum((x - y) * e for x, y, e in zip(c, a, d)) / dd for c in cols]
    j2 = max(range(len(cols)), key=lambda j: ts[j])
    b = cols[j2]
    span = ts[j2]
    right_a, right_b = [], []
    for j, tj in enumerate(ts):
        lam = tj / span
        if not exact:
            lam = min(1.0, max(0.0, lam))
        right_a.append((1 - lam) * sig[j])
        right_b.append(lam * sig[j])
    return make_factorization([a, b], [right_a, right_b], P)


def nonneg_rank(
    P: Matrix, fit_tol: float = FIT_TOL, opts: NmfOptions = NmfOptions()
) -> RankResult:
    """Ordinary rank plus bounds (exact when possible) on the non-negative rank."""
    if not P.is_nonnegative():
        raise NegativeEntry("non-negative rank needs a non-negative matrix")
    S = to_stochastic(P)
    n, m = P.shape
    r = rank(P)
    small = min(n, m)
    if r <= 2:
        W = _segment_witness(P) if r else None
        return RankResult(r, r, r, True, W, "rank<=2")
    if small <= r:
        return RankResult(r, r, r, True, trivial_factorization(P), "rank=min(n,m)")
    if r == 3:
        inst = section_polygon(S)
        tri = nested_polygon_exists(inst, 3)
        if tri is not None:
            W = _lift_witness(P, inst, tri)
            return RankResult(3, 3, 3, True, W, "nested-triangle", tuple(tri), inst)
        if small == 4:
            return RankResult(3, 4, 4, True, trivial_factorization(P), "no-triangle", None, inst)
        k, poly = min_nested_polygon(inst)
        best, W = k, _lift_witness(P, inst, poly)
        up, F = nnrank_upper_witness(P, fit_tol, opts)
        if up < best:
            best, W = up, F
        if small < best:
            best, W = small, trivial_factorization(P)
        return RankResult(3, 4, best, best == 4, W, "no-triangle-bounds", None, inst)
    up, F = nnrank_upper_witness(P, fit_tol, opts)
    up = max(up, r)
    return RankResult(r, r, up, up == r, F, "nmf-upper")
