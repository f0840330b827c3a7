"""Perturbation constructions and empirical probes of the non-negative rank."""

from __future__ import annotations

import enum
import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import BadParameter, DeltaOutOfRange, NoFlip, NonMonotone
from .matcore import (
    BallSpec,
    Matrix,
    frobenius_distance,
    rank,
    sample_ball,
    scaling_factors,
    to_exact,
    to_stochastic,
)
from .simplexgeo import RankResult, nested_polygon_exists, nonneg_rank, section_polygon

#: radius used for the upper-semicontinuity probes on the example families
PROBE_RADIUS = 1e-3


class Family(str, enum.Enum):
    PEPS = "Peps"
    MEPS = "Meps"
    B1 = "B1"
    B2 = "B2"
    COHEN_ROTHBLUM = "CohenRothblum"


_B1 = ((1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1))
_B2 = ((1, 0, 1, 0), (1, 1, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1))


@dataclass(frozen=True)
class FamilySpec:
    name: Family
    epsilon: object = 0

    def __post_init__(self):
        object.__setattr__(self, "name", Family(self.name))
        e = self.epsilon if isinstance(self.epsilon, float) else to_exact(self.epsilon)
        object.__setattr__(self, "epsilon", e)
        if self.name is Family.MEPS and e < 0:
            raise BadParameter("Meps needs epsilon >= 0")
        if self.name is Family.PEPS and abs(e) > 1:
            raise BadParameter("Peps needs |epsilon| <= 1")


def _param(eps):
    """Rational epsilons stay exact; a Python float marks an irrational request."""
    if isinstance(eps, float):
        return eps, False
    return to_exact(eps), True


def build_family(spec: FamilySpec) -> Matrix:
    if spec.name is Family.B1 or spec.name is Family.COHEN_ROTHBLUM:
        return Matrix.exact(_B1)
    if spec.name is Family.B2:
        return Matrix.exact(_B2)
    e, exact = _param(spec.epsilon)
    if spec.name is Family.PEPS:
        rows = [[2, 0, 2, 1 - e], [0, 2, 0, 1 + e], [0, 0, 2, 1 + e], [2, 2, 0, 1 - e]]
        pre = Fraction(1, 4) if exact else 0.25
    else:
        a, b = 1 + e, e
        rows = [[a, b, a, b], [a, b, b, a], [b, a, a, b], [b, a, b, a]]
        pre = 1 / (2 * (1 + 2 * e))
    M = Matrix.exact(rows) if exact else Matrix.floating(rows)
    return M.scale(pre)


def family(name: str, epsilon=0) -> Matrix:
    return build_family(FamilySpec(Family(name), epsilon))


def barycentric(P: Matrix, delta) -> Matrix:
    """Move every column a fraction ``delta`` of the way to the column mean."""
    scaling_factors(P)  # rejects negative entries and zero columns
    exact = P.is_exact and not isinstance(delta, float)
    d = to_exact(delta) if exact else float(delta)
    if not 0 <= d <= 1:
        raise DeltaOutOfRange(f"delta must lie in [0, 1], got {delta}")
    if not exact:
        P = P.to_float()
    cols = P.columns()
    m = len(cols)
    b = [sum(c[i] for c in cols) / m for i in range(P.rows)]
    new = [[c[i] + d * (b[i] - c[i]) for i in range(P.rows)] for c in cols]
    return Matrix.like(list(zip(*new)), P.backend)


def proportional(A: Matrix, B: Matrix) -> bool:
    """Is ``A = lambda * B`` for some scalar (i.e. vectorisations dependent)?"""
    if A.backend is not B.backend:
        A, B = A.to_float(), B.to_float()
    va = [x for r in A.entries for x in r]
    vb = [x for r in B.entries for x in r]
    return rank(Matrix.like([va, vb], A.backend)) < 2


@dataclass
class ProbeReport:
    samples: int
    violations: int
    min_rkplus: int
    max_rkplus: int
    predicate: str
    reference_rkplus: int
    radius: float
    in_scope: bool
    notes: list = field(default_factory=list)
    details: list = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _sample_record(P: Matrix, N: Matrix, res: RankResult) -> dict:
    return {
        "distance": frobenius_distance(N, P),
        "rank": res.ordinary_rank,
        "nn_lower": res.nn_lower,
        "nn_upper": res.nn_upper,
        "exact": res.exact,
    }


def semicontinuity_probe(P: Matrix, radius: float, samples: int, seed: int) -> ProbeReport:
    """Sample a Frobenius ball and count samples whose rk+ lower bound drops below rk+(P)."""
    scaling_factors(P)
    base = nonneg_rank(P)
    k = base.nn_upper if base.exact else base.nn_lower
    pts = sample_ball(BallSpec(P, radius, samples, seed))
    details, lows, highs = [], [], []
    violations = 0
    for N in pts:
        res = nonneg_rank(N)
        details.append(_sample_record(P, N, res))
        lows.append(res.nn_lower)
        highs.append(res.nn_upper)
        if res.nn_lower < k:
            violations += 1
    notes = []
    if not base.exact:
        notes.append(f"reference rk+ only bounded below by {k}")
    in_scope = radius <= PROBE_RADIUS
    if not in_scope:
        notes.append("radius outside theorem scope")
    return ProbeReport(
        samples=len(pts),
        violations=violations,
        min_rkplus=min(lows),
        max_rkplus=max(highs),
        predicate=f"nn_lower >= {k}",
        reference_rkplus=k,
        radius=radius,
        in_scope=in_scope,
        notes=notes,
        details=details,
    )


def triangle_predicate(name: str) -> Callable[[object], bool]:
    """``eps -> True`` when the family member admits a nested triangle (rk+ = 3)."""

    def pred(eps) -> bool:
        S = to_stochastic(family(name, eps))
        if rank(S) != 3:
            raise BadParameter(f"{name}({eps}) does not have rank 3")
        return nested_polygon_exists(section_polygon(S), 3) is not None

    return pred


def critical_epsilon(
    name: str,
    lo,
    hi,
    tol,
    predicate: Optional[Callable[[object], bool]] = None,
    grid: int = 64,
) -> float:
    """Bisect for the parameter where the rank-3 triangle decision flips.

    A coarse pre-scan over ``grid`` points must show exactly one flip.
    """
    pred = predicate or triangle_predicate(name)
    lo, hi, tol = to_exact(lo), to_exact(hi), to_exact(tol)
    if not lo < hi:
        raise BadParameter("need lo < hi")
    pts = [lo + (hi - lo) * i / (grid - 1) for i in range(grid)]
    vals = [pred(e) for e in pts]
    flips = [i for i in range(grid - 1) if vals[i] != vals[i + 1]]
    if not flips:
        raise NoFlip(f"decision constant ({vals[0]}) on [{float(lo)}, {float(hi)}]")
    if len(flips) > 1:
        raise NonMonotone(f"decision flips {len(flips)} times on the pre-scan grid")
    i = flips[0]
    a, b = pts[i], pts[i + 1]
    va = vals[i]
    while b - a > tol:
        mid = (a + b) / 2
        if pred(mid) == va:
            a = mid
        else:
            b = mid
    return float((a + b) / 2)


def midpoint_probe(A: Matrix, B: Matrix) -> dict:
    """Ranks and non-negative ranks of A, B and (A + B) / 2."""
    mid = (A + B).scale(Fraction(1, 2) if A.is_exact and B.is_exact else 0.5)
    out = {}
    for key, M in (("A", A), ("B", B), ("Mid", mid)):
        res = nonneg_rank(M)
        out[f"rk{key}"] = res.ordinary_rank
        out[f"rkplus{key}"] = res.nn_upper if res.exact else [res.nn_lower, res.nn_upper]
    return out


def search_nonconvex_pair(seed: int = 0, den: int = 12, tries: int = 5000):
    """Randomised search for 4 x 4 stochastic A1, A2 with rk = rk+ = 3 and rk+((A1+A2)/2) = 4.

    Columns live on the plane of B1's columns, so every matrix involved has
    rank at most 3.  Each Ai takes three vertices of a random triangle inscribed
    in the square section plus one point inside it, which makes rk+(Ai) = 3 by
    construction; only the midpoint needs the full decision.  Returns
    ``(A1, A2)`` or None.
    """
    rng = random.Random(seed)
    inst = section_polygon(to_stochastic(Matrix.exact(_B1)))
    outer = inst.outer

    def boundary_point():
        i = rng.randrange(len(outer))
        a, b = outer[i], outer[(i + 1) % len(outer)]
        t = Fraction(rng.randrange(den), den)
        return tuple(a[c] + t * (b[c] - a[c]) for c in range(2))

    def interior_point(tri):
        w = [rng.randint(1, den) for _ in tri]
        tot = sum(w)
        return tuple(sum(Fraction(wi, tot) * v[c] for wi, v in zip(w, tri)) for c in range(2))

    def draw():
        tri = [boundary_point() for _ in range(3)]
        pts = tri + [interior_point(tri)]
        rng.shuffle(pts)
        return Matrix.exact(list(zip(*[inst.chart.lift(p) for p in pts])))

    for _ in range(tries):
        A1, A2 = draw(), draw()
        if rank(A1) != 3 or rank(A2) != 3:
            continue
        mid = (A1 + A2).scale(Fraction(1, 2))
        if rank(mid) != 3:
            continue
        rm = nonneg_rank(mid)
        if rm.exact and rm.nn_lower == 4 and nonneg_rank(A1).nn_upper == 3 and nonneg_rank(A2).nn_upper == 3:
            return A1, A2
    return None
