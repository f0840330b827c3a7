"""The dyad-sum parametrisation ``p -> sum_h x_h y_h^T`` and its Jacobian.

Parameters are flattened as ``(x_1, y_1, x_2, y_2, ...)``; the matrix output
is flattened row-major.  When the Jacobian at a strictly positive point has
the full rank ``k(n + m - k)`` of the rank-k matrix variety, nearby matrices
of the same ordinary rank keep the same non-negative rank, which is what
:func:`isorank_certificate` checks.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BadK, NotAFactorization, ShapeMismatch
from .factorize import FIT_TOL, Factorization
from .matcore import TAU_RANK, Backend, Matrix, exact_rank, float_rank_details, frobenius_distance


@dataclass(frozen=True)
class ParamPoint:
    x: tuple  # k rows of length n
    y: tuple  # k rows of length m

    def __post_init__(self):
        if len(self.x) != len(self.y) or not self.x:
            raise ShapeMismatch("x and y need the same positive number of rows")
        if len({len(r) for r in self.x}) != 1 or len({len(r) for r in self.y}) != 1:
            raise ShapeMismatch("ragged parameter rows")

    @property
    def k(self) -> int:
        return len(self.x)

    @property
    def n(self) -> int:
        return len(self.x[0])

    @property
    def m(self) -> int:
        return len(self.y[0])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for r in (*self.x, *self.y) for v in r)

    @classmethod
    def make(cls, x, y, exact: bool = False) -> "ParamPoint":
        conv = Fraction if exact else float
        return cls(tuple(tuple(conv(v) for v in r) for r in x), tuple(tuple(conv(v) for v in r) for r in y))

    @classmethod
    def from_factorization(cls, F: Factorization) -> "ParamPoint":
        return cls(tuple(F.left), tuple(F.right))

    @classmethod
    def from_flat(cls, values: Sequence, n: int, m: int, k: int) -> "ParamPoint":
        if len(values) != k * (n + m):
            raise ShapeMismatch(f"expected {k * (n + m)} coordinates, got {len(values)}")
        x, y = [], []
        for h in range(k):
            base = h * (n + m)
            x.append(tuple(values[base : base + n]))
            y.append(tuple(values[base + n : base + n + m]))
        return cls(tuple(x), tuple(y))

    def flat(self) -> list:
        out = []
        for xh, yh in zip(self.x, self.y):
            out.extend(xh)
            out.extend(yh)
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ParamPoint":
        """Accept ``{"x", "y"}`` grids or a factorization's ``{"left", "right"}``."""
        if "x" in obj:
            x, y = obj["x"], obj["y"]
        elif "left" in obj:
            x, y = obj["left"], obj["right"]
        else:
            raise ShapeMismatch('parameter point needs "x"/"y" or "left"/"right"')
        conv = lambda v: Fraction(str(v))  # noqa: E731
        return cls(tuple(tuple(conv(v) for v in r) for r in x), tuple(tuple(conv(v) for v in r) for r in y))


def evaluate_f(p: ParamPoint) -> Matrix:
    """The n x m matrix ``sum_h x_h y_h^T``."""
    if p.is_exact:
        acc = [[Fraction(0)] * p.m for _ in range(p.n)]
        for xh, yh in zip(p.x, p.y):
            for i, xi in enumerate(xh):
                row = acc[i]
                for j, yj in enumerate(yh):
                    row[j] += xi * yj
        return Matrix(tuple(map(tuple, acc)), Backend.EXACT)
    X = np.array(p.x, dtype=float)
    Y = np.array(p.y, dtype=float)
    return Matrix.floating(X.T @ Y)


def jacobian_matrix(p: ParamPoint) -> Matrix:
    """Closed-form (nm) x k(n+m) Jacobian.

    The column for ``x_{h,i}`` holds ``y_h`` in the output row ``i``; the column
    for ``y_{h,j}`` holds ``x_h`` in the output column ``j``.
    """
    n, m, k = p.n, p.m, p.k
    zero = Fraction(0) if p.is_exact else 0.0
    J = [[zero] * (k * (n + m)) for _ in range(n * m)]
    for h in range(k):
        base = h * (n + m)
        xh, yh = p.x[h], p.y[h]
        for i in range(n):
            col = base + i
            for j in range(m):
                J[i * m + j][col] = yh[j]
        for j in range(m):
            col = base + n + j
            for i in range(n):
                J[i * m + j][col] = xh[i]
    if p.is_exact:
        return Matrix(tuple(map(tuple, J)), Backend.EXACT)
    return Matrix.floating(J)


@dataclass(frozen=True)
class JacobianReport:
    jac_rank: int
    target_rank: int
    maximal: bool
    hypotheses_hold: bool
    positive_point: bool
    smallest_pivot: Optional[float] = None


def _independent(rows: Sequence[Sequence], exact: bool, tau: float) -> bool:
    if exact:
        return exact_rank(rows) == len(rows)
    return float_rank_details(np.array(rows, dtype=float), tau)[0] == len(rows)


def maximal_rank_check(p: ParamPoint, tau: float = TAU_RANK) -> JacobianReport:
    n, m, k = p.n, p.m, p.k
    if k > min(n, m):
        raise BadK(f"k={k} exceeds min(n, m)={min(n, m)}")
    J = jacobian_matrix(p)
    exact = p.is_exact
    if exact:
        r, piv = exact_rank(J.entries), None
    else:
        r, piv = float_rank_details(J.to_numpy(), tau)
    target = k * (n + m - k)
    hyp = _independent(p.x, exact, tau) and _independent(p.y, exact, tau)
    positive = all(v > 0 for v in p.flat())
    return JacobianReport(r, target, r == target, hyp, positive, piv)


@dataclass
class Certificate:
    granted: bool
    jac_rank: int
    target: int
    positive: bool
    hypotheses: bool
    reasons: list

    def to_json_obj(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def isorank_certificate(
    P: Matrix,
    p: ParamPoint,
    nn_rank: Optional[int] = None,
    fit_tol: float = FIT_TOL,
    tau: float = TAU_RANK,
) -> Certificate:
    """Check the positive-point, full-Jacobian-rank and dyad-count conditions.

    A granted certificate means some neighbourhood of ``P`` has every matrix of
    the same ordinary rank sharing its non-negative rank.  ``nn_rank`` may be
    asserted by the caller; otherwise it is computed and must be exact.
    """
    from .simplexgeo import nonneg_rank

    if (p.n, p.m) != P.shape:
        raise NotAFactorization(f"parameter point has shape {(p.n, p.m)}, matrix {P.shape}")
    if p.k > min(p.n, p.m):
        raise BadK(f"k={p.k} exceeds min(n, m)")
    image = evaluate_f(p)
    dist = frobenius_distance(image, P)
    scale = max(1.0, float(np.linalg.norm(P.to_numpy())))
    if dist > fit_tol * scale:
        raise NotAFactorization(f"f(p) differs from P by {dist:.3g} in Frobenius norm")
    rep = maximal_rank_check(p, tau)
    reasons = []
    if not rep.positive_point:
        reasons.append("positivity")
    if not rep.maximal:
        reasons.append("maximal rank")
    if nn_rank is None:
        res = nonneg_rank(P)
        if not res.exact:
            reasons.append("non-negative rank not certified")
        elif res.nn_upper != p.k:
            reasons.append("dyad count")
    elif nn_rank != p.k:
        reasons.append("dyad count")
    return Certificate(not reasons, rep.jac_rank, rep.target_rank, rep.positive_point, rep.hypotheses_hold, reasons)
