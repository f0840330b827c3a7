"""Two-way tables: the independence model, mixtures of independence models,
and membership in the k-component mixture model.

A joint distribution of two discrete variables is a non-negative table with
unit total mass.  It lies in the mixture of ``k`` independence models exactly
when its non-negative rank is at most ``k``, so membership is decided with the
same machinery as :func:`nnrank.simplexgeo.nonneg_rank`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .errors import HypothesisNotMet, InvalidDistribution
from .factorize import FIT_TOL, Factorization, NmfOptions
from .matcore import BallSpec, Matrix, frobenius_distance, sample_ball
from .matio import json_scalar
from .perturb import PROBE_RADIUS, ProbeReport
from .simplexgeo import nonneg_rank

MASS_TOL = 1e-12


@dataclass(frozen=True)
class JointTable:
    """A non-negative table of total mass one; ``mass`` is the pre-normalisation total."""

    matrix: Matrix
    mass: object = 1

    def __post_init__(self):
        M = self.matrix
        if not M.is_nonnegative():
            raise InvalidDistribution("joint table has a negative entry")
        total = M.total()
        ok = total == 1 if M.is_exact else abs(total - 1.0) <= MASS_TOL
        if not ok:
            raise InvalidDistribution(f"joint table sums to {float(total)!r}, not 1")

    @classmethod
    def normalize(cls, M: Matrix) -> "JointTable":
        if not M.is_nonnegative():
            raise InvalidDistribution("joint table has a negative entry")
        total = M.total()
        if total == 0:
            raise InvalidDistribution("table has zero total mass")
        one = Fraction(1) if M.is_exact else 1.0
        return cls(M.scale(one / total), total)


def independence_residual(T: JointTable):
    """Largest absolute 2 x 2 minor; zero exactly on the independence model."""
    P = T.matrix.entries
    n, m = T.matrix.shape
    best = Fraction(0) if T.matrix.is_exact else 0.0
    for i, k in combinations(range(n), 2):
        for j, h in combinations(range(m), 2):
            best = max(best, abs(P[i][j] * P[k][h] - P[i][h] * P[k][j]))
    return best


def _check_distribution(v: Sequence, what: str):
    if any(x < 0 for x in v):
        raise InvalidDistribution(f"{what} has a negative entry")
    s = sum(v)
    exact = all(isinstance(x, (int, Fraction)) for x in v)
    if not (s == 1 if exact else abs(s - 1.0) <= MASS_TOL):
        raise InvalidDistribution(f"{what} sums to {float(s)!r}, not 1")


@dataclass(frozen=True)
class MixtureSpec:
    """Weights ``alpha`` and component marginals ``cols[h]`` (length n), ``rows[h]`` (length m)."""

    alpha: tuple
    cols: tuple
    rows: tuple

    def __post_init__(self):
        k = len(self.alpha)
        if k == 0 or len(self.cols) != k or len(self.rows) != k:
            raise InvalidDistribution("alpha, cols and rows need the same positive length")
        if len({len(c) for c in self.cols}) != 1 or len({len(r) for r in self.rows}) != 1:
            raise InvalidDistribution("component vectors have inconsistent lengths")
        _check_distribution(self.alpha, "alpha")
        for h in range(k):
            _check_distribution(self.cols[h], f"cols[{h}]")
            _check_distribution(self.rows[h], f"rows[{h}]")

    @property
    def k(self) -> int:
        return len(self.alpha)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for v in (self.alpha, *self.cols, *self.rows) for x in v)

    def to_json_obj(self) -> dict:
        conv = lambda v: [json_scalar(x) for x in v]  # noqa: E731
        return {
            "k": self.k,
            "alpha": conv(self.alpha),
            "cols": [conv(c) for c in self.cols],
            "rows": [conv(r) for r in self.rows],
        }


def mixture_build(spec: MixtureSpec) -> JointTable:
    """The table ``sum_h alpha_h c_h r_h^T``."""
    n, m = len(spec.cols[0]), len(spec.rows[0])
    zero = Fraction(0) if spec.is_exact else 0.0
    acc = [[zero] * m for _ in range(n)]
    for a, c, r in zip(spec.alpha, spec.cols, spec.rows):
        for i in range(n):
            w = a * c[i]
            if w:
                row = acc[i]
                for j in range(m):
                    row[j] += w * r[j]
    M = Matrix.exact(acc) if spec.is_exact else Matrix.floating(acc)
    if not M.is_exact:
        # float round-off can leave the total a few ulps from one
        return JointTable.normalize(M)
    return JointTable(M)


def mixture_from_factorization(F: Factorization) -> MixtureSpec:
    """Rescale every dyad to stochastic factors; the scale becomes its weight.

    Dyads with a zero factor carry no mass and are dropped, so the witness can
    have fewer than ``F.k`` components.
    """
    alpha, cols, rows = [], [], []
    for c, r in zip(F.left, F.right):
        sc, sr = sum(c), sum(r)
        if sc <= 0 or sr <= 0:
            continue
        alpha.append(sc * sr)
        cols.append(tuple(x / sc for x in c))
        rows.append(tuple(x / sr for x in r))
    total = sum(alpha)
    # an approximate factorization only sums to one up to its residual
    alpha = [a / total for a in alpha]
    return MixtureSpec(tuple(alpha), tuple(cols), tuple(rows))


class Verdict(str, enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    UNKNOWN = "Unknown"


@dataclass
class MembershipReport:
    status: Verdict
    k: int
    rank: int
    nn_lower: int
    nn_upper: int
    exact: bool
    witness: Optional[MixtureSpec] = None

    def to_json_obj(self) -> dict:
        out = {
            "status": self.status.value,
            "k": self.k,
            "rank": self.rank,
            "nn_lower": self.nn_lower,
            "nn_upper": self.nn_upper,
            "exact": self.exact,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json_obj()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _support_rank(M: Matrix, fit_tol: float, opts: NmfOptions):
    """``nonneg_rank`` on the table with zero rows and columns removed.

    Zero lines change neither rank nor rk+; the witness is padded back to the
    full shape.
    """
    rows = [i for i in range(M.rows) if any(M.entries[i])]
    cols = [j for j in range(M.cols) if any(r[j] for r in M.entries)]
    if not rows:
        return nonneg_rank(M, fit_tol, opts)
    sub = Matrix.like([[M.entries[i][j] for j in cols] for i in rows], M.backend)
    res = nonneg_rank(sub, fit_tol, opts)
    W = res.witness
    if W is not None and (len(rows), len(cols)) != M.shape:
        zero = Fraction(0) if W.is_exact else 0.0
        left, right = [], []
        for c, r in zip(W.left, W.right):
            lc, rr = [zero] * M.rows, [zero] * M.cols
            for a, i in enumerate(rows):
                lc[i] = c[a]
            for b, j in enumerate(cols):
                rr[j] = r[b]
            left.append(tuple(lc))
            right.append(tuple(rr))
        res.witness = Factorization(tuple(left), tuple(right), W.residual)
    return res


def model_membership(
    T: JointTable, k: int, fit_tol: float = FIT_TOL, opts: NmfOptions = NmfOptions()
) -> MembershipReport:
    """Is ``T`` in the mixture of ``k`` independence models?"""
    res = _support_rank(T.matrix, fit_tol, opts)
    if res.nn_upper <= k:
        status = Verdict.MEMBER
    elif res.nn_lower > k:
        status = Verdict.NON_MEMBER
    else:
        status = Verdict.UNKNOWN
    witness = None
    if status is Verdict.MEMBER and res.witness is not None and res.witness.k > 0:
        witness = mixture_from_factorization(res.witness)
    return MembershipReport(status, k, res.ordinary_rank, res.nn_lower, res.nn_upper, res.exact, witness)


def non_density_probe(T: JointTable, k: int, radius: float, samples: int, seed: int) -> ProbeReport:
    """Sample normalised tables near ``T`` and count those with rank k and certified rk+ = k.

    Requires ``rank(T) = k < rk+(T)`` (certified); a hit means the sample fell
    into the mixture model while staying on the rank-k variety.
    """
    base = _support_rank(T.matrix, FIT_TOL, NmfOptions())
    if base.ordinary_rank != k or base.nn_lower <= k:
        raise HypothesisNotMet(
            f"need rank = {k} and certified rk+ > {k}; got rank {base.ordinary_rank}, "
            f"rk+ in [{base.nn_lower}, {base.nn_upper}]"
        )
    pts = sample_ball(BallSpec(T.matrix, radius, samples, seed))
    details, lows, highs = [], [], []
    hits = 0
    for N in pts:
        S = JointTable.normalize(N).matrix
        res = _support_rank(S, FIT_TOL, NmfOptions())
        details.append(
            {
                "distance": frobenius_distance(N, T.matrix),
                "rank": res.ordinary_rank,
                "nn_lower": res.nn_lower,
                "nn_upper": res.nn_upper,
                "exact": res.exact,
            }
        )
        lows.append(res.nn_lower)
        highs.append(res.nn_upper)
        if res.ordinary_rank == k and res.exact and res.nn_upper == k:
            hits += 1
    in_scope = radius <= PROBE_RADIUS
    notes = [] if in_scope else ["radius outside theorem scope; hits are informational"]
    return ProbeReport(
        samples=len(pts),
        violations=hits,
        min_rkplus=min(lows),
        max_rkplus=max(highs),
        predicate=f"not (rank == {k} and rk+ == {k})",
        reference_rkplus=base.nn_lower,
        radius=radius,
        in_scope=in_scope,
        notes=notes,
        details=details,
    )
