"""Dense matrices with an exact (rational) and a floating backend.

The exact backend stores :class:`fractions.Fraction` entries and computes
ranks by fraction-free elimination; the float backend stores Python floats
and delegates to numpy/scipy.  A matrix never mixes the two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import NegativeEntry, RadiusNonPositive, ShapeMismatch, ZeroColumn

#: default relative pivot threshold for floating-point rank
TAU_RANK = 1e-9


class Backend(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


def to_exact(x) -> Fraction:
    """Convert ints, Fractions, decimal strings and finite floats to Fraction.

    Floats are converted through their shortest decimal repr, so ``0.1``
    becomes ``1/10`` rather than the binary value.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite entry {x!r}")
        return Fraction(repr(float(x)))
    return Fraction(x)


@dataclass(frozen=True)
class Matrix:
    """Immutable n x m matrix.

    Use :meth:`exact` / :meth:`floating` to construct; ``entries`` is a tuple
    of row tuples.
    """

    entries: tuple
    backend: Backend

    def __post_init__(self):
        widths = {len(r) for r in self.entries}
        if len(widths) > 1:
            raise ShapeMismatch("ragged rows")
        if not self.entries or widths == {0}:
            raise ShapeMismatch("matrix must have at least one row and column")

    @classmethod
    def exact(cls, rows: Iterable[Iterable]) -> "Matrix":
        return cls(tuple(tuple(to_exact(x) for x in r) for r in rows), Backend.EXACT)

    @classmethod
    def floating(cls, rows) -> "Matrix":
        if isinstance(rows, np.ndarray):
            rows = rows.tolist()
        return cls(tuple(tuple(float(x) for x in r) for r in rows), Backend.FLOAT)

    @classmethod
    def zeros(cls, n: int, m: int, backend: Backend = Backend.EXACT) -> "Matrix":
        z = Fraction(0) if backend is Backend.EXACT else 0.0
        return cls(tuple((z,) * m for _ in range(n)), backend)

    @classmethod
    def like(cls, rows, backend: Backend) -> "Matrix":
        return cls.exact(rows) if backend is Backend.EXACT else cls.floating(rows)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_exact(self) -> bool:
        return self.backend is Backend.EXACT

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def T(self) -> "Matrix":
        return Matrix(tuple(zip(*self.entries)), self.backend)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries], dtype=float)

    def to_float(self) -> "Matrix":
        return self if not self.is_exact else Matrix.floating(self.to_numpy())

    def to_exact(self) -> "Matrix":
        return self if self.is_exact else Matrix.exact(self.entries)

    def _coerce(self, other: "Matrix") -> tuple["Matrix", "Matrix"]:
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")
        if self.backend is other.backend:
            return self, other
        return self.to_float(), other.to_float()

    def __add__(self, other: "Matrix") -> "Matrix":
        a, b = self._coerce(other)
        return Matrix(
            tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a.entries, b.entries)),
            a.backend,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        a, b = self._coerce(other)
        return Matrix(
            tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a.entries, b.entries)),
            a.backend,
        )

    def scale(self, c) -> "Matrix":
        if self.is_exact and not isinstance(c, float):
            c = to_exact(c)
            return Matrix(tuple(tuple(x * c for x in r) for r in self.entries), self.backend)
        m = self.to_float()
        c = float(c)
        return Matrix(tuple(tuple(x * c for x in r) for r in m.entries), Backend.FLOAT)

    def __mul__(self, c) -> "Matrix":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        if self.is_exact and other.is_exact:
            cols = other.columns()
            return Matrix(
                tuple(tuple(sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in cols)
                      for r in self.entries),
                Backend.EXACT,
            )
        return Matrix.floating(self.to_numpy() @ other.to_numpy())

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for r in self.entries for x in r)

    def total(self):
        return sum((x for r in self.entries for x in r), Fraction(0) if self.is_exact else 0.0)

    def column_sums(self) -> list:
        zero = Fraction(0) if self.is_exact else 0.0
        return [sum(c, zero) for c in self.columns()]

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.entries)
        return f"Matrix[{self.backend.value}]({body})"


def identity(n: int, backend: Backend = Backend.EXACT) -> Matrix:
    return Matrix.like([[int(i == j) for j in range(n)] for i in range(n)], backend)


def hstack(columns: Sequence[Sequence], backend: Backend) -> Matrix:
    """Build a matrix from a list of column vectors."""
    return Matrix.like(list(zip(*columns)), backend)


def frobenius_norm(P: Matrix):
    if P.is_exact:
        return math.sqrt(sum(x * x for r in P.entries for x in r))
    return float(np.linalg.norm(P.to_numpy()))


def frobenius_distance(P: Matrix, N: Matrix) -> float:
    if P.shape != N.shape:
        raise ShapeMismatch(f"{P.shape} vs {N.shape}")
    return frobenius_norm(P - N)


@dataclass(frozen=True)
class ScalingDiag:
    """Column 1-norms of a non-negative matrix (the diagonal of the scaling)."""

    factors: tuple


def scaling_factors(P: Matrix) -> ScalingDiag:
    if not P.is_nonnegative():
        raise NegativeEntry("scaling requires a non-negative matrix")
    sums = P.column_sums()
    for j, s in enumerate(sums):
        if s == 0:
            raise ZeroColumn(j)
    return ScalingDiag(tuple(sums))


def to_stochastic(P: Matrix) -> Matrix:
    """Divide each column by its 1-norm so every column sums to one."""
    sig = scaling_factors(P).factors
    return Matrix(
        tuple(tuple(x / s for x, s in zip(r, sig)) for r in P.entries), P.backend
    )


def is_stochastic(P: Matrix, tol: float = 1e-9) -> bool:
    if not P.is_nonnegative() and (P.is_exact or min(min(r) for r in P.entries) < -tol):
        return False
    if P.is_exact:
        return all(s == 1 for s in P.column_sums())
    return all(abs(s - 1.0) <= tol for s in P.column_sums())


def _integer_rows(entries) -> list[list[int]]:
    out = []
    for r in entries:
        den = math.lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * den) for x in r])
    return out


def exact_rank(entries) -> int:
    """Rank via Bareiss fraction-free elimination on an integer-scaled copy."""
    a = _integer_rows(entries)
    n = len(a)
    m = len(a[0]) if n else 0
    rank = 0
    prev = 1
    for col in range(m):
        if rank == n:
            break
        piv = next((i for i in range(rank, n) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for i in range(rank + 1, n):
            f = a[i][col]
            row_i, row_r = a[i], a[rank]
            for j in range(col + 1, m):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
            row_i[col] = 0
        prev = p
        rank += 1
    return rank


def float_rank_details(A: np.ndarray, tau: float = TAU_RANK) -> tuple[int, float]:
    """Rank from column-pivoted QR, plus the smallest retained |R_ii|.

    A diagonal entry counts when it exceeds ``tau`` times the largest one.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0, 0.0
    R = scipy.linalg.qr(A, mode="r", pivoting=True)[0]
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return 0, 0.0
    keep = d > tau * d[0]
    r = int(np.count_nonzero(keep))
    return r, float(d[:r].min())


def rank(P: Matrix, tau: float = TAU_RANK) -> int:
    if P.is_exact:
        return exact_rank(P.entries)
    return float_rank_details(P.to_numpy(), tau)[0]


_MAX_BATCH = 1 << 18


@dataclass(frozen=True)
class BallSpec:
    center: Matrix
    radius: float
    count: int
    seed: int


def sample_ball(spec: BallSpec) -> list[Matrix]:
    """Draw non-negative matrices strictly inside a Frobenius ball.

    Directions are uniform on the sphere, radii uniform on ``[0, radius)``;
    draws leaving the non-negative orthant are rejected.
    """
    if not spec.radius > 0:
        raise RadiusNonPositive(f"radius must be positive, got {spec.radius}")
    if not spec.center.is_nonnegative():
        raise NegativeEntry("ball center must be non-negative")
    c = spec.center.to_numpy().ravel()
    n, m = spec.center.shape
    rng = np.random.default_rng(spec.seed)
    out: list[Matrix] = []
    drawn = kept = 0
    while len(out) < spec.count:
        # size the next batch from the acceptance rate seen so far
        need = spec.count - len(out)
        rate = (kept + 1) / (drawn + 1)
        batch = int(min(_MAX_BATCH, max(64, 2 * need / rate)))
        d = rng.standard_normal((batch, c.size))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = rng.uniform(0.0, spec.radius, size=(batch, 1))
        cand = c + r * d
        ok = cand[(cand >= 0).all(axis=1) & (np.linalg.norm(cand - c, axis=1) < spec.radius)]
        drawn += batch
        kept += len(ok)
        for row in ok[:need]:
            out.append(Matrix.floating(row.reshape(n, m)))
    return out
