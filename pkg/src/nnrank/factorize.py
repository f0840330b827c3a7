"""Non-negative factorizations: the dyad container, an NMF heuristic, and
the NMF-based upper bound on the non-negative rank."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BadK, NegativeEntry
from .matcore import Backend, Matrix, frobenius_distance, frobenius_norm, rank
from .matio import json_scalar

FIT_TOL = 1e-7


@dataclass(frozen=True)
class Factorization:
    """``k`` dyads ``left[h] right[h]^T`` and the residual recorded at creation."""

    left: tuple
    right: tuple
    residual: float = 0.0

    @property
    def k(self) -> int:
        return len(self.left)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for v in (*self.left, *self.right) for x in v)

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for v in (*self.left, *self.right) for x in v)

    def to_json_obj(self) -> dict:
        return {
            "k": self.k,
            "left": [[json_scalar(x) for x in c] for c in self.left],
            "right": [[json_scalar(x) for x in r] for r in self.right],
            "residual": float(self.residual),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Factorization":
        left = tuple(tuple(Fraction(str(x)) for x in c) for c in obj["left"])
        right = tuple(tuple(Fraction(str(x)) for x in r) for r in obj["right"])
        if obj.get("k", len(left)) != len(left) or len(left) != len(right):
            raise ValueError("inconsistent dyad count")
        return cls(left, right, float(obj.get("residual", 0.0)))


def make_factorization(left: Sequence, right: Sequence, target: Matrix) -> Factorization:
    """Wrap dyads and record their Frobenius residual against ``target``."""
    left = tuple(tuple(c) for c in left)
    right = tuple(tuple(r) for r in right)
    F = Factorization(left, right)
    res = frobenius_distance(reconstruct(F, target.rows, target.cols), target)
    return Factorization(left, right, float(res))


def reconstruct(F: Factorization, n: int | None = None, m: int | None = None) -> Matrix:
    """Sum of the dyads; ``n, m`` size the zero matrix when ``k == 0``."""
    if F.k == 0:
        if n is None or m is None:
            raise BadK("empty factorization needs an explicit shape")
        return Matrix.zeros(n, m)
    n, m = len(F.left[0]), len(F.right[0])
    if F.is_exact:
        acc = [[Fraction(0)] * m for _ in range(n)]
        for c, r in zip(F.left, F.right):
            for i, ci in enumerate(c):
                if ci:
                    row = acc[i]
                    for j, rj in enumerate(r):
                        row[j] += ci * rj
        return Matrix(tuple(tuple(r) for r in acc), Backend.EXACT)
    W = np.array([[float(x) for x in c] for c in F.left]).T
    H = np.array([[float(x) for x in r] for r in F.right])
    return Matrix.floating(W @ H)


def trivial_factorization(P: Matrix) -> Factorization:
    """Exact min(n, m)-dyad decomposition by columns (or rows if fewer)."""
    n, m = P.shape
    one = Fraction(1) if P.is_exact else 1.0
    zero = Fraction(0) if P.is_exact else 0.0
    if m <= n:
        left = [P.column(j) for j in range(m)]
        right = [tuple(one if jj == j else zero for jj in range(m)) for j in range(m)]
    else:
        left = [tuple(one if ii == i else zero for ii in range(n)) for i in range(n)]
        right = [P.entries[i] for i in range(n)]
    return Factorization(tuple(left), tuple(right), 0.0)


@dataclass(frozen=True)
class NmfOptions:
    restarts: int = 32
    max_iters: int = 2000
    tol: float = 1e-10
    seed: int = 0
    epsilon_floor: float = 1e-12
    method: str = "hals"

    def __post_init__(self):
        if min(self.restarts, self.max_iters) < 1 or self.tol <= 0 or self.epsilon_floor <= 0:
            raise ValueError("NmfOptions fields must be positive")
        if self.method not in _METHODS:
            raise ValueError(f"unknown NMF method {self.method!r}")


def _init(V: np.ndarray, k: int, rng: np.random.Generator, floor: float):
    n, m = V.shape
    scale = np.sqrt(max(V.mean(), 1e-300) / k)
    W = rng.uniform(0.0, 1.0, (n, k)) * scale + floor
    H = rng.uniform(0.0, 1.0, (k, m)) * scale + floor
    return W, H


def _mu_step(V, W, H, eps):
    H *= (W.T @ V) / (W.T @ W @ H + eps)
    W *= (V @ H.T) / (W @ H @ H.T + eps)


def _hals_step(V, W, H, eps):
    # one sweep of rank-one block coordinate descent, each block projected onto >= 0
    WtV, WtW = W.T @ V, W.T @ W
    for h in range(H.shape[0]):
        H[h] = np.maximum(0.0, H[h] + (WtV[h] - WtW[h] @ H) / max(WtW[h, h], eps))
    VHt, HHt = V @ H.T, H @ H.T
    for h in range(W.shape[1]):
        W[:, h] = np.maximum(0.0, W[:, h] + (VHt[:, h] - W @ HHt[:, h]) / max(HHt[h, h], eps))


_METHODS = {"mu": _mu_step, "hals": _hals_step}


def _run(V: np.ndarray, k: int, rng: np.random.Generator, opts: NmfOptions):
    """One restart; returns factors, final error and the per-iteration errors."""
    W, H = _init(V, k, rng, opts.epsilon_floor)
    step = _METHODS[opts.method]
    err = np.linalg.norm(V - W @ H)
    history = [err]
    for _ in range(opts.max_iters):
        step(V, W, H, opts.epsilon_floor)
        new = np.linalg.norm(V - W @ H)
        history.append(new)
        if err - new <= opts.tol * max(err, 1e-300):
            err = new
            break
        err = new
    return W, H, err, history


def nmf_restarts(P: Matrix, k: int, opts: NmfOptions = NmfOptions()) -> list[Factorization]:
    """One factorization per restart; restart ``r`` is seeded with ``opts.seed + r``."""
    n, m = P.shape
    if not 1 <= k <= min(n, m):
        raise BadK(f"k must lie in 1..{min(n, m)}, got {k}")
    if not P.is_nonnegative():
        raise NegativeEntry("NMF requires a non-negative matrix")
    V = P.to_numpy()
    target = P.to_float()
    out = []
    for r in range(opts.restarts):
        W, H, _, _ = _run(V, k, np.random.default_rng(opts.seed + r), opts)
        F = Factorization(tuple(map(tuple, W.T.tolist())), tuple(map(tuple, H.tolist())))
        out.append(Factorization(F.left, F.right, frobenius_distance(reconstruct(F), target)))
    return out


def nmf(P: Matrix, k: int, opts: NmfOptions = NmfOptions()) -> Factorization:
    """Best-of-restarts NMF with ``k`` dyads; ties keep the lowest restart index."""
    return min(nmf_restarts(P, k, opts), key=lambda F: F.residual)


def nnrank_upper_witness(
    P: Matrix, fit_tol: float = FIT_TOL, opts: NmfOptions = NmfOptions()
) -> tuple[int, Factorization]:
    """Smallest k whose NMF fits within ``fit_tol * ||P||_F``, with its witness.

    ``k = min(n, m)`` always succeeds through the exact trivial decomposition.
    """
    if not P.is_nonnegative():
        raise NegativeEntry("NMF requires a non-negative matrix")
    n, m = P.shape
    kmax = min(n, m)
    norm = frobenius_norm(P)
    if norm == 0:
        return 0, Factorization((), ())
    for k in range(max(1, rank(P)), kmax):
        F = nmf(P, k, opts)
        if F.residual <= fit_tol * norm:
            return k, F
    return kmax, trivial_factorization(P)


def nnrank_upper(P: Matrix, fit_tol: float = FIT_TOL, opts: NmfOptions = NmfOptions()) -> int:
    return nnrank_upper_witness(P, fit_tol, opts)[0]
