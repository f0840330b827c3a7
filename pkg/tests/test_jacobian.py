import json
from fractions import Fraction

import numpy as np
import pytest
import sympy

from nnrank.errors import BadK, NotAFactorization
from nnrank.factorize import Factorization, reconstruct
from nnrank.jacobian import (
    ParamPoint,
    evaluate_f,
    isorank_certificate,
    jacobian_matrix,
    maximal_rank_check,
)
from nnrank.matcore import Matrix
from nnrank.simplexgeo import nonneg_rank

from conftest import corpus


def random_point(rng, n, m, k, lo=0.0, hi=2.0):
    return ParamPoint.make(rng.uniform(lo, hi, (k, n)), rng.uniform(lo, hi, (k, m)))


def exact_random_point(rng, n, m, k):
    x = [[Fraction(int(v), 7) for v in rng.integers(0, 15, n)] for _ in range(k)]
    y = [[Fraction(int(v), 5) for v in rng.integers(0, 11, m)] for _ in range(k)]
    return ParamPoint.make(x, y, exact=True)


class TestEvaluate:
    def test_unit(self):
        p = ParamPoint.make([[1, 0]], [[1, 0]], exact=True)
        assert evaluate_f(p) == Matrix.exact([[1, 0], [0, 0]])

    def test_basis_copy(self):
        P = corpus("b1.csv")
        k = 2
        x = [[1 if i == h else 0 for i in range(4)] for h in range(k)]
        y = [list(P.entries[h]) for h in range(k)]
        F = evaluate_f(ParamPoint.make(x, y, exact=True))
        assert F.entries[:k] == P.entries[:k]
        assert all(v == 0 for r in F.entries[k:] for v in r)

    def test_matches_reconstruct(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            p = exact_random_point(rng, 4, 5, 3)
            assert evaluate_f(p) == reconstruct(Factorization(p.x, p.y))

    def test_flat_round_trip(self):
        p = random_point(np.random.default_rng(1), 3, 4, 2)
        assert ParamPoint.from_flat(p.flat(), 3, 4, 2) == p


class TestJacobian:
    def test_scalar(self):
        J = jacobian_matrix(ParamPoint.make([[3]], [[5]], exact=True))
        assert J == Matrix.exact([[5, 3]])

    def test_zero_y_gives_zero_x_block(self):
        p = ParamPoint.make([[1, 2], [3, 4]], [[0, 0, 0], [0, 0, 0]])
        J = jacobian_matrix(p).to_numpy()
        n, m = 2, 3
        for h in range(2):
            base = h * (n + m)
            assert np.all(J[:, base : base + n] == 0)

    @pytest.mark.parametrize("n, m, k", [(2, 3, 1), (4, 4, 3), (5, 3, 2), (6, 6, 4)])
    def test_finite_differences(self, n, m, k):
        rng = np.random.default_rng(n * 100 + m * 10 + k)
        p = random_point(rng, n, m, k)
        J = jacobian_matrix(p).to_numpy()
        v = np.array(p.flat())
        d = 1e-5
        for idx in rng.choice(v.size, size=min(v.size, 12), replace=False):
            e = np.zeros_like(v)
            e[idx] = d
            fp = evaluate_f(ParamPoint.from_flat(list(v + e), n, m, k)).to_numpy().ravel()
            fm = evaluate_f(ParamPoint.from_flat(list(v - e), n, m, k)).to_numpy().ravel()
            assert np.max(np.abs((fp - fm) / (2 * d) - J[:, idx])) < 1e-6

    @pytest.mark.parametrize("n, m, k", [(2, 2, 1), (3, 2, 2), (3, 4, 2)])
    def test_symbolic(self, n, m, k):
        xs = [[sympy.Symbol(f"x_{h}_{i}") for i in range(n)] for h in range(k)]
        ys = [[sympy.Symbol(f"y_{h}_{j}") for j in range(m)] for h in range(k)]
        flat = [s for h in range(k) for s in xs[h] + ys[h]]
        f = [sum(xs[h][i] * ys[h][j] for h in range(k)) for i in range(n) for j in range(m)]
        Jsym = sympy.Matrix(f).jacobian(flat)
        p = exact_random_point(np.random.default_rng(k), n, m, k)
        subs = {s: sympy.Rational(v.numerator, v.denominator) for s, v in zip(flat, p.flat())}
        expected = [[Fraction(int(e.p), int(e.q)) for e in row] for row in Jsym.subs(subs).tolist()]
        assert jacobian_matrix(p) == Matrix.exact(expected)


class TestMaximalRank:
    def test_scalar(self):
        r = maximal_rank_check(ParamPoint.make([[2]], [[3]], exact=True))
        assert r.jac_rank == r.target_rank == 1 and r.maximal

    def test_generic_4x4x3(self):
        for seed in range(100):
            r = maximal_rank_check(random_point(np.random.default_rng(seed), 4, 4, 3, lo=0.1))
            assert r.hypotheses_hold and r.jac_rank == 15 and r.maximal and r.positive_point

    def test_dependent_x(self):
        p = ParamPoint.make([[1, 2, 3], [1, 2, 3]], [[1, 0, 1], [0, 1, 1]], exact=True)
        r = maximal_rank_check(p)
        assert not r.hypotheses_hold
        assert r.jac_rank < r.target_rank

    def test_never_exceeds_target(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n, m = rng.integers(2, 6, 2)
            k = int(rng.integers(1, min(n, m) + 1))
            p = exact_random_point(rng, int(n), int(m), k)
            r = maximal_rank_check(p)
            assert r.jac_rank <= r.target_rank
            assert r.maximal == (r.jac_rank == r.target_rank)

    def test_bad_k(self):
        with pytest.raises(BadK):
            maximal_rank_check(ParamPoint.make([[1, 2]] * 3, [[1, 2, 3]] * 3))

    def test_float_reports_pivot(self):
        r = maximal_rank_check(random_point(np.random.default_rng(4), 3, 3, 2))
        assert r.smallest_pivot is not None and r.smallest_pivot > 0


class TestCertificate:
    def test_positive_point_granted(self):
        p = exact_random_point(np.random.default_rng(8), 4, 4, 3)
        p = ParamPoint.make([[v + 1 for v in r] for r in p.x], [[v + 1 for v in r] for r in p.y], exact=True)
        P = evaluate_f(p)
        assert nonneg_rank(P).nn_upper == 3
        c = isorank_certificate(P, p)
        assert c.granted and c.reasons == [] and c.jac_rank == c.target == 15

    def test_p0_witness_denied_for_positivity(self):
        P = corpus("p_eps_0.csv")
        p = ParamPoint.from_factorization(nonneg_rank(P).witness)
        c = isorank_certificate(P, p)
        assert not c.granted and "positivity" in c.reasons
        obj = json.loads(c.to_json())
        assert set(obj) == {"granted", "jac_rank", "target", "positive", "hypotheses", "reasons"}

    def test_zero_coordinate(self):
        p = ParamPoint.make([[1, 0], [1, 1]], [[1, 2], [2, 1]], exact=True)
        c = isorank_certificate(evaluate_f(p), p, nn_rank=2)
        assert "positivity" in c.reasons

    def test_dependent_vectors(self):
        p = ParamPoint.make([[1, 1, 1], [2, 2, 2]], [[1, 2, 3], [3, 1, 1]], exact=True)
        c = isorank_certificate(evaluate_f(p), p, nn_rank=2)
        assert not c.granted and "maximal rank" in c.reasons

    def test_dyad_count(self):
        p = ParamPoint.make([[1, 2], [2, 1]], [[1, 1], [1, 1]], exact=True)
        c = isorank_certificate(evaluate_f(p), p)
        assert "dyad count" in c.reasons

    def test_not_a_factorization(self):
        p = ParamPoint.make([[1, 2]], [[1, 1]], exact=True)
        with pytest.raises(NotAFactorization):
            isorank_certificate(Matrix.exact([[1, 1], [2, 3]]), p)
        with pytest.raises(NotAFactorization):
            isorank_certificate(Matrix.exact([[1, 1, 1], [2, 2, 2]]), p)
