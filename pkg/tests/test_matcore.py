from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnrank.errors import NegativeEntry, RadiusNonPositive, ShapeMismatch, ZeroColumn
from nnrank.matcore import (
    BallSpec,
    Matrix,
    frobenius_distance,
    is_stochastic,
    rank,
    sample_ball,
    scaling_factors,
    to_stochastic,
)
from nnrank.perturb import family

from conftest import corpus

B1 = Matrix.exact([[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]])

small_ints = st.integers(min_value=0, max_value=9)


def int_matrices(min_side=1, max_side=5, elements=small_ints):
    return st.integers(min_side, max_side).flatmap(
        lambda n: st.integers(min_side, max_side).flatmap(
            lambda m: st.lists(st.lists(elements, min_size=m, max_size=m), min_size=n, max_size=n)
        )
    )


class TestFrobenius:
    def test_self_distance_zero(self):
        assert frobenius_distance(B1, B1) == 0

    def test_zero_vs_ones(self):
        assert frobenius_distance(Matrix.zeros(2, 2), Matrix.exact([[1, 1], [1, 1]])) == 2

    def test_b1_b2(self):
        assert frobenius_distance(corpus("b1.csv"), corpus("b2.csv")) == pytest.approx(2.0, abs=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            frobenius_distance(Matrix.zeros(2, 2), Matrix.zeros(2, 3))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.floats(-5, 5), min_size=6, max_size=6), min_size=3, max_size=3))
    def test_triangle_inequality(self, vals):
        A, B, C = (Matrix.floating(np.array(v).reshape(2, 3)) for v in vals)
        assert frobenius_distance(A, C) <= frobenius_distance(A, B) + frobenius_distance(B, C) + 1e-12

    def test_symmetric(self):
        A = Matrix.exact([[1, 2], [3, 4]])
        B = Matrix.exact([["1/2", 0], [7, 1]])
        assert frobenius_distance(A, B) == frobenius_distance(B, A)


class TestScaling:
    def test_diag(self):
        assert scaling_factors(Matrix.exact([[2, 0], [0, 4]])).factors == (2, 4)

    def test_b1(self):
        assert scaling_factors(B1).factors == (2, 2, 2, 2)

    def test_zero_column_reports_index(self):
        with pytest.raises(ZeroColumn) as e:
            scaling_factors(Matrix.exact([[1, 0, 2], [3, 0, 1]]))
        assert e.value.column == 1

    def test_negative(self):
        with pytest.raises(NegativeEntry):
            scaling_factors(Matrix.exact([[1, -1], [1, 2]]))

    def test_to_stochastic_examples(self):
        assert to_stochastic(Matrix.exact([[2, 0], [0, 4]])) == Matrix.exact([[1, 0], [0, 1]])
        assert to_stochastic(B1) == B1.scale(Fraction(1, 2))
        S = to_stochastic(B1)
        assert to_stochastic(S) == S

    def test_float_columns_sum_to_one(self):
        P = Matrix.floating(np.random.default_rng(0).uniform(0.1, 3, (5, 7)))
        sums = to_stochastic(P).column_sums()
        assert max(abs(s - 1) for s in sums) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(int_matrices(elements=st.integers(1, 20)))
    def test_idempotent_and_rank_preserving(self, rows):
        P = Matrix.exact(rows)
        S = to_stochastic(P)
        assert is_stochastic(S)
        assert to_stochastic(S) == S
        assert rank(S) == rank(P)


class TestRank:
    def test_b1(self):
        assert rank(B1) == 3

    @pytest.mark.parametrize("eps", ["0", "0.1", "0.25"])
    def test_p_eps(self, eps):
        assert rank(family("Peps", eps)) == 3

    def test_zero(self):
        assert rank(Matrix.zeros(3, 4)) == 0
        assert rank(Matrix.zeros(3, 4).to_float()) == 0

    def test_tau_controls_float_rank(self):
        P = Matrix.floating([[1.0, 0.0], [0.0, 1e-12]])
        assert rank(P) == 1
        assert rank(P, tau=1e-15) == 2

    @settings(max_examples=80, deadline=None)
    @given(int_matrices(max_side=6))
    def test_transpose(self, rows):
        P = Matrix.exact(rows)
        assert rank(P.T) == rank(P)

    @settings(max_examples=150, deadline=None)
    @given(
        int_matrices(
            max_side=6,
            elements=st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6),
        )
    )
    def test_exact_and_float_agree(self, rows):
        P = Matrix.exact(rows)
        assert rank(P) == rank(P.to_float())

    def test_exact_float_agree_on_structured_low_rank(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            U = rng.integers(-30, 30, (6, 2))
            V = rng.integers(-30, 30, (2, 5))
            P = Matrix.exact((U @ V).tolist())
            assert rank(P) == rank(P.to_float()) <= 2


class TestBall:
    def test_contract(self):
        pts = sample_ball(BallSpec(B1, 0.01, 10, 7))
        assert len(pts) == 10
        for N in pts:
            assert N.is_nonnegative()
            assert frobenius_distance(N, B1) < 0.01

    def test_rank_lower_semicontinuous(self):
        assert all(rank(N) >= 3 for N in sample_ball(BallSpec(B1, 0.01, 30, 3)))

    def test_deterministic(self):
        a = sample_ball(BallSpec(B1, 0.05, 5, 99))
        b = sample_ball(BallSpec(B1, 0.05, 5, 99))
        assert a == b
        assert a != sample_ball(BallSpec(B1, 0.05, 5, 100))

    @pytest.mark.parametrize("r", [0, -1.0])
    def test_radius_positive(self, r):
        with pytest.raises(RadiusNonPositive):
            sample_ball(BallSpec(B1, r, 1, 0))

    def test_large_radius_terminates(self):
        pts = sample_ball(BallSpec(family("Meps", 0), 10.0, 20, 0))
        assert len(pts) == 20 and all(N.is_nonnegative() for N in pts)


def test_mixed_backend_arithmetic_falls_back_to_float():
    S = B1 + B1.to_float()
    assert not S.is_exact
    assert S.to_numpy().sum() == 16.0
