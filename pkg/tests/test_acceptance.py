"""End-to-end acceptance checks, one test per criterion.

The terminal summary prints one PASS/FAIL line per criterion (see conftest).
"""

import json
import math
import random
import time
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest
import sympy

from nnrank.cli import main
from nnrank.factorize import reconstruct
from nnrank.jacobian import ParamPoint, evaluate_f, jacobian_matrix, maximal_rank_check
from nnrank.matcore import Matrix, frobenius_distance, rank
from nnrank.mixture import (
    JointTable,
    MixtureSpec,
    Verdict,
    independence_residual,
    mixture_build,
    model_membership,
    non_density_probe,
)
from nnrank.oracle import triangle_exists
from nnrank.perturb import barycentric, critical_epsilon, family, proportional, semicontinuity_probe
from nnrank.simplexgeo import nonneg_rank, polygon_contains, section_polygon

from conftest import corpus, random_rank3, random_stochastic_vector

F = Fraction


def midpoint(A: Matrix, B: Matrix) -> Matrix:
    return (A + B).scale(F(1, 2))


def test_criterion_1_b1():
    res = nonneg_rank(corpus("b1.csv"))
    assert res.exact and res.ordinary_rank == 3
    assert res.nn_lower == res.nn_upper == 4
    assert family("CohenRothblum") == corpus("b1.csv")


def test_criterion_2_p_family():
    for eps in ("0", "0.1", "0.25"):
        P = family("Peps", eps)
        assert P.is_exact and rank(P) == 3
    P0 = family("Peps", 0)
    r0 = nonneg_rank(P0)
    assert r0.exact and r0.nn_lower == r0.nn_upper == 3
    assert r0.witness.k == 3 and r0.witness.is_nonnegative()
    assert frobenius_distance(reconstruct(r0.witness), P0) < 1e-10
    r1 = nonneg_rank(family("Peps", "0.1"))
    assert r1.exact and r1.nn_lower == r1.nn_upper == 4


def test_criterion_3_m_family():
    expected = {"0": 4, "0.3": 4, "0.75": 3}
    for eps, rk in expected.items():
        r = nonneg_rank(family("Meps", eps))
        assert r.exact and r.nn_lower == r.nn_upper == rk
    t0 = time.perf_counter()
    v = critical_epsilon("Meps", 0, 1, "1e-6")
    elapsed = time.perf_counter() - t0
    assert abs(v - math.sqrt(2) / 2) <= 1e-4
    assert elapsed < 60


def test_criterion_4_non_convexity():
    B1, B2 = corpus("b1.csv"), corpus("b2.csv")
    for B in (B1, B2):
        r = nonneg_rank(B)
        assert r.exact and r.nn_upper == r.nn_lower == 4
    mid = nonneg_rank(midpoint(B1, B2))
    assert mid.exact and mid.nn_upper == 3 and mid.triangle is not None
    assert all(polygon_contains(mid.triangle, z) for z in mid.instance.inner)
    assert frobenius_distance(reconstruct(mid.witness), midpoint(B1, B2)) == 0

    A1, A2 = corpus("a1.csv"), corpus("a2.csv")
    for A in (A1, A2):
        r = nonneg_rank(A)
        assert r.exact and r.ordinary_rank == r.nn_upper == 3
    m = nonneg_rank(midpoint(A1, A2))
    assert m.exact and m.ordinary_rank == 3 and m.nn_lower == m.nn_upper == 4


@pytest.mark.parametrize("name", ["P0", "B1", "mid"])
def test_criterion_5_semicontinuity(name):
    P = {
        "P0": family("Peps", 0),
        "B1": corpus("b1.csv"),
        "mid": midpoint(corpus("b1.csv"), corpus("b2.csv")),
    }[name]
    r = semicontinuity_probe(P, 1e-3, 500, 0)
    assert r.samples == 500 and r.in_scope
    assert r.violations == 0


def test_criterion_6_barycentric():
    P0 = family("Peps", 0)
    for d in ("0.01", "0.05", "0.1"):
        N = barycentric(P0, d)
        r = nonneg_rank(N)
        assert r.exact and r.nn_lower == r.nn_upper == 3
        assert not proportional(N, P0)
    assert rank(barycentric(P0, 1)) == 1


def _shapes():
    for n in range(2, 7):
        for m in range(2, 7):
            for k in range(1, 5):
                if k <= min(n, m):
                    yield n, m, k


def test_criterion_7_jacobian():
    rng = np.random.default_rng(7)
    for n, m, k in _shapes():
        target = k * (n + m - k)
        done = 0
        while done < 100:
            p = ParamPoint.make(rng.uniform(0.05, 2, (k, n)), rng.uniform(0.05, 2, (k, m)))
            rep = maximal_rank_check(p)
            if not rep.hypotheses_hold:
                continue
            assert rep.jac_rank == target, (n, m, k)
            done += 1

        # closed form against central differences
        J = jacobian_matrix(p).to_numpy()
        v = np.array(p.flat())
        d = 1e-5
        for idx in range(v.size):
            e = np.zeros_like(v)
            e[idx] = d
            fp = evaluate_f(ParamPoint.from_flat(list(v + e), n, m, k)).to_numpy().ravel()
            fm = evaluate_f(ParamPoint.from_flat(list(v - e), n, m, k)).to_numpy().ravel()
            assert np.max(np.abs((fp - fm) / (2 * d) - J[:, idx])) < 1e-6

        # closed form against symbolic differentiation at a rational point
        xs = sympy.symbols(f"x0:{k * n}")
        ys = sympy.symbols(f"y0:{k * m}")
        flat = [s for h in range(k) for s in xs[h * n : (h + 1) * n] + ys[h * m : (h + 1) * m]]
        f = [
            sum(xs[h * n + i] * ys[h * m + j] for h in range(k))
            for i in range(n)
            for j in range(m)
        ]
        Jsym = sympy.Matrix(f).jacobian(flat)
        x = [[F(int(t), 7) for t in rng.integers(1, 15, n)] for _ in range(k)]
        y = [[F(int(t), 5) for t in rng.integers(1, 11, m)] for _ in range(k)]
        q = ParamPoint.make(x, y, exact=True)
        subs = {s: sympy.Rational(t.numerator, t.denominator) for s, t in zip(flat, q.flat())}
        expected = [[F(int(e.p), int(e.q)) for e in row] for row in Jsym.xreplace(subs).tolist()]
        assert jacobian_matrix(q) == Matrix.exact(expected)


def test_criterion_8_oracle():
    rng = random.Random(2024)
    for m in (4, 6):
        for _ in range(200):
            P = random_rank3(rng, m)
            inst = section_polygon(P)
            decided = nonneg_rank(P).nn_upper == 3
            assert decided == triangle_exists(inst.inner, inst.outer)[0]


def _random_spec(rng: random.Random, n: int, m: int, k: int) -> MixtureSpec:
    alpha = random_stochastic_vector(rng, k)
    cols = tuple(tuple(random_stochastic_vector(rng, n)) for _ in range(k))
    rows = tuple(tuple(random_stochastic_vector(rng, m)) for _ in range(k))
    return MixtureSpec(tuple(alpha), cols, rows)


def test_criterion_9_mixtures():
    rng = random.Random(9)
    for i in range(200):
        n, m = rng.randint(2, 5), rng.randint(2, 5)
        if i % 2:
            T = mixture_build(_random_spec(rng, n, m, 1))
        else:
            M = Matrix.exact([[rng.randint(0, 6) for _ in range(m)] for _ in range(n)])
            if M.total() == 0:
                continue
            T = JointTable.normalize(M)
        assert (independence_residual(T) == 0) == (rank(T.matrix) <= 1)

    for _ in range(40):
        k = rng.randint(1, 3)
        T = mixture_build(_random_spec(rng, rng.randint(3, 5), rng.randint(3, 5), k))
        rep = model_membership(T, k)
        assert rep.status is Verdict.MEMBER
        assert mixture_build(rep.witness).matrix == T.matrix

    B1 = JointTable.normalize(corpus("b1.csv"))
    assert B1.matrix == corpus("b1.csv").scale(F(1, 8))
    r = non_density_probe(B1, 3, 1e-3, 500, 0)
    assert r.samples == 500 and r.in_scope
    assert r.violations == 0


def _capture(capsys, argv):
    assert main(argv) == 0
    return capsys.readouterr().out.encode()


def test_criterion_10_determinism(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("NNRANK_SEED", "11")
    c = lambda name: str(resources.files("nnrank") / "corpus" / name)  # noqa: E731
    runs = [
        ["nnrank", c("m_eps_0.3.csv")],
        ["factorize", c("m_eps_0.3.csv"), "-k", "3"],
        ["perturb", "ball", c("b1.csv"), "--samples", "50", "--details"],
        ["family", "Meps", "--eps", "0.75"],
        ["mixture-check", c("m_eps_0.75.csv"), "-k", "3", "--normalize"],
    ]
    for argv in runs:
        assert _capture(capsys, argv) == _capture(capsys, argv), argv

    svgs = []
    for i in range(2):
        out = tmp_path / f"r{i}.svg"
        _capture(capsys, ["render", c("m_eps_0.75.csv"), "--mode", "Plane2D", "--witness", "-o", str(out)])
        svgs.append(out.read_bytes())
    assert svgs[0] == svgs[1] and b"<svg" in svgs[0]
    tet = [tmp_path / "t0.svg", tmp_path / "t1.svg"]
    for out in tet:
        _capture(capsys, ["render", c("b1.csv"), "--mode", "Tetrahedron3D", "-o", str(out)])
    assert tet[0].read_bytes() == tet[1].read_bytes()
    json.loads(_capture(capsys, runs[1]))
