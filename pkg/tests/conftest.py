import random
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import settings

from nnrank.matcore import Matrix, rank
from nnrank.matio import read_matrix
from nnrank.simplexgeo import section_polygon


def corpus(name: str) -> Matrix:
    with resources.as_file(resources.files("nnrank") / "corpus" / name) as p:
        return read_matrix(p)


def random_stochastic_vector(rng: random.Random, n: int, den: int = 12) -> list:
    w = [rng.randint(0, den) for _ in range(n)]
    while sum(w) == 0:
        w = [rng.randint(0, den) for _ in range(n)]
    return [Fraction(x, sum(w)) for x in w]


def random_rank3(rng: random.Random, m: int, n: int = 4) -> Matrix:
    """Exact rank-3 stochastic n x m matrix with columns spread over its section.

    Three random stochastic columns fix a plane; the m columns are drawn on
    the boundary of that plane's section polygon and pulled a random fraction
    toward its centre, which mixes easy and hard nested-triangle cases.
    """
    while True:
        base = [random_stochastic_vector(rng, n) for _ in range(3)]
        B = Matrix.exact(list(zip(*base)))
        if rank(B) < 3:
            continue
        inst = section_polygon(B)
        outer = inst.outer
        q = len(outer)
        cx = sum(v[0] for v in outer) / q
        cy = sum(v[1] for v in outer) / q
        cols = []
        for _ in range(m):
            i = rng.randrange(q)
            t = Fraction(rng.randint(0, 20), 20)
            a, b = outer[i], outer[(i + 1) % q]
            p = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            pull = Fraction(rng.randint(0, 8), 40)
            cols.append(inst.chart.lift((p[0] + pull * (cx - p[0]), p[1] + pull * (cy - p[1]))))
        P = Matrix.exact(list(zip(*cols)))
        if rank(P) == 3:
            return P


@pytest.fixture
def rng():
    return random.Random(12345)


# fixed example streams keep the suite reproducible run to run
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")


_criteria: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(name.split("_")[2])
        ok = report.outcome == "passed"
        _criteria[num] = _criteria.get(num, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if _criteria[num] else 'FAIL'}")
