"""Regenerate the matrices shipped in src/nnrank/corpus.

The family members are deterministic.  The pair a1/a2 (written as exact p/q rationals) comes from the seeded
randomised search and is frozen so tests do not depend on re-running it.

    python3 scripts/make_corpus.py
"""

from pathlib import Path

from nnrank.matio import write_matrix
from nnrank.perturb import family, search_nonconvex_pair

OUT = Path(__file__).resolve().parent.parent / "src" / "nnrank" / "corpus"

FAMILY = {
    "b1.csv": ("B1", 0),
    "b2.csv": ("B2", 0),
    "p_eps_0.csv": ("Peps", "0"),
    "p_eps_0.1.csv": ("Peps", "0.1"),
    "p_eps_0.25.csv": ("Peps", "0.25"),
    "m_eps_0.csv": ("Meps", "0"),
    "m_eps_0.3.csv": ("Meps", "0.3"),
    "m_eps_0.75.csv": ("Meps", "0.75"),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for fname, (name, eps) in FAMILY.items():
        write_matrix(family(name, eps), OUT / fname)
    pair = search_nonconvex_pair(seed=0)
    if pair is None:
        raise SystemExit("search found no pair; raise `tries`")
    # entries like 7/36 have no finite decimal form; keep them exact
    for fname, M in (("a1.csv", pair[0]), ("a2.csv", pair[1])):
        (OUT / fname).write_text("".join(",".join(str(x) for x in r) + "\n" for r in M.entries))
    for p in sorted(OUT.glob("*.csv")):
        print(p.name)


if __name__ == "__main__":
    main()
