"""Reading and writing matrices as headerless CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from .errors import FormatError
from .matcore import Matrix


def _is_terminating(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def format_scalar(x) -> str:
    """Exact decimal when the denominator is 2^a 5^b, else 17 significant digits."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        if _is_terminating(x):
            d = x.denominator
            k = 0
            while 10**k % d:
                k += 1
            digits = abs(x.numerator) * (10**k // d)
            sign = "-" if x < 0 else ""
            s = str(digits).rjust(k + 1, "0")
            return f"{sign}{s[:-k]}.{s[-k:]}"
        return format(float(x), ".17g")
    return format(float(x), ".17g")


def json_scalar(x):
    """Scalar for JSON output: ints stay ints, terminating rationals become exact floats."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return float(format_scalar(x))


def parse_csv(text: str) -> Matrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError("empty CSV matrix")
    try:
        return Matrix.exact(rows)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad CSV entry: {exc}") from exc


def _parse_entry(x):
    # JSON floats are read through their decimal text, keeping 0.1 exact
    if isinstance(x, bool):
        raise FormatError("boolean entry")
    if isinstance(x, (int, float, str)):
        return Fraction(str(x))
    raise FormatError(f"bad entry {x!r}")


def parse_json(text: str) -> tuple[Matrix, dict]:
    """Parse ``{"rows", "cols", "data"}``; returns the matrix and the raw object."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "data" not in obj:
        raise FormatError('JSON matrix needs a "data" field')
    try:
        M = Matrix.exact([[_parse_entry(x) for x in row] for row in obj["data"]])
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise FormatError(f"bad JSON entry: {exc}") from exc
    if obj.get("rows", M.rows) != M.rows or obj.get("cols", M.cols) != M.cols:
        raise FormatError("declared rows/cols disagree with data")
    return M, obj


def read_matrix(path: str | Path) -> Matrix:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_json(text)[0]
    return parse_csv(text)


def to_csv(M: Matrix) -> str:
    return "".join(",".join(format_scalar(x) for x in r) + "\n" for r in M.entries)


def to_json_obj(M: Matrix) -> dict:
    return {
        "rows": M.rows,
        "cols": M.cols,
        "data": [[json_scalar(x) for x in r] for r in M.entries],
    }


def write_matrix(M: Matrix, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(to_json_obj(M)) + "\n")
    else:
        path.write_text(to_csv(M))
