"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``code`` used by the CLI when it
reports failures as JSON.
"""

from __future__ import annotations


class NNRankError(Exception):
    code = "error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ShapeMismatch(NNRankError):
    code = "shape_mismatch"


class ZeroColumn(NNRankError):
    code = "zero_column"

    def __init__(self, column: int):
        super().__init__(f"column {column} is identically zero")
        self.column = column


class NegativeEntry(NNRankError):
    code = "negative_entry"


class RadiusNonPositive(NNRankError):
    code = "radius_non_positive"


class NotStochastic(NNRankError):
    code = "not_stochastic"


class DimensionMismatch(NNRankError):
    code = "dimension_mismatch"


class WrongRank(NNRankError):
    code = "wrong_rank"


class DegenerateSection(NNRankError):
    code = "degenerate_section"


class InnerOutsideOuter(NNRankError):
    code = "inner_outside_outer"


class BadK(NNRankError):
    code = "bad_k"


class NotAFactorization(NNRankError):
    code = "not_a_factorization"


class BadParameter(NNRankError):
    code = "bad_parameter"


class DeltaOutOfRange(NNRankError):
    code = "delta_out_of_range"


class NoFlip(NNRankError):
    code = "no_flip"


class NonMonotone(NNRankError):
    code = "non_monotone"


class InvalidDistribution(NNRankError):
    code = "invalid_distribution"


class HypothesisNotMet(NNRankError):
    code = "hypothesis_not_met"


class BadMode(NNRankError):
    code = "bad_mode"


class FormatError(NNRankError):
    code = "format_error"
