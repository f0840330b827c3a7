"""Non-negative rank of small matrices: exact rank-3 decisions, NMF bounds,
Jacobian certificates, perturbation probes and mixture-model membership."""

from .errors import NNRankError
from .factorize import Factorization, NmfOptions, nmf, nnrank_upper
from .matcore import Backend, Matrix, frobenius_distance, rank, scaling_factors, to_stochastic
from .simplexgeo import RankResult, nonneg_rank, section_polygon

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "Factorization",
    "Matrix",
    "NNRankError",
    "NmfOptions",
    "RankResult",
    "frobenius_distance",
    "nmf",
    "nnrank_upper",
    "nonneg_rank",
    "rank",
    "scaling_factors",
    "section_polygon",
    "to_stochastic",
]
