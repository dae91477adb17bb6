"""Exact and approximate stabilizer rank of small quantum states."""

from __future__ import annotations

from .dense import DenseState, haar_sample, haar_samples, load_state, named_state, t_state
from .errors import BudgetExceeded, NumericError, ResourceLimitError
from .measures import f_chi_bound, gowers_u3, measure_report, stab_extent, stab_fidelity
from .rank import RankCertificate, approx_rank, exact_rank
from .stab import FULL, QUADRATIC, Dictionary, StabilizerState, enumerate_dictionary

__all__ = [
    "BudgetExceeded",
    "DenseState",
    "Dictionary",
    "FULL",
    "NumericError",
    "QUADRATIC",
    "RankCertificate",
    "ResourceLimitError",
    "StabilizerState",
    "approx_rank",
    "enumerate_dictionary",
    "exact_rank",
    "f_chi_bound",
    "gowers_u3",
    "haar_sample",
    "haar_samples",
    "load_state",
    "measure_report",
    "named_state",
    "stab_extent",
    "stab_fidelity",
    "t_state",
]
__version__ = "0.1.0"
