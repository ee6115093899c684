"""Computational checks for exponential sums over multiplicative subgroups of F_p."""

from .config import TOL, Tolerances
from .errors import (
    CheckFailure,
    ExpSumError,
    HypothesesFail,
    InequalityViolated,
    InvalidInput,
    KCapExceeded,
    NotPrime,
    StageViolation,
)
from .expsum import exp_sum, max_nontrivial_fourier
from .field_core import FieldContext, SubgroupSpec, make_field_context, segment, subgroup
from .measures import Measure, convolve, fourier, k_fold_nu, nu_of, phi_of
from .pipeline import assemble_contradiction, run_pipeline, verify_hypotheses
from .spectrum import select_k_delta, subgroup_measure

__version__ = "0.1.0"

__all__ = [
    "TOL", "Tolerances", "CheckFailure", "ExpSumError", "HypothesesFail", "InequalityViolated",
    "InvalidInput", "KCapExceeded", "NotPrime", "StageViolation", "exp_sum", "max_nontrivial_fourier",
    "FieldContext", "SubgroupSpec", "make_field_context", "segment", "subgroup", "Measure", "convolve",
    "fourier", "k_fold_nu", "nu_of", "phi_of", "assemble_contradiction", "run_pipeline",
    "verify_hypotheses", "select_k_delta", "subgroup_measure",
]
