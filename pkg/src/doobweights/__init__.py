"""Weighted Doob maximal inequalities on finite filtered measure spaces."""

from .bounds import (
    ap_lower_test_family,
    extremal_search,
    norm_ratio,
    sharpness_experiment,
    upper_constant,
    verify_upper,
    weighted_norm,
)
from .constants import ConstantProfile, optimal_a, phi, profile, psi
from .errors import DoobWeightsError
from .filtration import FilteredSpace, build_dyadic, build_from_spec, build_uniform_tree, load_space, serialize
from .operators import cond_exp, doob_maximal, first_hit, stopping_time, tailed_maximal, weighted_maximal
from .principal import build_principal_forest, lemma_domination_check, verify_properties
from .stopping import build_decomposition, verify_chain, verify_partition
from .weights import ApReport, ap_characteristic, dual_weight, power_weight

__version__ = "0.1.0"

__all__ = [
    "ApReport", "ConstantProfile", "DoobWeightsError", "FilteredSpace",
    "ap_characteristic", "ap_lower_test_family", "build_decomposition", "build_dyadic",
    "build_from_spec", "build_principal_forest", "build_uniform_tree", "cond_exp",
    "doob_maximal", "dual_weight", "extremal_search", "first_hit", "lemma_domination_check",
    "load_space", "norm_ratio", "optimal_a", "phi", "power_weight", "profile", "psi",
    "serialize", "sharpness_experiment", "stopping_time", "tailed_maximal", "upper_constant",
    "verify_chain", "verify_partition", "verify_properties", "verify_upper",
    "weighted_maximal", "weighted_norm",
]
