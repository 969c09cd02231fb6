"""Dimensionality reduction and streaming sketches for dynamically weighted
Euclidean norms, using linear maps into a complex vector space."""

__version__ = "0.1.0"

from .generators import SparseSpec, gen_pair
from .hashing import HashPolynomial, hash_eval, hash_new
from .oracle import (
    WeightedPair,
    distortion,
    exact_rho_expectation,
    exact_sketch_expectation,
    p_norm,
    weighted_sq_norm,
)
from .projection import (
    PlanParams,
    ProjectionMatrix,
    ProvenanceError,
    ReducedVector,
    hoeffding_k,
    reduce,
    reduce_sparse,
    required_k,
    rho,
    rho_pairwise,
    sample_matrix,
)
from .sketch import (
    ConfigMismatchError,
    SketchConfig,
    StreamSketch,
    WeightedNormEstimate,
    new_pair,
    plan_sketch,
    sketch_estimate,
    sketch_merge,
    sketch_new,
)

__all__ = [
    "ConfigMismatchError",
    "HashPolynomial",
    "PlanParams",
    "ProjectionMatrix",
    "ProvenanceError",
    "ReducedVector",
    "SketchConfig",
    "SparseSpec",
    "StreamSketch",
    "WeightedNormEstimate",
    "WeightedPair",
    "distortion",
    "exact_rho_expectation",
    "exact_sketch_expectation",
    "gen_pair",
    "hash_eval",
    "hash_new",
    "hoeffding_k",
    "new_pair",
    "p_norm",
    "plan_sketch",
    "reduce",
    "reduce_sparse",
    "required_k",
    "rho",
    "rho_pairwise",
    "sample_matrix",
    "sketch_estimate",
    "sketch_merge",
    "sketch_new",
    "weighted_sq_norm",
]
