"""Rank-metric trapdoor functions with a two-step support decoder.

The package provides exact arithmetic in F_{q^m} with packed-integer
elements (field), dense matrices over the extension and the base field
(linalg), support and subspace calculus (subspace), the two-step decoder
for semi-homogeneous check matrices (decoder), trapdoor key generation,
evaluation, and inversion (trapdoor), and closed-form failure/closeness
bounds with size accounting and Monte Carlo experiments (analysis).
"""

from .analysis import (PRECISION, ConstraintCheck, FailureBound,
                       HashCollisionResult, KeySizes, ParamReport,
                       REFERENCE_PARAMS, ReferenceRow, SimulationResult,
                       TableLine, epsilon_bound, failure_bound,
                       hash_collision_check, key_sizes, reference_table,
                       simulate_failure, size_kb, validate_params)
from .decoder import (CheckMatrix, DecodeFailure, DecodeResult, StepIFailure,
                      StepIIFailure, decode, recover_coefficients,
                      recover_support)
from .field import FieldCtx, default_modulus, is_irreducible, make_field
from .linalg import (MatFq, MatFqm, expand_to_base, mat_add, mat_mul,
                     mat_sub, rref, solve)
from .subspace import (Subspace, gaussian_binomial, intersect, inverse_scale,
                       product_space, sample_homogeneous,
                       sample_semi_homogeneous, sample_subspace, span_of,
                       sphere_log2_bounds, sphere_size, support_of)
from .trapdoor import (Ciphertext, InversionError, ParamSet, PublicKey,
                       TrapdoorKey, deserialize_ct, deserialize_pk,
                       deserialize_tk, evaluate, gen, invert, sample_input,
                       serialize_ct, serialize_pk, serialize_tk)

__version__ = "0.1.0"

__all__ = [
    "PRECISION", "ConstraintCheck", "FailureBound", "HashCollisionResult",
    "KeySizes", "ParamReport", "REFERENCE_PARAMS", "ReferenceRow",
    "SimulationResult", "TableLine", "epsilon_bound", "failure_bound",
    "hash_collision_check", "key_sizes", "reference_table",
    "simulate_failure", "size_kb", "validate_params",
    "CheckMatrix", "DecodeFailure", "DecodeResult", "StepIFailure",
    "StepIIFailure", "decode", "recover_coefficients", "recover_support",
    "FieldCtx", "default_modulus", "is_irreducible", "make_field",
    "MatFq", "MatFqm", "expand_to_base", "mat_add", "mat_mul", "mat_sub",
    "rref", "solve",
    "Subspace", "gaussian_binomial", "intersect", "inverse_scale",
    "product_space", "sample_homogeneous", "sample_semi_homogeneous",
    "sample_subspace", "span_of", "sphere_log2_bounds", "sphere_size",
    "support_of",
    "Ciphertext", "InversionError", "ParamSet", "PublicKey", "TrapdoorKey",
    "deserialize_ct", "deserialize_pk", "deserialize_tk", "evaluate", "gen",
    "invert", "sample_input", "serialize_ct", "serialize_pk", "serialize_tk",
    "__version__",
]
