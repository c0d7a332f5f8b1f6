"""Executable ECDSA* and location-proof algorithms."""

from .curve import (
    curve_points,
    is_on_curve,
    is_probable_prime,
    multi_scalar_mult,
    point_add,
    point_neg,
    scalar_mult,
    validate_domain_parameters,
)
from .ecdsa import (
    batch_verify,
    benchmark_verification,
    generate_domain_parameters,
    generate_keys,
    hash_to_int,
    select_nonce,
    sign,
    verify,
)
from .lps import (
    decode_context,
    detect_clones,
    determine_2d_point_space,
    encode_context,
    euclidean_distance,
    extract_context,
    generate_location_proof,
    register_prover,
    register_verifier,
    report_compromise,
    request_location_proof,
    sense_context,
    store_context,
    verify_context,
    verify_location_proof,
    verify_with_verifiers,
)

__all__ = [
    "curve_points",
    "is_on_curve",
    "is_probable_prime",
    "multi_scalar_mult",
    "point_add",
    "point_neg",
    "scalar_mult",
    "validate_domain_parameters",
    "batch_verify",
    "benchmark_verification",
    "generate_domain_parameters",
    "generate_keys",
    "hash_to_int",
    "select_nonce",
    "sign",
    "verify",
    "decode_context",
    "detect_clones",
    "determine_2d_point_space",
    "encode_context",
    "euclidean_distance",
    "extract_context",
    "generate_location_proof",
    "register_prover",
    "register_verifier",
    "report_compromise",
    "request_location_proof",
    "sense_context",
    "store_context",
    "verify_context",
    "verify_location_proof",
    "verify_with_verifiers",
]
