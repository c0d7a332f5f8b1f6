"""
Location-proof system: provers, verifiers and the location-based service (LBS).

A prover senses its context information, stores it at the LBS and answers a
verifier's request with the context signed under its private key. Verifying a
proof extracts the LBS record, compares contexts and checks the signature; a
proof that fails the signature stage points at a cloned device.
"""

import logging
import math
import struct
from typing import Dict, Iterable, List, Sequence, Tuple

from pydantic import ValidationError

from ..exceptions import (
    ContextNotFoundError,
    InvalidCoordinateError,
    InvalidTimeError,
    SchemeError,
    UnknownProverError,
    UnknownVerifierError,
)
from ..models.scheme import (
    BatchItem,
    CloneReport,
    ContextInfo,
    DomainParams,
    KeyPair,
    LbsStore,
    LocationProof,
    Point,
    PointPlacement,
    ProofRequest,
    VerifyOutcome,
)
from .ecdsa import batch_verify, sign, verify

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6

_LENGTH = struct.Struct(">I")
_INTEGER = struct.Struct(">q")
_REAL = struct.Struct(">d")


def _check_finite(*values: float) -> None:
    for value in values:
        if not math.isfinite(value):
            raise InvalidCoordinateError(f"coordinate {value!r} is not a finite real")


def euclidean_distance(prover: Tuple[float, float], verifier: Tuple[float, float]) -> float:
    """
    Distance between a prover and a verifier in the plane.

    Args:
        prover: (p1, p2)
        verifier: (v1, v2)

    Returns:
        sqrt((p1 - v1)^2 + (p2 - v2)^2)

    Raises:
        InvalidCoordinateError: If a coordinate is NaN or infinite
    """
    _check_finite(*prover, *verifier)
    return math.hypot(prover[0] - verifier[0], prover[1] - verifier[1])


def determine_2d_point_space(coords: Sequence[float]) -> PointPlacement:
    """Shape (p1, p2, v1, v2) into a placement record."""
    if len(coords) != 4:
        raise InvalidCoordinateError(f"expected 4 coordinates, got {len(coords)}")
    _check_finite(*coords)
    p1, p2, v1, v2 = coords
    return PointPlacement(p1=p1, p2=p2, v1=v1, v2=v2)


def placement_distance(placement: PointPlacement) -> float:
    return euclidean_distance(placement.prover, placement.verifier)


def sense_context(id: int, time: int, loc: float, actv: str) -> ContextInfo:
    """
    Record sensed context information.

    Raises:
        InvalidTimeError: If time is negative
        InvalidCoordinateError: If loc is not finite
    """
    if time < 0:
        raise InvalidTimeError(f"sensing time must be >= 0, got {time}")
    _check_finite(loc)
    return ContextInfo(id=id, time=time, loc=loc, actv=actv)


def encode_context(ci: ContextInfo) -> bytes:
    """
    Canonical byte encoding used as the signing input.

    Each field in declared order (id, time, loc, actv) is written as a 4-byte
    big-endian length followed by its bytes: integers as 8-byte signed
    big-endian, the location as IEEE-754 binary64, the activity as UTF-8.
    """
    loc = 0.0 if ci.loc == 0 else ci.loc
    fields = (
        _INTEGER.pack(ci.id),
        _INTEGER.pack(ci.time),
        _REAL.pack(loc),
        ci.actv.encode("utf-8"),
    )
    return b"".join(_LENGTH.pack(len(field)) + field for field in fields)


def decode_context(data: bytes) -> ContextInfo:
    """
    Inverse of `encode_context`.

    Raises:
        SchemeError: If the bytes are not a canonical encoding
    """
    fields: List[bytes] = []
    offset = 0
    while offset < len(data):
        if offset + _LENGTH.size > len(data):
            raise SchemeError("truncated length prefix in context encoding")
        (length,) = _LENGTH.unpack_from(data, offset)
        offset += _LENGTH.size
        if offset + length > len(data):
            raise SchemeError("truncated field in context encoding")
        fields.append(data[offset:offset + length])
        offset += length
    if len(fields) != 4 or len(fields[0]) != 8 or len(fields[1]) != 8 or len(fields[2]) != 8:
        raise SchemeError("context encoding must hold id, time, loc and actv")
    try:
        actv = fields[3].decode("utf-8")
    except UnicodeDecodeError as e:
        raise SchemeError(f"activity is not UTF-8: {e}")
    try:
        return ContextInfo(
            id=_INTEGER.unpack(fields[0])[0],
            time=_INTEGER.unpack(fields[1])[0],
            loc=_REAL.unpack(fields[2])[0],
            actv=actv,
        )
    except ValidationError as e:
        raise SchemeError(f"decoded context is invalid: {e}")


def store_context(lbs: LbsStore, ci: ContextInfo) -> LbsStore:
    """Return a store holding `ci`, replacing any record with the same (id, time)."""
    records = list(lbs.records)
    for index, record in enumerate(records):
        if (record.id, record.time) == (ci.id, ci.time):
            records[index] = ci
            break
    else:
        records.append(ci)
    return lbs.model_copy(update={"records": tuple(records)})


def extract_context(lbs: LbsStore, prover_id: int, time: int) -> ContextInfo:
    """
    Look up the stored context of a prover at one epoch.

    Raises:
        ContextNotFoundError: If no record exists, which signals an
            unregistered or compromised device
    """
    for record in lbs.records:
        if record.id == prover_id and record.time == time:
            return record
    raise ContextNotFoundError(prover_id, time)


def register_prover(lbs: LbsStore, prover_id: int, public_key: Point) -> LbsStore:
    keys = dict(lbs.public_keys)
    keys[prover_id] = public_key
    return lbs.model_copy(update={"public_keys": keys})


def register_verifier(lbs: LbsStore, verifier_id: int) -> LbsStore:
    if verifier_id in lbs.verifiers:
        return lbs
    return lbs.model_copy(update={"verifiers": lbs.verifiers + (verifier_id,)})


def report_compromise(lbs: LbsStore, prover_id: int) -> LbsStore:
    """Record that a verifier notified the LBS of a prover's compromise."""
    if prover_id in lbs.compromised:
        return lbs
    logger.warning("Prover %d reported as compromised", prover_id)
    return lbs.model_copy(update={"compromised": lbs.compromised + (prover_id,)})


def request_location_proof(lbs: LbsStore, verifier_id: int, prover_id: int, time: int) -> ProofRequest:
    """
    Create a verifier's request for a prover's proof at one epoch.

    Raises:
        UnknownVerifierError: If the verifier is not registered
        UnknownProverError: If the prover has no registered public key
    """
    if verifier_id not in lbs.verifiers:
        raise UnknownVerifierError(f"verifier {verifier_id} is not registered at the LBS")
    if prover_id not in lbs.public_keys:
        raise UnknownProverError(f"prover {prover_id} is not registered at the LBS")
    return ProofRequest(verifier_id=verifier_id, prover_id=prover_id, time=time)


def generate_location_proof(
    ci: ContextInfo,
    k_pr: KeyPair,
    dp: DomainParams,
    seed: int = 0,
    hash_name: str = "sha256",
) -> LocationProof:
    """Sign the canonical encoding of `ci` with the prover's private key."""
    signature = sign(encode_context(ci), k_pr.d, dp, seed=seed, hash_name=hash_name)
    return LocationProof(context=ci, signature=signature, prover_id=ci.id)


def verify_context(proof_ci: ContextInfo, lbs_ci: ContextInfo, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """Exact match on id, time and activity; location within a closed tolerance."""
    return (
        proof_ci.id == lbs_ci.id
        and proof_ci.time == lbs_ci.time
        and proof_ci.actv == lbs_ci.actv
        and abs(proof_ci.loc - lbs_ci.loc) <= tolerance
    )


def verify_location_proof(
    proof: LocationProof,
    k_pb: Point,
    lbs: LbsStore,
    dp: DomainParams,
    tolerance: float = DEFAULT_TOLERANCE,
    hash_name: str = "sha256",
) -> VerifyOutcome:
    """
    Run the verification pipeline on one proof.

    extract_context, then verify_context, then the signature over the
    canonical encoding of the proof's context.

    Returns:
        Accept, or Reject naming the failing stage
    """
    try:
        stored = extract_context(lbs, proof.prover_id, proof.context.time)
    except ContextNotFoundError:
        return VerifyOutcome.reject("context-not-found")
    if not verify_context(proof.context, stored, tolerance):
        return VerifyOutcome.reject("context-mismatch")
    if not verify(proof.signature, k_pb, encode_context(proof.context), dp, hash_name):
        logger.info("Signature of prover %d rejected", proof.prover_id)
        return VerifyOutcome.reject("signature")
    return VerifyOutcome.accept()


def verify_with_verifiers(
    proof: LocationProof,
    lbs: LbsStore,
    dp: DomainParams,
    tolerance: float = DEFAULT_TOLERANCE,
) -> Dict[int, VerifyOutcome]:
    """
    Let every registered verifier run the pipeline against the LBS public key.

    Raises:
        UnknownProverError: If the prover has no registered public key
    """
    if proof.prover_id not in lbs.public_keys:
        raise UnknownProverError(f"prover {proof.prover_id} is not registered at the LBS")
    k_pb = lbs.public_keys[proof.prover_id]
    return {v: verify_location_proof(proof, k_pb, lbs, dp, tolerance) for v in lbs.verifiers}


def detect_clones(
    proofs: Iterable[LocationProof],
    lbs: LbsStore,
    dp: DomainParams,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CloneReport:
    """
    Verify many proofs at once and report compromised provers.

    Context checks run per proof; the signatures of the proofs that pass them
    are checked with one batch verification. Provers whose signature fails are
    recorded as compromised in the returned LBS.
    """
    proofs = list(proofs)
    outcomes: List[VerifyOutcome] = [VerifyOutcome.accept()] * len(proofs)
    batch_indices: List[int] = []
    items: List[BatchItem] = []
    for index, proof in enumerate(proofs):
        try:
            stored = extract_context(lbs, proof.prover_id, proof.context.time)
        except ContextNotFoundError:
            outcomes[index] = VerifyOutcome.reject("context-not-found")
            continue
        if not verify_context(proof.context, stored, tolerance):
            outcomes[index] = VerifyOutcome.reject("context-mismatch")
            continue
        k_pb = lbs.public_keys.get(proof.prover_id)
        if k_pb is None:
            outcomes[index] = VerifyOutcome.reject("signature")
            continue
        batch_indices.append(index)
        items.append(BatchItem(signature=proof.signature, public_key=k_pb, message=encode_context(proof.context)))

    compromised: List[int] = [proofs[i].prover_id for i, o in enumerate(outcomes) if o.reason == "signature"]
    if items:
        result = batch_verify(items, dp, seed=seed)
        for position in result.invalid:
            index = batch_indices[position]
            outcomes[index] = VerifyOutcome.reject("signature")
            compromised.append(proofs[index].prover_id)

    for prover_id in compromised:
        lbs = report_compromise(lbs, prover_id)
    return CloneReport(outcomes=outcomes, compromised=sorted(set(compromised)), lbs=lbs)
