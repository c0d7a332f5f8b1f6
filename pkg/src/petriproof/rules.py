"""
Host rules of the built-in HLPN models.

`.pnet` sources bind transitions to these rules by name (`bind T = keygen.generate_keys`);
each rule closes over a SchemeContext so that firing a model runs the real
ECDSA* and location-proof computations on its tokens.
"""

import logging
from typing import Any, Callable, Dict, Mapping, Optional

from .context import SchemeContext, build_context
from .exceptions import ContextNotFoundError, SchemeError
from .hlpn import rule
from .models.net import Rule
from .models.scheme import ContextInfo, PointPlacement, ProofRequest, Signature, VerifiedContext
from .scheme.curve import multi_scalar_mult, scalar_mult, validate_domain_parameters
from .scheme.ecdsa import generate_keys as ecdsa_generate_keys, hash_to_int
from .scheme.lps import (
    determine_2d_point_space,
    extract_context,
    generate_location_proof,
    placement_distance,
    request_location_proof,
    sense_context,
    verify_context,
    verify_location_proof,
)

logger = logging.getLogger(__name__)

Variables = Mapping[str, Any]


class RuleBook:
    """Collects rules by name."""

    def __init__(self):
        self.rules: Dict[str, Rule] = {}

    def rule(self, name: str, guard: Optional[Callable[[Variables], bool]] = None):
        def wrap(action) -> Rule:
            built = rule(name, guard)(action)
            self.rules[name] = built
            return built
        return wrap


def _keygen(book: RuleBook, ctx: SchemeContext) -> None:
    @book.rule("keygen.inputs")
    def inputs(v: Variables):
        return {"Inputs": [ctx.dp]}

    @book.rule("keygen.generate_domain_parameters")
    def generate_domain_parameters(v: Variables):
        return {"DomainParametersStore": [validate_domain_parameters(v["i"])]}

    @book.rule("keygen.generate_keys")
    def generate_keys(v: Variables):
        return {"KeysStore": [ecdsa_generate_keys(v["dp"], seed=ctx.seed)]}


def _hash(i: Any, dp: Any) -> int:
    return hash_to_int(i.m, dp, i.hash_name)


def _siggen(book: RuleBook, ctx: SchemeContext) -> None:
    dp = ctx.dp

    @book.rule("siggen.inputs")
    def inputs(v: Variables):
        return {"Inputs": [ctx.signing_input]}

    @book.rule("siggen.compute_coordinates")
    def compute_coordinates(v: Variables):
        return {"CoordinatesStore": [scalar_mult(v["i"].k, dp.base, dp)]}

    @book.rule("siggen.compute_hash")
    def compute_hash(v: Variables):
        return {"HashIntegerStore": [_hash(v["i"], dp)]}

    @book.rule("siggen.generate_signature_pair_1")
    def generate_signature_pair_1(v: Variables):
        return {"SignatureStore": [("r", v["c"].x % dp.n)]}

    @book.rule("siggen.generate_signature_pair_2")
    def generate_signature_pair_2(v: Variables):
        i, e = v["i"], v["e"]
        R = scalar_mult(i.k, dp.base, dp)
        r = R.x % dp.n
        return {"SignatureStore": [("s", pow(i.k, -1, dp.n) * (e + i.d * r) % dp.n)]}


def _sigverify(book: RuleBook, ctx: SchemeContext) -> None:
    dp = ctx.dp

    @book.rule("sigverify.inputs")
    def inputs(v: Variables):
        return {"Inputs": [ctx.verification_input]}

    @book.rule("sigverify.compute_hash")
    def compute_hash(v: Variables):
        return {"HashIntegerStore": [_hash(v["i"], dp)]}

    @book.rule("sigverify.get_signature_integers")
    def get_signature_integers(v: Variables):
        signature = v["i"].signature
        return {"SignatureStore": [Signature(r=signature.r, s=signature.s)]}

    @book.rule("sigverify.calculate_point")
    def calculate_point(v: Variables):
        s = v["sig"].s
        return {"PointStore": [pow(s, -1, dp.n) if 1 <= s < dp.n else 0]}

    @book.rule("sigverify.compute_verification_coordinates")
    def compute_verification_coordinates(v: Variables):
        sig, e, w = v["sig"], v["e"], v["w"]
        return {"CoordinatesStore": [(e * w % dp.n, sig.r * w % dp.n)]}

    @book.rule("sigverify.verify_signatures")
    def verify_signatures(v: Variables):
        i, (u1, u2) = v["i"], v["c"]
        signature = i.signature
        accepted = False
        if 1 <= signature.r < dp.n and 1 <= signature.s < dp.n and not i.Q.is_infinity:
            X = multi_scalar_mult([(u1, dp.base), (u2, i.Q)], dp)
            accepted = not X.is_infinity and X.x % dp.n == signature.r
        return {"AcceptReject": ["Accept" if accepted else "Reject"]}


def _calc_location(book: RuleBook, ctx: SchemeContext) -> None:
    @book.rule("calc.inputs")
    def inputs(v: Variables):
        return {"Inputs": [tuple(ctx.coordinates)]}

    @book.rule("calc.determine_2d_point_space")
    def determine_point_space(v: Variables):
        return {"PointsStore": [determine_2d_point_space(v["i"])]}

    @book.rule("calc.calculate_distance")
    def calculate_distance(v: Variables):
        placement: PointPlacement = v["ps"]
        return {"ProversDistanceStore": [placement_distance(placement)]}


def _same_epoch(v: Variables) -> bool:
    request, ci = v["lps"], v["cis"]
    return request.prover_id == ci.id and request.time == ci.time


def _gen_proof(book: RuleBook, ctx: SchemeContext) -> None:
    dp = ctx.dp

    @book.rule("genproof.inputs")
    def inputs(v: Variables):
        return {"Inputs": [ctx.prover_input]}

    @book.rule("genproof.sense_context_information")
    def sense_context_information(v: Variables):
        i = v["i"]
        return {"ContextInformationStore": [sense_context(i.id, i.time, i.loc, i.actv)]}

    @book.rule("genproof.store_context_information")
    def store_context_information(v: Variables):
        return {"LBSInformationStore": [v["cis"]]}

    @book.rule("genproof.request_location_proof")
    def request_proof(v: Variables):
        ci = v["lis"]
        return {"LocationProofsStore": [request_location_proof(ctx.lbs, ctx.verifier_id, ci.id, ci.time)]}

    @book.rule("genproof.generate_location_proof", guard=_same_epoch)
    def generate_proof(v: Variables):
        i = v["i"]
        keys = ctx.keys if i.d == ctx.keys.d else ctx.foreign_keys
        proof = generate_location_proof(v["cis"], keys, dp, seed=ctx.seed, hash_name=i.hash_name)
        return {"SignedLocationProofsStore": [proof]}


def _context_found(v: Variables) -> bool:
    return isinstance(v["eci"], ContextInfo)


def _context_matches_request(v: Variables) -> bool:
    eci, request = v["eci"], v["lps"]
    return isinstance(eci, ContextInfo) and request.prover_id == eci.id and request.time == eci.time


def _verify_proof(book: RuleBook, ctx: SchemeContext) -> None:
    @book.rule("verifyproof.inputs")
    def inputs(v: Variables):
        return {"Inputs": [ctx.verifier_input]}

    @book.rule("verifyproof.extract_context_information")
    def extract_context_information(v: Variables):
        proof = v["i"].proof
        try:
            found: Any = extract_context(ctx.lbs, proof.prover_id, proof.context.time)
        except ContextNotFoundError:
            found = "NotFound"
        return {"ExtractedContextInformationStore": [found]}

    @book.rule("verifyproof.accept_location_proof_request", guard=_context_found)
    def accept_request(v: Variables):
        eci = v["eci"]
        request = ProofRequest(verifier_id=ctx.verifier_input.verifier_id, prover_id=eci.id, time=eci.time)
        return {"LocationProofsStore": [request]}

    @book.rule("verifyproof.verify_context_information", guard=_context_matches_request)
    def verify_context_information(v: Variables):
        return {"VerifiedInformationStore": [VerifiedContext(context=v["eci"], request=v["lps"])]}

    @book.rule("verifyproof.verify_location_proof")
    def verify_proof(v: Variables):
        i, vis = v["i"], v["vis"]
        accepted = verify_context(i.proof.context, vis.context, ctx.tolerance)
        if accepted:
            try:
                accepted = verify_location_proof(i.proof, i.Q, ctx.lbs, ctx.dp, ctx.tolerance).accepted
            except SchemeError as e:
                logger.info("Location proof rejected: %s", e)
                accepted = False
        return {"AcceptRejectLocationProof": ["Accept" if accepted else "Reject"]}


def hlpn_rules(ctx: Optional[SchemeContext] = None) -> Dict[str, Rule]:
    """
    Every built-in rule, keyed by the name `.pnet` sources bind to.

    Args:
        ctx: Scheme state the rules close over; a toy-profile context when omitted
    """
    ctx = ctx or build_context()
    book = RuleBook()
    for register in (_keygen, _siggen, _sigverify, _calc_location, _gen_proof, _verify_proof):
        register(book, ctx)
    return book.rules
