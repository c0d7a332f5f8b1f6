"""
Functions callable from CPN arc inscriptions.

The built-in models work on symbolic colour sets; every function returns the
symbol the model expects and records, in the run's SchemeContext, the
concrete value the corresponding scheme operation computed.
"""

import logging
from typing import Any, Callable, Dict, Iterator, Optional, Sequence

from ..context import SchemeContext, build_context
from ..exceptions import ContextNotFoundError, ExpressionTypeError, UnknownFunctionError
from ..models.scheme import ProofRequest
from ..scheme.curve import scalar_mult
from ..scheme.ecdsa import generate_keys, hash_to_int, sign, verification_scalars, verify
from ..scheme.lps import (
    euclidean_distance,
    extract_context,
    generate_location_proof,
    request_location_proof,
    sense_context,
    verify_context,
    verify_location_proof,
)

logger = logging.getLogger(__name__)

CpnFunction = Callable[..., Any]


class FunctionRegistry:
    """Named host functions taking the run context as first argument."""

    def __init__(self):
        self._functions: Dict[str, CpnFunction] = {}

    def register(self, name: str):
        """Decorator adding a function under `name`."""
        def wrap(func: CpnFunction) -> CpnFunction:
            self._functions[name] = func
            return func
        return wrap

    def __contains__(self, name: object) -> bool:
        return name in self._functions

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._functions))

    def get(self, name: str) -> CpnFunction:
        if name not in self._functions:
            raise UnknownFunctionError(f"function {name} is not registered")
        return self._functions[name]

    def bind(self, context: Optional[SchemeContext] = None) -> Dict[str, Callable[..., Any]]:
        """Close every function over one run context."""
        ctx = context if context is not None else build_context()

        def bound(func: CpnFunction) -> Callable[..., Any]:
            return lambda *args: func(ctx, *args)

        return {name: bound(func) for name, func in self._functions.items()}


def _cycle(ctx: SchemeContext, function: str, symbols: Sequence[str]) -> str:
    return symbols[ctx.next_index(function) % len(symbols)]


def _lookup(function: str, table: Dict[str, Any], key: Any) -> Any:
    if key not in table:
        raise ExpressionTypeError(f"{function} is undefined for {key!r}")
    return table[key]


default_functions = FunctionRegistry()
register = default_functions.register


# Key generation


@register("genDomParms")
def gen_dom_parms(ctx: SchemeContext, i: str) -> str:
    dp = ctx.dp
    values = {
        "p": dp.p,
        "E": (dp.a, dp.b),
        "P": (dp.base.x, dp.base.y),
        "n": dp.n,
        "h": dp.h,
    }
    ctx.record("genDomParms", (i, _lookup("genDomParms", values, i)))
    return "s" + i


@register("genKeys")
def gen_keys(ctx: SchemeContext, s: str) -> list:
    ctx.record("genKeys", generate_keys(ctx.dp, seed=ctx.seed + ctx.next_index("genKeys")))
    return ["PUK", "PRK"]


# Signature generation


@register("compCoord")
def comp_coord(ctx: SchemeContext, i: str) -> str:
    R = scalar_mult(ctx.signing_input.k, ctx.dp.base, ctx.dp)
    symbol = _cycle(ctx, "compCoord", ("x", "y"))
    ctx.record("compCoord", R.x if symbol == "x" else R.y)
    return symbol


@register("compHash")
def comp_hash(ctx: SchemeContext, i: str) -> str:
    ctx.record("compHash", hash_to_int(ctx.message, ctx.dp))
    return "e"


@register("genSigPair1")
def gen_sig_pair_1(ctx: SchemeContext, c: str) -> str:
    R = scalar_mult(ctx.signing_input.k, ctx.dp.base, ctx.dp)
    ctx.record("genSigPair1", R.x % ctx.dp.n)
    return "nx" if c == "x" else "n"


@register("genSigPair2")
def gen_sig_pair_2(ctx: SchemeContext, h: str) -> str:
    signature = sign(ctx.message, ctx.keys.d, ctx.dp, nonce=ctx.signing_input.k)
    ctx.record("genSigPair2", signature.s)
    return _cycle(ctx, "genSigPair2", ("nk", "ne", "nd", "nr"))


@register("comSign")
def com_sign(ctx: SchemeContext, r: str, s: str) -> tuple:
    ctx.record("comSign", sign(ctx.message, ctx.keys.d, ctx.dp, nonce=ctx.signing_input.k))
    return (r, s)


# Signature verification


@register("getSigInt")
def get_sig_int(ctx: SchemeContext, i: str) -> str:
    signature = ctx.verification_input.signature
    symbol = _cycle(ctx, "getSigInt", ("sr", "ss"))
    ctx.record("getSigInt", signature.r if symbol == "sr" else signature.s)
    return symbol


@register("calcPoint")
def calc_point(ctx: SchemeContext, si: str) -> str:
    ctx.record("calcPoint", pow(ctx.verification_input.signature.s, -1, ctx.dp.n))
    return _cycle(ctx, "calcPoint", ("ns", "n"))


@register("compUCoords")
def comp_u_coords(ctx: SchemeContext, hi: str, ps: str) -> tuple:
    vi = ctx.verification_input
    ctx.record("compUCoords", verification_scalars(vi.signature, vi.m, ctx.dp, vi.hash_name))
    return (hi, ps)


@register("verSign")
def ver_sign(ctx: SchemeContext, hi: str, ps: str, i: str) -> tuple:
    vi = ctx.verification_input
    ctx.record("verSign", verify(vi.signature, vi.Q, vi.m, ctx.dp, vi.hash_name))
    return (hi, ps, i)


# Location calculation


@register("det2DSpace")
def det_2d_space(ctx: SchemeContext, i: str) -> str:
    coordinates = dict(zip(("p1", "p2", "v1", "v2"), ctx.coordinates))
    ctx.record("det2DSpace", (i, _lookup("det2DSpace", coordinates, i)))
    return "s" + i


@register("calDistance")
def cal_distance(ctx: SchemeContext, ps: str) -> str:
    p1, p2, v1, v2 = ctx.coordinates
    ctx.record("calDistance", euclidean_distance((p1, p2), (v1, v2)))
    return _cycle(ctx, "calDistance", ("pdl1", "pdl2", "pdl3", "pdln"))


# Location-proof generation


@register("senConInformation")
def sen_con_information(ctx: SchemeContext, i: str) -> str:
    pi = ctx.prover_input
    ctx.record("senConInformation", sense_context(pi.id, pi.time, pi.loc, pi.actv))
    symbols = {"ID": "SID", "Time": "STime", "Loc": "SLoc", "Act": "SAct"}
    if i in symbols:
        return symbols[i]
    return _cycle(ctx, "senConInformation", ("SID", "STime", "SLoc", "SAct"))


@register("storeConInformation")
def store_con_information(ctx: SchemeContext, cis: str) -> str:
    pi = ctx.prover_input
    ctx.record("storeConInformation", sense_context(pi.id, pi.time, pi.loc, pi.actv))
    return _cycle(ctx, "storeConInformation", ("CI1", "CIn"))


@register("reqLocProof")
def req_loc_proof(ctx: SchemeContext, lis: str) -> str:
    pi = ctx.prover_input
    ctx.record("reqLocProof", request_location_proof(ctx.lbs, ctx.verifier_id, pi.id, pi.time))
    return _cycle(ctx, "reqLocProof", ("RLPNonEmpty", "RLPEmpty"))


@register("genLocProof")
def gen_loc_proof(ctx: SchemeContext, i: str, cis: str, lps: str) -> tuple:
    pi = ctx.prover_input
    ci = sense_context(pi.id, pi.time, pi.loc, pi.actv)
    ctx.record("genLocProof", generate_location_proof(ci, ctx.keys, ctx.dp, seed=ctx.seed))
    return (i, cis, lps)


# Location-proof verification


@register("extConInform")
def ext_con_inform(ctx: SchemeContext, i: str) -> str:
    proof = ctx.verifier_input.proof
    try:
        ctx.record("extConInform", extract_context(ctx.lbs, proof.prover_id, proof.context.time))
    except ContextNotFoundError:
        ctx.record("extConInform", None)
        return "CINotExist"
    return "CIExist"


@register("acceptLocProof")
def accept_loc_proof(ctx: SchemeContext, eci: str) -> str:
    vi = ctx.verifier_input
    ctx.record("acceptLocProof", ProofRequest(verifier_id=vi.verifier_id, prover_id=vi.proof.prover_id,
                                              time=vi.proof.context.time))
    return _cycle(ctx, "acceptLocProof", ("LPRequest1", "LPRequestn"))


@register("verConInform")
def ver_con_inform(ctx: SchemeContext, eci: str, lps: str) -> tuple:
    proof = ctx.verifier_input.proof
    try:
        stored = extract_context(ctx.lbs, proof.prover_id, proof.context.time)
        ctx.record("verConInform", verify_context(proof.context, stored, ctx.tolerance))
    except ContextNotFoundError:
        ctx.record("verConInform", False)
    return (eci, lps)


@register("verLocProof")
def ver_loc_proof(ctx: SchemeContext, vis: tuple, i: str) -> tuple:
    vi = ctx.verifier_input
    outcome = verify_location_proof(vi.proof, vi.Q, ctx.lbs, ctx.dp, ctx.tolerance)
    if not outcome.accepted:
        logger.info("Location proof of prover %d rejected: %s", vi.proof.prover_id, outcome.reason)
    ctx.record("verLocProof", outcome)
    return (vis, i)


def default_registry() -> FunctionRegistry:
    """The registry holding every built-in model function."""
    return default_functions
