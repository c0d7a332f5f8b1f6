"""
ECDSA* key generation, signing, verification and batch verification.

The signing and verification equations are the standard ECDSA ones. A
signature also carries the nonce point R = k*P so that many signatures can
be checked with one aggregated equation.
"""

import hashlib
import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..constants import curve_constants
from ..exceptions import EmptyBatchError, NonceExhaustionError, PointNotOnCurveError
from ..models.scheme import BatchItem, BatchResult, BenchmarkReport, DomainParams, KeyPair, Point, Signature
from .curve import is_on_curve, multi_scalar_mult, point_neg, scalar_mult

logger = logging.getLogger(__name__)

MAX_NONCE_ATTEMPTS = 128

# Security level of the aggregated check: accumulated false-accept probability below 2^-BATCH_SECURITY_BITS.
BATCH_SECURITY_BITS = 128
STANDARD_COEFFICIENT_BITS = 128


def generate_domain_parameters(profile: str = "toy") -> DomainParams:
    """
    Return the embedded domain parameters of a profile.

    Args:
        profile: 'toy' (y^2 = x^3 + 2x + 2 over F_17) or 'standard' (P-256)

    Returns:
        DomainParams with base point, order and co-factor

    Raises:
        ValueError: If the profile is unknown
    """
    raw = curve_constants.get_profile(profile)
    return DomainParams(
        p=raw['p'],
        a=raw['a'],
        b=raw['b'],
        base=Point(x=raw['gx'], y=raw['gy']),
        n=raw['n'],
        h=raw['h'],
        profile=profile,
    )


def random_scalar(rng: np.random.Generator, upper: int) -> int:
    """Uniform integer in [1, upper - 1] drawn from a numpy generator."""
    if upper <= 2:
        raise ValueError(f"no scalar in [1, {upper - 1}]")
    if upper < 2 ** 62:
        return int(rng.integers(1, upper))
    # 64 extra bits keep the modulo bias negligible
    nbytes = (upper.bit_length() + 7) // 8 + 8
    return int.from_bytes(rng.bytes(nbytes), "big") % (upper - 1) + 1


def hash_to_int(message: bytes, dp: DomainParams, hash_name: str = "sha256") -> int:
    """e = int(H(m)) mod n."""
    digest = hashlib.new(hash_name, message).digest()
    return int.from_bytes(digest, "big") % dp.n


def generate_keys(dp: DomainParams, seed: int = 0, d: Optional[int] = None) -> KeyPair:
    """
    Generate a key pair.

    Args:
        dp: Domain parameters
        seed: Seed of the generator that draws d
        d: Force the private scalar instead of drawing it

    Returns:
        KeyPair with Q = d*P

    Raises:
        ValueError: If a forced d is outside [1, n-1]
    """
    if d is None:
        d = random_scalar(np.random.default_rng(seed), dp.n)
    elif not 1 <= d < dp.n:
        raise ValueError(f"private key must lie in [1, {dp.n - 1}], got {d}")
    return KeyPair(d=d, Q=scalar_mult(d, dp.base, dp))


def _signature_parts(k: int, d: int, e: int, dp: DomainParams) -> Tuple[int, int, Point]:
    R = scalar_mult(k, dp.base, dp)
    r = R.x % dp.n if not R.is_infinity else 0
    s = pow(k, -1, dp.n) * (e + d * r) % dp.n if r else 0
    return r, s, R


def select_nonce(message: bytes, d: int, dp: DomainParams, seed: int = 0, hash_name: str = "sha256") -> int:
    """
    Draw a nonce for which both signature components are non-zero.

    Raises:
        NonceExhaustionError: If MAX_NONCE_ATTEMPTS candidates all fail
    """
    rng = np.random.default_rng(seed)
    e = hash_to_int(message, dp, hash_name)
    for _ in range(MAX_NONCE_ATTEMPTS):
        k = random_scalar(rng, dp.n)
        r, s, _ = _signature_parts(k, d, e, dp)
        if r and s:
            return k
    raise NonceExhaustionError(f"no usable nonce after {MAX_NONCE_ATTEMPTS} attempts")


def sign(
    message: bytes,
    d: int,
    dp: DomainParams,
    nonce: Optional[int] = None,
    seed: int = 0,
    hash_name: str = "sha256",
) -> Signature:
    """
    Sign a message.

    k = nonce (or drawn from the seeded generator), X = k*P, r = x(X) mod n,
    e = int(H(m)) mod n, s = k^-1 (e + d*r) mod n. A nonce that yields r = 0
    or s = 0 is replaced with a fresh one.

    Args:
        message: Bytes to sign
        d: Private scalar in [1, n-1]
        dp: Domain parameters
        nonce: Force the first nonce tried
        seed: Seed for nonce draws
        hash_name: hashlib algorithm name

    Returns:
        Signature (r, s) with the nonce point R

    Raises:
        ValueError: If d or a forced nonce is out of range
        NonceExhaustionError: If MAX_NONCE_ATTEMPTS nonces all fail
    """
    if not 1 <= d < dp.n:
        raise ValueError(f"private key must lie in [1, {dp.n - 1}], got {d}")
    if nonce is not None and not 1 <= nonce < dp.n:
        raise ValueError(f"nonce must lie in [1, {dp.n - 1}], got {nonce}")
    rng = np.random.default_rng(seed)
    e = hash_to_int(message, dp, hash_name)
    k = nonce if nonce is not None else random_scalar(rng, dp.n)
    for attempt in range(MAX_NONCE_ATTEMPTS):
        r, s, R = _signature_parts(k, d, e, dp)
        if r and s:
            return Signature(r=r, s=s, R=R)
        logger.warning("Nonce attempt %d gave r=%d s=%d, retrying", attempt + 1, r, s)
        k = random_scalar(rng, dp.n)
    raise NonceExhaustionError(f"no usable nonce after {MAX_NONCE_ATTEMPTS} attempts")


def verification_scalars(signature: Signature, message: bytes, dp: DomainParams,
                         hash_name: str = "sha256") -> Tuple[int, int]:
    """(u1, u2) = (e*w mod n, r*w mod n) with w = s^-1 mod n."""
    e = hash_to_int(message, dp, hash_name)
    w = pow(signature.s, -1, dp.n)
    return e * w % dp.n, signature.r * w % dp.n


def _in_range(signature: Signature, dp: DomainParams) -> bool:
    return 1 <= signature.r < dp.n and 1 <= signature.s < dp.n


def verify(signature: Signature, Q: Point, message: bytes, dp: DomainParams, hash_name: str = "sha256") -> bool:
    """
    Verify a signature.

    Args:
        signature: (r, s); R is ignored
        Q: Signer's public point
        message: Signed bytes
        dp: Domain parameters
        hash_name: hashlib algorithm name

    Returns:
        True (Accept) iff x(u1*P + u2*Q) mod n = r

    Raises:
        PointNotOnCurveError: If (r, s) is in range and Q is not on the curve
    """
    if not _in_range(signature, dp):
        return False
    if not is_on_curve(Q, dp):
        raise PointNotOnCurveError(f"public key ({Q.x}, {Q.y}) is not on the curve")
    if Q.is_infinity:
        return False
    u1, u2 = verification_scalars(signature, message, dp, hash_name)
    X = multi_scalar_mult([(u1, dp.base), (u2, Q)], dp)
    if X.is_infinity:
        return False
    return X.x % dp.n == signature.r


def _aggregatable(item: BatchItem, dp: DomainParams) -> bool:
    R = item.signature.R
    if R is None or R.is_infinity or not is_on_curve(R, dp):
        return False
    return R.x % dp.n == item.signature.r


def _coefficient_rounds(dp: DomainParams) -> Tuple[int, int]:
    """(coefficient upper bound, number of rounds) for the aggregated check."""
    if dp.n.bit_length() > STANDARD_COEFFICIENT_BITS:
        return 2 ** STANDARD_COEFFICIENT_BITS + 1, 1
    # each round misses a bad batch with probability at most 1/(n-1)
    rounds = math.ceil(BATCH_SECURITY_BITS / math.log2(dp.n - 1))
    return dp.n, rounds


def _aggregate_holds(
    items: Sequence[BatchItem],
    scalars: Sequence[Tuple[int, int]],
    dp: DomainParams,
    rng: np.random.Generator,
) -> bool:
    upper, rounds = _coefficient_rounds(dp)
    for _ in range(rounds):
        base_scalar = 0
        terms: List[Tuple[int, Point]] = []
        for item, (u1, u2) in zip(items, scalars):
            lam = random_scalar(rng, upper)
            base_scalar += lam * u1
            terms.append((lam * u2 % dp.n, item.public_key))
            terms.append((lam % dp.n, point_neg(item.signature.R, dp)))
        terms.append((base_scalar % dp.n, dp.base))
        if not multi_scalar_mult(terms, dp).is_infinity:
            return False
    return True


def batch_verify(
    items: Sequence[BatchItem],
    dp: DomainParams,
    seed: int = 0,
    hash_name: str = "sha256",
) -> BatchResult:
    """
    Verify many signatures with one aggregated equation.

    Checks sum(lambda_i * (u1_i*P + u2_i*Q_i - R_i)) = O with random lambda_i.
    When the aggregate fails, the batch is bisected until single items are
    settled by individual verification. Items without a usable R go straight
    to individual verification.

    Args:
        items: Non-empty sequence of (signature, public key, message)
        dp: Domain parameters
        seed: Seed for the random coefficients
        hash_name: hashlib algorithm name

    Returns:
        BatchResult with the sorted indices of failing items

    Raises:
        EmptyBatchError: If items is empty
        PointNotOnCurveError: If a public key is off the curve
    """
    if not items:
        raise EmptyBatchError("batch verification needs at least one item")
    rng = np.random.default_rng(seed)
    invalid: List[int] = []
    pending: List[int] = []
    for index, item in enumerate(items):
        if not is_on_curve(item.public_key, dp):
            raise PointNotOnCurveError(f"public key of item {index} is not on the curve")
        if not _in_range(item.signature, dp) or item.public_key.is_infinity:
            invalid.append(index)
        elif _aggregatable(item, dp):
            pending.append(index)
        elif not verify(item.signature, item.public_key, item.message, dp, hash_name):
            invalid.append(index)

    scalars = {i: verification_scalars(items[i].signature, items[i].message, dp, hash_name) for i in pending}

    def settle(indices: List[int]) -> None:
        if len(indices) == 1:
            only = items[indices[0]]
            if not verify(only.signature, only.public_key, only.message, dp, hash_name):
                invalid.append(indices[0])
            return
        group = [items[i] for i in indices]
        if _aggregate_holds(group, [scalars[i] for i in indices], dp, rng):
            return
        middle = len(indices) // 2
        settle(indices[:middle])
        settle(indices[middle:])

    if pending:
        settle(pending)
    invalid.sort()
    logger.info("Batch of %d signatures: %d invalid", len(items), len(invalid))
    return BatchResult(all_valid=not invalid, count=len(items), invalid=invalid)


def benchmark_verification(dp: DomainParams, count: int = 32, seed: int = 0) -> BenchmarkReport:
    """
    Time individual against batch verification of `count` honest signatures.

    The numbers are reported, never asserted.
    """
    rng = np.random.default_rng(seed)
    items = []
    for index in range(count):
        keys = generate_keys(dp, seed=int(rng.integers(0, 2 ** 32)))
        message = f"benchmark message {index}".encode()
        items.append(BatchItem(signature=sign(message, keys.d, dp, seed=index), public_key=keys.Q,
                               message=message))

    start = time.perf_counter()
    for item in items:
        verify(item.signature, item.public_key, item.message, dp)
    individual = time.perf_counter() - start

    start = time.perf_counter()
    batch_verify(items, dp, seed=seed)
    batch = time.perf_counter() - start
    return BenchmarkReport(profile=dp.profile, count=count, individual_seconds=individual, batch_seconds=batch)
