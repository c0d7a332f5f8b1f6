"""
Elliptic-curve arithmetic over prime fields.

Short Weierstrass curves y^2 = x^3 + ax + b over F_p. Public functions take
and return `Point` models; the inner loops work on plain tuples. None of this
is constant-time.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from ..exceptions import PointNotOnCurveError, SchemeError
from ..models.scheme import DomainParams, Point

logger = logging.getLogger(__name__)

_Affine = Optional[Tuple[int, int]]

# Deterministic Miller-Rabin witnesses, exact below 3.3e24; probabilistic beyond.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

# Largest field that `curve_points` will enumerate.
MAX_ENUMERABLE_FIELD = 1 << 16


def is_probable_prime(value: int) -> bool:
    """Miller-Rabin primality test."""
    if value < 2:
        return False
    for small in _WITNESSES:
        if value % small == 0:
            return value == small
    d, r = value - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _WITNESSES:
        x = pow(a, d, value)
        if x in (1, value - 1):
            continue
        for _ in range(r - 1):
            x = x * x % value
            if x == value - 1:
                break
        else:
            return False
    return True


def _to_affine(point: Point) -> _Affine:
    return None if point.is_infinity else (point.x, point.y)


def _to_point(affine: _Affine) -> Point:
    return Point.infinity() if affine is None else Point(x=affine[0], y=affine[1])


def _on_curve(affine: _Affine, dp: DomainParams) -> bool:
    if affine is None:
        return True
    x, y = affine
    if not (0 <= x < dp.p and 0 <= y < dp.p):
        return False
    return (y * y - (x * x * x + dp.a * x + dp.b)) % dp.p == 0


def _add(p1: _Affine, p2: _Affine, dp: DomainParams) -> _Affine:
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    p = dp.p
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        slope = (3 * x1 * x1 + dp.a) * pow(2 * y1, -1, p) % p
    else:
        slope = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (slope * slope - x1 - x2) % p
    y3 = (slope * (x1 - x3) - y1) % p
    return (x3, y3)


def _neg(affine: _Affine, dp: DomainParams) -> _Affine:
    if affine is None:
        return None
    return (affine[0], (-affine[1]) % dp.p)


def _mult(k: int, affine: _Affine, dp: DomainParams) -> _Affine:
    if k < 0:
        return _mult(-k, _neg(affine, dp), dp)
    result: _Affine = None
    addend = affine
    while k:
        if k & 1:
            result = _add(result, addend, dp)
        addend = _add(addend, addend, dp)
        k >>= 1
    return result


def is_on_curve(point: Point, dp: DomainParams) -> bool:
    """True for the point at infinity or an affine point satisfying the curve equation."""
    return _on_curve(_to_affine(point), dp)


def point_add(p1: Point, p2: Point, dp: DomainParams) -> Point:
    """
    Add two curve points.

    Raises:
        PointNotOnCurveError: If either operand is off the curve
    """
    for operand in (p1, p2):
        if not is_on_curve(operand, dp):
            raise PointNotOnCurveError(f"({operand.x}, {operand.y}) is not on the curve")
    return _to_point(_add(_to_affine(p1), _to_affine(p2), dp))


def point_neg(point: Point, dp: DomainParams) -> Point:
    return _to_point(_neg(_to_affine(point), dp))


def scalar_mult(k: int, point: Point, dp: DomainParams) -> Point:
    """
    Compute k*point by double-and-add.

    Raises:
        PointNotOnCurveError: If the point is off the curve
    """
    if not is_on_curve(point, dp):
        raise PointNotOnCurveError(f"({point.x}, {point.y}) is not on the curve")
    return _to_point(_mult(k, _to_affine(point), dp))


def multi_scalar_mult(terms: Sequence[Tuple[int, Point]], dp: DomainParams) -> Point:
    """
    Compute sum(k_i * P_i) with one shared doubling chain (Straus interleaving).

    Args:
        terms: (scalar, point) pairs; scalars must be non-negative

    Returns:
        The sum as a Point
    """
    pairs = [(k, _to_affine(point)) for k, point in terms if k]
    if not pairs:
        return Point.infinity()
    acc: _Affine = None
    for bit in reversed(range(max(k.bit_length() for k, _ in pairs))):
        acc = _add(acc, acc, dp)
        for k, affine in pairs:
            if (k >> bit) & 1:
                acc = _add(acc, affine, dp)
    return _to_point(acc)


def curve_points(dp: DomainParams) -> List[Point]:
    """
    Enumerate every point of E(F_p), infinity first.

    Only for small fields; used as the brute-force oracle of the toy profile.

    Raises:
        ValueError: If p exceeds MAX_ENUMERABLE_FIELD
    """
    if dp.p > MAX_ENUMERABLE_FIELD:
        raise ValueError(f"field of size {dp.p} is too large to enumerate")
    squares = {}
    for y in range(dp.p):
        squares.setdefault(y * y % dp.p, []).append(y)
    points = [Point.infinity()]
    for x in range(dp.p):
        rhs = (x * x * x + dp.a * x + dp.b) % dp.p
        for y in squares.get(rhs, []):
            points.append(Point(x=x, y=y))
    return points


def validate_domain_parameters(dp: DomainParams) -> DomainParams:
    """
    Check the domain-parameter invariants.

    p and n prime, non-singular curve, base point on the curve, n*P = O, and
    h*n equal to the group order (exact for enumerable fields, Hasse bound otherwise).

    Returns:
        The same parameters

    Raises:
        SchemeError: If an invariant fails
        PointNotOnCurveError: If the base point is off the curve
    """
    if not is_probable_prime(dp.p):
        raise SchemeError(f"field modulus {dp.p} is not prime")
    if (4 * dp.a ** 3 + 27 * dp.b ** 2) % dp.p == 0:
        raise SchemeError("curve is singular: 4a^3 + 27b^2 = 0 mod p")
    if dp.base.is_infinity or not is_on_curve(dp.base, dp):
        raise PointNotOnCurveError("base point is not an affine point on the curve")
    if not is_probable_prime(dp.n):
        raise SchemeError(f"base point order {dp.n} is not prime")
    if not scalar_mult(dp.n, dp.base, dp).is_infinity:
        raise SchemeError("n*P is not the point at infinity")
    order = dp.h * dp.n
    if dp.p <= MAX_ENUMERABLE_FIELD:
        if order != len(curve_points(dp)):
            raise SchemeError(f"h*n = {order} differs from the group order {len(curve_points(dp))}")
    elif (order - (dp.p + 1)) ** 2 > 4 * dp.p:
        raise SchemeError("h*n lies outside the Hasse interval")
    logger.debug("Validated domain parameters for profile %s", dp.profile)
    return dp


def sum_points(points: Iterable[Point], dp: DomainParams) -> Point:
    acc: _Affine = None
    for point in points:
        acc = _add(acc, _to_affine(point), dp)
    return _to_point(acc)
