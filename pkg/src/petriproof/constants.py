"""
Curve constants for petriproof.

Two profiles are embedded as data: a toy curve small enough to enumerate by
hand and the NIST P-256 parameters for realistic key sizes.
"""

from typing import Any, Dict, List

TOY_CURVE: Dict[str, Any] = {
    'p': 17,
    'a': 2,
    'b': 2,
    'gx': 5,
    'gy': 1,
    'n': 19,
    'h': 1,
}

P256_CURVE: Dict[str, Any] = {
    'p': 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    'a': 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    'b': 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    'gx': 0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    'gy': 0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    'n': 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    'h': 1,
}


class CurveConstants:
    """Access to the embedded curve profiles."""

    PROFILES: Dict[str, Dict[str, Any]] = {
        'toy': TOY_CURVE,
        'standard': P256_CURVE,
    }

    def profiles(self) -> List[str]:
        """Names of the available profiles."""
        return list(self.PROFILES)

    def get_profile(self, name: str) -> Dict[str, Any]:
        """
        Get the raw constants of a profile.

        Args:
            name: 'toy' or 'standard'

        Returns:
            A copy of the profile's constants

        Raises:
            ValueError: If the profile is unknown
        """
        if name not in self.PROFILES:
            raise ValueError(f"Invalid curve profile: {name}. Must be one of {self.profiles()}")
        return dict(self.PROFILES[name])


curve_constants = CurveConstants()
