"""Pydantic models for the signature scheme and the location-proof system."""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Point(BaseModel):
    """Affine curve point, or the point at infinity when both coordinates are None."""
    model_config = ConfigDict(frozen=True)

    x: Optional[int] = None
    y: Optional[int] = None

    @model_validator(mode="after")
    def _check_coordinates(self) -> "Point":
        if (self.x is None) != (self.y is None):
            raise ValueError("a point needs both coordinates or neither")
        return self

    @classmethod
    def infinity(cls) -> "Point":
        return cls()

    @property
    def is_infinity(self) -> bool:
        return self.x is None


class DomainParams(BaseModel):
    """Elliptic-curve domain parameters {p, E, P, n, h}."""
    model_config = ConfigDict(frozen=True)

    p: int
    a: int
    b: int
    base: Point
    n: int
    h: int
    profile: str = "custom"


class KeyPair(BaseModel):
    """Private scalar d and public point Q = d*P."""
    model_config = ConfigDict(frozen=True)

    d: int
    Q: Point


class Signature(BaseModel):
    """Signature pair (r, s); `R` is the full nonce point kept for batch verification."""
    model_config = ConfigDict(frozen=True)

    r: int
    s: int
    R: Optional[Point] = None


class BatchItem(BaseModel):
    """One (signature, public key, message) entry of a verification batch."""
    model_config = ConfigDict(frozen=True)

    signature: Signature
    public_key: Point
    message: bytes


class BatchResult(BaseModel):
    """Outcome of batch verification."""
    all_valid: bool
    count: int
    invalid: List[int] = Field(default_factory=list)


class ContextInfo(BaseModel):
    """Context information {ID, T, Loc, Actv} sensed by a device."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=-2**63, lt=2**63)
    time: int = Field(ge=0, lt=2**63)
    loc: float = Field(allow_inf_nan=False)
    actv: str


class PointPlacement(BaseModel):
    """Prover and verifier coordinates in the 2-D point space."""
    model_config = ConfigDict(frozen=True)

    p1: float
    p2: float
    v1: float
    v2: float

    @property
    def prover(self) -> Tuple[float, float]:
        return (self.p1, self.p2)

    @property
    def verifier(self) -> Tuple[float, float]:
        return (self.v1, self.v2)


class ProofRequest(BaseModel):
    """A verifier's request that a prover proves its context at one epoch."""
    model_config = ConfigDict(frozen=True)

    verifier_id: int
    prover_id: int
    time: int


class LocationProof(BaseModel):
    """Context information signed with the prover's private key."""
    model_config = ConfigDict(frozen=True)

    context: ContextInfo
    signature: Signature
    prover_id: int


class LbsStore(BaseModel):
    """Location-based service registry, updated value-in/value-out."""
    model_config = ConfigDict(frozen=True)

    records: Tuple[ContextInfo, ...] = ()
    verifiers: Tuple[int, ...] = ()
    public_keys: Dict[int, Point] = Field(default_factory=dict)
    compromised: Tuple[int, ...] = ()


class VerifyOutcome(BaseModel):
    """Accept, or Reject with the stage that failed."""
    accepted: bool
    reason: Optional[Literal["context-not-found", "context-mismatch", "signature"]] = None

    @classmethod
    def accept(cls) -> "VerifyOutcome":
        return cls(accepted=True)

    @classmethod
    def reject(cls, reason: Literal["context-not-found", "context-mismatch", "signature"]) -> "VerifyOutcome":
        return cls(accepted=False, reason=reason)


class CloneReport(BaseModel):
    """Result of checking many location proofs at once."""
    outcomes: List[VerifyOutcome]
    compromised: List[int] = Field(default_factory=list)
    lbs: LbsStore


# Input records flowing through the built-in HLPN models


class SigningInput(BaseModel):
    """Signing input m x d x H x k."""
    model_config = ConfigDict(frozen=True)

    m: bytes
    d: int
    hash_name: str = "sha256"
    k: int


class VerificationInput(BaseModel):
    """Verification input r x s x Q together with the signed message."""
    model_config = ConfigDict(frozen=True)

    m: bytes
    signature: Signature
    Q: Point
    hash_name: str = "sha256"


class ProverInput(BaseModel):
    """Prover input ID x T x Loc x Actv x K_Pr x H."""
    model_config = ConfigDict(frozen=True)

    id: int
    time: int
    loc: float
    actv: str
    d: int
    hash_name: str = "sha256"


class VerifierInput(BaseModel):
    """Verifier input P_sign x K_Pb x V."""
    model_config = ConfigDict(frozen=True)

    proof: LocationProof
    Q: Point
    verifier_id: int


class VerifiedContext(BaseModel):
    """Extracted LBS context joined with the accepted proof request."""
    model_config = ConfigDict(frozen=True)

    context: ContextInfo
    request: ProofRequest


class BenchmarkReport(BaseModel):
    """Wall-clock comparison of individual and batch verification."""
    profile: str
    count: int
    individual_seconds: float = Field(ge=0.0)
    batch_seconds: float = Field(ge=0.0)

    @property
    def speedup(self) -> float:
        """Individual time over batch time; 0 when the batch took no measurable time."""
        return self.individual_seconds / self.batch_seconds if self.batch_seconds > 0 else 0.0
