"""
Per-run scheme state shared by the built-in model rules and CPN functions.

A context fixes the curve profile, the prover's keys, the registered LBS and
the input records each workflow starts from; CPN functions also record the
concrete values behind the symbols they return.
"""

import logging
from typing import Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .models.scheme import (
    DomainParams,
    KeyPair,
    LbsStore,
    ProverInput,
    SigningInput,
    VerificationInput,
    VerifierInput,
)
from .scheme.ecdsa import generate_domain_parameters, generate_keys, select_nonce, sign, verify
from .scheme.lps import (
    encode_context,
    euclidean_distance,
    generate_location_proof,
    register_prover,
    register_verifier,
    sense_context,
    store_context,
)

logger = logging.getLogger(__name__)

Scenario = Literal["honest", "clone"]

DEFAULT_MESSAGE = b"context-aware clone detection"
DEFAULT_COORDINATES = (1.0, 2.0, 4.0, 6.0)
PROVER_ID = 7
SENSING_TIME = 100
ACTIVITY = "monitoring"
VERIFIER_IDS = (1, 2, 3)


class SchemeContext(BaseModel):
    """Scheme values a model run draws on."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    profile: str = "toy"
    seed: int = 0
    scenario: Scenario = "honest"
    dp: DomainParams
    keys: KeyPair
    foreign_keys: KeyPair
    message: bytes = DEFAULT_MESSAGE
    coordinates: Tuple[float, float, float, float] = DEFAULT_COORDINATES
    signing_input: SigningInput
    verification_input: VerificationInput
    prover_input: ProverInput
    verifier_input: VerifierInput
    lbs: LbsStore
    verifier_id: int = VERIFIER_IDS[0]
    tolerance: float = 1e-6
    values: Dict[str, List[Any]] = Field(default_factory=dict)
    counters: Dict[str, int] = Field(default_factory=dict)

    def record(self, function: str, value: Any) -> None:
        """Remember a concrete value computed behind a symbolic token."""
        self.values.setdefault(function, []).append(value)

    def next_index(self, function: str) -> int:
        """0, 1, 2, ... per function name."""
        index = self.counters.get(function, 0)
        self.counters[function] = index + 1
        return index


def _foreign_keys(dp: DomainParams, keys: KeyPair, seed: int, message: bytes) -> KeyPair:
    # a foreign key whose signatures never pass under the registered key
    for offset in range(1, 1000):
        candidate = generate_keys(dp, seed=seed + offset)
        if candidate.d == keys.d:
            continue
        forged = sign(message, candidate.d, dp, seed=seed)
        if not verify(forged, keys.Q, message, dp):
            return candidate
    raise ValueError("no foreign key found")


def build_context(profile: str = "toy", seed: int = 0, scenario: Scenario = "honest") -> SchemeContext:
    """
    Build the scheme state of one model instance.

    Args:
        profile: Curve profile, 'toy' or 'standard'
        seed: Seed for keys and nonces
        scenario: 'clone' signs the verifier's proof with a foreign key

    Returns:
        A fresh SchemeContext
    """
    dp = generate_domain_parameters(profile)
    keys = generate_keys(dp, seed=seed)

    ci = sense_context(PROVER_ID, SENSING_TIME, euclidean_distance(DEFAULT_COORDINATES[:2], DEFAULT_COORDINATES[2:]),
                       ACTIVITY)
    foreign = _foreign_keys(dp, keys, seed, encode_context(ci))

    nonce = select_nonce(DEFAULT_MESSAGE, keys.d, dp, seed=seed)
    signing_input = SigningInput(m=DEFAULT_MESSAGE, d=keys.d, k=nonce)
    verification_input = VerificationInput(
        m=DEFAULT_MESSAGE,
        signature=sign(DEFAULT_MESSAGE, keys.d, dp, nonce=nonce),
        Q=keys.Q,
    )

    lbs = LbsStore()
    lbs = register_prover(lbs, PROVER_ID, keys.Q)
    for verifier_id in VERIFIER_IDS:
        lbs = register_verifier(lbs, verifier_id)
    lbs = store_context(lbs, ci)

    signer = foreign if scenario == "clone" else keys
    proof = generate_location_proof(ci, signer, dp, seed=seed)
    logger.debug("Built %s context for profile %s with seed %d", scenario, profile, seed)
    return SchemeContext(
        profile=profile,
        seed=seed,
        scenario=scenario,
        dp=dp,
        keys=keys,
        foreign_keys=foreign,
        signing_input=signing_input,
        verification_input=verification_input,
        prover_input=ProverInput(id=ci.id, time=ci.time, loc=ci.loc, actv=ci.actv, d=keys.d),
        verifier_input=VerifierInput(proof=proof, Q=keys.Q, verifier_id=VERIFIER_IDS[0]),
        lbs=lbs,
    )
