"""Custom exceptions for the petriproof toolkit."""

from typing import Any, Optional


class PetriProofError(Exception):
    """Base exception for petriproof errors."""
    pass


class NetStructureError(PetriProofError):
    """Exception raised when a net definition violates a structural invariant."""
    pass


class DuplicateIdError(NetStructureError):
    """Exception raised when a node or arc identifier is declared twice."""
    pass


class ArcBetweenSameClassError(NetStructureError):
    """Exception raised for place->place or transition->transition arcs."""
    pass


class UnknownNodeError(NetStructureError):
    """Exception raised when an arc, rule or marking names a missing node."""
    pass


class TokenTypeError(NetStructureError):
    """Exception raised when a token does not conform to its place type."""

    def __init__(self, message: str, place: Optional[str] = None, token: Any = None):
        self.place = place
        self.token = token
        super().__init__(message)


class RuleOutputError(NetStructureError):
    """Exception raised when a rule produces tokens that do not match the output arcs."""
    pass


class FiringError(PetriProofError):
    """Base exception for firing failures."""
    pass


class NotEnabledError(FiringError):
    """Exception raised when firing a transition that is not enabled."""
    pass


class BindingStaleError(FiringError):
    """Exception raised when the bound tokens are no longer in the marking."""
    pass


class ModelFormatError(PetriProofError):
    """Base exception for `.pnet` model source errors."""
    pass


class PnetSyntaxError(ModelFormatError):
    """Exception raised for malformed `.pnet` source."""

    def __init__(self, line: int, col: int, expected: str, found: Optional[str] = None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found is not None else ""
        super().__init__(f"{line}:{col}: expected {expected}{detail}")


class UndeclaredColourSetError(ModelFormatError):
    """Exception raised when a colour set is used before being declared."""
    pass


class UndeclaredVariableError(ModelFormatError):
    """Exception raised when an expression names an undeclared variable."""
    pass


class UnknownFunctionError(ModelFormatError):
    """Exception raised when an expression or binding names an unregistered function."""
    pass


class TimedTokenInUntimedPlaceError(ModelFormatError):
    """Exception raised when a timestamped token is put in an untimed place."""
    pass


class ExpressionTypeError(ModelFormatError):
    """Exception raised when an expression evaluates to a value of the wrong type."""
    pass


class DeadlockedError(PetriProofError):
    """Exception raised when nothing is enabled and no future timed token exists."""

    def __init__(self, message: str, clock: int = 0):
        self.clock = clock
        super().__init__(message)


class BoundExceededError(PetriProofError):
    """Exception raised when exploration hits its state bound in strict mode."""

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)


class EmptySamplesError(PetriProofError):
    """Exception raised when a statistic is requested over no samples."""
    pass


class SchemeError(PetriProofError):
    """Base exception for signature and location-proof scheme errors."""
    pass


class PointNotOnCurveError(SchemeError):
    """Exception raised when a point does not satisfy the curve equation."""
    pass


class NonceExhaustionError(SchemeError):
    """Exception raised when signing cannot find a usable nonce."""
    pass


class EmptyBatchError(SchemeError):
    """Exception raised when batch verification receives no items."""
    pass


class InvalidCoordinateError(SchemeError):
    """Exception raised for NaN or infinite coordinates."""
    pass


class InvalidTimeError(SchemeError):
    """Exception raised for negative sensing times."""
    pass


class UnknownProverError(SchemeError):
    """Exception raised when a prover is not registered at the LBS."""
    pass


class UnknownVerifierError(SchemeError):
    """Exception raised when a verifier is not registered at the LBS."""
    pass


class ContextNotFoundError(SchemeError):
    """Exception raised when the LBS holds no record for a prover and time."""

    def __init__(self, prover_id: int, time: int):
        self.prover_id = prover_id
        self.time = time
        super().__init__(f"no context information stored for prover {prover_id} at time {time}")


class UnknownModelError(PetriProofError):
    """Exception raised for model ids outside the catalog."""
    pass


class UnknownPropertyError(PetriProofError):
    """Exception raised for property names without an SMT encoding."""
    pass


class UnknownRuleError(PetriProofError):
    """Exception raised for rule ids outside R1..R21."""
    pass


class SmtValidationError(PetriProofError):
    """Exception raised when an emitted script is not well-formed SMT-LIB2."""
    pass


class SolverError(PetriProofError):
    """Base exception for external solver failures."""

    def __init__(self, message: str, solver_path: Optional[str] = None):
        self.solver_path = solver_path
        super().__init__(message)


class SolverNotFoundError(SolverError):
    """Exception raised when the solver binary cannot be located."""
    pass


class SolverTimeoutError(SolverError):
    """Exception raised when the solver exceeds its time limit."""
    pass


class UnparseableOutputError(SolverError):
    """Exception raised when solver output holds no sat/unsat/unknown line."""
    pass
