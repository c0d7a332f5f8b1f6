"""Pydantic models for SMT-LIB2 scripts and solver verdicts."""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

Verdict = Literal["sat", "unsat", "unknown"]


class Declaration(BaseModel):
    """A `declare-fun` line: symbol, argument sorts and result sort."""
    model_config = {"frozen": True}

    name: str
    args: List[str] = Field(default_factory=list)
    sort: str = "Int"


class SmtScript(BaseModel):
    """An SMT-LIB2 script: one set-logic, declarations, assertions, one check-sat."""
    name: str = ""
    comment: str = ""
    logic: str = "QF_AUFLIA"
    declarations: List[Declaration] = Field(default_factory=list)
    assertions: List[str] = Field(default_factory=list)
    trailer: str = "(check-sat)"


class SolverVerdict(BaseModel):
    """Parsed solver answer with wall-clock time."""
    result: Verdict
    elapsed_seconds: float = Field(ge=0.0)
    raw_output: str = ""


class VerdictRow(BaseModel):
    """One row of the property verification table."""
    property: str
    execution_time: Optional[float] = None
    verdict: Optional[Verdict] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.verdict == "unsat"
