"""Pydantic models for simulation and exploration results."""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

TerminationReason = Literal["budget-exhausted", "deadlock"]


class SimConfig(BaseModel):
    """Replication experiment settings."""
    firings: int = Field(default=100, ge=1)
    replications: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    source_budget: Optional[int] = Field(default=None, ge=1)


class PlaceSummary(BaseModel):
    """Mean token count of one place across replications, with its confidence interval."""
    name: str
    mean: float
    ci_lo: float
    ci_hi: float

    @model_validator(mode="after")
    def _check_containment(self) -> "PlaceSummary":
        if not (self.ci_lo <= self.mean <= self.ci_hi):
            raise ValueError(f"interval ({self.ci_lo}, {self.ci_hi}) does not contain mean {self.mean}")
        return self


class SimReport(BaseModel):
    """Aggregated result of `replicate`."""
    model: str = ""
    config: SimConfig
    places: List[PlaceSummary]
    trace_lengths: List[int]
    terminated_reasons: List[TerminationReason]

    @property
    def terminated_reason(self) -> TerminationReason:
        """'deadlock' if any replication stopped early."""
        return "deadlock" if "deadlock" in self.terminated_reasons else "budget-exhausted"

    def place(self, name: str) -> PlaceSummary:
        for summary in self.places:
            if summary.name == name:
                return summary
        raise KeyError(name)


class TraceResult(BaseModel):
    """One seeded firing trace; `final_marking` is an `hlpn.Marking`."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    final_marking: Any
    series: Dict[str, List[int]]
    fired: List[str]
    terminated_reason: TerminationReason

    @property
    def length(self) -> int:
        return len(self.fired)


class ExplorationResult(BaseModel):
    """Outcome of bounded reachability exploration."""
    states: int
    reachable_places: List[str]
    unreached_places: List[str] = Field(default_factory=list)
    completions: int = 0
    starved: int = 0
    deadlocks: List[Dict[str, List[str]]] = Field(default_factory=list)
    truncated: bool = False

    @property
    def deadlock_free(self) -> bool:
        return not self.deadlocks
