"""Pydantic models for the coloured Petri net layer."""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .net import PetriStructure, TokenType

MonitorKind = Literal["discrete", "time"]
Policy = Literal["seeded-random", "priority"]


class TimedToken(BaseModel):
    """A colour-set value carrying a timestamp."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Any
    timestamp: int = Field(ge=0)


class CpnModel(PetriStructure):
    """A coloured Petri net {P, T, A, phi, C, F, G, L, M0}.

    Place types name colour sets; arc expressions and guards are parsed
    expression trees from `petriproof.cpn.expressions`.
    """

    timed: bool = False
    colsets: Dict[str, TokenType] = Field(default_factory=dict)
    variables: Dict[str, str] = Field(default_factory=dict)
    guards: Dict[str, Any] = Field(default_factory=dict)
    bindings: Dict[str, str] = Field(default_factory=dict)
    initial_marking: Dict[str, List[Any]] = Field(default_factory=dict)

    def colset(self, place_id: str) -> TokenType:
        """The colour set C(place)."""
        return self.colsets[self.place(place_id).type]

    def is_timed_place(self, place_id: str) -> bool:
        return self.colset(place_id).timed

    def is_untimed_transition(self, transition_id: str) -> bool:
        """True if no place around the transition has a timed colour set."""
        adjacent = [a.source for a in self.input_arcs(transition_id)]
        adjacent += [a.target for a in self.output_arcs(transition_id)]
        return not any(self.is_timed_place(p) for p in adjacent)


class CpnEvent(BaseModel):
    """One firing in a CPN run."""
    step: int
    transition: str
    binding: Dict[str, str]
    clock: int


class MonitorStats(BaseModel):
    """Marking-size statistics of one monitored place."""
    place: str
    kind: MonitorKind = "discrete"
    count: int = Field(ge=0)
    sum: float = 0.0
    average: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "MonitorStats":
        if self.count > 0 and self.min is not None and self.max is not None and self.min > self.max:
            raise ValueError("min exceeds max")
        return self

    @property
    def defined(self) -> bool:
        """False when there were no observations."""
        return self.count > 0 and self.average is not None


class CpnRunResult(BaseModel):
    """Trace, final state and monitor statistics of `run`."""
    model: str = ""
    events: List[CpnEvent]
    final_marking: Dict[str, List[str]]
    final_clock: int
    stats: List[MonitorStats] = Field(default_factory=list)
    reason: Literal["steps-exhausted", "dead"]

    def fired_transitions(self) -> List[str]:
        return sorted({e.transition for e in self.events})

    def event_clocks(self) -> List[int]:
        return [e.clock for e in self.events]

    def stat(self, place: str) -> MonitorStats:
        for entry in self.stats:
            if entry.place == place:
                return entry
        raise KeyError(place)


def stats_header() -> Tuple[str, ...]:
    return ("place", "kind", "count", "sum", "average", "min", "max")
