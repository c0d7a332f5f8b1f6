"""Pydantic models for net structure: token types, places, transitions and arcs."""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

TokenKind = Literal["enum", "int", "real", "bytes", "text", "record", "product"]
TransitionKind = Literal["timed", "immediate", "source"]
ArcKind = Literal["normal", "inhibitor"]


class TokenType(BaseModel):
    """Token type descriptor, also used as a CPN colour set."""
    model_config = ConfigDict(frozen=True)

    name: str
    kind: TokenKind
    symbols: Tuple[str, ...] = ()
    components: Tuple[str, ...] = ()
    fields: Tuple[Tuple[str, str], ...] = ()
    timed: bool = False

    @model_validator(mode="after")
    def _check_shape(self) -> "TokenType":
        if self.kind == "enum" and not self.symbols:
            raise ValueError(f"enumerated type {self.name} needs at least one symbol")
        if self.kind == "product" and len(self.components) < 2:
            raise ValueError(f"product type {self.name} needs arity >= 2")
        if self.kind == "record" and not self.fields:
            raise ValueError(f"record type {self.name} needs at least one field")
        return self

    @property
    def references(self) -> Tuple[str, ...]:
        """Names of the types this one is built from."""
        if self.kind == "product":
            return self.components
        if self.kind == "record":
            return tuple(type_name for _, type_name in self.fields)
        return ()

    def accepts(self, value: Any, types: Mapping[str, "TokenType"]) -> bool:
        """Check whether a payload value belongs to this type.

        Args:
            value: Token payload (never a timed wrapper)
            types: Every declared type, used to resolve components

        Returns:
            True if the value conforms
        """
        if self.kind == "enum":
            return isinstance(value, str) and value in self.symbols
        if self.kind == "int":
            return isinstance(value, int) and not isinstance(value, bool)
        if self.kind == "real":
            return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
        if self.kind == "bytes":
            return isinstance(value, bytes)
        if self.kind == "text":
            return isinstance(value, str)
        if self.kind == "product":
            if not isinstance(value, tuple) or len(value) != len(self.components):
                return False
            return all(types[c].accepts(v, types) for c, v in zip(self.components, value))
        # record: a tuple in field order, or an object exposing every field
        if isinstance(value, tuple):
            if len(value) != len(self.fields):
                return False
            return all(types[t].accepts(v, types) for (_, t), v in zip(self.fields, value))
        for field_name, type_name in self.fields:
            if not hasattr(value, field_name):
                return False
            if not types[type_name].accepts(getattr(value, field_name), types):
                return False
        return True


class Place(BaseModel):
    """A state container."""
    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    type: Optional[str] = None


class Transition(BaseModel):
    """An event node."""
    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    kind: TransitionKind = "timed"
    budget: Optional[int] = Field(default=None, ge=0)

    @property
    def is_source(self) -> bool:
        return self.kind == "source"


class Arc(BaseModel):
    """Directed flow between a place and a transition."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: str
    target: str
    kind: ArcKind = "normal"
    label: str = ""
    multiplicity: int = Field(default=1, ge=1)
    expression: Any = None
    delay: int = Field(default=0, ge=0)


class PetriStructure(BaseModel):
    """Places, transitions and arcs shared by HLPN nets and CPN models."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = ""
    places: List[Place] = Field(default_factory=list)
    transitions: List[Transition] = Field(default_factory=list)
    arcs: List[Arc] = Field(default_factory=list)

    _places_by_id: Dict[str, Place] = PrivateAttr(default_factory=dict)
    _transitions_by_id: Dict[str, Transition] = PrivateAttr(default_factory=dict)
    _inputs: Dict[str, List[Arc]] = PrivateAttr(default_factory=dict)
    _outputs: Dict[str, List[Arc]] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: Any) -> None:
        self._places_by_id = {p.id: p for p in self.places}
        self._transitions_by_id = {t.id: t for t in self.transitions}
        self._inputs = {t.id: [] for t in self.transitions}
        self._outputs = {t.id: [] for t in self.transitions}
        for arc in self.arcs:
            if arc.target in self._inputs:
                self._inputs[arc.target].append(arc)
            elif arc.source in self._outputs:
                self._outputs[arc.source].append(arc)

    @property
    def place_ids(self) -> List[str]:
        return [p.id for p in self.places]

    @property
    def transition_ids(self) -> List[str]:
        return [t.id for t in self.transitions]

    def place(self, place_id: str) -> Place:
        return self._places_by_id[place_id]

    def transition(self, transition_id: str) -> Transition:
        return self._transitions_by_id[transition_id]

    def has_place(self, node_id: str) -> bool:
        return node_id in self._places_by_id

    def has_transition(self, node_id: str) -> bool:
        return node_id in self._transitions_by_id

    def input_arcs(self, transition_id: str) -> List[Arc]:
        """Normal and inhibitor arcs entering a transition, in declaration order."""
        return self._inputs[transition_id]

    def output_arcs(self, transition_id: str) -> List[Arc]:
        return self._outputs[transition_id]

    def sink_places(self) -> List[str]:
        """Places that no transition consumes from."""
        consumed = {a.source for a in self.arcs if a.kind == "normal" and a.source in self._places_by_id}
        return [p for p in self.place_ids if p not in consumed]


@dataclass(frozen=True)
class Rule:
    """A host-registered transition rule.

    `action` maps the bound variables to output tokens per output place;
    `guard`, when present, must hold for the binding to enable the transition.
    """
    name: str
    action: Callable[[Mapping[str, Any]], Mapping[str, Sequence[Any]]]
    guard: Optional[Callable[[Mapping[str, Any]], bool]] = None


class NetDefinition(BaseModel):
    """Unvalidated input for `build_net`."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = ""
    places: List[Place] = Field(default_factory=list)
    transitions: List[Transition] = Field(default_factory=list)
    arcs: List[Arc] = Field(default_factory=list)
    types: Dict[str, TokenType] = Field(default_factory=dict)
    rules: Dict[str, Rule] = Field(default_factory=dict)
    initial_marking: Dict[str, List[Any]] = Field(default_factory=dict)


class Net(PetriStructure):
    """A validated, immutable HLPN {P, T, F, phi, R, L, M0}."""

    types: Dict[str, TokenType] = Field(default_factory=dict)
    rules: Dict[str, Rule] = Field(default_factory=dict)
    initial_marking: Dict[str, List[Any]] = Field(default_factory=dict)

    def token_type(self, place_id: str) -> Optional[TokenType]:
        """The type phi(place), or None for an untyped place."""
        type_name = self.place(place_id).type
        return self.types[type_name] if type_name is not None else None

    def source_budgets(self) -> Dict[str, int]:
        """Initial firing budget of every source transition."""
        return {t.id: (1 if t.budget is None else t.budget) for t in self.transitions if t.is_source}


class ModelId(BaseModel):
    """Catalog entry naming a built-in model."""
    model_config = ConfigDict(frozen=True)

    name: str
    layer: Literal["hlpn", "cpn"]
    timing: Optional[Literal["timed", "untimed"]] = None

    @model_validator(mode="after")
    def _check_timing(self) -> "ModelId":
        if self.layer == "hlpn" and self.timing is not None:
            raise ValueError("hlpn models have no timed variant")
        if self.layer == "cpn" and self.timing is None:
            raise ValueError("cpn models need a timing")
        return self

    def __str__(self) -> str:
        parts = [self.name, self.layer]
        if self.timing:
            parts.append(self.timing)
        return "/".join(parts)
