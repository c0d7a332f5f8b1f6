"""
High-level Petri net execution.

Markings are immutable token bags per place; a marking also carries the
remaining budget of every source transition so that one-shot initialisation
is part of the state.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .exceptions import (
    ArcBetweenSameClassError,
    BindingStaleError,
    DuplicateIdError,
    NotEnabledError,
    RuleOutputError,
    TokenTypeError,
    UnknownNodeError,
)
from .models.net import Arc, Net, NetDefinition, PetriStructure, Place, Rule, TokenType, Transition

logger = logging.getLogger(__name__)


def token_key(value: Any) -> Tuple[str, str]:
    """Total order over heterogeneous token payloads."""
    return (type(value).__name__, repr(value))


class Marking:
    """Immutable multiset of tokens per place, plus source budgets."""

    __slots__ = ("_tokens", "_budgets", "_key")

    def __init__(
        self,
        tokens: Optional[Mapping[str, Iterable[Any]]] = None,
        budgets: Optional[Mapping[str, int]] = None,
    ):
        bags: Dict[str, Counter] = {}
        for place_id, values in (tokens or {}).items():
            bag = values.copy() if isinstance(values, Counter) else Counter(values)
            bag = Counter({v: c for v, c in bag.items() if c > 0})
            if bag:
                bags[place_id] = bag
        self._tokens = bags
        self._budgets = dict(budgets or {})
        self._key: Optional[Tuple] = None

    def count(self, place_id: str) -> int:
        bag = self._tokens.get(place_id)
        return sum(bag.values()) if bag else 0

    def multiplicity(self, place_id: str, value: Any) -> int:
        bag = self._tokens.get(place_id)
        return bag[value] if bag else 0

    def distinct(self, place_id: str) -> List[Any]:
        """Distinct token values in a place, in canonical order."""
        return sorted(self._tokens.get(place_id, {}), key=token_key)

    def tokens(self, place_id: str) -> List[Any]:
        """All tokens in a place (with repetition), in canonical order."""
        bag = self._tokens.get(place_id, Counter())
        return [v for v in self.distinct(place_id) for _ in range(bag[v])]

    def bag(self, place_id: str) -> Counter:
        return self._tokens.get(place_id, Counter()).copy()

    @property
    def places(self) -> List[str]:
        """Places holding at least one token."""
        return list(self._tokens)

    def budget(self, transition_id: str) -> int:
        return self._budgets.get(transition_id, 0)

    @property
    def budgets(self) -> Dict[str, int]:
        return dict(self._budgets)

    def counts(self, place_ids: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.count(p) for p in place_ids)

    def apply(
        self,
        removed: Mapping[str, Counter],
        added: Mapping[str, Counter],
        budgets: Optional[Mapping[str, int]] = None,
    ) -> "Marking":
        """Return a new marking with `removed` taken out and `added` put in."""
        bags = {p: bag.copy() for p, bag in self._tokens.items()}
        for place_id, bag in removed.items():
            current = bags.get(place_id, Counter())
            current.subtract(bag)
            bags[place_id] = current
        for place_id, bag in added.items():
            bags.setdefault(place_id, Counter()).update(bag)
        new_budgets = dict(self._budgets)
        if budgets:
            new_budgets.update(budgets)
        return Marking(bags, new_budgets)

    def key(self) -> Tuple:
        if self._key is None:
            places = tuple(
                (p, tuple(sorted(((token_key(v), c) for v, c in bag.items()))))
                for p, bag in sorted(self._tokens.items())
            )
            self._key = (places, tuple(sorted(self._budgets.items())))
        return self._key

    def as_dict(self) -> Dict[str, List[str]]:
        """Readable snapshot: place -> token reprs."""
        return {p: [repr(v) for v in self.tokens(p)] for p in sorted(self._tokens)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Marking({self.as_dict()}, budgets={self._budgets})"


@dataclass(frozen=True)
class Binding:
    """Tokens taken from each input place, in input-arc order."""
    items: Tuple[Tuple[str, Tuple[Any, ...]], ...] = ()

    def tokens(self, place_id: str) -> Tuple[Any, ...]:
        for pid, values in self.items:
            if pid == place_id:
                return values
        return ()

    def sort_key(self) -> Tuple:
        return tuple((pid, tuple(token_key(v) for v in values)) for pid, values in self.items)

    def consumed(self) -> Dict[str, Counter]:
        return {pid: Counter(values) for pid, values in self.items}


class Enabling(NamedTuple):
    """An enabled (transition, binding) pair."""
    transition: str
    binding: Binding


def validate_structure(structure_places: Sequence[Place], structure_transitions: Sequence[Transition],
                       arcs: Sequence[Arc]) -> None:
    """Check the bipartite and reference invariants shared by every net layer.

    Raises:
        DuplicateIdError: A node id is reused, or an arc is declared twice
        ArcBetweenSameClassError: An arc joins two places or two transitions
        UnknownNodeError: An arc names a node that does not exist
    """
    place_ids = set()
    for place in structure_places:
        if place.id in place_ids:
            raise DuplicateIdError(f"place {place.id} declared twice")
        place_ids.add(place.id)
    transition_ids = set()
    for transition in structure_transitions:
        if transition.id in transition_ids or transition.id in place_ids:
            raise DuplicateIdError(f"node id {transition.id} declared twice")
        transition_ids.add(transition.id)

    seen = set()
    for arc in arcs:
        for node in (arc.source, arc.target):
            if node not in place_ids and node not in transition_ids:
                raise UnknownNodeError(f"arc {arc.source}->{arc.target} references unknown node {node}")
        if (arc.source in place_ids) == (arc.target in place_ids):
            raise ArcBetweenSameClassError(f"arc {arc.source}->{arc.target} joins two nodes of the same class")
        if arc.kind == "inhibitor" and arc.source not in place_ids:
            raise ArcBetweenSameClassError(f"inhibitor arc {arc.source}-o{arc.target} must leave a place")
        triple = (arc.source, arc.target, arc.kind)
        if triple in seen:
            raise DuplicateIdError(f"arc {arc.source}->{arc.target} declared twice")
        seen.add(triple)

    for transition in structure_transitions:
        if not transition.is_source:
            continue
        if transition.budget is not None and transition.budget < 1:
            raise ValueError(f"source transition {transition.id} needs a budget >= 1")
        if any(a.target == transition.id and a.kind == "normal" for a in arcs):
            raise ArcBetweenSameClassError(f"source transition {transition.id} cannot have input arcs")


def _check_types(types: Mapping[str, TokenType]) -> None:
    for token_type in types.values():
        for ref in token_type.references:
            if ref not in types:
                raise UnknownNodeError(f"type {token_type.name} references undeclared type {ref}")


def check_token(net: PetriStructure, types: Mapping[str, TokenType], place_id: str, value: Any) -> None:
    """Raise TokenTypeError unless `value` conforms to the type of `place_id`."""
    type_name = net.place(place_id).type
    if type_name is None:
        return
    if not types[type_name].accepts(value, types):
        raise TokenTypeError(f"token {value!r} does not conform to {type_name} in place {place_id}",
                             place=place_id, token=value)


def build_net(definition: NetDefinition) -> Net:
    """Validate a definition and freeze it into a Net.

    Args:
        definition: Places, transitions, arcs, type map, rules and initial marking

    Returns:
        The validated Net

    Raises:
        DuplicateIdError, ArcBetweenSameClassError, UnknownNodeError, TokenTypeError
    """
    validate_structure(definition.places, definition.transitions, definition.arcs)
    _check_types(definition.types)
    for place in definition.places:
        if place.type is not None and place.type not in definition.types:
            raise UnknownNodeError(f"place {place.id} has undeclared type {place.type}")

    transition_ids = {t.id for t in definition.transitions}
    for transition_id in definition.rules:
        if transition_id not in transition_ids:
            raise UnknownNodeError(f"rule bound to unknown transition {transition_id}")

    net = Net(
        name=definition.name,
        places=list(definition.places),
        transitions=list(definition.transitions),
        arcs=list(definition.arcs),
        types=dict(definition.types),
        rules=dict(definition.rules),
        initial_marking={p: list(v) for p, v in definition.initial_marking.items()},
    )
    for place_id, values in net.initial_marking.items():
        if not net.has_place(place_id):
            raise UnknownNodeError(f"initial marking names unknown place {place_id}")
        for value in values:
            check_token(net, net.types, place_id, value)
    logger.debug("Built net %s: |P|=%d |T|=%d |F|=%d", net.name, len(net.places), len(net.transitions),
                 len(net.arcs))
    return net


def initial_marking(net: Net) -> Marking:
    """M0 with every source transition at its full budget."""
    return Marking(net.initial_marking, net.source_budgets())


def _variables(net: Net, transition_id: str, binding: Binding) -> Dict[str, Any]:
    variables: Dict[str, Any] = {}
    for arc in net.input_arcs(transition_id):
        if arc.kind != "normal":
            continue
        values = binding.tokens(arc.source)
        name = arc.label or arc.source
        variables[name] = values[0] if arc.multiplicity == 1 else values
    return variables


def _inhibited(net: Net, marking: Marking, transition_id: str) -> bool:
    return any(
        marking.count(arc.source) >= arc.multiplicity
        for arc in net.input_arcs(transition_id)
        if arc.kind == "inhibitor"
    )


def _candidate_bindings(net: Net, marking: Marking, transition_id: str) -> Iterator[Binding]:
    per_arc: List[List[Tuple[str, Tuple[Any, ...]]]] = []
    for arc in net.input_arcs(transition_id):
        if arc.kind != "normal":
            continue
        if marking.count(arc.source) < arc.multiplicity:
            return
        bag = marking.bag(arc.source)
        # sub-multisets of size `multiplicity`, drawn from the distinct values
        choices = [
            combo
            for combo in itertools.combinations_with_replacement(marking.distinct(arc.source), arc.multiplicity)
            if all(bag[v] >= c for v, c in Counter(combo).items())
        ]
        per_arc.append([(arc.source, combo) for combo in choices])
    for product in itertools.product(*per_arc):
        yield Binding(tuple(product))


def enabled_transitions(net: Net, marking: Marking) -> List[Enabling]:
    """All enabled (transition, binding) pairs, sorted lexicographically.

    A source transition is enabled while its budget remains; any other
    transition is enabled for each binding of present tokens to its input
    arcs that satisfies the rule guard, provided no inhibiting place holds
    tokens.
    """
    enabled: List[Enabling] = []
    for transition in net.transitions:
        if _inhibited(net, marking, transition.id):
            continue
        if transition.is_source:
            if marking.budget(transition.id) > 0:
                enabled.append(Enabling(transition.id, Binding()))
            continue
        if not any(a.kind == "normal" for a in net.input_arcs(transition.id)):
            # a transition without inputs that is not a source never fires
            continue
        rule = net.rules.get(transition.id)
        for binding in _candidate_bindings(net, marking, transition.id):
            if rule is not None and rule.guard is not None:
                if not rule.guard(_variables(net, transition.id, binding)):
                    continue
            enabled.append(Enabling(transition.id, binding))
    enabled.sort(key=lambda e: (e.transition, e.binding.sort_key()))
    return enabled


def _default_action(net: Net, transition_id: str, variables: Mapping[str, Any]) -> Dict[str, List[Any]]:
    values = list(variables.values())
    if not values:
        payload: Any = transition_id
    elif len(values) == 1:
        payload = values[0]
    else:
        payload = tuple(values)
    return {arc.target: [payload] * arc.multiplicity for arc in net.output_arcs(transition_id)}


def _produce(net: Net, transition_id: str, variables: Mapping[str, Any]) -> Dict[str, Counter]:
    rule = net.rules.get(transition_id)
    if rule is None:
        produced: Mapping[str, Sequence[Any]] = _default_action(net, transition_id, variables)
    else:
        produced = rule.action(variables)

    expected = {arc.target: arc.multiplicity for arc in net.output_arcs(transition_id)}
    unexpected = set(produced) - set(expected)
    if unexpected:
        raise RuleOutputError(f"{transition_id} produced tokens for non-output places {sorted(unexpected)}")
    added: Dict[str, Counter] = {}
    for place_id, multiplicity in expected.items():
        values = list(produced.get(place_id, ()))
        if len(values) != multiplicity:
            raise RuleOutputError(
                f"{transition_id} produced {len(values)} tokens for {place_id}, arc expects {multiplicity}"
            )
        for value in values:
            check_token(net, net.types, place_id, value)
        added[place_id] = Counter(values)
    return added


def fire(net: Net, marking: Marking, transition: str, binding: Binding) -> Marking:
    """Fire one enabled (transition, binding) pair.

    Args:
        net: The net
        marking: Current marking (not mutated)
        transition: Transition id
        binding: Binding previously returned by `enabled_transitions`

    Returns:
        The successor marking

    Raises:
        UnknownNodeError: The transition does not exist
        BindingStaleError: The bound tokens are no longer present
        NotEnabledError: The pair is not enabled in this marking
    """
    if not net.has_transition(transition):
        raise UnknownNodeError(f"unknown transition {transition}")
    node = net.transition(transition)

    for place_id, bag in binding.consumed().items():
        for value, count in bag.items():
            if marking.multiplicity(place_id, value) < count:
                raise BindingStaleError(f"{transition}: token {value!r} no longer in {place_id}")

    bound_places = [pid for pid, _ in binding.items]
    normal_inputs = [a for a in net.input_arcs(transition) if a.kind == "normal"]
    if bound_places != [a.source for a in normal_inputs] or any(
        len(binding.tokens(a.source)) != a.multiplicity for a in normal_inputs
    ):
        raise NotEnabledError(f"{transition}: binding does not match the input arcs")
    if _inhibited(net, marking, transition):
        raise NotEnabledError(f"{transition} is inhibited")
    if node.is_source and marking.budget(transition) <= 0:
        raise NotEnabledError(f"source {transition} has exhausted its budget")
    if not node.is_source and not normal_inputs:
        raise NotEnabledError(f"{transition} has no input arcs and is not a source")

    variables = _variables(net, transition, binding)
    rule = net.rules.get(transition)
    if rule is not None and rule.guard is not None and not rule.guard(variables):
        raise NotEnabledError(f"{transition}: guard rejects the binding")

    added = _produce(net, transition, variables)
    budgets = {transition: marking.budget(transition) - 1} if node.is_source else None
    logger.debug("Fired %s", transition)
    return marking.apply(binding.consumed(), added, budgets)


def rule(name: str, guard: Optional[Any] = None):
    """Decorator turning a function into a Rule."""
    def wrap(action) -> Rule:
        return Rule(name=name, action=action, guard=guard)
    return wrap
