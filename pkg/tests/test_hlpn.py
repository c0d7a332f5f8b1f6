"""Tests for HLPN construction, enabling and firing."""

import sys
from collections import Counter

import pytest

sys.path.insert(0, 'src')
from petriproof.exceptions import (
    ArcBetweenSameClassError,
    BindingStaleError,
    DuplicateIdError,
    NotEnabledError,
    RuleOutputError,
    TokenTypeError,
    UnknownNodeError,
)
from petriproof.hlpn import Binding, Enabling, Marking, build_net, enabled_transitions, fire, initial_marking, rule
from petriproof.models.net import Arc, NetDefinition, Place, Rule, TokenType, Transition

INT = TokenType(name="int", kind="int")


@rule("start")
def emit_one(v):
    return {"A": [1]}


@rule("double")
def double(v):
    return {"B": [v["x"] * 2]}


def make_definition(rules=None, extra_arcs=(), marking=None, budget=2, multiplicity=1, places=None):
    """A source feeding A, and Double moving A to B."""
    return NetDefinition(
        name="toy",
        places=places or [
            Place(id="A", name="A", type="int"),
            Place(id="B", name="B", type="int"),
            Place(id="C", name="C"),
        ],
        transitions=[
            Transition(id="Start", name="Start", kind="source", budget=budget),
            Transition(id="Double", name="Double"),
        ],
        arcs=[
            Arc(source="Start", target="A"),
            Arc(source="A", target="Double", label="x", multiplicity=multiplicity),
            Arc(source="Double", target="B"),
            *extra_arcs,
        ],
        types={"int": INT},
        rules={"Start": emit_one, "Double": double} if rules is None else rules,
        initial_marking=marking or {},
    )


class TestStructure:
    """Validation performed by build_net."""

    def test_valid_net(self):
        """A well-formed definition builds."""
        net = build_net(make_definition())
        assert net.place_ids == ["A", "B", "C"]
        assert net.transition_ids == ["Start", "Double"]
        assert net.source_budgets() == {"Start": 2}
        assert net.sink_places() == ["B", "C"]

    def test_duplicate_place(self):
        """Two places with one id are rejected."""
        places = [Place(id="A", name="A", type="int"), Place(id="A", name="A2"), Place(id="B", name="B", type="int")]
        with pytest.raises(DuplicateIdError):
            build_net(make_definition(places=places))

    def test_place_to_place_arc(self):
        """Arcs must join a place and a transition."""
        with pytest.raises(ArcBetweenSameClassError):
            build_net(make_definition(extra_arcs=[Arc(source="A", target="B")]))

    def test_arc_to_unknown_node(self):
        """Arcs may only name declared nodes."""
        with pytest.raises(UnknownNodeError):
            build_net(make_definition(extra_arcs=[Arc(source="Double", target="Nowhere")]))

    def test_source_with_input_arc(self):
        """Source transitions take no input."""
        with pytest.raises(ArcBetweenSameClassError):
            build_net(make_definition(extra_arcs=[Arc(source="C", target="Start")]))

    def test_initial_token_type(self):
        """Initial tokens must conform to their place type."""
        with pytest.raises(TokenTypeError) as exc_info:
            build_net(make_definition(marking={"A": ["one"]}))
        assert exc_info.value.place == "A"
        assert exc_info.value.token == "one"

    def test_untyped_place_accepts_anything(self):
        """A place without a declared type takes any hashable token."""
        net = build_net(make_definition(marking={"C": ["x", 3, (1, 2)]}))
        assert initial_marking(net).count("C") == 3

    def test_rule_for_unknown_transition(self):
        """Rules must be bound to existing transitions."""
        with pytest.raises(UnknownNodeError):
            build_net(make_definition(rules={"Missing": double}))


class TestMarking:
    """Marking value semantics."""

    def test_equality_ignores_insertion_order(self):
        """Markings with the same bags and budgets are equal and hash alike."""
        m1 = Marking({"A": [1, 2], "B": [3]}, {"Start": 1})
        m2 = Marking({"B": [3], "A": [2, 1]}, {"Start": 1})
        assert m1 == m2
        assert hash(m1) == hash(m2)
        assert len({m1, m2}) == 1

    def test_budget_is_part_of_state(self):
        """Markings differing only in budgets are different states."""
        assert Marking({"A": [1]}, {"Start": 1}) != Marking({"A": [1]}, {"Start": 0})

    def test_empty_bags_dropped(self):
        """Places whose tokens are all removed disappear from `places`."""
        marking = Marking({"A": [1]}).apply({"A": Counter([1])}, {"B": Counter([2])})
        assert marking.places == ["B"]
        assert marking.count("A") == 0

    def test_as_dict(self):
        """Snapshots list token reprs per place."""
        assert Marking({"A": [1, 1]}).as_dict() == {"A": ["1", "1"]}


class TestFiring:
    """Enabling and firing on the toy net."""

    @pytest.fixture
    def net(self):
        """Source with budget 2 feeding a doubling transition."""
        return build_net(make_definition())

    def test_only_source_enabled_initially(self, net):
        """At M0 only the source can fire."""
        assert enabled_transitions(net, initial_marking(net)) == [Enabling("Start", Binding())]

    def test_source_consumes_budget(self, net):
        """Each source firing adds a token and spends one unit of budget."""
        marking = fire(net, initial_marking(net), "Start", Binding())
        assert marking.count("A") == 1
        assert marking.budget("Start") == 1

    def test_exhausted_source(self, net):
        """A source with no budget left is not enabled."""
        marking = initial_marking(net)
        for _ in range(2):
            marking = fire(net, marking, "Start", Binding())
        assert marking.count("A") == 2
        enabled = enabled_transitions(net, marking)
        assert [e.transition for e in enabled] == ["Double"]
        with pytest.raises(NotEnabledError):
            fire(net, marking, "Start", Binding())

    def test_rule_computes_output(self, net):
        """Double writes twice its input to B."""
        marking = fire(net, initial_marking(net), "Start", Binding())
        (enabling,) = [e for e in enabled_transitions(net, marking) if e.transition == "Double"]
        after = fire(net, marking, enabling.transition, enabling.binding)
        assert after.tokens("B") == [2]
        assert after.count("A") == 0

    def test_stale_binding(self, net):
        """Bindings naming absent tokens are rejected."""
        marking = fire(net, initial_marking(net), "Start", Binding())
        with pytest.raises(BindingStaleError):
            fire(net, marking, "Double", Binding((("A", (5,)),)))

    def test_unknown_transition(self, net):
        """Firing an undeclared transition fails."""
        with pytest.raises(UnknownNodeError):
            fire(net, initial_marking(net), "Nope", Binding())

    def test_enabled_order_is_lexicographic(self, net):
        """Enabled pairs come sorted by transition id."""
        marking = fire(net, initial_marking(net), "Start", Binding())
        assert [e.transition for e in enabled_transitions(net, marking)] == ["Double", "Start"]

    def test_guard(self):
        """A guard that rejects the binding disables the transition."""
        guarded = Rule(name="double", action=double.action, guard=lambda v: v["x"] > 1)
        net = build_net(make_definition(rules={"Start": emit_one, "Double": guarded}, marking={"A": [1]}))
        assert [e.transition for e in enabled_transitions(net, initial_marking(net))] == ["Start"]
        with pytest.raises(NotEnabledError):
            fire(net, initial_marking(net), "Double", Binding((("A", (1,)),)))

    def test_inhibitor_arc(self):
        """A token in an inhibiting place disables the transition."""
        net = build_net(make_definition(
            extra_arcs=[Arc(source="C", target="Double", kind="inhibitor")],
            marking={"A": [3], "C": ["stop"]},
        ))
        assert "Double" not in [e.transition for e in enabled_transitions(net, initial_marking(net))]

    def test_multiplicity_bindings(self):
        """An arc of weight 2 binds every 2-element sub-multiset."""
        pair_rule = Rule(name="pair", action=lambda v: {"B": [sum(v["x"])]})
        net = build_net(make_definition(
            rules={"Start": emit_one, "Double": pair_rule}, marking={"A": [1, 2, 3]}, multiplicity=2,
        ))
        bindings = [e.binding.tokens("A") for e in enabled_transitions(net, initial_marking(net))
                    if e.transition == "Double"]
        assert bindings == [(1, 2), (1, 3), (2, 3)]
        after = fire(net, initial_marking(net), "Double", Binding((("A", (1, 3)),)))
        assert after.tokens("A") == [2]
        assert after.tokens("B") == [4]

    def test_default_rule_forwards_payload(self):
        """Without a rule the consumed value is copied to the outputs."""
        net = build_net(make_definition(rules={"Start": emit_one}, marking={"A": [7]}))
        after = fire(net, initial_marking(net), "Double", Binding((("A", (7,)),)))
        assert after.tokens("B") == [7]

    def test_rule_output_checked(self):
        """Rules must fill exactly their output arcs with conforming tokens."""
        too_many = Rule(name="bad", action=lambda v: {"B": [1, 2]})
        wrong_place = Rule(name="bad", action=lambda v: {"C": [1], "B": [1]})
        wrong_type = Rule(name="bad", action=lambda v: {"B": ["two"]})
        binding = Binding((("A", (1,)),))
        for bad, error in ((too_many, RuleOutputError), (wrong_place, RuleOutputError), (wrong_type, TokenTypeError)):
            net = build_net(make_definition(rules={"Double": bad}, marking={"A": [1]}))
            with pytest.raises(error):
                fire(net, initial_marking(net), "Double", binding)
