"""
Execution of coloured Petri nets with a global integer clock.

Tokens in places with a timed colour set are `TimedToken`s and may only be
consumed once the clock has reached their timestamp. When nothing is enabled
the clock jumps to the earliest future timestamp.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..context import SchemeContext, build_context
from ..exceptions import (
    BindingStaleError,
    DeadlockedError,
    ExpressionTypeError,
    NotEnabledError,
    UnknownNodeError,
)
from ..hlpn import Marking, token_key
from ..models.cpn import CpnEvent, CpnModel, CpnRunResult, MonitorKind, Policy, TimedToken
from ..models.net import Arc
from .expressions import evaluate, match
from .functions import FunctionRegistry, default_registry
from .monitors import Monitor, monitor_stats, monitors_for

logger = logging.getLogger(__name__)

Functions = Mapping[str, Callable[..., Any]]


class CpnState(NamedTuple):
    """Marking plus global clock."""
    marking: Marking
    clock: int = 0


@dataclass(frozen=True)
class CpnBinding:
    """Variable values and the concrete tokens a firing consumes."""
    transition: str
    variables: Tuple[Tuple[str, Any], ...] = ()
    consumed: Tuple[Tuple[str, Tuple[Any, ...]], ...] = ()

    def env(self) -> Dict[str, Any]:
        return dict(self.variables)

    def sort_key(self) -> Tuple:
        return (
            self.transition,
            tuple((name, token_key(value)) for name, value in self.variables),
            tuple((place, tuple(token_key(t) for t in tokens)) for place, tokens in self.consumed),
        )


def _value(token: Any) -> Any:
    return token.value if isinstance(token, TimedToken) else token


def _ready(token: Any, clock: int) -> bool:
    return not isinstance(token, TimedToken) or token.timestamp <= clock


def initial_state(model: CpnModel) -> CpnState:
    """M0 at clock 0, with source budgets."""
    budgets = {t.id: (1 if t.budget is None else t.budget) for t in model.transitions if t.is_source}
    return CpnState(Marking(model.initial_marking, budgets), 0)


def _inhibited(model: CpnModel, marking: Marking, transition_id: str) -> bool:
    return any(
        marking.count(arc.source) >= arc.multiplicity
        for arc in model.input_arcs(transition_id)
        if arc.kind == "inhibitor"
    )


def _bind(
    arcs: Sequence[Arc],
    index: int,
    state: CpnState,
    env: Dict[str, Any],
    reserved: Dict[str, Counter],
    taken: List[Tuple[str, Tuple[Any, ...]]],
) -> Iterator[Tuple[Dict[str, Any], Tuple[Tuple[str, Tuple[Any, ...]], ...]]]:
    if index == len(arcs):
        yield env, tuple(taken)
        return
    arc = arcs[index]
    available = state.marking.bag(arc.source)
    available.subtract(reserved.get(arc.source, Counter()))
    by_value: Dict[Any, List[Any]] = {}
    for token, count in available.items():
        if count > 0 and _ready(token, state.clock):
            by_value.setdefault(_value(token), []).extend([token] * count)
    for value in sorted(by_value, key=token_key):
        tokens = by_value[value]
        if len(tokens) < arc.multiplicity:
            continue
        extended = match(arc.expression, value, env)
        if extended is None:
            continue
        chosen = tuple(sorted(tokens, key=lambda t: t.timestamp if isinstance(t, TimedToken) else 0)
                       [:arc.multiplicity])
        place_reserved = reserved.setdefault(arc.source, Counter())
        place_reserved.update(chosen)
        taken.append((arc.source, chosen))
        yield from _bind(arcs, index + 1, state, extended, reserved, taken)
        taken.pop()
        place_reserved.subtract(chosen)


def _guard_holds(model: CpnModel, transition_id: str, env: Mapping[str, Any], functions: Optional[Functions]) -> bool:
    guard = model.guards.get(transition_id)
    if guard is None:
        return True
    result = evaluate(guard, env, functions)
    if not isinstance(result, bool):
        raise ExpressionTypeError(f"guard of {transition_id} evaluates to {result!r}, not a boolean")
    return result


def enabled_bindings(model: CpnModel, state: CpnState, functions: Optional[Functions] = None) -> List[CpnBinding]:
    """
    Every enabled (transition, binding) pair at the state's clock, sorted.

    A binding assigns each input pattern a token value present in the place
    (with at least the arc's multiplicity of ready copies) so that the
    variables agree across arcs and the guard holds.

    Raises:
        ExpressionTypeError: A guard evaluates to something other than a boolean
    """
    enabled: List[CpnBinding] = []
    for transition in model.transitions:
        if _inhibited(model, state.marking, transition.id):
            continue
        if transition.is_source:
            if state.marking.budget(transition.id) > 0:
                enabled.append(CpnBinding(transition.id))
            continue
        inputs = [a for a in model.input_arcs(transition.id) if a.kind == "normal"]
        if not inputs:
            continue
        for env, consumed in _bind(inputs, 0, state, {}, {}, []):
            if _guard_holds(model, transition.id, env, functions):
                enabled.append(CpnBinding(transition.id, tuple(sorted(env.items())), consumed))
    enabled.sort(key=CpnBinding.sort_key)
    return enabled


def _produce(model: CpnModel, binding: CpnBinding, clock: int, functions: Optional[Functions]) -> Dict[str, Counter]:
    env = binding.env()
    added: Dict[str, Counter] = {}
    for arc in model.output_arcs(binding.transition):
        result = evaluate(arc.expression, env, functions)
        values = result if isinstance(result, list) else [result]
        colset = model.colset(arc.target)
        bag = added.setdefault(arc.target, Counter())
        for value in values:
            if not colset.accepts(value, model.colsets):
                raise ExpressionTypeError(
                    f"{arc.label} produced {value!r}, which is not in colour set {colset.name} of {arc.target}")
            token = TimedToken(value=value, timestamp=clock + arc.delay) if colset.timed else value
            bag[token] += arc.multiplicity
    return added


def fire_binding(
    model: CpnModel,
    state: CpnState,
    binding: CpnBinding,
    functions: Optional[Functions] = None,
) -> CpnState:
    """
    Fire one binding; the clock is unchanged.

    Raises:
        UnknownNodeError: The transition does not exist
        BindingStaleError: A bound token is no longer in its place
        NotEnabledError: A bound token is not ready yet, or a source has no budget left
    """
    if not model.has_transition(binding.transition):
        raise UnknownNodeError(f"unknown transition {binding.transition}")
    transition = model.transition(binding.transition)
    removed: Dict[str, Counter] = {}
    for place_id, tokens in binding.consumed:
        removed.setdefault(place_id, Counter()).update(tokens)
    for place_id, bag in removed.items():
        for token, count in bag.items():
            if state.marking.multiplicity(place_id, token) < count:
                raise BindingStaleError(f"{binding.transition}: token {token!r} no longer in {place_id}")
            if not _ready(token, state.clock):
                raise NotEnabledError(f"{binding.transition}: token {token!r} is not ready at clock {state.clock}")
    if _inhibited(model, state.marking, binding.transition):
        raise NotEnabledError(f"{binding.transition} is inhibited")
    budgets = None
    if transition.is_source:
        if state.marking.budget(transition.id) <= 0:
            raise NotEnabledError(f"source {transition.id} has exhausted its budget")
        budgets = {transition.id: state.marking.budget(transition.id) - 1}

    added = _produce(model, binding, state.clock, functions)
    logger.debug("Fired %s at clock %d", binding.transition, state.clock)
    return CpnState(state.marking.apply(removed, added, budgets), state.clock)


def next_timestamp(state: CpnState) -> Optional[int]:
    """The earliest token timestamp after the current clock, if any."""
    future = [
        token.timestamp
        for place_id in state.marking.places
        for token in state.marking.bag(place_id)
        if isinstance(token, TimedToken) and token.timestamp > state.clock
    ]
    return min(future) if future else None


def choose_binding(model: CpnModel, enabled: Sequence[CpnBinding], policy: Policy,
                   rng: np.random.Generator) -> CpnBinding:
    """Pick one binding; under `priority` untimed transitions go first."""
    if policy not in ("seeded-random", "priority"):
        raise ValueError(f"Invalid policy: {policy}. Must be one of ['seeded-random', 'priority']")
    pool = list(enabled)
    if policy == "priority":
        untimed = [b for b in pool if model.is_untimed_transition(b.transition)]
        pool = untimed or pool
    return pool[int(rng.integers(len(pool)))]


def step(
    model: CpnModel,
    state: CpnState,
    policy: Policy = "seeded-random",
    rng: Optional[np.random.Generator] = None,
    functions: Optional[Functions] = None,
) -> CpnState:
    """
    Fire one enabled binding, or advance the clock when nothing is enabled.

    Raises:
        DeadlockedError: Nothing is enabled and no token lies in the future
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    enabled = enabled_bindings(model, state, functions)
    if not enabled:
        upcoming = next_timestamp(state)
        if upcoming is None:
            raise DeadlockedError(f"{model.name} is dead at clock {state.clock}", clock=state.clock)
        logger.debug("Clock advances from %d to %d", state.clock, upcoming)
        return CpnState(state.marking, upcoming)
    return fire_binding(model, state, choose_binding(model, enabled, policy, rng), functions)


def _show(value: Any) -> str:
    return value if isinstance(value, str) else repr(value)


def snapshot(marking: Marking) -> Dict[str, List[str]]:
    """Readable marking: place -> tokens, timed ones as value@timestamp."""
    result: Dict[str, List[str]] = {}
    for place_id in sorted(marking.places):
        result[place_id] = [
            f"{_show(t.value)}@{t.timestamp}" if isinstance(t, TimedToken) else _show(t)
            for t in marking.tokens(place_id)
        ]
    return result


def run(
    model: CpnModel,
    steps: int = 50,
    seed: int = 0,
    policy: Optional[Policy] = None,
    monitors: Optional[Sequence[Monitor]] = None,
    functions: Optional[FunctionRegistry] = None,
    context: Optional[SchemeContext] = None,
    monitor_kind: Optional[MonitorKind] = None,
) -> CpnRunResult:
    """
    Run a model for up to `steps` firings.

    Args:
        model: The CPN
        steps: Firing budget; clock advances do not count
        seed: Seed of the binding choices and of the default scheme context
        policy: 'priority' or 'seeded-random'; priority for timed models by default
        monitors: Monitors to feed; they see M0 and the marking after every firing
        functions: Function registry; the built-in one when omitted
        context: Scheme context the functions record into
        monitor_kind: Attach one monitor of this kind per place when `monitors` is omitted

    Returns:
        Events, final marking and clock, monitor stats and why the run ended
    """
    policy = policy or ("priority" if model.timed else "seeded-random")
    bound = (functions or default_registry()).bind(context if context is not None else build_context(seed=seed))
    rng = np.random.default_rng(seed)
    if monitors is None:
        monitors = monitors_for(model.place_ids, monitor_kind) if monitor_kind else []
    state = initial_state(model)
    for monitor in monitors:
        monitor.observe(state.marking.count(monitor.place), state.clock)

    events: List[CpnEvent] = []
    reason = "steps-exhausted"
    while len(events) < steps:
        enabled = enabled_bindings(model, state, bound)
        if not enabled:
            upcoming = next_timestamp(state)
            if upcoming is None:
                reason = "dead"
                break
            logger.debug("Clock advances from %d to %d", state.clock, upcoming)
            state = CpnState(state.marking, upcoming)
            continue
        binding = choose_binding(model, enabled, policy, rng)
        state = fire_binding(model, state, binding, bound)
        events.append(CpnEvent(
            step=len(events) + 1,
            transition=binding.transition,
            binding={name: _show(value) for name, value in binding.variables},
            clock=state.clock,
        ))
        for monitor in monitors:
            monitor.observe(state.marking.count(monitor.place), state.clock)

    logger.info("CPN %s ran %d steps (%s) to clock %d", model.name, len(events), reason, state.clock)
    return CpnRunResult(
        model=model.name,
        events=events,
        final_marking=snapshot(state.marking),
        final_clock=state.clock,
        stats=[monitor_stats(m) for m in monitors],
        reason=reason,
    )
