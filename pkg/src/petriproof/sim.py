"""
Stochastic execution and bounded exploration of HLPNs.

Every random choice draws from a numpy Generator seeded by the caller;
replication k of an experiment uses `SeedSequence(seed, spawn_key=(k,))`, so a
report depends only on the net and its SimConfig.
"""

import logging
import math
from collections import deque
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .exceptions import BoundExceededError, EmptySamplesError
from .hlpn import Binding, Marking, enabled_transitions, fire, initial_marking
from .models.net import Net
from .models.sim import ExplorationResult, PlaceSummary, SimConfig, SimReport, TraceResult

logger = logging.getLogger(__name__)


def _start_marking(net: Net, source_budget: Optional[int]) -> Marking:
    if source_budget is None:
        return initial_marking(net)
    return Marking(net.initial_marking, {t: source_budget for t in net.source_budgets()})


def run_trace(
    net: Net,
    firings: int,
    seed: int = 0,
    source_budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TraceResult:
    """
    Fire up to `firings` uniformly chosen enabled (transition, binding) pairs.

    Args:
        net: The net to execute
        firings: Maximum number of firings; 0 returns M0 and empty series
        seed: Seed for a fresh generator, ignored when `rng` is given
        source_budget: Override for every source transition's budget
        rng: Generator to draw from

    Returns:
        TraceResult with the token count of every place after each firing.
        A trace that stops before `firings` reports 'deadlock'.
    """
    if firings < 0:
        raise ValueError(f"Invalid firings: {firings}. Must be >= 0")
    rng = rng if rng is not None else np.random.default_rng(seed)
    marking = _start_marking(net, source_budget)
    series: Dict[str, List[int]] = {p: [] for p in net.place_ids}
    fired: List[str] = []
    reason = "budget-exhausted"

    for _ in range(firings):
        enabled = enabled_transitions(net, marking)
        if not enabled:
            reason = "deadlock"
            break
        choice = enabled[int(rng.integers(len(enabled)))]
        marking = fire(net, marking, choice.transition, choice.binding)
        fired.append(choice.transition)
        for place_id in net.place_ids:
            series[place_id].append(marking.count(place_id))

    logger.debug("Trace of %s: %d firings, %s", net.name, len(fired), reason)
    return TraceResult(final_marking=marking, series=series, fired=fired, terminated_reason=reason)


def confidence_interval(samples: Sequence[float], alpha: float = 0.05) -> Tuple[float, float]:
    """
    Student-t interval around the sample mean.

    Args:
        samples: Observations, at least one
        alpha: Significance level in (0, 1)

    Returns:
        (lo, hi); a single sample yields (mean, mean)

    Raises:
        EmptySamplesError: If `samples` is empty
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"Invalid alpha: {alpha}. Must be in (0, 1)")
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise EmptySamplesError("confidence interval of an empty sample")
    mean = float(values.mean())
    if values.size == 1:
        return mean, mean
    half_width = stats.t.ppf(1.0 - alpha / 2.0, values.size - 1) * values.std(ddof=1) / math.sqrt(values.size)
    half_width = float(half_width)
    return mean - half_width, mean + half_width


def _trace_mean(trace: TraceResult, net: Net, place_id: str) -> float:
    observations = trace.series[place_id]
    if not observations:
        return float(_start_marking(net, None).count(place_id))
    return float(np.mean(observations))


def replicate(net: Net, config: SimConfig) -> SimReport:
    """
    Run independent traces and aggregate per-place token averages.

    Each replication contributes the mean token count of every place over its
    trace; the report gives the mean of these across replications together
    with a Student-t confidence interval at `config.alpha`.
    """
    traces: List[TraceResult] = []
    for k in range(config.replications):
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(k,)))
        traces.append(run_trace(net, config.firings, source_budget=config.source_budget, rng=rng))

    places: List[PlaceSummary] = []
    for place_id in net.place_ids:
        samples = [_trace_mean(trace, net, place_id) for trace in traces]
        lo, hi = confidence_interval(samples, config.alpha)
        mean = float(np.mean(samples))
        places.append(PlaceSummary(name=place_id, mean=mean, ci_lo=min(lo, mean), ci_hi=max(hi, mean)))

    report = SimReport(
        model=net.name,
        config=config,
        places=places,
        trace_lengths=[trace.length for trace in traces],
        terminated_reasons=[trace.terminated_reason for trace in traces],
    )
    logger.info("Replicated %s %d times: trace lengths %s", net.name, config.replications, report.trace_lengths)
    return report


def _is_completion(net: Net, marking: Marking) -> bool:
    if any(marking.budget(t) > 0 for t in net.source_budgets()):
        return False
    sinks = set(net.sink_places())
    return all(place_id in sinks for place_id in marking.places)


def _is_starved(net: Net, marking: Marking) -> bool:
    sources = list(net.source_budgets())
    if not sources or any(marking.budget(t) > 0 for t in sources):
        return False
    refilled = Marking({p: marking.bag(p) for p in marking.places}, {t: 1 for t in sources})
    for source in sources:
        refilled = fire(net, refilled, source, Binding())
    return bool(enabled_transitions(net, refilled))


def bounded_explore(
    net: Net,
    max_states: int,
    initial: Optional[Marking] = None,
    strict: bool = False,
) -> ExplorationResult:
    """
    Breadth-first search of the reachability graph.

    Dead markings are sorted into completions (sources exhausted and every
    token in a sink place), budget-starved markings (one more firing of the
    sources would enable something) and deadlocks; only the last are reported.

    Args:
        net: The net to explore
        max_states: Maximum number of distinct markings to visit
        initial: Start marking, M0 when omitted
        strict: Raise instead of returning a truncated result

    Raises:
        BoundExceededError: Only with `strict`, carrying the partial result
    """
    if max_states < 1:
        raise ValueError(f"Invalid max_states: {max_states}. Must be >= 1")
    start = initial if initial is not None else initial_marking(net)
    seen = {start}
    queue = deque([start])
    marked = set(start.places)
    completions = 0
    starved = 0
    deadlocks: List[Dict[str, List[str]]] = []
    truncated = False

    while queue:
        marking = queue.popleft()
        enabled = enabled_transitions(net, marking)
        if not enabled:
            if _is_completion(net, marking):
                completions += 1
            elif _is_starved(net, marking):
                starved += 1
            else:
                deadlocks.append(marking.as_dict())
            continue
        for enabling in enabled:
            successor = fire(net, marking, enabling.transition, enabling.binding)
            if successor in seen:
                continue
            if len(seen) >= max_states:
                truncated = True
                break
            seen.add(successor)
            marked.update(successor.places)
            queue.append(successor)
        if truncated:
            break

    result = ExplorationResult(
        states=len(seen),
        reachable_places=[p for p in net.place_ids if p in marked],
        unreached_places=[p for p in net.place_ids if p not in marked],
        completions=completions,
        starved=starved,
        deadlocks=deadlocks,
        truncated=truncated,
    )
    if truncated:
        logger.warning("Exploration of %s stopped at %d states", net.name, max_states)
        if strict:
            raise BoundExceededError(f"{net.name}: more than {max_states} reachable markings", partial=result)
    logger.info("Explored %s: %d states, %d deadlocks", net.name, result.states, len(deadlocks))
    return result
