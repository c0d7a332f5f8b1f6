"""
The built-in model catalog.

Six workflows ship as `.pnet` sources under `nets/`, each as an HLPN and as
an untimed and a timed CPN. Two composite HLPNs join the ECDSA* and the
location-proof workflows on declared interface places; every other place
keeps a component prefix.
"""

import logging
from importlib import resources
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .context import Scenario, build_context
from .cpn.functions import default_registry
from .cpn.pnet import parse_model
from .exceptions import TokenTypeError, UnknownModelError, UnknownNodeError
from .hlpn import build_net
from .models.cpn import CpnModel
from .models.net import Arc, ModelId, Net, NetDefinition, Place, Rule, TokenType, Transition
from .rules import hlpn_rules

logger = logging.getLogger(__name__)

MODEL_NAMES = (
    "ecdsa-keygen",
    "ecdsa-siggen",
    "ecdsa-sigverify",
    "lps-calc-location",
    "lps-gen-proof",
    "lps-verify-proof",
)

COMPOSITES: Dict[str, Tuple[str, ...]] = {
    "ecdsa-full": ("ecdsa-keygen", "ecdsa-siggen", "ecdsa-sigverify"),
    "lps-full": ("lps-calc-location", "lps-gen-proof", "lps-verify-proof"),
}

# Places shared between components; both sides carry the same token type.
COMPOSITE_INTERFACES: Dict[str, Tuple[str, ...]] = {
    "ecdsa-full": ("HashIntegerStore",),
    "lps-full": ("LocationProofsStore",),
}

Model = Union[Net, CpnModel]


def catalog(include_composites: bool = False) -> List[ModelId]:
    """
    List the built-in models.

    Args:
        include_composites: Append the two fused HLPNs (ecdsa-full, lps-full)

    Returns:
        Every HLPN, then every untimed and timed CPN, in model order
    """
    entries = [ModelId(name=name, layer="hlpn") for name in MODEL_NAMES]
    for name in MODEL_NAMES:
        entries.append(ModelId(name=name, layer="cpn", timing="untimed"))
        entries.append(ModelId(name=name, layer="cpn", timing="timed"))
    if include_composites:
        entries.extend(ModelId(name=name, layer="hlpn") for name in COMPOSITES)
    return entries


def parse_model_id(text: str) -> ModelId:
    """
    Read `name`, `name/layer` or `name/cpn/timing`.

    A bare name selects the HLPN; `name/cpn` selects the untimed CPN.

    Raises:
        UnknownModelError: If the text names no catalog entry
    """
    parts = text.strip().split("/")
    name = parts[0]
    layer = parts[1] if len(parts) > 1 else "hlpn"
    timing: Optional[str] = parts[2] if len(parts) > 2 else ("untimed" if layer == "cpn" else None)
    if len(parts) > 3 or layer not in ("hlpn", "cpn") or timing not in (None, "timed", "untimed") \
            or (layer == "hlpn" and timing is not None):
        raise UnknownModelError(f"Invalid model id: {text}. Expected name[/hlpn] or name/cpn[/timed|untimed]")
    model_id = ModelId(name=name, layer=layer, timing=timing)
    if model_id not in catalog(include_composites=True):
        raise UnknownModelError(f"Invalid model: {text}. Must be one of {[str(m) for m in catalog(True)]}")
    return model_id


def _resource_name(model_id: ModelId) -> str:
    if model_id.layer == "hlpn":
        return f"{model_id.name}.hlpn.pnet"
    suffix = "cpn-timed" if model_id.timing == "timed" else "cpn"
    return f"{model_id.name}.{suffix}.pnet"


def model_source(model_id: ModelId) -> str:
    """
    The `.pnet` text of a built-in model.

    Raises:
        UnknownModelError: Unknown id, or a composite (composites have no source)
    """
    if model_id.name in COMPOSITES:
        raise UnknownModelError(f"{model_id} is assembled from its components and has no source")
    if model_id.name not in MODEL_NAMES:
        raise UnknownModelError(f"Invalid model: {model_id.name}. Must be one of {list(MODEL_NAMES)}")
    resource = resources.files("petriproof") / "nets" / _resource_name(model_id)
    return resource.read_text(encoding="utf-8")


def instantiate(
    model_id: ModelId,
    profile: str = "toy",
    seed: int = 0,
    scenario: Scenario = "honest",
) -> Model:
    """
    Compile a catalog entry.

    Args:
        model_id: Catalog entry
        profile: Curve profile the scheme rules compute on, 'toy' or 'standard'
        seed: Seed for keys and nonces of the scheme context
        scenario: 'clone' makes the verify-proof model carry a proof signed under a foreign key

    Returns:
        A Net for HLPN entries, a CpnModel for CPN entries

    Raises:
        UnknownModelError: If the id is not in the catalog
    """
    if model_id not in catalog(include_composites=True):
        raise UnknownModelError(f"Invalid model: {model_id}. Must be one of {[str(m) for m in catalog(True)]}")
    if model_id.layer == "cpn":
        return parse_model(model_source(model_id), functions=default_registry())
    rules = hlpn_rules(build_context(profile=profile, seed=seed, scenario=scenario))
    if model_id.name in COMPOSITES:
        return _compose(model_id.name, rules)
    return parse_model(model_source(model_id), rules=rules)


def _short(name: str) -> str:
    return name.split("-", 1)[1]


def _renamed_rule(net_rule: Rule, rename: Mapping[str, str]) -> Rule:
    def action(variables: Mapping[str, Any]) -> Dict[str, Sequence[Any]]:
        return {rename.get(place_id, place_id): tokens for place_id, tokens in net_rule.action(variables).items()}
    return Rule(name=net_rule.name, action=action, guard=net_rule.guard)


def fuse_nets(name: str, components: Sequence[Tuple[str, Net]], interfaces: Sequence[str] = ()) -> Net:
    """
    Join component nets into one HLPN.

    Every place and transition gets its component prefix (`prefix.id`)
    except the interface places, which keep their id and are shared by
    every component declaring them. Arcs keep the original place id as
    their label, so bound rules see the variables they were written for.

    Args:
        name: Name of the fused net
        components: (prefix, net) pairs
        interfaces: Place ids to fuse across components

    Returns:
        The fused Net

    Raises:
        TokenTypeError: If an interface place or a shared colour set name has different types
        UnknownNodeError: If an interface place is declared by no component
    """
    types: Dict[str, TokenType] = {}
    for _, net in components:
        for type_name, token_type in net.types.items():
            if types.setdefault(type_name, token_type) != token_type:
                raise TokenTypeError(f"{name}: colour set {type_name} differs between components")

    places: Dict[str, Place] = {}
    transitions: List[Transition] = []
    arcs: List[Arc] = []
    bound: Dict[str, Rule] = {}
    marking: Dict[str, list] = {}
    for prefix, net in components:
        rename = {p.id: p.id if p.id in interfaces else f"{prefix}.{p.id}" for p in net.places}
        for place in net.places:
            fused_id = rename[place.id]
            if fused_id in places:
                if places[fused_id].type != place.type:
                    raise TokenTypeError(
                        f"{name}: interface place {fused_id} is {places[fused_id].type} in one component "
                        f"and {place.type} in {prefix}", place=fused_id)
                continue
            label = place.name if place.id in interfaces else f"{place.name} ({prefix})"
            places[fused_id] = place.model_copy(update={"id": fused_id, "name": label})
        for transition in net.transitions:
            transitions.append(transition.model_copy(update={"id": f"{prefix}.{transition.id}"}))
        for arc in net.arcs:
            if net.has_transition(arc.source):
                update = {"source": f"{prefix}.{arc.source}", "target": rename[arc.target]}
            else:
                update = {"source": rename[arc.source], "target": f"{prefix}.{arc.target}",
                          "label": arc.label or arc.source}
            arcs.append(arc.model_copy(update=update))
        for transition_id, net_rule in net.rules.items():
            bound[f"{prefix}.{transition_id}"] = _renamed_rule(net_rule, rename)
        for place_id, tokens in net.initial_marking.items():
            marking.setdefault(rename[place_id], []).extend(tokens)

    missing = [p for p in interfaces if p not in places]
    if missing:
        raise UnknownNodeError(f"{name}: interface places {missing} are declared by no component")
    logger.debug("Fused %s from %s on %s", name, [prefix for prefix, _ in components], list(interfaces))
    return build_net(NetDefinition(
        name=name,
        places=list(places.values()),
        transitions=transitions,
        arcs=arcs,
        types=types,
        rules=bound,
        initial_marking=marking,
    ))


def _compose(name: str, rules: Dict[str, Rule]) -> Net:
    components = [
        (_short(component), parse_model(model_source(ModelId(name=component, layer="hlpn")), rules=rules))
        for component in COMPOSITES[name]
    ]
    return fuse_nets(name, components, COMPOSITE_INTERFACES[name])
