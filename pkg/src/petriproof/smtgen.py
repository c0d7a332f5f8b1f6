"""
SMT-LIB2 generation for the workflow properties.

Each property is a negated disjunction of equality groups over integer
arrays named like the rule intermediates (`|prime.field.order|`). Binding
assertions tie every term to the column of the transition whose rule
defines it, which makes every group hold and the script unsat. Without the
bindings the arrays are free and the script is sat.
"""

import logging
import re
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .exceptions import SmtValidationError, UnknownPropertyError, UnknownRuleError, UnparseableOutputError
from .models.net import ModelId
from .models.smt import Declaration, SmtScript, Verdict

logger = logging.getLogger(__name__)

ARRAY_SORT = "(Array Int Int)"
LOGIC = "QF_AUFLIA"

Index = Union[int, str]


class RuleSpec(NamedTuple):
    """Intermediate definitions of one transition rule."""
    prefix: str
    intermediates: Tuple[str, ...]
    function: Optional[str] = None


class Group(NamedTuple):
    """Terms asserted equal; all are defined by the rule of `transition`."""
    transition: str
    terms: Tuple[Tuple[str, Index], ...]


class PropertySpec(NamedTuple):
    model: str
    rules: Tuple[str, ...]
    groups: Tuple[Group, ...]


RULES: Dict[str, RuleSpec] = {
    "R1": RuleSpec("gdp", ("prime.field.order", "elliptic.curve", "base.point", "ordinal.value", "cofactor"),
                   "Generate Domain Parameters"),
    "R2": RuleSpec("gk", ("generate.private.key", "generate.public.key"), "Generate Keys"),
    "R3": RuleSpec("c", ("random.integer", "base.point"), "Compute Coordinates"),
    "R4": RuleSpec("e", ("message", "compute.hash")),
    "R5": RuleSpec("sr", ("mod.r", "mod.r"), "Generate Signature Pair 1"),
    "R6": RuleSpec("ss", ("private.key", "random.integer", "hash.integer"), "Generate Signature Pair 2"),
    "R7": RuleSpec("sig", ("signature.integer.1", "signature.integer.2"), "Get Signature Integers"),
    "R8": RuleSpec("hi", ("message",), "Compute Hash"),
    "R9": RuleSpec("cp", ("get.integer.point",), "Calculate Point"),
    "R10": RuleSpec("cc", ("integer.point.1", "integer.point.2", "coordinate.point"), "Compute Coordinates"),
    "R11": RuleSpec("ds", ("point.1", "point.1", "calculate.point.1", "point.2", "point.2", "calculate.point.2"),
                    "Verify Signatures"),
    "R12": RuleSpec("ps", ("prover.coordinate.1", "prover.coordinate.2", "verifier.coordinate.1",
                           "verifier.coordinate.2"), "Determine 2-D Point Space"),
    "R13": RuleSpec("pd", ("prover.coordinate", "verifier.coordinate"), "Calculate Location"),
    "R14": RuleSpec("cis", ("id", "time", "location", "activity"), "Sense Context Information"),
    "R15": RuleSpec("lci", ("extract.context.information", "store.context.information"),
                    "Stored Context Information"),
    "R16": RuleSpec("lps", ("extract.context.information",), "Request Location Proof"),
    "R17": RuleSpec("slp", ("location.proof", "extract.context.information", "private.key", "hash"),
                    "Generate Location Proof"),
    "R18": RuleSpec("eis", ("extract.context.information", "extract.context.information"),
                    "Extract Context Information"),
    "R19": RuleSpec("lp", ("location.proof.request",), "Accept Location Proof Request"),
    "R20": RuleSpec("vci", ("location.proof.request", "extracted.context.information"),
                    "Verify Context Information"),
    "R21": RuleSpec("arl", ("verified.information", "public.key"), "Verify Location Proof"),
}

# Single-term groups of the printed properties carry a second term at an
# index past the property's own, e.g. (mod.r 5) = (mod.r 8). The
# reduction is named mod.r since a bare mod is the integer theory operator.
PROPERTIES: Dict[str, PropertySpec] = {
    "key-generation": PropertySpec("ecdsa-keygen", ("R1", "R2"), (
        Group("GenerateDomainParameters", (("prime.field.order", 1), ("elliptic.curve", 2), ("base.point", 3),
                                           ("ordinal.value", 4), ("cofactor", 5))),
        Group("GenerateKeys", (("generate.private.key", 6), ("generate.public.key", 7))),
    )),
    "signature-generation": PropertySpec("ecdsa-siggen", ("R3", "R4", "R5", "R6"), (
        Group("ComputeCoordinates", (("random.integer", 1), ("base.point", 2))),
        Group("ComputeHash", (("message", 3), ("compute.hash", 4))),
        Group("GenerateSignaturePair1", (("mod.r", 5), ("mod.r", 8))),
        Group("GenerateSignaturePair2", (("private.key", 6), ("hash.integer", 7))),
    )),
    "signature-verification": PropertySpec("ecdsa-sigverify", ("R7", "R8", "R9", "R10", "R11"), (
        Group("GetSignatureIntegers", (("signature.integer.1", 1), ("signature.integer.2", 2))),
        Group("ComputeHash", (("message", 3), ("compute.hash", 8))),
        Group("CalculatePoint", (("get.integer.point", 4), ("calculate.point", 9))),
        Group("ComputeCoordinates", (("integer.point.1", 5), ("integer.point.2", 6), ("coordinate.point", 7))),
        Group("VerifySignatures", (("calculate.point.1", "verified"), ("calculate.point.2", "verified"))),
    )),
    "calculate-location": PropertySpec("lps-calc-location", ("R12", "R13"), (
        Group("Determine2DPointSpace", (("prover.coordinate", 1), ("prover.coordinate", 2))),
        Group("Determine2DPointSpace", (("verifier.coordinate", 3), ("verifier.coordinate", 4))),
        Group("CalculateDistance", (("prover.coordinate", 5), ("verifier.coordinate", 6))),
    )),
    "generate-location-proof": PropertySpec("lps-gen-proof", ("R14", "R15", "R16", "R17"), (
        Group("SenseContextInformation", (("id", 1), ("time", 2), ("location", 3), ("activity", 4))),
        Group("StoredContextInformation", (("extract.context.information", 5), ("store.context.information", 6))),
        Group("GenerateLocationProof", (("location.proof", 7), ("private.key", 8), ("hash", 9))),
    )),
    "verify-location-proof": PropertySpec("lps-verify-proof", ("R18", "R19", "R20", "R21"), (
        Group("ExtractContextInformation", (("extract.context.information", 1), ("extract.context.information", 2))),
        Group("AcceptLocationProofRequest", (("location.proof.request", 3), ("location.proof.request", 8))),
        Group("VerifyContextInformation", (("extracted.context.information", 4),
                                           ("extracted.context.information", 9))),
        Group("VerifyLocationProof", (("verified.information", 6), ("public.key", 7))),
        Group("VerifyLocationProof", (("verified.location.proof", "verified"), ("verified.location.proof", 10))),
    )),
}

ALIASES: Dict[str, str] = {definition.model: name for name, definition in PROPERTIES.items()}


def property_names() -> List[str]:
    return list(PROPERTIES)


def resolve_property(name: str) -> str:
    """
    Canonical property name for a property or model name.

    Raises:
        UnknownPropertyError: If neither matches
    """
    if name in PROPERTIES:
        return name
    if name in ALIASES:
        return ALIASES[name]
    raise UnknownPropertyError(f"Invalid property: {name}. Must be one of {property_names() + list(ALIASES)}")


def quote(symbol: str) -> str:
    """|symbol|, the SMT-LIB2 quoted form that admits dots and spaces."""
    if "|" in symbol or "\\" in symbol:
        raise SmtValidationError(f"symbol {symbol!r} cannot be quoted")
    return f"|{symbol}|"


def _index(index: Index) -> str:
    return str(index) if isinstance(index, int) else quote(index)


def _select(array: str, index: Index) -> str:
    return f"(select {quote(array)} {_index(index)})"


class _Builder:
    """Collects declarations in first-use order without duplicates."""

    def __init__(self):
        self.declarations: Dict[str, Declaration] = {}
        self.assertions: List[str] = []

    def declare(self, name: str, args: Sequence[str] = (), sort: str = "Int") -> None:
        declaration = Declaration(name=name, args=list(args), sort=sort)
        existing = self.declarations.get(name)
        if existing is not None and existing != declaration:
            raise SmtValidationError(f"{name} declared twice with different signatures")
        self.declarations.setdefault(name, declaration)

    def array(self, name: str) -> None:
        self.declare(name, sort=ARRAY_SORT)

    def rule(self, definition: RuleSpec) -> None:
        self.array(definition.prefix)
        for position, intermediate in enumerate(definition.intermediates, start=1):
            self.array(intermediate)
            self.assertions.append(
                f"(assert (= {_select(definition.prefix, position)} {_select(intermediate, position)}))")
        if definition.function is not None:
            arity = len(definition.intermediates)
            self.declare(definition.function, ["Int"] * arity)
            args = " ".join(_select(definition.prefix, j) for j in range(1, arity + 1))
            self.assertions.append(
                f"(assert (= {_select(definition.prefix, arity + 1)} ({quote(definition.function)} {args})))")


def _rule_spec(rule: str) -> RuleSpec:
    key = rule.strip().upper()
    if key not in RULES:
        raise UnknownRuleError(f"Invalid rule: {rule!r}. Must be one of {list(RULES)}")
    return RULES[key]


def emit_rule(rule: str) -> SmtScript:
    """
    Fragment for one transition rule, R1 to R21.

    The rule's intermediates become integer arrays; position j of the rule's
    own array equals intermediate j, and the last position equals the
    transition function applied to all of them.

    Raises:
        UnknownRuleError: If the rule name is empty or unknown
    """
    definition = _rule_spec(rule)
    builder = _Builder()
    builder.rule(definition)
    return SmtScript(
        name=rule.strip().upper(),
        comment=f"transition rule {rule.strip().upper()}",
        logic=LOGIC,
        declarations=list(builder.declarations.values()),
        assertions=builder.assertions,
    )


@lru_cache(maxsize=None)
def _columns(model: str) -> Dict[str, int]:
    from .catalog import instantiate

    net = instantiate(ModelId(name=model, layer="hlpn"))
    return {t: j for j, t in enumerate(net.transition_ids, start=1)}


def emit_property(name: str, with_bindings: bool = True) -> SmtScript:
    """
    Build the script checking one workflow property.

    Args:
        name: Property name, or the name of the model it belongs to
        with_bindings: Include the assertions binding each term to its
            defining transition's column; without them the script is sat

    Returns:
        SmtScript whose expected verdict is unsat when bound

    Raises:
        UnknownPropertyError: If the name matches no property
    """
    canonical = resolve_property(name)
    definition = PROPERTIES[canonical]
    builder = _Builder()
    for rule in definition.rules:
        builder.rule(RULES[rule])

    for group in definition.groups:
        for array, index in group.terms:
            builder.array(array)
            if isinstance(index, str):
                builder.declare(index)

    if with_bindings:
        columns = _columns(definition.model)
        seen = set()
        for group in definition.groups:
            column = columns[group.transition]
            for term in group.terms:
                if term in seen:
                    continue
                seen.add(term)
                builder.assertions.append(f"(assert (= {_select(*term)} {column}))")

    disjuncts = " ".join(
        "(= " + " ".join(_select(array, index) for array, index in group.terms) + ")" for group in definition.groups
    )
    builder.assertions.append(f"(assert (not (or {disjuncts})))")
    logger.debug("Emitted %s: %d declarations, %d assertions", canonical, len(builder.declarations),
                 len(builder.assertions))
    return SmtScript(
        name=canonical,
        logic=LOGIC,
        comment=(f"{canonical} ({definition.model}); expected unsat" if with_bindings
                 else f"{canonical} without bindings"),
        declarations=list(builder.declarations.values()),
        assertions=builder.assertions,
    )


def render_script(script: SmtScript) -> str:
    """SMT-LIB2 text of a script."""
    lines = []
    if script.comment:
        lines.append(f"; {script.comment}")
    lines.append(f"(set-logic {script.logic})")
    for declaration in script.declarations:
        lines.append(f"(declare-fun {quote(declaration.name)} ({' '.join(declaration.args)}) {declaration.sort})")
    lines.extend(script.assertions)
    lines.append(script.trailer)
    return "\n".join(lines) + "\n"


# validation

_SEXPR_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<quoted>\|[^|\\]*\|)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<atom>[^\s()|";]+)
""", re.VERBOSE)

_BUILTINS = {
    "assert", "not", "or", "and", "=>", "=", "distinct", "ite", "select", "store", "true", "false",
    "+", "-", "*", "<", "<=", ">", ">=", "div", "mod", "abs", "Int", "Bool", "Array",
}
_NUMERAL = re.compile(r"^-?\d+$")

SExpr = Union[str, list]


def _read_sexprs(text: str) -> List[SExpr]:
    stack: List[list] = [[]]
    position = 0
    while position < len(text):
        m = _SEXPR_TOKEN.match(text, position)
        if m is None:
            raise SmtValidationError(f"unreadable input at offset {position}")
        position = m.end()
        kind = m.lastgroup
        if kind in ("space", "comment"):
            continue
        if kind == "open":
            stack.append([])
        elif kind == "close":
            if len(stack) == 1:
                raise SmtValidationError(f"unbalanced ')' at offset {m.start()}")
            done = stack.pop()
            stack[-1].append(done)
        elif kind == "quoted":
            stack[-1].append(m.group()[1:-1])
        else:
            stack[-1].append(m.group())
    if len(stack) != 1:
        raise SmtValidationError(f"{len(stack) - 1} unclosed '('")
    return stack[0]


def _symbols(expr: SExpr) -> List[str]:
    if isinstance(expr, str):
        return [expr]
    found: List[str] = []
    for item in expr:
        found.extend(_symbols(item))
    return found


def validate_script(text: str) -> None:
    """
    Lightweight well-formedness check run before any solver call.

    Checks balanced parentheses, exactly one set-logic and one check-sat, and
    that every symbol an assertion uses is declared before it.

    Raises:
        SmtValidationError: Describing the first problem found
    """
    commands = _read_sexprs(text)
    declared = set()
    logic_count = 0
    check_count = 0
    for command in commands:
        if not isinstance(command, list) or not command or not isinstance(command[0], str):
            raise SmtValidationError(f"expected a command, found {command!r}")
        head = command[0]
        if head == "set-logic":
            logic_count += 1
        elif head == "check-sat":
            check_count += 1
        elif head in ("declare-fun", "declare-const"):
            if len(command) < 2 or not isinstance(command[1], str):
                raise SmtValidationError(f"malformed {head}")
            declared.add(command[1])
        elif head == "assert":
            for symbol in _symbols(command[1:]):
                if symbol in _BUILTINS or _NUMERAL.match(symbol) or symbol in declared:
                    continue
                raise SmtValidationError(f"{symbol} used before it is declared")
    if logic_count != 1:
        raise SmtValidationError(f"expected exactly one set-logic, found {logic_count}")
    if check_count != 1:
        raise SmtValidationError(f"expected exactly one check-sat, found {check_count}")


_VERDICT = re.compile(r"^\s*(sat|unsat|unknown)\s*$", re.MULTILINE)


def parse_verdict(output: str) -> Verdict:
    """
    First sat, unsat or unknown line of solver output; banner lines are skipped.

    Raises:
        UnparseableOutputError: If no verdict line is present
    """
    m = _VERDICT.search(output)
    if m is None:
        raise UnparseableOutputError(f"no verdict in solver output: {output.strip()[:200]!r}")
    return m.group(1)
