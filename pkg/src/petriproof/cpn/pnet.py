"""
Reader and writer for the line-oriented `.pnet` model format.

One statement per line; `#` starts a comment:

    net "ecdsa-keygen" kind cpn timed
    colset IN = enum { p E P n h } timed
    var i : IN
    place Inputs "Inputs" : IN init 1'p@+1 ++ 1'E@+3
    trans GenerateDomainParameters "Generate Domain Parameters"
    arc Inputs -> GenerateDomainParameters : i
    arc GenerateDomainParameters -> DomainParametersStore : genDomParms(i)
    bind GenerateDomainParameters = genDomParms

`kind hlpn` files use the same statements; their arc inscriptions are plain
labels naming rule variables and `bind` names a host rule.
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Set, Tuple, Union

from ..exceptions import (
    DuplicateIdError,
    PnetSyntaxError,
    TimedTokenInUntimedPlaceError,
    TokenTypeError,
    UndeclaredColourSetError,
    UndeclaredVariableError,
    UnknownFunctionError,
)
from ..hlpn import build_net, validate_structure
from ..models.cpn import CpnModel, TimedToken
from ..models.net import Arc, Net, NetDefinition, Place, Rule, TokenType, Transition
from .expressions import BinOp, Call, Const, Expr, Not, TupleExpr, Var, free_variables, is_pattern, render
from .functions import FunctionRegistry, default_registry

logger = logging.getLogger(__name__)

Model = Union[Net, CpnModel]

BUILTIN_TYPES = ("int", "real", "bytes", "text")
TRANSITION_KINDS = ("timed", "immediate", "source")

_TOKEN = re.compile(r"""
    (?P<space>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<real>-?\d+(?:\.\d+)?[eE][-+]?\d+|-?\d+\.\d+)
  | (?P<int>-?\d+)
  | (?P<op>->|-o(?![A-Za-z0-9_])|<>|\+\+|@\+|[{}(),:=*'|])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    """
    Split `.pnet` source into tokens; comments and blanks are dropped.

    Raises:
        PnetSyntaxError: On a character that starts no token
    """
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise PnetSyntaxError(line, col, "token", text[pos])
        kind = m.lastgroup
        if kind == "newline":
            tokens.append(Token("newline", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


class _PendingArc(NamedTuple):
    arc: Arc
    line: int
    col: int


class _Parser:
    def __init__(self, text: str, functions: FunctionRegistry, rules: Optional[Mapping[str, Rule]]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.functions = functions
        self.rules = rules
        self.name = ""
        self.layer = "hlpn"
        self.timed = False
        self.types: Dict[str, TokenType] = {name: TokenType(name=name, kind=name) for name in BUILTIN_TYPES}
        self.symbols: Set[str] = set()
        self.variables: Dict[str, str] = {}
        self.places: List[Place] = []
        self.marking: Dict[str, List[Any]] = {}
        self.transitions: List[Transition] = []
        self.guards: Dict[str, Expr] = {}
        self.guard_tokens: Dict[str, Token] = {}
        self.arcs: List[_PendingArc] = []
        self.bindings: Dict[str, str] = {}

    # token helpers

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def error(self, expected: str, tok: Optional[Token] = None) -> PnetSyntaxError:
        tok = tok or self.peek()
        found = {"eof": "end of file", "newline": "end of line"}.get(tok.kind, tok.text)
        return PnetSyntaxError(tok.line, tok.col, expected, found)

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text in words

    def at_line_end(self) -> bool:
        return self.peek().kind in ("newline", "eof")

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise self.error(f"'{op}'")
        return self.advance()

    def expect_word(self, *words: str) -> Token:
        if not self.at_word(*words):
            raise self.error(" or ".join(words))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.peek().kind != "ident":
            raise self.error(what)
        return self.advance()

    def expect_int(self) -> int:
        if self.peek().kind != "int":
            raise self.error("integer")
        return int(self.advance().text)

    def end_statement(self) -> None:
        if not self.at_line_end():
            raise self.error("end of line")
        while self.peek().kind == "newline":
            self.advance()

    def optional_display_name(self, default: str) -> str:
        if self.peek().kind == "string":
            return _unquote(self.advance().text)
        return default

    # statements

    def parse(self) -> Model:
        while self.peek().kind == "newline":
            self.advance()
        self.header()
        handlers = {
            "colset": self.colset,
            "var": self.var,
            "place": self.place,
            "trans": self.trans,
            "arc": self.arc,
            "bind": self.bind,
        }
        while self.peek().kind != "eof":
            tok = self.peek()
            handler = handlers.get(tok.text) if tok.kind == "ident" else None
            if handler is None:
                raise self.error("colset, var, place, trans, arc or bind")
            self.advance()
            handler()
            self.end_statement()
        return self.build()

    def header(self) -> None:
        self.expect_word("net")
        if self.peek().kind != "string":
            raise self.error("quoted net name")
        self.name = _unquote(self.advance().text)
        self.expect_word("kind")
        self.layer = self.expect_word("hlpn", "cpn").text
        if self.at_word("timed"):
            self.advance()
            self.timed = True
        self.end_statement()

    def type_ref(self) -> str:
        tok = self.expect_ident("colour set name")
        if tok.text not in self.types:
            raise UndeclaredColourSetError(f"{tok.line}:{tok.col}: colour set {tok.text} is not declared")
        return tok.text

    def colset(self) -> None:
        name_tok = self.expect_ident("colour set name")
        if name_tok.text in self.types:
            raise DuplicateIdError(f"{name_tok.line}:{name_tok.col}: colour set {name_tok.text} declared twice")
        self.expect_op("=")
        name = name_tok.text
        if self.at_word("enum"):
            self.advance()
            self.expect_op("{")
            symbols: List[str] = []
            while not self.at_op("}"):
                if self.at_op(",", "|"):
                    self.advance()
                    continue
                symbols.append(self.expect_ident("symbol").text)
            self.advance()
            if not symbols:
                raise self.error("at least one symbol")
            definition: Dict[str, Any] = {"kind": "enum", "symbols": tuple(symbols)}
            self.symbols.update(symbols)
        elif self.at_word("product"):
            self.advance()
            components = [self.type_ref()]
            while self.at_op("*"):
                self.advance()
                components.append(self.type_ref())
            if len(components) < 2:
                raise self.error("'*'")
            definition = {"kind": "product", "components": tuple(components)}
        elif self.at_word("record"):
            self.advance()
            self.expect_op("{")
            fields: List[Tuple[str, str]] = []
            while not self.at_op("}"):
                if self.at_op(","):
                    self.advance()
                    continue
                field = self.expect_ident("field name").text
                self.expect_op(":")
                fields.append((field, self.type_ref()))
            self.advance()
            if not fields:
                raise self.error("at least one field")
            definition = {"kind": "record", "fields": tuple(fields)}
        elif self.at_word(*BUILTIN_TYPES):
            definition = {"kind": self.advance().text}
        else:
            raise self.error("enum, product, record, int, real, bytes or text")
        timed = False
        if self.at_word("timed"):
            self.advance()
            timed = True
        self.types[name] = TokenType(name=name, timed=timed, **definition)

    def var(self) -> None:
        names = [self.expect_ident("variable name").text]
        while self.at_op(","):
            self.advance()
            names.append(self.expect_ident("variable name").text)
        self.expect_op(":")
        type_name = self.type_ref()
        for name in names:
            self.variables[name] = type_name

    def place(self) -> None:
        place_id = self.expect_ident("place id").text
        display = self.optional_display_name(place_id)
        type_name: Optional[str] = None
        if self.at_op(":"):
            self.advance()
            type_name = self.type_ref()
        elif self.layer == "cpn":
            raise self.error("':' and a colour set")
        self.places.append(Place(id=place_id, name=display, type=type_name))
        if self.at_word("init"):
            self.advance()
            self.marking[place_id] = self.multiset(place_id, type_name)

    def multiset(self, place_id: str, type_name: Optional[str]) -> List[Any]:
        tokens: List[Any] = []
        while True:
            count = 1
            if self.peek().kind == "int" and self.peek(1).kind == "op" and self.peek(1).text == "'":
                count = self.expect_int()
                self.advance()
            start = self.peek()
            value = self.constant(self.expression(allow_variables=False), start)
            timed = type_name is not None and self.types[type_name].timed
            if self.at_op("@+"):
                at = self.advance()
                if not timed:
                    raise TimedTokenInUntimedPlaceError(
                        f"{at.line}:{at.col}: timed token in place {place_id}, whose colour set is untimed")
                tokens.extend([TimedToken(value=value, timestamp=self.expect_int())] * count)
            elif timed:
                tokens.extend([TimedToken(value=value, timestamp=0)] * count)
            else:
                tokens.extend([value] * count)
            if not self.at_op("++"):
                return tokens
            self.advance()

    def constant(self, expr: Expr, tok: Token) -> Any:
        if isinstance(expr, Const):
            return expr.value
        if isinstance(expr, TupleExpr):
            return tuple(self.constant(item, tok) for item in expr.items)
        raise self.error("constant token value", tok)

    def trans(self) -> None:
        transition_id = self.expect_ident("transition id").text
        display = self.optional_display_name(transition_id)
        kind, budget = "timed", None
        while not self.at_line_end():
            if self.at_word("guard") and self.layer == "cpn":
                self.advance()
                self.guard_tokens[transition_id] = self.peek()
                self.guards[transition_id] = self.expression()
            elif self.at_word("kind"):
                self.advance()
                kind = self.expect_word(*TRANSITION_KINDS).text
            elif self.at_word("budget"):
                self.advance()
                budget = self.expect_int()
            else:
                raise self.error("guard, kind or budget" if self.layer == "cpn" else "kind or budget")
        self.transitions.append(Transition(id=transition_id, name=display, kind=kind, budget=budget))

    def arc(self) -> None:
        start = self.peek()
        source = self.expect_ident("node id").text
        if self.at_op("-o"):
            self.advance()
            target = self.expect_ident("node id").text
            weight = 1
            if self.at_op(":"):
                self.advance()
                weight = self.expect_int()
            arc = Arc(source=source, target=target, kind="inhibitor", multiplicity=weight)
            self.arcs.append(_PendingArc(arc, start.line, start.col))
            return
        self.expect_op("->")
        target = self.expect_ident("node id").text
        fields: Dict[str, Any] = {"source": source, "target": target}
        if self.at_op(":"):
            self.advance()
            fields.update(self.inscription())
        elif self.layer == "cpn":
            raise self.error("':' and an arc expression")
        self.arcs.append(_PendingArc(Arc(**fields), start.line, start.col))

    def inscription(self) -> Dict[str, Any]:
        multiplicity = 1
        if self.peek().kind == "int" and (self.layer == "hlpn" or self.peek(1).text == "'"):
            multiplicity = self.expect_int()
            if multiplicity < 1:
                raise self.error("multiplicity >= 1", self.peek(-1))
            if not self.at_op("'"):
                return {"multiplicity": multiplicity}
            self.advance()
        if self.layer == "hlpn":
            return {"multiplicity": multiplicity, "label": self.expect_ident("arc label").text}
        expr = self.expression()
        delay = 0
        if self.at_op("@+"):
            self.advance()
            delay = self.expect_int()
        return {"multiplicity": multiplicity, "expression": expr, "label": render(expr), "delay": delay}

    def bind(self) -> None:
        transition_id = self.expect_ident("transition id").text
        self.expect_op("=")
        tok = self.expect_ident("function name")
        if self.layer == "cpn" and tok.text not in self.functions:
            raise UnknownFunctionError(f"{tok.line}:{tok.col}: function {tok.text} is not registered")
        if self.layer == "hlpn" and self.rules is not None and tok.text not in self.rules:
            raise UnknownFunctionError(f"{tok.line}:{tok.col}: rule {tok.text} is not registered")
        self.bindings[transition_id] = tok.text

    # expressions

    def expression(self, allow_variables: bool = True) -> Expr:
        left = self.conjunction(allow_variables)
        while self.at_word("or", "orelse"):
            self.advance()
            left = BinOp("or", left, self.conjunction(allow_variables))
        return left

    def conjunction(self, allow_variables: bool) -> Expr:
        left = self.negation(allow_variables)
        while self.at_word("and", "andalso"):
            self.advance()
            left = BinOp("and", left, self.negation(allow_variables))
        return left

    def negation(self, allow_variables: bool) -> Expr:
        if self.at_word("not"):
            self.advance()
            return Not(self.negation(allow_variables))
        left = self.primary(allow_variables)
        if self.at_op("=", "<>"):
            op = self.advance().text
            return BinOp(op, left, self.primary(allow_variables))
        return left

    def primary(self, allow_variables: bool) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return Const(int(tok.text))
        if tok.kind == "real":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "string":
            self.advance()
            return Const(_unquote(tok.text))
        if self.at_op("("):
            self.advance()
            items = [self.expression(allow_variables)]
            while self.at_op(","):
                self.advance()
                items.append(self.expression(allow_variables))
            self.expect_op(")")
            return items[0] if len(items) == 1 else TupleExpr(tuple(items))
        if tok.kind != "ident":
            raise self.error("expression")
        self.advance()
        if tok.text in ("true", "false"):
            return Const(tok.text == "true")
        if self.at_op("("):
            if tok.text not in self.functions:
                raise UnknownFunctionError(f"{tok.line}:{tok.col}: function {tok.text} is not registered")
            self.advance()
            args: List[Expr] = []
            while not self.at_op(")"):
                if args:
                    self.expect_op(",")
                args.append(self.expression(allow_variables))
            self.advance()
            return Call(tok.text, tuple(args))
        if allow_variables and tok.text in self.variables:
            return Var(tok.text)
        if tok.text in self.symbols:
            return Const(tok.text, symbol=True)
        raise UndeclaredVariableError(f"{tok.line}:{tok.col}: {tok.text} is neither a declared variable nor a symbol")

    # assembly

    def build(self) -> Model:
        arcs = [pending.arc for pending in self.arcs]
        validate_structure(self.places, self.transitions, arcs)
        transition_ids = {t.id for t in self.transitions}
        for transition_id in self.bindings:
            if transition_id not in transition_ids:
                raise UnknownFunctionError(f"bind names unknown transition {transition_id}")
        if self.layer == "hlpn":
            return self.build_net(arcs)
        return self.build_cpn(arcs)

    def build_net(self, arcs: List[Arc]) -> Net:
        rules = self.rules
        if rules is None and self.bindings:
            from ..rules import hlpn_rules

            rules = hlpn_rules()
        bound: Dict[str, Rule] = {}
        for transition_id, rule_name in self.bindings.items():
            if rule_name not in rules:
                raise UnknownFunctionError(f"rule {rule_name} is not registered")
            bound[transition_id] = rules[rule_name]
        definition = NetDefinition(
            name=self.name,
            places=self.places,
            transitions=self.transitions,
            arcs=arcs,
            types=self.types,
            rules=bound,
            initial_marking=self.marking,
        )
        return build_net(definition)

    def build_cpn(self, arcs: List[Arc]) -> CpnModel:
        place_ids = {p.id for p in self.places}
        types = {p.id: self.types[p.type] for p in self.places}
        bound_by: Dict[str, Set[str]] = {t.id: set() for t in self.transitions}
        for pending in self.arcs:
            arc = pending.arc
            if arc.kind != "normal" or arc.source not in place_ids:
                continue
            if arc.delay:
                raise PnetSyntaxError(pending.line, pending.col, "no delay on an input arc", "@+")
            if not is_pattern(arc.expression):
                raise PnetSyntaxError(pending.line, pending.col, "input pattern", arc.label)
            bound_by[arc.target] |= free_variables(arc.expression)
        for pending in self.arcs:
            arc = pending.arc
            if arc.kind != "normal" or arc.target not in place_ids:
                continue
            if arc.delay and not types[arc.target].timed:
                raise TimedTokenInUntimedPlaceError(
                    f"{pending.line}:{pending.col}: delay on an arc into untimed place {arc.target}")
            self._check_bound(arc.source, arc.expression, bound_by[arc.source], pending.line, pending.col)
        for transition_id, guard in self.guards.items():
            tok = self.guard_tokens[transition_id]
            self._check_bound(transition_id, guard, bound_by[transition_id], tok.line, tok.col)

        for place_id, tokens in self.marking.items():
            colset = types[place_id]
            for token in tokens:
                value = token.value if isinstance(token, TimedToken) else token
                if not colset.accepts(value, self.types):
                    raise TokenTypeError(f"token {value!r} does not conform to {colset.name} in place {place_id}",
                                         place=place_id, token=value)
        model = CpnModel(
            name=self.name,
            places=self.places,
            transitions=self.transitions,
            arcs=arcs,
            timed=self.timed,
            colsets=self.types,
            variables=self.variables,
            guards=self.guards,
            bindings=self.bindings,
            initial_marking=self.marking,
        )
        logger.debug("Parsed CPN %s: |P|=%d |T|=%d |A|=%d", model.name, len(model.places), len(model.transitions),
                      len(model.arcs))
        return model

    @staticmethod
    def _check_bound(transition_id: str, expr: Expr, bound: Set[str], line: int, col: int) -> None:
        unbound = free_variables(expr) - bound
        if unbound:
            raise UndeclaredVariableError(
                f"{line}:{col}: {', '.join(sorted(unbound))} not bound by an input pattern of {transition_id}")


def parse_model(
    text: str,
    functions: Optional[FunctionRegistry] = None,
    rules: Optional[Mapping[str, Rule]] = None,
) -> Model:
    """
    Parse `.pnet` source into a validated model.

    Args:
        text: Model source
        functions: CPN function registry; the built-in one when omitted
        rules: HLPN rules by bind name; the built-in rules when omitted

    Returns:
        A Net for `kind hlpn`, a CpnModel for `kind cpn`

    Raises:
        PnetSyntaxError: Malformed source, with line and column
        UndeclaredColourSetError: A type name is not declared
        UndeclaredVariableError: An identifier is neither a variable nor a symbol,
            or an output variable is not bound by an input pattern
        UnknownFunctionError: A call or bind names an unregistered function
        TimedTokenInUntimedPlaceError: `@+` on an untimed place
        TokenTypeError: An initial token does not belong to its place's type
    """
    return _Parser(text, functions or default_registry(), rules).parse()


def load_model(path: Union[str, Path], **kwargs: Any) -> Model:
    """Parse a `.pnet` file."""
    return parse_model(Path(path).read_text(encoding="utf-8"), **kwargs)


# printing


def _user_types(types: Mapping[str, TokenType]) -> List[TokenType]:
    return [t for name, t in types.items() if not (name in BUILTIN_TYPES and t.kind == name and not t.timed)]


def _render_type(token_type: TokenType) -> str:
    if token_type.kind == "enum":
        body = "enum { " + " ".join(token_type.symbols) + " }"
    elif token_type.kind == "product":
        body = "product " + " * ".join(token_type.components)
    elif token_type.kind == "record":
        body = "record { " + " ".join(f"{f}:{t}" for f, t in token_type.fields) + " }"
    else:
        body = token_type.kind
    return f"colset {token_type.name} = {body}" + (" timed" if token_type.timed else "")


def _render_token(value: Any, type_name: Optional[str], types: Mapping[str, TokenType]) -> str:
    token_type = types.get(type_name) if type_name else None
    if token_type is None:
        return render(Const(value)) if not isinstance(value, tuple) else \
            "(" + ", ".join(_render_token(v, None, types) for v in value) + ")"
    if token_type.kind == "enum":
        return value
    if token_type.kind == "product":
        return "(" + ", ".join(_render_token(v, c, types) for v, c in zip(value, token_type.components)) + ")"
    if token_type.kind == "record":
        return "(" + ", ".join(_render_token(v, t, types) for v, (_, t) in zip(value, token_type.fields)) + ")"
    return render(Const(value))


def _render_marking(tokens: List[Any], type_name: Optional[str], types: Mapping[str, TokenType]) -> str:
    runs: List[List[Any]] = []
    for token in tokens:
        if runs and runs[-1][0] == token:
            runs[-1][1] += 1
        else:
            runs.append([token, 1])
    terms = []
    for token, count in runs:
        if isinstance(token, TimedToken):
            text = f"{_render_token(token.value, type_name, types)}@+{token.timestamp}"
        else:
            text = _render_token(token, type_name, types)
        terms.append(f"{count}'{text}")
    return " ++ ".join(terms)


def _display(node_id: str, name: str) -> str:
    if name == node_id:
        return ""
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f' "{escaped}"'


def print_model(model: Model) -> str:
    """Render a model as `.pnet` text that parses back to an equal model."""
    is_cpn = isinstance(model, CpnModel)
    types = model.colsets if is_cpn else model.types
    header = f'net "{model.name}" kind {"cpn" if is_cpn else "hlpn"}'
    if is_cpn and model.timed:
        header += " timed"
    lines = [header]
    lines.extend(_render_type(t) for t in _user_types(types))
    if is_cpn:
        lines.extend(f"var {name} : {type_name}" for name, type_name in model.variables.items())
    for place in model.places:
        line = f"place {place.id}{_display(place.id, place.name)}"
        if place.type is not None:
            line += f" : {place.type}"
        tokens = model.initial_marking.get(place.id)
        if tokens:
            line += " init " + _render_marking(tokens, place.type, types)
        lines.append(line)
    for transition in model.transitions:
        line = f"trans {transition.id}{_display(transition.id, transition.name)}"
        if is_cpn and transition.id in model.guards:
            line += f" guard {render(model.guards[transition.id])}"
        if transition.kind != "timed":
            line += f" kind {transition.kind}"
        if transition.budget is not None:
            line += f" budget {transition.budget}"
        lines.append(line)
    for arc in model.arcs:
        lines.append(_render_arc(arc, is_cpn))
    if is_cpn:
        lines.extend(f"bind {t} = {name}" for t, name in model.bindings.items())
    else:
        lines.extend(f"bind {t} = {rule.name}" for t, rule in model.rules.items())
    return "\n".join(lines) + "\n"


def _render_arc(arc: Arc, is_cpn: bool) -> str:
    if arc.kind == "inhibitor":
        weight = f" : {arc.multiplicity}" if arc.multiplicity > 1 else ""
        return f"arc {arc.source} -o {arc.target}{weight}"
    line = f"arc {arc.source} -> {arc.target}"
    prefix = f"{arc.multiplicity}'" if arc.multiplicity > 1 else ""
    if is_cpn and arc.expression is not None:
        line += f" : {prefix}{render(arc.expression)}"
        if arc.delay:
            line += f" @+ {arc.delay}"
    elif arc.label:
        line += f" : {prefix}{arc.label}"
    elif arc.multiplicity > 1:
        line += f" : {arc.multiplicity}"
    return line
