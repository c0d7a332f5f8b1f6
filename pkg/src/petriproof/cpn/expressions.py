"""
Arc inscriptions and guards.

The language is deliberately small: variables, constants, function calls,
tuples, equality and boolean connectives. Input arcs use the pattern subset
(variables, constants and tuples of patterns).
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional, Set, Tuple, Union

from ..exceptions import ExpressionTypeError, UnknownFunctionError, UndeclaredVariableError


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    """A literal; `symbol` marks a bare enumeration symbol rather than a quoted string."""
    value: Any
    symbol: bool = False


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...] = ()


@dataclass(frozen=True)
class TupleExpr:
    items: Tuple["Expr", ...]


@dataclass(frozen=True)
class BinOp:
    """`=`, `<>`, `and` or `or`."""
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Var, Const, Call, TupleExpr, BinOp, Not]

BINARY_OPS = ("=", "<>", "and", "or")


def free_variables(expr: Expr) -> Set[str]:
    """Names of every variable occurring in an expression."""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Call):
        children = expr.args
    elif isinstance(expr, TupleExpr):
        children = expr.items
    elif isinstance(expr, BinOp):
        children = (expr.left, expr.right)
    else:
        children = (expr.operand,)
    names: Set[str] = set()
    for child in children:
        names |= free_variables(child)
    return names


def called_functions(expr: Expr) -> Set[str]:
    if isinstance(expr, Call):
        names = {expr.name}
        for arg in expr.args:
            names |= called_functions(arg)
        return names
    if isinstance(expr, TupleExpr):
        return set().union(*(called_functions(i) for i in expr.items)) if expr.items else set()
    if isinstance(expr, BinOp):
        return called_functions(expr.left) | called_functions(expr.right)
    if isinstance(expr, Not):
        return called_functions(expr.operand)
    return set()


def is_pattern(expr: Expr) -> bool:
    """True for expressions usable on input arcs."""
    if isinstance(expr, (Var, Const)):
        return True
    if isinstance(expr, TupleExpr):
        return all(is_pattern(item) for item in expr.items)
    return False


def _as_bool(value: Any, expr: Expr) -> bool:
    if not isinstance(value, bool):
        raise ExpressionTypeError(f"{render(expr)} evaluates to {value!r}, not a boolean")
    return value


def evaluate(expr: Expr, env: Mapping[str, Any], functions: Optional[Mapping[str, Callable[..., Any]]] = None) -> Any:
    """
    Evaluate an expression under a binding.

    Args:
        expr: Expression tree
        env: Variable values
        functions: Callables by name, already bound to their run context

    Raises:
        UndeclaredVariableError: A variable has no value in `env`
        UnknownFunctionError: A call names an unregistered function
        ExpressionTypeError: A connective receives a non-boolean operand
    """
    if isinstance(expr, Var):
        if expr.name not in env:
            raise UndeclaredVariableError(f"variable {expr.name} is not bound")
        return env[expr.name]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, TupleExpr):
        return tuple(evaluate(item, env, functions) for item in expr.items)
    if isinstance(expr, Call):
        if functions is None or expr.name not in functions:
            raise UnknownFunctionError(f"function {expr.name} is not registered")
        return functions[expr.name](*(evaluate(arg, env, functions) for arg in expr.args))
    if isinstance(expr, Not):
        return not _as_bool(evaluate(expr.operand, env, functions), expr.operand)
    if expr.op == "=":
        return evaluate(expr.left, env, functions) == evaluate(expr.right, env, functions)
    if expr.op == "<>":
        return evaluate(expr.left, env, functions) != evaluate(expr.right, env, functions)
    left = _as_bool(evaluate(expr.left, env, functions), expr.left)
    if expr.op == "and":
        return left and _as_bool(evaluate(expr.right, env, functions), expr.right)
    return left or _as_bool(evaluate(expr.right, env, functions), expr.right)


def match(pattern: Expr, value: Any, env: Mapping[str, Any]) -> Optional[Dict[str, Any]]:
    """
    Extend `env` so that `pattern` evaluates to `value`.

    Returns:
        The extended binding, or None when the value does not fit or a
        variable is already bound to something else
    """
    if isinstance(pattern, Var):
        if pattern.name in env:
            return dict(env) if env[pattern.name] == value else None
        extended = dict(env)
        extended[pattern.name] = value
        return extended
    if isinstance(pattern, Const):
        return dict(env) if pattern.value == value else None
    if isinstance(pattern, TupleExpr):
        if not isinstance(value, tuple) or len(value) != len(pattern.items):
            return None
        current: Optional[Dict[str, Any]] = dict(env)
        for item, part in zip(pattern.items, value):
            current = match(item, part, current)
            if current is None:
                return None
        return current
    raise ExpressionTypeError(f"{render(pattern)} cannot be used as an input pattern")


def render_value(value: Any, symbol: bool = False) -> str:
    """`.pnet` text of a constant."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        if symbol:
            return value
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "(" + ", ".join(render_value(v, symbol) for v in value) + ")"
    return str(value)


_PRECEDENCE = {"or": 1, "and": 2, "=": 4, "<>": 4}
_NOT = 3
_ATOM = 5


def render(expr: Expr, parent: int = 0) -> str:
    """`.pnet` text of an expression; parses back to an equal tree."""
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Const):
        return render_value(expr.value, expr.symbol)
    if isinstance(expr, Call):
        return f"{expr.name}(" + ", ".join(render(a) for a in expr.args) + ")"
    if isinstance(expr, TupleExpr):
        return "(" + ", ".join(render(i) for i in expr.items) + ")"
    if isinstance(expr, Not):
        text = f"not {render(expr.operand, _NOT)}"
        return f"({text})" if _NOT < parent else text
    level = _PRECEDENCE[expr.op]
    if expr.op in ("=", "<>"):
        text = f"{render(expr.left, _ATOM)} {expr.op} {render(expr.right, _ATOM)}"
    else:
        text = f"{render(expr.left, level)} {expr.op} {render(expr.right, level + 1)}"
    return f"({text})" if level < parent else text
