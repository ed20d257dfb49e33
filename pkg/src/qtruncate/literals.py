"""Exact-looking numeric literals such as ``"pi/2"`` or ``"(3-sqrt(3))/6"``."""

from __future__ import annotations

import ast
import math
import operator

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")


def parse_number(value) -> float:
    """Evaluate a number or a restricted arithmetic string to a float.

    Accepted strings use ``+ - * / **``, parentheses, ``pi`` and ``sqrt``.

    >>> parse_number("pi/2") == math.pi / 2
    True
    >>> parse_number("(3-sqrt(3))/6") == (3 - math.sqrt(3)) / 6
    True
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers here")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"cannot parse {value!r} as a number")
    text = value.strip().replace("π", "pi")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {value!r} as a number") from exc
    try:
        result = float(_eval(tree))
    except (ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot evaluate {value!r}: {exc}") from exc
    if not math.isfinite(result):
        raise ValueError(f"{value!r} is not finite")
    return result


def parse_list(text: str) -> list[float]:
    """Comma-separated list of literals, e.g. ``"1/3,1/4,1,1/3,1/2"``."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    if not text:
        return []
    return [parse_number(part) for part in text.split(",")]
