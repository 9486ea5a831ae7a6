"""Safe arithmetic expressions for fields written in config files.

Grammar: numbers, + - * / ^ (or **), parentheses, the variables t, pi,
x1..xk (current state) and y1..yk (delayed state), and the functions sin,
cos, tan, exp, log, sqrt, abs, tanh.  A top-level comma list is a vector.
"""
from __future__ import annotations

import ast
import math
import re
from typing import Callable

import numpy as np

from .errors import ConfigError

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "tanh": math.tanh,
}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)
_VAR = re.compile(r"^(x|y)([1-9][0-9]*)$")


def _check(node: ast.AST, allowed: set[str]):
    if isinstance(node, ast.Expression):
        return _check(node.body, allowed)
    if isinstance(node, ast.Tuple):
        for elt in node.elts:
            _check(elt, allowed)
        return
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return
    if isinstance(node, ast.Name):
        if node.id not in allowed:
            raise ConfigError(f"unknown variable {node.id!r}")
        return
    if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        _check(node.left, allowed)
        _check(node.right, allowed)
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNARY):
        _check(node.operand, allowed)
        return
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS:
        if node.keywords or len(node.args) != 1:
            raise ConfigError(f"{node.func.id} takes exactly one argument")
        _check(node.args[0], allowed)
        return
    raise ConfigError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


def compile_vector(text: str, dim: int, *, time: bool = True, delayed: bool = False,
                   components: int | None = None) -> Callable[..., np.ndarray]:
    """Compile a comma list into fn(t, x, y) -> array of length ``components`` (default dim)."""
    components = dim if components is None else components
    source = text.strip().replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    allowed = {"pi"} | {f"x{i + 1}" for i in range(dim)}
    if time:
        allowed.add("t")
    if delayed:
        allowed |= {f"y{i + 1}" for i in range(dim)}
    _check(tree, allowed)
    n = len(tree.body.elts) if isinstance(tree.body, ast.Tuple) else 1
    if n != components:
        raise ConfigError(f"expression {text!r} has {n} components, expected {components}")
    code = compile(tree, "<expr>", "eval")
    names = [f"x{i + 1}" for i in range(dim)]
    ynames = [f"y{i + 1}" for i in range(dim)]

    def fn(t=0.0, x=(), y=()):
        env = dict(FUNCTIONS)
        env["pi"] = math.pi
        env["t"] = float(t)
        env.update(zip(names, map(float, x)))
        if delayed:
            env.update(zip(ynames, map(float, y)))
        out = eval(code, {"__builtins__": {}}, env)  # syntax tree checked above
        return np.atleast_1d(np.asarray(out, dtype=float))

    return fn
