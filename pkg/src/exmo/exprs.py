"""Integer expression mini-language for guards, payloads and updates.

Expressions are a restricted subset of Python expression syntax: integer
literals, declared names, ``+ - *``, unary minus, and a single comparison
(``< <= == != >= >``).  Parsing goes through :mod:`ast`, so the normalized
form of an expression is simply ``ast.unparse`` of its tree, which gives a
canonical spacing such as ``pc >= pE + s``.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .errors import ModelSyntaxError

_BIN_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*"}
_CMP_OPS = {ast.Lt: "<", ast.LtE: "<=", ast.Eq: "==", ast.NotEq: "!=",
            ast.GtE: ">=", ast.Gt: ">"}


def _check(node: ast.expr, source: str) -> None:
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, int) or isinstance(node.value, bool):
            raise ModelSyntaxError(f"non-integer literal in {source!r}")
        return
    if isinstance(node, ast.Name):
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        _check(node.operand, source)
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        _check(node.left, source)
        _check(node.right, source)
        return
    if isinstance(node, ast.Compare):
        if len(node.ops) != 1 or type(node.ops[0]) not in _CMP_OPS:
            raise ModelSyntaxError(f"unsupported comparison in {source!r}")
        _check(node.left, source)
        _check(node.comparators[0], source)
        return
    raise ModelSyntaxError(f"unsupported syntax in expression {source!r}")


@lru_cache(maxsize=None)
def _parse(source: str) -> ast.expr:
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ModelSyntaxError(f"cannot parse expression {source!r}: {exc.msg}") from exc
    _check(tree.body, source)
    return tree.body


def _eval(node: ast.expr, scope: Mapping[str, int]) -> int:
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        return int(scope[node.id])
    if isinstance(node, ast.UnaryOp):
        return -_eval(node.operand, scope)
    if isinstance(node, ast.BinOp):
        left = _eval(node.left, scope)
        right = _eval(node.right, scope)
        op = _BIN_OPS[type(node.op)]
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        return left * right
    if isinstance(node, ast.Compare):
        left = _eval(node.left, scope)
        right = _eval(node.comparators[0], scope)
        op = _CMP_OPS[type(node.ops[0])]
        return {"<": left < right, "<=": left <= right, "==": left == right,
                "!=": left != right, ">=": left >= right, ">": left > right}[op]
    raise AssertionError(f"unreachable node {node!r}")


@dataclass(frozen=True)
class Expr:
    """A parsed expression, identified by its normalized source text."""

    text: str

    def evaluate(self, scope: Mapping[str, int]) -> int | bool:
        return _eval(_parse(self.text), scope)

    @property
    def names(self) -> frozenset[str]:
        return frozenset(n.id for n in ast.walk(_parse(self.text))
                         if isinstance(n, ast.Name))

    @property
    def is_comparison(self) -> bool:
        return isinstance(_parse(self.text), ast.Compare)

    def sides(self) -> tuple[str, str, str] | None:
        """For a comparison, return (left text, operator, right text)."""
        node = _parse(self.text)
        if not isinstance(node, ast.Compare):
            return None
        return (ast.unparse(node.left), _CMP_OPS[type(node.ops[0])],
                ast.unparse(node.comparators[0]))


def parse_expr(source: str) -> Expr:
    """Parse and normalize one expression."""
    node = _parse(source)
    return Expr(ast.unparse(node))
