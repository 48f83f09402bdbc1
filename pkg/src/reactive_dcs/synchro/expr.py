"""Expression trees and their reference evaluator."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from ..errors import TypeMismatch, UnboundFlow
from .types import BOOL, INT, BoolType, EnumType, IntType, check_value, saturate, type_of_value

BOOL_OPS = ("and", "or", "implies")
ARITH_OPS = ("add", "mul")
CMP_OPS = ("eq", "le")


@dataclass(frozen=True)
class Const:
    value: object
    type: object


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    else_: object


TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


def lit(value, typ=None) -> Const:
    if typ is None:
        typ = type_of_value(value)
        if typ is None:
            raise TypeMismatch(f"cannot infer the type of literal {value!r}; pass its enum type")
    return Const(value, typ)


def var(name: str) -> Var:
    return Var(name)


def _fold(op, args):
    args = [a if not isinstance(a, str) else Var(a) for a in args]
    if not args:
        return TRUE if op == "and" else FALSE
    return reduce(lambda l, r: Binary(op, l, r), args)


def and_(*args):
    return _fold("and", args)


def or_(*args):
    return _fold("or", args)


def _e(x):
    return Var(x) if isinstance(x, str) else x


def not_(a):
    return Not(_e(a))


def implies(a, b):
    return Binary("implies", _e(a), _e(b))


def eq(a, b):
    return Binary("eq", _e(a), _e(b))


def le(a, b):
    return Binary("le", _e(a), _e(b))


def add(*args):
    args = [_e(a) for a in args]
    if not args:
        return Const(0, INT)
    return reduce(lambda l, r: Binary("add", l, r), args)


def mul(a, b):
    return Binary("mul", _e(a), _e(b))


def ite(c, t, e):
    return If(_e(c), _e(t), _e(e))


def free_vars(expr) -> set:
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Var):
            out.add(e.name)
        elif isinstance(e, Not):
            stack.append(e.arg)
        elif isinstance(e, Binary):
            stack.append(e.left)
            stack.append(e.right)
        elif isinstance(e, If):
            stack.extend((e.cond, e.then, e.else_))
    return out


def rename(expr, mapping):
    """Substitute variable names according to `mapping` (missing names are kept)."""
    if isinstance(expr, Var):
        new = mapping.get(expr.name, expr.name)
        return new if not isinstance(new, str) else Var(new)
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Not):
        return Not(rename(expr.arg, mapping))
    if isinstance(expr, Binary):
        return Binary(expr.op, rename(expr.left, mapping), rename(expr.right, mapping))
    if isinstance(expr, If):
        return If(rename(expr.cond, mapping), rename(expr.then, mapping), rename(expr.else_, mapping))
    raise TypeError(f"not an expression: {expr!r}")


def type_of(expr, env_types):
    """Infer the type of `expr`; `env_types` maps flow names to types."""
    if isinstance(expr, Const):
        if not check_value(expr.value, expr.type):
            raise TypeMismatch(f"literal {expr.value!r} is not a {expr.type}")
        return expr.type
    if isinstance(expr, Var):
        try:
            return env_types[expr.name]
        except KeyError:
            raise UnboundFlow(expr.name) from None
    if isinstance(expr, Not):
        if type_of(expr.arg, env_types) != BOOL:
            raise TypeMismatch("'not' expects a boolean operand")
        return BOOL
    if isinstance(expr, Binary):
        lt = type_of(expr.left, env_types)
        rt = type_of(expr.right, env_types)
        if expr.op in BOOL_OPS:
            if lt != BOOL or rt != BOOL:
                raise TypeMismatch(f"'{expr.op}' expects boolean operands, got {lt} and {rt}")
            return BOOL
        if expr.op in ARITH_OPS:
            if lt != INT or rt != INT:
                raise TypeMismatch(f"'{expr.op}' expects integer operands, got {lt} and {rt}")
            return INT
        if expr.op == "le":
            if lt != INT or rt != INT:
                raise TypeMismatch(f"'<=' expects integer operands, got {lt} and {rt}")
            return BOOL
        if expr.op == "eq":
            if lt != rt:
                raise TypeMismatch(f"'=' compares {lt} with {rt}")
            return BOOL
        raise TypeMismatch(f"unknown operator {expr.op!r}")
    if isinstance(expr, If):
        if type_of(expr.cond, env_types) != BOOL:
            raise TypeMismatch("'if' condition must be boolean")
        tt = type_of(expr.then, env_types)
        et = type_of(expr.else_, env_types)
        if tt != et:
            raise TypeMismatch(f"'if' branches differ: {tt} and {et}")
        return tt
    raise TypeMismatch(f"not an expression: {expr!r}")


def _want(value, kind, what):
    if kind is bool:
        if not isinstance(value, bool):
            raise TypeMismatch(f"{what} expects a boolean, got {value!r}")
    elif not isinstance(value, int) or isinstance(value, bool):
        raise TypeMismatch(f"{what} expects an integer, got {value!r}")
    return value


def eval_expr(expr, env):
    """Evaluate `expr` under the valuation `env` (a mapping flow -> value)."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UnboundFlow(expr.name) from None
    if isinstance(expr, Not):
        return not _want(eval_expr(expr.arg, env), bool, "not")
    if isinstance(expr, Binary):
        op = expr.op
        l = eval_expr(expr.left, env)
        r = eval_expr(expr.right, env)
        if op == "and":
            return _want(l, bool, op) and _want(r, bool, op)
        if op == "or":
            return _want(l, bool, op) or _want(r, bool, op)
        if op == "implies":
            return (not _want(l, bool, op)) or _want(r, bool, op)
        if op == "add":
            return saturate(_want(l, int, op) + _want(r, int, op))
        if op == "mul":
            return saturate(_want(l, int, op) * _want(r, int, op))
        if op == "le":
            return _want(l, int, op) <= _want(r, int, op)
        if op == "eq":
            if type(l) is not type(r):
                raise TypeMismatch(f"'=' compares {l!r} with {r!r}")
            return l == r
        raise TypeMismatch(f"unknown operator {op!r}")
    if isinstance(expr, If):
        return eval_expr(expr.then if _want(eval_expr(expr.cond, env), bool, "if") else expr.else_, env)
    raise TypeMismatch(f"not an expression: {expr!r}")


def compile_expr(expr):
    """Turn `expr` into a closure over a valuation; assumes a type-checked tree."""
    if isinstance(expr, Const):
        v = expr.value
        return lambda env: v
    if isinstance(expr, Var):
        n = expr.name
        return lambda env: env[n]
    if isinstance(expr, Not):
        a = compile_expr(expr.arg)
        return lambda env: not a(env)
    if isinstance(expr, Binary):
        l = compile_expr(expr.left)
        r = compile_expr(expr.right)
        op = expr.op
        if op == "and":
            return lambda env: l(env) and r(env)
        if op == "or":
            return lambda env: l(env) or r(env)
        if op == "implies":
            return lambda env: (not l(env)) or r(env)
        if op == "add":
            return lambda env: saturate(l(env) + r(env))
        if op == "mul":
            return lambda env: saturate(l(env) * r(env))
        if op == "le":
            return lambda env: l(env) <= r(env)
        if op == "eq":
            return lambda env: l(env) == r(env)
    if isinstance(expr, If):
        c = compile_expr(expr.cond)
        t = compile_expr(expr.then)
        e = compile_expr(expr.else_)
        return lambda env: t(env) if c(env) else e(env)
    raise TypeMismatch(f"not an expression: {expr!r}")


__all__ = [
    "Const", "Var", "Not", "Binary", "If", "TRUE", "FALSE",
    "lit", "var", "and_", "or_", "not_", "implies", "eq", "le", "add", "mul", "ite",
    "free_vars", "rename", "type_of", "eval_expr", "compile_expr",
    "BoolType", "IntType", "EnumType",
]
