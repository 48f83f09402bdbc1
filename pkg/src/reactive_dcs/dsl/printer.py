"""Canonical text rendering of nodes."""
from __future__ import annotations

from ..synchro.expr import TRUE, Binary, Const, If, Not, Var
from ..synchro.types import BUILTIN_ENUMS, BoolType, EnumType, IntType

# binding strength: higher binds tighter
_LEVEL = {"implies": 1, "or": 2, "and": 3, "eq": 5, "le": 5, "add": 6, "mul": 7}
_SYM = {"implies": "=>", "or": "or", "and": "and", "eq": "=", "le": "<=", "add": "+", "mul": "*"}


def _level(e):
    if isinstance(e, If):
        return 0
    if isinstance(e, Binary):
        return _LEVEL[e.op]
    if isinstance(e, Not):
        return 4
    if isinstance(e, Const) and isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0:
        return 7
    return 9


def format_expr(e, need=0):
    text = _fmt(e)
    return f"({text})" if _level(e) < need else text


def _fmt(e):
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        return "not " + format_expr(e.arg, 4)
    if isinstance(e, If):
        return f"if {format_expr(e.cond, 1)} then {format_expr(e.then, 1)} else {format_expr(e.else_, 1)}"
    lv = _LEVEL[e.op]
    if e.op == "implies":
        left, right = lv + 1, lv
    elif e.op in ("eq", "le"):
        left, right = lv + 1, lv + 1
    else:
        left, right = lv, lv + 1
    return f"{format_expr(e.left, left)} {_SYM[e.op]} {format_expr(e.right, right)}"


def format_type(t):
    if isinstance(t, BoolType):
        return "bool"
    if isinstance(t, IntType):
        return "int"
    return t.name


def _decls(decls):
    return "; ".join(f"{d.name}: {format_type(d.type)}" for d in decls)


def _value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _print_node(node):
    lines = [f"node {node.name}({_decls(node.inputs)}) returns ({_decls(node.outputs)})"]
    if node.contract is not None:
        ctl = "; ".join(f"{c.name}: {format_type(c.type)} = {format_expr(c.default, 1)}"
                        for c in node.contract.controllables)
        lines.append(f"  contract enforce {format_expr(node.contract.enforce)}")
        lines.append(f"    with ({ctl})")
    if node.locals:
        lines.append(f"  var {_decls(node.locals)};")
    lines.append("let")
    for eq in node.equations:
        lines.append(f"  {eq.name} = {format_expr(eq.expr)};")
    for m in node.memories:
        lines.append(f"  {m.name} = {_value(m.init)} fby {format_expr(m.next)};")
    for inst in node.instances:
        results = ", ".join(r if r is not None else "_" for r in inst.results)
        args = ", ".join(format_expr(a) for a in inst.args)
        lines.append(f"  ({results}) = {inst.node.name}({args});")
    for aut in node.automata:
        lines.append("  automaton")
        for mode in aut.modes:
            lines.append(f"    state {mode.name}")
            if mode.equations:
                eqs = "; ".join(f"{n} = {format_expr(e)}" for n, e in mode.equations)
                lines.append(f"      do {eqs}")
            for j, t in enumerate(mode.transitions):
                head = "until" if j == 0 else "    |"
                em = ""
                if t.emits:
                    em = " emit " + ", ".join(n if e == TRUE else f"{n} = {format_expr(e, 1)}" for n, e in t.emits)
                lines.append(f"      {head} {format_expr(t.guard)} then {t.target}{em}")
        lines.append("  end;")
    lines.append("tel")
    return "\n".join(lines)


def _dependencies(node, seen, out):
    for inst in node.instances:
        _dependencies(inst.node, seen, out)
    if node.name not in seen:
        seen.add(node.name)
        out.append(node)


def pretty_print(node) -> str:
    """Render `node` (and the nodes and enumerations it depends on) as parseable text."""
    nodes = []
    _dependencies(node, set(), nodes)
    enums = {}
    for n in nodes:
        for e in n.enums():
            if e.name not in BUILTIN_ENUMS:
                enums.setdefault(e.name, e)
    parts = [f"type {e.name} = {' | '.join(e.symbols)};" for e in enums.values()]
    parts.extend(_print_node(n) for n in nodes)
    return "\n\n".join(parts) + "\n"
