"""Generated Python for the transition relation of a flat node.

Every function takes ``D``, the tuple of component digits of a state (one per
automaton, then one per memory), and evaluates only the flows it needs.
"""
from __future__ import annotations

from ..synchro.expr import Binary, Const, If, Not, Var, free_vars
from ..synchro.types import saturate


class _Names:
    def __init__(self):
        self.map = {}

    def __call__(self, flow):
        if flow not in self.map:
            self.map[flow] = f"v{len(self.map)}"
        return self.map[flow]


def expr_source(e, names):
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return names(e.name)
    if isinstance(e, Not):
        return f"(not {expr_source(e.arg, names)})"
    if isinstance(e, If):
        return f"({expr_source(e.then, names)} if {expr_source(e.cond, names)} else {expr_source(e.else_, names)})"
    l = expr_source(e.left, names)
    r = expr_source(e.right, names)
    if e.op == "and":
        return f"({l} and {r})"
    if e.op == "or":
        return f"({l} or {r})"
    if e.op == "implies":
        return f"((not {l}) or {r})"
    if e.op == "eq":
        return f"({l} == {r})"
    if e.op == "le":
        return f"({l} <= {r})"
    if e.op == "add":
        return f"_sat({l} + {r})"
    return f"_sat({l} * {r})"


class Codegen:
    """Emits row, predicate and default functions over component digits."""

    def __init__(self, plan, components):
        self.plan = plan
        self.node = plan.node
        self.components = components  # list of ("aut", k, modes) / ("mem", name, values)
        self.comp_of_aut = {c[1]: i for i, c in enumerate(components) if c[0] == "aut"}
        self.comp_of_mem = {c[1]: i for i, c in enumerate(components) if c[0] == "mem"}
        self.mode_index = plan.mode_index
        self.ns = {"_sat": saturate}
        self._n = 0

    def cone(self, roots):
        deps = self.plan.deps
        seen = set()
        stack = list(roots)
        while stack:
            v = stack.pop()
            if v in seen or v not in deps:
                continue
            seen.add(v)
            stack.extend(deps[v])
        return [x for x in self.plan.order if x in seen]

    def _const(self, value):
        name = f"K{self._n}"
        self._n += 1
        self.ns[name] = value
        return name

    def item_lines(self, item, names):
        node = self.node
        if isinstance(item, tuple):
            k = item[1]
            aut = node.automata[k]
            m = f"m{k}"
            parts = []
            for i, mode in enumerate(aut.modes):
                chain = "-1"
                for j in range(len(mode.transitions) - 1, -1, -1):
                    chain = f"({j} if {expr_source(mode.transitions[j].guard, names)} else {chain})"
                parts.append((i, chain))
            src = parts[-1][1]
            for i, chain in reversed(parts[:-1]):
                src = f"({chain} if {m} == {i} else {src})"
            return [f"f{k} = {src}"]
        if item in self.plan.inputs or item in self.plan.controllables:
            return []
        kind, obj = self.plan.defs[item]
        v = names(item)
        if kind == "equation":
            return [f"{v} = {expr_source(obj.expr, names)}"]
        if kind == "memory":
            c = self.comp_of_mem[item]
            return [f"{v} = {self._const(self.components[c][2])}[D[{c}]]"]
        if kind == "mode":
            aut = node.automata[obj]
            srcs = [expr_source(dict(mode.equations)[item], names) for mode in aut.modes]
            src = srcs[-1]
            for i in range(len(srcs) - 2, -1, -1):
                src = f"({srcs[i]} if m{obj} == {i} else {src})"
            return [f"{v} = {src}"]
        aut = node.automata[obj]
        src = "False"
        cases = []
        for i, mode in enumerate(aut.modes):
            for j, t in enumerate(mode.transitions):
                for n, e in t.emits:
                    if n == item:
                        cases.append((i, j, expr_source(e, names)))
        for i, j, s in reversed(cases):
            src = f"(bool({s}) if (m{obj} == {i} and f{obj} == {j}) else {src})"
        return [f"{v} = {src}"]

    def _mode_lines(self):
        return [f"m{k} = D[{c}]" for k, c in self.comp_of_aut.items()]

    def _split(self, items):
        sd = self.plan.state_determined
        pre = [x for x in items if not isinstance(x, tuple) and x in sd]
        post = [x for x in items if x not in pre]
        return pre, post

    def row_function(self, comp_ids, weights, input_vars, combos):
        """Function D -> list of successor-code contributions, one per input combo."""
        names = _Names()
        roots = []
        for c in comp_ids:
            kind, key, _ = self.components[c]
            if kind == "aut":
                roots.append(("fire", key))
            else:
                roots.extend(self.plan.deps_of_memory_next[key])
        items = self.cone(roots)
        pre, post = self._split(items)
        body = ["def _row(D):"] + ["    " + l for l in self._mode_lines()]
        for it in pre:
            body += ["    " + l for l in self.item_lines(it, names)]
        params = ", ".join(names(v) for v in input_vars)
        if input_vars:
            body.append(f"    out = []")
            tuple_target = params + ("," if len(input_vars) == 1 else "")
            body.append(f"    for {tuple_target} in {self._const(combos)}:")
            ind = "        "
        else:
            body.append("    out = []")
            ind = "    "
        for it in post:
            body += [ind + l for l in self.item_lines(it, names)]
        terms = []
        for c, w in zip(comp_ids, weights):
            kind, key, values = self.components[c]
            if kind == "aut":
                nxt = []
                for i, mode in enumerate(self.node.automata[key].modes):
                    nxt.append(tuple(self.mode_index[key][t.target] * w for t in mode.transitions) + (i * w,))
                terms.append(f"{self._const(tuple(nxt))}[m{key}][f{key}]")
            else:
                mem = next(m for m in self.node.memories if m.name == key)
                table = {val: i * w for i, val in enumerate(values)}
                terms.append(f"{self._const(table)}[{expr_source(mem.next, names)}]")
        body.append(ind + f"out.append({' + '.join(terms) if terms else '0'})")
        body.append("    return out")
        return self._exec("\n".join(body), "_row")

    def predicate_function(self, expr):
        """Function D -> value of a state-determined expression."""
        names = _Names()
        items = self.cone(free_vars(expr))
        body = ["def _pred(D):"] + ["    " + l for l in self._mode_lines()]
        for it in items:
            body += ["    " + l for l in self.item_lines(it, names)]
        body.append(f"    return {expr_source(expr, names)}")
        return self._exec("\n".join(body), "_pred")

    def _exec(self, src, name):
        scope = dict(self.ns)
        exec(compile(src, f"<generated {name}>", "exec"), scope)
        fn = scope[name]
        fn.source = src
        return fn
