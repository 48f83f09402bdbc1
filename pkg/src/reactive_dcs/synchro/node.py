"""Synchronous nodes: declarations, equations, mode automata, instances, contracts."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from ..errors import InstantaneousCycle, TypeMismatch, UnboundFlow, ValidationError, WiringError
from .expr import compile_expr, free_vars, type_of
from .types import BOOL, BoolType, EnumType, check_value


def _tup(x):
    if isinstance(x, dict):
        return tuple(x.items())
    return tuple(x)


@dataclass(frozen=True)
class Decl:
    name: str
    type: object


@dataclass(frozen=True)
class Equation:
    name: str
    expr: object


@dataclass(frozen=True)
class Memory:
    """``name = init fby next``: holds `init` first, then the previous value of `next`."""

    name: str
    init: object
    next: object


@dataclass(frozen=True)
class Transition:
    guard: object
    target: str
    emits: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "emits", _tup(self.emits))


@dataclass(frozen=True)
class Mode:
    name: str
    equations: tuple = ()
    transitions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "equations", _tup(self.equations))
        object.__setattr__(self, "transitions", _tup(self.transitions))


@dataclass(frozen=True)
class Automaton:
    """Mode automaton; the first mode is the initial one."""

    modes: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", _tup(self.modes))

    @property
    def mode_names(self):
        return tuple(m.name for m in self.modes)

    def defined_flows(self):
        return tuple(n for n, _ in self.modes[0].equations) if self.modes else ()

    def emitted_flows(self):
        seen = []
        for m in self.modes:
            for t in m.transitions:
                for n, _ in t.emits:
                    if n not in seen:
                        seen.append(n)
        return tuple(seen)


@dataclass(frozen=True)
class Instance:
    node: "Node"
    args: tuple
    results: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", _tup(self.args))
        object.__setattr__(self, "results", _tup(self.results))


@dataclass(frozen=True)
class Controllable:
    name: str
    type: object
    default: object


@dataclass(frozen=True)
class Contract:
    enforce: object
    controllables: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "controllables", _tup(self.controllables))

    @property
    def names(self):
        return tuple(c.name for c in self.controllables)


@dataclass(frozen=True)
class Node:
    name: str
    inputs: tuple = ()
    outputs: tuple = ()
    locals: tuple = ()
    equations: tuple = ()
    memories: tuple = ()
    automata: tuple = ()
    instances: tuple = ()
    contract: Contract | None = None

    def __post_init__(self):
        for f in ("inputs", "outputs", "locals", "equations", "memories", "automata", "instances"):
            object.__setattr__(self, f, _tup(getattr(self, f)))
        eqs = tuple(e if isinstance(e, Equation) else Equation(*e) for e in self.equations)
        object.__setattr__(self, "equations", eqs)

    @property
    def input_names(self):
        return tuple(d.name for d in self.inputs)

    @property
    def output_names(self):
        return tuple(d.name for d in self.outputs)

    @property
    def controllable_names(self):
        return self.contract.names if self.contract else ()

    @property
    def step_inputs(self):
        """Declarations fed to a step: uncontrollable inputs then controllables."""
        ctl = tuple(Decl(c.name, c.type) for c in self.contract.controllables) if self.contract else ()
        return self.inputs + ctl

    @cached_property
    def flat(self) -> "Node":
        if not self.instances:
            return self
        from .compose import compose

        return compose(self)

    @cached_property
    def plan(self) -> "Plan":
        return Plan(self.flat)

    def enums(self):
        seen = {}
        decls = self.inputs + self.outputs + self.locals + self.step_inputs
        for d in decls:
            if isinstance(d.type, EnumType):
                seen[d.type.name] = d.type
        for inst in self.instances:
            for e in inst.node.enums():
                seen.setdefault(e.name, e)
        return tuple(seen.values())


@dataclass(frozen=True)
class ProgramState:
    """Active mode per automaton (by position) and stored memory values."""

    modes: tuple
    memories: tuple = ()

    def memory(self, name):
        return dict(self.memories)[name]


# ---------------------------------------------------------------------------
# validation


def _declared(node):
    decls = {}
    for d in node.inputs + node.outputs + node.locals + node.step_inputs[len(node.inputs):]:
        if d.name in decls:
            raise ValidationError(f"{node.name}: flow {d.name!r} declared twice")
        decls[d.name] = d.type
    return decls


def _check_unique_names(node, decls):
    enums = node.enums()
    for e in enums:
        for s in e.symbols:
            if s in decls:
                raise ValidationError(f"{node.name}: flow {s!r} shadows an enum symbol")


def collect_definitions(node):
    """Map every defined flow to its definition kind, raising on double definitions."""
    defs = {}

    def define(name, kind):
        if name in defs:
            raise ValidationError(f"{node.name}: flow {name!r} defined twice ({defs[name][0]} and {kind[0]})")
        defs[name] = kind

    for eq in node.equations:
        define(eq.name, ("equation", eq))
    for mem in node.memories:
        define(mem.name, ("memory", mem))
    for k, aut in enumerate(node.automata):
        for n in aut.defined_flows():
            define(n, ("mode", k))
        for n in aut.emitted_flows():
            define(n, ("emit", k))
    for i, inst in enumerate(node.instances):
        for r in inst.results:
            if r is not None:
                define(r, ("instance", i))
    return defs


def check_signature(node):
    """Validate declarations, definitions and types (without cycle analysis)."""
    decls = _declared(node)
    _check_unique_names(node, decls)
    defs = collect_definitions(node)
    inputs = set(node.input_names) | set(node.controllable_names)
    for name in defs:
        if name not in decls:
            raise ValidationError(f"{node.name}: flow {name!r} is defined but not declared")
        if name in inputs:
            raise ValidationError(f"{node.name}: input {name!r} cannot be defined")
    for d in node.outputs + node.locals:
        if d.name not in defs:
            raise ValidationError(f"{node.name}: flow {d.name!r} is never defined")

    def expect(expr, typ, what):
        try:
            got = type_of(expr, decls)
        except UnboundFlow as exc:
            raise ValidationError(f"{node.name}: {what} references undeclared flow {exc.name!r}") from None
        except TypeMismatch as exc:
            raise ValidationError(f"{node.name}: {what}: {exc}") from None
        if typ is not None and got != typ:
            raise ValidationError(f"{node.name}: {what} has type {got}, expected {typ}")
        return got

    for eq in node.equations:
        expect(eq.expr, decls[eq.name], f"equation of {eq.name!r}")
    for mem in node.memories:
        if not check_value(mem.init, decls[mem.name]):
            raise ValidationError(f"{node.name}: memory {mem.name!r} initial value {mem.init!r} is ill-typed")
        expect(mem.next, decls[mem.name], f"memory {mem.name!r}")
    for k, aut in enumerate(node.automata):
        if not aut.modes:
            raise ValidationError(f"{node.name}: automaton {k} has no modes")
        names = aut.mode_names
        if len(set(names)) != len(names):
            raise ValidationError(f"{node.name}: automaton {k} repeats a mode name")
        flows = set(aut.defined_flows())
        emitted = set(aut.emitted_flows())
        for m in aut.modes:
            mflows = [n for n, _ in m.equations]
            if len(mflows) != len(set(mflows)) or set(mflows) != flows:
                raise ValidationError(
                    f"{node.name}: mode {m.name!r} must define exactly {sorted(flows)}, got {sorted(mflows)}")
            for n, e in m.equations:
                expect(e, decls[n], f"mode {m.name!r} equation of {n!r}")
            for t in m.transitions:
                expect(t.guard, BOOL, f"guard in mode {m.name!r}")
                if t.target not in names:
                    raise ValidationError(f"{node.name}: mode {m.name!r} targets unknown mode {t.target!r}")
                seen = set()
                for n, e in t.emits:
                    if n in seen:
                        raise ValidationError(f"{node.name}: transition emits {n!r} twice")
                    seen.add(n)
                    if decls[n] != BOOL:
                        raise ValidationError(f"{node.name}: emitted flow {n!r} must be boolean")
                    expect(e, BOOL, f"emission of {n!r}")
        if flows & emitted:
            raise ValidationError(f"{node.name}: flows {sorted(flows & emitted)} are both emitted and mode-defined")
    for i, inst in enumerate(node.instances):
        sub = inst.node
        if sub.contract is not None:
            raise WiringError(f"{node.name}: instance of {sub.name!r} carries a contract; only the top node may")
        if len(inst.args) != len(sub.inputs):
            raise WiringError(f"{node.name}: {sub.name} expects {len(sub.inputs)} arguments, got {len(inst.args)}")
        if len(inst.results) != len(sub.outputs):
            raise WiringError(f"{node.name}: {sub.name} returns {len(sub.outputs)} flows, got {len(inst.results)}")
        for a, d in zip(inst.args, sub.inputs):
            try:
                got = type_of(a, decls)
            except (UnboundFlow, TypeMismatch) as exc:
                raise WiringError(f"{node.name}: argument {d.name!r} of {sub.name}: {exc}") from None
            if got != d.type:
                raise WiringError(f"{node.name}: argument {d.name!r} of {sub.name} has type {got}, expected {d.type}")
        for r, d in zip(inst.results, sub.outputs):
            if r is not None and decls[r] != d.type:
                raise WiringError(f"{node.name}: result {r!r} of {sub.name} has type {decls[r]}, expected {d.type}")
        check_signature(sub)
    if node.contract is not None:
        for c in node.contract.controllables:
            if not isinstance(c.type, BoolType):
                raise ValidationError(f"{node.name}: controllable {c.name!r} must be boolean")
            if c.name in node.input_names:
                raise ValidationError(f"{node.name}: controllable {c.name!r} is also an uncontrollable input")
            expect(c.default, c.type, f"default of controllable {c.name!r}")
        expect(node.contract.enforce, BOOL, "contract enforce expression")
    return decls, defs


def validate(node):
    """Raise if `node` is malformed; return its (flattened) execution plan."""
    check_signature(node)
    plan = node.plan
    if node.contract is not None:
        sd = plan.state_determined
        for what, expr in [("enforce", node.contract.enforce)] + [
                (f"default of {c.name}", c.default) for c in node.contract.controllables]:
            bad = sorted(free_vars(expr) - sd)
            if bad:
                raise ValidationError(f"{node.name}: contract {what} reads non state-determined flows {bad}")
    return plan


# ---------------------------------------------------------------------------
# execution plan of a flat node


class Plan:
    """Dependency-ordered evaluation schedule of a flat node."""

    def __init__(self, node):
        if node.instances:
            raise ValidationError(f"{node.name}: plan requires a flat node")
        decls, defs = check_signature(node)
        self.node = node
        self.types = decls
        self.defs = defs
        self.inputs = node.input_names
        self.controllables = node.controllable_names
        deps = {}
        for name, (kind, obj) in defs.items():
            if kind == "equation":
                deps[name] = free_vars(obj.expr)
            elif kind == "memory":
                deps[name] = set()
            elif kind == "mode":
                aut = node.automata[obj]
                deps[name] = set().union(*(free_vars(e) for m in aut.modes for n, e in m.equations if n == name))
            elif kind == "emit":
                aut = node.automata[obj]
                d = {("fire", obj)}
                for m in aut.modes:
                    for t in m.transitions:
                        for n, e in t.emits:
                            if n == name:
                                d |= free_vars(e)
                deps[name] = d
        for k, aut in enumerate(node.automata):
            deps[("fire", k)] = set().union(set(), *(free_vars(t.guard) for m in aut.modes for t in m.transitions))
        for name in self.inputs + self.controllables:
            deps[name] = set()
        self.deps = deps
        self.deps_of_memory_next = {m.name: free_vars(m.next) for m in node.memories}
        self.order = _toposort(deps)
        self.state_determined = self._state_determined()
        self._compile()

    def _state_determined(self):
        sd = set()
        changed = True
        while changed:
            changed = False
            for name, (kind, _) in self.defs.items():
                if name in sd or kind == "emit":
                    continue
                if kind == "memory" or self.deps[name] <= sd:
                    sd.add(name)
                    changed = True
        return sd

    def _compile(self):
        node = self.node
        self.mode_index = [{m.name: i for i, m in enumerate(a.modes)} for a in node.automata]
        steps = []
        for item in self.order:
            if isinstance(item, tuple):
                k = item[1]
                aut = node.automata[k]
                per_mode = [[(compile_expr(t.guard), self.mode_index[k][t.target]) for t in m.transitions]
                            for m in aut.modes]
                steps.append(("fire", k, per_mode))
                continue
            if item in self.inputs or item in self.controllables:
                continue
            kind, obj = self.defs[item]
            if kind == "equation":
                steps.append(("eq", item, compile_expr(obj.expr)))
            elif kind == "memory":
                steps.append(("mem", item, None))
            elif kind == "mode":
                aut = node.automata[obj]
                fns = [compile_expr(dict(m.equations)[item]) for m in aut.modes]
                steps.append(("mode", item, (obj, fns)))
            elif kind == "emit":
                aut = node.automata[obj]
                table = {}
                for i, m in enumerate(aut.modes):
                    for j, t in enumerate(m.transitions):
                        for n, e in t.emits:
                            if n == item:
                                table[(i, j)] = compile_expr(e)
                steps.append(("emit", item, (obj, table)))
        self.steps = steps
        self.sd_steps = [s for s in steps if s[0] != "fire" and s[1] in self.state_determined]
        self.mem_next = [(m.name, compile_expr(m.next)) for m in node.memories]

    def initial_state(self):
        return ProgramState(tuple(a.modes[0].name for a in self.node.automata),
                            tuple((m.name, m.init) for m in self.node.memories))

    def run(self, state, env):
        """Evaluate every flow in place in `env`; return (env, fired per automaton)."""
        modes = [self.mode_index[k][name] for k, name in enumerate(state.modes)]
        mems = dict(state.memories)
        fired = [-1] * len(modes)
        for kind, name, data in self.steps:
            if kind == "eq":
                env[name] = data(env)
            elif kind == "mode":
                k, fns = data
                env[name] = fns[modes[k]](env)
            elif kind == "fire":
                for j, (g, _) in enumerate(data[modes[name]]):
                    if g(env):
                        fired[name] = j
                        break
            elif kind == "emit":
                k, table = data
                f = table.get((modes[k], fired[k]))
                env[name] = bool(f(env)) if f is not None else False
            else:
                env[name] = mems[name]
        return env, modes, fired

    def next_state(self, modes, fired, env):
        names = []
        for k, aut in enumerate(self.node.automata):
            m = modes[k]
            if fired[k] >= 0:
                names.append(aut.modes[m].transitions[fired[k]].target)
            else:
                names.append(aut.modes[m].name)
        return ProgramState(tuple(names), tuple((n, f(env)) for n, f in self.mem_next))

    def state_env(self, state):
        """Values of the state-determined flows in configuration `state`."""
        modes = [self.mode_index[k][name] for k, name in enumerate(state.modes)]
        mems = dict(state.memories)
        env = {}
        for kind, name, data in self.sd_steps:
            if kind == "eq":
                env[name] = data(env)
            elif kind == "mode":
                k, fns = data
                env[name] = fns[modes[k]](env)
            else:
                env[name] = mems[name]
        return env


def _toposort(deps):
    order = []
    state = {}
    for root in deps:
        if state.get(root) == 2:
            continue
        stack = [(root, iter(sorted(deps[root], key=str)))]
        state[root] = 1
        path = [root]
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[v] = 2
                order.append(v)
                continue
            if nxt not in deps:
                continue
            st = state.get(nxt)
            if st == 1:
                i = path.index(nxt)
                cyc = [str(x if not isinstance(x, tuple) else f"<transitions of automaton {x[1]}>")
                       for x in path[i:] + [nxt]]
                raise InstantaneousCycle(cyc)
            if st is None:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(deps[nxt], key=str))))
    return order
