"""Flattening of hierarchical nodes into a single lockstep node."""
from __future__ import annotations

from collections import Counter

from ..errors import WiringError
from .expr import Var, rename


def _rename_aut(aut, mapping):
    from .node import Automaton, Mode, Transition

    modes = []
    for m in aut.modes:
        eqs = tuple((mapping[n], rename(e, mapping)) for n, e in m.equations)
        trans = tuple(
            Transition(rename(t.guard, mapping), t.target,
                       tuple((mapping[n], rename(e, mapping)) for n, e in t.emits))
            for t in m.transitions)
        modes.append(Mode(m.name, eqs, trans))
    return Automaton(tuple(modes))


def compose(parent):
    """Return the flat node equivalent to `parent` (own automata first, then instances in order).

    Sub-node flows are prefixed ``<callee><k>__`` where k counts instances of that callee.
    Sub-node inputs become local equations bound to the argument expressions.
    """
    from .node import Decl, Equation, Memory, Node, check_signature

    check_signature(parent)
    locals_ = list(parent.locals)
    equations = list(parent.equations)
    memories = list(parent.memories)
    automata = list(parent.automata)
    taken = {d.name for d in parent.inputs + parent.outputs + parent.locals + parent.step_inputs}
    counts = Counter()
    for inst in parent.instances:
        sub = inst.node.flat
        if sub.contract is not None:
            raise WiringError(f"{parent.name}: instance of {sub.name!r} carries a contract")
        k = counts[sub.name]
        counts[sub.name] += 1
        prefix = f"{sub.name}{k}__"
        mapping = {}
        for d in sub.inputs + sub.locals:
            mapping[d.name] = prefix + d.name
        for d, r in zip(sub.outputs, inst.results):
            mapping[d.name] = r if r is not None else prefix + d.name
        for d in sub.inputs:
            new = mapping[d.name]
            if new in taken:
                raise WiringError(f"{parent.name}: generated flow name {new!r} collides with a declared flow")
            taken.add(new)
            locals_.append(Decl(new, d.type))
        for a, d in zip(inst.args, sub.inputs):
            equations.append(Equation(mapping[d.name], a))
        for d in sub.locals:
            new = mapping[d.name]
            if new in taken:
                raise WiringError(f"{parent.name}: generated flow name {new!r} collides with a declared flow")
            taken.add(new)
            locals_.append(Decl(new, d.type))
        for d, r in zip(sub.outputs, inst.results):
            if r is None:
                new = mapping[d.name]
                if new in taken:
                    raise WiringError(f"{parent.name}: generated flow name {new!r} collides with a declared flow")
                taken.add(new)
                locals_.append(Decl(new, d.type))
        for eq in sub.equations:
            equations.append(Equation(mapping[eq.name], rename(eq.expr, mapping)))
        for mem in sub.memories:
            memories.append(Memory(mapping[mem.name], mem.init, rename(mem.next, mapping)))
        for aut in sub.automata:
            automata.append(_rename_aut(aut, mapping))
    return Node(parent.name, parent.inputs, parent.outputs, tuple(locals_), tuple(equations),
                tuple(memories), tuple(automata), (), parent.contract)


__all__ = ["compose", "Var"]
