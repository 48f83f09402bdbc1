"""Explicit reachable state graph of a node under all input valuations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import NonFiniteDomain, StateBudgetExceeded
from .interp import checked_plan
from .types import domain

DEFAULT_STATE_BUDGET = 5_000_000


@dataclass
class StateGraph:
    states: list
    index: dict
    input_names: tuple
    edges: list  # per state: list of (input valuation tuple, successor id)

    def __len__(self):
        return len(self.states)


def input_domain(node, overrides=None):
    overrides = overrides or {}
    names, values = [], []
    for d in node.step_inputs:
        dom = overrides.get(d.name)
        if dom is None:
            dom = domain(d.type)
        if dom is None:
            raise NonFiniteDomain(f"input {d.name!r} has type {d.type}; give it a finite domain")
        names.append(d.name)
        values.append(tuple(dom))
    return tuple(names), values


def enumerate_reachable(node, inputs_domain=None, budget=DEFAULT_STATE_BUDGET, keep_edges=True):
    plan = checked_plan(node)
    names, values = input_domain(node, inputs_domain)
    combos = list(itertools.product(*values))
    init = plan.initial_state()
    states = [init]
    index = {init: 0}
    edges = []
    i = 0
    while i < len(states):
        s = states[i]
        out = []
        for combo in combos:
            env, modes, fired = plan.run(s, dict(zip(names, combo)))
            nxt = plan.next_state(modes, fired, env)
            j = index.get(nxt)
            if j is None:
                if len(states) >= budget:
                    raise StateBudgetExceeded(f"more than {budget} reachable states")
                j = len(states)
                index[nxt] = j
                states.append(nxt)
            if keep_edges:
                out.append((combo, j))
        edges.append(out)
        i += 1
    return StateGraph(states, index, names, edges)
