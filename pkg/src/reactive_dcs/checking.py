"""Randomized closed-loop checking of a synthesized controller."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .synchro.expr import and_, compile_expr, eval_expr, implies, not_, var
from .synchro.interp import node_reset, node_step, state_valuation
from .synchro.types import BOOL, domain


@dataclass
class Violation:
    run: int
    seed: int
    step: int
    objectives: tuple

    def __str__(self):
        names = ", ".join(self.objectives)
        return f"run {self.run} (seed {self.seed}) step {self.step}: {names} violated"


@dataclass
class CheckResult:
    runs: int
    steps: int
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def objectives_of(model_or_node):
    """Named predicates checked on every post-transition configuration."""
    node = getattr(model_or_node, "node", model_or_node)
    if hasattr(model_or_node, "async_mode"):
        if model_or_node.async_mode:
            return [("pend", var("pend")), ("pe_av", var("pe_av")), ("wl_ba", var("wl_ba")),
                    ("qos_exc_unless_pending", implies(not_(var("pen_sS2")), and_(var("qos"), var("exc"))))]
        return [(n, var(n)) for n in ("pe_av", "wl_ba", "qos", "exc")]
    if node.contract is None:
        return []
    return [("enforce", node.contract.enforce)]


class DefaultsController:
    """Negative control: always plays the default controllable valuation, ignoring the winning set."""

    def __init__(self, node):
        self.node = node

    def select(self, state, u):
        env = state_valuation(self.node, state)
        return {c.name: bool(eval_expr(c.default, env)) for c in self.node.contract.controllables}


def random_inputs(node, rng):
    return {d.name: (rng.getrandbits(1) == 1 if d.type == BOOL else rng.choice(domain(d.type))) for d in node.inputs}


def check_controller(model_or_node, controller, runs=100, steps=200, seed=0, stop_at_first=True):
    node = getattr(model_or_node, "node", model_or_node)
    objectives = [(name, compile_expr(e)) for name, e in objectives_of(model_or_node)]
    result = CheckResult(runs, steps)
    init = node_reset(node)
    for r in range(runs):
        run_seed = seed + r
        rng = random.Random(run_seed)
        state = init
        for k in range(1, steps + 1):
            u = random_inputs(node, rng)
            ctl = controller.select(state, u) if node.contract is not None else {}
            _, state = node_step(node, state, {**u, **ctl})
            env = state_valuation(node, state)
            bad = tuple(name for name, f in objectives if not f(env))
            if bad:
                result.violations.append(Violation(r, run_seed, k, bad))
                break
        if result.violations and stop_at_first:
            break
    return result
