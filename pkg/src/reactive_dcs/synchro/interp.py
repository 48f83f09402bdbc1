"""Reset/step semantics of validated nodes."""
from __future__ import annotations

from ..errors import TypeMismatch, UnboundFlow, ValidationError
from .node import ProgramState, validate
from .types import check_value


def checked_plan(node):
    plan = node.__dict__.get("_checked_plan")
    if plan is None:
        plan = validate(node)
        object.__setattr__(node, "_checked_plan", plan)
    return plan


def node_reset(node) -> ProgramState:
    return checked_plan(node).initial_state()


def _check_inputs(plan, node, inputs):
    names = node.input_names + node.controllable_names
    for n in names:
        if n not in inputs:
            raise UnboundFlow(n, f"input {n!r} is not bound")
        if not check_value(inputs[n], plan.types[n]):
            raise TypeMismatch(f"input {n!r} = {inputs[n]!r} is not a {plan.types[n]}")
    if len(inputs) != len(names):
        extra = sorted(set(inputs) - set(names))
        raise UnboundFlow(extra[0], f"{node.name}: {extra[0]!r} is not an input")


def _check_state(plan, state):
    if not isinstance(state, ProgramState) or len(state.modes) != len(plan.mode_index):
        raise ValidationError("program state does not match the node")
    for k, m in enumerate(state.modes):
        if m not in plan.mode_index[k]:
            raise ValidationError(f"unknown mode {m!r} for automaton {k}")


def node_react(node, state, inputs):
    """Full reaction: (valuation of every flow, fired transition index per automaton, next state)."""
    plan = checked_plan(node)
    _check_state(plan, state)
    _check_inputs(plan, node, inputs)
    env, modes, fired = plan.run(state, dict(inputs))
    return env, fired, plan.next_state(modes, fired, env)


def node_step(node, state, inputs):
    env, _, nxt = node_react(node, state, inputs)
    return {o: env[o] for o in node.output_names}, nxt


def state_valuation(node, state):
    """Values of the flows that depend on the configuration only."""
    plan = checked_plan(node)
    _check_state(plan, state)
    return plan.state_env(state)


def run_sequence(node, inputs_seq, state=None):
    """Replay a list of input valuations from reset (or `state`); return the output list."""
    if state is None:
        state = node_reset(node)
    outs = []
    for inp in inputs_seq:
        o, state = node_step(node, state, inp)
        outs.append(o)
    return outs, state
