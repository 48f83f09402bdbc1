"""Closed-loop manager: event receiver, synchronous program, command generator."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import UnknownCommand, UnknownEvent, ValidationError
from .synchro.interp import node_reset
from .synchro.types import default_value
from .synth.controller import controlled_step

log = logging.getLogger(__name__)

VERBS = ("instantiate", "destroy", "bind", "unbind", "start", "stop", "migrate")
_REQUIRED = {
    "instantiate": ("component",), "destroy": ("component",), "start": ("component",),
    "stop": ("component",), "bind": ("client", "interface", "server"),
    "unbind": ("client", "interface", "server"), "migrate": ("component", "pe"),
}


@dataclass(frozen=True)
class Command:
    verb: str
    component: str | None = None
    client: str | None = None
    interface: str | None = None
    server: str | None = None
    pe: str | None = None
    id: int = 0
    done_event: str | None = None

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValidationError(f"unknown command verb {self.verb!r}")
        for f in _REQUIRED[self.verb]:
            if getattr(self, f) is None:
                raise ValidationError(f"{self.verb} needs a {f}")

    @property
    def args(self):
        return tuple(getattr(self, f) for f in _REQUIRED[self.verb])

    def text(self):
        return " ".join((self.verb,) + self.args)

    def log_line(self, tick):
        return f"t={tick} {self.text()}"


class EventBuffer:
    """Last registered value of each uncontrollable input."""

    def __init__(self, decls):
        self.types = {d.name: d.type for d in decls}
        self.values = {d.name: default_value(d.type) for d in decls}
        self.dirty = False

    def set(self, name, value):
        if name not in self.values:
            raise UnknownEvent(f"undeclared event {name!r}")
        if isinstance(value, int) and not isinstance(value, bool) and value in (0, 1):
            value = bool(value)
        self.values[name] = value
        self.dirty = True
        return self

    def snapshot(self):
        self.dirty = False
        return dict(self.values)


def set_event(buffer, name, value):
    return buffer.set(name, value)


class CommandMap:
    """Output pulse -> list of command templates (dicts of Command fields without id)."""

    def __init__(self, entries=None, done_events=None):
        self.entries = dict(entries or {})
        self.done_events = dict(done_events or {})

    def expand(self, output):
        return [dict(t) for t in self.entries.get(output, ())]

    def check(self, node):
        for name in self.entries:
            if name not in node.output_names:
                raise ValidationError(f"command map refers to unknown output {name!r}")


def comanche_command_map(model):
    """Commands of the Comanche outputs; connect/disconnect cover every binding of the component."""
    topo = model.config.topology
    entries = {}
    for out, (verb, comp, pe) in model.signals.items():
        if verb in ("start", "stop"):
            entries[out] = [{"verb": verb, "component": comp}]
        elif verb in ("connect", "disconnect"):
            v = "bind" if verb == "connect" else "unbind"
            entries[out] = [{"verb": v, "client": b.client, "interface": b.interface, "server": b.server}
                            for b in topo.bindings_of(comp)]
        else:
            entries[out] = [{"verb": "migrate", "component": comp, "pe": pe}]
    return CommandMap(entries, dict(model.done_inputs))


@dataclass
class ManagerState:
    node: object
    controller: object
    command_map: CommandMap
    program: object
    buffer: EventBuffer
    tick: int = 0
    next_id: int = 1
    pending: dict = field(default_factory=dict)  # command id -> done event
    clear_after_tick: set = field(default_factory=set)
    last_inputs: dict = field(default_factory=dict)
    last_outputs: dict = field(default_factory=dict)
    log: list = field(default_factory=list)


def manager_reset(model, controller, command_map=None):
    node = getattr(model, "node", model)
    if command_map is None:
        command_map = comanche_command_map(model) if hasattr(model, "signals") else CommandMap()
    command_map.check(node)
    program = node_reset(node)
    controller.state_id(program)  # the initial configuration must be winning
    return ManagerState(node, controller, command_map, program, EventBuffer(node.inputs))


def manager_tick(state, now=None):
    """One controlled step on the buffered inputs; returns the commands to fire.

    `now` stamps the command log (defaults to the manager's own tick count).
    """
    inputs = state.buffer.snapshot()
    state.tick += 1
    outputs, state.program = controlled_step(state.node, state.controller, state.program, inputs)
    for name in state.clear_after_tick:
        state.buffer.values[name] = False
    state.clear_after_tick = set()
    commands = []
    for out in state.node.output_names:
        if not outputs[out]:
            continue
        done = state.command_map.done_events.get(out)
        for tpl in state.command_map.expand(out):
            cmd = Command(id=state.next_id, done_event=done, **tpl)
            state.next_id += 1
            if done is not None:
                state.pending[cmd.id] = done
            commands.append(cmd)
            state.log.append(cmd.log_line(state.tick if now is None else now))
    state.last_inputs, state.last_outputs = inputs, outputs
    log.debug("tick %d: %d commands", state.tick, len(commands))
    return commands, state


def notify_done(state, command_id):
    """Acknowledge a tracked command; its done event is true for the next tick only."""
    done = state.pending.pop(command_id, None)
    if done is None:
        raise UnknownCommand(f"no pending command with id {command_id}")
    state.buffer.set(done, True)
    state.clear_after_tick.add(done)
    return state.buffer
