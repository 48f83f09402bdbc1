"""Discrete-event platform: PEs with FIFO schedulers, message-passing components, monitors."""
from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field

from .comanche.config import FIFO_INPUTS, MONITORED
from .comanche.model import EMPTY_INPUTS
from .errors import ConfigError
from .manager import manager_tick, notify_done, set_event
from .synchro.types import format_value

log = logging.getLogger(__name__)


@dataclass
class Scenario:
    injections: list = field(default_factory=list)  # (tick, event, value), ticks non-decreasing
    requests: object = "none"  # "none" | int rate | list of (a, b, n) | ("random", p)
    latency: dict = field(default_factory=dict)
    threshold: int | None = None
    horizon: int = 20

    def requests_at(self, t, rng):
        spec = self.requests
        if spec == "none":
            return 0
        if isinstance(spec, int):
            return spec
        if isinstance(spec, tuple) and spec[0] == "random":
            return 1 if rng.random() < spec[1] else 0
        return sum(n for a, b, n in spec if a <= t <= b)


def _parse_requests(value, lineno):
    value = value.strip()
    if value == "none":
        return "none"
    if value.startswith("random:"):
        try:
            p = float(value.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"line {lineno}: bad request probability {value!r}") from None
        if not 0 <= p <= 1:
            raise ConfigError(f"line {lineno}: request probability must lie in [0, 1]")
        return ("random", p)
    if value.isdigit():
        return int(value)
    spans = []
    for part in value.split(","):
        try:
            rng, n = part.split(":")
            a, b = rng.split("-")
            spans.append((int(a), int(b), int(n)))
        except ValueError:
            raise ConfigError(f"line {lineno}: bad request span {part!r}") from None
    return spans


def parse_scenario(text):
    sc = Scenario()
    last = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("at "):
            head, _, rest = line[3:].partition(":")
            try:
                tick = int(head)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad tick {head!r}") from None
            if tick < last:
                raise ConfigError(f"line {lineno}: injections must be in non-decreasing tick order")
            last = tick
            for item in rest.split(","):
                name, eq, val = item.partition("=")
                if not eq or val.strip() not in ("0", "1"):
                    raise ConfigError(f"line {lineno}: expected EVENT=0|1, got {item.strip()!r}")
                sc.injections.append((tick, name.strip(), val.strip() == "1"))
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq:
            raise ConfigError(f"line {lineno}: expected KEY=VALUE")
        try:
            if key.startswith("latency."):
                sc.latency[key.split(".", 1)[1]] = int(val)
            elif key == "threshold":
                sc.threshold = int(val)
            elif key == "horizon":
                sc.horizon = int(val)
            elif key == "requests":
                sc.requests = _parse_requests(val, lineno)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs an integer") from None
    return sc


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


@dataclass
class SimComponent:
    name: str
    pe: str
    started: bool
    service: int


@dataclass
class SimPe:
    id: str
    available: bool = True
    queue: deque = field(default_factory=deque)  # (component, message id)
    running: tuple | None = None
    remaining: int = 0
    executed: list = field(default_factory=list)  # (tick, component, message)


class Sim:
    def __init__(self, model, manager, scenario=None, seed=0):
        cfg = model.config
        self.model = model
        self.config = cfg
        self.manager = manager
        self.scenario = scenario or Scenario()
        self.rng = random.Random(seed)
        self.now = 0
        self.pes = {pe: SimPe(pe) for pe in cfg.platform.pes}
        service = dict(cfg.sim.service)
        place = cfg.topology.place
        managed = set(cfg.topology.lifecycle_managed)
        self.components = {c: SimComponent(c, place[c], c not in managed, service.get(c, 1))
                           for c in cfg.topology.components}
        self.bound = {(b.client, b.interface): b.server not in managed for b in cfg.topology.bindings}
        self.latency = dict(cfg.sim.latency)
        self.latency.update(self.scenario.latency)
        self.threshold = self.scenario.threshold or cfg.sim.threshold
        self.periodic = cfg.sim.periodic
        self.in_flight = []  # (due tick, seq, command)
        self._seq = 0
        self.reported = {c: False for c in MONITORED}
        self.reported_empty = {c: True for c in EMPTY_INPUTS}
        self.rr = 0
        self.next_msg = 1
        self.created = 0
        self.served = 0
        self.done_raised = {}
        self.rows = []

    # platform queries
    def queue_length(self, comp):
        n = 0
        for pe in self.pes.values():
            n += sum(1 for owner, _ in pe.queue if owner == comp)
            if pe.running and pe.running[0] == comp:
                n += 1
        return n

    def outstanding(self):
        return sum(len(pe.queue) + (1 if pe.running else 0) for pe in self.pes.values())

    def enqueue(self, comp, msg):
        self.pes[self.components[comp].pe].queue.append((comp, msg))

    # commands
    def apply(self, cmd):
        comps = self.components
        if cmd.verb == "start":
            comps[cmd.component].started = True
        elif cmd.verb == "stop":
            comps[cmd.component].started = False
        elif cmd.verb == "bind":
            self.bound[(cmd.client, cmd.interface)] = True
        elif cmd.verb == "unbind":
            self.bound[(cmd.client, cmd.interface)] = False
        elif cmd.verb == "migrate":
            comp = comps[cmd.component]
            old = self.pes[comp.pe]
            moved = [t for t in old.queue if t[0] == cmd.component]
            old.queue = deque(t for t in old.queue if t[0] != cmd.component)
            comp.pe = cmd.pe
            self.pes[cmd.pe].queue.extend(moved)
        if cmd.done_event is not None:
            self.done_raised[cmd.id] = self.done_raised.get(cmd.id, 0) + 1
            notify_done(self.manager, cmd.id)

    def issue(self, commands):
        for cmd in commands:
            lat = self.latency.get(cmd.verb, 0)
            if lat <= 0:
                self.apply(cmd)
            else:
                self._seq += 1
                self.in_flight.append((self.now + lat, self._seq, cmd))

    # message flow
    def _route(self, comp, msg):
        topo = self.config.topology
        if comp == "F":
            targets = [b.server for b in topo.bindings if b.client == "F" and self.bound[(b.client, b.interface)]]
            for s in targets:
                self.enqueue(s, msg)
        elif comp == "A":
            for b in topo.bindings:
                if b.client != "A" or not self.bound[(b.client, b.interface)]:
                    continue
                if self.components[b.server].started:
                    self.enqueue(b.server, msg)
        elif comp == "D":
            servers = [b.server for b in topo.bindings
                       if b.client == "D" and self.bound[(b.client, b.interface)] and self.components[b.server].started]
            if servers:
                self.enqueue(servers[self.rr % len(servers)], msg)
                self.rr += 1
            else:
                self.served += 1
        else:
            self.served += 1

    def _run_pes(self):
        for pe in self.pes.values():
            if not pe.available:
                continue
            if pe.running is None:
                for i, (comp, msg) in enumerate(pe.queue):
                    if self.components[comp].started:
                        del pe.queue[i]
                        pe.running = (comp, msg)
                        pe.remaining = self.components[comp].service
                        break
            if pe.running is not None:
                pe.remaining -= 1
                pe.executed.append((self.now,) + pe.running)
                if pe.remaining <= 0:
                    comp, msg = pe.running
                    pe.running = None
                    self._route(comp, msg)

    def _monitor(self):
        buf = self.manager.buffer
        for comp in MONITORED:
            full = self.queue_length(comp) >= self.threshold
            if full != self.reported[comp]:
                self.reported[comp] = full
                set_event(buf, FIFO_INPUTS[comp], full)
        for comp, name in EMPTY_INPUTS.items():
            if name not in buf.values:
                continue
            empty = self.queue_length(comp) == 0
            if empty != self.reported_empty[comp]:
                self.reported_empty[comp] = empty
                set_event(buf, name, empty)

    def tick(self):
        self.now += 1
        t = self.now
        due = sorted(x for x in self.in_flight if x[0] <= t)
        self.in_flight = [x for x in self.in_flight if x[0] > t]
        for _, _, cmd in due:
            self.apply(cmd)
        for tick, name, value in self.scenario.injections:
            if tick == t:
                set_event(self.manager.buffer, name, value)
                if name == "disable":
                    self.pes[self.config.platform.disable_pe].available = not value
        for _ in range(self.scenario.requests_at(t, self.rng)):
            self.enqueue("F", self.next_msg)
            self.next_msg += 1
            self.created += 1
        self._run_pes()
        self._monitor()
        stepped = False
        commands = []
        buf = self.manager.buffer
        if buf.dirty or (self.periodic and t % self.periodic == 0):
            commands, _ = manager_tick(self.manager, t)
            stepped = True
            self.issue(commands)
        self._record(stepped, commands, buf)
        return self

    def _record(self, stepped, commands, buf):
        node = self.manager.node
        inputs = self.manager.last_inputs if stepped else dict(buf.values)
        outputs = self.manager.last_outputs if stepped else {}
        row = {"step": str(self.now)}
        for name in node.input_names:
            row[name] = format_bit(inputs.get(name, False))
        for name in node.output_names:
            row[name] = format_bit(outputs.get(name, False))
        row["stepped"] = format_bit(stepped)
        row["commands"] = ";".join(c.text() for c in commands) or "-"
        for comp in MONITORED:
            row[f"q_{comp}"] = str(self.queue_length(comp))
        for pe in self.pes.values():
            row[f"load_{pe.id}"] = str(len(pe.queue) + (1 if pe.running else 0))
        self.rows.append(row)


def format_bit(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    return format_value(v)


@dataclass
class Trace:
    columns: list
    rows: list
    commands: list = field(default_factory=list)

    def column(self, name):
        return [r[name] for r in self.rows]

    def pulses(self, name):
        return [i + 1 for i, r in enumerate(self.rows) if r[name] == "1"]

    def to_tsv(self):
        lines = ["\t".join(self.columns)]
        for r in self.rows:
            lines.append("\t".join(r[c] for c in self.columns))
        return "\n".join(lines) + "\n"


def sim_new(model, manager, scenario=None, seed=0):
    return Sim(model, manager, scenario, seed)


def sim_tick(sim):
    return sim.tick()


def sim_run(sim, scenario=None):
    if scenario is not None:
        sim.scenario = scenario
        sim.latency.update(scenario.latency)
        if scenario.threshold:
            sim.threshold = scenario.threshold
    while sim.now < sim.scenario.horizon:
        sim.tick()
    columns = list(sim.rows[0].keys()) if sim.rows else ["step"]
    return Trace(columns, sim.rows, list(sim.manager.log))
