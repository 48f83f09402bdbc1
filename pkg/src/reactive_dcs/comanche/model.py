"""Composed Comanche model with its reconfiguration objectives."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from ..synchro.expr import FALSE, Const, add, and_, eq, implies, le, lit, not_, or_, var
from ..synchro.node import Automaton, Contract, Controllable, Decl, Equation, Instance, Node
from ..synchro.types import BOOL, INT, PEID
from .config import (COMMAND_TAGS, DEFAULT_CONFIG, FIFO_INPUTS, LIFECYCLE_MANAGED, MONITORED, TAGS)
from .library import command_node, cost_node, fifo_node, lifecycle_node, position_node, proc_node

SUFFIX = {"FS1": "S1", "FS2": "S2", "L": "L", "D": "D", "F": "F", "A": "A"}
EMPTY_INPUTS = {"FS2": "fifoH2E", "L": "fifoL2E"}


@dataclass
class ComancheModel:
    node: Node
    config: object
    async_mode: bool
    # output flow -> (verb, component, target pe or None)
    signals: dict = field(default_factory=dict)
    objectives: tuple = ()
    done_inputs: dict = field(default_factory=dict)  # output flow -> done input

    @property
    def name(self):
        return self.node.name


def _mig_name(k, comp):
    return f"c_mig{k + 1}{TAGS[comp]}"


def comanche_main(config=DEFAULT_CONFIG, async_mode=False):
    config.validate()
    p, t = config.platform, config.topology
    if tuple(sorted(t.lifecycle_managed)) != tuple(sorted(LIFECYCLE_MANAGED)):
        raise ConfigError("the model needs lifecycles for exactly FS2 and L")
    for c in ("FS1", "FS2", "L"):
        if c not in t.components:
            raise ConfigError(f"the model needs component {c}")
    pes = p.pes
    n = p.pe_count
    place = t.place
    fe_source = config.model.fe_source

    inputs = ["disable", "fifoH1F", "fifoH2F", "fifoL2F", "addlog", "c_startH2_done"]
    if fe_source == "empty":
        inputs += [EMPTY_INPUTS["FS2"], EMPTY_INPUTS["L"]]
    outputs, signals = [], {}
    for comp in ("FS2", "L"):
        tag = COMMAND_TAGS[comp]
        for verb, name in (("start", f"c_start{tag}"), ("stop", f"c_stop{tag}"),
                           ("connect", f"c_connect{tag}"), ("disconnect", f"c_diconnect{tag}")):
            outputs.append(name)
            signals[name] = (verb, comp, None)
    mig_order = [c for c in ("FS1", "FS2", "D") if c in t.components]
    mig_order += [c for c in t.components if c in t.migratable and c not in mig_order]
    for comp in mig_order:
        for k in range(n):
            name = _mig_name(k, comp)
            outputs.append(name)
            signals[name] = ("migrate", comp, pes[k])

    locals_, equations, instances = [], [], []

    def local(name, typ=BOOL):
        locals_.append(Decl(name, typ))
        return name

    # fifo state per monitored server interface
    fifo = fifo_node()
    for comp in MONITORED:
        s = SUFFIX[comp]
        instances.append(Instance(fifo, (var(FIFO_INPUTS[comp]),), (local(f"full_{s}"),)))

    # lifecycles
    life = lifecycle_node()
    for comp in ("L", "FS2"):
        s = SUFFIX[comp]
        tag = COMMAND_TAGS[comp]
        fe = local(f"fe_{s}")
        if fe_source == "full":
            equations.append(Equation(fe, var(f"full_{s}")))
        elif fe_source == "below":
            equations.append(Equation(fe, not_(var(FIFO_INPUTS[comp]))))
        else:
            equations.append(Equation(fe, var(EMPTY_INPUTS[comp])))
        instances.append(Instance(life, (var(f"ch_{s}"), var(fe), var(f"s_{s}")),
                                  (local(f"run_{s}"), local(f"disc_{s}"), f"c_start{tag}", f"c_stop{tag}",
                                   f"c_connect{tag}", f"c_diconnect{tag}")))

    # processing element availability
    proc = proc_node()
    for i, pe in enumerate(pes):
        dis = var("disable") if pe == p.disable_pe else FALSE
        instances.append(Instance(proc, (dis,), (local(f"on_{pe}"),)))

    # placement
    position = position_node(n)
    bits = ("a", "b") if n == 4 else ("a",)
    controllables = []
    for comp in t.components:
        s = SUFFIX[comp]
        pos = local(f"pos_{s}", PEID)
        if comp in t.migratable:
            args = tuple(var(f"{b}_{s}") for b in bits)
            migs = tuple(_mig_name(k, comp) for k in range(n))
            instances.append(Instance(position, args, (pos,) + migs))
        else:
            equations.append(Equation(pos, lit(place[comp], PEID)))
            for k in range(n):
                name = _mig_name(k, comp)
                if name in signals:
                    equations.append(Equation(name, FALSE))
    # initial placement: position automata start in PE0, so rotate their mode order
    instances = [_placed(inst, place, t, SUFFIX) for inst in instances]

    for comp in t.components:
        if comp not in t.migratable:
            continue
        s = SUFFIX[comp]
        pos = var(f"pos_{s}")
        if n == 4:
            controllables.append(Controllable(f"a_{s}", BOOL, or_(eq(pos, lit("pe2", PEID)), eq(pos, lit("pe3", PEID)))))
            controllables.append(Controllable(f"b_{s}", BOOL, or_(eq(pos, lit("pe1", PEID)), eq(pos, lit("pe3", PEID)))))
        else:
            controllables.append(Controllable(f"a_{s}", BOOL, eq(pos, lit("pe1", PEID))))
    for comp in ("FS2", "L"):
        s = SUFFIX[comp]
        controllables.append(Controllable(f"ch_{s}", BOOL, FALSE))
        controllables.append(Controllable(f"s_{s}", BOOL, FALSE))
    order = {c: i for i, c in enumerate(("S1", "S2", "D", "F", "A", "L"))}
    pos_ctl = sorted([c for c in controllables if c.name[:2] in ("a_", "b_")],
                     key=lambda c: (order[c.name[2:]], c.name[0]))
    controllables = pos_ctl + [c for c in controllables if c not in pos_ctl]

    # workload
    cost = cost_node(p.distance_matrix(), n)
    by_pe = {pe: [] for pe in pes}
    for b in t.bindings:
        cs = [local(f"w_{b.client}_{b.interface}_{pe}", INT) for pe in pes]
        for pe, c in zip(pes, cs):
            by_pe[pe].append(var(c))
        instances.append(Instance(cost, (var(f"pos_{SUFFIX[b.client]}"), var(f"pos_{SUFFIX[b.server]}"),
                                         Const(b.f, INT), Const(b.c, INT)), tuple(cs)))
    for i, pe in enumerate(pes):
        equations.append(Equation(local(f"wl_{pe}", INT), add(*by_pe[pe])))

    # objectives
    comps_pos = [var(f"pos_{SUFFIX[c]}") for c in t.components]
    pe_av = and_(*[or_(var(f"on_{pe}"), not_(or_(*[eq(x, lit(pe, PEID)) for x in comps_pos]))) for pe in pes])
    wl_ba = and_(*[le(var(f"wl_{pe}"), Const(p.max_load[i], INT)) for i, pe in enumerate(pes)])
    qos = and_(implies(not_(var("full_S1")), var("disc_S2")),
               implies(and_(not_(var("run_L")), var("full_S1")), and_(var("run_S2"), not_(var("disc_S2")))))
    exc = implies(and_(var("run_L"), not_(var("disc_L"))), var("disc_S2"))
    for name, e in (("pe_av", pe_av), ("wl_ba", wl_ba), ("qos", qos), ("exc", exc)):
        equations.append(Equation(local(name), e))
    done_inputs = {}
    if async_mode:
        instances.append(Instance(command_node(), (var("c_startH2"), var("c_startH2_done")), (local("pen_sS2"),)))
        equations.append(Equation(local("pend"), not_(and_(var("pen_sS2"), var("disc_S2")))))
        enforce = and_(var("pend"), var("pe_av"), var("wl_ba"),
                       implies(not_(var("pen_sS2")), and_(var("qos"), var("exc"))))
        objectives = ("pend", "pe_av", "wl_ba", "qos", "exc")
        done_inputs["c_startH2"] = "c_startH2_done"
    else:
        enforce = and_(var("pe_av"), var("wl_ba"), var("qos"), var("exc"))
        objectives = ("pe_av", "wl_ba", "qos", "exc")
    node = Node(
        "comanche_async" if async_mode else "comanche_sync",
        inputs=tuple(Decl(i, BOOL) for i in inputs),
        outputs=tuple(Decl(o, BOOL) for o in outputs),
        locals=tuple(locals_),
        equations=tuple(equations),
        instances=tuple(instances),
        contract=Contract(enforce, tuple(controllables)),
    )
    return ComancheModel(node, config, async_mode, signals, objectives, done_inputs)


def _placed(inst, place, topo, suffix):
    """Position instances start in their component's initial PE."""
    if not inst.node.name.startswith("position"):
        return inst
    comp = next(c for c in topo.components if inst.results[0] == f"pos_{suffix[c]}")
    return Instance(position_at(inst.node, place[comp]), inst.args, inst.results)


def position_at(node, pe):
    """Copy of a position node whose initial mode is `pe`."""
    aut = node.automata[0]
    k = PEID.symbols.index(pe)
    modes = aut.modes[k:] + aut.modes[:k]
    return Node(f"{node.name}_{pe}", node.inputs, node.outputs, node.locals, node.equations, node.memories,
                (Automaton(modes),), node.instances, node.contract)
