"""Behaviour models: tasks, lifecycles, FIFOs, PE availability, placement, cost, async commands."""
from __future__ import annotations

from ..synchro.expr import FALSE, TRUE, Const, add, and_, eq, ite, lit, mul, not_, or_, var
from ..synchro.node import Automaton, Contract, Controllable, Decl, Equation, Instance, Mode, Node, Transition
from ..synchro.types import BOOL, INT, PEID


def _bools(*names):
    return tuple(Decl(n, BOOL) for n in names)


def delayable_node():
    r, c, e = var("r"), var("c"), var("e")
    aut = Automaton((
        Mode("Idle", (("a", FALSE), ("s", and_(r, c))),
             (Transition(and_(r, c), "Active"), Transition(and_(r, not_(c)), "Wait"))),
        Mode("Wait", (("a", FALSE), ("s", c)), (Transition(c, "Active"),)),
        Mode("Active", (("a", TRUE), ("s", FALSE)), (Transition(e, "Idle"),)),
    ))
    return Node("delayable", inputs=_bools("r", "c", "e"), outputs=_bools("a", "s"), automata=(aut,))


def twotasks_node():
    d = delayable_node()
    contract = Contract(not_(and_(var("a1"), var("a2"))),
                        (Controllable("c1", BOOL, TRUE), Controllable("c2", BOOL, TRUE)))
    return Node(
        "twotasks",
        inputs=_bools("r1", "e1", "r2", "e2"),
        outputs=_bools("a1", "s1", "a2", "s2"),
        instances=(Instance(d, (var("r1"), var("c1"), var("e1")), ("a1", "s1")),
                   Instance(d, (var("r2"), var("c2"), var("e2")), ("a2", "s2"))),
        contract=contract,
    )


def lifecycle_node():
    """Stopped / Running / Safe-stopping; `fe` tells the input FIFO is drained."""
    ch, fe, s = var("ch"), var("fe"), var("s")
    aut = Automaton((
        Mode("S", (("run", FALSE), ("disc", TRUE)),
             (Transition(ch, "R", (("start", TRUE), ("connect", TRUE))),)),
        Mode("R", (("run", TRUE), ("disc", FALSE)),
             (Transition(or_(s, and_(ch, fe)), "S", (("stop", TRUE), ("disconnect", TRUE))),
              Transition(and_(ch, not_(fe)), "SS", (("disconnect", TRUE),)))),
        Mode("SS", (("run", TRUE), ("disc", TRUE)),
             (Transition(or_(fe, s), "S", (("stop", TRUE),)),)),
    ))
    return Node("lifecycle", inputs=_bools("ch", "fe", "s"),
                outputs=_bools("run", "disc", "start", "stop", "connect", "disconnect"), automata=(aut,))


def fifo_node():
    f = var("f")
    aut = Automaton((
        Mode("FE", (("full", FALSE),), (Transition(f, "FF"),)),
        Mode("FF", (("full", TRUE),), (Transition(not_(f), "FE"),)),
    ))
    return Node("fifo", inputs=_bools("f"), outputs=_bools("full"), automata=(aut,))


def proc_node():
    dis = var("dis")
    aut = Automaton((
        Mode("ON", (("on", TRUE),), (Transition(dis, "OFF"),)),
        Mode("OFF", (("on", FALSE),), (Transition(not_(dis), "ON"),)),
    ))
    return Node("proc", inputs=_bools("dis"), outputs=_bools("on"), automata=(aut,))


def position_node(pe_count=4):
    """Placement of one component; controllables (a, b) select the target PE, a being the high bit."""
    if pe_count not in (2, 4):
        raise ValueError("pe_count must be 2 or 4")
    bits = ("a", "b") if pe_count == 4 else ("a",)
    modes = []
    for k in range(pe_count):
        trans = []
        for t in range(pe_count):
            if t == k:
                continue
            conds = []
            for i, b in enumerate(bits):
                bit = (t >> (len(bits) - 1 - i)) & 1
                conds.append(var(b) if bit else not_(var(b)))
            trans.append(Transition(and_(*conds), f"PE{t}", ((f"mig{t}", TRUE),)))
        modes.append(Mode(f"PE{k}", (("pos", lit(PEID.symbols[k], PEID)),), tuple(trans)))
    return Node(f"position{pe_count}" if pe_count != 4 else "position",
                inputs=_bools(*bits),
                outputs=(Decl("pos", PEID),) + _bools(*(f"mig{t}" for t in range(pe_count))),
                automata=(Automaton(tuple(modes)),))


def cost_node(distance, pe_count=4):
    """Per-PE workload induced by one binding.

    The server PE receives f*c, the client PE receives f*distance(client, server).
    """
    posC, posS, f, c = var("posC"), var("posS"), var("f"), var("c")
    syms = PEID.symbols[:pe_count]
    eqs = []
    for i, pe in enumerate(syms):
        here = lit(pe, PEID)
        dist = Const(distance[i][pe_count - 1], INT)
        for j in range(pe_count - 2, -1, -1):
            dist = ite(eq(posS, lit(syms[j], PEID)), Const(distance[i][j], INT), dist)
        server = ite(eq(posS, here), mul(f, c), Const(0, INT))
        client = ite(eq(posC, here), mul(f, dist), Const(0, INT))
        eqs.append(Equation(f"cp{i}", add(server, client)))
    return Node("cost", inputs=(Decl("posC", PEID), Decl("posS", PEID), Decl("f", INT), Decl("c", INT)),
                outputs=tuple(Decl(f"cp{i}", INT) for i in range(pe_count)), equations=tuple(eqs))


def command_node():
    """Progress of an asynchronous command: Done / Pending until acknowledged."""
    aut = Automaton((
        Mode("D", (("pending", FALSE),), (Transition(var("do"), "P"),)),
        Mode("P", (("pending", TRUE),), (Transition(var("done"), "D"),)),
    ))
    return Node("command", inputs=_bools("do", "done"), outputs=_bools("pending"), automata=(aut,))
