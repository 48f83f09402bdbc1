import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from randmodels import composed_pair, random_node
from reactive_dcs.comanche import delayable_node, fifo_node, lifecycle_node, twotasks_node
from reactive_dcs.errors import (InstantaneousCycle, StateBudgetExceeded, TypeMismatch, UnboundFlow,
                                 ValidationError, WiringError)
from reactive_dcs.synchro import (BOOL, INT, PEID, Automaton, Contract, Controllable, Decl, Equation, Instance,
                                  Memory, Mode, Node, ProgramState, Transition, add, and_, compose,
                                  enumerate_reachable, eq, eval_expr, le, lit, mul, node_reset, node_step,
                                  not_, or_, run_sequence, state_valuation, var)
from reactive_dcs.synchro.expr import compile_expr
from reactive_dcs.synchro.types import INT_MAX

OFF = {"r": False, "c": False, "e": False}


def test_eval_boolean_identity():
    assert eval_expr(and_(lit(True), var("x")), {"x": False}) is False


def test_eval_enum_inequality():
    assert eval_expr(eq(var("pos"), lit("pe2", PEID)), {"pos": "pe1"}) is False


def test_eval_load_equation():
    # 10*200 + 10*5 = 2050
    e = le(add(mul(lit(10), lit(200)), mul(lit(10), lit(5))), lit(3000))
    assert eval_expr(e, {}) is True


def test_eval_unbound_flow():
    with pytest.raises(UnboundFlow) as info:
        eval_expr(and_(var("x"), var("y")), {"x": True})
    assert info.value.name == "y"


def test_eval_type_mismatch():
    with pytest.raises(TypeMismatch):
        eval_expr(and_(var("x"), lit(True)), {"x": 3})
    with pytest.raises(TypeMismatch):
        eval_expr(add(var("x"), lit(1)), {"x": True})


def test_arithmetic_saturates():
    assert eval_expr(add(var("x"), lit(1)), {"x": INT_MAX}) == INT_MAX
    assert eval_expr(mul(var("x"), lit(-2)), {"x": INT_MAX}) == -INT_MAX


@given(st.integers(-50, 50), st.integers(-50, 50), st.booleans())
def test_compiled_matches_reference(x, y, b):
    e = or_(le(add(var("x"), mul(lit(3), var("y"))), lit(7)), and_(var("b"), not_(eq(var("x"), var("y")))))
    env = {"x": x, "y": y, "b": b}
    assert compile_expr(e)(env) == eval_expr(e, env)


def test_reset_initial_modes():
    assert node_reset(delayable_node()).modes == ("Idle",)
    assert node_reset(lifecycle_node()).modes == ("S",)
    assert node_reset(fifo_node()).modes == ("FE",)


def test_reset_idempotent():
    n = twotasks_node()
    assert node_reset(n) == node_reset(n)


def test_delayable_steps():
    n = delayable_node()
    outs, nxt = node_step(n, ProgramState(("Idle",)), {"r": True, "c": False, "e": False})
    assert outs == {"a": False, "s": False} and nxt.modes == ("Wait",)
    outs, nxt = node_step(n, ProgramState(("Wait",)), {"r": False, "c": True, "e": False})
    assert outs == {"a": False, "s": True} and nxt.modes == ("Active",)
    outs, nxt = node_step(n, ProgramState(("Active",)), OFF)
    assert outs == {"a": True, "s": False} and nxt.modes == ("Active",)


def test_delayable_stream_table():
    r = [0, 1, 0, 0, 0, 0, 0]
    c = [0, 0, 1, 0, 0, 0, 0]
    e = [0, 0, 0, 0, 0, 1, 0]
    seq = [{"r": bool(a), "c": bool(b), "e": bool(d)} for a, b, d in zip(r, c, e)]
    outs, _ = run_sequence(delayable_node(), seq)
    assert [int(o["a"]) for o in outs] == [0, 0, 0, 1, 1, 1, 0]
    assert [int(o["s"]) for o in outs] == [0, 0, 1, 0, 0, 0, 0]


def test_step_rejects_missing_and_ill_typed_inputs():
    n = delayable_node()
    s = node_reset(n)
    with pytest.raises(UnboundFlow):
        node_step(n, s, {"r": True, "c": False})
    with pytest.raises(TypeMismatch):
        node_step(n, s, {"r": 1, "c": False, "e": False})
    with pytest.raises(UnboundFlow):
        node_step(n, s, {**OFF, "zz": True})


def test_step_requires_controllables():
    n = twotasks_node()
    with pytest.raises(UnboundFlow) as info:
        node_step(n, node_reset(n), {"r1": True, "e1": False, "r2": False, "e2": False, "c1": True})
    assert info.value.name == "c2"


def test_first_true_guard_wins():
    aut = Automaton((Mode("A", (("o", lit(False)),), (Transition(var("x"), "B"), Transition(var("x"), "C"))),
                     Mode("B", (("o", lit(True)),)), Mode("C", (("o", lit(True)),))))
    n = Node("overlap", inputs=(Decl("x", BOOL),), outputs=(Decl("o", BOOL),), automata=(aut,))
    _, nxt = node_step(n, node_reset(n), {"x": True})
    assert nxt.modes == ("B",)


def test_memory_fby():
    n = Node("acc", inputs=(Decl("x", BOOL),), outputs=(Decl("y", BOOL),), locals=(Decl("k", BOOL),),
             equations=(Equation("y", var("k")),), memories=(Memory("k", False, or_(var("x"), var("k"))),))
    outs, _ = run_sequence(n, [{"x": False}, {"x": True}, {"x": False}, {"x": False}])
    assert [o["y"] for o in outs] == [False, False, True, True]


def test_instantaneous_cycle_rejected():
    n = Node("loop", inputs=(Decl("x", BOOL),), outputs=(Decl("a", BOOL), Decl("b", BOOL)),
             equations=(Equation("a", and_(var("x"), var("b"))), Equation("b", var("a"))))
    with pytest.raises(InstantaneousCycle) as info:
        node_reset(n)
    assert set(info.value.cycle) >= {"a", "b"}


def test_memory_breaks_cycle():
    n = Node("ok", inputs=(Decl("x", BOOL),), outputs=(Decl("a", BOOL),), locals=(Decl("k", BOOL),),
             equations=(Equation("a", and_(var("x"), var("k"))),), memories=(Memory("k", True, var("a")),))
    node_reset(n)


def test_double_definition_rejected():
    n = Node("dup", inputs=(Decl("x", BOOL),), outputs=(Decl("a", BOOL),),
             equations=(Equation("a", var("x")), Equation("a", not_(var("x")))))
    with pytest.raises(ValidationError):
        node_reset(n)


def test_undefined_output_rejected():
    n = Node("undef", inputs=(Decl("x", BOOL),), outputs=(Decl("a", BOOL), Decl("b", BOOL)),
             equations=(Equation("a", var("x")),))
    with pytest.raises(ValidationError):
        node_reset(n)


def test_ill_typed_equation_rejected():
    n = Node("bad", inputs=(Decl("x", BOOL),), outputs=(Decl("a", INT),), equations=(Equation("a", var("x")),))
    with pytest.raises(ValidationError):
        node_reset(n)


def test_enforce_on_pulse_rejected():
    life = lifecycle_node()
    n = Node("pulsed", inputs=(Decl("fe", BOOL),),
             outputs=(Decl("start", BOOL),), locals=tuple(Decl(x, BOOL) for x in
                                                          ("run", "disc", "stop", "connect", "disconnect")),
             instances=(Instance(life, (var("ch"), var("fe"), lit(False)),
                                 ("run", "disc", "start", "stop", "connect", "disconnect")),),
             contract=Contract(not_(var("start")), (Controllable("ch", BOOL, lit(False)),)))
    with pytest.raises(ValidationError):
        node_reset(n)


def test_wiring_arity_rejected():
    d = delayable_node()
    n = Node("w", inputs=(Decl("r", BOOL),), outputs=(Decl("a", BOOL), Decl("s", BOOL)),
             instances=(Instance(d, (var("r"), var("r")), ("a", "s")),))
    with pytest.raises(WiringError):
        node_reset(n)


def test_compose_twotasks():
    flat = compose(twotasks_node())
    assert len(flat.automata) == 2 and not flat.instances
    assert len(enumerate_reachable(twotasks_node())) == 9


def test_identity_composition():
    d = delayable_node()
    wrap = Node("wrap", inputs=d.inputs, outputs=d.outputs,
                instances=(Instance(d, (var("r"), var("c"), var("e")), ("a", "s")),))
    rng = random.Random(7)
    seq = [{k: rng.random() < 0.5 for k in "rce"} for _ in range(200)]
    assert run_sequence(wrap, seq)[0] == run_sequence(d, seq)[0]


def test_comanche_flat_outputs(comanche_sync):
    model = comanche_sync[0]
    outs = set(model.node.flat.output_names)
    for tag in ("H2", "L"):
        assert {f"c_start{tag}", f"c_stop{tag}", f"c_connect{tag}", f"c_diconnect{tag}"} <= outs
    assert {f"c_mig{k}{t}" for k in range(1, 5) for t in ("f1", "f2", "d")} <= outs


def test_reachable_counts():
    assert len(enumerate_reachable(delayable_node())) == 3
    assert len(enumerate_reachable(fifo_node())) == 2
    g = enumerate_reachable(twotasks_node())
    assert len(g) == 9
    assert {s.modes for s in g.states} == set(itertools.product(("Idle", "Wait", "Active"), repeat=2))


def test_reachable_budget():
    with pytest.raises(StateBudgetExceeded):
        enumerate_reachable(twotasks_node(), budget=4)


def _brute_reachable(node):
    """Breadth-first closure with node_step only."""
    names = [d.name for d in node.step_inputs]
    seen = {node_reset(node)}
    todo = list(seen)
    while todo:
        s = todo.pop()
        for bits in itertools.product((False, True), repeat=len(names)):
            _, nxt = node_step(node, s, dict(zip(names, bits)))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_reachable_matches_brute_force(seed):
    n = random_node(seed, contract=False)
    assert set(enumerate_reachable(n).states) == _brute_reachable(n)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_determinism(seed, run):
    n = random_node(seed)
    rng = random.Random(run)
    names = [d.name for d in n.step_inputs]
    seq = [{k: rng.random() < 0.5 for k in names} for _ in range(30)]
    assert run_sequence(n, seq) == run_sequence(n, seq)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_pulse_default(seed, run):
    from reactive_dcs.synchro.interp import node_react
    n = random_node(seed)
    pulses = [d.name for d in n.outputs if d.name.startswith("p")]
    rng = random.Random(run)
    names = [d.name for d in n.step_inputs]
    s = node_reset(n)
    for _ in range(40):
        u = {k: rng.random() < 0.5 for k in names}
        env, fired, nxt = node_react(n, s, u)
        for p in pulses:
            j = int(p[1:])
            mode = next(m for m in n.automata[j].modes if m.name == s.modes[j])
            emitted = fired[j] >= 0 and any(name == p for name, _ in mode.transitions[fired[j]].emits)
            assert env[p] == emitted
        s = nxt


def test_composition_homomorphism():
    """Flat stepping equals stepping both instances and merging their outputs."""
    total = 0
    for seed in range(20):
        parent, a, b, (args_a, res_a), (args_b, res_b) = composed_pair(seed)
        rng = random.Random(seed)
        for _ in range(50):
            sp, sa, sb = node_reset(parent), node_reset(a), node_reset(b)
            for _ in range(50):
                u = {d.name: rng.random() < 0.5 for d in parent.inputs}
                outs, sp = node_step(parent, sp, u)
                oa, sa = node_step(a, sa, {d.name: eval_expr(x, u) for d, x in zip(a.inputs, args_a)})
                env = {**u, **{r: oa[d.name] for r, d in zip(res_a, a.outputs)}}
                ob, sb = node_step(b, sb, {d.name: eval_expr(x, env) for d, x in zip(b.inputs, args_b)})
                merged = {r: oa[d.name] for r, d in zip(res_a, a.outputs)}
                merged.update({r: ob[d.name] for r, d in zip(res_b, b.outputs)})
                assert outs == merged
            total += 1
    assert total == 1000


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_replay(seed, run):
    n = random_node(seed)
    rng = random.Random(run)
    names = [d.name for d in n.step_inputs]
    seq = [{k: rng.random() < 0.5 for k in names} for _ in range(40)]
    recorded, _ = run_sequence(n, seq)
    s = node_reset(n)
    for u, expect in zip(seq, recorded):
        o, s = node_step(n, s, u)
        assert o == expect


def test_state_valuation_reads_configuration():
    n = twotasks_node()
    env = state_valuation(n, ProgramState(("Active", "Idle")))
    assert env["a1"] is True and env["a2"] is False
