import itertools

import pytest

from reactive_dcs.checking import check_controller
from reactive_dcs.comanche import (DEFAULT_CONFIG, command_node, comanche_main, cost_node, delayable_node,
                                   fifo_node, lifecycle_node, parse_config, position_node, proc_node, twotasks_node)
from reactive_dcs.errors import ConfigError, StateBudgetExceeded
from reactive_dcs.synchro import PEID, ProgramState, and_, enumerate_reachable, node_reset, node_step, not_, var
from reactive_dcs.synchro import free_vars, state_valuation
from reactive_dcs.synth import build_arena, synthesize

PES = PEID.symbols
DIST = DEFAULT_CONFIG.platform.distance_matrix()


def life_step(mode, ch=0, fe=0, s=0):
    return node_step(lifecycle_node(), ProgramState((mode,)), {"ch": bool(ch), "fe": bool(fe), "s": bool(s)})


def pulses(outs):
    return sorted(k for k, v in outs.items() if v is True)


def test_lifecycle_start():
    outs, nxt = life_step("S", ch=1)
    assert outs["start"] and outs["connect"] and nxt.modes == ("R",)


def test_lifecycle_safe_stop():
    outs, nxt = life_step("R", ch=1)
    assert outs["disconnect"] and not outs["stop"] and nxt.modes == ("SS",)


def test_lifecycle_drained():
    outs, nxt = life_step("SS", fe=1)
    assert outs["stop"] and not outs["disconnect"] and nxt.modes == ("S",)


def test_lifecycle_direct_stop():
    outs, nxt = life_step("R", s=1)
    assert outs["stop"] and outs["disconnect"] and nxt.modes == ("S",)


def test_lifecycle_invariants_exhaustive():
    for mode in ("S", "R", "SS"):
        for ch, fe, s in itertools.product((0, 1), repeat=3):
            outs, _ = life_step(mode, ch, fe, s)
            assert (not outs["run"]) == (mode == "S")
            assert (not outs["disc"]) == (mode == "R")


def test_fifo():
    n = fifo_node()
    outs, nxt = node_step(n, ProgramState(("FE",)), {"f": True})
    assert outs == {"full": False} and nxt.modes == ("FF",)
    outs, nxt = node_step(n, ProgramState(("FF",)), {"f": True})
    assert outs == {"full": True} and nxt.modes == ("FF",)
    _, nxt = node_step(n, ProgramState(("FF",)), {"f": False})
    assert nxt.modes == ("FE",)


def test_position_examples():
    n = position_node(4)
    outs, nxt = node_step(n, ProgramState(("PE0",)), {"a": False, "b": True})
    assert outs["mig1"] and outs["pos"] == "pe0" and nxt.modes == ("PE1",)
    outs, nxt = node_step(n, ProgramState(("PE2",)), {"a": True, "b": False})
    assert pulses(outs) == [] and nxt.modes == ("PE2",)
    outs, nxt = node_step(n, ProgramState(("PE3",)), {"a": False, "b": False})
    assert pulses(outs) == ["mig0"] and nxt.modes == ("PE0",)


@pytest.mark.parametrize("count", [2, 4])
def test_position_invariants(count):
    n = position_node(count)
    bits = ("a", "b")[: 1 if count == 2 else 2]
    for k in range(count):
        for vals in itertools.product((False, True), repeat=len(bits)):
            outs, nxt = node_step(n, ProgramState((f"PE{k}",)), dict(zip(bits, vals)))
            target = int("".join(str(int(v)) for v in vals), 2)
            assert outs["pos"] == PES[k]
            migs = [t for t in range(count) if outs[f"mig{t}"]]
            assert len(migs) <= 1
            assert nxt.modes == (f"PE{target}",)
            assert migs == ([] if target == k else [target])


def test_position_rejects_other_counts():
    with pytest.raises(ValueError):
        position_node(3)


def test_proc():
    n = proc_node()
    assert node_step(n, ProgramState(("ON",)), {"dis": True})[1].modes == ("OFF",)
    assert node_step(n, ProgramState(("OFF",)), {"dis": False})[1].modes == ("ON",)
    outs, nxt = node_step(n, ProgramState(("ON",)), {"dis": False})
    assert outs == {"on": True} and nxt.modes == ("ON",)


def cost(posC, posS, f, c):
    outs, _ = node_step(cost_node(DIST), ProgramState(()), {"posC": posC, "posS": posS, "f": f, "c": c})
    return [outs[f"cp{i}"] for i in range(4)]


def test_cost_examples():
    # client on pe0, server on pe1: same processor, distance 500
    assert cost("pe0", "pe1", 10, 3) == [5000, 30, 0, 0]
    # co-located: f*c + f*200
    assert cost("pe2", "pe2", 10, 5) == [0, 0, 2050, 0]
    assert cost("pe1", "pe3", 0, 7) == [0, 0, 0, 0]


def test_cost_sum_exhaustive():
    for posC, posS in itertools.product(PES, repeat=2):
        f, c = 3, 11
        cp = cost(posC, posS, f, c)
        for i, pe in enumerate(PES):
            if pe not in (posC, posS):
                assert cp[i] == 0
        d = DIST[PES.index(posC)][PES.index(posS)]
        assert sum(cp) == f * c + f * d


def test_distance_matrix():
    m = DEFAULT_CONFIG.platform.distance_matrix()
    assert all(m[i][j] == m[j][i] for i in range(4) for j in range(4))
    assert [m[i][i] for i in range(4)] == [200] * 4
    assert m[0][1] == m[2][3] == 500 and m[0][2] == m[1][3] == 1000


def test_command_node():
    n = command_node()
    assert node_step(n, ProgramState(("D",)), {"do": True, "done": False})[1].modes == ("P",)
    outs, nxt = node_step(n, ProgramState(("P",)), {"do": False, "done": False})
    assert outs == {"pending": True} and nxt.modes == ("P",)
    assert node_step(n, ProgramState(("P",)), {"do": False, "done": True})[1].modes == ("D",)


def test_twotasks_fixture():
    n = twotasks_node()
    assert n.contract.enforce == not_(and_(var("a1"), var("a2")))
    assert len(enumerate_reachable(n)) == 9


def test_delayable_s_on_activation():
    n = delayable_node()
    for s in enumerate_reachable(n).states:
        for r, c, e in itertools.product((False, True), repeat=3):
            outs, nxt = node_step(n, s, {"r": r, "c": c, "e": e})
            assert outs["s"] == (s.modes[0] != "Active" and nxt.modes[0] == "Active")


def test_main_interface():
    m = comanche_main()
    assert m.node.input_names == ("disable", "fifoH1F", "fifoH2F", "fifoL2F", "addlog", "c_startH2_done")
    outs = m.node.output_names
    assert {f"c_mig{k}{t}" for k in range(1, 5) for t in ("f1", "f2", "d")} <= set(outs)
    for tag in ("H2", "L"):
        assert {f"c_start{tag}", f"c_stop{tag}", f"c_connect{tag}", f"c_diconnect{tag}"} <= set(outs)
    assert m.node.controllable_names == ("a_S1", "b_S1", "a_S2", "b_S2", "a_D", "b_D",
                                         "ch_S2", "s_S2", "ch_L", "s_L")


def test_async_variant():
    m = comanche_main(async_mode=True)
    locals_ = {d.name for d in m.node.locals}
    assert {"pen_sS2", "pend"} <= locals_
    assert "pend" in free_vars(m.node.contract.enforce)
    assert "pen_sS2" not in {d.name for d in comanche_main().node.locals}


@pytest.mark.parametrize("async_mode", [False, True])
def test_objectives_are_state_predicates(async_mode):
    m = comanche_main(async_mode=async_mode)
    plan = m.node.plan
    for name in m.objectives:
        assert name in plan.state_determined
    assert free_vars(m.node.contract.enforce) <= plan.state_determined


def test_initial_configuration():
    m = comanche_main()
    s = node_reset(m.node)
    env = state_valuation(m.node, s)
    place = DEFAULT_CONFIG.topology.place
    assert env["pos_S1"] == place["FS1"] and env["pos_S2"] == place["FS2"] and env["pos_D"] == place["D"]
    assert not env["run_S2"] and not env["run_L"]
    assert all(env[o] for o in m.objectives)
    assert env["wl_pe0"] + env["wl_pe1"] + env["wl_pe2"] + env["wl_pe3"] == sum(
        b.f * b.c + b.f * DEFAULT_CONFIG.platform.distance(place[b.client], place[b.server])
        for b in DEFAULT_CONFIG.topology.bindings)


def test_co_located_placement_overloads():
    cfg = parse_config("[placement]\n" + "\n".join(f"{c} = pe0" for c in ("F", "A", "D", "FS1", "FS2", "L")))
    m = comanche_main(cfg)
    env = state_valuation(m.node, node_reset(m.node))
    assert not env["wl_ba"]


def test_two_pe_platform():
    cfg = parse_config("""[platform]
pes = 2
[placement]
D = pe1
FS2 = pe1
L = pe0
FS1 = pe0
[bounds]
max = 20000
""")
    m = comanche_main(cfg)
    assert "c_mig3d" not in m.node.output_names
    w = synthesize(build_arena(m.node))
    assert w.synthesizable


@pytest.mark.parametrize("text", [
    "[nonsense]\nx = 1",
    "[platform]\npes = 3",
    "[platform]\npes = four",
    "[bounds]\npe9 = 10",
    "[bounds]\nmax = 0",
    "[placement]\nFS1 = pe7",
    "[bindings]\nD.f1 = FS1 1",
    "[bindings]\nD.f1 = ZZ 1 1",
    "[model]\nfe_source = sometimes",
    "[sim]\nwarp = 9",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_overrides():
    cfg = parse_config("""[bounds]
max = 8000
pe3 = 6000
[bindings]
F.a = A 2 100
[sim]
threshold = 3
latency.start = 2
""")
    assert cfg.platform.max_load == (8000, 8000, 8000, 6000)
    assert cfg.topology.bindings[0].f == 2 and len(cfg.topology.bindings) == 1
    assert cfg.sim.threshold == 3 and dict(cfg.sim.latency)["start"] == 2


def test_fe_source_full():
    m = comanche_main(parse_config("[model]\nfe_source = full"))
    assert synthesize(build_arena(m.node)).synthesizable


def test_fe_source_empty_inputs():
    m = comanche_main(parse_config("[model]\nfe_source = empty"))
    assert m.node.input_names[-2:] == ("fifoH2E", "fifoL2E")
    # two extra inputs multiply |U| by four, past the default work budget
    with pytest.raises(StateBudgetExceeded):
        build_arena(m.node)


def test_closed_loop_random_inputs(comanche_sync, comanche_async):
    for model, _, _, ctl in (comanche_sync, comanche_async):
        result = check_controller(model, ctl, runs=10, steps=100, seed=11)
        assert result.ok, result.violations
