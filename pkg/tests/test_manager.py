import random

import pytest

from reactive_dcs.errors import UnknownCommand, UnknownEvent, ValidationError
from reactive_dcs.manager import (Command, EventBuffer, comanche_command_map, manager_reset, manager_tick,
                                  notify_done, set_event)
from reactive_dcs.synchro import node_reset


def texts(commands):
    return [c.text() for c in commands]


def test_last_writer_wins(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    set_event(m.buffer, "fifoH1F", 1)
    set_event(m.buffer, "fifoH1F", 0)
    assert m.buffer.values["fifoH1F"] is False


def test_set_marks_dirty(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    assert not m.buffer.dirty
    set_event(m.buffer, "addlog", 1)
    assert m.buffer.dirty


def test_unknown_event(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    with pytest.raises(UnknownEvent):
        set_event(m.buffer, "bogus", 1)


def test_reset(comanche_sync):
    model, _, _, ctl = comanche_sync
    a, b = manager_reset(model, ctl), manager_reset(model, ctl)
    assert a.program == b.program == node_reset(model.node)
    modes = set(a.program.modes)
    assert {"S", "FE", "ON"} <= modes and "R" not in modes and "FF" not in modes
    assert all(v is False for v in a.buffer.values.values())
    commands, _ = manager_tick(a)
    assert commands == []


def test_appendix_like_ticks(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    set_event(m.buffer, "fifoH1F", 1)
    cmds, _ = manager_tick(m)
    assert texts(cmds) == ["start FS2", "bind D f2 FS2"]
    assert not m.buffer.dirty and m.buffer.values["fifoH1F"] is True
    set_event(m.buffer, "fifoH2F", 1)
    assert manager_tick(m)[0] == []
    set_event(m.buffer, "fifoH1F", 0)
    assert texts(manager_tick(m)[0]) == ["unbind D f2 FS2"]
    set_event(m.buffer, "fifoH2F", 0)
    assert texts(manager_tick(m)[0]) == ["stop FS2"]


def test_done_event_cycle(comanche_async):
    m = manager_reset(comanche_async[0], comanche_async[3])
    set_event(m.buffer, "fifoH1F", 1)
    cmds, _ = manager_tick(m)
    start = next(c for c in cmds if c.verb == "start")
    assert start.done_event == "c_startH2_done"
    assert all(c.done_event is None for c in cmds if c is not start)
    notify_done(m, start.id)
    assert m.buffer.values["c_startH2_done"] is True and m.buffer.dirty
    manager_tick(m)
    assert m.last_inputs["c_startH2_done"] is True
    assert m.buffer.values["c_startH2_done"] is False
    manager_tick(m)
    assert m.last_inputs["c_startH2_done"] is False
    with pytest.raises(UnknownCommand):
        notify_done(m, start.id)


def test_done_without_pending(comanche_async):
    m = manager_reset(comanche_async[0], comanche_async[3])
    with pytest.raises(UnknownCommand):
        notify_done(m, 1)


def test_log_format(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    set_event(m.buffer, "fifoH1F", 1)
    manager_tick(m, now=4)
    assert m.log == ["t=4 start FS2", "t=4 bind D f2 FS2"]


def test_command_validation():
    assert Command("migrate", component="D", pe="pe1").text() == "migrate D pe1"
    with pytest.raises(ValidationError):
        Command("migrate", component="D")
    with pytest.raises(ValidationError):
        Command("teleport", component="D")
    with pytest.raises(ValidationError):
        Command("bind", client="D", interface="f2")


def test_command_map_covers_command_outputs(comanche_sync):
    model = comanche_sync[0]
    cmap = comanche_command_map(model)
    assert set(cmap.entries) == set(model.node.output_names)
    assert [t["verb"] for t in cmap.expand("c_connectL")] == ["bind"]
    assert cmap.expand("c_mig2d") == [{"verb": "migrate", "component": "D", "pe": "pe1"}]


def test_buffer_rejects_nothing_declared():
    from reactive_dcs.synchro import BOOL, Decl
    buf = EventBuffer((Decl("x", BOOL),))
    assert buf.snapshot() == {"x": False}
    with pytest.raises(UnknownEvent):
        buf.set("y", True)


def _drive(model, ctl, seed, ticks=60):
    """Random event writes and acknowledgements; returns per-tick (inputs, outputs, commands)."""
    m = manager_reset(model, ctl)
    rng = random.Random(seed)
    names = [n for n in model.node.input_names if not n.endswith("_done")]
    history = []
    for _ in range(ticks):
        for _ in range(rng.randint(0, 2)):
            set_event(m.buffer, rng.choice(names), rng.random() < 0.5)
        if m.pending and rng.random() < 0.5:
            notify_done(m, rng.choice(sorted(m.pending)))
        before = dict(m.buffer.values)
        cmds, _ = manager_tick(m)
        history.append((before, dict(m.last_inputs), dict(m.last_outputs), texts(cmds)))
    return history


@pytest.mark.parametrize("seed", range(5))
def test_manager_invariants(comanche_async, seed):
    model, _, _, ctl = comanche_async
    cmap = comanche_command_map(model)
    history = _drive(model, ctl, seed)
    for k, (before, inputs, outputs, cmds) in enumerate(history):
        assert inputs == before
        expected = []
        for out in model.node.output_names:
            if outputs[out]:
                expected += [Command(id=0, **t).text() for t in cmap.expand(out)]
        assert cmds == expected
        if inputs["c_startH2_done"] and k + 1 < len(history):
            # the acknowledgement lasts one tick unless a new one arrives
            nxt = history[k + 1][1]["c_startH2_done"]
            assert not nxt or history[k + 1][0]["c_startH2_done"]
    assert history == _drive(model, ctl, seed)


def test_buffer_persistence(comanche_sync):
    m = manager_reset(comanche_sync[0], comanche_sync[3])
    set_event(m.buffer, "fifoH1F", 1)
    manager_tick(m)
    for _ in range(5):
        manager_tick(m)
        assert m.last_inputs["fifoH1F"] is True
