import pytest
from hypothesis import given, settings, strategies as st

from randmodels import random_node
from reactive_dcs.comanche import cost_node, delayable_node, lifecycle_node, twotasks_node
from reactive_dcs.dsl import parse_node, parse_program, pretty_print
from reactive_dcs.errors import DslError, DslSyntaxError, DslTypeError, UnknownFlow
from reactive_dcs.synchro import INT, PEID, enumerate_reachable, run_sequence

DELAYABLE = """\
node delayable(r,c,e: bool) returns (a,s: bool)
  let
    automaton
      state Idle
        do a = false ; s = r and c
        until r and c then Active
            | r and not c then Wait
      state Wait
        do a = false ; s = c
        until c then Active
      state Active
        do a = true ; s = false
        until e then Idle
     end
   tel
"""

TWOTASKS = """\
-- two delayable tasks sharing a resource
node twotasks(r1, e1, r2, e2: bool) returns (a1, s1, a2, s2: bool)
  contract enforce not (a1 and a2) with (c1, c2: bool)
let
  (a1, s1) = delayable(r1, c1, e1);
  (a2, s2) = delayable(r2, c2, e2);
tel
"""


def test_parse_delayable_listing():
    n = parse_node(DELAYABLE)
    assert n.name == "delayable"
    assert n.output_names == ("a", "s")
    assert [m.name for m in n.automata[0].modes] == ["Idle", "Wait", "Active"]
    seq = [{"r": r, "c": c, "e": e} for r, c, e in
           [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 0), (0, 0, 0), (0, 0, 1), (0, 0, 0)]]
    seq = [{k: bool(v) for k, v in u.items()} for u in seq]
    assert run_sequence(n, seq)[0] == run_sequence(delayable_node(), seq)[0]


def test_parsed_delayable_equals_builder():
    assert parse_node(DELAYABLE) == delayable_node()


def test_empty_program():
    with pytest.raises(DslSyntaxError) as info:
        parse_program("")
    assert (info.value.line, info.value.col) == (1, 1)


def test_cost_header():
    text = """node cost(posC, posS: peid; f, c: int)
returns (cp0, cp1, cp2, cp3: int)
let cp0 = 0; cp1 = 0; cp2 = 0; cp3 = 0; tel"""
    unit = parse_program(text)
    n = unit.node("cost")
    assert [(d.name, d.type) for d in n.inputs] == [("posC", PEID), ("posS", PEID), ("f", INT), ("c", INT)]
    assert [d.name for d in n.outputs] == ["cp0", "cp1", "cp2", "cp3"]
    assert all(d.type == INT for d in n.outputs)
    assert [d.col for d in unit.diagnostics if "never read" in d.message] == [11, 17, 29, 32]


def test_twotasks_program():
    unit = parse_program(DELAYABLE + TWOTASKS)
    main = unit.main
    assert main.name == "twotasks"
    assert main.controllable_names == ("c1", "c2")
    assert len(enumerate_reachable(main)) == 9


def test_with_before_enforce_accepted():
    swapped = TWOTASKS.replace("contract enforce not (a1 and a2) with (c1, c2: bool)",
                               "contract with (c1, c2: bool) enforce not (a1 and a2)")
    a = parse_program(DELAYABLE + TWOTASKS).main
    b = parse_program(DELAYABLE + swapped).main
    assert a == b


def test_assume_rejected():
    text = DELAYABLE + TWOTASKS.replace("contract enforce", "contract assume true enforce")
    with pytest.raises(DslError):
        parse_program(text)


def test_round_trip_delayable():
    n = delayable_node()
    assert parse_node(pretty_print(n), "delayable") == n


def test_round_trip_minimal():
    n = parse_node("node id(x: bool) returns (y: bool) let y = x; tel")
    text = pretty_print(n)
    assert text.count("let") == 1 and "automaton" not in text
    assert parse_node(text) == n


def test_round_trip_twotasks_contract_order():
    n = twotasks_node()
    text = pretty_print(n)
    assert text.index("enforce") < text.index("with")
    assert parse_node(text, "twotasks") == n


def test_round_trip_library():
    for n in (lifecycle_node(), cost_node([[200, 500, 1000, 1000]] * 4)):
        assert parse_node(pretty_print(n), n.name) == n


def test_enum_declaration():
    text = """type light = red | green
node tl(go: bool) returns (l: light)
var k: light;
let
  k = red fby (if go then green else red);
  l = k;
tel"""
    n = parse_node(text)
    outs, _ = run_sequence(n, [{"go": True}, {"go": False}, {"go": False}])
    assert [o["l"] for o in outs] == ["red", "green", "red"]
    assert parse_node(pretty_print(n)) == n


@pytest.mark.parametrize("text,exc,pos", [
    ("node x(a: bool) returns (b: bool) let b = q; tel", UnknownFlow, (1, 43)),
    ("node x(a: bool) returns (b: bool) let b = a and 3; tel", DslTypeError, (1, 45)),
    ("node x(a: bool) returns (b: bool)\nlet\n  b = a +;\ntel", DslSyntaxError, (3, 10)),
    ("node x(a: bool) returns (b: bool) let b = a; ", DslSyntaxError, (1, 46)),
    ("node x(a: bool) returns (b: int) let b = 1 <= 2 <= 3; tel", DslSyntaxError, (1, 49)),
])
def test_error_positions(text, exc, pos):
    with pytest.raises(exc) as info:
        parse_program(text)
    assert (info.value.line, info.value.col) == pos


def test_unknown_target_mode():
    text = DELAYABLE.replace("then Wait", "then Nowhere")
    with pytest.raises(DslError) as info:
        parse_program(text)
    assert info.value.line == 7


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_random(seed):
    n = random_node(seed)
    assert parse_node(pretty_print(n), n.name) == n


def _position(text, line, col):
    lines = text.split("\n")
    assert 1 <= line <= len(lines)
    assert 1 <= col <= len(lines[line - 1]) + 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, len(DELAYABLE + TWOTASKS) - 1), st.integers(1, 8),
       st.sampled_from(["", ";", ")", "(", "x", " + ", "then", "7", "|", "not", "tel"]))
def test_error_positions_within_input(at, cut, insert):
    text = DELAYABLE + TWOTASKS
    mutated = text[:at] + insert + text[at + cut:]
    try:
        parse_program(mutated)
    except DslError as exc:
        _position(mutated, exc.line, exc.col)
