"""Runtime controller: deterministic choice of controllables inside the winning set."""
from __future__ import annotations

import numpy as np

from ..errors import OutsideWinningSet, Unsynthesizable, ValidationError
from ..synchro.expr import Const
from ..synchro.interp import node_step
from .compile import Codegen
from .solve import RankTable, first_admissible


class Controller:
    def __init__(self, arena, winning, choice, ordering):
        self.arena = arena
        self.winning = winning
        self.choice = choice
        self.ordering = ordering

    def select_index(self, sid, uid):
        c = int(self.choice[sid, uid])
        if c < 0:
            raise OutsideWinningSet(f"state {sid} is outside the winning set")
        return c

    def state_id(self, state):
        sid = self.arena.encode(state)
        if sid is None or not self.winning.members[sid]:
            raise OutsideWinningSet(f"configuration {state} is outside the winning set")
        return sid

    def select(self, state, u):
        """Controllable valuation for configuration `state` under uncontrollable inputs `u`."""
        sid = self.state_id(state)
        return self.arena.c_valuation(self.select_index(sid, self.arena.u_index(u)))


def _default_index(arena, defaults):
    gen = Codegen(arena.plan, arena.components)
    fns = []
    for name in arena.c_names:
        d = defaults.get(name, False) if isinstance(defaults, dict) else defaults[arena.c_names.index(name)]
        if isinstance(d, bool):
            d = Const(d, None)
        fns.append(gen.predicate_function(d))
    out = np.zeros(arena.n_states, dtype=np.int64)
    for sid, D in enumerate(arena.digits):
        v = 0
        for f in fns:
            v = v * 2 + int(bool(f(D)))
        out[sid] = v
    return out


def make_controller(arena, winning, defaults=None, ordering=None):
    """Package the selection policy; `defaults` maps controllables to state expressions or bools,
    `ordering` lists controllable names from most to least significant."""
    if not winning.synthesizable:
        raise Unsynthesizable("no controller exists for this contract", winning.witness)
    names = list(arena.c_names)
    if ordering is not None:
        ordering = list(ordering)
        if sorted(ordering) != sorted(names):
            raise ValidationError("ordering must be a permutation of the controllables")
        if ordering == names:
            ordering = None
    if defaults is None and ordering is None and winning.choice is not None:
        return Controller(arena, winning, winning.choice, names)
    default_idx = arena.default_idx if defaults is None else _default_index(arena, defaults)
    ranks = RankTable(len(names), default_idx, None if ordering is None else [names.index(n) for n in ordering])
    ok = arena.good & winning.members
    live = np.flatnonzero(winning.members)
    S = np.repeat(live, arena.n_u)
    U = np.tile(np.arange(arena.n_u, dtype=np.int64), len(live))
    found, _ = first_admissible(arena, ok, S, U, np.zeros(len(S), dtype=np.int64), ranks, stop_lost=False)
    choice = np.full((arena.n_states, arena.n_u), -1, dtype=np.int64)
    choice[S, U] = ranks.candidate(S, found)
    return Controller(arena, winning, choice, ordering or names)


def controlled_step(node, controller, state, u):
    """node_step with the controller filling in the controllables."""
    ctl = controller.select(state, u)
    outputs, nxt = node_step(node, state, {**u, **ctl})
    return outputs, nxt
