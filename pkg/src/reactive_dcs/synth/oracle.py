"""Brute-force reference solver: interpreter-driven successor table and naive set iteration."""
from __future__ import annotations

import itertools

from ..synchro.expr import eval_expr
from ..synchro.interp import node_step, state_valuation
from .solve import WinningSet

import numpy as np


def oracle_tables(arena):
    """(good flags, successor dict) recomputed with the reference interpreter and evaluator."""
    node = arena.node
    enforce = arena.contract.enforce
    states = [arena.decode(i) for i in range(arena.n_states)]
    good = [bool(eval_expr(enforce, state_valuation(node, s))) for s in states]
    u_vals = [dict(zip(arena.u_names, combo)) for combo in itertools.product(*arena.u_domains)]
    c_vals = [dict(zip(arena.c_names, combo)) for combo in itertools.product((False, True), repeat=len(arena.c_names))]
    succ = {}
    for i, s in enumerate(states):
        for ui, u in enumerate(u_vals):
            for ci, c in enumerate(c_vals):
                _, nxt = node_step(node, s, {**u, **c})
                succ[i, ui, ci] = arena.encode(nxt)
    return good, succ, len(u_vals), len(c_vals)


def oracle_winning_set(arena, tables=None):
    good, succ, n_u, n_c = tables or oracle_tables(arena)
    w = set(range(arena.n_states))
    rounds = 0
    while True:
        rounds += 1
        keep = set()
        for s in w:
            if all(any(good[succ[s, u, c]] and succ[s, u, c] in w for c in range(n_c)) for u in range(n_u)):
                keep.add(s)
        if keep == w:
            break
        w = keep
    members = np.zeros(arena.n_states, dtype=bool)
    members[list(w)] = True
    synth = arena.initial in w and good[arena.initial]
    return WinningSet(members, bool(synth), rounds, np.zeros(arena.n_states, dtype=np.int64))
