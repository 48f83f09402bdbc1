"""Greatest-fixpoint safety solver and controllable selection order."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import Unsynthesizable

log = logging.getLogger(__name__)


def _popcount(x):
    x = x.astype(np.int64)
    n = np.zeros_like(x)
    while x.any():
        n += x & 1
        x >>= 1
    return n


def candidate_order(n_bits, default, ordering=None):
    """Controllable indices sorted by Hamming distance to `default`, then numeric value descending.

    `ordering` lists bit positions from most to least significant for the tie-break
    (declared order when omitted).
    """
    cands = np.arange(1 << n_bits, dtype=np.int64)
    if ordering is None:
        value = cands
    else:
        value = np.zeros_like(cands)
        for rank, pos in enumerate(ordering):
            bit = (cands >> (n_bits - 1 - pos)) & 1
            value |= bit << (n_bits - 1 - rank)
    dist = _popcount(cands ^ default)
    return cands[np.lexsort((-value, dist))]


class RankTable:
    """Per-state candidate order, shared between states with equal defaults."""

    def __init__(self, n_bits, default_idx, ordering=None):
        uniq, inv = np.unique(default_idx, return_inverse=True)
        self.rows = inv.astype(np.int64)
        self.table = np.stack([candidate_order(n_bits, int(d), ordering) for d in uniq]) if len(uniq) else \
            np.zeros((0, 1 << n_bits), dtype=np.int64)
        self.n = 1 << n_bits

    def candidate(self, s, rank):
        return self.table[self.rows[s], rank]


def first_admissible(arena, ok, s, u, rank, ranks, stop_lost=True):
    """Advance each (s, u) pair from `rank` to its first candidate landing in `ok`.

    Returns (rank or -1 when exhausted, successor id) for every pair.
    """
    s = np.asarray(s, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    r = np.array(rank, dtype=np.int64, copy=True)
    ok_code = arena.code_lookup(ok)
    rows = ranks.rows[s]
    found = np.full(len(s), -1, dtype=np.int64)
    wsucc = np.full(len(s), -1, dtype=np.int64)
    lost = np.zeros(arena.n_states, dtype=bool)
    active = np.flatnonzero(r < ranks.n)
    exhausted = np.flatnonzero(r >= ranks.n)
    if exhausted.size and stop_lost:
        lost[s[exhausted]] = True
    while active.size:
        if stop_lost:
            active = active[~lost[s[active]]]
            if not active.size:
                break
        sa = s[active]
        c = ranks.table[rows[active], r[active]]
        nxt = arena.succ_code(sa, u[active], c)
        hit = ok_code(nxt)
        done = active[hit]
        found[done] = r[done]
        wsucc[done] = arena.code_ids(nxt[hit])
        rest = active[~hit]
        r[rest] += 1
        out = rest[r[rest] >= ranks.n]
        if out.size and stop_lost:
            lost[s[out]] = True
        active = rest[r[rest] < ranks.n]
    return found, wsucc


@dataclass
class WinningSet:
    members: np.ndarray
    synthesizable: bool
    iterations: int
    removed_at: np.ndarray
    choice: np.ndarray = None  # (n_states, n_u) controllable index, -1 outside W
    witness: list = field(default_factory=list)

    @property
    def size(self):
        return int(self.members.sum())

    def __contains__(self, sid):
        return bool(self.members[sid])

    def ids(self):
        return set(np.flatnonzero(self.members).tolist())


def synthesize(arena, strict=True):
    """Maximally permissive winning set; raises Unsynthesizable when `strict` and the game is lost."""
    n, n_u = arena.n_states, arena.n_u
    ranks = RankTable(len(arena.c_names), arena.default_idx)
    in_w = np.ones(n, dtype=bool)
    removed_at = np.zeros(n, dtype=np.int64)
    S = np.repeat(np.arange(n, dtype=np.int64), n_u)
    U = np.tile(np.arange(n_u, dtype=np.int64), n)
    rank = np.zeros(len(S), dtype=np.int64)
    wsucc = np.zeros(len(S), dtype=np.int64)
    ok = arena.good & in_w
    todo = np.arange(len(S))
    iterations = 0
    while True:
        iterations += 1
        found, nxt = first_admissible(arena, ok, S[todo], U[todo], rank[todo], ranks)
        rank[todo] = found
        wsucc[todo] = nxt
        lost = np.zeros(n, dtype=bool)
        lost[S[todo][found < 0]] = True
        lost &= in_w
        log.debug("round %d: %d states lost", iterations, int(lost.sum()))
        if not lost.any():
            break
        in_w[lost] = False
        removed_at[lost] = iterations
        ok = arena.good & in_w
        live = in_w[S]
        todo = np.flatnonzero(live & (rank >= 0) & ~ok[np.maximum(wsucc, 0)])
        rank[todo] += 1
    choice = np.full((n, n_u), -1, dtype=np.int64)
    live = in_w[S]
    choice.reshape(-1)[live] = ranks.candidate(S[live], rank[live])
    synth = bool(in_w[arena.initial] and arena.good[arena.initial])
    ws = WinningSet(in_w, synth, iterations, removed_at, choice)
    if not synth:
        ws.witness = losing_witness(arena, ws)
        if strict:
            raise_unsynthesizable(arena, ws)
    return ws


def raise_unsynthesizable(arena, ws):
    if not arena.good[arena.initial]:
        msg = "the initial configuration violates the contract"
    else:
        msg = f"the environment can force a contract violation within {len(ws.witness)} steps"
    exc = Unsynthesizable(msg, ws.witness)
    exc.winning = ws
    raise exc


def _in_w_before(ws, sid, rnd):
    ra = ws.removed_at[sid]
    return (ra == 0) | (ra >= rnd)


def losing_witness(arena, ws):
    """Uncontrollable inputs that defeat every controller from the initial state."""
    if not arena.good[arena.initial]:
        return []
    path = []
    s = arena.initial
    all_c = np.arange(arena.n_c, dtype=np.int64)
    while True:
        rnd = int(ws.removed_at[s])
        if rnd <= 0:
            break
        chosen = None
        for u in range(arena.n_u):
            succ = arena.succ(np.full(arena.n_c, s), np.full(arena.n_c, u), all_c)
            fine = arena.good[succ] & _in_w_before(ws, succ, rnd)
            if not fine.any():
                chosen = (u, succ)
                break
        if chosen is None:
            break
        u, succ = chosen
        path.append(arena.u_valuation(u))
        good = arena.good[succ]
        if not good.any():
            break
        # the controller keeps the contract as long as possible
        cand = succ[good]
        s = int(cand[np.argmax(ws.removed_at[cand])])
    return path
