"""Explicit safety-game arena over the reachable configurations of a node."""
from __future__ import annotations

import itertools
import logging

import numpy as np

from ..errors import NonFiniteDomain, StateBudgetExceeded, ValidationError
from ..synchro.expr import TRUE, free_vars
from ..synchro.interp import checked_plan
from ..synchro.node import Contract, ProgramState
from ..synchro.types import domain
from .compile import Codegen

log = logging.getLogger(__name__)

DEFAULT_WORK_BUDGET = 2_000_000_000
DEFAULT_STATE_BUDGET = 5_000_000
_DENSE_LIMIT = 1 << 22


class Cluster:
    """Group of components whose next digits share input variables."""

    def __init__(self, comps, u_vars, c_vars, nu, nc):
        self.comps = comps
        self.u_vars = u_vars
        self.c_vars = c_vars
        self.nu = nu
        self.nc = nc
        self.fn = None
        self.table = None
        self.pu = None
        self.pc = None


def _mixed_index(digits, radices):
    """Index of digit tuples, first position most significant (vectorized over rows)."""
    idx = np.zeros(digits.shape[0], dtype=np.int64)
    for k, r in enumerate(radices):
        idx = idx * r + digits[:, k]
    return idx


def _all_digits(radices):
    if not radices:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(*[range(r) for r in radices])), dtype=np.int64)


class Arena:
    def __init__(self, node, contract):
        self.node = node
        self.contract = contract
        self.plan = checked_plan(node)

    # index conversions
    def u_index(self, valuation):
        idx = 0
        for name, dom in zip(self.u_names, self.u_domains):
            idx = idx * len(dom) + dom.index(valuation[name])
        return idx

    def u_valuation(self, idx):
        vals = []
        for dom in reversed(self.u_domains):
            idx, d = divmod(idx, len(dom))
            vals.append(dom[d])
        return dict(zip(self.u_names, reversed(vals)))

    def c_index(self, valuation):
        idx = 0
        for name in self.c_names:
            idx = idx * 2 + int(bool(valuation[name]))
        return idx

    def c_valuation(self, idx):
        n = len(self.c_names)
        return {name: bool((idx >> (n - 1 - i)) & 1) for i, name in enumerate(self.c_names)}

    def encode(self, state):
        """Dense id of a ProgramState, or None when it is not in the arena."""
        code = 0
        mems = dict(state.memories)
        for (kind, key, values), w in zip(self.components, self.weights):
            v = state.modes[key] if kind == "aut" else mems.get(key)
            try:
                code += values.index(v) * w
            except ValueError:
                return None
        return self._code_index.get(code)

    def decode(self, sid):
        digits = self.digits[sid]
        modes, mems = [], []
        for (kind, key, values), d in zip(self.components, digits):
            if kind == "aut":
                modes.append(values[d])
            else:
                mems.append((key, values[d]))
        return ProgramState(tuple(modes), tuple(mems))

    @property
    def n_states(self):
        return len(self.codes)

    def succ_code(self, s, u, c):
        """Successor codes for aligned arrays of state ids, u indices and c indices."""
        total = None
        for g in self.groups:
            part = g.table[s, g.ku[u] + g.kc[c]]
            total = part if total is None else total + part
        return total

    def code_ids(self, codes):
        if self._dense is not None:
            return self._dense[codes]
        return self._sorted_ids[np.searchsorted(self._sorted_codes, codes)]

    def succ(self, s, u, c):
        """Successor ids for aligned arrays of state ids, u indices and c indices."""
        return self.code_ids(self.succ_code(s, u, c))

    def code_lookup(self, flags):
        """Function mapping successor codes to the per-state boolean array `flags`."""
        if self._dense is not None:
            by_code = np.zeros(len(self._dense), dtype=bool)
            by_code[self.codes] = flags
            return lambda codes: by_code[codes]
        return lambda codes: flags[self.code_ids(codes)]

    def step(self, s, u, c):
        """(enforce-satisfied flag, successor id) for one triple of indices."""
        nxt = int(self.succ(np.array([s]), np.array([u]), np.array([c]))[0])
        return bool(self.good[nxt]), nxt

    def successor_table(self):
        """Full (n_states, n_u, n_c) successor array; only sensible for small arenas."""
        s, u, c = np.meshgrid(np.arange(self.n_states), np.arange(self.n_u), np.arange(self.n_c), indexing="ij")
        return self.succ(s.ravel(), u.ravel(), c.ravel()).reshape(s.shape)


class Group:
    """Several clusters fused into one table indexed by ku[u] + kc[c]."""

    def __init__(self, table, ku, kc):
        self.table = table
        self.ku = ku
        self.kc = kc


_GROUP_LIMIT = 512


def _merge(clusters, n_u, n_c, product):
    groups = []
    cur = []
    size = 1
    for cl in sorted(clusters, key=lambda c: c.nu * c.nc):
        k = cl.nu * cl.nc
        if cur and size * k > _GROUP_LIMIT:
            groups.append(cur)
            cur, size = [], 1
        cur.append(cl)
        size *= k
    if cur:
        groups.append(cur)
    out = []
    for members in groups:
        n = members[0].table.shape[0]
        table = np.zeros((n, 1), dtype=np.int64)
        ku = np.zeros(n_u, dtype=np.int64)
        kc = np.zeros(n_c, dtype=np.int64)
        for cl in members:
            k = cl.nu * cl.nc
            table = (table[:, :, None] + cl.table[:, None, :]).reshape(n, -1)
            ku = ku * k + cl.pu * cl.nc
            kc = kc * k + cl.pc
        dtype = np.int32 if product < 2**31 else np.int64
        out.append(Group(np.ascontiguousarray(table.astype(dtype)), ku, kc))
    return out


def _union_find(n):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    return find, union


def build_arena(node, contract=None, work_budget=DEFAULT_WORK_BUDGET, state_budget=DEFAULT_STATE_BUDGET):
    plan = checked_plan(node)
    flat = plan.node
    if contract is None:
        contract = node.contract or Contract(TRUE, ())
    elif contract.names != node.controllable_names:
        raise ValidationError("contract controllables must match the node's controllables")
    bad = sorted(free_vars(contract.enforce) - plan.state_determined)
    for c in contract.controllables:
        bad += sorted(free_vars(c.default) - plan.state_determined)
    if bad:
        raise ValidationError(f"contract reads non state-determined flows {bad}")

    arena = Arena(node, contract)
    comps = []
    for k, aut in enumerate(flat.automata):
        comps.append(("aut", k, aut.mode_names))
    for m in flat.memories:
        dom = domain(plan.types[m.name])
        if dom is None:
            raise NonFiniteDomain(f"memory {m.name!r} has an unbounded integer domain")
        comps.append(("mem", m.name, tuple(dom)))
    weights, w = [], 1
    for _, _, values in comps:
        weights.append(w)
        w *= len(values)
    product = w
    if product >= 1 << 62:
        raise StateBudgetExceeded("configuration space is too large to encode")
    arena.components, arena.weights = comps, weights
    arena.product_size = product

    arena.u_names = node.input_names
    arena.u_domains = []
    for name in arena.u_names:
        dom = domain(plan.types[name])
        if dom is None:
            raise NonFiniteDomain(f"input {name!r} has an unbounded integer domain")
        arena.u_domains.append(tuple(dom))
    arena.c_names = contract.names
    arena.n_u = int(np.prod([len(d) for d in arena.u_domains], dtype=np.int64)) if arena.u_domains else 1
    arena.n_c = 1 << len(arena.c_names)
    if arena.n_u * arena.n_c > work_budget:
        raise StateBudgetExceeded(f"|U|x|C| = {arena.n_u * arena.n_c} exceeds the work budget")

    gen = Codegen(plan, comps)
    # clusters by shared input support
    inputs = set(arena.u_names) | set(arena.c_names)
    support = []
    for kind, key, _ in comps:
        roots = [("fire", key)] if kind == "aut" else list(plan.deps_of_memory_next[key])
        support.append({x for x in gen.cone(roots) if x in inputs})
    find, union = _union_find(len(comps))
    owner = {}
    static = [i for i, s in enumerate(support) if not s]
    for i, sup in enumerate(support):
        for x in sup:
            if x in owner:
                union(owner[x], i)
            else:
                owner[x] = i
    for a, b in zip(static, static[1:]):
        union(a, b)
    groups = {}
    for i in range(len(comps)):
        groups.setdefault(find(i), []).append(i)
    u_digits = _all_digits([len(d) for d in arena.u_domains])
    c_digits = _all_digits([2] * len(arena.c_names))
    clusters = []
    for members in groups.values():
        sup = set().union(*(support[i] for i in members))
        uv = [i for i, n in enumerate(arena.u_names) if n in sup]
        cv = [i for i, n in enumerate(arena.c_names) if n in sup]
        u_rad = [len(arena.u_domains[i]) for i in uv]
        cl = Cluster(members, uv, cv, int(np.prod(u_rad, dtype=np.int64)), 1 << len(cv))
        cl.pu = _mixed_index(u_digits[:, uv], u_rad)
        cl.pc = _mixed_index(c_digits[:, cv], [2] * len(cv))
        doms = [arena.u_domains[i] for i in uv] + [(False, True)] * len(cv)
        combos = tuple(itertools.product(*doms))
        names = [arena.u_names[i] for i in uv] + [arena.c_names[i] for i in cv]
        cl.fn = gen.row_function(members, [weights[i] for i in members], names, combos)
        clusters.append(cl)
    if not clusters:
        cl = Cluster([], [], [], 1, 1)
        cl.pu = np.zeros(arena.n_u, dtype=np.int64)
        cl.pc = np.zeros(arena.n_c, dtype=np.int64)
        cl.fn = lambda D: [0]
        clusters.append(cl)
    arena.clusters = clusters
    log.debug("arena for %s: %d components in %d clusters", node.name, len(comps), len(clusters))

    enforce_fn = gen.predicate_function(contract.enforce)
    default_fns = [gen.predicate_function(c.default) for c in contract.controllables]

    init_digits = []
    for kind, key, values in comps:
        if kind == "aut":
            init_digits.append(0)
        else:
            init = next(m.init for m in flat.memories if m.name == key)
            init_digits.append(values.index(init))
    init_code = sum(d * w for d, w in zip(init_digits, weights))

    radices = [len(v) for _, _, v in comps]
    dense_seen = np.zeros(product, dtype=bool) if product <= _DENSE_LIMIT else None
    index = {init_code: 0}
    codes = [init_code]
    digits = [tuple(init_digits)]
    if dense_seen is not None:
        dense_seen[init_code] = True
    rows = [[] for _ in clusters]
    good, defaults = [], []
    frontier = [0]
    while frontier:
        found = []
        for sid in frontier:
            D = digits[sid]
            good.append(bool(enforce_fn(D)))
            d = 0
            for f in default_fns:
                d = d * 2 + int(bool(f(D)))
            defaults.append(d)
            succ = None
            for j, cl in enumerate(clusters):
                r = cl.fn(D)
                rows[j].append(r)
                opts = np.fromiter(set(r), dtype=np.int64)
                succ = opts if succ is None else np.add.outer(succ, opts).ravel()
            found.append(succ)
        new = np.unique(np.concatenate(found))
        if dense_seen is not None:
            new = new[~dense_seen[new]]
            dense_seen[new] = True
        else:
            new = np.array([c for c in new.tolist() if c not in index], dtype=np.int64)
        if len(codes) + len(new) > state_budget:
            raise StateBudgetExceeded(f"more than {state_budget} reachable states")
        if (len(codes) + len(new)) * arena.n_u * arena.n_c > work_budget:
            raise StateBudgetExceeded(
                f"{len(codes) + len(new)} states x |U|={arena.n_u} x |C|={arena.n_c} exceeds the work budget")
        frontier = list(range(len(codes), len(codes) + len(new)))
        rest = new.copy()
        cols = []
        for r_ in radices:
            rest, x = np.divmod(rest, r_)
            cols.append(x)
        digs = np.stack(cols, axis=1).tolist() if cols else [[] for _ in new]
        for code, dg in zip(new.tolist(), digs):
            index[code] = len(codes)
            codes.append(code)
            digits.append(tuple(dg))

    arena.codes = np.asarray(codes, dtype=np.int64)
    arena.digits = digits
    arena._code_index = index
    arena.initial = 0
    arena.good = np.asarray(good, dtype=bool)
    arena.default_idx = np.asarray(defaults, dtype=np.int64)
    for cl, r in zip(clusters, rows):
        cl.table = np.asarray(r, dtype=np.int64).reshape(len(codes), -1)
    arena.groups = _merge(clusters, arena.n_u, arena.n_c, product)
    if product <= _DENSE_LIMIT:
        dense = np.full(product, -1, dtype=np.int64)
        dense[arena.codes] = np.arange(len(codes))
        arena._dense = dense
    else:
        arena._dense = None
        order = np.argsort(arena.codes)
        arena._sorted_codes = arena.codes[order]
        arena._sorted_ids = order.astype(np.int64)
    log.info("arena for %s: %d states, |U|=%d, |C|=%d", node.name, len(codes), arena.n_u, arena.n_c)
    return arena
