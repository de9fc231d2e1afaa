"""Exhaustive reference solvers used to certify the real algorithms.

These are written from the problem definitions only and share no solver
code with the rest of the package.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DEFAULT_BUDGET = 10**7


class TooLarge(Exception):
    """The enumeration would exceed the budget."""


@dataclass
class OracleBudget:
    max_count: int = DEFAULT_BUDGET


def _isolating_sets(n, terminals):
    """All node sets containing exactly one terminal s, grouped by s."""
    term = set(terminals)
    inner = [i for i in range(n) if i not in term]
    out = {}
    for s in terminals:
        sets = []
        for mask in range(1 << len(inner)):
            X = {s} | {inner[b] for b in range(len(inner)) if mask >> b & 1}
            sets.append(X)
        out[s] = sets
    return out


def _edge_bounds(inst, cuts):
    """Per-edge half-unit range [lo, hi] that contains some optimum."""
    lo = [0] * len(inst.edges)
    hi = []
    for k, e in enumerate(inst.edges):
        need = 0
        for s, sets in cuts.items():
            for X in sets:
                if (e.u in X) != (e.v in X):
                    need = max(need, inst.demands[s])
                    others = sum(f.cap for f in inst.edges if (f.u in X) != (f.v in X)) - e.cap
                    lo[k] = max(lo[k], 2 * (inst.demands[s] - others))
        # beyond the largest demand it crosses, extra support never helps
        top = 2 * min(e.cap, need)
        hi.append(top)
    for k, e in enumerate(inst.edges):
        if e.cost == 0:
            lo[k] = hi[k]
    return lo, hi


def brute_force_L(inst, budget: int = DEFAULT_BUDGET):
    """Minimum-cost half-integral support meeting every isolating-cut demand.

    Returns (support in halves, value as Fraction).
    """
    term = list(inst.terminals)
    if inst.n > 12:
        return _brute_force_L_flow(inst, budget)
    cuts = _isolating_sets(inst.n, term)
    lo, hi = _edge_bounds(inst, cuts)
    if any(l > h for l, h in zip(lo, hi)):
        raise ValueError("instance is infeasible")
    sizes = [h - l + 1 for l, h in zip(lo, hi)]
    total = math.prod(sizes)
    if total > budget:
        raise TooLarge(f"{total} candidate supports")
    m = len(inst.edges)
    # rows: cut constraints, columns: edges
    rows, need = [], []
    for s, sets in cuts.items():
        if inst.demands[s] == 0:
            continue
        for X in sets:
            rows.append([1 if (e.u in X) != (e.v in X) else 0 for e in inst.edges])
            need.append(2 * inst.demands[s])
    M = np.array(rows, dtype=np.int64).reshape(len(rows), m)
    need = np.array(need, dtype=np.int64)
    cost = np.array([e.cost for e in inst.edges], dtype=np.int64)
    best_val, best_x = None, None
    grids = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    # enumerate in chunks over the last few edges, vectorized over the rest
    split = m
    chunk = 1
    for k in range(m - 1, -1, -1):
        if chunk * sizes[k] > 200_000:
            break
        chunk *= sizes[k]
        split = k
    tail = (np.array(np.meshgrid(*grids[split:], indexing="ij")).reshape(m - split, -1).T
            if m > split else np.zeros((1, 0), dtype=np.int64))
    tail_cut = tail @ M[:, split:].T if len(rows) else None
    tail_cost = tail @ cost[split:]
    for head in itertools.product(*[range(l, h + 1) for l, h in zip(lo[:split], hi[:split])]):
        hv = np.array(head, dtype=np.int64)
        if len(rows):
            ok = np.all(tail_cut + (M[:, :split] @ hv) >= need, axis=1)
        else:
            ok = np.ones(len(tail), dtype=bool)
        if not ok.any():
            continue
        costs = tail_cost + int(cost[:split] @ hv)
        costs = np.where(ok, costs, np.iinfo(np.int64).max)
        j = int(np.argmin(costs))
        if best_val is None or costs[j] < best_val:
            best_val = int(costs[j])
            best_x = list(head) + [int(v) for v in tail[j]]
    if best_val is None:
        raise ValueError("instance is infeasible")
    return best_x, Fraction(best_val, 2)


def _max_flow_value(n, arcs, s, t):
    """Edmonds-Karp on a dense capacity matrix (independent of the solvers)."""
    cap = [[0] * n for _ in range(n)]
    for u, v, c in arcs:
        cap[u][v] += c
    flow = 0
    while True:
        prev = [-1] * n
        prev[s] = s
        q = deque([s])
        while q and prev[t] < 0:
            u = q.popleft()
            for v in range(n):
                if cap[u][v] > 0 and prev[v] < 0:
                    prev[v] = u
                    q.append(v)
        if prev[t] < 0:
            return flow
        push, v = None, t
        while v != s:
            push = cap[prev[v]][v] if push is None else min(push, cap[prev[v]][v])
            v = prev[v]
        v = t
        while v != s:
            cap[prev[v]][v] -= push
            cap[v][prev[v]] += push
            v = prev[v]
        flow += push


def support_feasible_by_flow(inst, x) -> bool:
    """Check all isolating-cut demands with one max-flow per terminal."""
    big = 2 * sum(e.cap for e in inst.edges) + 1
    for s in inst.terminals:
        arcs = []
        for e, xe in zip(inst.edges, x):
            arcs.append((e.u, e.v, xe))
            arcs.append((e.v, e.u, xe))
        sink = inst.n
        for t in inst.terminals:
            if t != s:
                arcs.append((t, sink, big))
        if _max_flow_value(inst.n + 1, arcs, s, sink) < 2 * inst.demands[s]:
            return False
    return True


def support_feasible_by_cuts(inst, x) -> bool:
    cuts = _isolating_sets(inst.n, inst.terminals)
    for s, sets in cuts.items():
        for X in sets:
            if sum(xe for e, xe in zip(inst.edges, x) if (e.u in X) != (e.v in X)) \
                    < 2 * inst.demands[s]:
                return False
    return True


def _brute_force_L_flow(inst, budget):
    sizes = [2 * e.cap + 1 for e in inst.edges]
    if math.prod(sizes) > budget:
        raise TooLarge("too many supports")
    best = None
    for x in itertools.product(*[range(s) for s in sizes]):
        c = sum(e.cost * xe for e, xe in zip(inst.edges, x))
        if best is not None and c >= best[1]:
            continue
        if support_feasible_by_flow(inst, x):
            best = (list(x), c)
    if best is None:
        raise ValueError("instance is infeasible")
    return best[0], Fraction(best[1], 2)


def brute_force_lconvex(om, budget: int = DEFAULT_BUDGET):
    """Exhaustive minimum of a tree objective over all vertex tuples."""
    T, n = om.tree, om.n
    if T.n ** n > budget:
        raise TooLarge(f"{T.n ** n} points")
    best = None
    for x in itertools.product(range(T.n), repeat=n):
        v = om(x)
        if v == math.inf:
            continue
        if best is None or v < best[1]:
            best = (x, v)
    if best is None:
        raise ValueError("objective is infinite everywhere")
    return best


def brute_force_multiway(inst, budget: int = DEFAULT_BUDGET):
    """Cheapest partition with one terminal per part: (node -> terminal, value)."""
    term = list(inst.terminals)
    inner = [i for i in range(inst.n) if i not in set(term)]
    if len(term) ** len(inner) > budget:
        raise TooLarge("too many assignments")
    best = None
    for choice in itertools.product(term, repeat=len(inner)):
        part = {s: s for s in term}
        part.update(zip(inner, choice))
        val = sum(e.cap for e in inst.edges if part[e.u] != part[e.v])
        if best is None or val < best[1]:
            best = (part, val)
    if best is None:
        return {}, 0
    return best
