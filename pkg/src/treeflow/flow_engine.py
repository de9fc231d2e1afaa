"""Exact integer max-flow, minimal min-cut, circulations with lower bounds.

All capacities are Python ints.  An infinite upper bound is written as
``INF`` (``math.inf``) and replaced internally by one plus the sum of all
finite bounds of the network, which keeps every computation in integers.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

INF = math.inf


class Infeasible(Exception):
    """No feasible circulation exists."""


class NotCirculation(Exception):
    """Flow conservation fails somewhere."""


class DirectedNetwork:
    """Directed multigraph with integer lower/upper bounds on edges."""

    def __init__(self, n: int = 0, source: int | None = None, sink: int | None = None):
        self.n = n
        self.tails: list[int] = []
        self.heads: list[int] = []
        self.lowers: list[int] = []
        self.uppers: list = []
        self.source = source
        self.sink = sink

    def add_node(self) -> int:
        self.n += 1
        return self.n - 1

    def add_edge(self, u: int, v: int, upper, lower: int = 0) -> int:
        if u == v:
            raise ValueError("self-loops are not allowed")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u},{v}) out of range")
        if upper != INF:
            upper = int(upper)
            if upper < lower:
                raise ValueError("lower bound exceeds upper bound")
        if lower < 0:
            raise ValueError("negative lower bound")
        self.tails.append(u)
        self.heads.append(v)
        self.lowers.append(int(lower))
        self.uppers.append(upper)
        return len(self.tails) - 1

    @property
    def m(self) -> int:
        return len(self.tails)

    def big(self) -> int:
        """Integer stand-in for an infinite capacity."""
        return 1 + sum(u for u in self.uppers if u != INF) + sum(self.lowers)

    def finite_uppers(self) -> list[int]:
        b = self.big()
        return [b if u == INF else u for u in self.uppers]

    def cut_capacity(self, side) -> int:
        """Sum of finite-encoded uppers of edges leaving ``side``."""
        side = set(side)
        caps = self.finite_uppers()
        return sum(c for u, v, c in zip(self.tails, self.heads, caps)
                   if u in side and v not in side)

    def to_dimacs(self, s: int | None = None, t: int | None = None) -> str:
        """DIMACS max-flow text (1-based node ids)."""
        s = self.source if s is None else s
        t = self.sink if t is None else t
        lines = [f"p max {self.n} {self.m}"]
        if s is not None:
            lines.append(f"n {s + 1} s")
        if t is not None:
            lines.append(f"n {t + 1} t")
        for u, v, c in zip(self.tails, self.heads, self.finite_uppers()):
            lines.append(f"a {u + 1} {v + 1} {c}")
        return "\n".join(lines) + "\n"


@dataclass
class FlowResult:
    value: int
    flow: list[int]
    source_side: frozenset = field(default_factory=frozenset)


class _Dinic:
    """Residual graph with paired arcs; arc e^1 is the reverse of e."""

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> int:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def _levels(self, s: int, t: int):
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                if self.cap[e] > 0 and level[self.to[e]] < 0:
                    level[self.to[e]] = level[u] + 1
                    q.append(self.to[e])
        return level if level[t] >= 0 else None

    def _blocking(self, s: int, t: int, level) -> int:
        # iterative DFS with current-arc pointers
        it = [0] * self.n
        total = 0
        to, cap, adj = self.to, self.cap, self.adj
        while True:
            path: list[int] = []
            u = s
            while u != t:
                while it[u] < len(adj[u]):
                    e = adj[u][it[u]]
                    v = to[e]
                    if cap[e] > 0 and level[v] == level[u] + 1:
                        break
                    it[u] += 1
                else:
                    # dead end: retreat
                    if not path:
                        return total
                    level[u] = -1
                    e = path.pop()
                    u = to[e ^ 1]
                    it[u] += 1
                    continue
                path.append(e)
                u = to[e]
            push = min(cap[e] for e in path)
            for e in path:
                cap[e] -= push
                cap[e ^ 1] += push
            total += push

    def run(self, s: int, t: int) -> int:
        total = 0
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            total += self._blocking(s, t, level)

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen


def max_flow(net: DirectedNetwork, s: int, t: int) -> FlowResult:
    """Maximum (s,t)-flow; ``source_side`` is the minimal minimum cut."""
    if s == t:
        raise ValueError("source equals sink")
    if any(net.lowers):
        raise ValueError("max_flow expects zero lower bounds")
    caps = net.finite_uppers()
    d = _Dinic(net.n)
    arcs = [d.add(u, v, c) for u, v, c in zip(net.tails, net.heads, caps)]
    value = d.run(s, t)
    flow = [caps[i] - d.cap[a] for i, a in enumerate(arcs)]
    return FlowResult(value, flow, frozenset(d.reachable(s)))


def minimal_min_cut(net: DirectedNetwork, s: int, t: int) -> frozenset:
    """Inclusion-minimal minimum (s,t)-cut: residual-reachable set of s."""
    return max_flow(net, s, t).source_side


def feasible_circulation(net: DirectedNetwork) -> list[int]:
    """Integral circulation within [lower, upper], or raise Infeasible."""
    caps = net.finite_uppers()
    n = net.n
    S, T = n, n + 1
    d = _Dinic(n + 2)
    excess = [0] * n
    arcs = []
    for u, v, lo, c in zip(net.tails, net.heads, net.lowers, caps):
        arcs.append(d.add(u, v, c - lo))
        excess[v] += lo
        excess[u] -= lo
    need = 0
    for v in range(n):
        if excess[v] > 0:
            d.add(S, v, excess[v])
            need += excess[v]
        elif excess[v] < 0:
            d.add(v, T, -excess[v])
    if d.run(S, T) != need:
        raise Infeasible("lower bounds cannot be met")
    return [lo + (c - lo) - d.cap[a]
            for lo, c, a in zip(net.lowers, caps, arcs)]


def check_circulation(net: DirectedNetwork, phi) -> None:
    bal = [0] * net.n
    for u, v, f in zip(net.tails, net.heads, phi):
        if f < 0:
            raise NotCirculation("negative flow")
        bal[u] -= f
        bal[v] += f
    if any(bal):
        raise NotCirculation("conservation violated at node "
                             f"{next(i for i, b in enumerate(bal) if b)}")


def decompose_circulation(net: DirectedNetwork, phi, with_edges: bool = False):
    """Greedy cycle decomposition of an integral circulation.

    Returns a list of ``(nodes, coeff)`` where ``nodes`` starts and ends at
    the same node.  With ``with_edges`` the items are ``(nodes, edges, coeff)``.
    """
    check_circulation(net, phi)
    rest = list(phi)
    out_edges: list[list[int]] = [[] for _ in range(net.n)]
    for e, u in enumerate(net.tails):
        out_edges[u].append(e)
    ptr = [0] * net.n
    cycles = []
    for start_edge in range(net.m):
        while rest[start_edge] > 0:
            # walk along positive edges until a node repeats
            pos = {net.tails[start_edge]: 0}
            walk_nodes = [net.tails[start_edge]]
            walk_edges = [start_edge]
            u = net.heads[start_edge]
            while u not in pos:
                pos[u] = len(walk_nodes)
                walk_nodes.append(u)
                while rest[out_edges[u][ptr[u]]] == 0:
                    ptr[u] += 1
                e = out_edges[u][ptr[u]]
                walk_edges.append(e)
                u = net.heads[e]
            i = pos[u]
            cyc_edges = walk_edges[i:]
            cyc_nodes = walk_nodes[i:] + [u]
            q = min(rest[e] for e in cyc_edges)
            for e in cyc_edges:
                rest[e] -= q
            cycles.append((cyc_nodes, cyc_edges, q) if with_edges else (cyc_nodes, q))
    return cycles
