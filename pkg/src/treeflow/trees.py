"""Bipartite trees, midpoints, subdivision, local boxes and scaled star trees.

Vertices are dense integers.  Color 0 is Black, 1 is White; the root of
every tree is Black.  Within a local box (ideal or filter) the center
vertex always comes first so that box index 0 is the minimum element.
"""
from __future__ import annotations

from collections import deque

BLACK = 0
WHITE = 1


class Tree:
    """Finite tree with the coloring fixed by a Black root."""

    def __init__(self, n: int, edges, root: int = 0):
        if n < 1:
            raise ValueError("tree needs at least one vertex")
        edges = [tuple(e) for e in edges]
        if len(edges) != n - 1:
            raise ValueError("a tree on n vertices has n-1 edges")
        self.n = n
        self.edges = edges
        self.adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            self.adj[u].append(v)
            self.adj[v].append(u)
        for a in self.adj:
            a.sort()
        self.root = root
        self.parent = [-1] * n
        self.depth = [-1] * n
        self.depth[root] = 0
        q = deque([root])
        while q:
            u = q.popleft()
            for v in self.adj[u]:
                if self.depth[v] < 0:
                    self.depth[v] = self.depth[u] + 1
                    self.parent[v] = u
                    q.append(v)
        if min(self.depth) < 0:
            raise ValueError("edges do not form a connected tree")
        self.color = [d % 2 for d in self.depth]

    def vertices(self):
        return range(self.n)

    def neighbors(self, u: int) -> list[int]:
        return self.adj[u]

    def is_black(self, u: int) -> bool:
        return self.color[u] == BLACK

    def distance(self, u: int, v: int) -> int:
        d = 0
        while self.depth[u] > self.depth[v]:
            u = self.parent[u]
            d += 1
        while self.depth[v] > self.depth[u]:
            v = self.parent[v]
            d += 1
        while u != v:
            u, v = self.parent[u], self.parent[v]
            d += 2
        return d

    def step_toward(self, u: int, y: int) -> int:
        """Neighbor of u on the path to y (u != y)."""
        if u == y:
            raise ValueError("no step from a vertex to itself")
        # y in the subtree of some child of u, or else go up
        v = y
        while self.depth[v] > self.depth[u] + 1:
            v = self.parent[v]
        if self.depth[v] == self.depth[u] + 1 and self.parent[v] == u:
            return v
        return self.parent[u]

    def path(self, u: int, v: int) -> list[int]:
        out = [u]
        while u != v:
            u = self.step_toward(u, v)
            out.append(u)
        return out

    def precedes(self, u: int, v: int) -> bool:
        """Strict order: u < v iff adjacent, u White and v Black."""
        return (self.color[u] == WHITE and self.color[v] == BLACK
                and self.distance(u, v) == 1)


def path_distance(T, u: int, v: int) -> int:
    return T.distance(u, v)


def midpoint_pair(T, u: int, v: int) -> tuple[int, int]:
    """(u . v, u o v): the Black and White near-midpoints of u and v."""
    d = T.distance(u, v)
    if d % 2 == 0:
        w = u
        for _ in range(d // 2):
            w = T.step_toward(w, v)
        return w, w
    a = u
    for _ in range(d // 2):
        a = T.step_toward(a, v)
    b = T.step_toward(a, v)
    return (a, b) if T.is_black(a) else (b, a)


def subdivide(T: Tree) -> Tree:
    """Edge subdivision; originals keep their ids, edge e becomes n + e."""
    edges = []
    for e, (u, v) in enumerate(T.edges):
        w = T.n + e
        edges.append((u, w))
        edges.append((w, v))
    return Tree(T.n + len(T.edges), edges, root=T.root)


def ideal(T, x: int) -> list[int]:
    return [x] + sorted(T.neighbors(x)) if T.is_black(x) else [x]


def filter_(T, x: int) -> list[int]:
    return [x] if T.is_black(x) else [x] + sorted(T.neighbors(x))


def round_toward(T, x, y: int) -> tuple[int, ...]:
    """Move every White coordinate one step toward the Black vertex y."""
    if not T.is_black(y):
        raise ValueError("target must be Black")
    return tuple(xi if T.is_black(xi) else T.step_toward(xi, y) for xi in x)


class StarTree:
    """Star with ``rungs`` vertices per leg at grid spacing 2**sigma.

    Vertex 0 is the origin; rung j (1-based) on leg l has id 1 + l*rungs + j-1.
    Rung j sits at distance j * 2**sigma from the origin in the ambient
    star metric.  Queries are O(1) so long legs cost nothing.
    """

    def __init__(self, terminals, sigma: int, rungs: int):
        self.terminals = list(terminals)
        self.k = len(self.terminals)
        self.sigma = sigma
        self.rungs = rungs
        self.n = 1 + self.k * rungs
        self.root = 0
        self._leg_of = {s: l for l, s in enumerate(self.terminals)}

    def vertices(self):
        return range(self.n)

    def encode(self, leg, height: int) -> int:
        """Vertex id of rung ``height`` on terminal ``leg`` (None = origin)."""
        if height == 0:
            return 0
        if not 1 <= height <= self.rungs:
            raise ValueError("height out of range")
        return 1 + self._leg_of[leg] * self.rungs + height - 1

    def decode(self, v: int) -> tuple:
        if v == 0:
            return None, 0
        l, j = divmod(v - 1, self.rungs)
        return self.terminals[l], j + 1

    def _lh(self, v):
        if v == 0:
            return -1, 0
        l, j = divmod(v - 1, self.rungs)
        return l, j + 1

    def height(self, v: int) -> int:
        return self._lh(v)[1]

    def is_black(self, v: int) -> bool:
        return self._lh(v)[1] % 2 == 0

    @property
    def color(self):
        return _ColorView(self)

    def distance(self, u: int, v: int) -> int:
        lu, hu = self._lh(u)
        lv, hv = self._lh(v)
        if lu == lv or hu == 0 or hv == 0:
            return abs(hu - hv)
        return hu + hv

    def neighbors(self, v: int) -> list[int]:
        l, h = self._lh(v)
        if h == 0:
            return [1 + i * self.rungs for i in range(self.k)] if self.rungs else []
        out = [v - 1 if h > 1 else 0]
        if h < self.rungs:
            out.append(v + 1)
        return out

    def step_toward(self, u: int, y: int) -> int:
        if u == y:
            raise ValueError("no step from a vertex to itself")
        lu, hu = self._lh(u)
        ly, hy = self._lh(y)
        if hu == 0:
            return 1 + ly * self.rungs
        if lu == ly and hy > hu:
            return u + 1
        return u - 1 if hu > 1 else 0

    def precedes(self, u: int, v: int) -> bool:
        return (not self.is_black(u)) and self.is_black(v) and self.distance(u, v) == 1


class _ColorView:
    def __init__(self, st: StarTree):
        self.st = st

    def __getitem__(self, v):
        return BLACK if self.st.is_black(v) else WHITE

    def __len__(self):
        return self.st.n


def star_tree(terminals, sigma: int, rungs: int) -> StarTree:
    return StarTree(terminals, sigma, rungs)
