"""Sums of basic k-submodular terms and their minimization by one max-flow.

A point of S_k1 x ... x S_kn is a tuple with entries in {0, ..., k_i}.
Value 0 is the bottom element; distinct nonzero values are incomparable.

Network encoding: node 0 is the source s, node 1 the sink t, and node
``node[i][u]`` stands for "coordinate i takes value u" (u >= 1).  A point x
corresponds to the cut {s} + {node[i][x_i] : x_i != 0}, whose capacity is
``scale * f(x) + K``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .flow_engine import INF, DirectedNetwork, max_flow


class AllInfinite(Exception):
    """The function is +infinity everywhere."""


class TooLarge(Exception):
    """Enumeration would exceed the configured budget."""


class NotKSubmodular(ValueError):
    """A table that is not k-submodular was supplied."""


def _frac(w) -> Fraction:
    return w if isinstance(w, Fraction) else Fraction(w)


# ---- lattice operations -------------------------------------------------

def meet(x, y):
    return tuple(u if u == v else 0 for u, v in zip(x, y))


def square_join(x, y):
    out = []
    for u, v in zip(x, y):
        if u == 0:
            out.append(v)
        elif v == 0 or u == v:
            out.append(u)
        else:
            out.append(0)
    return tuple(out)


# ---- basic terms ----------------------------------------------------------

def epsilon(a, u):
    return 1 if u == a and a != 0 else 0


def theta(a, u):
    if u == 0:
        return 0
    return -1 if u == a else 1


def mu(a, b, u, v):
    if (u == a and a != 0) or (v == b and b != 0) or (u == 0 and v == 0):
        return 0
    if (v == 0 and u != a) or (u == 0 and v != b):
        return 1
    return 2


def delta(sigma, u, v):
    if v == sigma[u]:
        return 0
    if u == 0 or v == 0:
        return 1
    return 2


@dataclass(frozen=True)
class Epsilon:
    i: int
    a: int
    weight: Fraction = Fraction(1)

    def value(self, x):
        return epsilon(self.a, x[self.i])


@dataclass(frozen=True)
class Theta:
    i: int
    a: int
    weight: Fraction = Fraction(1)

    def value(self, x):
        return theta(self.a, x[self.i])


@dataclass(frozen=True)
class Mu:
    i: int
    j: int
    a: int
    b: int
    weight: Fraction = Fraction(1)

    def value(self, x):
        return mu(self.a, self.b, x[self.i], x[self.j])


@dataclass(frozen=True)
class Delta:
    """delta_sigma(x_i, x_j); ``sigma`` is a permutation tuple with sigma[0] = 0."""
    i: int
    j: int
    sigma: tuple
    weight: Fraction = Fraction(1)

    def value(self, x):
        return delta(self.sigma, x[self.i], x[self.j])


@dataclass(frozen=True)
class Unary:
    """Arbitrary k-submodular table on one coordinate; entries may be INF."""
    i: int
    table: tuple
    weight: Fraction = Fraction(1)

    def value(self, x):
        return self.table[x[self.i]]


@dataclass
class TermSum:
    arities: list
    terms: list = field(default_factory=list)
    offset: Fraction = Fraction(0)

    @property
    def n(self):
        return len(self.arities)

    def points(self):
        return itertools.product(*(range(k + 1) for k in self.arities))

    def validate(self):
        for t in self.terms:
            if _frac(t.weight) < 0:
                raise ValueError("negative weight")
            idx = [t.i] + ([t.j] if hasattr(t, "j") else [])
            for c in idx:
                if not 0 <= c < self.n:
                    raise ValueError("coordinate out of range")
            if isinstance(t, Delta):
                k = self.arities[t.i]
                if self.arities[t.j] != k or sorted(t.sigma) != list(range(k + 1)) \
                        or t.sigma[0] != 0:
                    raise ValueError("delta needs equal arities and a permutation fixing 0")
            if isinstance(t, Unary) and len(t.table) != self.arities[t.i] + 1:
                raise ValueError("unary table has wrong length")
            if isinstance(t, (Epsilon, Theta)) and not 0 <= t.a <= self.arities[t.i]:
                raise ValueError("label out of range")
            if isinstance(t, Epsilon) and t.a == 0:
                raise ValueError("epsilon label must be nonzero")
            if isinstance(t, Mu) and not (0 <= t.a <= self.arities[t.i]
                                          and 0 <= t.b <= self.arities[t.j]):
                raise ValueError("label out of range")


def eval_termsum(f: TermSum, x):
    total = _frac(f.offset)
    for t in f.terms:
        v = t.value(x)
        if v == INF:
            return INF
        w = _frac(t.weight)
        if w:
            total += w * v
    return total


# ---- unary normal form ----------------------------------------------------

@dataclass
class UnaryForm:
    """f = offset + theta_coef * theta_a + sum eps[b] * eps_b, with hard parts."""
    offset: Fraction
    a: int = 0
    theta_coef: Fraction = Fraction(0)
    eps: dict = field(default_factory=dict)
    forbidden: tuple = ()
    fixed: int | None = None


def normalize_unary(table) -> UnaryForm:
    finite = [u for u, v in enumerate(table) if v != INF]
    if not finite:
        raise AllInfinite("unary table has no finite entry")
    if table[0] == INF:
        if len(finite) > 1:
            raise NotKSubmodular("two finite labels need a finite bottom")
        return UnaryForm(offset=_frac(table[finite[0]]), fixed=finite[0])
    vals = {u: _frac(table[u]) for u in finite}
    f0 = vals[0]
    a = min(finite, key=lambda u: (vals[u], u))
    form = UnaryForm(offset=f0, a=a,
                     forbidden=tuple(u for u, v in enumerate(table) if v == INF))
    if a != 0:
        form.theta_coef = f0 - vals[a]
    for b in finite:
        if b in (0, a):
            continue
        c = vals[b] - 2 * f0 + vals[a]
        if c < 0:
            raise NotKSubmodular(f"labels {a},{b} violate the unary inequality")
        if c:
            form.eps[b] = c
    return form


# ---- network representation ---------------------------------------------

@dataclass
class Representation:
    net: DirectedNetwork
    s: int
    t: int
    node: list
    K: int
    scale: int
    fixed: dict

    def cut_of(self, x):
        return {self.s} | {self.node[i][u] for i, u in enumerate(x) if u}

    def legalize(self, X):
        """Drop every group U_i that meets X in two or more nodes."""
        X = set(X)
        for nodes in self.node:
            hit = [v for v in nodes[1:] if v in X]
            if len(hit) > 1:
                X.difference_update(hit)
        return X

    def point_of(self, X):
        x = []
        for i, nodes in enumerate(self.node):
            chosen = [u for u in range(1, len(nodes)) if nodes[u] in X]
            if len(chosen) > 1:
                return None
            x.append(chosen[0] if chosen else 0)
        return tuple(x)


def _gadgets(f: TermSum):
    """Yield (kind, payload, weight) in units of the term weight.

    kinds: ('edge', (i, u, j, v)) node-to-node; ('src', (i, u)); ('snk', (i, u));
    ('K', None); ('hard', ...) for infinite edges.
    """
    out = []
    offset = _frac(f.offset)
    fixed = {}

    def eps(i, a, w):
        out.append(("snk", (i, a), w))

    def th(i, a, w):
        if a == 0:
            for b in range(1, f.arities[i] + 1):
                eps(i, b, w)
            return
        out.append(("src", (i, a), w))
        for b in range(1, f.arities[i] + 1):
            if b != a:
                out.append(("snk", (i, b), w))
        out.append(("K", None, w))

    for t in f.terms:
        w = _frac(t.weight)
        if isinstance(t, Unary):
            form = normalize_unary(t.table)
            if form.fixed is not None:
                if t.i in fixed and fixed[t.i] != form.fixed:
                    raise AllInfinite("conflicting fixed labels")
                fixed[t.i] = form.fixed
                offset += w * form.offset
                continue
            offset += w * form.offset
            if form.theta_coef:
                th(t.i, form.a, w * form.theta_coef)
            for b, c in form.eps.items():
                eps(t.i, b, w * c)
            for b in form.forbidden:
                out.append(("hard_snk", (t.i, b), None))
            continue
        if w == 0:
            continue
        if isinstance(t, Epsilon):
            eps(t.i, t.a, w)
        elif isinstance(t, Theta):
            th(t.i, t.a, w)
        elif isinstance(t, Delta):
            for u in range(1, f.arities[t.i] + 1):
                out.append(("edge", (t.i, u, t.j, t.sigma[u]), w))
                out.append(("edge", (t.j, t.sigma[u], t.i, u), w))
        elif isinstance(t, Mu):
            i, j, a, b = t.i, t.j, t.a, t.b
            ki, kj = f.arities[i], f.arities[j]
            if a == 0 and b == 0:
                th(i, 0, w)
                th(j, 0, w)
            elif b == 0:
                for u in range(1, kj + 1):
                    out.append(("edge", (j, u, i, a), w))
                for c in range(1, ki + 1):
                    if c != a:
                        eps(i, c, w)
            elif a == 0:
                for u in range(1, ki + 1):
                    out.append(("edge", (i, u, j, b), w))
                for c in range(1, kj + 1):
                    if c != b:
                        eps(j, c, w)
            else:
                for u in range(1, kj + 1):
                    if u != b:
                        out.append(("edge", (j, u, i, a), w))
                for u in range(1, ki + 1):
                    if u != a:
                        out.append(("edge", (i, u, j, b), w))
        else:
            raise TypeError(f"unknown term {t!r}")
    for i, u in fixed.items():
        out.append(("hard_src", (i, u), None))
        for b in range(1, f.arities[i] + 1):
            if b != u:
                out.append(("hard_snk", (i, b), None))
    return out, offset, fixed


def build_network(f: TermSum) -> Representation:
    f.validate()
    gadgets, offset, fixed = _gadgets(f)
    scale = 1
    for _, _, w in gadgets:
        if w is not None:
            scale = math.lcm(scale, w.denominator)
    scale = math.lcm(scale, offset.denominator)
    net = DirectedNetwork(2)
    s, t = 0, 1
    node = []
    for k in f.arities:
        node.append([None] + [net.add_node() for _ in range(k)])
    K = 0
    for kind, p, w in gadgets:
        c = INF if w is None else int(w * scale)
        if kind == "K":
            K += c
            continue
        if c == 0:
            continue
        if kind in ("snk", "hard_snk"):
            net.add_edge(node[p[0]][p[1]], t, c)
        elif kind in ("src", "hard_src"):
            net.add_edge(s, node[p[0]][p[1]], c)
        else:
            i, u, j, v = p
            net.add_edge(node[i][u], node[j][v], c)
    K -= int(offset * scale)
    net.source, net.sink = s, t
    return Representation(net, s, t, node, K, scale, fixed)


def minimize(f: TermSum):
    """Minimum point and value via the minimal minimum cut."""
    rep = build_network(f)
    res = max_flow(rep.net, rep.s, rep.t)
    if res.value >= rep.net.big():
        raise AllInfinite("every point violates a hard constraint")
    x = rep.point_of(res.source_side)
    assert x is not None, "minimal min cut is not legal"
    value = eval_termsum(f, x)
    assert value != INF and value * rep.scale + rep.K == res.value, \
        "cut capacity does not match the function value"
    return x, value


def brute_force_min(f: TermSum, cap: int = 10**6):
    size = math.prod(k + 1 for k in f.arities)
    if size > cap:
        raise TooLarge(f"{size} points")
    best = None
    for x in f.points():
        v = eval_termsum(f, x)
        if v != INF and (best is None or v < best[1]):
            best = (x, v)
    if best is None:
        raise AllInfinite("every point is infinite")
    return best


def check_ksubmodular(fn, arities, cap: int = 10**6) -> bool:
    """Exhaustive check of f(x) + f(y) >= f(x meet y) + f(x sqcup y)."""
    pts = list(itertools.product(*(range(k + 1) for k in arities)))
    if len(pts) ** 2 > cap:
        raise TooLarge(f"{len(pts) ** 2} pairs")
    vals = {x: fn(x) for x in pts}
    for x in pts:
        for y in pts:
            lhs = vals[x] + vals[y]
            if lhs == INF:
                continue
            if lhs < vals[meet(x, y)] + vals[square_join(x, y)]:
                return False
    return True


# ---- JSON ------------------------------------------------------------------

def _parse_num(v):
    if v in ("inf", "INF", "Infinity"):
        return INF
    return Fraction(str(v))


def termsum_from_json(obj) -> TermSum:
    arities = [int(k) for k in obj["arities"]]
    terms = []
    for d in obj.get("terms", []):
        kind = d["kind"]
        w = _parse_num(d.get("weight", 1))
        if kind == "epsilon":
            terms.append(Epsilon(int(d["i"]), int(d["a"]), w))
        elif kind == "theta":
            terms.append(Theta(int(d["i"]), int(d["a"]), w))
        elif kind == "mu":
            terms.append(Mu(int(d["i"]), int(d["j"]), int(d["a"]), int(d["b"]), w))
        elif kind == "delta":
            i = int(d["i"])
            sigma = tuple(d.get("sigma", range(arities[i] + 1)))
            terms.append(Delta(i, int(d["j"]), sigma, w))
        elif kind == "unary":
            terms.append(Unary(int(d["i"]), tuple(_parse_num(v) for v in d["table"]), w))
        else:
            raise ValueError(f"unknown term kind {kind!r}")
    f = TermSum(arities, terms, _parse_num(obj.get("offset", 0)))
    f.validate()
    return f
