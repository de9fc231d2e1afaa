"""Minimum-cost node-demand multiflow and its tree-valued dual.

Conventions
-----------
* A potential assigns every node a point of the star whose legs are the
  terminals.  A point is ``(leg, h)`` where ``h`` counts half units from
  the origin; the origin is ``(None, 0)``.
* Path values and edge supports are integers counting halves.
* The double covering network is built in integer units of capacity; its
  integral circulations decompose into cycles whose coefficients are the
  half-unit path values.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from . import lconvex
from .flow_engine import (INF, DirectedNetwork, Infeasible, decompose_circulation,
                          feasible_circulation, max_flow)
from .trees import StarTree, Tree

ORIGIN = (None, 0)


class CostNotPositive(ValueError):
    pass


class CapacityViolated(ValueError):
    pass


class NotOptimalPair(ValueError):
    pass


class InvalidInstance(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    cap: int
    cost: int


@dataclass
class Instance:
    n: int
    terminals: list
    edges: list
    demands: dict = field(default_factory=dict)
    problem: str = "N"

    def __post_init__(self):
        self.edges = [e if isinstance(e, Edge) else Edge(*e) for e in self.edges]
        self.demands = {int(s): int(r) for s, r in self.demands.items()}
        for s in self.terminals:
            self.demands.setdefault(s, 0)
        self.validate()

    def validate(self):
        if len(set(self.terminals)) != len(self.terminals):
            raise InvalidInstance("duplicate terminal")
        for s in self.terminals:
            if not 0 <= s < self.n:
                raise InvalidInstance(f"terminal {s} out of range")
        for e in self.edges:
            if e.u == e.v:
                raise InvalidInstance("self-loop")
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise InvalidInstance("edge endpoint out of range")
            if e.cap < 0 or e.cost < 0:
                raise InvalidInstance("negative capacity or cost")
        for s, r in self.demands.items():
            if s not in self.terminals:
                raise InvalidInstance(f"demand on non-terminal {s}")
            if r < 0:
                raise InvalidInstance("negative demand")

    @property
    def r(self):
        return self.demands

    def with_costs(self, costs) -> "Instance":
        return Instance(self.n, list(self.terminals),
                        [Edge(e.u, e.v, e.cap, a) for e, a in zip(self.edges, costs)],
                        dict(self.demands), self.problem)


@dataclass
class Path:
    nodes: tuple
    edges: tuple
    lam: int  # halves

    @property
    def ends(self):
        return self.nodes[0], self.nodes[-1]


@dataclass
class Solution:
    paths: list
    potential: list
    support: list  # halves per edge
    value: Fraction  # primal cost under the original costs
    certified: bool
    stats: dict = field(default_factory=dict)

    @property
    def value_halves(self) -> int:
        return int(2 * self.value)


# ---- star metric -----------------------------------------------------------

def dist(p, q) -> int:
    """Star distance in halves."""
    (lp, hp), (lq, hq) = p, q
    if hp == 0 or hq == 0 or lp == lq:
        return abs(hp - hq)
    return hp + hq


def zero_potential(inst: Instance) -> list:
    return [ORIGIN] * inst.n


def is_proper(inst: Instance, p) -> bool:
    term = set(inst.terminals)
    for i, (leg, h) in enumerate(p):
        if i in term and h > 0 and leg != i:
            return False
        if i not in term and h > 0 and h > p[leg][1]:
            return False
    return True


def make_proper(inst: Instance, p) -> list:
    """Pull every node back onto the segment between the origin and its leg's terminal."""
    term = set(inst.terminals)
    out = list(p)
    for i, (leg, h) in enumerate(p):
        if i not in term and h > 0:
            hs = p[leg][1]
            if h > hs:
                out[i] = (leg, hs) if hs > 0 else ORIGIN
    return out


# ---- basic quantities -----------------------------------------------------

def perturb_costs(inst: Instance):
    """Make all costs positive; returns (instance, multiplier for positive costs)."""
    CZ = sum(e.cap for e in inst.edges if e.cost == 0)
    scale = 2 * CZ + 1
    costs = [1 if e.cost == 0 else scale * e.cost for e in inst.edges]
    return inst.with_costs(costs), scale


def _isolating_network(inst: Instance, s):
    net = DirectedNetwork(inst.n + 1)
    sink = inst.n
    for e in inst.edges:
        if e.cap:
            net.add_edge(e.u, e.v, e.cap)
            net.add_edge(e.v, e.u, e.cap)
    for t in inst.terminals:
        if t != s:
            net.add_edge(t, sink, INF)
    return net, sink


def isolating_cut(inst: Instance, s):
    """(kappa_s, minimal minimum cut separating s from the other terminals)."""
    net, sink = _isolating_network(inst, s)
    res = max_flow(net, s, sink)
    return res.value, set(res.source_side)


def kappas(inst: Instance) -> dict:
    return {s: isolating_cut(inst, s)[0] for s in inst.terminals}


def check_feasibility(inst: Instance):
    """(True, None) or (False, (terminal, violating cut))."""
    for s in inst.terminals:
        k, X = isolating_cut(inst, s)
        if k < inst.r[s]:
            return False, (s, sorted(X))
    return True, None


def omega(inst: Instance, p) -> Fraction:
    """Primal-side objective of the location problem; equals -dual_objective."""
    return -dual_objective(inst, p)


def dual_objective(inst: Instance, p) -> Fraction:
    tot = Fraction(0)
    for s in inst.terminals:
        tot += Fraction(inst.r[s] * p[s][1], 2)
    for e in inst.edges:
        excess = Fraction(dist(p[e.u], p[e.v]), 2) - e.cost
        if excess > 0:
            tot -= e.cap * excess
    return tot


def flow_support(inst: Instance, paths) -> list:
    x = [0] * len(inst.edges)
    for P in paths:
        for e in P.edges:
            x[e] += P.lam
    return x


def primal_cost(inst: Instance, paths) -> Fraction:
    x = flow_support(inst, paths)
    for e, xe in zip(inst.edges, x):
        if xe > 2 * e.cap:
            raise CapacityViolated(f"edge {e} carries {Fraction(xe, 2)}")
    return sum((Fraction(e.cost * xe, 2) for e, xe in zip(inst.edges, x)), Fraction(0))


def terminal_flow(inst: Instance, paths) -> dict:
    f = {s: 0 for s in inst.terminals}
    for P in paths:
        a, b = P.ends
        f[a] += P.lam
        f[b] += P.lam
    return f


# ---- double covering network -------------------------------------------------

@dataclass
class DoubleCover:
    net: DirectedNetwork
    labels: list          # (node, leg or None, '+'/'-')
    index: dict
    arc_kind: list        # 'A', 'B' or 'T'
    arc_ref: list         # edge index for A, node for B, terminal for T
    a_arcs: dict          # edge index -> [arc, arc]
    term_arc: dict        # terminal -> arc
    cls: dict             # edge index -> '=' or '>'
    p: list
    unit: int

    def owner(self, v):
        return self.labels[v][0]


def _class_of(p, e: Edge):
    d = dist(p[e.u], p[e.v])
    if d == 2 * e.cost:
        return "="
    if d > 2 * e.cost:
        return ">"
    return None


def build_double_cover(inst: Instance, p, unit: int = 1, bounds=None) -> DoubleCover:
    """Double covering network relative to a proper potential p.

    ``unit`` multiplies every finite bound.  ``bounds`` optionally maps an
    edge index to a (lower, upper) pair, already in scaled units, that
    overrides the default bounds of both arcs of that edge.
    """
    if any(e.cost <= 0 for e in inst.edges):
        raise CostNotPositive("all edge costs must be positive")
    term = set(inst.terminals)
    for s in inst.terminals:
        if p[s][1] > 0 and p[s][0] != s:
            raise ValueError(f"terminal {s} is off its leg")
    net = DirectedNetwork(0)
    labels, index = [], {}

    def add(lab):
        index[lab] = net.add_node()
        labels.append(lab)

    in_u0 = [i not in term and p[i][1] == 0 for i in range(inst.n)]
    group = [None if in_u0[i] else (i if i in term else p[i][0]) for i in range(inst.n)]
    for i in range(inst.n):
        if in_u0[i]:
            for s in inst.terminals:
                add((i, s, "+"))
                add((i, s, "-"))
        else:
            add((i, None, "+"))
            add((i, None, "-"))

    arc_kind, arc_ref = [], []
    a_arcs, term_arc, cls = {}, {}, {}

    def arc(u, v, lo, up, kind, ref):
        a = net.add_edge(index[u], index[v], up, lo)
        arc_kind.append(kind)
        arc_ref.append(ref)
        return a

    for k, e in enumerate(inst.edges):
        c = _class_of(p, e)
        if c is None or e.cap == 0:
            continue
        cls[k] = c
        lo, up = (e.cap * unit if c == ">" else 0), e.cap * unit
        if bounds and k in bounds:
            lo, up = bounds[k]
        i, j = e.u, e.v
        gi, gj = group[i], group[j]
        if gi is not None and gi == gj:
            if p[i][1] > p[j][1]:
                i, j = j, i
            # i is lower than j on the same leg
            pair = [((j, None, "+"), (i, None, "+")), ((i, None, "-"), (j, None, "-"))]
        elif gi is None or gj is None:
            if gj is None:
                i, j = j, i
            s = group[j]
            pair = [((j, None, "+"), (i, s, "+")), ((i, s, "-"), (j, None, "-"))]
        else:
            pair = [((i, None, "+"), (j, None, "-")), ((j, None, "+"), (i, None, "-"))]
        a_arcs[k] = [arc(u, v, lo, up, "A", k) for u, v in pair]
    for i in range(inst.n):
        if in_u0[i]:
            for s in inst.terminals:
                for t in inst.terminals:
                    if s != t:
                        arc((i, s, "+"), (i, t, "-"), 0, INF, "B", i)
    for s in inst.terminals:
        r = inst.r[s] * unit
        up = INF if p[s][1] == 0 else r
        term_arc[s] = arc((s, None, "-"), (s, None, "+"), r, up, "T", s)
    return DoubleCover(net, labels, index, arc_kind, arc_ref, a_arcs, term_arc, cls,
                       list(p), unit)


@dataclass
class TildeNetwork:
    net: DirectedNetwork
    a_plus: int
    a_minus: int
    resid: dict  # D_p arc -> tilde edge for its slack part
    base: int    # capacity of the cut {a+}

    def circulation(self, dc: DoubleCover, flow) -> list:
        phi = []
        for a in range(dc.net.m):
            v = dc.net.lowers[a]
            if a in self.resid:
                v += flow[self.resid[a]]
            phi.append(v)
        return phi


def tilde_network(dc: DoubleCover) -> TildeNetwork:
    """Max-flow form of the lower-bounded circulation problem on D_p."""
    src = dc.net
    net = DirectedNetwork(src.n + 2)
    ap, am = src.n, src.n + 1
    resid = {}
    base = 0
    for a, (u, v, lo, up) in enumerate(zip(src.tails, src.heads, src.lowers, src.uppers)):
        slack = INF if up == INF else up - lo
        if slack:
            resid[a] = net.add_edge(u, v, slack)
        if lo:
            net.add_edge(ap, v, lo)
            net.add_edge(u, am, lo)
            base += lo
    net.source, net.sink = ap, am
    return TildeNetwork(net, ap, am, resid, base)


def circulation_on(dc: DoubleCover):
    """Feasible circulation of D_p via the tilde max-flow, or None."""
    tn = tilde_network(dc)
    res = max_flow(tn.net, tn.a_plus, tn.a_minus)
    if res.value != tn.base:
        return None, tn, res
    return tn.circulation(dc, res.flow), tn, res


# ---- multiflow extraction ---------------------------------------------------

def extract_multiflow(inst: Instance, p, phi, dc: DoubleCover | None = None) -> list:
    """Half-integral multiflow from an integral circulation of D_p."""
    if dc is None:
        dc = build_double_cover(inst, p)
    cycles = decompose_circulation(dc.net, phi, with_edges=True)
    agg: dict = defaultdict(int)
    for _, arcs, q in cycles:
        tpos = [k for k, a in enumerate(arcs) if dc.arc_kind[a] == "T"]
        if not tpos:
            raise AssertionError("cycle without a terminal edge")
        start = tpos[0] + 1
        seq = arcs[start:] + arcs[:start]
        nodes = [dc.owner(dc.net.heads[seq[-1]])]
        edges = []
        for a in seq:
            kind = dc.arc_kind[a]
            if kind == "A":
                nodes.append(dc.owner(dc.net.heads[a]))
                edges.append(dc.arc_ref[a])
            elif kind == "T":
                key = _canon(nodes, edges)
                agg[key] += q
                nodes = [dc.owner(dc.net.heads[a])]
                edges = []
    return [Path(nodes, edges, lam) for (nodes, edges), lam in sorted(agg.items())]


def _canon(nodes, edges):
    if nodes[0] > nodes[-1]:
        nodes, edges = nodes[::-1], edges[::-1]
    return tuple(nodes), tuple(edges)


# ---- optimality certificate ---------------------------------------------------

def check_paths(inst: Instance, paths) -> list:
    problems = []
    term = set(inst.terminals)
    for P in paths:
        if P.lam <= 0:
            problems.append(f"path {P.nodes} has nonpositive value")
        if len(P.nodes) != len(P.edges) + 1 or len(P.nodes) < 2:
            problems.append(f"path {P.nodes} is malformed")
            continue
        a, b = P.ends
        if a not in term or b not in term or a == b:
            problems.append(f"path {P.nodes} does not join distinct terminals")
        for k, e in enumerate(P.edges):
            if not 0 <= e < len(inst.edges):
                problems.append(f"path {P.nodes} uses unknown edge {e}")
                continue
            E = inst.edges[e]
            if {E.u, E.v} != {P.nodes[k], P.nodes[k + 1]}:
                problems.append(f"path {P.nodes} edge {e} does not join consecutive nodes")
    return problems


def verify_optimality(inst: Instance, paths, p):
    """Check the joint optimality conditions; returns (ok, list of violations)."""
    report = check_paths(inst, paths)
    for s in inst.terminals:
        if p[s][1] > 0 and p[s][0] != s:
            report.append(f"terminal {s} potential is off its own leg")
    if report:
        return False, report
    x = flow_support(inst, paths)
    fs = terminal_flow(inst, paths)
    for k, (e, xe) in enumerate(zip(inst.edges, x)):
        if xe > 2 * e.cap:
            report.append(f"capacity exceeded on edge {k}")
        d = dist(p[e.u], p[e.v])
        if d > 2 * e.cost and xe != 2 * e.cap:
            report.append(f"(1) edge {k} above cost but not saturated")
        if d < 2 * e.cost and xe != 0:
            report.append(f"(2) edge {k} below cost but carries flow")
    for P in paths:
        walk = sum(dist(p[u], p[v]) for u, v in zip(P.nodes, P.nodes[1:]))
        if walk != dist(p[P.nodes[0]], p[P.nodes[-1]]):
            report.append(f"(3) path {P.nodes} is not geodesic")
    for s in inst.terminals:
        if fs[s] < 2 * inst.r[s]:
            report.append(f"demand of terminal {s} not met")
        if p[s][1] > 0 and fs[s] != 2 * inst.r[s]:
            report.append(f"(4) terminal {s} has positive potential but excess flow")
    if not report:
        primal = primal_cost(inst, paths)
        dual = dual_objective(inst, p)
        if primal != dual:
            report.append(f"duality gap: primal {primal} dual {dual}")
    return not report, report


# ---- scaling solver -----------------------------------------------------------

def _phase_objective(inst: Instance, T: StarTree, sigma: int):
    step = Fraction(2) ** sigma
    unary = []
    for s in inst.terminals:
        r = inst.r[s]

        def f(v, s=s, r=r):
            leg, j = T.decode(v)
            if j > 0 and leg != s:
                return INF
            return -r * step * j
        unary.append((s, f))
    pairs = []
    for e in inst.edges:
        if e.cap == 0:
            continue

        def g(z, c=e.cap, a=e.cost):
            v = step * z - a
            return c * v if v > 0 else Fraction(0)
        pairs.append((e.u, e.v, lconvex.OneDimConvex(g).evenized()))
    return lconvex.TwoSeparable(T, inst.n, unary, pairs)


def scaling_levels(inst: Instance):
    """(L, first sigma) for an instance with positive costs."""
    A = max((e.cost for e in inst.edges), default=1)
    L = (max(1, inst.n * A) - 1).bit_length()  # ceil(log2(nA))
    return L, max(L - 1, -1)


def _to_vertex(T: StarTree, pt):
    leg, h = pt
    unit = 2 ** (T.sigma + 1)
    if h % unit:
        raise AssertionError("potential is off the grid")
    return T.encode(leg, h // unit) if h else 0


def _from_vertex(T: StarTree, v):
    leg, j = T.decode(v)
    return (leg, j * 2 ** (T.sigma + 1)) if j else ORIGIN


def _require_n(inst: Instance):
    if inst.problem not in ("N", "L"):
        raise InvalidInstance(f"expected a node-demand instance, got {inst.problem}")
    ok, wit = check_feasibility(inst)
    if not ok:
        raise Infeasible(f"terminal {wit[0]} cannot meet its demand; cut {wit[1]}")


def _finish(inst: Instance, pinst: Instance, p, stats) -> Solution:
    dc = build_double_cover(pinst, p)
    phi, _, _ = circulation_on(dc)
    if phi is None:
        raise AssertionError("final potential has no feasible circulation")
    paths = extract_multiflow(pinst, p, phi, dc)
    ok, report = verify_optimality(pinst, paths, p)
    if not ok:
        raise AssertionError("; ".join(report))
    assert primal_cost(pinst, paths) == dual_objective(pinst, p)
    return Solution(paths, p, flow_support(inst, paths), primal_cost(inst, paths),
                    True, stats)


def solve_scaling(inst: Instance) -> Solution:
    """Proximity scaling on the star grid, then a circulation on D_p."""
    _require_n(inst)
    pinst, _ = perturb_costs(inst)
    L, top = scaling_levels(pinst)
    n = inst.n
    p = zero_potential(inst)
    phases = []
    for sigma in range(top, -2, -1):
        T = StarTree(inst.terminals, sigma, 2 ** (L - sigma))
        om = _phase_objective(pinst, T, sigma)
        x0 = tuple(_to_vertex(T, pt) for pt in p)
        x, trace = lconvex.steepest_descent(om, x0)
        assert trace.steps <= 6 * n + 6, f"phase {sigma} took {trace.steps} steps"
        phases.append({"sigma": sigma, "steps": trace.steps})
        p = make_proper(inst, [_from_vertex(T, v) for v in x])
    stats = {"L": L, "phases": phases,
             "flows": sum(2 * (ph["steps"] + 1) for ph in phases) + 1}
    return _finish(inst, pinst, p, stats)


# ---- descent by the double covering network -----------------------------------

def _groups(dc: DoubleCover):
    """Node sets of the tilde network owned by integral / half-odd potentials."""
    V1, V2 = set(), set()
    for v, (i, _, _) in enumerate(dc.labels):
        (V1 if dc.p[i][1] % 2 == 0 else V2).add(v)
    return V1, V2


def is_legal_cut(dc: DoubleCover, X, V1, V2) -> bool:
    if X & V1 and X & V2:
        return False
    by_node = defaultdict(list)
    for v in X:
        if v < len(dc.labels):
            by_node[dc.labels[v][0]].append(dc.labels[v])
    terms = set(t for t in dc.term_arc)
    for i, labs in by_node.items():
        if labs[0][1] is None:
            if len(labs) > 1:
                return False
        else:
            plus = [s for _, s, sg in labs if sg == "+"]
            minus = {s for _, s, sg in labs if sg == "-"}
            if len(plus) != 1 or minus != terms - {plus[0]}:
                return False
    return True


def move(dc: DoubleCover, X) -> list:
    p = list(dc.p)
    for v in X:
        if v >= len(dc.labels):
            continue
        i, s, sign = dc.labels[v]
        if s is not None:
            if sign == "+":
                p[i] = (s, 1)
        else:
            leg, h = dc.p[i]
            if leg is None:
                leg = i  # a terminal sitting at the origin
            h += 1 if sign == "+" else -1
            p[i] = (leg, h) if h else ORIGIN
    return p


def solve_descent(inst: Instance, max_steps: int | None = None) -> Solution:
    """Descent on half-integral potentials driven by minimal min cuts of D~_p."""
    _require_n(inst)
    pinst, _ = perturb_costs(inst)
    p = zero_potential(inst)
    steps = []
    it = 0
    while True:
        dc = build_double_cover(pinst, p)
        tn = tilde_network(dc)
        res = max_flow(tn.net, tn.a_plus, tn.a_minus)
        if res.value == tn.base:
            break
        if max_steps is not None and it >= max_steps:
            raise RuntimeError("step limit reached")
        X = set(res.source_side)
        V1, V2 = _groups(dc)
        X1, X2 = X - V2, X - V1
        c1, c2 = tn.net.cut_capacity(X1), tn.net.cut_capacity(X2)
        if c1 < c2 or (c1 == c2 and it % 2 == 0):
            Xj, cj, side = X1, c1, 1
        else:
            Xj, cj, side = X2, c2, 2
        assert cj < tn.base, "no improving legal cut"
        assert is_legal_cut(dc, Xj, V1, V2), "cut is not legal"
        q = move(dc, Xj)
        gain = omega(pinst, q) - omega(pinst, p)
        steps.append({"side": side, "gain": gain,
                      "identity": gain == Fraction(cj - tn.base, 2)})
        p = make_proper(inst, q)
        it += 1
    stats = {"steps": steps, "iterations": it, "flows": it + 2}
    phi = tn.circulation(dc, res.flow)
    paths = extract_multiflow(pinst, p, phi, dc)
    ok, report = verify_optimality(pinst, paths, p)
    if not ok:
        raise AssertionError("; ".join(report))
    return Solution(paths, p, flow_support(inst, paths), primal_cost(inst, paths),
                    True, stats)


# ---- free multiflow and multiway cut ---------------------------------------------

@dataclass
class MCMFReduction:
    instance: Instance
    bar: dict        # terminal -> new node
    link: dict       # terminal -> new edge index (s, s-bar)
    edge_map: list   # new edge index -> original edge index or None


def reduce_mcmf(inst: Instance) -> MCMFReduction:
    kap = kappas(inst)
    term = set(inst.terminals)
    bar = {s: inst.n + k for k, s in enumerate(inst.terminals)}
    edges, emap = [], []
    for k, e in enumerate(inst.edges):
        u = bar[e.u] if e.u in term else e.u
        v = bar[e.v] if e.v in term else e.v
        edges.append(Edge(u, v, e.cap, e.cost))
        emap.append(k)
    link = {}
    for s in inst.terminals:
        link[s] = len(edges)
        edges.append(Edge(s, bar[s], kap[s], 0))
        emap.append(None)
    red = Instance(inst.n + len(bar), list(inst.terminals), edges,
                   {s: kap[s] for s in inst.terminals}, "N")
    return MCMFReduction(red, bar, link, emap)


def lovasz_cherkassky_value(inst: Instance) -> Fraction:
    return Fraction(sum(kappas(inst).values()), 2)


def solve_mcmf(inst: Instance, algorithm: str = "scaling"):
    """Minimum-cost maximum free multiflow; returns (Solution, reduced Solution)."""
    red = reduce_mcmf(inst)
    solver = solve_scaling if algorithm == "scaling" else solve_descent
    sol = solver(red.instance)
    unbar = {b: s for s, b in red.bar.items()}
    paths = []
    for P in sol.paths:
        nodes = [unbar.get(v, v) for v in P.nodes[1:-1]]
        edges = [red.edge_map[e] for e in P.edges[1:-1]]
        paths.append(Path(tuple(nodes), tuple(edges), P.lam))
    out = Solution(paths, sol.potential, flow_support(inst, paths),
                   primal_cost(inst, paths), sol.certified, sol.stats)
    return out, sol


def flow_value(inst: Instance, paths) -> Fraction:
    return Fraction(sum(P.lam for P in paths), 2)


@dataclass
class MultiwayResult:
    relaxation: Fraction
    assignment: dict      # node -> terminal, None when unassigned
    partition: dict       # node -> terminal
    cut: Fraction
    target: int


def cut_capacity(inst: Instance, part: dict) -> int:
    return sum(e.cap for e in inst.edges if part[e.u] != part[e.v])


def multiway_cut(inst: Instance) -> MultiwayResult:
    """Relaxation by isolating cuts, then rounding toward the best terminal."""
    term = list(inst.terminals)
    cuts = {s: isolating_cut(inst, s)[1] for s in term}
    for a in range(len(term)):
        for b in range(a + 1, len(term)):
            s, t = term[a], term[b]
            cuts[s], cuts[t] = cuts[s] - cuts[t], cuts[t] - cuts[s]
    assign = {}
    for i in range(inst.n):
        owners = [s for s in term if i in cuts[s]]
        assign[i] = owners[0] if owners else None
    # star: vertex 0 is the center (White), vertex 1 + l is terminal leg l
    k = len(term)
    star = Tree(k + 1, [(0, l + 1) for l in range(k)], root=1 if k else 0)
    vert = {s: l + 1 for l, s in enumerate(term)}
    tset = set(term)
    inner = [i for i in range(inst.n) if i not in tset]
    pos = {i: c for c, i in enumerate(inner)}
    unary = defaultdict(lambda: defaultdict(Fraction))
    pairs = []
    const = Fraction(0)
    for e in inst.edges:
        if e.u in tset and e.v in tset:
            const += e.cap
        elif e.u in tset or e.v in tset:
            s, i = (e.u, e.v) if e.u in tset else (e.v, e.u)
            unary[pos[i]][vert[s]] += Fraction(e.cap, 2)
        else:
            pairs.append((pos[e.u], pos[e.v], _half_linear(e.cap, 2 * k + 2)))
    un = []
    for c, wts in unary.items():
        un.append((c, [sum(w * star.distance(v, z) for z, w in wts.items())
                       for v in range(k + 1)]))
    om = lconvex.TwoSeparable(star, len(inner), un, pairs)
    xstar = tuple(0 if assign[i] is None else vert[assign[i]] for i in inner)
    relax = om(xstar) + const
    best = None
    for s in term:
        z, val = lconvex.two_approx_round(om, xstar, vert[s])
        part = {t: t for t in term}
        part.update({i: term[z[pos[i]] - 1] for i in inner})
        cut = Fraction(cut_capacity(inst, part))
        assert cut == val + const
        if best is None or cut < best[0]:
            best = (cut, part, s)
    if best is None:
        best = (Fraction(0), {i: None for i in range(inst.n)}, None)
    return MultiwayResult(relax, assign, best[1], best[0], best[2])


def _half_linear(c, bound):
    return lconvex.OneDimConvex(table=[Fraction(c * z, 2) for z in range(bound + 1)])


# ---- terminal backup fixing -----------------------------------------------------

def fix_half_integral(inst: Instance, x, p) -> list:
    """Fix non-integral support values to integers where optimality allows.

    ``x`` is a support in halves, ``p`` a potential with (x, p) jointly
    optimal for ``inst`` (positive costs).  Edges are processed in input
    order; returns the fixed support in halves.
    """
    x = list(x)
    # both arcs of an edge carry its support; halves make every bound integral
    pinned = {k: (x[k], x[k]) for k in range(len(inst.edges)) if x[k] % 2 == 0}
    free = {k: (x[k] - 1, x[k] + 1) for k in range(len(inst.edges)) if x[k] % 2}

    def feasible(bounds):
        dc = build_double_cover(inst, p, unit=2, bounds=bounds)
        for k, (lo, up) in bounds.items():
            if k not in dc.a_arcs and (lo > 0):
                return False
        try:
            feasible_circulation(dc.net)
        except Infeasible:
            return False
        return True

    exact = {k: (x[k], x[k]) for k in range(len(inst.edges))}
    if not feasible(exact):
        raise NotOptimalPair("support and potential are not jointly optimal")
    out = list(x)
    for k in range(len(inst.edges)):
        if k not in free:
            continue
        del free[k]
        for val in (x[k] - 1, x[k] + 1):
            trial = {**pinned, **free, k: (val, val)}
            if feasible(trial):
                out[k] = val
                break
        pinned[k] = (out[k], out[k])
    return out


# ---- random instances -------------------------------------------------------

def random_instance(rng, nodes: int, terminals: int, maxcap: int, maxcost: int,
                    edge_prob: float = 0.5, max_edges: int | None = None,
                    problem: str = "N") -> Instance:
    """Random connected instance with demands r(s) <= kappa_s (always feasible)."""
    term = sorted(rng.sample(range(nodes), terminals))
    pairs = [(i, j) for i in range(nodes) for j in range(i + 1, nodes)]
    order = list(range(1, nodes))
    rng.shuffle(order)
    chosen = set()
    seen = [0]
    for v in order:  # random spanning tree
        u = rng.choice(seen)
        chosen.add((min(u, v), max(u, v)))
        seen.append(v)
    for pr in pairs:
        if pr not in chosen and rng.random() < edge_prob:
            chosen.add(pr)
    chosen = sorted(chosen)
    if max_edges is not None and len(chosen) > max_edges:
        chosen = sorted(rng.sample(chosen, max_edges))
    edges = [Edge(u, v, rng.randint(1, maxcap), rng.randint(0, maxcost)) for u, v in chosen]
    inst = Instance(nodes, term, edges, {}, problem)
    kap = kappas(inst)
    inst.demands = {s: rng.randint(0, kap[s]) for s in term}
    return inst


# ---- JSON -------------------------------------------------------------------

PROBLEMS = ("N", "L", "MCMF", "MULTIWAY")


def _int(v, what):
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInstance(f"{what} must be an integer, got {v!r}")
    return v


def instance_from_json(obj) -> Instance:
    """Parse and validate an instance document."""
    if not isinstance(obj, dict):
        raise InvalidInstance("instance must be a JSON object")
    unknown = set(obj) - {"n", "terminals", "edges", "demands", "problem"}
    if unknown:
        raise InvalidInstance(f"unknown fields {sorted(unknown)}")
    try:
        n = _int(obj["n"], "n")
        terminals = [_int(s, "terminal") for s in obj["terminals"]]
        edges = []
        for d in obj["edges"]:
            if isinstance(d, dict):
                edges.append(Edge(_int(d["u"], "u"), _int(d["v"], "v"),
                                  _int(d["cap"], "cap"), _int(d.get("cost", 0), "cost")))
            else:
                edges.append(Edge(*[_int(x, "edge field") for x in d]))
        demands = {int(s): _int(r, "demand") for s, r in obj.get("demands", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInstance):
            raise
        raise InvalidInstance(f"malformed instance: {exc!r}") from None
    problem = obj.get("problem", "N")
    if problem not in PROBLEMS:
        raise InvalidInstance(f"unknown problem {problem!r}")
    return Instance(n, terminals, edges, demands, problem)


def instance_to_json(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "terminals": list(inst.terminals),
        "edges": [{"u": e.u, "v": e.v, "cap": e.cap, "cost": e.cost} for e in inst.edges],
        "demands": {str(s): r for s, r in sorted(inst.demands.items())},
        "problem": inst.problem,
    }


def solution_to_json(sol: Solution) -> dict:
    return {
        "value_halves": sol.value_halves,
        "paths": [{"nodes": list(P.nodes), "edges": list(P.edges), "lambda_halves": P.lam}
                  for P in sol.paths],
        "support_halves": {str(k): x for k, x in enumerate(sol.support) if x},
        "potential": [{"leg": leg, "height_halves": h} for leg, h in sol.potential],
        "certified": sol.certified,
    }


def _edges_for(inst: Instance, nodes):
    """First edge joining each consecutive pair (used when a path lists no edges)."""
    out = []
    for u, v in zip(nodes, nodes[1:]):
        k = next((k for k, e in enumerate(inst.edges) if {e.u, e.v} == {u, v}), None)
        if k is None:
            raise InvalidInstance(f"no edge joins {u} and {v}")
        out.append(k)
    return tuple(out)


def paths_from_json(inst: Instance, obj) -> list:
    paths = []
    try:
        for d in obj.get("paths", []):
            nodes = tuple(_int(v, "path node") for v in d["nodes"])
            if "edges" in d:
                edges = tuple(_int(e, "path edge") for e in d["edges"])
            else:
                edges = _edges_for(inst, nodes)
            paths.append(Path(nodes, edges, _int(d["lambda_halves"], "lambda_halves")))
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"malformed path: {exc!r}") from None
    return paths


def potential_from_json(inst: Instance, obj) -> list:
    pot = obj.get("potential")
    if not isinstance(pot, list) or len(pot) != inst.n:
        raise InvalidInstance("potential must list one point per node")
    out = []
    for d in pot:
        leg, h = d.get("leg"), _int(d.get("height_halves", 0), "height_halves")
        if h < 0:
            raise InvalidInstance("negative height")
        if h > 0 and leg not in inst.terminals:
            raise InvalidInstance(f"leg {leg!r} is not a terminal")
        out.append((leg, h) if h else ORIGIN)
    return out
