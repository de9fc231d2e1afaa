"""2-separable convex objectives on products of trees.

An objective is

    sum_i f_i(x_i) + sum g_ij(d(x_i, x_j)) + sum h_ij(d(x_i, z) + d(x_j, w))

with convex one-dimensional pieces g, h.  When g and h are even and
nondecreasing the objective is L-convex, and its restriction to the ideal
or filter box of a point is a sum of basic k-submodular terms, so one
max-flow finds the best move.  ``steepest_descent`` iterates that move.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import ksubmod as ks
from .flow_engine import INF
from .trees import filter_, ideal

IDEAL = "ideal"
FILTER = "filter"


class NotLConvex(ValueError):
    pass


class NotMultifacility(ValueError):
    pass


class EmptyDomain(ValueError):
    pass


class DomainError(ValueError):
    pass


class OneDimConvex:
    """Convex function on the integers 0..bound (bound None means unbounded).

    Backed either by a value table or by a callable.
    """

    def __init__(self, fn=None, table=None, bound=None):
        if table is not None:
            table = [Fraction(v) for v in table]
            fn = table.__getitem__
            bound = len(table) - 1 if bound is None else min(bound, len(table) - 1)
        if fn is None:
            raise ValueError("need a table or a callable")
        self._fn = fn
        self.table = table
        self.bound = bound

    def __call__(self, z: int):
        if z < 0 or (self.bound is not None and z > self.bound):
            raise DomainError(f"argument {z} outside [0, {self.bound}]")
        return self._fn(z)

    def delta(self, t: int):
        return self(t) - self(t - 1)

    def delta2(self, t: int):
        return self(t + 1) - 2 * self(t) + self(t - 1)

    def _range(self, upto=None):
        hi = self.bound if upto is None else upto
        if hi is None:
            raise ValueError("unbounded function needs an explicit range")
        return hi

    def is_convex(self, upto=None) -> bool:
        hi = self._range(upto)
        return all(self.delta2(t) >= 0 for t in range(1, hi))

    def is_nondecreasing(self, upto=None) -> bool:
        hi = self._range(upto)
        return all(self.delta(t) >= 0 for t in range(1, hi + 1))

    def is_even(self, upto=None) -> bool:
        hi = self._range(upto)
        return all(2 * self(t) == self(t - 1) + self(t + 1) for t in range(1, hi, 2))

    def evenized(self) -> "OneDimConvex":
        bound = self.bound
        if bound is not None and bound % 2 == 1:
            bound -= 1
        h = self

        def fbar(z):
            if z % 2 == 0:
                return h(z)
            return Fraction(h(z - 1) + h(z + 1)) / 2

        if self.table is not None:
            return OneDimConvex(table=[fbar(z) for z in range(bound + 1)])
        return OneDimConvex(fbar, bound=bound)


def _as_1d(g) -> OneDimConvex:
    if isinstance(g, OneDimConvex):
        return g
    if callable(g):
        return OneDimConvex(g)
    return OneDimConvex(table=g)


def _as_unary(f):
    if callable(f):
        return f
    tab = [INF if v == INF else Fraction(v) for v in f]
    return tab.__getitem__


@dataclass
class TwoSeparable:
    """Objective over tree^n.

    unary:    list of (i, f) with f a callable or table on tree vertices
    pairs:    list of (i, j, g), term g(d(x_i, x_j))
    anchored: list of (i, j, z, w, h), term h(d(x_i, z) + d(x_j, w))
    """
    tree: object
    n: int
    unary: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    anchored: list = field(default_factory=list)

    def __post_init__(self):
        self.unary = [(i, _as_unary(f)) for i, f in self.unary]
        self.pairs = [(i, j, _as_1d(g)) for i, j, g in self.pairs]
        self.anchored = [(i, j, z, w, _as_1d(h)) for i, j, z, w, h in self.anchored]

    def __call__(self, x):
        return eval_objective(self, x)

    def check_lconvex(self):
        """Raise NotLConvex unless pair pieces are even, nondecreasing, convex."""
        diam = 2 * self.tree.n
        for piece in [p[-1] for p in self.pairs] + [p[-1] for p in self.anchored]:
            hi = diam if piece.bound is None else min(piece.bound, diam)
            if not (piece.is_convex(hi) and piece.is_nondecreasing(hi) and piece.is_even(hi)):
                raise NotLConvex("pair piece must be even nondecreasing convex")
        for i, j, z, w, _ in self.anchored:
            if self.tree.is_black(z) != self.tree.is_black(w):
                raise NotLConvex("anchors must share a color")


def eval_objective(om: TwoSeparable, x):
    T = om.tree
    total = Fraction(0)
    for i, f in om.unary:
        v = f(x[i])
        if v == INF:
            return INF
        total += v
    for i, j, g in om.pairs:
        total += g(T.distance(x[i], x[j]))
    for i, j, z, w, h in om.anchored:
        total += h(T.distance(x[i], z) + T.distance(x[j], w))
    return total


def evenize(om: TwoSeparable) -> TwoSeparable:
    return TwoSeparable(
        om.tree, om.n, list(om.unary),
        [(i, j, g.evenized()) for i, j, g in om.pairs],
        [(i, j, z, w, h.evenized()) for i, j, z, w, h in om.anchored])


# ---- local k-submodular form ------------------------------------------------

def local_boxes(T, x, side):
    box = ideal if side == IDEAL else filter_
    return [box(T, xi) for xi in x]


def _toward_index(T, box, u, target):
    """Box index of the neighbor of u toward target (0 when u == target)."""
    if u == target:
        return 0
    return box.index(T.step_toward(u, target))


def local_term_sum(om: TwoSeparable, x, side: str):
    """TermSum on the box of x equal to om there; returns (TermSum, boxes)."""
    T = om.tree
    boxes = local_boxes(T, x, side)
    arities = [len(b) - 1 for b in boxes]
    terms = []
    offset = Fraction(0)
    expand = [len(b) > 1 for b in boxes]
    # a coordinate is expandable iff its box is larger than a point
    if side == IDEAL:
        exp_color = [T.is_black(xi) for xi in x]
    else:
        exp_color = [not T.is_black(xi) for xi in x]

    def unary_table(i, fn):
        terms.append(ks.Unary(i, tuple(fn(v) for v in boxes[i])))

    for i, f in om.unary:
        unary_table(i, f)

    for i, j, g in om.pairs:
        u, v = x[i], x[j]
        if i == j:
            offset += g(0)
            continue
        D = T.distance(u, v)
        ei, ej = exp_color[i], exp_color[j]
        if ei and ej and u == v:
            offset += g(0)
            dg = g(1) - g(0)
            if dg and expand[i]:
                terms.append(ks.Delta(i, j, tuple(range(arities[i] + 1)), dg))
        elif ei and ej:
            a = _toward_index(T, boxes[i], u, v)
            b = _toward_index(T, boxes[j], v, u)
            _pair_both(terms, i, j, a, b, g, D)
            offset += g(D)
        elif ei or ej:
            if ej:
                i, j, u, v = j, i, v, u
            offset += g(D)
            dg = g.delta(D)
            if dg:
                terms.append(ks.Theta(i, _toward_index(T, boxes[i], u, v), dg))
        else:
            offset += g(D)

    for i, j, z, w, h in om.anchored:
        u, v = x[i], x[j]
        if i == j:
            unary_table(i, lambda s, z=z, w=w, h=h: h(T.distance(s, z) + T.distance(s, w)))
            continue
        D = T.distance(u, z) + T.distance(v, w)
        ei, ej = exp_color[i], exp_color[j]
        if ei and ej and D == 0:
            offset += h(0)
            dh = h(1) - h(0)
            if dh:
                for c, k in ((i, arities[i]), (j, arities[j])):
                    for b in range(1, k + 1):
                        terms.append(ks.Epsilon(c, b, dh))
        elif ei and ej:
            a = _toward_index(T, boxes[i], u, z)
            b = _toward_index(T, boxes[j], v, w)
            _pair_both(terms, i, j, a, b, h, D)
            offset += h(D)
        elif ei or ej:
            if ej:
                i, u, z = j, v, w
            offset += h(D)
            dh = h.delta(D) if D > 0 else h(1) - h(0)
            if dh:
                terms.append(ks.Theta(i, _toward_index(T, boxes[i], u, z), dh))
        else:
            offset += h(D)

    return ks.TermSum(arities, terms, offset), boxes


def _pair_both(terms, i, j, a, b, g, D):
    dg = g.delta(D)
    if dg:
        terms.append(ks.Theta(i, a, dg))
        terms.append(ks.Theta(j, b, dg))
    d2 = g.delta2(D)
    if d2:
        terms.append(ks.Mu(i, j, a, b, d2))


def local_minimize(om: TwoSeparable, x, side: str):
    """Best point of the box of x on the given side, and its value."""
    f, boxes = local_term_sum(om, x, side)
    y, val = ks.minimize(f)
    return tuple(boxes[i][u] for i, u in enumerate(y)), val


# ---- steepest descent -------------------------------------------------------

@dataclass
class DescentTrace:
    points: list
    sides: list
    values: list

    @property
    def steps(self) -> int:
        return len(self.points) - 1


def steepest_descent(om: TwoSeparable, x0, max_iter: int | None = None,
                     choose_side=None):
    """Steepest descent from x0; returns (minimizer, trace).

    Each iteration minimizes over the ideal box and the filter box of the
    current point and moves to the strictly better result, preferring the
    ideal side on ties.  ``choose_side(iteration, (yI, vI), (yF, vF), cur)``
    may override the choice; it returns IDEAL, FILTER or None to stop.
    """
    x = tuple(x0)
    cur = eval_objective(om, x)
    if cur == INF:
        raise EmptyDomain("start point is outside the domain")
    trace = DescentTrace([x], [], [cur])
    it = 0
    while max_iter is None or it < max_iter:
        yI, vI = local_minimize(om, x, IDEAL)
        yF, vF = local_minimize(om, x, FILTER)
        if choose_side is not None:
            side = choose_side(it, (yI, vI), (yF, vF), cur)
        elif min(vI, vF) >= cur:
            side = None
        else:
            side = IDEAL if vI <= vF else FILTER
        if side is None:
            break
        y, v = (yI, vI) if side == IDEAL else (yF, vF)
        if v >= cur:
            break
        x, cur = y, v
        trace.points.append(x)
        trace.sides.append(side)
        trace.values.append(cur)
        it += 1
    return x, trace


# ---- rounding and structural checks ----------------------------------------

def two_approx_round(om: TwoSeparable, xstar, y):
    """Round the relaxation minimizer xstar toward the Black vertex y.

    Returns (point, value); the value is at most twice the relaxation value.
    """
    from .trees import round_toward
    if om.anchored:
        raise NotMultifacility("anchored terms are not allowed")
    for _, _, g in om.pairs:
        if g(0) < 0:
            raise NotMultifacility("pair pieces must be nonnegative")
    z = round_toward(om.tree, xstar, y)
    return z, eval_objective(om, z)


def _all_points(T, n, black_only=False, cap=10**6):
    verts = [v for v in T.vertices() if T.is_black(v) or not black_only]
    if len(verts) ** n > cap:
        raise ks.TooLarge(f"{len(verts) ** n} points")
    return itertools.product(verts, repeat=n)


def _linf(T, x, y):
    return max((T.distance(a, b) for a, b in zip(x, y)), default=0)


def _minimizers(om, pts):
    best, arg = None, []
    for p in pts:
        v = eval_objective(om, p)
        if v == INF:
            continue
        if best is None or v < best:
            best, arg = v, [p]
        elif v == best:
            arg.append(p)
    return best, arg


def check_persistency(om: TwoSeparable, ombar: TwoSeparable, x=None) -> bool:
    """Some minimizer of om over Black points lies in the filter box of x.

    x defaults to the descent output for ombar started at a Black point.
    """
    T = om.tree
    if x is None:
        start = _first_feasible(ombar, black_only=True)
        x, _ = steepest_descent(ombar, start)
    _, mins = _minimizers(om, _all_points(T, om.n, black_only=True))
    boxes = [set(filter_(T, xi)) for xi in x]
    return any(all(p[i] in boxes[i] for i in range(om.n)) for p in mins)


def check_proximity(om: TwoSeparable) -> bool:
    """Every minimizer over Black points is within 2n of a global minimizer."""
    T = om.tree
    _, gmins = _minimizers(om, _all_points(T, om.n))
    _, bmins = _minimizers(om, _all_points(T, om.n, black_only=True))
    return all(min(_linf(T, b, g) for g in gmins) <= 2 * om.n for b in bmins)


def _first_feasible(om, black_only=False):
    for p in _all_points(om.tree, om.n, black_only=black_only):
        if eval_objective(om, p) != INF:
            return p
    raise EmptyDomain("objective is infinite everywhere")


def distance_to_opt(om: TwoSeparable, x) -> int:
    _, mins = _minimizers(om, _all_points(om.tree, om.n))
    return min(_linf(om.tree, x, y) for y in mins)


# ---- JSON --------------------------------------------------------------------

def _num(v):
    if v in ("inf", "INF", "Infinity"):
        return INF
    return Fraction(str(v))


def objective_from_json(obj) -> TwoSeparable:
    """Objective document: tree, n, unary/pairs/anchored tables."""
    from .trees import Tree
    t = obj["tree"]
    T = Tree(int(t["n"]), [tuple(e) for e in t["edges"]], root=int(t.get("root", 0)))
    unary = [(int(d["i"]), [_num(v) for v in d["table"]]) for d in obj.get("unary", [])]
    for _, tab in unary:
        if len(tab) != T.n:
            raise ValueError("unary table needs one value per tree vertex")
    pairs = [(int(d["i"]), int(d["j"]), [_num(v) for v in d["table"]])
             for d in obj.get("pairs", [])]
    anchored = [(int(d["i"]), int(d["j"]), int(d["z"]), int(d["w"]),
                 [_num(v) for v in d["table"]]) for d in obj.get("anchored", [])]
    return TwoSeparable(T, int(obj["n"]), unary, pairs, anchored)
