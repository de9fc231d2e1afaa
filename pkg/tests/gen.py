"""Random instance builders shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction

from treeflow import ksubmod as ks
from treeflow.lconvex import OneDimConvex, TwoSeparable
from treeflow.trees import Tree

# acceptance criterion number -> "PASS/FAIL criterion N: ..." line
REPORT: dict = {}


def report(num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    REPORT[num] = line
    print(line)


WEIGHTS = [Fraction(1, 2)] + [Fraction(w) for w in range(1, 5)]


def random_termsum(rng: random.Random, max_n=5, max_k=4, max_terms=8):
    n = rng.randint(1, max_n)
    arities = [rng.randint(1, max_k) for _ in range(n)]
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        w = rng.choice(WEIGHTS)
        i = rng.randrange(n)
        kind = rng.choice(["eps", "theta", "mu", "delta", "unary"])
        if kind == "eps":
            terms.append(ks.Epsilon(i, rng.randint(1, arities[i]), w))
        elif kind == "theta":
            terms.append(ks.Theta(i, rng.randint(0, arities[i]), w))
        elif kind == "unary":
            terms.append(ks.Unary(i, random_unary_table(rng, arities[i]), w))
        else:
            if n < 2:
                continue
            j = rng.choice([c for c in range(n) if c != i])
            if kind == "mu":
                terms.append(ks.Mu(i, j, rng.randint(0, arities[i]), rng.randint(0, arities[j]), w))
            else:
                arities[j] = arities[i]
                perm = list(range(1, arities[i] + 1))
                rng.shuffle(perm)
                terms.append(ks.Delta(i, j, tuple([0] + perm), w))
    # delta terms may have changed arities; drop terms that no longer fit
    f = ks.TermSum(arities, [], Fraction(rng.randint(-3, 3), 2))
    for t in terms:
        f.terms.append(t)
        try:
            f.validate()
        except ValueError:
            f.terms.pop()
    return f


def random_unary_table(rng, k):
    """k-submodular table on S_k: f(a) + f(b) >= 2 f(0) for distinct nonzero a, b."""
    f0 = Fraction(rng.randint(-2, 2))
    a = rng.randint(1, k)
    vals = [f0]
    low = f0 - rng.randint(0, 3)
    for u in range(1, k + 1):
        if u == a:
            vals.append(low)
        else:
            vals.append(2 * f0 - low + rng.randint(0, 3))
    return tuple(vals)


def random_tree(rng, n):
    edges = [(rng.randrange(v), v) for v in range(1, n)]
    perm = list(range(n))
    rng.shuffle(perm)
    return Tree(n, [(perm[u], perm[v]) for u, v in edges], root=perm[0])


def random_convex(rng, length, nondecreasing=True):
    """Convex table on [0, length]: nondecreasing slopes."""
    slope = rng.randint(0 if nondecreasing else -3, 2)
    vals = [Fraction(rng.randint(0, 3))]
    for _ in range(length):
        vals.append(vals[-1] + slope)
        slope += rng.choice([0, 0, 1, 2])
    return OneDimConvex(table=vals)


def random_tree_convex(rng, T):
    """Convex function on a tree: max of a few a*d(., z) + b with a >= 0."""
    pieces = [(rng.randint(0, 3), rng.randrange(T.n), rng.randint(-2, 2))
              for _ in range(rng.randint(1, 3))]
    return [max(a * T.distance(v, z) + b for a, z, b in pieces) for v in range(T.n)]


def random_two_separable(rng, max_tree=7, max_n=3, even=True, anchored=True):
    T = random_tree(rng, rng.randint(2, max_tree))
    n = rng.randint(1, max_n)
    span = 4 * T.n + 4
    unary = [(i, random_tree_convex(rng, T)) for i in range(n) if rng.random() < 0.7]
    pairs = []
    anch = []
    for _ in range(rng.randint(0, 3)):
        i, j = rng.randrange(n), rng.randrange(n)
        g = random_convex(rng, span)
        pairs.append((i, j, g.evenized() if even else g))
    if anchored:
        for _ in range(rng.randint(0, 2)):
            i, j = rng.randrange(n), rng.randrange(n)
            z = rng.randrange(T.n)
            same = [w for w in range(T.n) if T.color[w] == T.color[z]]
            w = rng.choice(same)
            h = random_convex(rng, span)
            anch.append((i, j, z, w, h.evenized() if even else h))
    return TwoSeparable(T, n, unary, pairs, anch)
