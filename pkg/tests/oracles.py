"""Independent reference computations shared by the unit and acceptance tests.

These follow the definitions literally with exact fractions and generic
graph search, sharing no search code with the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import networkx as nx

from biest.tiles import Tree, check_strongly_disjoint, order_le


def exact_mass(seq, members) -> Fraction:
    total = Fraction(0)
    for p in members:
        v = complex(seq[p])
        total += Fraction(v.real) ** 2 + Fraction(v.imag) ** 2
    return total


def _subsets(items):
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)


def size_oracle(seq) -> float:
    """Sup over tops, kinds other than the slot, and every member subset."""
    best = Fraction(0)
    for top in seq.universe:
        for i in {1, 2, 3} - {seq.slot}:
            below = [p for p in seq.universe if order_le(p[i], top[i], seq.constants)]
            for sub in _subsets(below):
                best = max(best, exact_mass(seq, sub) / top.I.length)
    return math.sqrt(best)


def energy_oracle(seq) -> float:
    """Max l2 mass over subsets with pairwise disjoint slot tiles."""
    best = Fraction(0)
    j = seq.slot
    for sub in _subsets(seq.universe):
        if all(not p[j].intersects(q[j]) for p, q in itertools.combinations(sub, 2)):
            best = max(best, exact_mass(seq, sub))
    return math.sqrt(best)


def _admissible(seq, members, top, n) -> bool:
    """Per-tree lower bound and the upper bound on every sub-tree."""
    four_n = Fraction(4) ** n
    if exact_mass(seq, members) < four_n * top.I.length:
        return False
    for q in set(members) | {top}:
        for t in (1, 2, 3):
            sub = [p for p in members if order_le(p[t], q[t], seq.constants)]
            if sub and exact_mass(seq, sub) > 4 * four_n * q.I.length:
                return False
    return True


def modified_energy_oracle(seq, n_range) -> float:
    """Sup of ``2^n (sum |I_T|)^(1/2)`` by maximum-weight clique search.

    Nodes are admissible trees (every top, kind and member subset), edges
    join strongly disjoint pairs, and weights are top lengths.
    """
    c = seq.constants
    trees = {}
    for top in seq.universe:
        for kind in (1, 2, 3):
            below = [p for p in seq.universe if order_le(p[kind], top[kind], c)]
            for sub in _subsets(below):
                key = (frozenset(sub), top.I)
                trees.setdefault(key, Tree(top, tuple(sub), kind))
    trees = list(trees.values())
    finest = min(t.I.length for t in trees) if trees else Fraction(1)
    best = 0.0
    for n in range(n_range[0], n_range[1] + 1):
        ok = [t for t in trees if _admissible(seq, t.members, t.top, n)]
        if not ok:
            continue
        g = nx.Graph()
        for k, t in enumerate(ok):
            g.add_node(k, weight=int(t.I.length / finest))
        for a, b in itertools.combinations(range(len(ok)), 2):
            if check_strongly_disjoint([ok[a], ok[b]], seq.slot):
                g.add_edge(a, b)
        _, weight = nx.max_weight_clique(g, weight="weight")
        best = max(best, 2.0**n * math.sqrt(float(weight * finest)))
    return best
