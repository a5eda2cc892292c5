"""Right-angled Artin group words: reduction, conjugacy, independence,
convexity, and the Salvetti complex / crossing graph constructions.

A letter is ``(generator, +1 | -1)``.  Letters are ordered by generator
position in the defining graph, positive before negative.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations
from math import lcm

import networkx as nx

from .errors import PreconditionError, ResourceError
from .kernel import SquareComplex, analyze, skey
from .limits import pick


class DefGraph:
    def __init__(self, vertices, edges=()):
        self.vertices = list(dict.fromkeys(vertices))
        self.edges = set()
        for a, b in edges:
            if a == b:
                raise PreconditionError(f"defining graph has a loop at {a}")
            if a not in self.vertices or b not in self.vertices:
                raise PreconditionError(f"edge {a}-{b} uses an unknown generator")
            self.edges.add(frozenset((a, b)))
        self.position = {v: i for i, v in enumerate(self.vertices)}

    def __repr__(self):
        return f"DefGraph({self.vertices}, {sorted(tuple(sorted(e, key=skey)) for e in self.edges)})"

    def commute(self, a, b):
        return a != b and frozenset((a, b)) in self.edges

    def letter_key(self, letter):
        g, s = letter
        return 2 * self.position[g] + (0 if s > 0 else 1)

    def word_key(self, word):
        return (len(word), [self.letter_key(l) for l in word])

    def check(self, word):
        for g, s in word:
            if g not in self.position or s not in (1, -1):
                raise PreconditionError(f"unknown letter {g}", {"letter": str(g)})
        return list(word)

    def complement_components(self, vertices):
        vs = [v for v in self.vertices if v in set(vertices)]
        G = nx.Graph()
        G.add_nodes_from(vs)
        G.add_edges_from((a, b) for a, b in combinations(vs, 2) if not self.commute(a, b))
        return [sorted(c, key=self.position.get) for c in
                sorted(nx.connected_components(G), key=lambda c: min(self.position[v] for v in c))]

    def to_text(self):
        lines = ["gra 1"] + [f"gen {v}" for v in self.vertices]
        for e in sorted(self.edges, key=lambda e: sorted(self.position[v] for v in e)):
            a, b = sorted(e, key=self.position.get)
            lines.append(f"com {a} {b}")
        return "\n".join(lines) + "\n"


def parse_word(text):
    out = []
    for tok in text.split():
        if tok.startswith("-"):
            out.append((tok[1:], -1))
        else:
            out.append((tok.lstrip("+"), 1))
    return out


def format_word(word):
    return " ".join(g if s > 0 else f"-{g}" for g, s in word)


def inverse(word):
    return [(g, -s) for g, s in reversed(word)]


def _free_cancel(G, word):
    out = []
    for g, s in word:
        j = len(out) - 1
        while j >= 0:
            h, t = out[j]
            if h == g and t == -s:
                del out[j]
                break
            if not G.commute(h, g):
                j = -1
                break
            j -= 1
        else:
            j = -1
        if j == -1:
            out.append((g, s))
    return out


def normal_form(G, word):
    """Shortlex-least word in the M2 orbit (greedy: smallest movable letter first)."""
    rest = list(word)
    out = []
    while rest:
        best = None
        for i, (g, s) in enumerate(rest):
            if all(G.commute(h, g) for h, _ in rest[:i]):
                if best is None or G.letter_key((g, s)) < G.letter_key(rest[best]):
                    best = i
        out.append(rest.pop(best))
    return out


def reduce(G: DefGraph, word):
    """Reduced word (minimal length) in shortlex-least canonical form."""
    return normal_form(G, _free_cancel(G, G.check(word)))


def _movable_front(G, word):
    return [i for i, (g, _) in enumerate(word) if all(G.commute(h, g) for h, _ in word[:i])]


def _movable_back(G, word):
    return [i for i, (g, _) in enumerate(word) if all(G.commute(h, g) for h, _ in word[i + 1:])]


def _strip_conjugation(G, word):
    while True:
        front = _movable_front(G, word)
        back = _movable_back(G, word)
        hit = None
        for i in front:
            g, s = word[i]
            for j in back:
                if j != i and word[j] == (g, -s):
                    hit = (i, j)
                    break
            if hit:
                break
        if not hit:
            return word
        word = [l for k, l in enumerate(word) if k not in hit]
        word = _free_cancel(G, word)


def cyclic_orbit(G, word, guard=None):
    """Normal forms reachable by M2 and cyclic permutation (M3)."""
    guard = pick(guard, "orbit")
    start = tuple(normal_form(G, word))
    seen = {start}
    queue = deque([start])
    while queue:
        w = list(queue.popleft())
        nbrs = []
        for i in _movable_front(G, w):
            nbrs.append(w[:i] + w[i + 1:] + [w[i]])
        for i in _movable_back(G, w):
            nbrs.append([w[i]] + w[:i] + w[i + 1:])
        for n in nbrs:
            t = tuple(normal_form(G, n))
            if t not in seen:
                seen.add(t)
                if len(seen) > guard:
                    raise ResourceError(f"cyclic orbit exceeded {guard} words")
                queue.append(t)
    return seen


def cyc_reduce(G: DefGraph, word, guard=None):
    """Cyclically reduced representative: shortlex-least in its M2+M3 orbit."""
    w = _strip_conjugation(G, _free_cancel(G, G.check(word)))
    if not w:
        return []
    return list(min(cyclic_orbit(G, w, guard), key=lambda t: [G.letter_key(l) for l in t]))


def conjugacy_test(G: DefGraph, w1, w2, guard=None) -> bool:
    c1, c2 = cyc_reduce(G, w1, guard), cyc_reduce(G, w2, guard)
    return c1 == c2


def exponent_sums(G: DefGraph, word):
    out = {v: 0 for v in G.vertices}
    for g, s in G.check(word):
        out[g] += s
    return out


def independence_test(G: DefGraph, words, guard=None):
    """Returns (independent, witness); witness = (i, j, m, n, sign) on failure."""
    cyc = []
    for i, w in enumerate(words):
        c = cyc_reduce(G, w, guard)
        if not c:
            raise PreconditionError(f"word {i} is trivial", {"word": i})
        cyc.append(c)
    for i, j in combinations(range(len(cyc)), 2):
        a, b = cyc[i], cyc[j]
        L = lcm(len(a), len(b))
        m, n = L // len(a), L // len(b)
        am = a * m
        for sign in (1, -1):
            bn = (b if sign > 0 else inverse(b)) * n
            if conjugacy_test(G, am, bn, guard):
                return False, {"pair": [i, j], "m": m, "n": n, "sign": sign}
    return True, None


def convexity_test(G: DefGraph, word):
    c = cyc_reduce(G, word)
    if not c:
        raise PreconditionError("trivial word has no support")
    support = [v for v in G.vertices if any(g == v for g, _ in c)]
    parts = G.complement_components(support)
    return {"support": support, "convex": len(parts) == 1, "join": parts if len(parts) > 1 else None}


def command_conditions(G: DefGraph, words):
    pis = [exponent_sums(G, w) for w in words]
    cond1 = all(p[v] != 0 for p in pis for v in G.vertices)
    cond2 = True
    failing = None
    for v, u in combinations(G.vertices, 2):
        ratios = [Fraction(p[v], p[u]) if p[u] != 0 else None for p in pis]
        if any(r is None for r in ratios) or len(set(ratios)) != len(ratios):
            cond2 = False
            failing = failing or [v, u]
    factors = G.complement_components(G.vertices)
    out = {"pi": [{v: p[v] for v in G.vertices} for p in pis], "condition1": cond1, "condition2": cond2,
           "condition2_failing_pair": failing, "join_factors": factors}
    big = [f for f in factors if len(f) > 1]
    if cond1 and cond2 and big:
        V1 = set(big[0])
        out["factor"] = big[0]
        out["projected"] = [[l for l in w if l[0] in V1] for w in words]
    return out


def salvetti(G: DefGraph) -> SquareComplex:
    edges = {v: ("x", "x") for v in G.vertices}
    squares = {}
    for e in sorted(G.edges, key=lambda e: sorted(G.position[v] for v in e)):
        a, b = sorted(e, key=G.position.get)
        squares[f"{a}{b}"] = ((a, 1), (b, 1), (a, -1), (b, -1))
    return SquareComplex(["x"], edges, squares, name="salvetti")


def crossing_graph(X: SquareComplex) -> DefGraph:
    rep = analyze(X)
    verts = [f"H{h.id}" for h in rep.hyperplanes]
    edges = {tuple(ev.hyperplanes) for ev in rep.events if ev.kind == "intersect"}
    return DefGraph(verts, [(f"H{a}", f"H{b}") for a, b in sorted(edges)])
