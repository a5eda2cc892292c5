"""Finite convex pieces of universal covers and CAT(0) combinatorics on them.

A :class:`Region` is a finite CAT(0) square complex (simply connected, NPC)
with its walls and their halfspaces; :class:`DevelopedBall` is a region
obtained by developing a directly special complex around a base vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import networkx as nx

from . import raag
from .errors import PreconditionError, PropertyViolation, ResourceError
from .kernel import (CombinatorialMap, Path, SquareComplex, Subcomplex, check_map, crossing_sign,
                     hyperplane_index, hyperplanes, require_directly_special, skey)
from .limits import pick


class RaagWordOracle:
    """Null-homotopy via the signed hyperplane-crossing word in the RAAG of the crossing graph."""

    def __init__(self, X: SquareComplex):
        require_directly_special(X)
        self.X = X
        self.graph = raag.crossing_graph(X)
        self.hidx = hyperplane_index(X)

    def word(self, path: Path):
        return [(f"H{self.hidx[t[0]]}", crossing_sign(self.X, t)) for t in path.steps]

    def is_null(self, loop: Path) -> bool:
        if not loop.is_loop:
            raise PreconditionError("oracle expects a closed path")
        return not raag.reduce(self.graph, self.word(loop))

    def key(self, path: Path):
        """Canonical key of the universal-cover vertex at the end of a path from a fixed base."""
        return (path.end, tuple(raag.reduce(self.graph, self.word(path))))


def raag_word_oracle(X: SquareComplex) -> RaagWordOracle:
    return RaagWordOracle(X)


class Region:
    """Finite CAT(0) square complex with walls and halfspaces."""

    def __init__(self, D: SquareComplex, base=None):
        self.complex = D
        self.base = base if base is not None else D.vertices[0]
        self._dist = {}

    @cached_property
    def walls(self):
        return hyperplanes(self.complex)

    @cached_property
    def wall_of_edge(self):
        return hyperplane_index(self.complex)

    @cached_property
    def sides(self):
        """wall id -> dict vertex -> 0/1, side 0 containing the base vertex."""
        D = self.complex
        out = {}
        for w in self.walls:
            rest = [e for e in D.edges if e not in w.edges]
            comps = D.components(None, rest)
            if len(comps) != 2:
                raise PropertyViolation(f"wall {w.id} does not separate the region into two halfspaces",
                                        {"wall": w.id, "components": len(comps)})
            first = 0 if self.base in comps[0] else 1
            side = {}
            for k, comp in enumerate(comps):
                for v in comp:
                    side[v] = 0 if k == first else 1
            out[w.id] = side
        return out

    @cached_property
    def crossing(self):
        D = self.complex
        pairs = set()
        for s, bd in D.squares.items():
            a, b = self.wall_of_edge[bd[0][0]], self.wall_of_edge[bd[1][0]]
            pairs.add(frozenset((a, b)))
        return pairs

    def cross(self, a, b):
        return frozenset((a, b)) in self.crossing

    def distances_from(self, v):
        if v not in self._dist:
            D = self.complex
            dist = {v: 0}
            queue = deque([v])
            while queue:
                u = queue.popleft()
                for t in D.traversals_from[u]:
                    w = D.head(t)
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        queue.append(w)
            self._dist[v] = dist
        return self._dist[v]

    def distance(self, u, v):
        return self.distances_from(u)[v]

    def separating(self, u, v):
        return [w.id for w in self.walls if self.sides[w.id][u] != self.sides[w.id][v]]

    def crossing_walls(self, sub: Subcomplex):
        return {self.wall_of_edge[e] for e in sub.edges}

    def separates(self, wid, A, B):
        side = self.sides[wid]
        sa = {side[v] for v in A}
        sb = {side[v] for v in B}
        return len(sa) == 1 and len(sb) == 1 and sa != sb

    def halfspace(self, wid, v):
        side = self.sides[wid]
        return frozenset(u for u in self.complex.vertices if side[u] == side[v])

    def is_convex(self, sub: Subcomplex) -> bool:
        return bool(sub.vertices) and sub.is_connected() and check_map(sub.inclusion()).local_isometry

    def full(self, vertices, name=""):
        return Subcomplex.full(self.complex, vertices, name)

    # d-infinity

    def disjoint_chain(self, u, walls):
        """Longest family of pairwise non-crossing walls among ``walls`` (all separating u from something).

        Ordered from u outwards."""
        far = {w: self.complex.vertex_set - self.halfspace(w, u) for w in walls}
        order = sorted(walls, key=lambda w: (-len(far[w]), w))
        best = {}
        prev = {}
        for i, w in enumerate(order):
            best[w], prev[w] = 1, None
            for w0 in order[:i]:
                if not self.cross(w0, w) and far[w] < far[w0] and best[w0] + 1 > best[w]:
                    best[w], prev[w] = best[w0] + 1, w0
        if not order:
            return []
        end = max(order, key=lambda w: (best[w], -order.index(w)))
        chain = []
        while end is not None:
            chain.append(end)
            end = prev[end]
        return list(reversed(chain))

    def dinf(self, u, v):
        return len(self.disjoint_chain(u, self.separating(u, v)))

    @cached_property
    def dimension(self):
        dim = 1 if self.complex.edges else 0
        for v in self.complex.vertices:
            G = nx.Graph()
            G.add_nodes_from(self.complex.darts_at[v])
            G.add_edges_from((a, b) for a, b, _, _ in self.complex.corners[v])
            for c in nx.find_cliques(G):
                dim = max(dim, len(c))
        return dim


class DevelopedBall(Region):
    def __init__(self, D, base, development: CombinatorialMap, radius, paths, keyfun):
        super().__init__(D, base)
        self.development = development
        self.radius = radius
        self.paths = paths  # D vertex -> representative path in X from x
        self._keyfun = keyfun
        self._by_key = {keyfun(p): v for v, p in paths.items()}

    @property
    def X(self):
        return self.development.codomain

    @cached_property
    def boundary(self):
        X = self.X
        out = set()
        for v in self.complex.vertices:
            if len(self.complex.darts_at[v]) < len(X.darts_at[self.development.vmap[v]]):
                out.add(v)
        return out

    def vertex_for(self, path: Path):
        return self._by_key.get(self._keyfun(path))

    def lift(self, path: Path, start=None) -> Path:
        """Lift an X-path starting at the development's image of ``start`` (default base)."""
        start = self.base if start is None else start
        p = self.paths[start]
        if path.start != p.end:
            raise PreconditionError("path does not start at the image of the start vertex")
        steps = []
        cur = start
        X = self.X
        for t in path.steps:
            q = Path(p.start, p.steps + (t,), X.head(t))
            nxt = self.vertex_for(q)
            if nxt is None:
                raise PreconditionError("lifted path leaves the developed ball", {"radius": self.radius})
            steps.append(self._edge_between(cur, nxt, t))
            p, cur = self.paths[nxt], nxt
        return Path(start, tuple(steps), cur)

    def _edge_between(self, u, w, t):
        D = self.complex
        for tt in D.traversals_from[u]:
            if D.head(tt) == w and self.development.traversal_image(tt) == t:
                return tt
        raise PropertyViolation("missing edge in developed ball")


def _pairwise_keyfun(oracle, X):
    reps = []

    def keyfun(path):
        for k, rep in enumerate(reps):
            if rep.end == path.end and oracle.is_null(rep + path.inverse()):
                return k
        reps.append(path)
        return len(reps) - 1

    return keyfun


class _Developer:
    """Grows a finite convex piece of the universal cover from representative paths."""

    def __init__(self, X, x, oracle, budget):
        require_directly_special(X)
        self.X, self.x, self.budget = X, x, pick(budget, "ball")
        oracle = oracle or raag_word_oracle(X)
        self.keyfun = oracle.key if hasattr(oracle, "key") else _pairwise_keyfun(oracle, X)
        self.paths = {}
        self.index = {}
        self.root, _ = self.add(Path(x))

    def add(self, path):
        k = self.keyfun(path)
        if k in self.index:
            return self.index[k], False
        name = f"d{len(self.paths)}"
        self.index[k] = name
        self.paths[name] = path
        if len(self.paths) > self.budget:
            raise ResourceError(f"development exceeded {self.budget} vertices")
        return name, True

    def step(self, v, t):
        p = self.paths[v]
        return Path(p.start, p.steps + (t,), self.X.head(t))

    def find(self, v, t):
        return self.index.get(self.keyfun(self.step(v, t)))

    def close(self):
        """Close under square completion: two edges of a square corner force the square."""
        X = self.X
        todo = deque(self.paths)
        while todo:
            v = todo.popleft()
            for a, b, s, k in X.corners[self.paths[v].end]:
                w1 = self.find(v, SquareComplex.leaving(a))
                w2 = self.find(v, SquareComplex.leaving(b))
                if w1 is None or w2 is None:
                    continue
                # corner at head(t_k): the square continues t_{k+1}, t_{k+2} to the opposite corner
                w, new = self.add(self.step(w2, X.squares[s][(k + 2) % 4]))
                if new:
                    todo.append(w)
                    for t in X.traversals_from[self.paths[w].end]:
                        u = self.find(w, t)
                        if u is not None:
                            todo.append(u)

    def assemble(self, name):
        X, paths = self.X, self.paths
        D_edges, emap = {}, {}
        for v, p in paths.items():
            for t in X.traversals_from[p.end]:
                if t[1] < 0:
                    continue
                w = self.find(v, t)
                if w is not None:
                    D_edges[f"{v}.{t[0]}"] = (v, w)
                    emap[f"{v}.{t[0]}"] = (t[0], 1)
        D_squares = {}
        for v, p in paths.items():
            for s in sorted(X.squares, key=skey):
                bd = X.squares[s]
                if X.tail(bd[0]) != p.end:
                    continue
                cur = v
                lifted = []
                for t in bd:
                    nxt = self.find(cur, t)
                    if nxt is None:
                        break
                    src = cur if t[1] > 0 else nxt
                    lifted.append((f"{src}.{t[0]}", t[1]))
                    cur = nxt
                else:
                    if cur == v:
                        D_squares[f"{v}.{s}"] = tuple(lifted)
        D = SquareComplex(list(paths), D_edges, D_squares, name=name)
        dev = CombinatorialMap(D, X, {v: p.end for v, p in paths.items()}, emap)
        return D, dev


def develop_ball(X: SquareComplex, x, R: int, oracle=None, budget=None) -> DevelopedBall:
    """Convex hull (closure under square completion) of the radius-R ball around x~."""
    dv = _Developer(X, x, oracle, budget)
    frontier = [dv.root]
    for _ in range(R):
        nxt = []
        for v in frontier:
            for t in X.traversals_from[dv.paths[v].end]:
                w, new = dv.add(dv.step(v, t))
                if new:
                    nxt.append(w)
        frontier = nxt
    dv.close()
    D, dev = dv.assemble(f"ball({X.name},{R})")
    return DevelopedBall(D, dv.root, dev, R, dv.paths, dv.keyfun)


def develop_hull(X: SquareComplex, path: Path, oracle=None, budget=None):
    """Convex hull of the lift of an X-path, grown directly from the lifted vertices.

    Returns (DevelopedBall, lifted path).  The closure of a connected vertex set under
    square completion is connected and locally convex, hence convex."""
    dv = _Developer(X, path.start, oracle, budget)
    cur = dv.root
    for t in path.steps:
        cur, _ = dv.add(dv.step(cur, t))
    dv.close()
    D, dev = dv.assemble(f"hull({X.name})")
    ball = DevelopedBall(D, dv.root, dev, None, dv.paths, dv.keyfun)
    return ball, ball.lift(path)


def hull_of_path(D: Region, path: Path) -> Subcomplex:
    """Smallest convex subcomplex of D containing a path of D."""
    walls = D.crossing_walls(Subcomplex.from_edges(D.complex, [e for e, _ in path.steps], vertices=[path.start]))
    if isinstance(D, DevelopedBall):
        need = len(path) + len(walls)
        if D.radius is not None and D.radius < need:
            raise PreconditionError(f"developed radius {D.radius} is below the required bound {need}",
                                    {"required_radius": need})
    verts = set(D.complex.path_vertices(path))
    ref = path.start
    hull = [v for v in D.complex.vertices if all(w in walls for w in D.separating(ref, v))]
    hull = set(hull) | verts
    return Subcomplex.full(D.complex, hull, name="hull")


def require_convex(D: Region, Y: Subcomplex):
    if not Y.vertices:
        raise PreconditionError("subcomplex is empty")
    if not D.is_convex(Y):
        raise PreconditionError("subcomplex is not convex", {"subcomplex": Y.name})


def gate(D: Region, Y: Subcomplex, v, check=True):
    if check:
        require_convex(D, Y)
    dist = D.distances_from(v)
    best = min(dist[y] for y in Y.vertices)
    hits = [y for y in Y.vertices if dist[y] == best]
    if len(hits) != 1:
        raise PropertyViolation("closest vertex is not unique", {"vertex": str(v), "candidates": sorted(map(str, hits))})
    return hits[0]


def bridge_check(D: Region, Y1: Subcomplex, Y2: Subcomplex) -> dict:
    require_convex(D, Y1)
    require_convex(D, Y2)
    P1 = {gate(D, Y1, v, False) for v in Y2.vertices}
    P2 = {gate(D, Y2, v, False) for v in Y1.vertices}
    S1, S2 = D.full(P1), D.full(P2)
    c1, c2 = D.crossing_walls(Y1), D.crossing_walls(Y2)
    cp1, cp2 = D.crossing_walls(S1), D.crossing_walls(S2)
    problems = []
    for w in D.walls:
        h = w.id
        both = h in c1 and h in c2
        if (h in cp1) != both or (h in cp2) != both:
            problems.append({"item": 1, "wall": h, "kind": "crossing"})
        if D.separates(h, Y1.vertices, Y2.vertices) != D.separates(h, P1, P2):
            problems.append({"item": 1, "wall": h, "kind": "separation"})
    sep = sorted(w.id for w in D.walls if D.separates(w.id, Y1.vertices, Y2.vertices))
    pairing = {}
    for p in sorted(P1, key=skey):
        q = gate(D, Y2, p, False)
        pairing[p] = q
        if q not in P2 or gate(D, Y1, q, False) != p:
            problems.append({"item": 2, "vertex": str(p), "kind": "pairing"})
        elif sorted(D.separating(p, q)) != sep:
            problems.append({"item": 2, "vertex": str(p), "kind": "parallel-geodesic"})
    if len(set(pairing.values())) != len(pairing) or set(pairing.values()) != P2:
        problems.append({"item": 2, "kind": "not-bijective"})
    for p, p2 in combinations(sorted(P1, key=skey), 2):
        if D.distance(p, p2) != D.distance(pairing[p], pairing[p2]):
            problems.append({"item": 2, "vertex": str(p), "kind": "not-isometric"})
            break
    return {"report": 1, "ok": not problems, "projection1": sorted(map(str, P1)),
            "projection2": sorted(map(str, P2)), "separating_walls": sep, "distance": len(sep),
            "problems": problems}


@dataclass
class Frontier:
    W: Subcomplex
    boundary_walls: list
    certificates: dict  # wall -> list of L+1 walls


def dinf_frontier(D: Region, base, L: int) -> Frontier:
    if isinstance(D, DevelopedBall):
        need = D.dimension * (L + 2)
        if D.radius is None or D.radius < need:
            raise PreconditionError(f"developed radius {D.radius} is below the required bound {need}",
                                    {"required_radius": need})
    Wv = {v for v in D.complex.vertices if D.dinf(base, v) <= L + 1}
    W = Subcomplex.full(D.complex, Wv, name="W")
    if not D.is_convex(W):
        raise PropertyViolation("d-infinity ball is not convex")
    bwalls = sorted({D.wall_of_edge[e] for e, (a, b) in D.complex.edges.items() if (a in Wv) != (b in Wv)})
    certs = {}
    for h in bwalls:
        hverts = {v for e in D.walls[h].edges for v in D.complex.edges[e]}
        cands = [w.id for w in D.walls
                 if w.id != h and not D.cross(w.id, h) and D.separates(w.id, [base], hverts)]
        chain = D.disjoint_chain(base, cands)
        if len(chain) < L + 1:
            raise PropertyViolation(f"wall {h} lacks {L + 1} disjoint separators", {"wall": h, "found": chain})
        certs[h] = chain[:L + 1]
    return Frontier(W, bwalls, certs)


def verify_certificate_walls(D: Region, base, h, chain) -> bool:
    hverts = {v for e in D.walls[h].edges for v in D.complex.edges[e]}
    if any(D.cross(a, b) for a, b in combinations(chain, 2)):
        return False
    return all(D.separates(w, [base], hverts) for w in chain)
