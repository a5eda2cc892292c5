"""Finite covers, fundamental-group bases, elevations and coset actions.

Finite-index subgroups of pi_1(X, x) are pointed transitive permutation
actions of the spanning-tree generators (one generator per non-tree edge).
Permutations act on the right; see :mod:`perms`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import perms
from .errors import PreconditionError, ResourceError, StructuralError
from .kernel import (CombinatorialMap, Path, SquareComplex, Subcomplex, skey, spanning_tree, tree_path)
from .limits import pick


class Pi1Basis:
    """Spanning-tree presentation of pi_1(X, x)."""

    def __init__(self, X: SquareComplex, x):
        if x not in X.vertex_set:
            raise PreconditionError(f"{x} is not a vertex", {"vertex": str(x)})
        self.X = X
        self.x = x
        self.parent, self.tree = spanning_tree(X, x)
        if len(self.parent) != len(X.vertices):
            missing = sorted((v for v in X.vertices if v not in self.parent), key=skey)
            raise PreconditionError("complex is not connected", {"vertex": str(missing[0])})
        self.generators = [e for e in sorted(X.edges, key=skey) if e not in self.tree]
        self._paths = {}

    @property
    def rank(self):
        return len(self.generators)

    def tree_path(self, v) -> Path:
        if v not in self._paths:
            self._paths[v] = tree_path(self.X, self.parent, v)
        return self._paths[v]

    def generator_loop(self, g) -> Path:
        a, b = self.X.edges[g]
        return self.tree_path(a) + Path(a, ((g, 1),), b) + self.tree_path(b).inverse()

    def loop_from_word(self, word) -> Path:
        p = Path(self.x)
        for g, s in word:
            loop = self.generator_loop(g)
            p = p + (loop if s > 0 else loop.inverse())
        return p

    def expand(self, p: Path):
        """Word in generators for tree(start) . p . tree(end)^-1."""
        return [(e, s) for e, s in p.steps if e not in self.tree]

    def relators(self):
        out = []
        for sq in sorted(self.X.squares, key=skey):
            bd = self.X.squares[sq]
            v = self.X.tail(bd[0])
            out.append(self.tree_path(v) + self.X.path(bd) + self.tree_path(v).inverse())
        return out

    def close_path(self, p: Path) -> Path:
        """Loop at x: tree path to p's start, p, tree path back."""
        return self.tree_path(p.start) + p + self.tree_path(p.end).inverse()


def pi1_basis(X, x) -> Pi1Basis:
    key = ("pi1", x)
    if key not in X._cache:
        X._cache[key] = Pi1Basis(X, x)
    return X._cache[key]


class SubgroupRep:
    """Finite-index subgroup as a pointed transitive action on 0..n-1."""

    def __init__(self, X: SquareComplex, x, action: dict, base=0, basis: Pi1Basis | None = None,
                 check_relators=True):
        self.basis = basis or pi1_basis(X, x)
        self.X, self.x = X, x
        gens = self.basis.generators
        sizes = {len(p) for p in action.values()}
        if len(sizes) > 1:
            raise StructuralError("action images have different degrees")
        n = sizes.pop() if sizes else 1
        self.action = {}
        for g in gens:
            p = tuple(action.get(g, perms.identity(n)))
            if not perms.is_permutation(p, n):
                raise StructuralError(f"image of {g} is not a permutation", {"generator": str(g)})
            self.action[g] = p
        self.degree = n
        self.base = base
        if perms.orbit(base, list(self.action.values())) != set(range(n)):
            raise PreconditionError("action is not transitive")
        if check_relators:
            for r in self.basis.relators():
                if self.evaluate(r) != perms.identity(n):
                    raise PreconditionError("action does not respect a square relation",
                                            {"relator": [str(e) for e, _ in r.steps]})

    @classmethod
    def from_action_orbit(cls, X, x, action, base=0, basis=None):
        """Restrict an action to the orbit of ``base`` and renumber points."""
        basis = basis or pi1_basis(X, x)
        gens = basis.generators
        order = [base]
        index = {base: 0}
        i = 0
        while i < len(order):
            p = order[i]
            for g in gens:
                q = action[g][p]
                if q not in index:
                    index[q] = len(order)
                    order.append(q)
            i += 1
        restricted = {g: tuple(index[action[g][p]] for p in order) for g in gens}
        return cls(X, x, restricted, 0, basis, check_relators=False), order

    @property
    def index(self):
        return self.degree

    def evaluate(self, loop: Path):
        return perms.evaluate_word(self.basis.expand(loop), self.action, self.degree)

    def point_after(self, word_or_loop, point=None):
        point = self.base if point is None else point
        word = self.basis.expand(word_or_loop) if isinstance(word_or_loop, Path) else word_or_loop
        for g, s in word:
            p = self.action[g]
            point = p[point] if s > 0 else p.index(point)
        return point

    def contains(self, loop: Path) -> bool:
        return self.point_after(loop) == self.base

    def transversal(self):
        """point -> generator word (list of (g, +-1)) reaching it from base."""
        words = {self.base: []}
        queue = deque([self.base])
        while queue:
            c = queue.popleft()
            for g in self.basis.generators:
                for s, d in ((1, self.action[g][c]), (-1, self.action[g].index(c))):
                    if d not in words:
                        words[d] = words[c] + [(g, s)]
                        queue.append(d)
        return words

    def transversal_loops(self):
        return {c: self.basis.loop_from_word(w) for c, w in self.transversal().items()}

    def schreier_generators(self):
        """Reidemeister-Schreier generators as loops at x."""
        words = {self.base: []}
        tree_edges = set()
        queue = deque([self.base])
        order = [self.base]
        while queue:
            c = queue.popleft()
            for g in self.basis.generators:
                d = self.action[g][c]
                if d not in words:
                    words[d] = words[c] + [(g, 1)]
                    tree_edges.add((c, g))
                    queue.append(d)
                    order.append(d)
        out = []
        for c in sorted(words, key=lambda p: order.index(p)):
            for g in self.basis.generators:
                if (c, g) in tree_edges:
                    continue
                d = self.action[g][c]
                word = words[c] + [(g, 1)] + [(h, -s) for h, s in reversed(words[d])]
                out.append(self.basis.loop_from_word(_free_reduce(word)))
        return out

    def intersection(self, other: "SubgroupRep") -> "SubgroupRep":
        return intersect_subgroups([self, other])

    def normal_core(self) -> "SubgroupRep":
        return regular_rep(self)

    def is_normal(self):
        return self.normal_core().index == self.index

    def act_format(self):
        lines = ["act 1"]
        for g in self.basis.generators:
            lines.append(f"gen {g}: " + " ".join(map(str, self.action[g])))
        return "\n".join(lines) + "\n"


def _free_reduce(word):
    out = []
    for g, s in word:
        if out and out[-1] == (g, -s):
            out.pop()
        else:
            out.append((g, s))
    return out


def intersect_subgroups(subs, budget=None) -> SubgroupRep:
    """Product action on the orbit of the tuple of base points."""
    budget = pick(budget, "vertices")
    first = subs[0]
    gens = first.basis.generators
    start = tuple(s.base for s in subs)
    index = {start: 0}
    order = [start]
    i = 0
    while i < len(order):
        pt = order[i]
        for g in gens:
            q = tuple(s.action[g][p] for s, p in zip(subs, pt))
            if q not in index:
                index[q] = len(order)
                order.append(q)
                if len(order) > budget:
                    raise ResourceError(f"subgroup intersection exceeded {budget} cosets")
        i += 1
    action = {g: tuple(index[tuple(s.action[g][p] for s, p in zip(subs, pt))] for pt in order) for g in gens}
    return SubgroupRep(first.X, first.x, action, 0, first.basis, check_relators=False)


def regular_rep(S: SubgroupRep, budget=None) -> SubgroupRep:
    """Action of the permutation image on itself by right translation."""
    budget = pick(budget, "group")
    gens = S.basis.generators
    images = [S.action[g] for g in gens]
    ident = perms.identity(S.degree)
    index = {ident: 0}
    order = [ident]
    i = 0
    while i < len(order):
        p = order[i]
        for s in images:
            q = perms.compose(p, s)
            if q not in index:
                index[q] = len(order)
                order.append(q)
                if len(order) > budget:
                    raise ResourceError(f"regular closure exceeded {budget} elements")
        i += 1
    action = {g: tuple(index[perms.compose(p, S.action[g])] for p in order) for g in gens}
    return SubgroupRep(S.X, S.x, action, 0, S.basis, check_relators=False)


def same_subgroup(a: SubgroupRep, b: SubgroupRep) -> bool:
    """Pointed isomorphism of two transitive actions."""
    if a.degree != b.degree:
        return False
    match = {a.base: b.base}
    queue = deque([a.base])
    while queue:
        p = queue.popleft()
        for g in a.basis.generators:
            q, r = a.action[g][p], b.action[g][match[p]]
            if q in match:
                if match[q] != r:
                    return False
            else:
                match[q] = r
                queue.append(q)
    return True


# covering maps


class CoveringMap(CombinatorialMap):
    """Covering map with a chosen base vertex over ``x``."""

    def __init__(self, domain, codomain, vmap, emap, base, x, smap=None, name=""):
        super().__init__(domain, codomain, vmap, emap, smap, name)
        self.base = base
        self.x = x
        self._lift = None

    @property
    def degree(self):
        return len(self.fiber(self.x))

    def fiber(self, v):
        out = sorted((w for w in self.domain.vertices if self.vmap[w] == v), key=skey)
        if v == self.x and self.base in out:
            out.remove(self.base)
            out.insert(0, self.base)
        return out

    @property
    def lift_table(self):
        if self._lift is None:
            table = {}
            for w in self.domain.vertices:
                for d in self.domain.darts_at[w]:
                    table[(w, SquareComplex.leaving(self.dart_image(d)))] = SquareComplex.leaving(d)
            self._lift = table
        return self._lift

    def lift_steps(self, steps, start):
        out = []
        v = start
        for t in steps:
            try:
                tt = self.lift_table[(v, t)]
            except KeyError:
                raise PreconditionError(f"traversal {t} does not lift at {v}", {"vertex": str(v)}) from None
            out.append(tt)
            v = self.domain.head(tt)
        return tuple(out), v


def lift_path(mu: CoveringMap, path: Path, start) -> Path:
    if mu.vmap[start] != path.start:
        raise PreconditionError("start is not over the path's start", {"vertex": str(start)})
    steps, end = mu.lift_steps(path.steps, start)
    return Path(start, steps, end)


def cover_from_action(X: SquareComplex, x, action: dict, base=0, basis: Pi1Basis | None = None,
                      budget=None) -> CoveringMap:
    """Cover with vertices (v, sheet); tree edges keep the sheet."""
    budget = pick(budget, "vertices")
    S = action if isinstance(action, SubgroupRep) else SubgroupRep(X, x, action, base, basis)
    basis = S.basis
    n = S.degree
    if n * len(X.vertices) > budget:
        raise ResourceError(f"cover would have {n * len(X.vertices)} vertices (budget {budget})")
    verts = [(v, i) for v in X.vertices for i in range(n)]
    edges = {}
    emap = {}
    target = {}
    for e in sorted(X.edges, key=skey):
        a, b = X.edges[e]
        perm = S.action.get(e)
        for i in range(n):
            j = perm[i] if perm is not None else i
            edges[(e, i)] = ((a, i), (b, j))
            emap[(e, i)] = (e, 1)
            target[(e, i)] = j
    squares = {}
    smap = {}
    for s in sorted(X.squares, key=skey):
        bd = X.squares[s]
        for i in range(n):
            v = (X.tail(bd[0]), i)
            lifted = []
            for e, sg in bd:
                if sg > 0:
                    edge = (e, v[1])
                    v = edges[edge][1]
                else:
                    # find the lift of e ending at v
                    src = S.action[e].index(v[1]) if e in S.action else v[1]
                    edge = (e, src)
                    v = edges[edge][0]
                lifted.append((edge, sg))
            if v != (X.tail(bd[0]), i):
                raise PreconditionError("action does not respect a square relation", {"square": str(s)})
            squares[(s, i)] = tuple(lifted)
            smap[(s, i)] = s
    Xh = SquareComplex(verts, edges, squares, name=f"cover{n}({X.name})")
    return CoveringMap(Xh, X, {w: w[0] for w in verts}, emap, (x, S.base), x, smap)


def monodromy(mu: CoveringMap, basis: Pi1Basis | None = None) -> SubgroupRep:
    """Action of the generators on the fiber over x (base point first)."""
    basis = basis or pi1_basis(mu.codomain, mu.x)
    fiber = mu.fiber(mu.x)
    index = {w: i for i, w in enumerate(fiber)}
    action = {}
    for g in basis.generators:
        loop = basis.generator_loop(g)
        action[g] = tuple(index[mu.lift_steps(loop.steps, w)[1]] for w in fiber)
    return SubgroupRep(mu.codomain, mu.x, action, index[mu.base], basis, check_relators=False)


def identity_cover(X, x) -> CoveringMap:
    return cover_from_action(X, x, {}, 0)


@dataclass
class Elevation:
    complex: SquareComplex
    to_cover: CombinatorialMap  # phi-hat: Y-hat -> X-hat
    to_base: CombinatorialMap  # nu: Y-hat -> Y


def fiber_product(phi: CombinatorialMap, mu: CoveringMap, budget=None):
    budget = pick(budget, "vertices")
    Y = phi.domain
    verts = [(y, w) for y in Y.vertices for w in mu.fiber(phi.vmap[y])]
    if len(verts) > budget:
        raise ResourceError(f"fiber product exceeded {budget} vertices")
    edges, e_up, e_down = {}, {}, {}
    for f in sorted(Y.edges, key=skey):
        a, b = Y.edges[f]
        t = phi.traversal_image((f, 1))
        for w in mu.fiber(phi.vmap[a]):
            (tt,), w2 = mu.lift_steps((t,), w)
            edges[(f, w)] = ((a, w), (b, w2))
            e_up[(f, w)] = tt
            e_down[(f, w)] = (f, 1)
    squares, s_down = {}, {}
    for sq in sorted(Y.squares, key=skey):
        bd = Y.squares[sq]
        for w in mu.fiber(phi.vmap[Y.tail(bd[0])]):
            cur = w
            lifted = []
            for f, sg in bd:
                (tt,), nxt = mu.lift_steps((phi.traversal_image((f, sg)),), cur)
                lifted.append(((f, cur if sg > 0 else nxt), sg))
                cur = nxt
            squares[(sq, w)] = tuple(lifted)
            s_down[(sq, w)] = sq
    P = SquareComplex(verts, edges, squares, name="pullback")
    return P, e_up, e_down


def elevations(phi: CombinatorialMap, mu: CoveringMap, basepoint=None, budget=None):
    """Components of the pullback; with ``basepoint=(y, xhat)`` only that component."""
    P, e_up, e_down = fiber_product(phi, mu, budget)
    comps = P.components()
    if basepoint is not None:
        if basepoint not in P.vertex_set:
            raise PreconditionError("incompatible basepoints", {"basepoint": str(basepoint)})
        comps = [c for c in comps if basepoint in c]
    out = []
    for i, comp in enumerate(comps):
        es = {e for e, (a, _) in P.edges.items() if a in comp}
        ss = {s for s, bd in P.squares.items() if bd[0][0] in es}
        Yh = P.restrict(comp, es, ss, name=f"elev{i}")
        up = CombinatorialMap(Yh, mu.domain, {v: v[1] for v in Yh.vertices}, {e: e_up[e] for e in Yh.edges})
        down = CombinatorialMap(Yh, phi.domain, {v: v[0] for v in Yh.vertices}, {e: e_down[e] for e in Yh.edges})
        out.append(Elevation(Yh, up, down))
    return out


def refine(covers, budget=None) -> CoveringMap:
    if not covers:
        raise PreconditionError("refine needs at least one cover")
    X, x = covers[0].codomain, covers[0].x
    basis = pi1_basis(X, x)
    S = intersect_subgroups([monodromy(mu, basis) for mu in covers], budget)
    return cover_from_action(X, x, S, basis=basis, budget=budget)


def regular_closure(mu: CoveringMap, budget=None) -> CoveringMap:
    S = regular_rep(monodromy(mu), budget)
    return cover_from_action(mu.codomain, mu.x, S, basis=S.basis)


def schreier_generators(S: SubgroupRep):
    return S.schreier_generators()


def cover_of_subgroup(S: SubgroupRep, budget=None) -> CoveringMap:
    return cover_from_action(S.X, S.x, S, basis=S.basis, budget=budget)


def deck_translates_of_base(mu: CoveringMap):
    return mu.fiber(mu.x)


def subcomplex_preimage(mu: CoveringMap, Y: Subcomplex) -> Subcomplex:
    """Full preimage of an embedded subcomplex in the cover."""
    Xh = mu.domain
    vs = {v for v in Xh.vertices if mu.vmap[v] in Y.vertices}
    es = {e for e in Xh.edges if mu.emap[e][0] in Y.edges}
    ss = {s for s in Xh.squares if mu.smap[s] in Y.squares}
    return Subcomplex(Xh, vs, es, ss)


def component_containing(sub: Subcomplex, v) -> Subcomplex:
    X = sub.parent
    for comp in X.components(sub.vertices, sub.edges):
        if v in comp:
            es = {e for e in sub.edges if X.edges[e][0] in comp}
            ss = {s for s in sub.squares if X.squares[s][0][0] in es}
            return Subcomplex(X, comp, es, ss)
    raise PreconditionError(f"{v} is not in the subcomplex", {"vertex": str(v)})
