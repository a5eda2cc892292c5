"""Walker/imitator simulation and the covers built from it.

A walker moves along a path in X.  An imitator sitting at a vertex y of Y
(mapped to X by a local isometry phi) crosses the unique edge f at y whose
image is parallel to the walker's edge, or stays put if there is none.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from . import perms
from .covers import (CoveringMap, SubgroupRep, component_containing, cover_from_action,
                     elevations, identity_cover, intersect_subgroups, pi1_basis, regular_rep,
                     subcomplex_preimage)
from .errors import PreconditionError, PropertyViolation, ResourceError
from .kernel import (CombinatorialMap, Path, SquareComplex, Subcomplex, analyze, check_map, hyperplane_index,
                     inter_osculating_hyperplanes, require_directly_special, require_local_isometry, skey)
from .limits import pick


def _sign(s):
    return "+" if s > 0 else "-"


class Imitator:
    """Move table for one local isometry: (y, hyperplane of X) -> edge at y."""

    def __init__(self, phi: CombinatorialMap, check=True):
        self.phi = phi
        Y, X = phi.domain, phi.codomain
        if check:
            require_directly_special(X)
            require_local_isometry(phi)
        hidx = hyperplane_index(X)
        self.hidx = hidx
        table = {}
        for y in Y.vertices:
            row = {}
            for d in Y.darts_at[y]:
                h = hidx[phi.dart_image(d)[0]]
                if h in row:
                    raise PropertyViolation("imitator move is not unique", {"vertex": str(y), "hyperplane": h})
                row[h] = SquareComplex.leaving(d)
            table[y] = row
        self.table = table

    def step(self, y, t):
        """Imitator at y answers walker traversal t; returns (traversal | None, new y)."""
        f = self.table[y].get(self.hidx[t[0]])
        if f is None:
            return None, y
        return f, self.phi.domain.head(f)

    def run(self, steps, y):
        moves = []
        for t in steps:
            f, y = self.step(y, t)
            moves.append(f)
        return moves, y


def imitator_for(phi: CombinatorialMap) -> Imitator:
    cache = phi.__dict__.setdefault("_imitator", None)
    if cache is None:
        phi._imitator = Imitator(phi)
    return phi._imitator


@dataclass
class ImitatorTranscript:
    phi: CombinatorialMap
    start: tuple
    walker: Path
    imitator: Path
    moves: list  # per step: imitator traversal or None

    @property
    def end(self):
        return self.imitator.end

    def lines(self):
        out = []
        for k, (t, f) in enumerate(zip(self.walker.steps, self.moves), 1):
            im = "stay" if f is None else f"{_sign(f[1])}{f[0]}"
            out.append(f"step {k}: walker {_sign(t[1])}{t[0]}, imitator {im}")
        return out


def imitate(phi: CombinatorialMap, gamma: Path, y) -> ImitatorTranscript:
    if y not in phi.domain.vertex_set:
        raise PreconditionError(f"{y} is not a vertex of the domain", {"vertex": str(y)})
    im = imitator_for(phi)
    moves, end = im.run(gamma.steps, y)
    steps = tuple(f for f in moves if f is not None)
    return ImitatorTranscript(phi, (y, gamma.start), gamma, Path(y, steps, end), moves)


def imitator_action(phi: CombinatorialMap, y, x=None):
    """Right action of pi_1(X, x) on Y^0 and the stabilizer G_phi of y.

    Returns (action dict over Y-vertex indices, vertex order, G_phi).
    """
    X = phi.codomain
    x = phi.vmap[y] if x is None else x
    basis = pi1_basis(X, x)
    im = imitator_for(phi)
    order = list(phi.domain.vertices)
    index = {v: i for i, v in enumerate(order)}
    action = {}
    for g in basis.generators:
        loop = basis.generator_loop(g)
        action[g] = tuple(index[im.run(loop.steps, v)[1]] for v in order)
    G_phi, _ = SubgroupRep.from_action_orbit(X, x, action, index[y], basis)
    for r in basis.relators():
        if G_phi.evaluate(r) != perms.identity(G_phi.degree):
            raise PropertyViolation("imitator action does not respect a square relation",
                                    {"relator": [str(e) for e, _ in r.steps]})
    return action, order, G_phi


def rho(phi: CombinatorialMap, y, w: Path) -> Path:
    """Imitator homomorphism: the imitator's loop while the walker runs w."""
    tr = imitate(phi, w, y)
    if not w.is_loop or tr.end != y:
        raise PreconditionError("loop is not in the imitator subgroup", {"end": str(tr.end)})
    return tr.imitator


# canonical completion


def _pair_name(y, x):
    return f"({y},{x})"


@dataclass
class CompletionComplex:
    complex: SquareComplex
    cover: CoveringMap
    pair: dict  # vertex name -> (y, x)
    r_vertex: dict  # vertex -> Y vertex
    r_edge: dict  # edge -> Y traversal or None (collapsed)
    j: CombinatorialMap
    phi: CombinatorialMap

    @property
    def degree(self):
        return len(self.phi.domain.vertices)

    def based_component(self, y):
        v = _pair_name(y, self.phi.vmap[y])
        sub = component_containing(Subcomplex.whole(self.complex), v)
        K = sub.as_complex()
        mu = CoveringMap(K, self.phi.codomain, {w: self.cover.vmap[w] for w in K.vertices},
                         {e: self.cover.emap[e] for e in K.edges}, v, self.phi.vmap[y],
                         {s: self.cover.smap[s] for s in K.squares})
        j = CombinatorialMap(self.phi.domain, K, self.j.vmap, self.j.emap) if all(
            w in K.vertex_set for w in self.j.vmap.values()) else None
        return mu, j

    def retract_path(self, p: Path) -> Path:
        steps = []
        for e, s in p.steps:
            f = self.r_edge[e]
            if f is not None:
                steps.append((f[0], f[1] * s))
        return Path(self.r_vertex[p.start], tuple(steps), self.r_vertex[p.end])


def canonical_completion(phi: CombinatorialMap) -> CompletionComplex:
    Y, X = phi.domain, phi.codomain
    im = imitator_for(phi)
    pair = {}
    verts = []
    for x in X.vertices:
        for y in Y.vertices:
            name = _pair_name(y, x)
            pair[name] = (y, x)
            verts.append(name)
    edges, emap, r_edge = {}, {}, {}
    for E in sorted(X.edges, key=skey):
        a, b = X.edges[E]
        for y in Y.vertices:
            f, y2 = im.step(y, (E, 1))
            name = f"e({E};{y},{a})"
            edges[name] = (_pair_name(y, a), _pair_name(y2, b))
            emap[name] = (E, 1)
            r_edge[name] = f
    squares, smap = {}, {}
    for s in sorted(X.squares, key=skey):
        bd = X.squares[s]
        for y in Y.vertices:
            cur = y
            lifted = []
            for E, sg in bd:
                a = X.edges[E][0]
                if sg > 0:
                    lifted.append((f"e({E};{cur},{a})", 1))
                    _, cur = im.step(cur, (E, 1))
                else:
                    _, prev = im.step(cur, (E, -1))
                    lifted.append((f"e({E};{prev},{a})", -1))
                    cur = prev
            if cur != y:
                raise PropertyViolation("lifted square does not close", {"square": str(s), "vertex": str(y)})
            squares[f"s({s};{y})"] = tuple(lifted)
            smap[f"s({s};{y})"] = s
    C = SquareComplex(verts, edges, squares, name=f"C({Y.name},{X.name})")
    cover = CoveringMap(C, X, {v: pair[v][1] for v in verts}, emap, verts[0], pair[verts[0]][1], smap)
    jv = {y: _pair_name(y, phi.vmap[y]) for y in Y.vertices}
    je = {}
    for f in Y.edges:
        E, s = phi.emap[f]
        a0, a1 = Y.edges[f]
        if s > 0:
            je[f] = (f"e({E};{a0},{phi.vmap[a0]})", 1)
        else:
            je[f] = (f"e({E};{a1},{phi.vmap[a1]})", -1)
    j = CombinatorialMap(Y, C, jv, je)
    return CompletionComplex(C, cover, pair, {v: pair[v][0] for v in verts}, r_edge, j, phi)


def completion_checks(cc: CompletionComplex, y) -> dict:
    """Degree, r.j = id, j embedding, no inter-osculation with j(Y), retraction on generators."""
    phi = cc.phi
    Y = phi.domain
    out = {}
    out["degree"] = cc.cover.degree == len(Y.vertices)
    rj = all(cc.r_vertex[cc.j.vmap[v]] == v for v in Y.vertices)
    for f in Y.edges:
        e, s = cc.j.emap[f]
        g = cc.r_edge[e]
        rj = rj and g is not None and (g[0], g[1] * s) == (f, 1)
    out["r_j_identity"] = rj
    mu, j = cc.based_component(y)
    out["j_in_based_component"] = j is not None
    out["j_injective"] = j is not None and j.is_embedding()
    out["j_local_isometry"] = j is not None and check_map(j).local_isometry
    out["no_inter_osculation"] = j is not None and not inter_osculating_hyperplanes(j)
    basis_y = pi1_basis(Y, y) if Y.is_connected() else None
    ok = True
    if basis_y is not None:
        for g in basis_y.generators:
            loop = basis_y.generator_loop(g)
            if rho(phi, y, phi.path_image(loop)) != loop:
                ok = False
    out["rho_retraction"] = ok
    _, _, G_phi = imitator_action(phi, y)
    out["based_index_matches"] = mu.degree == G_phi.index
    return out


# embed-all (regular cover in which every elevation embeds)


def _elevations_good(phis, mu):
    bad = []
    for i, phi in enumerate(phis):
        for k, el in enumerate(elevations(phi, mu)):
            if not el.to_cover.is_embedding():
                bad.append({"map": i, "elevation": k, "problem": "not embedded"})
            elif inter_osculating_hyperplanes(el.to_cover):
                bad.append({"map": i, "elevation": k, "problem": "inter-osculates"})
    return bad


@dataclass
class EmbedAllResult:
    cover: CoveringMap
    regular: bool
    directly_special: bool
    failures: list
    trivial: bool

    def to_json(self):
        return {"report": 1, "degree": self.cover.degree, "regular": self.regular,
                "directly_special": self.directly_special, "identity": self.trivial,
                "failures": self.failures, "ok": not self.failures}


def imitator_subgroup_at(phi: CombinatorialMap, x):
    """G_phi rebased at x: imitator action orbit of a vertex joined to j(Y) over x."""
    X = phi.codomain
    y = next((v for v in sorted(phi.domain.vertices, key=skey) if phi.vmap[v] == x), None)
    if y is None:
        # walk from some phi(y) to x and carry the imitator along
        y0 = sorted(phi.domain.vertices, key=skey)[0]
        basis = pi1_basis(X, x)
        p = basis.tree_path(phi.vmap[y0]).inverse()
        _, y = imitator_for(phi).run(p.steps, y0)
    _, _, G = imitator_action(phi, y, x)
    return G


def embed_all(phis, x=None, budget=None, force=False) -> EmbedAllResult:
    """Regular cover in which every elevation embeds; ``force`` skips the identity shortcut."""
    if not phis:
        raise PreconditionError("embed_all needs at least one map")
    X = phis[0].codomain
    require_directly_special(X)
    for phi in phis:
        require_local_isometry(phi)
    x = x if x is not None else X.vertices[0]
    ident = identity_cover(X, x)
    if not force and not _elevations_good(phis, ident):
        return EmbedAllResult(ident, True, True, [], True)
    subs = [imitator_subgroup_at(phi, x) for phi in phis]
    S = regular_rep(intersect_subgroups(subs, budget))
    mu = cover_from_action(X, x, S, basis=S.basis, budget=budget)
    failures = _elevations_good(phis, mu)
    regular = S.is_normal()
    special = analyze(mu.domain).directly_special
    return EmbedAllResult(mu, regular, special, failures, False)


# hierarchy of imitators


def sigma_d(n):
    """Non-empty sequences of distinct indices, length-lexicographic."""
    return [s for L in range(1, n + 1) for s in permutations(range(n), L)]


def nu(seq):
    """Keep the rightmost occurrence of each index."""
    seen = set()
    out = []
    for i in reversed(seq):
        if i not in seen:
            seen.add(i)
            out.append(i)
    return tuple(reversed(out))


class Hierarchy:
    def __init__(self, phis, base_vertices, check=True):
        self.phis = list(phis)
        self.imitators = [Imitator(phi, check) for phi in self.phis]
        self.base = list(base_vertices)
        self.X = self.phis[0].codomain
        self.sigma = sigma_d(len(self.phis))
        self.pos = {s: k for k, s in enumerate(self.sigma)}

    def initial(self, x):
        return (x, tuple(self.base[s[0]] for s in self.sigma))

    def transition(self, state, t):
        xv, theta = state
        if self.X.tail(t) != xv:
            raise PreconditionError("walker traversal does not start at the walker vertex")
        moves = {}
        new = list(theta)
        for k, s in enumerate(self.sigma):
            if len(s) == 1:
                lead = t
            else:
                m = moves[s[1:]]
                lead = None if m is None else self.phis[s[1]].traversal_image(m)
            if lead is None:
                moves[s] = None
                continue
            f, y2 = self.imitators[s[0]].step(theta[k], lead)
            moves[s] = f
            new[k] = y2
        return (self.X.head(t), tuple(new)), moves

    def delta(self, seq, gamma: Path) -> Path:
        """Path of imitator ``seq`` (any index sequence) for walker path gamma."""
        if len(seq) == 1:
            walker = gamma
        else:
            inner = self.delta(seq[1:], gamma)
            walker = self.phis[seq[1]].path_image(inner)
        moves, end = self.imitators[seq[0]].run(walker.steps, self.base[seq[0]])
        return Path(self.base[seq[0]], tuple(f for f in moves if f is not None), end)


def hier_transition(phis, base_vertices, state, t):
    return Hierarchy(phis, base_vertices).transition(state, t)


@dataclass
class HierCover:
    cover: CoveringMap
    states: dict  # vertex name -> state
    elevations: list  # based elevations as Subcomplexes of the cover
    checks: dict

    def to_json(self):
        return {"report": 1, "degree": self.cover.degree, "states": len(self.states),
                "checks": self.checks, "ok": all(v is True for v in self.checks.values() if isinstance(v, bool))}


def _require_hier_inputs(X, Ys, x):
    require_directly_special(X)
    for Yi in Ys:
        if x not in Yi.vertices:
            raise PreconditionError(f"base vertex not in {Yi.name}", {"subcomplex": Yi.name})
        inc = Yi.inclusion()
        require_local_isometry(inc)
        bad = inter_osculating_hyperplanes(inc)
        if bad:
            raise PreconditionError(f"{Yi.name} inter-osculates with a hyperplane",
                                    {"subcomplex": Yi.name, "hyperplane": bad[0]["hyperplane"]})


def hier_cover(X: SquareComplex, Ys, x, budget=None) -> HierCover:
    """Reachable-state cover for subcomplexes Y_i all containing x."""
    budget = pick(budget, "vertices")
    _require_hier_inputs(X, Ys, x)
    phis = [Yi.inclusion() for Yi in Ys]
    H = Hierarchy(phis, [x] * len(Ys), check=False)
    bound = len(X.vertices)
    for s in H.sigma:
        bound *= len(Ys[s[0]].vertices)
    start = H.initial(x)
    index = {start: 0}
    order = [start]
    trans = {}
    i = 0
    while i < len(order):
        st = order[i]
        for t in X.traversals_from[st[0]]:
            nxt, _ = H.transition(st, t)
            if t[1] > 0:
                trans[(i, t[0])] = nxt
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                if len(order) > min(budget, bound):
                    raise ResourceError(f"hierarchy cover exceeded {min(budget, bound)} states")
        i += 1
    name = {st: f"h{k}" for st, k in index.items()}
    edges, emap = {}, {}
    for (k, E), nxt in sorted(trans.items(), key=lambda kv: (kv[0][0], skey(kv[0][1]))):
        edges[f"{E}@{k}"] = (f"h{k}", name[nxt])
        emap[f"{E}@{k}"] = (E, 1)
    squares, smap = {}, {}
    for k, st in enumerate(order):
        for s in sorted(X.squares, key=skey):
            bd = X.squares[s]
            if X.tail(bd[0]) != st[0]:
                continue
            cur = st
            lifted = []
            for E, sg in bd:
                if sg > 0:
                    lifted.append((f"{E}@{index[cur]}", 1))
                    cur = trans[(index[cur], E)]
                else:
                    prev, _ = H.transition(cur, (E, -1))
                    if trans[(index[prev], E)] != cur:
                        raise PropertyViolation("hierarchy transition is not reversible", {"edge": str(E)})
                    lifted.append((f"{E}@{index[prev]}", -1))
                    cur = prev
            if cur != st:
                raise PropertyViolation("lifted square does not close", {"square": str(s)})
            squares[f"{s}@{k}"] = tuple(lifted)
            smap[f"{s}@{k}"] = s
    verts = [f"h{k}" for k in range(len(order))]
    Xd = SquareComplex(verts, edges, squares, name=f"hier({X.name})")
    mu = CoveringMap(Xd, X, {f"h{k}": st[0] for k, st in enumerate(order)}, emap, "h0", x, smap)
    elevs = [component_containing(subcomplex_preimage(mu, Yi), "h0") for Yi in Ys]
    checks = {"states": len(order), "state_bound": bound, "covering": mu.is_covering()}
    n = len(Ys)
    connected = True
    for L in range(1, n + 1):
        for E in combinations(range(n), L):
            inter = elevs[E[0]]
            for i in E[1:]:
                inter = inter.intersection(elevs[i])
            if not inter.vertices or not inter.is_connected():
                connected = False
                checks.setdefault("disconnected", []).append(list(E))
    checks["intersections_connected"] = connected
    full = elevs[0]
    for el in elevs[1:]:
        full = full.intersection(el)
    imgs = [mu.vmap[v] for v in full.vertices]
    eimgs = [mu.emap[e][0] for e in full.edges]
    checks["injective_on_intersection"] = len(set(imgs)) == len(imgs) and len(set(eimgs)) == len(eimgs)
    return HierCover(mu, {f"h{k}": st for k, st in enumerate(order)}, elevs, checks)


def preimage(phi: CombinatorialMap, Z: Subcomplex) -> Subcomplex:
    Y = phi.domain
    vs = {y for y in Y.vertices if phi.vmap[y] in Z.vertices}
    es = {f for f in Y.edges if phi.emap[f][0] in Z.edges}
    ss = {s for s in Y.squares if phi.smap[s] in Z.squares}
    return Subcomplex(Y, vs, es, ss)
