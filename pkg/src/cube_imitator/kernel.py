"""Square complexes, links, hyperplanes and the osculation taxonomy.

A square complex stores vertices, edges ``id -> (end0, end1)`` and squares
``id -> four signed traversals``.  A traversal ``(e, +1)`` runs from end0 to
end1 of ``e``; ``(e, -1)`` runs backwards.  A dart ``(e, k)`` is the end ``k``
of edge ``e``; link graphs have darts as vertices and square corners as edges.
Vertex, edge and square ids may be any hashable values; ordering for output
is by ``str``.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Hashable

from .errors import PreconditionError, StructuralError

Traversal = tuple  # (edge id, +1 | -1)
Dart = tuple  # (edge id, 0 | 1)


def skey(obj):
    """Deterministic sort key for heterogeneous ids."""
    return str(obj)


def out_dart(t):
    e, s = t
    return (e, 0 if s > 0 else 1)


def in_dart(t):
    e, s = t
    return (e, 1 if s > 0 else 0)


def reverse_steps(steps):
    return tuple((e, -s) for e, s in reversed(steps))


@dataclass(frozen=True)
class Path:
    """An edge path; ``end`` is fixed at construction (see SquareComplex.path)."""

    start: Hashable
    steps: tuple = ()
    end: Hashable = None

    def __post_init__(self):
        if self.end is None:
            if self.steps:
                raise ValueError("use SquareComplex.path to build non-empty paths")
            object.__setattr__(self, "end", self.start)

    def __len__(self):
        return len(self.steps)

    def __add__(self, other):
        if self.end != other.start:
            raise StructuralError(f"cannot concatenate path ending at {self.end} with path starting at {other.start}")
        return Path(self.start, self.steps + other.steps, other.end)

    @property
    def is_loop(self):
        return self.start == self.end

    def inverse(self):
        return Path(self.end, reverse_steps(self.steps), self.start)

    def reduced(self):
        """Remove backtracks (an edge immediately followed by its reverse)."""
        out = []
        for e, sg in self.steps:
            if out and out[-1] == (e, -sg):
                out.pop()
            else:
                out.append((e, sg))
        return Path(self.start, tuple(out), self.end)

    def power(self, k):
        if not self.is_loop:
            raise StructuralError("only loops can be raised to powers")
        base = self if k >= 0 else self.inverse()
        return Path(self.start, base.steps * abs(k), self.start)


LoopWord = Path


class SquareComplex:
    def __init__(self, vertices, edges, squares=None, name=""):
        self.vertices = tuple(vertices)
        self.edges = {e: (a, b) for e, (a, b) in edges.items()}
        self.squares = {s: tuple((e, int(sg)) for e, sg in bd) for s, bd in (squares or {}).items()}
        self.name = name
        self._validate()

    def __repr__(self):
        return f"SquareComplex({self.name!r}, V={len(self.vertices)}, E={len(self.edges)}, S={len(self.squares)})"

    def _validate(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise StructuralError("duplicate vertex id")
        for e, (a, b) in self.edges.items():
            if a not in vset or b not in vset:
                raise StructuralError(f"edge {e} has an unknown endpoint", {"edge": str(e)})
        for s, bd in self.squares.items():
            if len(bd) != 4:
                raise StructuralError(f"square {s} does not have four sides", {"square": str(s)})
            for e, sg in bd:
                if e not in self.edges or sg not in (1, -1):
                    raise StructuralError(f"square {s} has a bad traversal {e}", {"square": str(s)})
            for k in range(4):
                if self.head(bd[k]) != self.tail(bd[(k + 1) % 4]):
                    raise StructuralError(f"boundary of square {s} is not a closed cycle", {"square": str(s)})

    # traversal and dart helpers

    def tail(self, t):
        e, s = t
        return self.edges[e][0 if s > 0 else 1]

    def head(self, t):
        e, s = t
        return self.edges[e][1 if s > 0 else 0]

    def dart_vertex(self, d):
        return self.edges[d[0]][d[1]]

    @staticmethod
    def leaving(d):
        """Traversal that leaves the dart's vertex through the dart."""
        return (d[0], 1 if d[1] == 0 else -1)

    def path(self, steps, start=None):
        steps = tuple((e, int(s)) for e, s in steps)
        if not steps:
            if start is None:
                raise StructuralError("empty path needs a start vertex")
            return Path(start, (), start)
        for e, s in steps:
            if e not in self.edges or s not in (1, -1):
                raise StructuralError(f"unknown traversal {e}", {"edge": str(e)})
        v = self.tail(steps[0])
        if start is not None and start != v:
            raise StructuralError(f"path does not start at {start}", {"vertex": str(start)})
        first = v
        for t in steps:
            if self.tail(t) != v:
                raise StructuralError(f"path breaks at {t[0]}", {"edge": str(t[0])})
            v = self.head(t)
        return Path(first, steps, v)

    def path_vertices(self, p):
        out = [p.start]
        for t in p.steps:
            out.append(self.head(t))
        return out

    @cached_property
    def vertex_set(self):
        return frozenset(self.vertices)

    @cached_property
    def darts_at(self):
        d = {v: [] for v in self.vertices}
        for e, (a, b) in self.edges.items():
            d[a].append((e, 0))
            d[b].append((e, 1))
        return {v: tuple(sorted(ds, key=skey)) for v, ds in d.items()}

    @cached_property
    def traversals_from(self):
        return {v: tuple(self.leaving(d) for d in ds) for v, ds in self.darts_at.items()}

    @cached_property
    def corners(self):
        """vertex -> list of (dart_in, dart_out, square, k)."""
        out = defaultdict(list)
        for s in sorted(self.squares, key=skey):
            bd = self.squares[s]
            for k in range(4):
                t1, t2 = bd[k], bd[(k + 1) % 4]
                out[self.head(t1)].append((in_dart(t1), out_dart(t2), s, k))
        return {v: out.get(v, []) for v in self.vertices}

    @cached_property
    def corner_pairs(self):
        """vertex -> set of frozenset dart pairs forming a square corner."""
        return {v: {frozenset((a, b)) for a, b, _, _ in cs} for v, cs in self.corners.items()}

    def is_corner(self, v, d1, d2):
        return frozenset((d1, d2)) in self.corner_pairs[v]

    @cached_property
    def squares_of_edge(self):
        out = defaultdict(list)
        for s, bd in self.squares.items():
            for e, _ in bd:
                if s not in out[e]:
                    out[e].append(s)
        return dict(out)

    def edge_loops(self):
        return sorted((e for e, (a, b) in self.edges.items() if a == b), key=skey)

    def components(self, vertices=None, edges=None):
        """Vertex components of the 1-skeleton, optionally restricted."""
        vertices = set(self.vertices if vertices is None else vertices)
        edges = self.edges.keys() if edges is None else edges
        adj = defaultdict(list)
        for e in edges:
            a, b = self.edges[e]
            adj[a].append(b)
            adj[b].append(a)
        seen = set()
        comps = []
        for v in sorted(vertices, key=skey):
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            seen.add(v)
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w in vertices and w not in seen:
                        seen.add(w)
                        comp.add(w)
                        stack.append(w)
            comps.append(comp)
        return comps

    def is_connected(self):
        return len(self.components()) <= 1

    def restrict(self, vertices, edges, squares, name=""):
        vs = [v for v in self.vertices if v in vertices]
        return SquareComplex(vs, {e: self.edges[e] for e in sorted(edges, key=skey)},
                             {s: self.squares[s] for s in sorted(squares, key=skey)}, name=name)

    @cached_property
    def _cache(self):
        return {}


# hyperplanes


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def classes(self):
        out = defaultdict(set)
        for x in self.parent:
            out[self.find(x)].add(x)
        return list(out.values())


@dataclass(frozen=True)
class Hyperplane:
    id: int
    edges: frozenset
    coorientation: dict | None  # edge -> +1/-1: the direction pointing to the + side
    one_sided_witness: tuple | None = None  # squares along a sign-flipping chain

    @property
    def two_sided(self):
        return self.coorientation is not None

    def to_json(self):
        return {
            "id": self.id,
            "edges": sorted(map(str, self.edges)),
            "two_sided": self.two_sided,
            **({"coorientation": {str(e): s for e, s in sorted(self.coorientation.items(), key=lambda kv: skey(kv[0]))}}
               if self.coorientation else {"one_sided_witness": [str(s) for s in self.one_sided_witness]}),
        }


def hyperplanes(X: SquareComplex) -> list[Hyperplane]:
    """Parallelism classes of edges with co-orientation by sign propagation."""
    if "hyperplanes" in X._cache:
        return X._cache["hyperplanes"]
    uf = UnionFind(X.edges)
    # signed adjacency: (e1 -> e2, relative sign, square)
    links = defaultdict(list)
    for s, bd in X.squares.items():
        for i in (0, 1):
            (e1, s1), (e2, s2) = bd[i], bd[i + 2]
            uf.union(e1, e2)
            rel = -s1 * s2
            links[e1].append((e2, rel, s))
            links[e2].append((e1, rel, s))
    classes = sorted((sorted(c, key=skey) for c in uf.classes()), key=lambda c: skey(c[0]))
    result = []
    for hid, members in enumerate(classes):
        label = {members[0]: 1}
        via = {members[0]: None}
        queue = deque([members[0]])
        witness = None
        while queue and witness is None:
            e = queue.popleft()
            for f, rel, s in links[e]:
                want = label[e] * rel
                if f not in label:
                    label[f] = want
                    via[f] = (e, s)
                    queue.append(f)
                elif label[f] != want:
                    witness = _flip_chain(via, e, f, s)
                    break
        coor = None if witness is not None else label
        result.append(Hyperplane(hid, frozenset(members), coor, witness))
    X._cache["hyperplanes"] = result
    return result


def _flip_chain(via, e, f, s):
    def chain(x):
        out = []
        while via[x] is not None:
            prev, sq = via[x]
            out.append(sq)
            x = prev
        return out

    a, b = chain(e), chain(f)
    return tuple(reversed(a)) + (s,) + tuple(b)


def hyperplane_index(X: SquareComplex) -> dict:
    if "hyp_index" not in X._cache:
        X._cache["hyp_index"] = {e: h.id for h in hyperplanes(X) for e in h.edges}
    return X._cache["hyp_index"]


def crossing_sign(X: SquareComplex, t) -> int:
    """+1 if the traversal crosses its hyperplane towards the + side."""
    h = hyperplanes(X)[hyperplane_index(X)[t[0]]]
    if h.coorientation is None:
        raise PreconditionError(f"hyperplane {h.id} is one-sided", {"hyperplane": h.id})
    return h.coorientation[t[0]] * t[1]


# structure analysis


@dataclass(frozen=True)
class OsculationEvent:
    kind: str  # intersect | osculate | self-intersect | self-osculate | loop-self-osculate
    vertex: Hashable
    darts: tuple
    hyperplanes: tuple

    def to_json(self):
        return {
            "kind": self.kind,
            "vertex": str(self.vertex),
            "darts": [[str(e), k] for e, k in self.darts],
            "hyperplanes": list(self.hyperplanes),
        }


@dataclass
class StructureReport:
    links: dict
    npc: bool
    npc_witnesses: list
    hyperplanes: list
    events: list
    inter_osculating: list
    directly_special: bool
    failures: list = field(default_factory=list)

    def to_json(self):
        return {
            "report": 1,
            "links": {str(v): {"darts": [[str(e), k] for e, k in l["darts"]],
                               "edges": [[[str(a[0]), a[1]], [str(b[0]), b[1]], str(s)] for a, b, s in l["edges"]]}
                      for v, l in self.links.items()},
            "npc": self.npc,
            "npc_witnesses": self.npc_witnesses,
            "hyperplanes": [h.to_json() for h in self.hyperplanes],
            "events": [ev.to_json() for ev in self.events],
            "inter_osculating": [list(p) for p in self.inter_osculating],
            "directly_special": self.directly_special,
            "failures": self.failures,
        }


def analyze(X: SquareComplex) -> StructureReport:
    if "analysis" in X._cache:
        return X._cache["analysis"]
    hyps = hyperplanes(X)
    hidx = hyperplane_index(X)
    links = {}
    npc_witnesses = []
    for v in sorted(X.vertices, key=skey):
        seen = {}
        edges = []
        for a, b, s, k in X.corners[v]:
            edges.append((a, b, s))
            if a == b:
                npc_witnesses.append({"kind": "link-loop", "vertex": str(v), "dart": [str(a[0]), a[1]], "square": str(s)})
            key = frozenset((a, b))
            if key in seen:
                npc_witnesses.append({"kind": "doubled-link-edge", "vertex": str(v),
                                      "darts": sorted([[str(d[0]), d[1]] for d in key]),
                                      "squares": [str(seen[key]), str(s)]})
            else:
                seen[key] = s
        links[v] = {"darts": X.darts_at[v], "edges": edges}
    events = []
    for v in sorted(X.vertices, key=skey):
        for d1, d2 in combinations(X.darts_at[v], 2):
            h1, h2 = hidx[d1[0]], hidx[d2[0]]
            corner = X.is_corner(v, d1, d2)
            if d1[0] == d2[0]:
                events.append(OsculationEvent("loop-self-osculate", v, (d1, d2), (h1,)))
                if corner:
                    events.append(OsculationEvent("self-intersect", v, (d1, d2), (h1,)))
                continue
            if h1 == h2:
                kind = "self-intersect" if corner else "self-osculate"
                events.append(OsculationEvent(kind, v, (d1, d2), (h1,)))
            else:
                kind = "intersect" if corner else "osculate"
                events.append(OsculationEvent(kind, v, (d1, d2), tuple(sorted((h1, h2)))))
    inter = sorted({ev.hyperplanes for ev in events if ev.kind == "intersect"}
                   & {ev.hyperplanes for ev in events if ev.kind == "osculate"})
    failures = list(npc_witnesses)
    for h in hyps:
        if not h.two_sided:
            failures.append({"kind": "one-sided", "hyperplane": h.id,
                             "squares": [str(s) for s in h.one_sided_witness]})
    for e in X.edge_loops():
        failures.append({"kind": "edge-loop", "edge": str(e)})
    for ev in events:
        if ev.kind in ("self-intersect", "self-osculate", "loop-self-osculate"):
            failures.append({"kind": ev.kind, **{k: ev.to_json()[k] for k in ("vertex", "darts", "hyperplanes")}})
    for pair in inter:
        failures.append({"kind": "inter-osculate", "hyperplanes": list(pair)})
    npc = not npc_witnesses
    report = StructureReport(links, npc, npc_witnesses, hyps, events, inter, not failures, failures)
    X._cache["analysis"] = report
    return report


def require_directly_special(X: SquareComplex):
    rep = analyze(X)
    if not rep.directly_special:
        raise PreconditionError(f"complex {X.name or ''} is not directly special".replace("  ", " "),
                                {"failures": rep.failures[:5]})
    return rep


# subcomplexes and maps


class Subcomplex:
    def __init__(self, parent: SquareComplex, vertices=(), edges=(), squares=(), name=""):
        self.parent = parent
        self.vertices = frozenset(vertices)
        self.edges = frozenset(edges)
        self.squares = frozenset(squares)
        self.name = name
        for e in self.edges:
            if e not in parent.edges:
                raise StructuralError(f"unknown edge {e}", {"edge": str(e)})
            a, b = parent.edges[e]
            if a not in self.vertices or b not in self.vertices:
                raise StructuralError(f"edge {e} of subcomplex lacks an endpoint", {"edge": str(e)})
        for s in self.squares:
            for e, _ in parent.squares[s]:
                if e not in self.edges:
                    raise StructuralError(f"square {s} of subcomplex lacks edge {e}", {"square": str(s)})
        for v in self.vertices:
            if v not in parent.vertex_set:
                raise StructuralError(f"unknown vertex {v}", {"vertex": str(v)})

    @classmethod
    def from_edges(cls, parent, edges, squares=(), vertices=(), name=""):
        vs = set(vertices)
        edges = set(edges)
        for s in squares:
            edges.update(e for e, _ in parent.squares[s])
        for e in edges:
            vs.update(parent.edges[e])
        return cls(parent, vs, edges, squares, name)

    @classmethod
    def full(cls, parent, vertices, name=""):
        """Full subcomplex spanned by a vertex set."""
        vs = set(vertices)
        es = {e for e, (a, b) in parent.edges.items() if a in vs and b in vs}
        ss = {s for s, bd in parent.squares.items() if all(e in es for e, _ in bd)}
        return cls(parent, vs, es, ss, name)

    @classmethod
    def whole(cls, parent):
        return cls(parent, parent.vertices, parent.edges, parent.squares, parent.name)

    def __eq__(self, other):
        return (isinstance(other, Subcomplex) and self.parent is other.parent and self.vertices == other.vertices
                and self.edges == other.edges and self.squares == other.squares)

    def __hash__(self):
        return hash((self.vertices, self.edges, self.squares))

    def __repr__(self):
        return f"Subcomplex({self.name!r}, V={len(self.vertices)}, E={len(self.edges)}, S={len(self.squares)})"

    def intersection(self, other):
        return Subcomplex(self.parent, self.vertices & other.vertices, self.edges & other.edges,
                          self.squares & other.squares)

    def as_complex(self):
        if not hasattr(self, "_complex"):
            self._complex = self.parent.restrict(self.vertices, self.edges, self.squares, name=self.name)
        return self._complex

    def inclusion(self):
        Y = self.as_complex()
        return CombinatorialMap(Y, self.parent, {v: v for v in Y.vertices}, {e: (e, 1) for e in Y.edges})

    def is_connected(self):
        return len(self.parent.components(self.vertices, self.edges)) <= 1

    def to_json(self):
        return {"vertices": sorted(map(str, self.vertices)), "edges": sorted(map(str, self.edges)),
                "squares": sorted(map(str, self.squares))}


def _square_lookup(X: SquareComplex):
    if "square_lookup" not in X._cache:
        table = {}
        for s in sorted(X.squares, key=skey):
            bd = X.squares[s]
            rev = reverse_steps(bd)
            for k in range(4):
                table.setdefault(bd[k:] + bd[:k], s)
                table.setdefault(rev[k:] + rev[:k], s)
        X._cache["square_lookup"] = table
    return X._cache["square_lookup"]


def find_square(X: SquareComplex, boundary):
    return _square_lookup(X).get(tuple(boundary))


class CombinatorialMap:
    """Cellular map; edges go to signed edges, squares to squares."""

    def __init__(self, domain: SquareComplex, codomain: SquareComplex, vmap, emap, smap=None, name=""):
        self.domain = domain
        self.codomain = codomain
        self.vmap = dict(vmap)
        self.emap = {f: (e, int(s)) for f, (e, s) in emap.items()}
        self.name = name
        for v in domain.vertices:
            if v not in self.vmap or self.vmap[v] not in codomain.vertex_set:
                raise StructuralError(f"vertex {v} has no image", {"vertex": str(v)})
        for f, (a, b) in domain.edges.items():
            if f not in self.emap:
                raise StructuralError(f"edge {f} has no image", {"edge": str(f)})
            e, s = self.emap[f]
            if e not in codomain.edges:
                raise StructuralError(f"edge {f} maps to unknown edge {e}", {"edge": str(f)})
            ends = codomain.edges[e] if s > 0 else codomain.edges[e][::-1]
            if (self.vmap[a], self.vmap[b]) != ends:
                raise StructuralError(f"map is not cellular at edge {f}", {"edge": str(f)})
        self._smap = smap

    @property
    def smap(self):
        if self._smap is None:
            self._smap = {}
            for s, bd in self.domain.squares.items():
                img = find_square(self.codomain, self.traversal_images(bd))
                if img is None:
                    raise StructuralError(f"square {s} does not map onto a square", {"square": str(s)})
                self._smap[s] = img
        return self._smap

    def traversal_image(self, t):
        e, s = self.emap[t[0]]
        return (e, s * t[1])

    def traversal_images(self, steps):
        return tuple(self.traversal_image(t) for t in steps)

    def path_image(self, p: Path) -> Path:
        return Path(self.vmap[p.start], self.traversal_images(p.steps), self.vmap[p.end])

    def dart_image(self, d):
        e, s = self.emap[d[0]]
        return (e, d[1] if s > 0 else 1 - d[1])

    def compose(self, other: "CombinatorialMap") -> "CombinatorialMap":
        """``other`` after ``self``."""
        return CombinatorialMap(self.domain, other.codomain,
                                {v: other.vmap[w] for v, w in self.vmap.items()},
                                {f: other.traversal_image(t) for f, t in self.emap.items()})

    def image_subcomplex(self):
        return Subcomplex(self.codomain, set(self.vmap.values()), {e for e, _ in self.emap.values()},
                          set(self.smap.values()))

    def is_vertex_injective(self):
        return len(set(self.vmap.values())) == len(self.vmap)

    def is_embedding(self):
        return (self.is_vertex_injective() and len({e for e, _ in self.emap.values()}) == len(self.emap)
                and len(set(self.smap.values())) == len(self.smap))

    def is_covering(self):
        Y, X = self.domain, self.codomain
        for y in Y.vertices:
            imgs = sorted((self.dart_image(d) for d in Y.darts_at[y]), key=skey)
            if imgs != sorted(X.darts_at[self.vmap[y]], key=skey):
                return False
            ycorners = sorted((frozenset((self.dart_image(a), self.dart_image(b))) for a, b, _, _ in Y.corners[y]),
                              key=lambda fs: sorted(map(skey, fs)))
            xcorners = sorted((frozenset((a, b)) for a, b, _, _ in X.corners[self.vmap[y]]),
                              key=lambda fs: sorted(map(skey, fs)))
            if [sorted(map(skey, c)) for c in ycorners] != [sorted(map(skey, c)) for c in xcorners]:
                return False
        return True


@dataclass
class MapCheck:
    combinatorial: bool
    local_isometry: bool
    witnesses: list

    def to_json(self):
        return {"report": 1, "combinatorial": self.combinatorial, "local_isometry": self.local_isometry,
                "witnesses": self.witnesses}


def check_map(phi: CombinatorialMap) -> MapCheck:
    Y, X = phi.domain, phi.codomain
    witnesses = []
    combinatorial = True
    try:
        phi.smap
    except StructuralError as err:
        combinatorial = False
        witnesses.append({"kind": "square-not-mapped", **(err.witness or {})})
    local = True
    for y in sorted(Y.vertices, key=skey):
        imgs = {}
        for d in Y.darts_at[y]:
            img = phi.dart_image(d)
            if img in imgs:
                local = False
                witnesses.append({"kind": "dart-collision", "vertex": str(y),
                                  "darts": [[str(imgs[img][0]), imgs[img][1]], [str(d[0]), d[1]]]})
            else:
                imgs[img] = d
        for (i1, d1), (i2, d2) in combinations(sorted(imgs.items(), key=lambda kv: skey(kv[1])), 2):
            if X.is_corner(phi.vmap[y], i1, i2) and not Y.is_corner(y, d1, d2):
                local = False
                witnesses.append({"kind": "missing-corner", "vertex": str(y),
                                  "darts": [[str(d1[0]), d1[1]], [str(d2[0]), d2[1]]]})
    return MapCheck(combinatorial, local and combinatorial, witnesses)


def require_local_isometry(phi: CombinatorialMap):
    chk = check_map(phi)
    if not chk.local_isometry:
        raise PreconditionError("map is not a local isometry", {"witnesses": chk.witnesses[:5]})
    return chk


def _hyperplane_by_id(X, h):
    hyps = hyperplanes(X)
    hid = h.id if isinstance(h, Hyperplane) else h
    if not isinstance(hid, int) or not 0 <= hid < len(hyps):
        raise PreconditionError(f"{h} is not a hyperplane of the complex", {"hyperplane": str(h)})
    if isinstance(h, Hyperplane) and hyps[hid].edges != h.edges:
        raise PreconditionError("hyperplane belongs to a different complex", {"hyperplane": hid})
    return hyps[hid]


def carrier(X: SquareComplex, h) -> Subcomplex:
    H = _hyperplane_by_id(X, h)
    squares = {s for e in H.edges for s in X.squares_of_edge.get(e, ())}
    return Subcomplex.from_edges(X, H.edges, squares, name=f"N(H{H.id})")


def complex_hyperplane_relation(phi: CombinatorialMap, h) -> dict:
    Y, X = phi.domain, phi.codomain
    H = _hyperplane_by_id(X, h)
    intersects = any(phi.emap[f][0] in H.edges for f in Y.edges)
    osculations = []
    for y in sorted(Y.vertices, key=skey):
        covered = {phi.dart_image(d) for d in Y.darts_at[y]}
        for d in X.darts_at[phi.vmap[y]]:
            if d[0] in H.edges and d not in covered:
                osculations.append((y, d))
    return {"hyperplane": H.id, "intersects": intersects, "osculations": osculations,
            "inter_osculates": intersects and bool(osculations)}


def inter_osculating_hyperplanes(phi: CombinatorialMap) -> list:
    out = []
    for H in hyperplanes(phi.codomain):
        rel = complex_hyperplane_relation(phi, H.id)
        if rel["inter_osculates"]:
            out.append(rel)
    return out


def spanning_tree(X: SquareComplex, root, edges=None):
    """BFS tree: returns (parent traversal per vertex, set of tree edges)."""
    allowed = None if edges is None else set(edges)
    parent = {root: None}
    queue = deque([root])
    tree = set()
    while queue:
        v = queue.popleft()
        for t in X.traversals_from[v]:
            if allowed is not None and t[0] not in allowed:
                continue
            w = X.head(t)
            if w not in parent:
                parent[w] = t
                tree.add(t[0])
                queue.append(w)
    return parent, tree


def tree_path(X: SquareComplex, parent, v) -> Path:
    steps = []
    root = v
    while parent[root] is not None:
        t = parent[root]
        steps.append(t)
        root = X.tail(t)
    steps.reverse()
    return Path(root, tuple(steps), v)


def generator_loops(X: SquareComplex, vertices, edges, root=None):
    """Loops (tree path, chord, tree path back) generating pi_1 of each component."""
    loops = []
    for comp in X.components(vertices, edges):
        r = root if root in comp else min(comp, key=skey)
        cedges = [e for e in edges if X.edges[e][0] in comp]
        parent, tree = spanning_tree(X, r, cedges)
        for e in sorted(cedges, key=skey):
            if e in tree:
                continue
            a, b = X.edges[e]
            loops.append(tree_path(X, parent, a) + Path(a, ((e, 1),), b) + tree_path(X, parent, b).inverse())
    return loops


@dataclass
class WallProjection:
    subcomplex: Subcomplex
    trivial: bool | None
    essential_loop: Path | None = None

    def to_json(self):
        out = {"report": 1, "wproj": self.subcomplex.to_json(), "trivial": self.trivial}
        if self.essential_loop is not None:
            out["essential_loop"] = [f"{'+' if s > 0 else '-'}{e}" for e, s in self.essential_loop.steps]
        return out


def wall_projection(X: SquareComplex, Y1: Subcomplex, Y2: Subcomplex, oracle=None) -> WallProjection:
    hidx = hyperplane_index(X)
    walls = {hidx[e] for e in Y1.edges}
    edges = {e for e in Y2.edges if hidx[e] in walls}
    squares = {s for s in Y2.squares if all(e in edges for e, _ in X.squares[s])}
    wp = Subcomplex(X, Y2.vertices, edges, squares, name="WProj")
    if oracle is None:
        return WallProjection(wp, None)
    for loop in generator_loops(X, wp.vertices, wp.edges):
        if not oracle.is_null(loop):
            return WallProjection(wp, False, loop)
    return WallProjection(wp, True)


def subdivide(X: SquareComplex) -> SquareComplex:
    """Cubical subdivision: V+E+S vertices, 2E+4S edges, 4S squares.

    Edge halves end in .0/.1 and spokes in :k, so repeated subdivision never reuses a name."""
    def mid(e):
        return f"m[{e}]"

    def centre(s):
        return f"c[{s}]"

    def first_half(t):  # from tail(t) to the midpoint
        e, s = t
        return (f"{e}.0", 1) if s > 0 else (f"{e}.1", -1)

    def second_half(t):  # from the midpoint to head(t)
        e, s = t
        return (f"{e}.1", 1) if s > 0 else (f"{e}.0", -1)

    vertices = [str(v) for v in X.vertices]
    vertices += [mid(e) for e in sorted(X.edges, key=skey)]
    vertices += [centre(s) for s in sorted(X.squares, key=skey)]
    edges = {}
    for e in sorted(X.edges, key=skey):
        a, b = X.edges[e]
        edges[f"{e}.0"] = (str(a), mid(e))
        edges[f"{e}.1"] = (mid(e), str(b))
    squares = {}
    for s in sorted(X.squares, key=skey):
        bd = X.squares[s]
        for k in range(4):
            edges[f"{s}:{k}"] = (mid(bd[k][0]), centre(s))
        for k in range(4):
            k1 = (k + 1) % 4
            squares[f"{s}.{k1}"] = (second_half(bd[k]), first_half(bd[k1]), (f"{s}:{k1}", 1), (f"{s}:{k}", -1))
    return SquareComplex(vertices, edges, squares, name=f"sd({X.name})" if X.name else "")
