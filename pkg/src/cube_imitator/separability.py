"""Finite quotients witnessing residual finiteness and (multi-)coset separability.

Group elements are loops at the base vertex ``x`` of a directly special
complex X.  Every returned witness is a permutation quotient of
pi_1(X, x) whose separating property has been checked by enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import perms
from .covers import SubgroupRep, pi1_basis
from .errors import PreconditionError, PropertyViolation, ResourceError
from .geometry import develop_hull, raag_word_oracle
from .imitator import imitate, imitator_action
from .kernel import (CombinatorialMap, Path, SquareComplex, Subcomplex, require_directly_special,
                     require_local_isometry)
from .limits import pick

DEFAULT_SEARCH_BUDGET = 64


class FiniteQuotient:
    """Homomorphism pi_1(X, x) -> Sym(n) given by images of the basis generators."""

    def __init__(self, X: SquareComplex, x, images: dict, degree: int, check=True, name=""):
        self.X, self.x = X, x
        self.basis = pi1_basis(X, x)
        self.degree = degree
        self.images = {g: tuple(images.get(g, perms.identity(degree))) for g in self.basis.generators}
        self.name = name
        if check:
            for g, p in self.images.items():
                if not perms.is_permutation(p, degree):
                    raise PropertyViolation(f"image of {g} is not a permutation", {"generator": str(g)})
            for r in self.basis.relators():
                if self.evaluate(r) != perms.identity(degree):
                    raise PropertyViolation("quotient does not kill a square relation",
                                            {"relator": [str(e) for e, _ in r.steps]})

    @classmethod
    def from_subgroup(cls, S: SubgroupRep, name=""):
        return cls(S.X, S.x, S.action, S.degree, check=False, name=name)

    def evaluate(self, loop: Path):
        if loop.start != self.x or not loop.is_loop:
            raise PreconditionError("element must be a loop at the base vertex", {"start": str(loop.start)})
        return perms.evaluate_word(self.basis.expand(loop), self.images, self.degree)

    def product(self, other: "FiniteQuotient") -> "FiniteQuotient":
        """Direct product acting on the disjoint union of the point sets."""
        n = self.degree
        images = {g: self.images[g] + tuple(n + i for i in other.images[g]) for g in self.basis.generators}
        return FiniteQuotient(self.X, self.x, images, n + other.degree, check=False,
                              name=f"{self.name}x{other.name}")

    def group(self, budget=None):
        return perms.generate_group(self.images.values(), self.degree, budget)

    def image_of(self, loops, budget=None):
        return perms.generate_group([self.evaluate(l) for l in loops], self.degree, budget)

    def act_format(self):
        lines = ["act 1"]
        for g in self.basis.generators:
            lines.append(f"gen {g}: " + " ".join(map(str, self.images[g])))
        return "\n".join(lines) + "\n"


def abelian_quotient(X: SquareComplex, x, n: int) -> FiniteQuotient:
    """pi_1 -> H_1(X; Z/n), realised as cyclic shifts on one n-cycle per cohomology basis vector."""
    from .lattice import integer_kernel
    basis = pi1_basis(X, x)
    gens = basis.generators
    rows = []
    for r in basis.relators():
        row = [0] * len(gens)
        for g, s in basis.expand(r):
            row[gens.index(g)] += s
        rows.append(row)
    funcs = integer_kernel(rows, len(gens)) if gens else []
    images = {}
    for g_i, g in enumerate(gens):
        img = []
        for k, f in enumerate(funcs):
            shift = f[g_i] % n
            img.extend(k * n + (j + shift) % n for j in range(n))
        images[g] = tuple(img)
    return FiniteQuotient(X, x, images, n * len(funcs), name=f"H1mod{n}")


class ConvexSubgroup:
    """Subgroup pi_1(Y, y) < pi_1(X, x) of a based local isometry."""

    def __init__(self, phi: CombinatorialMap, y, name=""):
        require_local_isometry(phi)
        self.phi, self.y = phi, y
        self.x = phi.vmap[y]
        self.name = name or phi.name or "K"
        self._gphi = None

    @property
    def X(self):
        return self.phi.codomain

    def generators(self):
        basis = pi1_basis(self.phi.domain, self.y)
        return [self.phi.path_image(basis.generator_loop(g)) for g in basis.generators]

    @property
    def imitator_subgroup(self) -> SubgroupRep:
        if self._gphi is None:
            _, _, self._gphi = imitator_action(self.phi, self.y, self.x)
        return self._gphi

    def rho(self, loop: Path) -> Path:
        """Imitator homomorphism, as a loop in X; None when the loop is outside G_phi."""
        tr = imitate(self.phi, loop, self.y)
        if tr.end != self.y:
            return None
        return self.phi.path_image(tr.imitator).reduced()

    def contains(self, loop: Path, oracle) -> bool:
        r = self.rho(loop)
        return r is not None and oracle.is_null(loop + r.inverse())


# residual finiteness


@dataclass
class RFWitness:
    quotient: FiniteQuotient
    hull: object
    phi: CombinatorialMap
    base_point: int
    image_point: int

    def to_json(self):
        return {"report": 1, "hull_vertices": len(self.hull.vertices), "points": self.quotient.degree,
                "base_point": self.base_point, "image_point": self.image_point,
                "quotient": self.quotient.act_format(), "check": "pass"}


def rf_witness(X: SquareComplex, gamma: Path, oracle=None) -> RFWitness:
    require_directly_special(X)
    oracle = oracle or raag_word_oracle(X)
    if not gamma.is_loop:
        raise PreconditionError("element must be a closed path")
    if oracle.is_null(gamma):
        raise PreconditionError("loop is null-homotopic", {"loop": [f"{'' if s > 0 else '-'}{e}" for e, s in gamma.steps]})
    x = gamma.start
    gamma = gamma.reduced()
    D, _ = develop_hull(X, gamma, oracle)
    Y = Subcomplex.whole(D.complex)
    phi = D.development
    action, order, _ = imitator_action(phi, D.base, x)
    q = FiniteQuotient(X, x, action, len(order), name="hull")
    i0 = order.index(D.base)
    i1 = q.evaluate(gamma)[i0]
    if i1 == i0:
        raise PropertyViolation("hull action fails to move the base point")
    return RFWitness(q, Y, phi, i0, i1)


# product quotients and induced actions


class ProductQuotient:
    """h -> (q(h), q(rho(h))) on the imitator subgroup of a convex subgroup."""

    def __init__(self, q: FiniteQuotient, K: ConvexSubgroup, check=True):
        if q.x != K.x:
            raise PreconditionError("quotient and subgroup use different base vertices")
        self.q, self.K = q, K
        self.degree = 2 * q.degree
        if check:
            gens = K.imitator_subgroup.schreier_generators()[:6]
            for a in gens:
                for b in gens:
                    if self.evaluate(a + b) != perms.compose(self.evaluate(a), self.evaluate(b)):
                        raise PropertyViolation("product quotient is not multiplicative")

    def evaluate(self, h: Path):
        r = self.K.rho(h)
        if r is None:
            raise PreconditionError("element is outside the imitator subgroup")
        a, b = self.q.evaluate(h), self.q.evaluate(r)
        n = self.q.degree
        return a + tuple(n + i for i in b)


def product_quotient(q: FiniteQuotient, K: ConvexSubgroup) -> ProductQuotient:
    return ProductQuotient(q, K)


def induced_quotient(H: SubgroupRep, t, fixed_points=None, point=None, act=None,
                     budget=None) -> FiniteQuotient:
    """Action of G on G/L for the subgroup L = t^-1(Stab(point)) of H.

    ``t`` is a permutation quotient of H acting on a finite set through ``act(point, perm)``.
    With ``fixed_points`` the set is tuples of points; with neither, t acts on its own
    image by right multiplication, so L = ker t.  The base point of the result is the coset L."""
    budget = pick(budget, "group")
    if point is None:
        if fixed_points is not None:
            point, act = tuple(fixed_points), _move_points
        else:
            point, act = perms.identity(t.degree), perms.compose
    gens = [t.evaluate(s) for s in H.schreier_generators()]
    orbit = {point: 0}
    order = [point]
    for w in order:
        for u in gens:
            v = act(w, u)
            if v not in orbit:
                orbit[v] = len(order)
                order.append(v)
                if len(order) > budget:
                    raise ResourceError(f"orbit enumeration exceeded {budget} points")
    trans = H.transversal_loops()
    cells = sorted(trans)
    cell_index = {c: i for i, c in enumerate(cells)}
    m = len(order)
    if len(cells) * m > budget:
        raise ResourceError(f"induced action exceeded {budget} points")
    basis = H.basis
    images = {}
    for g in basis.generators:
        gl = basis.generator_loop(g)
        img = [0] * (len(cells) * m)
        for ci, c in enumerate(cells):
            d = H.action[g][c]
            u = t.evaluate(trans[c] + gl + trans[d].inverse())
            di = cell_index[d]
            for k, w in enumerate(order):
                img[ci * m + k] = di * m + orbit[act(w, u)]
        images[g] = tuple(img)
    q = FiniteQuotient(H.X, H.x, images, len(cells) * m, name="induced")
    q.base_point = cell_index[H.base] * m
    return q


def _move_points(points, p):
    return tuple(p[i] for i in points)


def _move_pairing(pairs, p, n):
    """Image of a set of pairs (i, n + j) under a permutation of 2n points."""
    return tuple(sorted((p[i], p[n + j] - n) for i, j in pairs))


def diagonal_quotient(H: SubgroupRep, t: ProductQuotient, points=None) -> FiniteQuotient:
    """Induced action on cosets of the t-preimage of the stabiliser of {(i, n + i) : i in points}.

    When ``points`` is invariant under q(K) the subgroup K lies in the stabiliser, since rho
    fixes K; an element g of H leaves it when q(g) and q(rho g) differ on some point.
    Only one orbit of pairings is enumerated, never the image group."""
    n = t.q.degree
    pts = range(n) if points is None else points
    start = tuple((i, i) for i in sorted(pts))
    return induced_quotient(H, t, point=start, act=lambda w, p: _move_pairing(w, p, n))


def _pairing_candidates(H, t, g, K: ConvexSubgroup):
    """Smallest q(K)-orbit on which q(g) and q(rho g) disagree, the full diagonal, then ker t."""
    q = t.q
    a, b = q.evaluate(g), q.evaluate(K.rho(g))
    kgens = [q.evaluate(k) for k in K.generators()]
    orbits = [perms.orbit(i, kgens) for i in range(q.degree) if a[i] != b[i]]
    if orbits:
        best = min(orbits, key=lambda o: (len(o), sorted(o)))
        if len(best) < q.degree:
            yield diagonal_quotient(H, t, best)
    yield diagonal_quotient(H, t)
    yield induced_quotient(H, t)


def _first_separating(kind, g, parts, candidates, details):
    for Q in candidates:
        try:
            return _verify(kind, g, Q, parts, details)
        except PropertyViolation:
            continue
    raise PropertyViolation("candidate quotient does not separate")


# separation


@dataclass
class Separation:
    kind: str
    element: Path
    quotient: FiniteQuotient
    element_image: tuple
    coset_image_size: int
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"report": 1, "element": [f"{'' if s > 0 else '-'}{e}" for e, s in self.element.steps],
                "coset_spec": self.kind, "points": self.quotient.degree,
                "coset_image_size": self.coset_image_size, "quotient": self.quotient.act_format(),
                "check": "pass", **self.details}


class MembershipWitness(PropertyViolation):
    """The element lies in the coset set, so no quotient can separate it."""


def _coset_image(q: FiniteQuotient, parts, budget=None):
    """Enumerate q(A_1)...q(A_k); each part is a list of loops generating a subgroup or a single element."""
    budget = pick(budget, "group")
    current = {perms.identity(q.degree)}
    for kind, data in parts:
        if kind == "subgroup":
            S = q.image_of(data, budget)
        else:
            S = {q.evaluate(data)}
        current = {perms.compose(a, b) for a in current for b in S}
        if len(current) > budget:
            raise ResourceError(f"coset image exceeded {budget} elements")
    return current


def _verify(kind, g, q, parts, details=None):
    image = _coset_image(q, parts)
    tg = q.evaluate(g)
    if tg in image:
        raise PropertyViolation("candidate quotient does not separate")
    return Separation(kind, g, q, tg, len(image), details or {})


def _check_domain(K: ConvexSubgroup, loops, what):
    for l in loops:
        if K.rho(l) is None:
            raise PreconditionError(f"{what} generator lies outside the retraction's domain",
                                    {"loop": [str(e) for e, _ in l.steps]})


def _check_invariant(K: ConvexSubgroup, Ki: ConvexSubgroup, oracle):
    for k in Ki.generators():
        r = K.rho(k)
        if r is None or not Ki.contains(r, oracle):
            raise PreconditionError(f"retraction does not preserve {Ki.name}",
                                    {"loop": [str(e) for e, _ in k.steps]})


def separate_subgroup(g: Path, K: ConvexSubgroup, oracle=None) -> Separation:
    """Finite quotient of G in which g is not in the image of K (retraction + residual finiteness)."""
    X = K.X
    oracle = oracle or raag_word_oracle(X)
    Gk = K.imitator_subgroup
    parts = [("subgroup", K.generators())]
    if not Gk.contains(g):
        return _verify("subgroup", g, FiniteQuotient.from_subgroup(Gk, "imitator"), parts,
                       {"route": "imitator-subgroup"})
    r = K.rho(g)
    diff = (g + r.inverse()).reduced()
    if oracle.is_null(diff):
        raise MembershipWitness("element lies in the subgroup", {"retraction": [str(e) for e, _ in r.steps]})
    q = rf_witness(X, diff, oracle).quotient
    t = product_quotient(q, K)
    return _first_separating("subgroup", g, parts, _pairing_candidates(Gk, t, g, K),
                             {"route": "retraction-product"})


def separate_double(g: Path, K1: ConvexSubgroup, K2: ConvexSubgroup, oracle=None) -> Separation:
    """Separate g from K1 K2, using the retraction onto K1 (which must preserve K2)."""
    X = K1.X
    oracle = oracle or raag_word_oracle(X)
    G1 = K1.imitator_subgroup
    parts = [("subgroup", K1.generators()), ("subgroup", K2.generators())]
    _check_domain(K1, K2.generators(), K2.name)
    _check_invariant(K1, K2, oracle)
    if not G1.contains(g):
        return _verify("double", g, FiniteQuotient.from_subgroup(G1, "imitator"), parts,
                       {"route": "imitator-subgroup"})
    r = K1.rho(g)
    h = (r.inverse() + g).reduced()
    if K2.contains(h, oracle):
        raise MembershipWitness("element lies in the double coset",
                                {"k1": [str(e) for e, _ in r.steps], "k2": [str(e) for e, _ in h.steps]})
    q = separate_subgroup(h, K2, oracle).quotient
    # q(g) not in q(rho g) q(K2) holds since h moves the base coset while K2 fixes it
    t = product_quotient(q, K1)
    return _first_separating("double", g, parts, _pairing_candidates(G1, t, g, K1),
                             {"route": "retraction-product"})


def _candidates(X, x, loops, subgroups, oracle, budget):
    seen = 0
    for n in range(2, 7):
        yield abelian_quotient(X, x, n)
        seen += 1
    for K in subgroups:
        yield FiniteQuotient.from_subgroup(K.imitator_subgroup, f"imitator-{K.name}")
    for l in loops:
        if not oracle.is_null(l):
            yield rf_witness(X, l, oracle).quotient
    for K in subgroups:
        for l in loops:
            try:
                yield separate_subgroup(l, K, oracle).quotient
            except (PropertyViolation, PreconditionError):
                continue


def separate_triple(g: Path, K1: ConvexSubgroup, K2: ConvexSubgroup, K3: ConvexSubgroup, oracle=None,
                    budget=DEFAULT_SEARCH_BUDGET) -> Separation:
    """Separate g from K1 K2 K3, using the retraction onto K2 (which must preserve K1 and K3).

    The auxiliary quotient separating g from K1 rho(g) K3 is found by a budgeted search."""
    X = K2.X
    x = K2.x
    oracle = oracle or raag_word_oracle(X)
    G2 = K2.imitator_subgroup
    parts = [("subgroup", K1.generators()), ("subgroup", K2.generators()), ("subgroup", K3.generators())]
    for K in (K1, K3):
        _check_domain(K2, K.generators(), K.name)
        _check_invariant(K2, K, oracle)
    if not G2.contains(g):
        return _verify("triple", g, FiniteQuotient.from_subgroup(G2, "imitator"), parts,
                       {"route": "imitator-subgroup"})
    r = K2.rho(g)
    aux = [("subgroup", K1.generators()), ("element", r), ("subgroup", K3.generators())]
    probes = [g, (r.inverse() + g).reduced(), (g + r.inverse()).reduced()]
    tried = 0
    pool = []
    for q in _candidates(X, x, probes, [K1, K2, K3], oracle, budget):
        for cand in [q] + [q.product(p) for p in pool[:4]]:
            tried += 1
            if tried > budget:
                raise ResourceError(f"no auxiliary quotient found within {budget} candidates")
            try:
                if cand.evaluate(g) in _coset_image(cand, aux):
                    continue
            except ResourceError:
                continue
            t = product_quotient(cand, K2)
            return _first_separating("triple", g, parts, _pairing_candidates(G2, t, g, K2),
                                     {"route": "retraction-product", "candidates_tried": tried,
                                      "auxiliary": cand.name})
        pool.append(q)
    raise ResourceError(f"no auxiliary quotient found among {tried} candidates")


def separate_coset(g: Path, subgroups, oracle=None, budget=DEFAULT_SEARCH_BUDGET) -> Separation:
    if len(subgroups) == 1:
        return separate_subgroup(g, subgroups[0], oracle)
    if len(subgroups) == 2:
        return separate_double(g, subgroups[0], subgroups[1], oracle)
    if len(subgroups) == 3:
        return separate_triple(g, *subgroups, oracle=oracle, budget=budget)
    raise PreconditionError("coset needs one to three subgroups")
