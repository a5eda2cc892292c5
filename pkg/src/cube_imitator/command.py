"""Commanding certificates: prescribing element orders and subgroup intersections in finite quotients."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm, prod

from . import perms, raag
from .corpus import cycle_immersion
from .covers import (CoveringMap, SubgroupRep, elevations, intersect_subgroups, lift_path, pi1_basis,
                     regular_rep, same_subgroup)
from .errors import PreconditionError, PropertyViolation
from .geometry import raag_word_oracle
from .imitator import embed_all, imitator_for
from .kernel import CombinatorialMap, Path, require_local_isometry, wall_projection
from .lattice import LatticeSubgroup, integer_kernel
from .separability import FiniteQuotient, induced_quotient


class IndependenceFailure(PropertyViolation):
    """The given elements or subgroups are not independent; the witness shows the dependence."""


def _fmt(path: Path):
    return [f"{'' if s > 0 else '-'}{e}" for e, s in path.steps]


# certificates


def order_report(images, N, r, strong):
    orders = [perms.order(p) for p in images]
    rows = [{"element": i, "order": o, "expected": N * ri, "ok": o == N * ri}
            for i, (o, ri) in enumerate(zip(orders, r))]
    out = {"orders": orders, "elements": rows, "orders_ok": all(x["ok"] for x in rows)}
    if strong:
        cyc = [set(perms.cyclic_subgroup(p)) for p in images]
        ident = perms.identity(len(images[0])) if images else ()
        bad = [[i, j] for i in range(len(cyc)) for j in range(i + 1, len(cyc)) if cyc[i] & cyc[j] != {ident}]
        out["strong_ok"] = not bad
        out["overlapping_pairs"] = bad
    out["ok"] = out["orders_ok"] and out.get("strong_ok", True)
    return out


@dataclass
class CommandCertificate:
    elements: list
    N: int
    r: list
    quotient: FiniteQuotient
    strong: bool = True
    data: dict = field(default_factory=dict)

    def images(self):
        return [self.quotient.evaluate(g) for g in self.elements]

    def to_json(self):
        rep = verify_certificate(self)
        return {"report": 1, "N": self.N, "r": list(self.r), "elements": [_fmt(g) for g in self.elements],
                "quotient": self.quotient.act_format(), "points": self.quotient.degree,
                "orders": rep["orders"], "strong": self.strong,
                "checks": {"orders": rep["orders_ok"], "strong": rep.get("strong_ok")}, **self.data}


def verify_certificate(cert: CommandCertificate) -> dict:
    return order_report(cert.images(), cert.N, cert.r, cert.strong)


# abelian commanding


@dataclass
class AbelianCommand:
    A_prime: LatticeSubgroup
    B: LatticeSubgroup
    C: LatticeSubgroup
    index: int
    checks: dict

    def to_json(self):
        return {"report": 1, "A_prime": self.A_prime.basis(), "B": self.B.basis(), "C": self.C.basis(),
                "index": self.index, "checks": self.checks, "ok": all(self.checks.values())}


def dependence(d, subgroups):
    """A nontrivial combination (a_i in A_i, sum a_i = 0), or None when the A_i are independent."""
    cols, owner = [], []
    for i, A in enumerate(subgroups):
        for g in A.basis():
            cols.append(g)
            owner.append(i)
    if not cols:
        return None
    rows = [[c[k] for c in cols] for k in range(d)]
    ker = integer_kernel(rows, len(cols))
    if not ker:
        return None
    v = ker[0]
    parts = [[0] * d for _ in subgroups]
    for coef, c, i in zip(v, cols, owner):
        for k in range(d):
            parts[i][k] += coef * c[k]
    return parts


def abelian_command(d, A, A_prime) -> AbelianCommand:
    """Finite-index A' < Z^d with A_i n A' = A'_i and (A'+A_i) n (A'+A_j) = A'."""
    if len(A) != len(A_prime):
        raise PreconditionError("need one finite-index sublattice per subgroup")
    for i, (Ai, Api) in enumerate(zip(A, A_prime)):
        if not Ai.contains_lattice(Api) or Api.rank != Ai.rank:
            raise PreconditionError(f"A'_{i} is not a finite-index sublattice of A_{i}", {"index": i})
    dep = dependence(d, A)
    if dep is not None:
        raise IndependenceFailure("subgroups are not linearly independent", {"combination": dep})
    B = LatticeSubgroup(d, [g for Ap in A_prime for g in Ap.gens])
    U, D, V = B.snf()
    r = B.rank
    # Z^d has basis f_k = columns of U^-1 with B = span(d_k f_k, k < r); take C = span(f_k, k >= r)
    from .lattice import unimodular_inverse
    Uinv = unimodular_inverse(U)
    C = LatticeSubgroup(d, [[Uinv[i][k] for i in range(d)] for k in range(r, d)])
    Ap = B + C
    Z = LatticeSubgroup.standard(d)
    index = Ap.index_in(Z)
    checks = {"finite_index": index is not None,
              "C_meets_B_trivially": B.intersection(C).rank == 0}
    for i, (Ai, Api) in enumerate(zip(A, A_prime)):
        checks[f"intersection_{i}"] = Ai.intersection(Ap) == Api
    for i in range(len(A)):
        for j in range(i + 1, len(A)):
            checks[f"strong_{i}_{j}"] = (Ap + A[i]).intersection(Ap + A[j]) == Ap
    if not all(checks.values()):
        raise PropertyViolation("abelian commanding verification failed", {"checks": checks})
    return AbelianCommand(Ap, B, C, index, checks)


# imitators in a finite cover


class CoverImitator:
    """Imitator of a based elevation inside a cover, driven by loops of the base complex."""

    def __init__(self, mu: CoveringMap, phi: CombinatorialMap, y):
        self.mu, self.phi, self.y = mu, phi, y
        els = elevations(phi, mu, basepoint=(y, mu.base))
        if not els:
            raise PreconditionError("no based elevation")
        self.elevation = els[0]
        self.hat_y = (y, mu.base)
        self.im = imitator_for(self.elevation.to_cover)

    def subgroup(self) -> SubgroupRep:
        """Imitator subgroup as a subgroup of pi_1(X, x): stabiliser of (x-hat, y-hat)."""
        mu = self.mu
        X, x = mu.codomain, mu.x
        basis = pi1_basis(X, x)
        fiber = mu.fiber(x)
        Yv = list(self.elevation.complex.vertices)
        points = [(w, v) for w in fiber for v in Yv]
        index = {p: i for i, p in enumerate(points)}
        action = {}
        for g in basis.generators:
            steps = basis.generator_loop(g).steps
            img = []
            for w, v in points:
                lifted, w2 = mu.lift_steps(steps, w)
                _, v2 = self.im.run(lifted, v)
                img.append(index[(w2, v2)])
            action[g] = tuple(img)
        S, _ = SubgroupRep.from_action_orbit(X, x, action, index[(mu.base, self.hat_y)], basis)
        return S

    def rho_loop(self, h: Path) -> Path:
        """Imitator loop pushed down to the domain of phi; None when h leaves the imitator subgroup."""
        lifted = lift_path(self.mu, h, self.mu.base)
        if not lifted.is_loop:
            return None
        moves, end = self.im.run(lifted.steps, self.hat_y)
        if end != self.hat_y:
            return None
        steps = tuple(f for f in moves if f is not None)
        loop = self.elevation.complex.path(steps, self.hat_y) if steps else Path(self.hat_y)
        return self.elevation.to_base.path_image(loop)


def winding(loop: Path, edge="g0"):
    return sum(s for e, s in loop.steps if e == edge)


@dataclass
class TWPReport:
    ok: bool
    pairs_checked: int
    failure: dict | None = None

    def to_json(self):
        return {"report": 1, "ok": self.ok, "pairs_checked": self.pairs_checked, "failure": self.failure}


def verify_twp(mu: CoveringMap, phis, oracle=None) -> TWPReport:
    """Trivial wall projections between elevations of distinct maps (all translates)."""
    Xh = mu.domain
    oracle = oracle or raag_word_oracle(Xh)
    images = [[el.to_cover.image_subcomplex() for el in elevations(phi, mu)] for phi in phis]
    checked = 0
    for i in range(len(phis)):
        for j in range(len(phis)):
            if i == j:
                continue
            for a, Y1 in enumerate(images[i]):
                for b, Y2 in enumerate(images[j]):
                    checked += 1
                    wp = wall_projection(Xh, Y1, Y2, oracle)
                    if not wp.trivial:
                        return TWPReport(False, checked, {"from": [i, a], "to": [j, b],
                                                          "loop": _fmt(wp.essential_loop)})
    return TWPReport(True, checked)


@dataclass
class IndependentImitators:
    G_dot: SubgroupRep
    imitators: list
    checks: dict

    def rho(self, i, h: Path) -> int:
        loop = self.imitators[i].rho_loop(h)
        if loop is None:
            raise PreconditionError("element is outside the common imitator subgroup")
        return winding(loop)


def independent_imitators(mu: CoveringMap, phis, elements, oracle=None, twp=None) -> IndependentImitators:
    twp = twp or verify_twp(mu, phis, oracle)
    if not twp.ok:
        raise PropertyViolation("wall projections between elevations are not trivial", twp.failure)
    ims = [CoverImitator(mu, phi, "c0") for phi in phis]
    G_dot = regular_rep(intersect_subgroups([im.subgroup() for im in ims]))
    out = IndependentImitators(G_dot, ims, {"twp": True})
    trans = G_dot.transversal_loops()
    ok1 = ok2 = True
    for i, g in enumerate(elements):
        M = perms.order(G_dot.evaluate(g))
        if out.rho(i, g.power(M)) != M:
            ok1 = False
        for j, gj in enumerate(elements):
            if i == j:
                continue
            Mj = perms.order(G_dot.evaluate(gj))
            for t in trans.values():
                if out.rho(i, t + gj.power(Mj) + t.inverse()) != 0:
                    ok2 = False
    out.checks.update({"normal": G_dot.is_normal(), "identity_on_own": ok1, "kills_conjugates": ok2})
    if not (ok1 and ok2):
        raise PropertyViolation("imitator homomorphisms fail their defining properties", out.checks)
    return out


# assembly


class CyclicProductQuotient:
    """h -> (rho_i(h) mod m_i)_i as rotations of disjoint cycles."""

    def __init__(self, rhos, moduli):
        self.rhos, self.moduli = rhos, list(moduli)
        self.degree = sum(self.moduli)

    def values(self, h):
        return [rho(h) % m for rho, m in zip(self.rhos, self.moduli)]

    def evaluate(self, h):
        img = []
        off = 0
        for v, m in zip(self.values(h), self.moduli):
            img.extend(off + (j + v) % m for j in range(m))
            off += m
        return tuple(img)


def assemble(G_dot: SubgroupRep, t, elements, conjugates=None, strong=True):
    """Finite quotient of G from a quotient t of the normal subgroup G_dot (normal core of ker t).

    Returns (quotient, report); the report compares each element order with
    M_i * lcm of the t-orders of its conjugate representatives when those are given."""
    if not G_dot.is_normal():
        raise PreconditionError("subgroup is not normal")
    Q = induced_quotient(G_dot, t)
    images = [Q.evaluate(g) for g in elements]
    orders = [perms.order(p) for p in images]
    report = {"orders": orders}
    if conjugates is not None:
        formula = []
        for g, hs in zip(elements, conjugates):
            M = perms.order(G_dot.evaluate(g))
            formula.append(M * lcm(*(perms.order(t.evaluate(h)) for h in hs)))
        report["formula_orders"] = formula
        report["formula_ok"] = formula == orders
        if formula != orders:
            raise PropertyViolation("element orders disagree with the assembly formula", report)
    if strong:
        cyc = [set(perms.cyclic_subgroup(p)) for p in images]
        ident = perms.identity(Q.degree)
        report["strong_ok"] = all(cyc[i] & cyc[j] == {ident}
                                  for i in range(len(cyc)) for j in range(i + 1, len(cyc)))
    return Q, report


# element commanding pipeline


def check_independent(X, elements, oracle=None):
    oracle = oracle or raag_word_oracle(X)
    words = [oracle.word(g) for g in elements]
    for i, w in enumerate(words):
        if not raag.reduce(oracle.graph, w):
            raise IndependenceFailure("element is trivial", {"element": i})
    ok, wit = raag.independence_test(oracle.graph, words)
    if not ok:
        raise IndependenceFailure("elements are not independent", wit)
    return True


def element_immersions(X, elements):
    phis = []
    for i, g in enumerate(elements):
        if not g.is_loop or not g.steps:
            raise PreconditionError("elements must be nonempty loops", {"element": i})
        phi = cycle_immersion(X, g.steps, name=f"P{i}")
        try:
            require_local_isometry(phi)
        except PropertyViolation as exc:
            raise PreconditionError(f"element {i} is not convex: its cycle is not locally convex",
                                    {"element": i, **(exc.witness or {})}) from exc
        phis.append(phi)
    return phis


def command_elements(X, elements, r, cover: CoveringMap | None = None, strong=True) -> CommandCertificate:
    if len(elements) != len(r) or not elements:
        raise PreconditionError("need one order multiplier per element")
    if any(ri <= 0 for ri in r):
        raise PreconditionError("order multipliers must be positive")
    x = elements[0].start
    oracle = raag_word_oracle(X)
    check_independent(X, elements, oracle)
    phis = element_immersions(X, elements)
    mu = cover if cover is not None else embed_all(phis, x).cover
    ind = independent_imitators(mu, phis, elements)
    G_dot = ind.G_dot
    trans = G_dot.transversal_loops()
    n = len(elements)
    M, A, K, B, Ndot, conj = [], [], [], [], [], []
    for i, g in enumerate(elements):
        Mi = perms.order(G_dot.evaluate(g))
        h = g.power(Mi)
        hs = [t + h + t.inverse() for _, t in sorted(trans.items())]
        Ai = [ind.rho(i, hk) for hk in hs]
        Ki = [k for k, a in enumerate(Ai) if a]
        Bi = abs(prod(Ai[k] for k in Ki))
        M.append(Mi)
        A.append(Ai)
        K.append(Ki)
        B.append(Bi)
        Ndot.append({k: Bi // abs(Ai[k]) for k in Ki})
        conj.append([hs[k] for k in Ki])
    N = prod(M) * prod(v for Nd in Ndot for v in Nd.values())
    rdot = [N * r[i] // (M[i] * lcm(*Ndot[i].values())) for i in range(n)]
    moduli = [B[i] * rdot[i] for i in range(n)]
    t = CyclicProductQuotient([lambda h, i=i: ind.rho(i, h) for i in range(n)], moduli)
    Q, report = assemble(G_dot, t, elements, conj, strong)
    data = {"M": M, "A": A, "K": K, "B": B, "N_dot": [list(Nd.values()) for Nd in Ndot], "r_dot": rdot,
            "G_dot_index": G_dot.index, "cover_degree": mu.degree, "checks_imitators": ind.checks}
    cert = CommandCertificate(list(elements), N, list(r), Q, strong, data)
    rep = verify_certificate(cert)
    if not rep["ok"]:
        raise PropertyViolation("certificate failed verification", rep)
    return cert


# non-normal commanding


def pullback_subgroup(S: SubgroupRep, phi: CombinatorialMap, y) -> SubgroupRep:
    """phi_*^-1(S) as a subgroup of pi_1(Y, y)."""
    Y = phi.domain
    basis = pi1_basis(Y, y)
    action = {g: perms.evaluate_word(S.basis.expand(phi.path_image(basis.generator_loop(g))), S.action, S.degree)
              for g in basis.generators}
    rep, _ = SubgroupRep.from_action_orbit(Y, y, action, S.base, basis)
    return rep


@dataclass
class NonNormalCommand:
    G_prime: SubgroupRep
    P_dot: list
    checks: dict

    def to_json(self):
        return {"report": 1, "index": self.G_prime.index, "P_dot_index": [p.index for p in self.P_dot],
                "checks": self.checks, "ok": all(self.checks.values()), "act": self.G_prime.act_format()}


class _PrimeQuotient:
    def __init__(self, ims, P_primes):
        self.ims, self.P = ims, P_primes
        self.offsets = []
        off = 0
        for P in P_primes:
            self.offsets.append(off)
            off += P.degree
        self.degree = off

    def evaluate(self, h):
        img = []
        for im, P, off in zip(self.ims, self.P, self.offsets):
            loop = im.rho_loop(h)
            if loop is None:
                raise PreconditionError("element is outside the common imitator subgroup")
            img.extend(off + i for i in P.evaluate(loop))
        return tuple(img)


def nonnormal_command(phis, P_primes, cover: CoveringMap | None = None,
                      trivial_intersections_asserted=False) -> NonNormalCommand:
    """Finite-index G' < G with P_i n G' = P'_i, where P'_i are finite-index subgroups of pi_1(Y_i, y_i)."""
    if len(phis) != len(P_primes):
        raise PreconditionError("need one subgroup per map")
    X = phis[0].codomain
    ys = [P.x for P in P_primes]
    x = phis[0].vmap[ys[0]]
    for phi, y in zip(phis, ys):
        require_local_isometry(phi)
        if phi.vmap[y] != x:
            raise PreconditionError("maps must share the base vertex")
    if len(phis) > 1 and not trivial_intersections_asserted:
        if not all(len(pi1_basis(phi.domain, y).generators) == 1 for phi, y in zip(phis, ys)):
            raise PreconditionError("pairwise trivial intersection must be asserted for non-cyclic subgroups")
        loops = [phi.path_image(pi1_basis(phi.domain, y).generator_loop(pi1_basis(phi.domain, y).generators[0]))
                 for phi, y in zip(phis, ys)]
        check_independent(X, loops)
    mu = cover if cover is not None else embed_all(phis, x).cover
    ims = [CoverImitator(mu, phi, y) for phi, y in zip(phis, ys)]
    G_common = intersect_subgroups([im.subgroup() for im in ims])
    P_dot = [pullback_subgroup(G_common, phi, y) for phi, y in zip(phis, ys)]
    for i, (P, Pd) in enumerate(zip(P_primes, P_dot)):
        for s in P.schreier_generators():
            if not Pd.contains(s):
                raise PreconditionError(f"P'_{i} is not contained in the controllable subgroup",
                                        {"index": i, "loop": _fmt(s)})
    t = _PrimeQuotient(ims, P_primes)
    Q = induced_quotient(G_common, t, fixed_points=[off + P.base for off, P in zip(t.offsets, P_primes)])
    action = {g: Q.images[g] for g in Q.basis.generators}
    G_prime, _ = SubgroupRep.from_action_orbit(X, x, action, Q.base_point, Q.basis)
    checks = {}
    for i, (phi, y, P) in enumerate(zip(phis, ys, P_primes)):
        checks[f"intersection_{i}"] = same_subgroup(pullback_subgroup(G_prime, phi, y), P)
    if not all(checks.values()):
        raise PropertyViolation("non-normal commanding verification failed", checks)
    return NonNormalCommand(G_prime, P_dot, checks)
