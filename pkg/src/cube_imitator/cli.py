"""Command-line front end.

Exit codes: 0 success, 1 property violated or hypothesis unmet (with witness),
2 usage or parse error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import fields, replace

from . import command as cmd
from . import formats, geometry, imitator, kernel, raag, separability
from .covers import SubgroupRep, pi1_basis
from .errors import CubeError, ParseError, PreconditionError, PropertyViolation, ResourceError, StructuralError
from .fuzz import imitator_fuzz
from .kernel import Path, skey
from .lattice import LatticeSubgroup
from .limits import limits

log = logging.getLogger("cube_imitator")


class Usage(CubeError):
    """Bad command-line values that argparse cannot catch."""


# argument helpers


class Context:
    """Loaded inputs shared by a subcommand."""

    def __init__(self, args):
        self.args = args
        self.doc = None

    def complex(self, path=None):
        self.doc = formats.load_sqc(path or self.args.complex)
        log.info("loaded %r", self.doc.complex)
        return self.doc.complex

    def map(self, path, X=None):
        phi = formats.load_map(path, codomain=X)
        log.info("loaded map %s: %r -> %r", phi.name, phi.domain, phi.codomain)
        return phi


def parse_path(X, text, loops=None, start=None) -> Path:
    """Signed tokens naming edges, named loops, or petals (``a`` for ``a1 a2 ...``)."""
    loops = loops or {}
    steps = []
    for tok in text.replace(",", " ").split():
        name, sign = formats.parse_traversal(tok)
        if name in X.edges:
            part = ((name, 1),)
        elif name in loops:
            part = loops[name]
        else:
            part = _petal(X, name)
        steps.extend(part if sign > 0 else kernel.reverse_steps(part))
    if not steps:
        if start is None:
            raise Usage("an empty path needs --start")
        return X.path((), start=start)
    try:
        return X.path(steps)
    except StructuralError as err:
        raise Usage(f"path {text!r} is not an edge path: {err}", err.witness) from err


def _petal(X, name):
    steps = []
    k = 1
    while f"{name}{k}" in X.edges:
        steps.append((f"{name}{k}", 1))
        k += 1
    if not steps:
        raise Usage(f"{name!r} names no edge, loop or petal", {"token": name})
    p = X.path(steps)
    if not p.is_loop:
        raise Usage(f"petal {name!r} is not closed", {"token": name})
    return tuple(steps)


def _ints(text):
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise Usage(f"expected integers, got {text!r}") from None


def _vectors(text):
    """Semicolon-separated integer vectors."""
    return [_ints(part) for part in text.split(";") if part.strip()]


def _domain_vertex(phi, wanted=None, over=None):
    """A domain vertex by name, or the first one over an X vertex."""
    Y = phi.domain
    if wanted is not None:
        if wanted in Y.vertex_set:
            return wanted
        over = wanted
    hits = sorted((y for y in Y.vertices if phi.vmap[y] == over), key=skey)
    if not hits:
        raise Usage(f"no vertex of {phi.name or 'the domain'} lies over {over}", {"vertex": str(over)})
    return hits[0]


def _embedded_subcomplex(phi):
    if not phi.is_embedding():
        raise PreconditionError(f"map {phi.name} is not an embedding", {"map": phi.name})
    sub = phi.image_subcomplex()
    sub.name = phi.name
    return sub


def _loops_json(p):
    return formats.path_tokens(p)


# subcommands


def do_analyze(ctx):
    return kernel.analyze(ctx.complex()).to_json()


def do_checkmap(ctx):
    phi = ctx.map(ctx.args.map)
    rep = kernel.check_map(phi)
    return rep.to_json(), 0 if rep.combinatorial and rep.local_isometry else 1


def do_subdivide(ctx):
    return formats.write_sqc(kernel.subdivide(ctx.complex()))


def do_wproj(ctx):
    X = ctx.complex()
    Y1 = _embedded_subcomplex(ctx.map(ctx.args.y1, X))
    Y2 = _embedded_subcomplex(ctx.map(ctx.args.y2, X))
    oracle = geometry.raag_word_oracle(X) if kernel.analyze(X).directly_special else None
    return kernel.wall_projection(X, Y1, Y2, oracle).to_json()


def do_complete(ctx):
    phi = ctx.map(ctx.args.map)
    kernel.require_local_isometry(phi)
    y = phi.domain.vertices[0] if ctx.args.base is None else _domain_vertex(phi, ctx.args.base)
    cc = imitator.canonical_completion(phi)
    checks = imitator.completion_checks(cc, y)
    if ctx.args.sqc_out:
        mu, _ = cc.based_component(y)
        with open(ctx.args.sqc_out, "w", encoding="utf-8") as fh:
            fh.write(formats.write_sqc(mu.domain))
    ok = all(checks.values())
    return {"report": 1, "degree": cc.cover.degree, "vertices": len(cc.complex.vertices),
            "base": str(y), "checks": checks, "ok": ok}, 0 if ok else 1


def do_imitate(ctx):
    X = ctx.complex()
    phi = ctx.map(ctx.args.sub, X)
    walker = parse_path(X, ctx.args.path, ctx.doc.loops, ctx.args.walker_start)
    y = _domain_vertex(phi, ctx.args.start, walker.start)
    tr = imitator.imitate(phi, walker, y)
    return "\n".join(tr.lines() + [f"end: {tr.end}"]) + "\n"


def do_embed_all(ctx):
    X = ctx.complex()
    phis = [ctx.map(m, X) for m in ctx.args.maps]
    res = imitator.embed_all(phis, ctx.args.base, force=ctx.args.force)
    return res.to_json(), 0 if not res.failures else 1


def do_hier_cover(ctx):
    X = ctx.complex()
    Ys = [_embedded_subcomplex(ctx.map(m, X)) for m in ctx.args.subs]
    hc = imitator.hier_cover(X, Ys, ctx.args.base)
    rep = hc.to_json()
    return rep, 0 if rep["ok"] else 1


def _ball_text(D):
    return formats.write_sqc(D.complex, walls=formats.region_walls(D))


def do_develop(ctx):
    X = ctx.complex()
    D = geometry.develop_ball(X, ctx.args.base, ctx.args.radius)
    return _ball_text(D)


def do_hull(ctx):
    X = ctx.complex()
    p = parse_path(X, ctx.args.path, ctx.doc.loops, ctx.args.start)
    D, lifted = geometry.develop_hull(X, p)
    if ctx.args.json:
        return {"report": 1, "vertices": len(D.complex.vertices), "edges": len(D.complex.edges),
                "squares": len(D.complex.squares), "lifted_path": _loops_json(lifted),
                "walls": len(D.walls)}
    return _ball_text(D)


def _region(ctx):
    X = ctx.complex()
    rep = kernel.analyze(X)
    if not rep.npc:
        raise PreconditionError("region is not nonpositively curved", {"witnesses": rep.npc_witnesses[:1]})
    if not X.is_connected():
        raise PreconditionError("region is not connected")
    R = geometry.Region(X)
    R.sides  # every wall must split the region in two
    return X, R


def do_gate(ctx):
    X, R = _region(ctx)
    Y = _embedded_subcomplex(ctx.map(ctx.args.sub, X))
    if ctx.args.bridge:
        Y2 = _embedded_subcomplex(ctx.map(ctx.args.bridge, X))
        rep = geometry.bridge_check(R, Y, Y2)
        return rep, 0 if rep["ok"] else 1
    if ctx.args.vertex is None:
        raise Usage("gate needs --vertex or --bridge")
    if ctx.args.vertex not in X.vertex_set:
        raise Usage(f"unknown vertex {ctx.args.vertex}", {"vertex": ctx.args.vertex})
    g = geometry.gate(R, Y, ctx.args.vertex)
    return {"report": 1, "vertex": ctx.args.vertex, "gate": str(g), "distance": R.distance(ctx.args.vertex, g)}


def do_dinf(ctx):
    a = ctx.args
    if a.frontier is None:
        if a.source is None or a.target is None:
            raise Usage("dinf needs --from and --to, or --frontier L")
        X, R = _region(ctx)
        for v in (a.source, a.target):
            if v not in X.vertex_set:
                raise Usage(f"unknown vertex {v}", {"vertex": v})
        chain = R.disjoint_chain(a.source, R.separating(a.source, a.target))
        return {"report": 1, "from": a.source, "to": a.target, "dinf": len(chain),
                "combinatorial": R.distance(a.source, a.target), "disjoint_walls": chain}
    X = ctx.complex()
    L = a.frontier
    radius = geometry.Region(X).dimension * (L + 2)
    D = geometry.develop_ball(X, a.base, radius)
    fr = geometry.dinf_frontier(D, D.base, L)
    verified = all(geometry.verify_certificate_walls(D, D.base, h, c) for h, c in fr.certificates.items())
    return {"report": 1, "L": L, "radius": radius, "ball_vertices": len(D.complex.vertices),
            "W_vertices": len(fr.W.vertices), "boundary_walls": fr.boundary_walls,
            "certificates": {str(h): c for h, c in fr.certificates.items()}, "verified": verified}, \
        0 if verified else 1


def _gra(ctx):
    return formats.load_gra(ctx.args.graph)


def _word(G, text):
    return G.check(raag.parse_word(text))


def do_raag(ctx):
    a = ctx.args
    G = _gra(ctx)
    if a.op == "salvetti":
        return formats.write_sqc(raag.salvetti(G))
    if a.op == "reduce":
        return raag.format_word(raag.reduce(G, _word(G, a.words[0]))) + "\n"
    if a.op == "conj":
        if len(a.words) != 2:
            raise Usage("conj needs two words")
        w1, w2 = (_word(G, w) for w in a.words)
        return {"report": 1, "conjugate": raag.conjugacy_test(G, w1, w2),
                "cyclic_normal_forms": [raag.format_word(raag.cyc_reduce(G, w)) for w in (w1, w2)]}
    words = [_word(G, w) for w in a.words]
    if a.op == "indep":
        ok, wit = raag.independence_test(G, words)
        return {"report": 1, "independent": ok, "witness": wit}
    if a.op == "convex":
        return {"report": 1, **raag.convexity_test(G, words[0])}
    return {"report": 1, **raag.command_conditions(G, words)}


def do_rf_witness(ctx):
    X = ctx.complex()
    g = parse_path(X, ctx.args.loop, ctx.doc.loops)
    return separability.rf_witness(X, g).to_json()


def do_separate(ctx):
    a = ctx.args
    X = ctx.complex()
    g = parse_path(X, a.element, ctx.doc.loops)
    if not g.is_loop:
        raise Usage("element must be a closed path")
    ys = a.y or []
    Ks = []
    for k, m in enumerate(a.subs):
        phi = ctx.map(m, X)
        y = _domain_vertex(phi, ys[k] if k < len(ys) else None, g.start)
        Ks.append(separability.ConvexSubgroup(phi, y, name=phi.name))
    return separability.separate_coset(g, Ks, budget=a.budget_search).to_json()


def do_command(ctx):
    a = ctx.args
    if a.op == "abelian":
        A = [LatticeSubgroup(len(v[0]), v) for v in map(_vectors, a.A)]
        Ap = [LatticeSubgroup(len(v[0]), v) for v in map(_vectors, a.Aprime)]
        dims = {L.d for L in A + Ap}
        if len(dims) != 1:
            raise Usage("all vectors must have the same length")
        return cmd.abelian_command(dims.pop(), A, Ap).to_json()
    X = ctx.complex()
    if a.op == "elements":
        els = [parse_path(X, t, ctx.doc.loops) for t in a.els.split(",")]
        r = _ints(a.r)
        return cmd.command_elements(X, els, r, strong=not a.weak).to_json()
    phis = [ctx.map(m, X) for m in a.maps]
    ys = a.y or []
    P = []
    x = phis[0].vmap[_domain_vertex(phis[0], ys[0]) if ys else phis[0].domain.vertices[0]]
    for k, phi in enumerate(phis):
        y = _domain_vertex(phi, ys[k] if k < len(ys) else None, x)
        if a.act:
            P.append(SubgroupRep(phi.domain, y, formats.load_act(a.act[k]), 0))
        elif a.index:
            P.append(_cyclic_index(phi.domain, y, _ints(a.index)[k]))
        else:
            raise Usage("nonnormal needs --act files or --index values")
    if len(P) != len(phis):
        raise Usage("need one subgroup per map")
    nn = cmd.nonnormal_command(phis, P, trivial_intersections_asserted=a.assert_trivial_intersections)
    return nn.to_json()


def _cyclic_index(Y, y, k):
    """Index-k subgroup of a circle's fundamental group (Z -> Z/k)."""
    basis = pi1_basis(Y, y)
    if len(basis.generators) != 1:
        raise Usage("--index only applies to maps from a circle; use --act", {"generators": basis.generators})
    if k < 1:
        raise Usage("index must be positive")
    g = basis.generators[0]
    return SubgroupRep(Y, y, {g: tuple((i + 1) % k for i in range(k))}, 0, basis)


def do_dot(ctx):
    return formats.to_dot(ctx.complex())


def do_fuzz(ctx):
    a = ctx.args
    phi = ctx.map(a.map)
    kernel.require_local_isometry(phi)
    kernel.require_directly_special(phi.codomain)
    if a.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        chunks = _split(a.trials, a.jobs)
        with ProcessPoolExecutor(a.jobs) as pool:
            parts = list(pool.map(imitator_fuzz, [phi] * len(chunks), chunks,
                                  [a.seed * 1000 + k for k in range(len(chunks))]))
        fails = [f for p in parts for f in p["failures"]]
        count = sum(p["failure_count"] for p in parts)
        rep = {"report": 1, "trials": a.trials, "seed": a.seed, "failures": fails[:10],
               "failure_count": count, "ok": count == 0}
    else:
        rep = imitator_fuzz(phi, a.trials, a.seed)
    return rep, 0 if rep["ok"] else 1


def _split(n, k):
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k) if base + (1 if i < extra else 0)]


# parser


def build_parser():
    p = argparse.ArgumentParser(prog="cube-imitator", description="Walker/imitator tools for special square complexes.")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--budget-vertices", type=int, help="cap on cover states and developed vertices")
    p.add_argument("--budget-orbit", type=int, help="cap on permutation groups and RAAG orbits")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch checks")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("analyze", do_analyze, "links, hyperplanes, osculation and direct specialness")
    sp.add_argument("complex")
    sp = add("checkmap", do_checkmap, "check that a map is combinatorial and a local isometry")
    sp.add_argument("map")
    sp = add("subdivide", do_subdivide, "cubical subdivision")
    sp.add_argument("complex")
    sp = add("wproj", do_wproj, "wall projection of one subcomplex onto another")
    sp.add_argument("complex")
    sp.add_argument("--y1", required=True)
    sp.add_argument("--y2", required=True)
    sp = add("complete", do_complete, "canonical completion and its identities")
    sp.add_argument("map")
    sp.add_argument("--base")
    sp.add_argument("--sqc-out", help="write the based component here")
    sp = add("imitate", do_imitate, "walker/imitator transcript")
    sp.add_argument("complex")
    sp.add_argument("--sub", required=True, help="map file of the local isometry")
    sp.add_argument("--path", required=True)
    sp.add_argument("--start", help="imitator start (domain vertex, or a vertex of X it lies over)")
    sp.add_argument("--walker-start", help="walker start for an empty path")
    sp = add("embed-all", do_embed_all, "finite cover in which every elevation embeds")
    sp.add_argument("complex")
    sp.add_argument("--maps", nargs="+", required=True)
    sp.add_argument("--base")
    sp.add_argument("--force", action="store_true", help="build the cover even when the identity already works")
    sp = add("hier-cover", do_hier_cover, "hierarchy-of-imitators cover")
    sp.add_argument("complex")
    sp.add_argument("--subs", nargs="+", required=True, help="embedding map files")
    sp.add_argument("--base", required=True)
    sp = add("develop", do_develop, "develop a ball of the universal cover")
    sp.add_argument("complex")
    sp.add_argument("--base", required=True)
    sp.add_argument("--radius", type=int, required=True)
    sp = add("hull", do_hull, "convex hull of a lifted path")
    sp.add_argument("complex")
    sp.add_argument("--path", required=True)
    sp.add_argument("--start")
    sp.add_argument("--json", action="store_true")
    sp = add("gate", do_gate, "gate projection or bridge check in a CAT(0) region")
    sp.add_argument("complex")
    sp.add_argument("--sub", required=True)
    sp.add_argument("--vertex")
    sp.add_argument("--bridge", help="second subcomplex for a bridge check")
    sp = add("dinf", do_dinf, "d-infinity distance or frontier certificates")
    sp.add_argument("complex")
    sp.add_argument("--from", dest="source")
    sp.add_argument("--to", dest="target")
    sp.add_argument("--frontier", type=int, metavar="L")
    sp.add_argument("--base")
    sp = add("raag", do_raag, "right-angled Artin group words")
    sp.add_argument("op", choices=["reduce", "conj", "indep", "convex", "conditions", "salvetti"])
    sp.add_argument("graph")
    sp.add_argument("words", nargs="*")
    sp = add("rf-witness", do_rf_witness, "finite quotient in which a loop survives")
    sp.add_argument("complex")
    sp.add_argument("--loop", required=True)
    sp = add("separate", do_separate, "separate an element from a product of convex subgroups")
    sp.add_argument("complex")
    sp.add_argument("--element", required=True)
    sp.add_argument("--subs", nargs="+", required=True, help="one to three local isometry map files")
    sp.add_argument("--y", nargs="+", help="base vertices in the map domains")
    sp.add_argument("--budget-search", type=int, default=separability.DEFAULT_SEARCH_BUDGET)
    sp = add("command", do_command, "commanding certificates")
    sp.add_argument("op", choices=["abelian", "nonnormal", "elements"])
    sp.add_argument("complex", nargs="?")
    sp.add_argument("--A", action="append", default=[], help="subgroup generators, e.g. '1,0;0,1'")
    sp.add_argument("--Aprime", action="append", default=[])
    sp.add_argument("--els")
    sp.add_argument("--r")
    sp.add_argument("--weak", action="store_true", help="skip the pairwise-trivial-intersection clause")
    sp.add_argument("--maps", nargs="+", default=[])
    sp.add_argument("--y", nargs="+")
    sp.add_argument("--act", nargs="+")
    sp.add_argument("--index")
    sp.add_argument("--assert-trivial-intersections", action="store_true")
    sp = add("dot", do_dot, "Graphviz DOT of the 1-skeleton")
    sp.add_argument("complex")
    sp = add("fuzz", do_fuzz, "imitator endpoints along random homotopic paths")
    sp.add_argument("map")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    return p


def _validate(args):
    if args.cmd == "dinf" and args.frontier is not None and args.base is None:
        raise Usage("--frontier needs --base")
    if args.cmd == "command":
        if args.op == "abelian" and (not args.A or len(args.A) != len(args.Aprime)):
            raise Usage("abelian needs matching --A and --Aprime lists")
        if args.op != "abelian" and not args.complex:
            raise Usage(f"{args.op} needs a complex file")
        if args.op == "elements" and (not args.els or not args.r):
            raise Usage("elements needs --els and --r")
    if args.cmd == "raag" and args.op not in ("salvetti",) and not args.words:
        raise Usage(f"{args.op} needs at least one word")


def _emit(result, out):
    text = result if isinstance(result, str) else formats.dump_json(result)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_report(kind, err):
    return {"report": 1, "error": kind, "message": str(err), "witness": err.witness}


def main(argv=None):
    level = os.environ.get("CUBE_IMITATOR_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    saved = replace(limits)
    try:
        return _run(args)
    finally:
        for f in fields(limits):
            setattr(limits, f.name, getattr(saved, f.name))


def _run(args):
    if args.budget_vertices is not None:
        limits.vertices = limits.ball = args.budget_vertices
    if args.budget_orbit is not None:
        limits.group = limits.orbit = args.budget_orbit
    ctx = Context(args)
    code = 0
    try:
        _validate(args)
        result = args.fn(ctx)
        if isinstance(result, tuple):
            result, code = result
    except (Usage, ParseError, StructuralError) as err:
        _emit(_error_report("usage" if isinstance(err, Usage) else "parse", err), None)
        print(f"cube-imitator: {err}", file=sys.stderr)
        return 2
    except ResourceError as err:
        _emit(_error_report("resource", err), None)
        print(f"cube-imitator: {err}", file=sys.stderr)
        return 3
    except (PreconditionError, PropertyViolation) as err:
        kind = "precondition" if isinstance(err, PreconditionError) else "property"
        _emit(_error_report(kind, err), None)
        print(f"cube-imitator: {err}", file=sys.stderr)
        return 1
    _emit(result, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
