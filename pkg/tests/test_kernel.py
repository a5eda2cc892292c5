import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cube_imitator import corpus, raag
from cube_imitator.errors import PreconditionError, StructuralError
from cube_imitator.kernel import (CombinatorialMap, SquareComplex, Subcomplex, analyze, carrier, check_map,
                                  complex_hyperplane_relation, hyperplane_index, hyperplanes, subdivide,
                                  wall_projection)
from cube_imitator.geometry import raag_word_oracle


@pytest.fixture
def T():
    return corpus.torus2x2()


@pytest.fixture
def R2():
    return corpus.r2()


def test_torus_is_directly_special(T):
    rep = analyze(T)
    assert (len(T.vertices), len(T.edges), len(T.squares)) == (4, 8, 4)
    assert rep.npc and rep.directly_special
    assert sorted(len(h.edges) for h in rep.hyperplanes) == [2, 2, 2, 2]
    assert all(h.two_sided for h in rep.hyperplanes)


def test_one_square_torus_fails_with_loop_witnesses():
    rep = analyze(corpus.one_square_torus())
    assert not rep.directly_special
    kinds = {f["kind"] for f in rep.failures}
    assert "edge-loop" in kinds and "loop-self-osculate" in kinds


def test_subdivided_rose(R2):
    rep = analyze(R2)
    assert sorted(len(h.edges) for h in rep.hyperplanes) == [1, 1, 1, 1]
    assert rep.directly_special


def test_malformed_square_is_structural():
    with pytest.raises(StructuralError) as err:
        SquareComplex(["u", "v"], {"e": ("u", "v"), "f": ("u", "v")},
                      {"s": (("e", 1), ("f", 1), ("e", -1), ("f", -1))})
    assert err.value.witness == {"square": "s"}


def test_mobius_band_hyperplane_is_one_sided():
    # a strip of two squares whose end rungs are glued with a half twist
    X = SquareComplex(["p0", "p1", "q0", "q1"],
                      {"t0": ("p0", "p1"), "t1": ("p1", "q0"), "b0": ("q0", "q1"), "b1": ("q1", "p0"),
                       "r0": ("p0", "q0"), "r1": ("p1", "q1")},
                      {"s1": (("t0", 1), ("r1", 1), ("b0", -1), ("r0", -1)),
                       "s2": (("t1", 1), ("r0", -1), ("b1", -1), ("r1", -1))})
    rungs = [h for h in hyperplanes(X) if "r0" in h.edges][0]
    assert rungs.edges == {"r0", "r1"} and not rungs.two_sided
    assert not analyze(X).directly_special
    # whatever the co-orientation outcome, it must agree with exhaustive search
    bf = oracles.brute_classify(X.vertices, X.edges, X.squares)
    lib = {h.edges: h.two_sided for h in hyperplanes(X)}
    assert lib == bf["two_sided"]


def test_check_map_examples(T, R2):
    ident = CombinatorialMap(T, T, {v: v for v in T.vertices}, {e: (e, 1) for e in T.edges})
    assert check_map(ident).local_isometry
    assert check_map(corpus.torus_row(T, 0).inclusion()).local_isometry
    chk = check_map(corpus.fold_map(R2))
    assert not chk.local_isometry
    assert chk.witnesses[0]["kind"] == "dart-collision"


def test_missing_corner_is_not_local_isometry(T):
    # the 1-skeleton of T, mapped identically, misses every square corner
    Y = SquareComplex(T.vertices, T.edges)
    phi = CombinatorialMap(Y, T, {v: v for v in Y.vertices}, {e: (e, 1) for e in Y.edges})
    chk = check_map(phi)
    assert chk.combinatorial and not chk.local_isometry
    assert {w["kind"] for w in chk.witnesses} == {"missing-corner"}


def test_non_cellular_map_is_structural(R2):
    Y = SquareComplex(["p", "q"], {"f": ("p", "q")})
    with pytest.raises(StructuralError):
        CombinatorialMap(Y, R2, {"p": "x", "q": "x"}, {"f": ("a1", 1)})


def test_carriers(T, R2):
    hidx = hyperplane_index(T)
    for e in ("h00", "v00"):
        N = carrier(T, hidx[e])
        assert (len(N.vertices), len(N.edges), len(N.squares)) == (4, 6, 2)
    N = carrier(R2, hyperplane_index(R2)["a1"])
    assert N.vertices == {"x", "a1"} and N.edges == {"a1"} and not N.squares
    with pytest.raises(PreconditionError):
        carrier(T, 99)


def test_hyperplane_relation_examples(T):
    hidx = hyperplane_index(T)
    Yh = corpus.torus_row(T, 0).inclusion()
    rel = complex_hyperplane_relation(Yh, hidx["v00"])
    assert not rel["intersects"] and rel["osculations"] and not rel["inter_osculates"]
    rel = complex_hyperplane_relation(Yh, hidx["h00"])
    assert rel["intersects"] and not rel["osculations"]
    ident = Subcomplex.whole(T).inclusion()
    for h in hyperplanes(T):
        rel = complex_hyperplane_relation(ident, h.id)
        assert rel["intersects"] and not rel["osculations"]


def test_wall_projection_examples(T, R2):
    oracle = raag_word_oracle(T)
    Yh, Yv = corpus.torus_row(T, 0), corpus.torus_column(T, 0)
    wp = wall_projection(T, Yv, Yh, oracle)
    assert wp.subcomplex.vertices == Yh.vertices and not wp.subcomplex.edges and wp.trivial
    wp = wall_projection(T, Yh, Yh, oracle)
    assert wp.subcomplex.edges == Yh.edges and wp.trivial is False and wp.essential_loop is not None
    a, b = corpus.petal(R2, "a"), corpus.petal(R2, "b")
    wp = wall_projection(R2, a, b, raag_word_oracle(R2))
    assert wp.subcomplex.vertices == b.vertices and not wp.subcomplex.edges and wp.trivial


def test_subdivide_examples():
    T = subdivide(corpus.one_square_torus())
    assert (len(T.vertices), len(T.edges), len(T.squares)) == (4, 8, 4)
    assert analyze(T).directly_special
    R = subdivide(corpus.rose(2))
    assert (len(R.vertices), len(R.edges), len(R.squares)) == (3, 4, 0)
    P = subdivide(SquareComplex(["u", "v"], {"e": ("u", "v")}))
    assert (len(P.vertices), len(P.edges)) == (3, 2)


# property tests over random Salvetti complexes and tori


@st.composite
def salvetti_complexes(draw):
    n = draw(st.integers(1, 4))
    verts = "abcd"[:n]
    pairs = [(verts[i], verts[j]) for i in range(n) for j in range(i + 1, n)]
    edges = [p for p in pairs if draw(st.booleans())]
    S = raag.salvetti(raag.DefGraph(list(verts), edges))
    return subdivide(S) if draw(st.booleans()) else S


complexes = st.one_of(salvetti_complexes(),
                      st.tuples(st.integers(1, 4), st.integers(1, 4)).map(lambda mn: corpus.torus(*mn)))


@settings(max_examples=60, deadline=None)
@given(complexes)
def test_hyperplanes_partition_edges_like_transitive_closure(X):
    hyps = hyperplanes(X)
    seen = [e for h in hyps for e in h.edges]
    assert sorted(seen) == sorted(X.edges)
    bf = oracles.brute_classify(X.vertices, X.edges, X.squares)
    assert {h.edges for h in hyps} == bf["classes"]
    assert {h.edges: h.two_sided for h in hyps} == bf["two_sided"]


@settings(max_examples=40, deadline=None)
@given(complexes)
def test_carrier_dichotomy(X):
    rep = analyze(X)
    if not rep.directly_special:
        return
    touching = {frozenset(ev.hyperplanes) for ev in rep.events if ev.kind in ("intersect", "osculate")}
    for h1 in rep.hyperplanes:
        for h2 in rep.hyperplanes:
            if h1.id < h2.id:
                disjoint = not (carrier(X, h1.id).vertices & carrier(X, h2.id).vertices)
                assert disjoint == (frozenset((h1.id, h2.id)) not in touching)


@settings(max_examples=40, deadline=None)
@given(complexes)
def test_relation_consistency_with_carriers(X):
    rep = analyze(X)
    if not rep.directly_special:
        return
    kinds = {}
    for ev in rep.events:
        if ev.kind in ("intersect", "osculate"):
            kinds.setdefault(frozenset(ev.hyperplanes), set()).add(ev.kind)
    for h1 in rep.hyperplanes:
        inc = carrier(X, h1.id).inclusion()
        for h2 in rep.hyperplanes:
            if h1.id == h2.id:
                continue
            rel = complex_hyperplane_relation(inc, h2.id)
            k = kinds.get(frozenset((h1.id, h2.id)), set())
            # crossing H1 means H2 meets the carrier of H1
            assert rel["intersects"] == ("intersect" in k)


@settings(max_examples=25, deadline=None)
@given(complexes)
def test_double_subdivision(X):
    Y = subdivide(subdivide(X))
    assert len(Y.squares) == 16 * len(X.squares)
    assert analyze(Y).npc == analyze(X).npc


@settings(max_examples=40, deadline=None)
@given(complexes)
def test_subdivision_counts(X):
    V, E, S = len(X.vertices), len(X.edges), len(X.squares)
    Y = subdivide(X)
    assert (len(Y.vertices), len(Y.edges), len(Y.squares)) == (V + E + S, 2 * E + 4 * S, 4 * S)
