import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cases
from cube_imitator import corpus, formats, raag
from cube_imitator.errors import ParseError
from cube_imitator.kernel import subdivide

DATA = cases.DATA


@pytest.mark.parametrize("X", [corpus.torus2x2(), corpus.r2(), corpus.one_square_torus(), corpus.grid(3, 3),
                               corpus.theta(3), subdivide(corpus.torus2x2())], ids=lambda X: X.name)
def test_sqc_round_trip(X):
    text = formats.write_sqc(X)
    doc = formats.parse_sqc(text, X.name)
    assert formats.same_complex(doc.complex, X)
    assert formats.write_sqc(doc.complex) == text


def test_sqc_loops_and_walls_round_trip():
    doc = formats.load_sqc(DATA / "r2.sqc")
    assert doc.loops == {"a": (("a1", 1), ("a2", 1)), "b": (("b1", 1), ("b2", 1))}
    walls = [("0", ["a1"], "110"), ("1", ["a2"], "100")]
    text = formats.write_sqc(doc.complex, doc.loops, walls)
    again = formats.parse_sqc(text)
    assert again.loops == doc.loops
    assert again.walls == walls


def test_comments_and_blank_lines_ignored():
    text = "# header comment\n\nsqc 1  # trailing\nvertex v\n\nedge e v v # loop\n"
    X = formats.parse_sqc(text).complex
    assert X.edges == {"e": ("v", "v")}


@pytest.mark.parametrize("text,line", [
    ("", 0),
    ("sqc 2\n", 1),
    ("sqc 1\nvertex a\nvertex a\n", 3),
    ("sqc 1\nvertex a\nedge e a a\nedge e a a\n", 4),
    ("sqc 1\nvertex a\nedge e a a\nsquare s +e +e -e\n", 4),
    ("sqc 1\nvertex a\nbogus line\n", 3),
    ("sqc 1\nvertex +a\n", 2),
    ("sqc 1\nvertex a\nedge e a a\nloop l + \n", 4),
])
def test_sqc_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        formats.parse_sqc(text)
    assert err.value.witness == {"line": line}


def test_structural_problems_surface_as_parse_errors():
    with pytest.raises(ParseError) as err:
        formats.parse_sqc("sqc 1\nvertex a\nedge e a b\n")
    assert err.value.witness == {"edge": "e"}
    with pytest.raises(ParseError):
        formats.parse_sqc("sqc 1\nvertex a\nvertex b\nedge e a b\nloop l +e\n")


def test_map_round_trip():
    phi = formats.load_map(DATA / "torus-row0.map")
    assert phi.vmap == {"00": "00", "10": "10"}
    text = formats.write_map(phi, "torus-row0.sqc", "torus2x2.sqc")
    again = formats.parse_map(text, DATA)
    assert again.vmap == phi.vmap and again.emap == phi.emap
    assert text == (DATA / "torus-row0.map").read_text()


def test_map_with_given_codomain_must_match():
    T = formats.load_sqc(DATA / "torus2x2.sqc").complex
    phi = formats.load_map(DATA / "torus-row0.map", codomain=T)
    assert phi.codomain is T
    with pytest.raises(ParseError):
        formats.load_map(DATA / "torus-row0.map", codomain=corpus.r2())


@pytest.mark.parametrize("text,line", [
    ("map 1\nfrom a-edge.sqc\nto r2.sqc\nv x => x\n", 4),
    ("map 1\nfrom a-edge.sqc\n", 0),
    ("map 1\nfrom a-edge.sqc\nto r2.sqc\nv x -> x\nv a1 -> a1\ne a1 -> +\n", 6),
])
def test_map_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        formats.parse_map(text, DATA)
    assert err.value.witness == {"line": line}


def test_non_cellular_map_file_is_parse_error():
    text = "map 1\nfrom a-edge.sqc\nto r2.sqc\nv x -> x\nv a1 -> x\ne a1 -> +a1\n"
    with pytest.raises(ParseError) as err:
        formats.parse_map(text, DATA)
    assert err.value.witness == {"edge": "a1"}


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        formats.load_sqc(tmp_path / "nope.sqc")


def test_act_format():
    act = formats.parse_act("act 1\ngen a: 1 0 2\ngen b: 0 1 2\n")
    assert act == {"a": (1, 0, 2), "b": (0, 1, 2)}
    with pytest.raises(ParseError) as err:
        formats.parse_act("act 1\ngen a: 0 0\n")
    assert err.value.witness == {"line": 2}
    with pytest.raises(ParseError):
        formats.parse_act("act 1\ngen a: 1 0\ngen b: 0 1 2\n")


def test_gra_format():
    G = formats.load_gra(DATA / "z2.gra")
    assert G.commute("a", "b")
    assert formats.parse_gra(G.to_text()).edges == G.edges
    with pytest.raises(ParseError) as err:
        formats.parse_gra("gra 1\ngen a\ncom a c\n")
    assert err.value.witness == {"line": 3}


def test_dot_colours_by_hyperplane():
    dot = formats.to_dot(corpus.torus2x2())
    assert dot.startswith('digraph "torus2x2" {')
    lines = [l for l in dot.splitlines() if "->" in l]
    assert len(lines) == 8
    # parallel edges share a colour
    colour = {l.split('label="')[1].split('"')[0]: l.split("color=")[1].split(",")[0] for l in lines}
    assert colour["h00"] == colour["h01"] and colour["v00"] == colour["v10"]


def test_dump_json_is_sorted_and_stable():
    text = formats.dump_json({"b": 1, "a": [1, 2]})
    assert json.loads(text) == {"a": [1, 2], "b": 1}
    assert text.index('"a"') < text.index('"b"')


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.booleans())
def test_random_torus_round_trip(m, n, sub):
    X = corpus.torus(m, n)
    if sub:
        X = subdivide(X)
    doc = formats.parse_sqc(formats.write_sqc(X))
    assert formats.same_complex(doc.complex, X)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from((1, -1))), max_size=10))
def test_word_text_round_trip(word):
    assert raag.parse_word(raag.format_word(word)) == word
