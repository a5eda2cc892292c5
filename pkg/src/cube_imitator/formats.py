"""Text formats: square complexes (``sqc 1``), maps (``map 1``), coset actions
(``act 1``), defining graphs (``gra 1``), plus JSON and DOT emitters.

SQC files may also carry ``loop NAME +E ...`` lines naming closed paths and,
for developed balls, ``wall ID edges E ... sides BITS`` lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path as FilePath

from .errors import ParseError, StructuralError
from .kernel import CombinatorialMap, Path, SquareComplex, hyperplane_index, skey
from .raag import DefGraph


def _lines(text):
    """(line number, tokens) for each non-blank line with comments removed."""
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _header(lines, kind):
    try:
        no, toks = next(lines)
    except StopIteration:
        raise ParseError(f"empty {kind} file", {"line": 0}) from None
    if toks != [kind, "1"]:
        raise ParseError(f"expected header '{kind} 1'", {"line": no})


def _check_name(name, no):
    if name[0] in "+-":
        raise ParseError(f"name {name!r} may not start with a sign", {"line": no})
    return name


def parse_traversal(tok, no=0):
    sign = -1 if tok[0] == "-" else 1
    name = tok[1:] if tok[0] in "+-" else tok
    if not name:
        raise ParseError(f"bad traversal {tok!r}", {"line": no})
    return (name, sign)


def format_traversal(t):
    return f"{'+' if t[1] > 0 else '-'}{t[0]}"


# square complexes


@dataclass
class SqcDocument:
    complex: SquareComplex
    loops: dict = field(default_factory=dict)  # name -> tuple of traversals
    walls: list = field(default_factory=list)  # (id, edges, side bits)


def parse_sqc(text, name="") -> SqcDocument:
    lines = _lines(text)
    _header(lines, "sqc")
    vertices, edges, squares, loops, walls = [], {}, {}, {}, []
    seen = set()
    for no, toks in lines:
        kind, args = toks[0], toks[1:]
        if kind == "vertex" and len(args) == 1:
            v = _check_name(args[0], no)
            if v in seen:
                raise ParseError(f"duplicate vertex {v}", {"line": no})
            seen.add(v)
            vertices.append(v)
        elif kind == "edge" and len(args) == 3:
            e = _check_name(args[0], no)
            if e in edges:
                raise ParseError(f"duplicate edge {e}", {"line": no})
            edges[e] = (args[1], args[2])
        elif kind == "square" and len(args) == 5:
            if args[0] in squares:
                raise ParseError(f"duplicate square {args[0]}", {"line": no})
            squares[args[0]] = tuple(parse_traversal(t, no) for t in args[1:])
        elif kind == "loop" and len(args) >= 2:
            loops[_check_name(args[0], no)] = tuple(parse_traversal(t, no) for t in args[1:])
        elif kind == "wall" and len(args) >= 4 and args[1] == "edges" and "sides" in args:
            k = args.index("sides")
            if k != len(args) - 2:
                raise ParseError("wall line needs one side bit-vector", {"line": no})
            walls.append((args[0], args[2:k], args[-1]))
        else:
            raise ParseError(f"unrecognised line '{' '.join(toks)}'", {"line": no})
    try:
        X = SquareComplex(vertices, edges, squares, name=name)
        for lname, steps in loops.items():
            p = X.path(steps)
            if not p.is_loop:
                raise StructuralError(f"loop {lname} is not closed", {"loop": lname})
    except StructuralError as err:
        raise ParseError(str(err), err.witness) from err
    return SqcDocument(X, loops, walls)


def write_sqc(X: SquareComplex, loops=None, walls=None) -> str:
    out = ["sqc 1"]
    for v in X.vertices:
        out.append(f"vertex {_safe(v)}")
    for e in sorted(X.edges, key=skey):
        a, b = X.edges[e]
        out.append(f"edge {_safe(e)} {_safe(a)} {_safe(b)}")
    for s in sorted(X.squares, key=skey):
        out.append(f"square {_safe(s)} " + " ".join(format_traversal(t) for t in X.squares[s]))
    for name, steps in (loops or {}).items():
        out.append(f"loop {_safe(name)} " + " ".join(format_traversal(t) for t in steps))
    for wid, wedges, bits in walls or []:
        out.append(f"wall {wid} edges " + " ".join(map(str, wedges)) + f" sides {bits}")
    return "\n".join(out) + "\n"


def _safe(name):
    s = str(name)
    if not s or any(c.isspace() or c == "#" for c in s):
        raise StructuralError(f"name {s!r} cannot be written in a text format")
    return s


def region_walls(region):
    """Wall lines for a region: member edges and a side bit per vertex (in vertex order)."""
    D = region.complex
    out = []
    for w in region.walls:
        side = region.sides[w.id]
        out.append((w.id, sorted(map(str, w.edges)), "".join(str(side[v]) for v in D.vertices)))
    return out


def load_sqc(path) -> SqcDocument:
    path = FilePath(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}", {"file": str(path)}) from err
    return parse_sqc(text, name=path.stem)


# maps


def parse_map(text, base_dir=".", codomain: SquareComplex | None = None, domain: SquareComplex | None = None,
              name="") -> CombinatorialMap:
    """Parse a map file; ``from``/``to`` paths are relative to ``base_dir``.

    A given codomain (or domain) is used in place of loading the file; when the
    file is named too it must describe the same complex."""
    lines = _lines(text)
    _header(lines, "map")
    base_dir = FilePath(base_dir)
    files = {}
    vmap, emap = {}, {}
    for no, toks in lines:
        kind, args = toks[0], toks[1:]
        if kind in ("from", "to") and len(args) == 1:
            files[kind] = (no, base_dir / args[0])
        elif kind == "v" and len(args) == 3 and args[1] == "->":
            vmap[args[0]] = args[2]
        elif kind == "e" and len(args) == 3 and args[1] == "->":
            emap[args[0]] = parse_traversal(args[2], no)
        else:
            raise ParseError(f"unrecognised line '{' '.join(toks)}'", {"line": no})
    Y = _resolve(files.get("from"), domain, "from")
    X = _resolve(files.get("to"), codomain, "to")
    try:
        return CombinatorialMap(Y, X, vmap, emap, name=name)
    except StructuralError as err:
        raise ParseError(str(err), err.witness) from err


def _resolve(entry, given, kind):
    if entry is None:
        if given is None:
            raise ParseError(f"map file lacks a '{kind}' line", {"line": 0})
        return given
    no, path = entry
    loaded = load_sqc(path).complex
    if given is None:
        return loaded
    if not same_complex(loaded, given):
        raise ParseError(f"'{kind}' file differs from the complex given on the command line", {"line": no})
    return given


def same_complex(A: SquareComplex, B: SquareComplex) -> bool:
    return set(A.vertices) == set(B.vertices) and A.edges == B.edges and A.squares == B.squares


def load_map(path, codomain=None, domain=None) -> CombinatorialMap:
    path = FilePath(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}", {"file": str(path)}) from err
    return parse_map(text, path.parent, codomain, domain, name=path.stem)


def write_map(phi: CombinatorialMap, from_file=None, to_file=None) -> str:
    out = ["map 1"]
    if from_file:
        out.append(f"from {from_file}")
    if to_file:
        out.append(f"to {to_file}")
    for v in phi.domain.vertices:
        out.append(f"v {_safe(v)} -> {_safe(phi.vmap[v])}")
    for f in sorted(phi.domain.edges, key=skey):
        out.append(f"e {_safe(f)} -> {format_traversal(phi.emap[f])}")
    return "\n".join(out) + "\n"


# coset actions


def parse_act(text) -> dict:
    """Generator name -> tuple of point images."""
    lines = _lines(text)
    _header(lines, "act")
    out = {}
    degree = None
    for no, toks in lines:
        if toks[0] != "gen" or len(toks) < 2 or not toks[1].endswith(":"):
            raise ParseError(f"unrecognised line '{' '.join(toks)}'", {"line": no})
        try:
            img = tuple(int(t) for t in toks[2:])
        except ValueError:
            raise ParseError("point images must be integers", {"line": no}) from None
        if degree is None:
            degree = len(img)
        if len(img) != degree or sorted(img) != list(range(degree)):
            raise ParseError("generator image is not a permutation of the point set", {"line": no})
        out[toks[1][:-1]] = img
    return out


def load_act(path) -> dict:
    path = FilePath(path)
    try:
        return parse_act(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}", {"file": str(path)}) from err


# defining graphs


def parse_gra(text) -> DefGraph:
    lines = _lines(text)
    _header(lines, "gra")
    gens, coms = [], []
    for no, toks in lines:
        if toks[0] == "gen" and len(toks) == 2:
            gens.append(_check_name(toks[1], no))
        elif toks[0] == "com" and len(toks) == 3:
            coms.append((no, toks[1], toks[2]))
        else:
            raise ParseError(f"unrecognised line '{' '.join(toks)}'", {"line": no})
    for no, a, b in coms:
        if a not in gens or b not in gens or a == b:
            raise ParseError(f"bad commutation {a} {b}", {"line": no})
    return DefGraph(gens, [(a, b) for _, a, b in coms])


def load_gra(path) -> DefGraph:
    path = FilePath(path)
    try:
        return parse_gra(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}", {"file": str(path)}) from err


# emitters


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


PALETTE = ["red", "blue", "darkgreen", "orange", "purple", "brown", "deeppink", "teal", "gold", "gray"]


def to_dot(X: SquareComplex) -> str:
    """Directed 1-skeleton; edge colour encodes the hyperplane id."""
    hidx = hyperplane_index(X)
    out = [f"digraph {json.dumps(X.name or 'X')} {{"]
    for v in X.vertices:
        out.append(f"  {json.dumps(str(v))};")
    for e in sorted(X.edges, key=skey):
        a, b = X.edges[e]
        h = hidx[e]
        out.append(f"  {json.dumps(str(a))} -> {json.dumps(str(b))} "
                   f"[label={json.dumps(str(e))}, color={PALETTE[h % len(PALETTE)]}, hyperplane={h}];")
    out.append("}")
    return "\n".join(out) + "\n"


def path_tokens(p: Path):
    return [format_traversal(t) for t in p.steps]
