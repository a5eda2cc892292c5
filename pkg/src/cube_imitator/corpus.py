"""Small named complexes and maps used by tests, examples and the CLI."""

from string import ascii_lowercase

from .kernel import CombinatorialMap, SquareComplex, Subcomplex


def _ij(i, j):
    return f"{i}{j}" if i < 10 and j < 10 else f"{i}_{j}"


def one_square_torus():
    return SquareComplex(["x"], {"a": ("x", "x"), "b": ("x", "x")},
                         {"s": (("a", 1), ("b", 1), ("a", -1), ("b", -1))}, name="torus1")


def torus(m, n):
    """m x n square grid with opposite sides glued.

    Edge ``h{ij}`` runs from (i,j) to (i+1,j), ``v{ij}`` from (i,j) to (i,j+1).
    """
    verts = [_ij(i, j) for j in range(n) for i in range(m)]
    edges = {}
    squares = {}
    for j in range(n):
        for i in range(m):
            edges["h" + _ij(i, j)] = (_ij(i, j), _ij((i + 1) % m, j))
            edges["v" + _ij(i, j)] = (_ij(i, j), _ij(i, (j + 1) % n))
    for j in range(n):
        for i in range(m):
            squares["s" + _ij(i, j)] = (("h" + _ij(i, j), 1), ("v" + _ij((i + 1) % m, j), 1),
                                        ("h" + _ij(i, (j + 1) % n), -1), ("v" + _ij(i, j), -1))
    return SquareComplex(verts, edges, squares, name=f"torus{m}x{n}")


def torus2x2():
    return torus(2, 2)


def rose(k):
    return SquareComplex(["x"], {ascii_lowercase[i]: ("x", "x") for i in range(k)}, name=f"rose{k}")


def subdivided_rose(k):
    """Rose with each petal split in two: edges a1: x->a1, a2: a1->x, ..."""
    verts = ["x"]
    edges = {}
    for i in range(k):
        c = ascii_lowercase[i]
        verts.append(f"{c}1")
        edges[f"{c}1"] = ("x", f"{c}1")
        edges[f"{c}2"] = (f"{c}1", "x")
    return SquareComplex(verts, edges, name=f"R{k}")


def r2():
    return subdivided_rose(2)


def theta(k):
    """k paths of length two between vertices u and v."""
    verts = ["u", "v"] + [f"m{i}" for i in range(1, k + 1)]
    edges = {}
    for i in range(1, k + 1):
        edges[f"p{i}"] = ("u", f"m{i}")
        edges[f"q{i}"] = (f"m{i}", "v")
    return SquareComplex(verts, edges, name=f"theta{k}")


def grid(m, n):
    """Finite m x n vertex grid patch of the square tiling (CAT(0))."""
    verts = [_ij(i, j) for j in range(n) for i in range(m)]
    edges = {}
    squares = {}
    for j in range(n):
        for i in range(m):
            if i + 1 < m:
                edges["h" + _ij(i, j)] = (_ij(i, j), _ij(i + 1, j))
            if j + 1 < n:
                edges["v" + _ij(i, j)] = (_ij(i, j), _ij(i, j + 1))
    for j in range(n - 1):
        for i in range(m - 1):
            squares["s" + _ij(i, j)] = (("h" + _ij(i, j), 1), ("v" + _ij(i + 1, j), 1),
                                        ("h" + _ij(i, j + 1), -1), ("v" + _ij(i, j), -1))
    return SquareComplex(verts, edges, squares, name=f"grid{m}x{n}")


def tree(parent):
    """Tree from a parent list: vertex i > 0 hangs below parent[i]."""
    verts = [f"t{i}" for i in range(len(parent))]
    edges = {f"e{i}": (f"t{parent[i]}", f"t{i}") for i in range(1, len(parent))}
    return SquareComplex(verts, edges, name=f"tree{len(parent)}")


def path_graph(n):
    return tree([0] + list(range(n - 1)))


# standard subcomplexes and maps

def torus_row(X, j=0, m=2):
    return Subcomplex.from_edges(X, ["h" + _ij(i, j) for i in range(m)], name=f"Yh{j}")


def torus_column(X, i=0, n=2):
    return Subcomplex.from_edges(X, ["v" + _ij(i, j) for j in range(n)], name=f"Yv{i}")


def petal(X, c="a"):
    return Subcomplex.from_edges(X, [f"{c}1", f"{c}2"], name=f"{c}-circle")


def cycle_immersion(X, steps, name="cycle"):
    """The cycle graph of a closed path, mapped into X along the path."""
    p = X.path(steps)
    if not p.is_loop:
        raise ValueError("steps must form a loop")
    L = len(p.steps)
    verts = [f"c{i}" for i in range(L)]
    edges = {f"g{i}": (f"c{i}", f"c{(i + 1) % L}") for i in range(L)}
    Y = SquareComplex(verts, edges, name=name)
    xs = X.path_vertices(p)
    return CombinatorialMap(Y, X, {f"c{i}": xs[i] for i in range(L)},
                            {f"g{i}": p.steps[i] for i in range(L)}, name=name)


def double_wrap_petal(X, c="a"):
    return cycle_immersion(X, [(f"{c}1", 1), (f"{c}2", 1)] * 2, name=f"{c}-double")


def fold_map(X):
    """Non-immersion: the two edges of the a-petal of R2 folded onto a1 (from a 2-edge path)."""
    Y = SquareComplex(["p", "q", "r"], {"f": ("q", "p"), "g": ("q", "r")}, name="fold")
    return CombinatorialMap(Y, X, {"p": "a1", "q": "x", "r": "a1"}, {"f": ("a1", 1), "g": ("a1", 1)})
