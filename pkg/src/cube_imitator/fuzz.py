"""Random homotopic path pairs and the imitator endpoint fuzz built on them."""

from __future__ import annotations

import random

from .imitator import imitator_for
from .kernel import CombinatorialMap, Path, SquareComplex, skey


def _inv(t):
    return (t[0], -t[1])


def square_halves(X: SquareComplex):
    """(t1, t2) -> list of (u1, u2): the two ways round a square between opposite corners."""
    if "square_halves" not in X._cache:
        table = {}
        for s in sorted(X.squares, key=skey):
            bd = X.squares[s]
            for c in (bd, tuple(_inv(t) for t in reversed(bd))):
                for k in range(4):
                    half = (c[k], c[(k + 1) % 4])
                    other = (_inv(c[k - 1]), _inv(c[k - 2]))
                    table.setdefault(half, [])
                    if other not in table[half]:
                        table[half].append(other)
        X._cache["square_halves"] = table
    return X._cache["square_halves"]


def random_walk(X: SquareComplex, start, length, rng: random.Random) -> Path:
    steps, v = [], start
    for _ in range(length):
        opts = X.traversals_from[v]
        if not opts:
            break
        t = rng.choice(opts)
        steps.append(t)
        v = X.head(t)
    return Path(start, tuple(steps), v)


def random_move(X: SquareComplex, steps, rng: random.Random, max_len):
    """One elementary homotopy: insert/remove a backtrack or flip a square corner."""
    steps = list(steps)
    kinds = ["insert", "remove", "square"]
    rng.shuffle(kinds)
    halves = square_halves(X)
    for kind in kinds:
        if kind == "insert" and len(steps) + 2 <= max_len:
            k = rng.randrange(len(steps) + 1)
            v = X.tail(steps[k]) if k < len(steps) else (X.head(steps[-1]) if steps else None)
            if v is None:
                continue
            t = rng.choice(X.traversals_from[v])
            return steps[:k] + [t, _inv(t)] + steps[k:]
        if kind == "remove":
            spots = [k for k in range(len(steps) - 1) if steps[k + 1] == _inv(steps[k])]
            if spots:
                k = rng.choice(spots)
                return steps[:k] + steps[k + 2:]
        if kind == "square":
            spots = [k for k in range(len(steps) - 1) if (steps[k], steps[k + 1]) in halves]
            if spots:
                k = rng.choice(spots)
                other = rng.choice(halves[(steps[k], steps[k + 1])])
                return steps[:k] + list(other) + steps[k + 2:]
    return steps


def homotopic_pair(X: SquareComplex, rng: random.Random, max_len=10, max_moves=4):
    start = rng.choice(sorted(X.vertices, key=skey))
    p = random_walk(X, start, rng.randint(0, max_len), rng)
    steps = list(p.steps)
    for _ in range(rng.randint(1, max_moves)):
        steps = random_move(X, steps, rng, max_len)
    q = X.path(steps, start=start) if steps else Path(start)
    return p, q


def imitator_fuzz(phi: CombinatorialMap, trials=1000, seed=0, max_len=10, max_moves=4) -> dict:
    """Imitators fed homotopic walker paths must end at the same vertex, from every start."""
    X = phi.codomain
    im = imitator_for(phi)
    rng = random.Random(seed)
    failures = []
    for k in range(trials):
        p, q = homotopic_pair(X, rng, max_len, max_moves)
        for y in phi.domain.vertices:
            if im.run(p.steps, y)[1] != im.run(q.steps, y)[1]:
                failures.append({"trial": k, "start": str(y),
                                 "path1": [f"{'+' if s > 0 else '-'}{e}" for e, s in p.steps],
                                 "path2": [f"{'+' if s > 0 else '-'}{e}" for e, s in q.steps]})
                break
    return {"report": 1, "trials": trials, "seed": seed, "failures": failures[:10],
            "failure_count": len(failures), "ok": not failures}
