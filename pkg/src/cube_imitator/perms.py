"""Permutations as tuples of images, acting on the right: ``i * p = p[i]``."""

from math import lcm

from .errors import ResourceError
from .limits import pick


def identity(n):
    return tuple(range(n))


def compose(p, q):
    """First ``p`` then ``q`` (right action)."""
    return tuple(q[i] for i in p)


def inverse(p):
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def is_permutation(p, n=None):
    n = len(p) if n is None else n
    return len(p) == n and sorted(p) == list(range(n))


def cycles(p):
    seen = set()
    out = []
    for start in range(len(p)):
        if start in seen:
            continue
        cyc = []
        i = start
        while i not in seen:
            seen.add(i)
            cyc.append(i)
            i = p[i]
        out.append(tuple(cyc))
    return out


def order(p):
    return lcm(*(len(c) for c in cycles(p))) if p else 1


def power(p, k):
    n = len(p)
    if k < 0:
        p, k = inverse(p), -k
    result = identity(n)
    base = p
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def evaluate_word(word, images, n):
    """Evaluate a list of ``(generator, exponent)`` pairs."""
    result = identity(n)
    for gen, exp in word:
        p = images[gen]
        result = compose(result, p if exp > 0 else inverse(p))
    return result


def generate_group(gens, n, budget=None):
    """All elements of the group generated by ``gens`` (breadth-first)."""
    budget = pick(budget, "group")
    start = identity(n)
    seen = {start}
    frontier = [start]
    gens = list(gens)
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = compose(g, s)
                if h not in seen:
                    seen.add(h)
                    if len(seen) > budget:
                        raise ResourceError(f"group enumeration exceeded {budget} elements")
                    nxt.append(h)
        frontier = nxt
    return seen


def orbit(point, gens):
    seen = {point}
    stack = [point]
    while stack:
        i = stack.pop()
        for g in gens:
            j = g[i]
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def cyclic_subgroup(p):
    out = []
    cur = identity(len(p))
    while True:
        out.append(cur)
        cur = compose(cur, p)
        if cur == out[0]:
            return out
