"""Exact integer lattice arithmetic: Smith normal form with transforms, kernels,
membership, sums, intersections and indices of sublattices of Z^d."""

from __future__ import annotations

from math import prod

from .errors import PreconditionError


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _copy(A):
    return [list(r) for r in A]


def smith(A, nrows=None, ncols=None):
    """Return (U, D, V) with U A V = D diagonal, U and V unimodular, d_i | d_{i+1}, d_i >= 0."""
    m = len(A) if nrows is None else nrows
    n = (len(A[0]) if A else 0) if ncols is None else ncols
    D = _copy(A) if A else [[0] * n for _ in range(m)]
    U, V = _identity(m), _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for r in M:
                r[i], r[j] = r[j], r[i]

    def add_row(src, dst, k):  # row dst += k * row src
        D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, k):
        for M in (D, V):
            for r in M:
                r[dst] += k * r[src]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(t, i, -(D[i][t] // p))
                    if D[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(t, j, -(D[t][j] // p))
                    if D[t][j]:
                        dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p), None)
                if bad is None:
                    break
                add_row(bad[0], t, 1)
                continue
            nz = [(abs(D[i][t]), i, t) for i in range(t, m) if D[i][t]] + \
                 [(abs(D[t][j]), t, j) for j in range(t, n) if D[t][j]]
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
        if D[t][t] < 0:
            negate_row(t)
        t += 1
    return U, D, V


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def matvec(A, v):
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def columns(M):
    return [list(c) for c in zip(*M)] if M and M[0] else []


def from_columns(cols, d):
    return [[c[i] for c in cols] for i in range(d)] if cols else [[] for _ in range(d)]


def rank_and_diagonal(A, nrows, ncols):
    _, D, _ = smith(A, nrows, ncols)
    diag = [D[i][i] for i in range(min(nrows, ncols)) if D[i][i]]
    return len(diag), diag


def integer_kernel(rows, n):
    """Z-basis of {v in Z^n : rows . v = 0}."""
    m = len(rows)
    if m == 0:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    U, D, V = smith(rows, m, n)
    r = sum(1 for i in range(min(m, n)) if D[i][i])
    return [[V[i][j] for i in range(n)] for j in range(r, n)]


def unimodular_inverse(U):
    n = len(U)
    # adjugate-free inverse through SNF of an already unimodular matrix
    P, D, Q = smith(U, n, n)
    if any(abs(D[i][i]) != 1 for i in range(n)):
        raise PreconditionError("matrix is not unimodular")
    Dinv = [[D[i][j] for j in range(n)] for i in range(n)]
    return matmul(matmul(Q, Dinv), P)


def hermite_rows(rows):
    """Row-style Hermite normal form: echelon rows, positive pivots, entries above pivots reduced."""
    H = [list(r) for r in rows if any(r)]
    if not H:
        return []
    n = len(H[0])
    out = []
    col = 0
    while H and col < n:
        nz = [r for r in H if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            for r in nz[1:]:
                q = r[col] // p[col]
                for k in range(n):
                    r[k] -= q * p[k]
            nz = [r for r in nz if r[col]]
        p = nz[0]
        if p[col] < 0:
            p[:] = [-a for a in p]
        H = [r for r in H if r is not p and any(r)]
        for r in out:
            q = r[col] // p[col]
            for k in range(n):
                r[k] -= q * p[k]
        out.append(p)
        col += 1
    return out


class LatticeSubgroup:
    """Subgroup of Z^d spanned by integer generator columns."""

    def __init__(self, d, gens=()):
        self.d = d
        self.gens = [list(map(int, g)) for g in gens]
        for g in self.gens:
            if len(g) != d:
                raise PreconditionError(f"generator {g} is not in Z^{d}")
        self._snf = None

    def __repr__(self):
        return f"LatticeSubgroup({self.d}, {self.basis()})"

    @classmethod
    def standard(cls, d):
        return cls(d, [[int(i == j) for i in range(d)] for j in range(d)])

    def matrix(self):
        return from_columns(self.gens, self.d)

    def snf(self):
        if self._snf is None:
            self._snf = smith(self.matrix(), self.d, len(self.gens))
        return self._snf

    @property
    def rank(self):
        _, D, _ = self.snf()
        return sum(1 for i in range(min(self.d, len(self.gens))) if D[i][i])

    def basis(self):
        """Canonical basis in Hermite normal form."""
        return hermite_rows(self.gens)

    def coordinates(self, v):
        """Integer x with sum x_j gens_j = v, or None."""
        U, D, V = self.snf()
        w = matvec(U, v)
        y = [0] * len(self.gens)
        for i in range(self.d):
            di = D[i][i] if i < len(self.gens) else 0
            if di == 0:
                if w[i]:
                    return None
            elif w[i] % di:
                return None
            else:
                y[i] = w[i] // di
        return matvec(V, y)

    def contains(self, v) -> bool:
        return self.coordinates(v) is not None

    def contains_lattice(self, other: "LatticeSubgroup") -> bool:
        return all(self.contains(g) for g in other.gens)

    def __eq__(self, other):
        return isinstance(other, LatticeSubgroup) and self.contains_lattice(other) and other.contains_lattice(self)

    def __add__(self, other):
        return LatticeSubgroup(self.d, self.gens + other.gens)

    def intersection(self, other: "LatticeSubgroup") -> "LatticeSubgroup":
        a, b = self.gens, other.gens
        if not a or not b:
            return LatticeSubgroup(self.d)
        rows = [[g[i] for g in a] + [-h[i] for h in b] for i in range(self.d)]
        ker = integer_kernel(rows, len(a) + len(b))
        out = [[sum(x[j] * a[j][i] for j in range(len(a))) for i in range(self.d)] for x in ker]
        return LatticeSubgroup(self.d, [v for v in out if any(v)])

    def index_in(self, other: "LatticeSubgroup"):
        """[other : self] for self <= other; None when infinite."""
        if not other.contains_lattice(self):
            raise PreconditionError("lattice is not a subgroup of the ambient")
        if self.rank != other.rank:
            return None
        ob = other.basis()
        coords = [LatticeSubgroup(self.d, ob).coordinates(g) for g in self.gens]
        k = len(ob)
        if not self.gens:
            return 1
        _, diag = rank_and_diagonal(from_columns(coords, k), k, len(coords))
        return prod(diag)

    def quotient_invariants(self):
        """Z^d / self = Z^free + sum Z/d_i; returns (free_rank, torsion list)."""
        _, D, _ = self.snf()
        diag = [D[i][i] for i in range(min(self.d, len(self.gens)))]
        nz = [x for x in diag if x]
        return self.d - len(nz), [x for x in nz if x > 1]

    def to_json(self):
        return {"d": self.d, "basis": self.basis()}
