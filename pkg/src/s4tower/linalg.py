"""Exact linear algebra over the prime field F_p.

Vectors are lists of residues; matrices are lists of rows.  Everything here
is dense and small: the cohomology windows we deal with have at most a few
dozen basis elements per degree.
"""

from __future__ import annotations

from typing import Sequence

Vec = list[int]
Mat = list[list[int]]


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod %d" % p)
    return pow(a, p - 2, p)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def rref(rows: Sequence[Sequence[int]], p: int, ncols: int | None = None) -> tuple[Mat, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[x % p for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        f = inv(m[r][c], p)
        m[r] = [(x * f) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                g = m[i][c]
                m[i] = [(x - g * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[int]], p: int, ncols: int | None = None) -> int:
    return len(rref(rows, p, ncols)[1])


def kernel(cols: Sequence[Sequence[int]], nrows: int, p: int) -> Mat:
    """Basis of {x : sum_j x_j * cols[j] = 0}.

    The map is given column-wise: ``cols[j]`` is the image of the j-th source
    basis vector, a vector of length ``nrows``.
    """
    n = len(cols)
    if n == 0:
        return []
    # rows of the matrix M with M[i][j] = cols[j][i]
    mat = [[cols[j][i] % p for j in range(n)] for i in range(nrows)]
    red, piv = rref(mat, p, n)
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for row, pc in zip(red, piv):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return basis


class Subspace:
    """A subspace of F_p^n kept in reduced echelon form, for membership and reduction."""

    def __init__(self, n: int, p: int, gens: Sequence[Sequence[int]] = ()):
        self.n = n
        self.p = p
        self.rows: Mat = []
        self.pivots: list[int] = []
        for g in gens:
            self.add(g)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence[int]) -> Vec:
        p = self.p
        w = [x % p for x in v]
        for row, c in zip(self.rows, self.pivots):
            if w[c]:
                g = w[c]
                w = [(x - g * y) % p for x, y in zip(w, row)]
        return w

    def add(self, v: Sequence[int]) -> bool:
        """Add a vector; returns True if it enlarged the subspace."""
        p = self.p
        w = self.reduce(v)
        c = next((i for i, x in enumerate(w) if x), None)
        if c is None:
            return False
        f = inv(w[c], p)
        w = [(x * f) % p for x in w]
        for i, row in enumerate(self.rows):
            if row[c]:
                g = row[c]
                self.rows[i] = [(x - g * y) % p for x, y in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(c)
        return True

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def complement_coords(self) -> list[int]:
        """Standard coordinates not used as pivots: their unit vectors span a complement."""
        used = set(self.pivots)
        return [i for i in range(self.n) if i not in used]


def solve(cols: Sequence[Sequence[int]], target: Sequence[int], p: int) -> Vec | None:
    """Some x with sum_j x_j cols[j] = target, or None."""
    n = len(cols)
    nrows = len(target)
    aug = [[cols[j][i] % p for j in range(n)] + [target[i] % p] for i in range(nrows)]
    red, piv = rref(aug, p, n + 1)
    if n in piv:
        return None
    x = [0] * n
    for row, c in zip(red, piv):
        x[c] = row[n]
    return x


def unit(n: int, i: int) -> Vec:
    v = [0] * n
    v[i] = 1
    return v
