"""Independent check on Adem normalization: evaluate operations on test classes.

Nothing here uses the Adem relations.  Operations are applied letter by letter
through the Cartan formula to

* p = 2: the product x_1 ... x_n in H*(BV_n; F_2) = F_2[x_1..x_n].  The
  class is symmetric, so polynomials are stored in the monomial-symmetric
  basis (a sorted exponent tuple stands for the sum of its distinct
  permutations).  This keeps Sq^7 Sq^7 on fourteen variables cheap.
* odd p: the product e_1 ... e_n y_1 ... y_n in
  Lambda[e_1..e_n] (x) F_p[y_1..y_n], with beta e_i = y_i and
  P(y) = y + y^p.

Both test classes detect every admissible monomial of degree <= n, which
:func:`is_faithful` confirms computationally.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from math import factorial, prod

from .linalg import rank
from .steenrod import BETA, SteenrodElement, binom, enumerate_admissible, word_degree

Poly = dict


def _stab(values) -> int:
    return prod(factorial(c) for c in Counter(values).values())


def _block_choices(v: int, c: int, k: int, lo: int = 0):
    """Non-decreasing tuples of length c with entries in [lo, v], sum k."""
    if c == 0:
        if k == 0:
            yield ()
        return
    for first in range(lo, min(v, k) + 1):
        if first * c > k:
            break
        for rest in _block_choices(v, c - 1, k - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _sq_msym(lam: tuple[int, ...], k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Sq^k of the monomial symmetric function m_lam, mod 2."""
    blocks = sorted(Counter(lam).items(), reverse=True)
    out: Counter = Counter()

    def rec(i, left, picked):
        if i == len(blocks):
            if left:
                return
            lam_full, ks = [], []
            for (v, c), chosen in zip(blocks, picked):
                lam_full += [v] * c
                ks += list(chosen)
            coeff = prod(binom(v, kk, 2) for v, kk in zip(lam_full, ks))
            if not coeff:
                return
            b = [v + kk for v, kk in zip(lam_full, ks)]
            both = _stab(list(zip(lam_full, b)))
            f = _stab(b) // both
            if f % 2:
                out[tuple(sorted(b, reverse=True))] ^= 1
            return
        v, c = blocks[i]
        for s in range(left + 1):
            for ch in _block_choices(v, c, s):
                rec(i + 1, left - s, picked + [ch])

    rec(0, k, [])
    return tuple((m, 1) for m, c in out.items() if c)


def _apply_sq(poly: Poly, k: int) -> Poly:
    out: Counter = Counter()
    for lam, c in poly.items():
        for mu, d in _sq_msym(lam, k):
            out[mu] ^= c & d
    return {m: 1 for m, c in out.items() if c}


def _apply_beta(poly: Poly, p: int) -> Poly:
    out: Counter = Counter()
    for (mask, ys), c in poly.items():
        sign = 1
        for i, bit in enumerate(mask):
            if bit:
                nm = mask[:i] + (0,) + mask[i + 1 :]
                ny = ys[:i] + (ys[i] + 1,) + ys[i + 1 :]
                out[(nm, ny)] = (out[(nm, ny)] + sign * c) % p
                sign = -sign
    return {k: v for k, v in out.items() if v}


def _p_on_ys(ys: tuple[int, ...], k: int, p: int):
    """P^k(y^a) = sum over k_1+..+k_n = k of prod C(a_i, k_i) y_i^(a_i + (p-1)k_i)."""
    n = len(ys)

    def rec(i, left):
        if i == n:
            if left == 0:
                yield (), 1
            return
        for ki in range(min(ys[i], left) + 1):
            b = binom(ys[i], ki, p)
            if not b:
                continue
            for rest, c in rec(i + 1, left - ki):
                yield (ys[i] + (p - 1) * ki,) + rest, b * c % p

    yield from rec(0, k)


def _apply_power(poly: Poly, k: int, p: int) -> Poly:
    out: Counter = Counter()
    for (mask, ys), c in poly.items():
        for ny, d in _p_on_ys(ys, k, p):
            out[(mask, ny)] = (out[(mask, ny)] + c * d) % p
    return {key: v for key, v in out.items() if v}


def test_class(p: int, n: int) -> Poly:
    if p == 2:
        return {(1,) * n: 1}
    return {((1,) * n, (1,) * n): 1}


def evaluate_word(word: tuple[int, ...], p: int, n: int) -> Poly:
    poly = test_class(p, n)
    for letter in reversed(word):
        if p == 2:
            poly = _apply_sq(poly, letter)
        elif letter == BETA:
            poly = _apply_beta(poly, p)
        else:
            poly = _apply_power(poly, letter, p)
        if not poly:
            break
    return poly


def oracle_evaluate(e: SteenrodElement, n: int = 14) -> Poly:
    """Image of e (normalized or not) on the n-variable test class.

    Keys are sorted exponent tuples at p = 2 (monomial symmetric functions)
    and (exterior mask, polynomial exponents) pairs at odd p.
    """
    p = e.p
    out: Counter = Counter()
    for w, c in e.terms:
        for key, v in evaluate_word(w, p, n).items():
            out[key] = (out[key] + c * v) % p
    return {k: v for k, v in out.items() if v}


def is_faithful(p: int, d: int, n: int) -> bool:
    """Do the admissible monomials of degree d stay independent on the test class?"""
    mons = enumerate_admissible(p, d)
    images = [evaluate_word(m.word, p, n) for m in mons]
    keys = sorted({k for im in images for k in im})
    rows = [[im.get(k, 0) for k in keys] for im in images]
    return rank(rows, p, len(keys)) == len(mons)


def all_pairs(p: int, max_degree: int) -> list[tuple[int, ...]]:
    """Every composite of two algebra generators of total degree <= max_degree."""
    if p == 2:
        gens = [(i,) for i in range(1, max_degree + 1)]
    else:
        gens = [(BETA,)] + [(s,) for s in range(1, max_degree // (2 * (p - 1)) + 1)]
    return [a + b for a in gens for b in gens if word_degree(a + b, p) <= max_degree]

