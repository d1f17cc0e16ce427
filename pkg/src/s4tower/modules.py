"""Finite windows of graded modules over the mod-p Steenrod algebra.

A :class:`Module` stores, for each degree in [lo, hi], a labelled basis and
the matrices of the generating letters (Sq^i at p = 2, beta and P^s at odd
p).  Everything else (words, elements) is applied letter by letter.

:func:`extension` builds the middle term of a short exact sequence
0 -> C -> X -> K -> 0 with C, K known; the part of the letter action on X
that is not determined by C and K is an explicit parameter vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterator, Sequence

from .em import Coefficients, WindowError, stable_basis
from .linalg import Subspace, kernel, unit
from .steenrod import (
    BETA,
    SteenrodElement,
    adem_normalize,
    letter_degree,
    normalize_word,
)

Vec = list[int]


def letters(p: int, max_degree: int) -> list[int]:
    if max_degree <= 0:
        return []
    if p == 2:
        return list(range(1, max_degree + 1))
    return [BETA] + list(range(1, max_degree // (2 * (p - 1)) + 1))


def letter_name(letter: int, p: int) -> str:
    if p == 2:
        return "Sq%d" % letter
    return "b1" if letter == BETA else "P%d" % letter


@dataclass
class Module:
    p: int
    lo: int
    hi: int
    labels: dict[int, list[str]]
    act: dict[tuple[int, int], list[Vec]] = field(default_factory=dict)
    # for Eilenberg-MacLane modules: (word, source) of each basis element
    words: dict[int, list[tuple]] = field(default_factory=dict)

    def dim(self, n: int) -> int:
        if n < self.lo or n > self.hi:
            raise WindowError("degree %d outside window [%d, %d]" % (n, self.lo, self.hi))
        return len(self.labels.get(n, []))

    def zero(self, n: int) -> Vec:
        return [0] * self.dim(n)

    def letter_matrix(self, letter: int, n: int) -> list[Vec]:
        t = n + letter_degree(letter, self.p)
        if t > self.hi:
            raise WindowError("action into degree %d beyond window top %d" % (t, self.hi))
        if (letter, n) not in self.act:
            # nothing recorded: the target or source is zero
            return [[0] * self.dim(t) for _ in range(self.dim(n))]
        return self.act[(letter, n)]

    def apply_letter(self, letter: int, n: int, v: Sequence[int]) -> Vec:
        cols = self.letter_matrix(letter, n)
        t = n + letter_degree(letter, self.p)
        out = [0] * self.dim(t)
        for c, col in zip(v, cols):
            if c:
                for i, x in enumerate(col):
                    out[i] += c * x
        return [x % self.p for x in out]

    def apply_word(self, word: Sequence[int], n: int, v: Sequence[int]) -> Vec:
        v = list(v)
        for letter in reversed(word):
            v = self.apply_letter(letter, n, v)
            n += letter_degree(letter, self.p)
        return v

    def apply(self, e: SteenrodElement, n: int, v: Sequence[int]) -> Vec:
        t = n + (e.degree or 0)
        out = [0] * self.dim(t) if e.terms else None
        for w, c in e.terms:
            r = self.apply_word(w, n, v)
            out = [(a + c * b) % self.p for a, b in zip(out, r)]
        return out if out is not None else []

    def vector_label(self, n: int, v: Sequence[int]) -> str:
        parts = []
        for c, lab in zip(v, self.labels.get(n, [])):
            if c % self.p:
                parts.append(lab if c % self.p == 1 else "%d %s" % (c % self.p, lab))
        return " + ".join(parts) if parts else "0"

    def find(self, n: int, label: str) -> Vec:
        labs = self.labels.get(n, [])
        if label not in labs:
            raise KeyError("no class %r in degree %d" % (label, n))
        return unit(len(labs), labs.index(label))

    def adem_defects(self) -> list[str]:
        """Basis elements on which some Adem relation fails (empty for a module)."""
        bad = []
        p = self.p
        span = self.hi - self.lo
        for n in range(self.lo, self.hi + 1):
            for i in range(self.dim(n)):
                x = unit(self.dim(n), i)
                for w in relation_words(p, span):
                    d = sum(letter_degree(a, p) for a in w)
                    if n + d > self.hi:
                        continue
                    lhs = self.apply_word(w, n, x)
                    rhs = [0] * len(lhs)
                    for w2, c in normalize_word(w, p):
                        r = self.apply_word(w2, n, x)
                        rhs = [(a + c * b) % p for a, b in zip(rhs, r)]
                    if lhs != rhs:
                        bad.append("%s on %s" % (" ".join(letter_name(a, p) for a in w), self.labels[n][i]))
        return bad


def relation_words(p: int, max_degree: int) -> list[tuple[int, ...]]:
    """Left-hand sides of the defining relations up to max_degree."""
    out = []
    ls = letters(p, max_degree)
    for a in ls:
        for b in ls:
            w = (a, b)
            if sum(letter_degree(x, p) for x in w) > max_degree:
                continue
            if p == 2:
                if a < 2 * b:
                    out.append(w)
            elif a == BETA and b == BETA:
                out.append(w)
            elif a != BETA and b != BETA and a < p * b:
                out.append(w)
    if p != 2:
        for a in ls:
            for b in ls:
                if a == BETA or b == BETA:
                    continue
                w = (a, BETA, b)
                if sum(letter_degree(x, p) for x in w) <= max_degree and a <= p * b:
                    out.append(w)
    return out


def em_module(coeff: Coefficients, p: int, shift: int, hi: int, lo: int | None = None, prefix: str = "") -> Module:
    """H*(Sigma^shift HA; F_p) on [lo, hi]; basis labels are monomial text."""
    lo = shift if lo is None else lo
    rel = range(0, hi - shift + 1)
    basis = stable_basis(coeff, p, rel)
    labels: dict[int, list[str]] = {}
    index: dict[int, dict] = {}
    for d in rel:
        labels[shift + d] = [prefix + g.label for g in basis[d]]
        index[shift + d] = {(g.word, g.source): i for i, g in enumerate(basis[d])}
    m = Module(p, lo, hi, {n: labels.get(n, []) for n in range(lo, hi + 1)})
    m.words = {shift + d: [(g.word, g.source) for g in basis[d]] for d in rel}
    for d in rel:
        n = shift + d
        for letter in letters(p, hi - n):
            t = n + letter_degree(letter, p)
            cols = []
            for g in basis[d]:
                img = adem_normalize(SteenrodElement(p, (((letter,) + g.word, 1),), g.source))
                v = [0] * len(labels[t])
                for w, c in img.terms:
                    v[index[t][(w, img.source)]] = c
                cols.append(v)
            if cols and labels[t]:
                m.act[(letter, n)] = cols
    return m


# ---------------------------------------------------------------------------
# extensions


@dataclass
class Extension:
    """0 -> C -> X -> K -> 0 with the undetermined action as parameters.

    ``build(phi)`` returns the module X for a parameter vector phi.  Basis of
    X^n: the C^n basis (pullbacks) followed by the K^n basis (lifts).
    """

    p: int
    lo: int
    hi: int
    c_labels: dict[int, list[str]]
    k_labels: dict[int, list[str]]
    c_act: dict[tuple[int, int], list[Vec]]  # known action on C
    k_act: dict[tuple[int, int], list[Vec]]  # action on K (in K coordinates)
    params: list[tuple[int, int, int, int]]  # (letter, n, lift index, C coordinate)

    @property
    def nparams(self) -> int:
        return len(self.params)

    def build(self, phi: Sequence[int] | None = None) -> Module:
        p = self.p
        phi = list(phi) if phi is not None else [0] * self.nparams
        labels = {n: self.c_labels.get(n, []) + self.k_labels.get(n, []) for n in range(self.lo, self.hi + 1)}
        m = Module(p, self.lo, self.hi, labels)
        pidx = {}
        for k, (letter, n, j, t) in enumerate(self.params):
            pidx[(letter, n, j, t)] = k
        for n in range(self.lo, self.hi + 1):
            for letter in letters(p, self.hi - n):
                t = n + letter_degree(letter, p)
                dc_n, dk_n = len(self.c_labels.get(n, [])), len(self.k_labels.get(n, []))
                dc_t, dk_t = len(self.c_labels.get(t, [])), len(self.k_labels.get(t, []))
                if not (dc_n + dk_n) or not (dc_t + dk_t):
                    continue
                cols = []
                cc = self.c_act.get((letter, n))
                for i in range(dc_n):
                    cols.append((cc[i] if cc else [0] * dc_t) + [0] * dk_t)
                kk = self.k_act.get((letter, n))
                for j in range(dk_n):
                    top = [phi[pidx[(letter, n, j, s)]] % p for s in range(dc_t)]
                    cols.append(top + (kk[j] if kk else [0] * dk_t))
                m.act[(letter, n)] = cols
        return m

    def constraint_matrix(self) -> list[Vec]:
        """Columns: residual of all defining relations for each unit parameter."""
        base = _relation_residual(self.build())
        if any(base):
            raise AssertionError("extension with zero parameters violates a relation")
        return [_relation_residual(self.build(unit(self.nparams, k))) for k in range(self.nparams)]

    def coboundaries(self) -> list[Vec]:
        """Parameter changes produced by replacing a lift x by x + (pullback)."""
        p = self.p
        out = []
        pidx = {key: k for k, key in enumerate(self.params)}
        for n in range(self.lo, self.hi + 1):
            dk = len(self.k_labels.get(n, []))
            dc = len(self.c_labels.get(n, []))
            for j in range(dk):
                for s in range(dc):
                    v = [0] * self.nparams
                    # outgoing: letter applied to the shifted lift
                    for letter in letters(p, self.hi - n):
                        cc = self.c_act.get((letter, n))
                        if not cc:
                            continue
                        for r, x in enumerate(cc[s]):
                            if x:
                                v[pidx[(letter, n, j, r)]] += x
                    # incoming: lifts whose image involves lift j
                    for letter in letters(p, n - self.lo):
                        src = n - letter_degree(letter, p)
                        if src < self.lo:
                            continue
                        kk = self.k_act.get((letter, src))
                        if not kk:
                            continue
                        for i, col in enumerate(kk):
                            if col[j]:
                                v[pidx[(letter, src, i, s)]] -= col[j]
                    out.append([x % p for x in v])
        return out

    def worlds(self, limit: int = 4096) -> list[Vec]:
        """One parameter vector per module structure, up to change of lifts."""
        p = self.p
        if not self.nparams:
            return [[]]
        cons = self.constraint_matrix()
        nrows = len(cons[0]) if cons else 0
        z = kernel(cons, nrows, p) if nrows else [unit(self.nparams, k) for k in range(self.nparams)]
        b = Subspace(self.nparams, p, self.coboundaries())
        reps = []
        for v in z:
            if b.add(v):
                reps.append(v)
        if p ** len(reps) > limit:
            raise WindowError("%d^%d extension structures exceed the enumeration limit %d" % (p, len(reps), limit))
        out = []
        for coeffs in iproduct(range(p), repeat=len(reps)):
            v = [0] * self.nparams
            for c, r in zip(coeffs, reps):
                if c:
                    v = [(a + c * x) % p for a, x in zip(v, r)]
            out.append(v)
        return out


def _relation_residual(m: Module) -> Vec:
    p = m.p
    res: Vec = []
    span = m.hi - m.lo
    words = relation_words(p, span)
    for n in range(m.lo, m.hi + 1):
        d = m.dim(n)
        for i in range(d):
            x = unit(d, i)
            for w in words:
                deg = sum(letter_degree(a, p) for a in w)
                if n + deg > m.hi:
                    continue
                lhs = m.apply_word(w, n, x)
                for w2, c in normalize_word(w, p):
                    r = m.apply_word(w2, n, x)
                    lhs = [(a - c * b) % p for a, b in zip(lhs, r)]
                res += lhs
    return res


def quotient_data(base: Module, images: dict[int, list[Vec]], lo: int, hi: int):
    """Complement of the image of tau in each degree.

    Returns (kept, reducer): kept[n] lists the base coordinates spanning the
    cokernel; reducer(n, v) gives the cokernel coordinates of v.  Pivots are
    taken from the last coordinates so that early basis elements survive.
    """
    subs: dict[int, Subspace] = {}
    kept: dict[int, list[int]] = {}
    for n in range(lo, hi + 1):
        d = base.dim(n)
        s = Subspace(d, base.p, [list(reversed(v)) for v in images.get(n, [])])
        subs[n] = s
        kept[n] = sorted(d - 1 - c for c in s.pivots)
        kept[n] = [i for i in range(d) if i not in kept[n]]

    def reducer(n: int, v: Sequence[int]) -> Vec:
        r = list(reversed(subs[n].reduce(list(reversed(list(v))))))
        return [r[i] for i in kept[n]]

    return kept, reducer


def iter_nonzero(p: int, dim: int) -> Iterator[Vec]:
    for v in iproduct(range(p), repeat=dim):
        if any(v):
            yield list(v)


__all__ = [
    "Extension",
    "Module",
    "em_module",
    "iter_nonzero",
    "letter_name",
    "letters",
    "quotient_data",
    "relation_words",
]
