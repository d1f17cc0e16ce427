"""Mod-p cohomology of Eilenberg-MacLane spectra and spaces in a degree window.

Stable case: H*(Sigma^n HA; F_p) has a module basis of admissible monomials
on the fundamental class, with the tail rule for A = Z (no trailing
Bockstein) or A = Z/p^m, m >= 2 (trailing Bockstein replaced by d_m).

Unstable case: H*(K(A, q); F_p) is free graded-commutative on the same
monomials restricted to small excess.  Classes are polynomials in those
generators, and :meth:`EMRing.act` applies Steenrod operations through the
Cartan formula and instability.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .steenrod import (
    BETA,
    FUND,
    RED_Z,
    Monomial,
    Source,
    SteenrodElement,
    SteenrodError,
    adem_normalize,
    enumerate_admissible,
    excess,
    format_monomial,
    parse_monomial,
    word_degree,
    word_to_sequence,
)

DEFAULT_MAX_DEGREE = 16


class WindowError(ValueError):
    """A computation needed data above the degree window."""


@dataclass(frozen=True)
class Coefficients:
    """Z (order 0) or a finite cyclic group Z/order."""

    order: int = 0

    @classmethod
    def parse(cls, text: str) -> "Coefficients":
        t = text.strip()
        m = re.fullmatch(r"Z(\d*)", t)
        if not m:
            raise ValueError("bad coefficient group %r (use Z or Z<n>)" % text)
        n = int(m.group(1)) if m.group(1) else 0
        if n == 1:
            raise ValueError("Z1 is the trivial group")
        return cls(n)

    def __str__(self) -> str:
        return "Z" if self.order == 0 else "Z%d" % self.order

    def valuation(self, p: int) -> int:
        n, m = self.order, 0
        while n and n % p == 0:
            n //= p
            m += 1
        return m

    def source(self, p: int) -> Source | None:
        """Source tag of the fundamental mod-p class, None if it vanishes."""
        if self.order == 0:
            return RED_Z
        m = self.valuation(p)
        if m == 0:
            return None
        return FUND if m == 1 else Source("red", m)

    def tail(self, p: int):
        if self.order == 0:
            return "no_one"
        return ("bock", self.valuation(p))


def fundamental_label(q: int | None) -> str:
    return "i" if q is None else "i%d" % q


@dataclass(frozen=True)
class Generator:
    """An admissible monomial applied to the fundamental class."""

    p: int
    word: tuple[int, ...]
    source: Source
    q: int | None  # None for the stable (spectrum) case

    @property
    def sequence(self) -> tuple[int, ...]:
        seq = word_to_sequence(self.word, self.p)
        return seq + (1,) if self.source.kind == "bock" else seq

    @property
    def relative_degree(self) -> int:
        return word_degree(self.word, self.p) + self.source.degree()

    @property
    def degree(self) -> int:
        return self.relative_degree + (self.q or 0)

    @property
    def odd(self) -> bool:
        return self.p != 2 and self.degree % 2 == 1

    @property
    def label(self) -> str:
        body = format_monomial(Monomial(self.p, self.word, self.source))
        fl = fundamental_label(self.q)
        return fl if body == "1" else body + " " + fl

    def sequence_text(self) -> str:
        return "(%s)" % ",".join(map(str, self.sequence or (0,)))

    def __str__(self) -> str:
        return self.label


def _from_monomial(m: Monomial, q: int | None) -> Generator:
    return Generator(m.p, m.word, m.source, q)


def stable_basis(coeff: Coefficients, p: int, degrees: Iterable[int]) -> dict[int, list[Generator]]:
    """Module basis of H^{n+d}(Sigma^n HA; F_p) for each relative degree d."""
    out: dict[int, list[Generator]] = {}
    src = coeff.source(p)
    for d in degrees:
        if src is None:
            out[d] = []
            continue
        out[d] = [_from_monomial(m, None) for m in enumerate_admissible(p, d, None, coeff.tail(p))]
    return out


def excess_bound(p: int, q: int) -> int:
    return q if p == 2 else (p - 1) * q


def unstable_ring_generators(coeff: Coefficients, q: int, p: int, d_max: int = DEFAULT_MAX_DEGREE) -> list[Generator]:
    """Free generators of H*(K(A, q); F_p) in degrees <= d_max, ordered by degree."""
    if q < 2:
        raise ValueError("K(A, q) needs q >= 2")
    if coeff.source(p) is None:
        return []
    gens = []
    for d in range(0, d_max - q + 1):
        gens += [
            _from_monomial(m, q)
            for m in enumerate_admissible(p, d, excess_bound(p, q), coeff.tail(p))
        ]
    return gens


# ---------------------------------------------------------------------------
# free graded-commutative ring on a list of generators

Exp = tuple[int, ...]
Poly = dict  # Exp -> coefficient


class EMRing:
    """Truncated free graded-commutative F_p-algebra with Steenrod action.

    ``gens`` must be closed under the rules used by :meth:`act` up to
    ``max_degree``; this holds for the output of unstable_ring_generators.
    """

    def __init__(self, p: int, gens: list[Generator], max_degree: int, coeff: Coefficients | None = None, q: int | None = None):
        self.p = p
        self.gens = list(gens)
        self.max_degree = max_degree
        self.coeff = coeff
        self.q = q
        self.n = len(self.gens)
        self.index = {(g.word, g.source): i for i, g in enumerate(self.gens)}

    @classmethod
    def eilenberg_maclane(cls, coeff: Coefficients, q: int, p: int, d_max: int = DEFAULT_MAX_DEGREE) -> "EMRing":
        return cls(p, unstable_ring_generators(coeff, q, p, d_max), d_max, coeff, q)

    @cached_property
    def degrees(self) -> list[int]:
        return [g.degree for g in self.gens]

    # -- polynomials --------------------------------------------------------

    def zero(self) -> Poly:
        return {}

    def one(self) -> Poly:
        return {(0,) * self.n: 1}

    def gen(self, i: int) -> Poly:
        e = [0] * self.n
        e[i] = 1
        return {tuple(e): 1}

    def mono_degree(self, e: Exp) -> int:
        return sum(a * d for a, d in zip(e, self.degrees))

    def degree_of(self, f: Poly) -> int | None:
        ds = {self.mono_degree(e) for e in f}
        if len(ds) > 1:
            raise ValueError("inhomogeneous class")
        return ds.pop() if ds else None

    def _mono_mul(self, a: Exp, b: Exp) -> tuple[Exp, int]:
        p = self.p
        if p == 2:
            return tuple(x + y for x, y in zip(a, b)), 1
        sign = 1
        odd_a_after = 0
        # canonical order is ascending index; count transpositions of odd factors
        for i in range(self.n - 1, -1, -1):
            if self.gens[i].odd:
                if b[i] and odd_a_after % 2:
                    sign = -sign
                if a[i]:
                    odd_a_after += 1
                if a[i] + b[i] > 1:
                    return a, 0
        return tuple(x + y for x, y in zip(a, b)), sign

    def mul(self, f: Poly, g: Poly) -> Poly:
        out: dict = {}
        p = self.p
        for a, c in f.items():
            for b, d in g.items():
                e, s = self._mono_mul(a, b)
                if s:
                    if self.mono_degree(e) > self.max_degree:
                        raise WindowError("product above degree %d" % self.max_degree)
                    out[e] = (out.get(e, 0) + s * c * d) % p
        return {e: c for e, c in out.items() if c}

    def add(self, *fs: Poly, coeffs: Iterable[int] | None = None) -> Poly:
        out: dict = {}
        cs = list(coeffs) if coeffs is not None else [1] * len(fs)
        for f, k in zip(fs, cs):
            for e, c in f.items():
                out[e] = (out.get(e, 0) + k * c) % self.p
        return {e: c for e, c in out.items() if c}

    def power(self, f: Poly, k: int) -> Poly:
        r = self.one()
        for _ in range(k):
            r = self.mul(r, f)
        return r

    # -- Steenrod action ----------------------------------------------------

    def _split_first(self, word: tuple[int, ...]):
        """word = (first letters) + rest, the first block being beta^e P^s (or Sq^k)."""
        if self.p == 2:
            return 0, word[0], word[1:]
        if word[0] == BETA:
            if len(word) > 1:
                return 1, word[1], word[2:]
            return 1, 0, ()
        return 0, word[0], word[1:]

    def evaluate_word(self, word: tuple[int, ...], source: Source) -> Poly:
        """Class of an admissible word applied to the fundamental class."""
        key = (word, source)
        if key in self.index:
            return self.gen(self.index[key])
        if self.q is None:
            raise SteenrodError("not a generator: %r" % (key,))
        m = Monomial(self.p, word, source)
        seq = word_to_sequence(word, self.p) + ((1,) if source.kind == "bock" else ())
        total = m.degree + self.q
        if total > self.max_degree:
            raise WindowError("degree %d above window %d" % (total, self.max_degree))
        if excess(seq, self.p) < excess_bound(self.p, self.q):
            raise WindowError("generator %s missing from the ring" % m)
        e, s, rest = self._split_first(word)
        y = self.evaluate_word(rest, source)
        if not y:
            return {}
        dy = total - letter_block_degree(e, s, self.p)
        if self.p == 2:
            if s > dy:
                return {}
            return self.power(y, 2)  # s == dy
        if 2 * s > dy:
            return {}
        # 2s == dy: P^s y = y^p and beta(y^p) = 0
        return {} if e else self.power(y, self.p)

    def _act_letter_on_gen(self, letter: int, i: int) -> Poly:
        g = self.gens[i]
        el = adem_normalize(SteenrodElement(self.p, (((letter,) + g.word, 1),), g.source))
        return self.add(*[self.evaluate_word(w, g.source) for w, _ in el.terms], coeffs=[c for _, c in el.terms])

    def _act_letter(self, letter: int, f: Poly) -> Poly:
        p = self.p
        out: list[Poly] = []
        for e, c in f.items():
            factors = [i for i, k in enumerate(e) for _ in range(k)]
            if p != 2 and letter == BETA:
                # derivation with Koszul sign
                acc: Poly = {}
                deg_before = 0
                for j, i in enumerate(factors):
                    left = self._word_product(factors[:j])
                    right = self._word_product(factors[j + 1 :])
                    term = self.mul(self.mul(left, self._act_letter_on_gen(BETA, i)), right)
                    sgn = -1 if deg_before % 2 else 1
                    acc = self.add(acc, term, coeffs=[1, sgn])
                    deg_before += self.degrees[i]
                out.append({k: v * c % p for k, v in acc.items()})
            else:
                out.append({k: v * c % p for k, v in self._cartan(letter, factors).items()})
        return self.add(*out) if out else {}

    def _word_product(self, factors: list[int]) -> Poly:
        r = self.one()
        for i in factors:
            r = self.mul(r, self.gen(i))
        return r

    def _cartan(self, k: int, factors: list[int]) -> Poly:
        """Sq^k or P^k of a product of generators (even-degree operations commute)."""
        if not factors:
            return self.one() if k == 0 else {}
        first, rest = factors[0], factors[1:]
        acc: Poly = {}
        for j in range(k + 1):
            a = self.gen(first) if j == 0 else self._act_letter_on_gen(j, first)
            if not a:
                continue
            b = self._cartan(k - j, rest)
            if b:
                acc = self.add(acc, self.mul(a, b))
        return acc

    def act(self, op: SteenrodElement, f: Poly) -> Poly:
        """Apply a Steenrod element to a class (word letters act right to left)."""
        if op.source != FUND:
            raise SteenrodError("operation must be a bare Steenrod element")
        out = []
        for w, c in op.terms:
            g = f
            for letter in reversed(w):
                g = self._act_letter(letter, g)
                if not g:
                    break
            out.append({k: v * c % self.p for k, v in g.items()})
        return self.add(*out) if out else {}

    # -- bases and labels ---------------------------------------------------

    def basis(self, d: int) -> list[Exp]:
        return ring_basis_in_degree(self, d)

    def mono_label(self, e: Exp) -> str:
        if not any(e):
            return "1"
        parts = []
        for i in range(self.n - 1, -1, -1):
            if e[i] == 1:
                parts.append(self.gens[i].label)
            elif e[i] > 1:
                parts.append("(%s)^%d" % (self.gens[i].label, e[i]))
        return " * ".join(parts)

    def poly_label(self, f: Poly) -> str:
        if not f:
            return "0"
        order = {e: k for k, e in enumerate(self.sorted_monomials(f))}
        parts = []
        for e in sorted(f, key=order.get):
            c = f[e]
            s = self.mono_label(e)
            parts.append(s if c == 1 else "%d %s" % (c, s))
        return " + ".join(parts)

    def sorted_monomials(self, es: Iterable[Exp]) -> list[Exp]:
        return sorted(es, key=self._mono_key)

    def _mono_key(self, e: Exp):
        # generators first (in generator order), then products by descending exponent vector
        if sum(e) == 1:
            return (self.mono_degree(e), 0, e.index(1))
        return (self.mono_degree(e), 1, tuple(-x for x in e))

    def parse_class(self, text: str) -> Poly:
        """Inverse of poly_label."""
        text = text.strip()
        if text == "0":
            return {}
        acc: list[Poly] = []
        for term in re.split(r"\s\+\s", text):
            toks = term.split(None, 1)
            c = 1
            if len(toks) == 2 and toks[0].isdigit():
                c, term = int(toks[0]), toks[1]
            f = self.one()
            for factor in term.split(" * "):
                factor = factor.strip()
                k = 1
                mm = re.fullmatch(r"\((.*)\)\^(\d+)", factor)
                if mm:
                    factor, k = mm.group(1), int(mm.group(2))
                f = self.mul(f, self.power(self.gen(self.gen_index(factor)), k))
            acc.append({e: v * c % self.p for e, v in f.items()})
        return self.add(*acc)

    def gen_index(self, label: str) -> int:
        for i, g in enumerate(self.gens):
            if g.label == label:
                return i
        raise KeyError("no generator %r" % label)


def letter_block_degree(e: int, s: int, p: int) -> int:
    return s if p == 2 else e + 2 * (p - 1) * s


def ring_basis_in_degree(ring: EMRing, d: int) -> list[Exp]:
    """All monomials of total degree d, odd generators to exponent <= 1 at odd p."""
    if d > ring.max_degree:
        raise WindowError("degree %d above window %d" % (d, ring.max_degree))
    out: list[Exp] = []
    degs = ring.degrees
    n = ring.n

    def rec(i, left, acc):
        if left == 0:
            out.append(tuple(acc + [0] * (n - i)))
            return
        if i == n:
            return
        dg = degs[i]
        cap = left // dg if dg else 0
        if ring.gens[i].odd:
            cap = min(cap, 1)
        for k in range(cap, -1, -1):
            rec(i + 1, left - k * dg, acc + [k])

    if d == 0:
        return [(0,) * n]
    rec(0, d, [])
    return ring.sorted_monomials(out)


def steenrod_act(op: SteenrodElement, cls: Poly, ring: EMRing) -> Poly:
    return ring.act(op, cls)


def generator_from_label(label: str, p: int, q: int | None) -> tuple[tuple[int, ...], Source]:
    fl = fundamental_label(q)
    toks = label.split()
    if not toks or toks[-1] != fl:
        raise ValueError("label %r does not end with %s" % (label, fl))
    body = " ".join(toks[:-1]) or "1"
    m = parse_monomial(body, p)
    return m.word, m.source


def em_table_rows(coeff: Coefficients, p: int, q: int | None, rows: Iterable[int]) -> list[tuple[int, list[str], list[str]]]:
    """(relative degree, sequences of new generators, labels) per row.

    Stable tables (q None) list module generators.  Unstable tables list the
    indecomposables followed by all decomposable monomials of that degree.
    """
    rows = list(rows)
    if q is None:
        basis = stable_basis(coeff, p, rows)
        return [(d, [g.sequence_text() for g in basis[d]], [g.label for g in basis[d]]) for d in rows]
    ring = EMRing.eilenberg_maclane(coeff, q, p, q + max(rows))
    out = []
    for d in rows:
        mons = ring.basis(q + d)
        seqs = [ring.gens[e.index(1)].sequence_text() for e in mons if sum(e) == 1]
        labels = [ring.mono_label(e) for e in mons]
        out.append((d, seqs, labels))
    return out


__all__ = [
    "Coefficients",
    "EMRing",
    "Generator",
    "WindowError",
    "em_table",
    "em_table_rows",
    "generator_from_label",
    "ring_basis_in_degree",
    "stable_basis",
    "steenrod_act",
    "unstable_ring_generators",
]



def em_table(coeff: Coefficients, p: int, q: int | None, rows: Iterable[int]):
    from .tables import Table

    shape = "H%s" % coeff if q is None else "K(%s,%d)" % (coeff, q)
    body = [[str(d), ", ".join(s), ", ".join(g)] for d, s, g in em_table_rows(coeff, p, q, rows)]
    return Table(["degree", "sequences", "generators"], body, title="%s mod %d" % (shape, p))
