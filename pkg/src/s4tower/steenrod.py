"""Mod-p Steenrod algebra in the admissible (Serre-Cartan) basis.

A monomial is a word of letters applied right to left.  At p = 2 a letter is
the index i of Sq^i.  At odd p a letter is either 0, standing for the
Bockstein beta, or s > 0, standing for P^s.  A monomial may also carry a
*source* tag describing the class it is applied to (the fundamental class of
Z/p, the mod-p reduction of an integral or Z/p^m class, or the m-th
Bockstein d_m of a Z/p^m class); the tag never commutes with the letters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .linalg import is_prime

BETA = 0


class SteenrodError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Source:
    """What the leftmost-acting composite is finally applied to.

    kind is one of
      "fund"  the Z/p fundamental class (or no class at all: a bare operation)
      "red"   mod-p reduction of a class with Z (m = 0) or Z/p^m (m >= 2) coefficients
      "bock"  the m-th Bockstein d_m (m >= 2) of a Z/p^m class
    """

    kind: str = "fund"
    m: int = 0

    def kills_bockstein(self) -> bool:
        # beta vanishes on reductions of integral / higher-torsion classes and on d_m
        return self.kind in ("red", "bock")

    def degree(self) -> int:
        return 1 if self.kind == "bock" else 0


FUND = Source()
RED_Z = Source("red", 0)


def letter_degree(letter: int, p: int) -> int:
    if p == 2:
        return letter
    return 1 if letter == BETA else 2 * letter * (p - 1)


def word_degree(word: Iterable[int], p: int) -> int:
    return sum(letter_degree(x, p) for x in word)


def binom(n: int, k: int, p: int) -> int:
    """Binomial coefficient mod p via Lucas; zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    r = 1
    while n or k:
        a, b = n % p, k % p
        if b > a:
            return 0
        r = r * _small_binom(a, b) % p
        n //= p
        k //= p
    return r


@lru_cache(maxsize=None)
def _small_binom(a: int, b: int) -> int:
    from math import comb

    return comb(a, b)


# ---------------------------------------------------------------------------
# degree-indexed sequences


def word_to_sequence(word: tuple[int, ...], p: int) -> tuple[int, ...]:
    """Operation form -> degree-indexed sequence (i_1, ..., i_r).

    At odd p each entry 2(p-1)s + e encodes beta^e P^s; a lone trailing beta
    gives the entry 1.
    """
    if p == 2:
        return tuple(word)
    q = 2 * (p - 1)
    out = []
    pending = 0
    for x in word:
        if x == BETA:
            if pending:
                raise SteenrodError("beta beta has no degree-indexed form")
            pending = 1
        else:
            out.append(q * x + pending)
            pending = 0
    if pending:
        out.append(1)
    return tuple(out)


def sequence_to_word(seq: Iterable[int], p: int) -> tuple[int, ...]:
    if p == 2:
        return tuple(seq)
    q = 2 * (p - 1)
    word: list[int] = []
    for i in seq:
        e = i % q
        if e not in (0, 1) or i <= 0:
            raise SteenrodError("entry %d is not 0 or 1 mod %d" % (i, q))
        s = (i - e) // q
        if e:
            word.append(BETA)
        if s:
            word.append(s)
    return tuple(word)


def excess(seq: tuple[int, ...], p: int) -> int:
    """e(I) = p*i_1 - (p-1)*|I|, zero for the empty sequence."""
    if not seq:
        return 0
    return p * seq[0] - (p - 1) * sum(seq)


def sequence_is_admissible(seq: tuple[int, ...], p: int) -> bool:
    q = 2 * (p - 1)
    if any(i <= 0 for i in seq):
        return False
    if p != 2 and any(i % q not in (0, 1) for i in seq):
        return False
    return all(a >= p * b for a, b in zip(seq, seq[1:]))


def word_is_admissible(word: tuple[int, ...], p: int) -> bool:
    if p == 2:
        return all(x > 0 for x in word) and all(a >= 2 * b for a, b in zip(word, word[1:]))
    for i, x in enumerate(word):
        if x < 0:
            return False
        if x == BETA:
            if i + 1 < len(word) and word[i + 1] == BETA:
                return False
            continue
        # find the next power, with an optional beta in between
        j = i + 1
        e = 0
        if j < len(word) and word[j] == BETA:
            e = 1
            j += 1
        if j < len(word) and word[j] != BETA and x < p * word[j] + e:
            return False
    return True


def term_key(word: tuple[int, ...], p: int) -> tuple:
    """Deterministic order: plain tails first, then Bockstein tails; lex within."""
    try:
        seq = word_to_sequence(word, p)
    except SteenrodError:
        # only raw, not-yet-normalized words contain beta beta
        return (True, (), word)
    return (bool(seq) and seq[-1] == 1, seq)


# ---------------------------------------------------------------------------
# Adem relations


def _adem2(a: int, b: int) -> dict[tuple[int, ...], int]:
    out: dict[tuple[int, ...], int] = {}
    for c in range(a // 2 + 1):
        if binom(b - c - 1, a - 2 * c, 2):
            w = tuple(x for x in (a + b - c, c) if x)
            out[w] = out.get(w, 0) ^ 1
    return {w: 1 for w, v in out.items() if v}


def _adem_pp(a: int, b: int, p: int) -> dict[tuple[int, ...], int]:
    out: dict[tuple[int, ...], int] = {}
    for i in range(a // p + 1):
        c = (-1) ** (a + i) * binom((p - 1) * (b - i) - 1, a - p * i, p)
        if c % p:
            w = tuple(x for x in (a + b - i, i) if x)
            out[w] = (out.get(w, 0) + c) % p
    return {w: c for w, c in out.items() if c}


def _adem_pbp(a: int, b: int, p: int) -> dict[tuple[int, ...], int]:
    out: dict[tuple[int, ...], int] = {}
    for i in range(a // p + 1):
        c1 = (-1) ** (a + i) * binom((p - 1) * (b - i), a - p * i, p)
        if c1 % p:
            w = (BETA, a + b - i) + ((i,) if i else ())
            out[w] = (out.get(w, 0) + c1) % p
        c2 = (-1) ** (a + i + 1) * binom((p - 1) * (b - i) - 1, a - p * i - 1, p)
        if c2 % p:
            w = (a + b - i, BETA) + ((i,) if i else ())
            out[w] = (out.get(w, 0) + c2) % p
    return {w: c for w, c in out.items() if c}


def _first_violation(word: tuple[int, ...], p: int):
    """(start, length, replacement) for the first non-admissible spot, or None."""
    if p == 2:
        for i in range(len(word) - 1):
            a, b = word[i], word[i + 1]
            if a < 2 * b:
                return i, 2, _adem2(a, b)
        return None
    for i in range(len(word) - 1):
        x, y = word[i], word[i + 1]
        if x == BETA and y == BETA:
            return i, 2, {}
        if x != BETA and y != BETA and x < p * y:
            return i, 2, _adem_pp(x, y, p)
        if x != BETA and y == BETA and i + 2 < len(word):
            z = word[i + 2]
            if z != BETA and x <= p * z:
                return i, 3, _adem_pbp(x, z, p)
    return None


@lru_cache(maxsize=None)
def normalize_word(word: tuple[int, ...], p: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Admissible expansion of a word; canonical tuple of (word, coeff)."""
    if p == 2:
        word = tuple(x for x in word if x != 0)
    hit = _first_violation(word, p)
    if hit is None:
        return ((word, 1),)
    i, ln, repl = hit
    acc: dict[tuple[int, ...], int] = {}
    for w, c in repl.items():
        for w2, c2 in normalize_word(word[:i] + w + word[i + ln :], p):
            acc[w2] = (acc.get(w2, 0) + c * c2) % p
    items = [(w, c) for w, c in acc.items() if c]
    items.sort(key=lambda t: term_key(t[0], p))
    return tuple(items)


# ---------------------------------------------------------------------------
# monomials and elements


@dataclass(frozen=True)
class Monomial:
    p: int
    word: tuple[int, ...] = ()
    source: Source = FUND

    def __post_init__(self):
        if self.p == 2 and any(x <= 0 for x in self.word):
            raise SteenrodError("Sq indices must be positive")
        if self.p != 2 and any(x < 0 for x in self.word):
            raise SteenrodError("P indices must be positive")

    @property
    def degree(self) -> int:
        return word_degree(self.word, self.p) + self.source.degree()

    @property
    def sequence(self) -> tuple[int, ...]:
        return word_to_sequence(self.word, self.p)

    def __str__(self) -> str:
        return format_monomial(self)


def degree(m: Monomial) -> int:
    return m.degree


def is_admissible(m: Monomial) -> bool:
    return word_is_admissible(m.word, m.p)


def monomial_excess(m: Monomial) -> int:
    return excess(m.sequence, m.p)


@dataclass(frozen=True)
class SteenrodElement:
    """Homogeneous F_p-combination of admissible monomials on a common source."""

    p: int
    terms: tuple[tuple[tuple[int, ...], int], ...] = ()
    source: Source = FUND
    deg: int | None = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, p: int, d: Mapping[tuple[int, ...], int], source: Source = FUND) -> "SteenrodElement":
        items = []
        for w, c in d.items():
            c %= p
            if not c:
                continue
            if source.kills_bockstein() and w and w[-1] == (1 if p == 2 else BETA):
                continue
            items.append((w, c))
        items.sort(key=lambda t: term_key(t[0], p))
        degs = {word_degree(w, p) for w, _ in items}
        if len(degs) > 1:
            raise SteenrodError("inhomogeneous element")
        deg = degs.pop() + source.degree() if degs else None
        return cls(p, tuple(items), source, deg)

    @classmethod
    def identity(cls, p: int) -> "SteenrodElement":
        return cls(p, (((), 1),), FUND, 0)

    @classmethod
    def zero(cls, p: int, source: Source = FUND) -> "SteenrodElement":
        return cls(p, (), source, None)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int | None:
        return self.deg

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return dict(self.terms)

    def monomials(self) -> list[Monomial]:
        return [Monomial(self.p, w, self.source) for w, _ in self.terms]

    def __add__(self, other: "SteenrodElement") -> "SteenrodElement":
        _check_same(self, other)
        if self.source != other.source and self.terms and other.terms:
            raise SteenrodError("cannot add elements on different sources")
        src = self.source if self.terms else other.source
        d = self.as_dict()
        for w, c in other.terms:
            d[w] = d.get(w, 0) + c
        return SteenrodElement.from_dict(self.p, d, src)

    def __neg__(self) -> "SteenrodElement":
        return self.scale(-1)

    def __sub__(self, other: "SteenrodElement") -> "SteenrodElement":
        return self + (-other)

    def scale(self, c: int) -> "SteenrodElement":
        return SteenrodElement.from_dict(self.p, {w: c * v for w, v in self.terms}, self.source)

    def __mul__(self, other: "SteenrodElement") -> "SteenrodElement":
        return multiply(self, other)

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return "SteenrodElement(%r, p=%d)" % (str(self), self.p)


def _check_same(a, b):
    if a.p != b.p:
        raise SteenrodError("mixed primes %d and %d" % (a.p, b.p))


def adem_normalize(c, p: int | None = None) -> SteenrodElement:
    """Rewrite a monomial, a raw word, or an element into admissible form."""
    if isinstance(c, SteenrodElement):
        items, src, p = c.terms, c.source, c.p
    elif isinstance(c, Monomial):
        items, src, p = ((c.word, 1),), c.source, c.p
    elif isinstance(c, str):
        return adem_normalize(parse_element(c, p))
    else:
        if p is None:
            raise SteenrodError("prime required for a raw word")
        items, src = ((tuple(c), 1),), FUND
    acc: dict[tuple[int, ...], int] = {}
    for w, k in items:
        for w2, k2 in normalize_word(tuple(w), p):
            acc[w2] = (acc.get(w2, 0) + k * k2) % p
    if not any(acc.values()):
        return SteenrodElement.zero(p, src)
    return SteenrodElement.from_dict(p, acc, src)


def multiply(a: SteenrodElement, b: SteenrodElement) -> SteenrodElement:
    """Composite a∘b, normalized."""
    _check_same(a, b)
    if a.source != FUND and a.terms:
        raise SteenrodError("left factor must be a bare operation")
    acc: dict[tuple[int, ...], int] = {}
    for w1, c1 in a.terms:
        for w2, c2 in b.terms:
            for w, c in normalize_word(w1 + w2, a.p):
                acc[w] = (acc.get(w, 0) + c1 * c2 * c) % a.p
    if not any(acc.values()):
        return SteenrodElement.zero(a.p, b.source)
    return SteenrodElement.from_dict(a.p, acc, b.source)


def op(text: str, p: int | None = None) -> SteenrodElement:
    """Shorthand: parse and normalize."""
    return adem_normalize(parse_element(text, p))


# ---------------------------------------------------------------------------
# enumeration


def _sequences(p: int, d: int, bound: int | None) -> Iterator[tuple[int, ...]]:
    """All admissible degree-indexed sequences of total degree d whose first
    entry is at most ``bound``."""
    if d == 0:
        yield ()
        return
    q = 2 * (p - 1)
    top = d if bound is None else min(d, bound)
    for i in range(1, top + 1):
        if p != 2 and i % q not in (0, 1):
            continue
        for rest in _sequences(p, d - i, i // p):
            yield (i,) + rest


def admissible_sequences(p: int, d: int) -> list[tuple[int, ...]]:
    seqs = list(_sequences(p, d, None))
    seqs.sort(key=lambda s: (bool(s) and s[-1] == 1, s))
    return seqs


def enumerate_admissible(
    p: int,
    d: int,
    max_excess: int | None = None,
    tail: str | tuple = "any",
) -> list[Monomial]:
    """Admissible monomials of degree d.

    ``max_excess`` is a strict bound e(I) < max_excess.  ``tail`` is
      "any"           keep every sequence
      "no_one"        drop sequences ending in 1 (classes reduced from Z)
      ("bock", m)     replace a trailing 1 by the Bockstein d_m (m >= 2),
                      keep the rest as reductions of a Z/p^m class
    The result is complete, duplicate-free and deterministically ordered.
    """
    out = []
    for s in admissible_sequences(p, d):
        if max_excess is not None and excess(s, p) >= max_excess:
            continue
        ends_one = bool(s) and s[-1] == 1
        if tail == "any":
            out.append(Monomial(p, sequence_to_word(s, p), FUND))
        elif tail == "no_one":
            if not ends_one:
                out.append(Monomial(p, sequence_to_word(s, p), RED_Z))
        elif isinstance(tail, tuple) and tail[0] == "bock":
            m = tail[1]
            if m == 1:
                out.append(Monomial(p, sequence_to_word(s, p), FUND))
            elif ends_one:
                out.append(Monomial(p, sequence_to_word(s[:-1], p), Source("bock", m)))
            else:
                out.append(Monomial(p, sequence_to_word(s, p), Source("red", m)))
        else:
            raise SteenrodError("unknown tail rule %r" % (tail,))
    return out


# ---------------------------------------------------------------------------
# text syntax:  "Sq5 Sq2 r2", "b1 P1 r3", "Sq5 + Sq4 Sq1", "2 P2"

_TOKEN = re.compile(r"^(Sq|P|b|r)(\d+)$")


def _prime_power(n: int) -> tuple[int, int] | None:
    for q in range(2, n + 1):
        if n % q == 0:
            m = 0
            k = n
            while k % q == 0:
                k //= q
                m += 1
            return (q, m) if k == 1 else None
    return None


def parse_monomial(text: str, p: int | None = None) -> Monomial:
    toks = text.split()
    if toks == ["1"]:
        toks = []
    letters: list[tuple[str, int]] = []
    for t in toks:
        mt = _TOKEN.match(t)
        if not mt:
            raise SteenrodError("bad token %r in %r" % (t, text))
        letters.append((mt.group(1), int(mt.group(2))))
    implied = set()
    for kind, n in letters:
        if kind == "Sq":
            implied.add(2)
        elif kind == "P":
            implied.add("odd")
        elif kind == "r":
            pp = _prime_power(n)
            if pp is None:
                raise SteenrodError("r%d is not a prime power" % n)
            implied.add(pp[0])
    if 2 in implied and ("odd" in implied or any(isinstance(x, int) and x != 2 for x in implied)):
        raise SteenrodError("mixed-prime composite %r" % text)
    primes = {x for x in implied if isinstance(x, int)}
    if len(primes) > 1:
        raise SteenrodError("mixed-prime composite %r" % text)
    if primes:
        q = primes.pop()
        if p is not None and p != q:
            raise SteenrodError("composite %r is not over p=%d" % (text, p))
        p = q
    if p is None:
        if "odd" in implied:
            raise SteenrodError("prime of %r is ambiguous; pass p" % text)
        p = 2 if not letters or letters[0][0] != "b" else None
        if p is None:
            raise SteenrodError("prime of %r is ambiguous; pass p" % text)
    if not is_prime(p):
        raise SteenrodError("%d is not prime" % p)
    if p == 2 and "odd" in implied:
        raise SteenrodError("mixed-prime composite %r" % text)

    source = FUND
    if letters and letters[-1][0] == "r":
        n = letters.pop()[1]
        m = _prime_power(n)[1]
        source = RED_Z if m == 1 else Source("red", m)
    elif letters and letters[-1][0] == "b" and letters[-1][1] >= 2:
        source = Source("bock", letters.pop()[1])
    word: list[int] = []
    for kind, n in letters:
        if kind == "r":
            raise SteenrodError("reduction must be rightmost in %r" % text)
        if kind == "b":
            if n != 1:
                raise SteenrodError("higher Bockstein b%d must be rightmost in %r" % (n, text))
            word.append(1 if p == 2 else BETA)
        elif kind == "Sq":
            if p != 2:
                raise SteenrodError("Sq at odd prime in %r" % text)
            if n:
                word.append(n)
        else:
            if p == 2:
                raise SteenrodError("P at p=2 in %r" % text)
            if n:
                word.append(n)
    return Monomial(p, tuple(word), source)


def parse_element(text: str, p: int | None = None) -> SteenrodElement:
    text = text.strip()
    if text == "0":
        if p is None:
            raise SteenrodError("prime required for 0")
        return SteenrodElement.zero(p)
    parts = [s.strip() for s in re.split(r"\s\+\s|\s-\s", " " + text + " ")]
    signs = [1] + [(-1 if s == "-" else 1) for s in re.findall(r"\s([+-])\s", " " + text + " ")]
    acc: dict[tuple[int, ...], int] = {}
    src = None
    for part, sign in zip([s for s in parts if s], signs):
        toks = part.split()
        coeff = 1
        if toks and toks[0].lstrip("-").isdigit() and len(toks) > 1:
            coeff = int(toks[0])
            toks = toks[1:]
        m = parse_monomial(" ".join(toks), p)
        if p is None:
            p = m.p
        if src is not None and m.source != src:
            raise SteenrodError("terms on different sources in %r" % text)
        src = m.source
        acc[m.word] = acc.get(m.word, 0) + sign * coeff
    # raw (possibly inadmissible) element; callers normalize
    items = [(w, c % p) for w, c in acc.items() if c % p]
    items.sort(key=lambda t: term_key(t[0], p))
    degs = {word_degree(w, p) for w, _ in items}
    if len(degs) > 1:
        raise SteenrodError("inhomogeneous element %r" % text)
    src = src or FUND
    deg = degs.pop() + src.degree() if degs else None
    return SteenrodElement(p, tuple(items), src, deg)


def format_word(word: tuple[int, ...], p: int) -> str:
    if p == 2:
        return " ".join("Sq%d" % x for x in word)
    return " ".join("b1" if x == BETA else "P%d" % x for x in word)


def format_source(src: Source, p: int) -> str:
    if src.kind == "red":
        return "r%d" % (p if src.m == 0 else p**src.m)
    if src.kind == "bock":
        return "b%d" % src.m
    return ""


def format_monomial(m: Monomial) -> str:
    s = " ".join(x for x in (format_word(m.word, m.p), format_source(m.source, m.p)) if x)
    return s or "1"


def format_element(e: SteenrodElement) -> str:
    if not e.terms:
        return "0"
    parts = []
    for w, c in e.terms:
        body = format_monomial(Monomial(e.p, w, e.source))
        parts.append(body if c == 1 else "%d %s" % (c, body))
    return " + ".join(parts)
