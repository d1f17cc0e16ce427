"""Serre spectral sequences of fibrations K(A, n) -> X -> B in a degree window.

The E_2 page H*(B) (x) H*(F) is modelled by a filtered differential algebra:
the base cohomology tensored with a simple system of transgressive fiber
generators, d(z) = tau(z) on generators and the Leibniz rule on products.
Filtering by base degree gives the spectral sequence; every page is computed
exactly from the filtered complex, so nothing is chosen by hand.

Fiber generators a.iota transgress to a.theta.  At p = 2 the squares z^(2^j)
are added to the simple system and transgress by Kudo's rule
tau(z^2) = Sq^|z| tau(z).  At odd p the analogous rule involves extra
differentials on y^(p-1) (x) tau(y); windows in which y^p would appear for an
even generator y are refused.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import yaml

from .config import check_keys
from .em import Coefficients, EMRing, Generator, WindowError, unstable_ring_generators
from .linalg import Subspace, kernel, solve, unit
from .steenrod import BETA, format_word, letter_degree, parse_element
from .tables import Table

Vec = list[int]


class SpecError(ValueError):
    """The fibration description is inconsistent or incomplete."""


class UnknownStructure(SpecError):
    """A product or Steenrod operation on the base is needed but not known."""


def _add(p: int, *vs: Sequence[int]) -> Vec:
    out = [0] * len(vs[0])
    for v in vs:
        out = [(a + b) % p for a, b in zip(out, v)]
    return out


def _scale(p: int, c: int, v: Sequence[int]) -> Vec:
    return [(c * x) % p for x in v]


# ---------------------------------------------------------------------------
# base algebras


class BaseAlgebra:
    """Mod-p cohomology of the base up to ``max_degree``: labelled bases, products, Steenrod letters."""

    p: int
    max_degree: int

    def labels(self, n: int) -> list[str]:
        raise NotImplementedError

    def dim(self, n: int) -> int:
        return len(self.labels(n)) if 0 <= n <= self.max_degree else 0

    def mul(self, n1: int, v1: Sequence[int], n2: int, v2: Sequence[int]) -> Vec:
        raise NotImplementedError

    def act_letter(self, letter: int, n: int, v: Sequence[int]) -> Vec:
        raise NotImplementedError

    def act_word(self, word: Sequence[int], n: int, v: Sequence[int]) -> Vec:
        for letter in reversed(word):
            if not any(v):
                return [0] * self.dim(n + sum(letter_degree(x, self.p) for x in word))
            v = self.act_letter(letter, n, v)
            n += letter_degree(letter, self.p)
        return list(v)

    def vector(self, n: int, text: str) -> Vec:
        """Coordinates of a sum of basis labels (``a + b``, ``2 a``), or ``0``."""
        v = [0] * self.dim(n)
        text = text.strip()
        if text == "0":
            return v
        labs = self.labels(n)
        for term in text.split(" + "):
            c, lab = 1, term.strip()
            head, _, rest = lab.partition(" ")
            if head.isdigit() and rest:
                c, lab = int(head), rest
            if lab not in labs:
                raise SpecError("%r is not a basis class of degree %d" % (lab, n))
            i = labs.index(lab)
            v[i] = (v[i] + c) % self.p
        return v

    def find_degree(self, label: str) -> int:
        for n in range(self.max_degree + 1):
            if label in self.labels(n):
                return n
        raise SpecError("no basis class %r" % label)

    def label(self, n: int, v: Sequence[int]) -> str:
        parts = []
        for c, lab in zip(v, self.labels(n)):
            if c:
                parts.append(lab if c == 1 else "%d %s" % (c, lab))
        return " + ".join(parts) if parts else "0"


class EMBase(BaseAlgebra):
    """Base given by the cohomology ring of an Eilenberg-MacLane space."""

    def __init__(self, ring: EMRing):
        self.ring = ring
        self.p = ring.p
        self.max_degree = ring.max_degree
        self._basis: dict[int, list] = {}

    @classmethod
    def build(cls, coeff: Coefficients, q: int, p: int, max_degree: int) -> "EMBase":
        return cls(EMRing.eilenberg_maclane(coeff, q, p, max_degree))

    def _monos(self, n: int) -> list:
        if n not in self._basis:
            self._basis[n] = self.ring.basis(n) if 0 <= n <= self.max_degree else []
        return self._basis[n]

    def labels(self, n: int) -> list[str]:
        return [self.ring.mono_label(e) for e in self._monos(n)]

    def _poly(self, n: int, v: Sequence[int]) -> dict:
        return {e: c for e, c in zip(self._monos(n), v) if c}

    def _vec(self, n: int, f: dict) -> Vec:
        monos = self._monos(n)
        v = [0] * len(monos)
        for e, c in f.items():
            v[monos.index(e)] = c % self.p
        return v

    def mul(self, n1, v1, n2, v2):
        n = n1 + n2
        if n > self.max_degree:
            raise WindowError("product in degree %d above the window" % n)
        return self._vec(n, self.ring.mul(self._poly(n1, v1), self._poly(n2, v2)))

    def act_letter(self, letter, n, v):
        t = n + letter_degree(letter, self.p)
        if t > self.max_degree:
            raise WindowError("operation lands in degree %d above the window" % t)
        return self._vec(t, self.ring._act_letter(letter, self._poly(n, v)))


@dataclass
class Fact:
    text: str
    provenance: str = ""


class DeclaredBase(BaseAlgebra):
    """Base given by a declared window: basis labels, products and Steenrod operations.

    Missing facts are filled only where they are forced (target degree zero,
    the unit, instability); anything else needed by a computation raises
    :class:`UnknownStructure` naming the class.
    """

    def __init__(self, p: int, max_degree: int, classes: dict[int, list[str]]):
        self.p = p
        self.max_degree = max_degree
        self.classes = {n: list(v) for n, v in classes.items()}
        self.classes[0] = ["1"]
        seen = set()
        for n, labs in self.classes.items():
            if n > max_degree or n < 0:
                raise SpecError("class degree %d outside 0..%d" % (n, max_degree))
            for lab in labs:
                if lab in seen:
                    raise SpecError("duplicate class %r" % lab)
                seen.add(lab)
        self.products: dict[tuple[str, str], Fact] = {}
        self.actions: dict[tuple[int, str], Fact] = {}

    def labels(self, n):
        return self.classes.get(n, [])

    def declare_product(self, a: str, b: str, value: str, provenance: str = "") -> None:
        na, nb = self.find_degree(a), self.find_degree(b)
        self.vector(na + nb, value)  # validate
        self.products[(a, b)] = Fact(value, provenance)

    def declare_action(self, op: str, on: str, value: str, provenance: str = "") -> None:
        e = parse_element(op, self.p)
        if len(e.terms) != 1 or len(e.terms[0][0]) != 1:
            raise SpecError("declare single operations (Sq^k, P^k or b1), got %r" % op)
        letter = e.terms[0][0][0]
        n = self.find_degree(on)
        self.vector(n + (e.degree or 0), value)
        self.actions[(letter, on)] = Fact(value, provenance)

    def _mul_basis(self, a: str, na: int, b: str, nb: int) -> Vec:
        n = na + nb
        if n > self.max_degree:
            raise WindowError("product %s * %s in degree %d above the window" % (a, b, n))
        if a == "1":
            return self.vector(n, b)
        if b == "1":
            return self.vector(n, a)
        if not self.dim(n):
            return []
        if (a, b) in self.products:
            return self.vector(n, self.products[(a, b)].text)
        if (b, a) in self.products:
            sign = -1 if (na * nb) % 2 else 1
            return _scale(self.p, sign, self.vector(n, self.products[(b, a)].text))
        if self.p != 2 and a == b and na % 2:
            return [0] * self.dim(n)
        raise UnknownStructure("product %s * %s is not declared" % (a, b))

    def mul(self, n1, v1, n2, v2):
        n = n1 + n2
        out = [0] * self.dim(n)
        for c1, a in zip(v1, self.labels(n1)):
            if not c1:
                continue
            for c2, b in zip(v2, self.labels(n2)):
                if c2:
                    out = _add(self.p, out, _scale(self.p, c1 * c2, self._mul_basis(a, n1, b, n2)))
        return out

    def _power(self, n: int, v: Vec, k: int) -> Vec:
        acc, deg = v, n
        for _ in range(k - 1):
            acc = self.mul(deg, acc, n, v)
            deg += n
        return acc

    def _act_basis(self, letter: int, a: str, n: int) -> Vec:
        t = n + letter_degree(letter, self.p)
        if t > self.max_degree:
            raise WindowError("operation on %s lands in degree %d above the window" % (a, t))
        if not self.dim(t):
            return []
        if (letter, a) in self.actions:
            return self.vector(t, self.actions[(letter, a)].text)
        if a == "1":
            return [0] * self.dim(t)
        if self.p == 2:
            if letter > n:
                return [0] * self.dim(t)
            if letter == n:
                return self._power(n, self.vector(n, a), 2)
        elif letter != BETA:
            if 2 * letter > n:
                return [0] * self.dim(t)
            if 2 * letter == n:
                return self._power(n, self.vector(n, a), self.p)
        raise UnknownStructure("%s %s is not declared" % (format_word((letter,), self.p), a))

    def act_letter(self, letter, n, v):
        t = n + letter_degree(letter, self.p)
        out = [0] * self.dim(t)
        for c, a in zip(v, self.labels(n)):
            if c:
                out = _add(self.p, out, _scale(self.p, c, self._act_basis(letter, a, n)))
        return out

    @classmethod
    def from_dict(cls, p: int, d: dict) -> "DeclaredBase":
        check_keys(d, ("name", "max_degree", "classes", "products", "steenrod"), "base.declared", SpecError)
        for i, f in enumerate(d.get("products") or []):
            check_keys(f, ("left", "right", "value", "provenance"), "products[%d]" % i, SpecError)
        for i, f in enumerate(d.get("steenrod") or []):
            check_keys(f, ("op", "class", "value", "provenance"), "steenrod[%d]" % i, SpecError)
        try:
            classes = {int(k): [str(x) for x in v] for k, v in (d.get("classes") or {}).items()}
            b = cls(p, int(d["max_degree"]), classes)
            for f in d.get("products") or []:
                b.declare_product(str(f["left"]), str(f["right"]), str(f["value"]), str(f.get("provenance", "")))
            for f in d.get("steenrod") or []:
                b.declare_action(str(f["op"]), str(f["class"]), str(f["value"]), str(f.get("provenance", "")))
        except KeyError as exc:
            raise SpecError("declared base is missing the field %s" % exc) from None
        return b


# ---------------------------------------------------------------------------
# fibration description


@dataclass
class FiberFactor:
    coefficients: Coefficients
    degree: int
    kinvariant: str  # base class the fundamental class transgresses to
    symbol: str = "i"

    def relabel(self, label: str) -> str:
        head, _, last = label.rpartition(" ")
        own = self.symbol + str(self.degree)
        return (head + " " + own) if head else own


@dataclass
class Imported:
    source: str
    target: str
    provenance: str


@dataclass
class FibrationSpec:
    name: str
    prime: int
    base: BaseAlgebra
    fiber: list[FiberFactor]
    window: int = 13
    imported: list[Imported] = field(default_factory=list)
    names: dict[str, str] = field(default_factory=dict)
    base_description: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> "FibrationSpec":
        check_keys(d, ("name", "prime", "window", "base", "fiber", "imported_differentials", "names"), "fibration", SpecError)
        check_keys(d.get("base", {}), ("eilenberg_maclane", "declared"), "base", SpecError)
        for i, f in enumerate(d.get("fiber") or []):
            check_keys(f, ("coefficients", "degree", "kinvariant", "symbol"), "fiber[%d]" % i, SpecError)
        for i, f in enumerate(d.get("imported_differentials") or []):
            check_keys(f, ("source", "target", "provenance"), "imported_differentials[%d]" % i, SpecError)
        try:
            p = int(d["prime"])
            window = int(d.get("window", 13))
            b = d["base"]
            if "eilenberg_maclane" in b:
                em = b["eilenberg_maclane"]
                coeff = Coefficients.parse(str(em["coefficients"]))
                q = int(em["degree"])
                base: BaseAlgebra = EMBase.build(coeff, q, p, window)
                desc = "K(%s,%d)" % (coeff, q)
            elif "declared" in b:
                base = DeclaredBase.from_dict(p, b["declared"])
                desc = str(b["declared"].get("name", "declared"))
                if base.max_degree < window:
                    raise SpecError("declared base stops at degree %d, window is %d" % (base.max_degree, window))
            else:
                raise SpecError("base needs 'eilenberg_maclane' or 'declared'")
            fiber = [
                FiberFactor(
                    Coefficients.parse(str(f["coefficients"])),
                    int(f["degree"]),
                    str(f["kinvariant"]),
                    str(f.get("symbol", "i")),
                )
                for f in d.get("fiber") or []
            ]
            imported = []
            for f in d.get("imported_differentials") or []:
                prov = str(f.get("provenance", "")).strip()
                if not prov:
                    raise SpecError("imported differential on %s needs a provenance" % f.get("source"))
                imported.append(Imported(str(f["source"]), str(f["target"]), prov))
            names = {str(k): str(v) for k, v in (d.get("names") or {}).items()}
        except KeyError as exc:
            raise SpecError("fibration spec is missing the field %s" % exc) from None
        return cls(str(d.get("name", "")), p, base, fiber, window, imported, names, desc)

    @classmethod
    def load(cls, path: str | Path) -> "FibrationSpec":
        return cls.from_dict(yaml.safe_load(Path(path).read_text()))

    @classmethod
    def parse(cls, text: str) -> "FibrationSpec":
        return cls.from_dict(yaml.safe_load(text))


@dataclass
class SimpleGenerator:
    """One member of the simple system of fiber generators."""

    label: str
    degree: int
    exterior: bool
    tau: Vec  # in base degree degree + 1
    rule: str
    provenance: str = ""
    order: tuple = ()


def fiber_generators(spec: FibrationSpec) -> list[SimpleGenerator]:
    p, top, base = spec.prime, spec.window, spec.base
    imported = {f.source: f for f in spec.imported}
    used: set[str] = set()
    out: list[SimpleGenerator] = []
    for fi, fac in enumerate(spec.fiber):
        q = fac.degree
        if fac.coefficients.order == 0 and q < 2:
            raise SpecError("fiber K(Z,%d) is not handled" % q)
        theta = base.vector(q + 1, fac.kinvariant)
        bock: dict[int, Vec] = {}
        gens: list[Generator] = unstable_ring_generators(fac.coefficients, q, p, top)
        for gi, g in enumerate(gens):
            label = fac.relabel(g.label)
            n = g.degree
            prov = ""
            if n + 1 > top:
                # transgresses above the window; never used by the complex
                out.append(SimpleGenerator(label, n, p == 2 or n % 2 == 1, [], "window-limited", "", (n, 0, fi, gi)))
                used.add(label)
                continue
            if label in imported:
                f = imported[label]
                tau = base.vector(n + 1, f.target)
                rule, prov = "imported", f.provenance
                used.add(label)
                if g.source.kind == "bock" and not g.word:
                    bock[fi] = tau
            elif g.source.kind == "bock":
                if fi not in bock:
                    raise SpecError(
                        "%s transgresses to a higher Bockstein of %s; declare it as an imported differential"
                        % (label, fac.kinvariant)
                    )
                tau = base.act_word(g.word, q + 2, bock[fi])
                rule = "Steenrod-commutation"
            else:
                tau = base.act_word(g.word, q + 1, theta)
                rule = "Steenrod-commutation" if g.word else "transgression"
            exterior = p == 2 or n % 2 == 1
            if not exterior and p * n <= top:
                raise WindowError(
                    "%s^%d lies in the window (degree %d); odd-prime Kudo transgression is not modelled" % (label, p, p * n)
                )
            out.append(SimpleGenerator(label, n, exterior, tau, rule, prov, (n, 0, fi, gi)))
            if p == 2:
                sq, d, t, j = label, n, tau, 1
                while 2 * d <= top:
                    t = base.act_letter(d, d + 1, t) if 2 * d < top else []
                    d *= 2
                    sq = "(%s)^%d" % (label, 2**j)
                    rule = "Kudo" if d < top else "window-limited"
                    out.append(SimpleGenerator(sq, d, True, t, rule, "", (d, 1, fi, gi)))
                    j += 1
    unknown = set(imported) - used
    if unknown:
        raise SpecError("imported differentials on unknown fiber classes: %s" % ", ".join(sorted(unknown)))
    out.sort(key=lambda g: g.order)
    return out


# ---------------------------------------------------------------------------
# the filtered complex


def _fiber_monomials(gens: list[SimpleGenerator], t: int) -> list[tuple[int, ...]]:
    n = len(gens)
    out: list[tuple[int, ...]] = []

    def rec(i: int, left: int, acc: list[int]) -> None:
        if left == 0:
            out.append(tuple(acc + [0] * (n - i)))
            return
        if i == n:
            return
        d = gens[i].degree
        cap = left // d
        if gens[i].exterior:
            cap = min(cap, 1)
        for k in range(cap, -1, -1):
            rec(i + 1, left - k * d, acc + [k])

    rec(0, t, [])
    # single generators first, in generator order, then products
    return sorted(out, key=lambda e: (sum(e) != 1, [-x for x in e]))


def _mono_label(gens: list[SimpleGenerator], e: tuple[int, ...]) -> str:
    parts = []
    for i in range(len(e) - 1, -1, -1):
        if e[i] == 1:
            parts.append(gens[i].label)
        elif e[i] > 1:
            parts.append("(%s)^%d" % (gens[i].label, e[i]))
    return " * ".join(parts) if parts else "1"


@dataclass(frozen=True)
class Cell:
    s: int  # base degree = filtration
    b: int  # base basis index
    e: tuple[int, ...]  # fiber monomial


class FilteredComplex:
    """Total complex H*(B) (x) Lambda[simple system] with its base-degree filtration."""

    def __init__(self, spec: FibrationSpec):
        self.spec = spec
        self.p = spec.prime
        self.top = spec.window
        self.base = spec.base
        self.gens = fiber_generators(spec)
        self.fiber_basis = {t: _fiber_monomials(self.gens, t) for t in range(self.top + 1)}
        self.cells: dict[int, list[Cell]] = {}
        self.index: dict[int, dict[Cell, int]] = {}
        for n in range(self.top + 1):
            cells = [
                Cell(s, b, e)
                for s in range(n + 1)
                for b in range(self.base.dim(s))
                for e in self.fiber_basis[n - s]
            ]
            self.cells[n] = cells
            self.index[n] = {c: i for i, c in enumerate(cells)}
        # d: C^n -> C^{n+1}, column j is the image of cell j
        self.d: dict[int, list[Vec]] = {n: [self._d_cell(n, c) for c in self.cells[n]] for n in range(self.top)}

    def dim(self, n: int) -> int:
        return len(self.cells.get(n, []))

    def filtration(self, n: int) -> list[int]:
        return [c.s for c in self.cells[n]]

    def _d_cell(self, n: int, c: Cell) -> Vec:
        p = self.p
        out = [0] * self.dim(n + 1)
        prec = 0
        sign_b = -1 if c.s % 2 else 1
        for k in range(len(c.e) - 1, -1, -1):
            ek = c.e[k]
            if not ek:
                continue
            g = self.gens[k]
            coeff = ek * sign_b * (-1 if (prec * g.degree) % 2 else 1)
            prec += ek * g.degree
            if coeff % p == 0 or not any(g.tau):  # tau == [] only above the window
                continue
            tgt_s = c.s + g.degree + 1
            if tgt_s > self.top:
                raise WindowError("differential on %s leaves the window" % self.cell_label(n, c))
            prod = self.base.mul(c.s, unit(self.base.dim(c.s), c.b), g.degree + 1, g.tau)
            e2 = list(c.e)
            e2[k] -= 1
            e2 = tuple(e2)
            idx = self.index[n + 1]
            for bi, x in enumerate(prod):
                if x:
                    j = idx[Cell(tgt_s, bi, e2)]
                    out[j] = (out[j] + coeff * x) % p
        return out

    def apply(self, n: int, v: Sequence[int]) -> Vec:
        out = [0] * self.dim(n + 1)
        for c, col in zip(v, self.d[n]):
            if c:
                out = [(a + c * b) % self.p for a, b in zip(out, col)]
        return out

    def cell_label(self, n: int, c: Cell) -> str:
        return self.gr_label(n, c.s, [1 if x == c else 0 for x in self.cells[n]])

    def gr_label(self, n: int, s: int, v: Sequence[int]) -> str:
        """Label of the filtration-s part of a vector of C^n."""
        terms: dict[int, list[tuple[int, tuple]]] = {}
        for c, x in zip(self.cells[n], v):
            if x and c.s == s:
                terms.setdefault(c.b, []).append((x, c.e))
        if not terms:
            return "0"
        if n == 0:
            return "1"
        blabs = self.base.labels(s)

        def fib(items):
            return " + ".join(
                (_mono_label(self.gens, e) if x == 1 else "%d %s" % (x, _mono_label(self.gens, e))) for x, e in items
            )

        if s == 0:
            return "[%s]" % fib(terms[0])
        if n == s:
            parts = [(blabs[b] if items[0][0] == 1 else "%d %s" % (items[0][0], blabs[b])) for b, items in sorted(terms.items())]
            return "p* " + (parts[0] if len(parts) == 1 else "(%s)" % " + ".join(parts))
        return " + ".join("p* %s * [%s]" % (blabs[b], fib(items)) for b, items in sorted(terms.items()))

    def check_d_squared(self) -> list[str]:
        bad = []
        for n in range(self.top - 1):
            for j, col in enumerate(self.d[n]):
                if any(self.apply(n + 1, col)):
                    bad.append(self.cell_label(n, self.cells[n][j]))
        return bad


# ---------------------------------------------------------------------------
# pages


@dataclass
class BigradedPage:
    """One page in the window: (s, t) -> basis labels.  Total degree ``window`` is left out."""

    r: int
    window: int
    entries: dict[tuple[int, int], list[str]]

    def dim(self, s: int, t: int) -> int:
        return len(self.entries.get((s, t), []))

    def dims(self) -> dict[tuple[int, int], int]:
        return {k: len(v) for k, v in self.entries.items() if v}

    def total(self, n: int) -> int:
        return sum(len(v) for (s, t), v in self.entries.items() if s + t == n)


@dataclass(frozen=True)
class Differential:
    r: int
    source: tuple[int, int]
    source_label: str
    target: tuple[int, int]
    target_label: str
    rule: str  # transgression | Steenrod-commutation | Kudo | imported | Leibniz

    def __str__(self) -> str:
        return "d%d: %s -> %s  (%s)" % (self.r, self.source_label, self.target_label, self.rule)


class SpectralSequence:
    """Pages of the filtered complex, computed from cycles and boundaries."""

    def __init__(self, cx: FilteredComplex):
        self.cx = cx
        self.p = cx.p
        self.top = cx.top
        self._z: dict = {}
        self._gr = {
            (n, s): [i for i, c in enumerate(cx.cells[n]) if c.s == s] for n in cx.cells for s in range(n + 1)
        }

    def gr_index(self, n: int, s: int) -> list[int]:
        return self._gr.get((n, s), [])

    def proj(self, n: int, s: int, v: Sequence[int]) -> Vec:
        return [v[i] for i in self.gr_index(n, s)]

    def embed(self, n: int, s: int, g: Sequence[int]) -> Vec:
        v = [0] * self.cx.dim(n)
        for i, x in zip(self.gr_index(n, s), g):
            v[i] = x
        return v

    def Z(self, r: int, s: int, n: int) -> list[Vec]:
        """Basis of {x in F^s C^n : dx in F^(s+r)}, for n < window."""
        lo, hi = max(s, 0), s + r
        key = (lo, hi, n)
        if key not in self._z:
            cx = self.cx
            cols = [j for j, c in enumerate(cx.cells[n]) if c.s >= lo]
            rows = [i for i, c in enumerate(cx.cells[n + 1]) if c.s < hi]
            sub = [[cx.d[n][j][i] for i in rows] for j in cols]
            ker = kernel(sub, len(rows), self.p)
            out = []
            for k in ker:
                v = [0] * cx.dim(n)
                for j, x in zip(cols, k):
                    v[j] = x
                out.append(v)
            self._z[key] = out
        return self._z[key]

    def zbar(self, r: int, s: int, n: int) -> Subspace:
        return Subspace(len(self.gr_index(n, s)), self.p, [self.proj(n, s, v) for v in self.Z(r, s, n)])

    def bbar(self, r: int, s: int, n: int) -> Subspace:
        """Image in gr^s C^n of d(Z_(r-1)^(s-r+1)) from degree n - 1."""
        dim = len(self.gr_index(n, s))
        if n == 0:
            return Subspace(dim, self.p)
        imgs = [self.cx.apply(n - 1, v) for v in self.Z(r - 1, s - r + 1, n - 1)]
        return Subspace(dim, self.p, [self.proj(n, s, y) for y in imgs])

    def lift(self, r: int, s: int, n: int, g: Sequence[int]) -> Vec:
        zs = self.Z(r, s, n)
        x = solve([self.proj(n, s, v) for v in zs], g, self.p)
        if x is None:
            raise AssertionError("class does not lift to Z_r")
        out = [0] * self.cx.dim(n)
        for c, v in zip(x, zs):
            if c:
                out = [(a + c * b) % self.p for a, b in zip(out, v)]
        return out

    def dim(self, r: int, s: int, n: int) -> int:
        return self.zbar(r, s, n).dim - self.bbar(r, s, n).dim

    def basis(self, r: int, s: int, n: int) -> list[Vec]:
        """Representatives (in gr^s coordinates) of a basis of E_r^(s, n-s)."""
        k = self.bbar(r, s, n)
        return [list(v) for v in self.zbar(r, s, n).rows if k.add(v)]


@dataclass
class SSResult:
    spec: FibrationSpec
    e2: BigradedPage
    e_inf: BigradedPage
    log: list[Differential]
    pages: dict[int, dict[tuple[int, int], int]]  # r -> dims, for r >= 2
    limited: list[tuple[int, int]]  # E_2 entries of total degree = window, not resolved
    problems: list[str] = field(default_factory=list)


def _gen_rule(cx: FilteredComplex, n: int, s: int, r: int, g: Sequence[int], ss: SpectralSequence) -> str:
    if s != 0 or sum(1 for x in g if x) != 1:
        return "Leibniz"
    i = ss.gr_index(n, 0)[next(k for k, x in enumerate(g) if x)]
    e = cx.cells[n][i].e
    if sum(e) != 1:
        return "Leibniz"
    gen = cx.gens[e.index(1)]
    return gen.rule if r == gen.degree + 1 else "Leibniz"


def build_e2(spec: FibrationSpec, cx: FilteredComplex | None = None) -> BigradedPage:
    cx = cx or FilteredComplex(spec)
    entries: dict[tuple[int, int], list[str]] = {}
    for n in range(cx.top):
        for c in cx.cells[n]:
            entries.setdefault((c.s, n - c.s), []).append(cx.cell_label(n, c))
    return BigradedPage(2, cx.top, entries)


def run_differentials(spec: FibrationSpec) -> SSResult:
    cx = FilteredComplex(spec)
    ss = SpectralSequence(cx)
    top, p = cx.top, cx.p
    e2 = build_e2(spec, cx)
    log: list[Differential] = []
    pages: dict[int, dict[tuple[int, int], int]] = {}
    problems: list[str] = []
    last = top + 1
    for r in range(2, last + 1):
        pages[r] = {(s, n - s): ss.dim(r, s, n) for n in range(top) for s in range(n + 1) if ss.dim(r, s, n)}
        if r == last:
            break
        for n in range(top):
            for s in range(n + 1):
                zr, zr1, br = ss.zbar(r, s, n), ss.zbar(r + 1, s, n), ss.bbar(r, s, n)
                if zr.dim == zr1.dim:
                    continue
                keep = Subspace(zr.n, p, br.rows + zr1.rows)
                sources = [list(v) for v in zr.rows if keep.add(v)]
                tb = ss.bbar(r, s + r, n + 1)
                before = tb.dim
                for g in sources:
                    x = ss.lift(r, s, n, g)
                    y = cx.apply(n, x)
                    tg = ss.proj(n + 1, s + r, y)
                    if not tb.add(tg):
                        problems.append("d%d of %s vanishes in E_%d" % (r, cx.gr_label(n, s, x), r))
                    if n + 1 < top and not ss.zbar(r, s + r, n + 1).contains(tg):
                        problems.append("d%d of %s is not a d%d-cycle" % (r, cx.gr_label(n, s, x), r))
                    log.append(
                        Differential(
                            r,
                            (s, n - s),
                            cx.gr_label(n, s, x),
                            (s + r, n - s - r + 1),
                            cx.gr_label(n + 1, s + r, y),
                            _gen_rule(cx, n, s, r, g, ss),
                        )
                    )
                if n + 1 < top and ss.bbar(r + 1, s + r, n + 1).dim != before + len(sources):
                    problems.append("page %d: boundaries at (%d, %d) do not match d%d" % (r + 1, s + r, n - s - r + 1, r))
        # Euler accounting per entry
        for n in range(top):
            for s in range(n + 1):
                out = ss.zbar(r, s, n).dim - ss.zbar(r + 1, s, n).dim
                inn = ss.bbar(r + 1, s, n).dim - ss.bbar(r, s, n).dim
                if ss.dim(r + 1, s, n) != ss.dim(r, s, n) - out - inn:
                    problems.append("page %d: dimension bookkeeping fails at (%d, %d)" % (r + 1, s, n - s))
    entries: dict[tuple[int, int], list[str]] = {}
    for n in range(top):
        for s in range(n + 1):
            reps = ss.basis(last, s, n)
            if reps:
                entries[(s, n - s)] = [cx.gr_label(n, s, ss.embed(n, s, g)) for g in reps]
    limited = sorted({(c.s, top - c.s) for c in cx.cells[top]})
    if problems:
        raise AssertionError("; ".join(problems))
    return SSResult(spec, e2, BigradedPage(last, top, entries), log, pages, limited, problems)


def replay(log: Sequence[Differential], e2: BigradedPage) -> dict[tuple[int, int], int]:
    """E_infinity dimensions obtained by removing both ends of every logged differential."""
    dims = dict(e2.dims())
    for d in log:
        for pos in (d.source, d.target):
            if sum(pos) < e2.window:
                dims[pos] = dims.get(pos, 0) - 1
    return {k: v for k, v in dims.items() if v}


def read_off_total(result: SSResult, max_degree: int | None = None) -> Table:
    """Per total degree: dimension of H^n(X; F_p) and associated-graded representatives."""
    e = result.e_inf
    top = e.window - 1 if max_degree is None else max_degree
    if top >= e.window:
        raise WindowError("degree %d is window-limited (window %d)" % (top, e.window))
    names = result.spec.names
    rows = []
    for n in range(top + 1):
        items = []
        for s in range(n, -1, -1):
            for lab in e.entries.get((s, n - s), []):
                items.append("%s = %s" % (names[lab], lab) if lab in names else lab)
        if n == 0:
            continue
        rows.append([str(n), str(len(items)), ", ".join(items)])
    title = "H*(%s; F_%d)" % (result.spec.name or "total space", result.spec.prime)
    notes = ["degree %d and above: window-limited" % e.window]
    return Table(["degree", "dimension", "generators"], rows, title, notes)


def e_infinity_table(result: SSResult) -> Table:
    rows = []
    for (s, t), labs in sorted(result.e_inf.entries.items(), key=lambda kv: (sum(kv[0]), -kv[0][0])):
        rows.append([str(s + t), str(s), str(t), ", ".join(labs)])
    return Table(["degree", "s", "t", "classes"], rows, "E_infinity")


def log_table(result: SSResult) -> Table:
    rows = [
        [str(d.r), "(%d,%d)" % d.source, d.source_label, "(%d,%d)" % d.target, d.target_label, d.rule]
        for d in result.log
    ]
    return Table(["page", "source", "class", "target", "image", "rule"], rows, "Differentials")


def chart(page: BigradedPage) -> str:
    """Fixed-width grid: one dot per basis element at (s, t)."""
    dims = page.dims()
    if not dims:
        return ""
    smax = max(s for s, _ in dims)
    tmax = max(t for _, t in dims)
    w = max(2, max(dims.values()) + 1)
    lines = []
    for t in range(tmax, -1, -1):
        cells = [("." * dims.get((s, t), 0)).ljust(w) for s in range(smax + 1)]
        lines.append((("%2d | " % t) + "".join(cells)).rstrip())
    lines.append("   +" + "-" * (w * (smax + 1)))
    lines.append(("     " + "".join(str(s).ljust(w) for s in range(smax + 1))).rstrip())
    return "\n".join(lines) + "\n"
