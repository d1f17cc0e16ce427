"""Integer cohomology rings with monomial relations, and cube-pairing checks.

A class x in degree 4 of a closed 12-manifold that lifts through the stable
Postnikov stages must satisfy x^2 = 0 mod 2 and x^3 = 0 mod 3, so the pairing
<x^3, [M]> is divisible by 6.  An unstable lift (to the 4-sphere itself) forces
x^2 = 0 and hence a zero pairing.  These are necessary conditions only.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .config import check_keys

Exp = tuple[int, ...]
Element = dict[Exp, int]

NECESSARY = "necessary-condition check: passing does not prove that a lift exists"


class RingError(ValueError):
    pass


@dataclass
class FiniteGradedRing:
    """Z[generators] modulo monomial relations, with a top-degree pairing monomial."""

    names: list[str]
    degrees: list[int]
    relations: list[Exp]
    pairing: Exp
    title: str = ""

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise RingError("one degree per generator")
        if len(set(self.names)) != len(self.names):
            raise RingError("duplicate generator names")
        if any(d <= 0 or d % 2 for d in self.degrees):
            raise RingError("generators must have positive even degree")
        if self.is_zero_monomial(self.pairing):
            raise RingError("the pairing monomial is zero in the ring")

    @property
    def fundamental_degree(self) -> int:
        return self.mono_degree(self.pairing)

    def mono_degree(self, e: Exp) -> int:
        return sum(a * d for a, d in zip(e, self.degrees))

    def is_zero_monomial(self, e: Exp) -> bool:
        return any(all(a >= r for a, r in zip(e, rel)) for rel in self.relations)

    def basis(self, n: int) -> list[Exp]:
        """Nonzero monomials of degree n (lexicographically descending exponents)."""
        if n < 0 or n > self.fundamental_degree:
            return []
        out = []
        caps = [n // d for d in self.degrees]
        for e in itertools.product(*(range(c, -1, -1) for c in caps)):
            if self.mono_degree(e) == n and not self.is_zero_monomial(e):
                out.append(tuple(e))
        return out

    def rank(self, n: int) -> int:
        return len(self.basis(n))

    # -- arithmetic -----------------------------------------------------------

    def monomial(self, e: Exp, c: int = 1) -> Element:
        return {} if c == 0 or self.is_zero_monomial(e) else {tuple(e): c}

    def gen(self, name: str) -> Element:
        i = self.names.index(name)
        return self.monomial(tuple(int(j == i) for j in range(len(self.names))))

    def add(self, *xs: Element) -> Element:
        out: Element = {}
        for x in xs:
            for e, c in x.items():
                out[e] = out.get(e, 0) + c
        return {e: c for e, c in out.items() if c}

    def scale(self, k: int, x: Element) -> Element:
        return {e: k * c for e, c in x.items()} if k else {}

    def mul(self, x: Element, y: Element) -> Element:
        out: Element = {}
        for e1, c1 in x.items():
            for e2, c2 in y.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not self.is_zero_monomial(e):
                    out[e] = out.get(e, 0) + c1 * c2
        return {e: c for e, c in out.items() if c}

    def power(self, x: Element, k: int) -> Element:
        out = self.monomial((0,) * len(self.names))
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def degree_of(self, x: Element) -> int | None:
        ds = {self.mono_degree(e) for e in x}
        if len(ds) > 1:
            raise RingError("inhomogeneous element")
        return ds.pop() if ds else None

    def element(self, degree: int, coeffs: Sequence[int]) -> Element:
        """Integer combination of the degree-n basis."""
        b = self.basis(degree)
        if len(coeffs) != len(b):
            raise RingError("degree %d has rank %d, got %d coefficients" % (degree, len(b), len(coeffs)))
        return self.add(*(self.monomial(e, c) for e, c in zip(b, coeffs)))

    def mono_label(self, e: Exp) -> str:
        parts = []
        for name, a in zip(self.names, e):
            if a == 1:
                parts.append(name)
            elif a > 1:
                parts.append("%s^%d" % (name, a))
        return "".join(parts) if parts else "1"

    def label(self, x: Element) -> str:
        if not x:
            return "0"
        deg = self.degree_of(x)
        order = {e: i for i, e in enumerate(self.basis(deg))}
        parts = []
        for e in sorted(x, key=lambda e: order.get(e, len(order))):
            c = x[e]
            m = self.mono_label(e)
            if c == 1:
                parts.append(m)
            elif c == -1:
                parts.append("-" + m)
            else:
                parts.append("%d%s" % (c, m) if m != "1" else str(c))
        return " + ".join(parts).replace("+ -", "- ")

    def parse_monomial(self, text: str) -> Exp:
        e = [0] * len(self.names)
        for tok in re.split(r"[\s*]+", text.strip()):
            if not tok or tok == "1":
                continue
            name, _, k = tok.partition("^")
            if name not in self.names:
                raise RingError("unknown generator %r" % name)
            e[self.names.index(name)] += int(k) if k else 1
        return tuple(e)

    def parse(self, text: str) -> Element:
        """Integer combination like '2u + v - w' or '3 u v'."""
        t = text.replace("-", "+-").strip()
        acc = []
        for term in t.split("+"):
            term = term.strip()
            if not term:
                continue
            m = re.fullmatch(r"(-?\d*)\s*\*?\s*(.*)", term)
            num, rest = m.group(1), m.group(2)
            c = -1 if num == "-" else int(num) if num else 1
            acc.append(self.monomial(self.parse_monomial(rest or "1"), c))
        return self.add(*acc)

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteGradedRing":
        check_keys(d, ("name", "generators", "relations", "pairing"), "ring", RingError)
        try:
            names = [str(g["name"]) for g in d["generators"]]
            degrees = [int(g["degree"]) for g in d["generators"]]
        except (KeyError, TypeError):
            raise RingError("generators need a name and a degree") from None
        proto = cls.__new__(cls)
        proto.names, proto.degrees = names, degrees
        rels = [proto.parse_monomial(str(r).split("=")[0]) for r in d.get("relations") or []]
        if "pairing" not in d:
            raise RingError("ring needs a pairing monomial")
        return cls(names, degrees, rels, proto.parse_monomial(str(d["pairing"])), str(d.get("name", "")))

    @classmethod
    def load(cls, path: str | Path) -> "FiniteGradedRing":
        return cls.from_dict(yaml.safe_load(Path(path).read_text()))


def hp1_cubed_ring() -> FiniteGradedRing:
    """H*(HP^1 x HP^1 x HP^1; Z) = Z[u, v, w]/(u^2, v^2, w^2), all of degree 4."""
    return FiniteGradedRing(
        ["u", "v", "w"], [4, 4, 4], [(2, 0, 0), (0, 2, 0), (0, 0, 2)], (1, 1, 1), "HP1 x HP1 x HP1"
    )


def truncated_polynomial_ring(degree: int, height: int, name: str = "t") -> FiniteGradedRing:
    """Z[t]/(t^height) with the pairing on t^(height - 1)."""
    return FiniteGradedRing([name], [degree], [(height,)], (height - 1,), "Z[%s]/(%s^%d)" % (name, name, height))


# ---------------------------------------------------------------------------
# checks


def _require_degree_four(ring: FiniteGradedRing, x: Element) -> None:
    d = ring.degree_of(x)
    if d not in (None, 4):
        raise RingError("x must have degree 4, got %d" % d)


def cube_pairing(ring: FiniteGradedRing, x: Element) -> int:
    d = ring.degree_of(x)
    if d is not None and 3 * d != ring.fundamental_degree:
        raise RingError("3 * %d does not equal the fundamental degree %d" % (d, ring.fundamental_degree))
    if d is None and ring.fundamental_degree % 3:
        raise RingError("the fundamental degree %d is not divisible by 3" % ring.fundamental_degree)
    return ring.power(x, 3).get(ring.pairing, 0)


@dataclass
class Verdict:
    condition: str
    holds: bool
    detail: str


@dataclass
class ObstructionReport:
    ring: str
    x: str
    verdicts: list[Verdict]
    divisibility: int | None  # None when no claim is made
    pairing: int
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ring": self.ring,
            "x": self.x,
            "verdicts": [{"condition": v.condition, "holds": v.holds, "detail": v.detail} for v in self.verdicts],
            "divisibility": self.divisibility,
            "pairing": self.pairing,
            "notes": list(self.notes),
        }

    def to_markdown(self) -> str:
        lines = ["### %s, x = %s" % (self.ring, self.x), "", "| condition | holds | detail |", "|---|---|---|"]
        for v in self.verdicts:
            lines.append("| %s | %s | %s |" % (v.condition, "yes" if v.holds else "no", v.detail))
        lines.append("")
        lines.append("- pairing <x^3, [M]> = %d" % self.pairing)
        if self.divisibility is not None:
            lines.append("- divisibility of x^3: %d" % self.divisibility)
        lines += ["- " + n for n in self.notes]
        return "\n".join(lines) + "\n"


def _mod_zero(x: Element, m: int) -> bool:
    return all(c % m == 0 for c in x.values())


def stable_divisibility_check(ring: FiniteGradedRing, x: Element) -> ObstructionReport:
    """Sq4 x = x^2 mod 2 and P2 x = x^3 mod 3 must vanish for a stable lift; then 6 | x^3."""
    _require_degree_four(ring, x)
    x2, x3 = ring.power(x, 2), ring.power(x, 3)
    pairing = x3.get(ring.pairing, 0)
    mod2, mod3 = _mod_zero(x2, 2), _mod_zero(x3, 3)
    verdicts = [
        Verdict("Sq4 x = x^2 = 0 mod 2", mod2, "x^2 = %s" % ring.label(x2)),
        Verdict("P2 x = x^3 = 0 mod 3", mod3, "x^3 = %s" % ring.label(x3)),
    ]
    primes = ([2] if mod2 else []) + ([3] if mod3 else [])
    div = math.lcm(*primes) if primes else 1
    # x^3 = x * x^2, so x^2 = 0 mod 2 gives x^3 = 0 mod 2
    if not _mod_zero(x3, div) or pairing % div:
        raise AssertionError("divisibility %d fails on x^3 = %s" % (div, ring.label(x3)))
    notes = [NECESSARY]
    if not mod2:
        notes.append("mod-2 hypothesis fails: no factor 2 claimed")
    if not mod3:
        notes.append("mod-3 hypothesis fails: no factor 3 claimed")
    return ObstructionReport(ring.title, ring.label(x), verdicts, div, pairing, notes)


def unstable_vanishing_check(ring: FiniteGradedRing, x: Element) -> ObstructionReport:
    """An unstable lift kills iota4^2, i.e. x^2 = 0 integrally, and then x^3 = 0."""
    _require_degree_four(ring, x)
    x2, x3 = ring.power(x, 2), ring.power(x, 3)
    pairing = x3.get(ring.pairing, 0)
    holds = not x2
    if holds and x3:
        raise AssertionError("x^2 = 0 but x^3 = %s" % ring.label(x3))
    detail = "x^2 = 0, so x^3 = 0" if holds else "x^2 = %s: unstable lift obstructed at the iota4^2 invariant" % ring.label(x2)
    verdicts = [Verdict("iota4^2: x^2 = 0", holds, detail)]
    return ObstructionReport(ring.title, ring.label(x), verdicts, None, pairing, [NECESSARY])


def coefficient_sweep(ring: FiniteGradedRing, bound: int = 3) -> Iterable[tuple[tuple[int, ...], bool, bool, int]]:
    """All degree-4 classes with coefficients in [-bound, bound]: (coeffs, mod-2 ok, mod-3 ok, pairing)."""
    n = ring.rank(4)
    for cs in itertools.product(range(-bound, bound + 1), repeat=n):
        x = ring.element(4, cs)
        x2, x3 = ring.power(x, 2), ring.power(x, 3)
        yield cs, _mod_zero(x2, 2), _mod_zero(x3, 3), x3.get(ring.pairing, 0)


# ---------------------------------------------------------------------------
# the HP1^3 witness


ADDITIVITY = "declared axiom: each stage operation is additive modulo its indeterminacy"


@dataclass(frozen=True)
class StageOperation:
    name: str
    prime: int
    degree: int  # degree of the k-invariant, i.e. of the operation's value on a degree-4 class


def tower_operations(towers: Sequence = ()) -> list[StageOperation]:
    """Stage operations of the shipped stable towers (or of the given TowerSpecs)."""
    from .stable import TowerSpec

    if not towers:
        d = Path(__file__).parent / "data" / "towers"
        towers = [TowerSpec.load(d / ("stable_p%d.yaml" % p)) for p in (2, 3, 5)]
    return [StageOperation(st.name or st.stage, t.prime, st.degree) for t in towers for st in t.stages]


@dataclass
class TraceStep:
    step: str
    holds: bool
    detail: str


@dataclass
class WitnessTrace:
    steps: list[TraceStep]
    pairing: int

    @property
    def holds(self) -> bool:
        return all(s.holds for s in self.steps)

    def to_markdown(self) -> str:
        lines = ["| step | holds | detail |", "|---|---|---|"]
        lines += ["| %s | %s | %s |" % (s.step, "yes" if s.holds else "no", s.detail) for s in self.steps]
        lines += ["", "- pairing <x^3, [W]> = %d" % self.pairing, "- " + NECESSARY]
        return "\n".join(lines) + "\n"


def witness_lift_argument(
    ring: FiniteGradedRing | None = None,
    x: Element | None = None,
    operations: Sequence[StageOperation] | None = None,
) -> WitnessTrace:
    """Why u + v + w on HP1^3 passes every stage, and its cube pairing."""
    ring = ring or hp1_cubed_ring()
    x = ring.parse("u + v + w") if x is None else x
    ops = list(operations) if operations is not None else tower_operations()
    factor = truncated_polynomial_ring(4, 2, "u")
    top = ring.fundamental_degree
    steps = []

    odd = [n for n in range(1, top + 1, 2) if ring.rank(n)]
    steps.append(TraceStep("odd degrees vanish", not odd, "nonzero odd degrees: %s" % (odd or "none")))
    steps.append(TraceStep("degree 6 vanishes", ring.rank(6) == 0, "rank H^6 = %d" % ring.rank(6)))

    ind = sorted({op.degree - 1 for op in ops})
    bad = {n: ring.rank(n) for n in ind if ring.rank(n)}
    steps.append(
        TraceStep(
            "indeterminacy vanishes",
            not bad,
            "ranks in degrees %s: %s" % (ind, ", ".join("%d:%d" % (n, ring.rank(n)) for n in ind)),
        )
    )
    for op in ops:
        r = factor.rank(op.degree)
        steps.append(
            TraceStep(
                "%s vanishes on u, v, w" % op.name,
                r == 0,
                "each generator is pulled back from HP1, whose H^%d has rank %d" % (op.degree, r),
            )
        )
    steps.append(TraceStep("additivity extends vanishing to u + v + w", True, ADDITIVITY))
    pairing = cube_pairing(ring, x)
    steps.append(TraceStep("cube pairing", pairing == 6, "x^3 = %s" % ring.label(ring.power(x, 3))))
    return WitnessTrace(steps, pairing)
