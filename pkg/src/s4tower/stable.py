"""Stable Postnikov towers, one prime at a time.

Each stage is a cofiber sequence  Sigma^{k-1} HA -> X' -> X  classified by a
k-invariant theta in H^k(X; A).  The mod-p cohomology of X' sits in

    0 -> coker(tau: H^{n-1}(F) -> H^n(X)) -> H^n(X') -> ker(tau: H^n(F) -> H^{n+1}(X)) -> 0

with tau(a.iota) = a.theta.  The cokernel part is pulled back from X, the
kernel part is detected on the fiber.  How Steenrod operations act on the
kernel lifts is only known modulo pullbacks; those unknowns are constrained
by the Adem relations and every remaining possibility is carried along as a
separate "world".  Reported dimensions are the ones all worlds agree on.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product as iproduct
from pathlib import Path

import yaml

from .config import check_keys
from .em import Coefficients, WindowError
from .linalg import kernel, solve, unit
from .modules import Extension, Module, em_module, letters, quotient_data
from .steenrod import BETA, SteenrodElement, adem_normalize, letter_degree, parse_element
from .tables import Table

Vec = list[int]


class SpecError(ValueError):
    """The tower description is inconsistent with the computed cohomology."""


@dataclass
class StageSpec:
    stage: str  # name of the space produced, e.g. "X2"
    degree: int  # degree k of the k-invariant
    coefficients: Coefficients
    name: str = ""  # display name of the k-invariant, e.g. "alpha7"
    pullback: str | None = None  # Steenrod element applied to the base class
    restriction: str | None = None  # element of the previous fiber's cohomology
    bockstein: str | None = None  # "nonzero", "zero" or None (unknown)
    provenance: str = ""
    bockstein_provenance: str = ""

    def __post_init__(self):
        if (self.pullback is None) == (self.restriction is None):
            raise SpecError("stage %s: give exactly one of pullback / restriction" % self.stage)
        if self.bockstein not in (None, "nonzero", "zero"):
            raise SpecError("stage %s: bockstein must be nonzero, zero or absent" % self.stage)


@dataclass
class TowerSpec:
    prime: int
    base_degree: int = 4
    base: Coefficients = field(default_factory=Coefficients)
    base_name: str = "Sigma^4 HZ"
    stages: list[StageSpec] = field(default_factory=list)
    window: int = 13  # top degree reported for the last stage
    max_worlds: int = 4096

    @classmethod
    def from_dict(cls, d: dict) -> "TowerSpec":
        check_keys(d, ("prime", "base_degree", "base", "base_name", "stages", "window", "max_worlds"), "tower", SpecError)
        for i, s in enumerate(d.get("stages") or []):
            check_keys(s, StageSpec.__dataclass_fields__, "stages[%d]" % i, SpecError)
        try:
            stages = [
                StageSpec(
                    stage=str(s["stage"]),
                    degree=int(s["degree"]),
                    coefficients=Coefficients.parse(str(s["coefficients"])),
                    name=str(s.get("name", "")),
                    pullback=s.get("pullback"),
                    restriction=s.get("restriction"),
                    bockstein=s.get("bockstein"),
                    provenance=str(s.get("provenance", "")),
                    bockstein_provenance=str(s.get("bockstein_provenance", "")),
                )
                for s in d.get("stages") or []
            ]
            spec = cls(
                prime=int(d["prime"]),
                base_degree=int(d.get("base_degree", 4)),
                base=Coefficients.parse(str(d.get("base", "Z"))),
                base_name=str(d.get("base_name", "Sigma^4 HZ")),
                stages=stages,
                window=int(d.get("window", 13)),
                max_worlds=int(d.get("max_worlds", 4096)),
            )
        except KeyError as e:
            raise SpecError("missing field %s" % e) from None
        degs = [s.degree for s in spec.stages]
        if degs != sorted(degs):
            raise SpecError("stage degrees must be nondecreasing")
        if spec.window > 13:
            raise SpecError("stable runs are capped at degree 13")
        return spec

    @classmethod
    def load(cls, path: str | Path) -> "TowerSpec":
        return cls.from_dict(yaml.safe_load(Path(path).read_text()))

    @classmethod
    def parse(cls, text: str) -> "TowerSpec":
        return cls.from_dict(yaml.safe_load(text))


# ---------------------------------------------------------------------------
# one world = one fully specified module structure on every stage so far


@dataclass
class World:
    module: Module
    # per stage passed: (reducer, kernel dims) pushing a class one stage up
    pushers: list = field(default_factory=list)
    fiber: Module | None = None
    kernel_basis: dict[int, list[Vec]] = field(default_factory=dict)
    c_dims: dict[int, int] = field(default_factory=dict)
    choices: list[str] = field(default_factory=list)

    def push(self, n: int, v: Vec) -> Vec:
        """Pull a class of the base back to the current stage."""
        for reducer, kdims in self.pushers:
            v = reducer(n, v) + [0] * kdims.get(n, 0)
        return v


def fiber_vector(fiber: Module, n: int, text: str, p: int) -> Vec:
    """Coordinates of a fiber class written as an element on the fiber's fundamental class."""
    e = adem_normalize(parse_element(text, p))
    if e.degree is not None and e.degree + fiber.lo != n:
        raise SpecError("%r has degree %d, expected %d" % (text, e.degree + fiber.lo, n))
    v = [0] * fiber.dim(n)
    words = fiber.words[n]
    for w, c in e.terms:
        key = (w, e.source)
        if key not in words:
            raise SpecError("%r is not a fiber class in degree %d" % (text, n))
        i = words.index(key)
        v[i] = (v[i] + c) % p
    return v


@dataclass
class StageResult:
    spec: StageSpec | None
    name: str  # stage name ("X1"); the base is named by TowerSpec.base_name
    lo: int
    hi: int
    dims: dict[int, int | None]  # None: worlds disagree
    labels: dict[int, list[str]]
    worlds: int
    deviation: int | None
    killed: dict[int, list[str]] = field(default_factory=dict)  # base classes pulling back to 0 here
    notes: list[str] = field(default_factory=list)
    kinvariant_echo: str = ""

    def is_resolved(self) -> bool:
        return all(d is not None for d in self.dims.values())


@dataclass
class TowerReport:
    spec: TowerSpec
    stages: list[StageResult]

    def stage(self, name: str) -> StageResult:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


def _theta_candidates(w: World, st: StageSpec, base: Module, base_vec: Vec, spec: TowerSpec) -> list[tuple[Vec, str]]:
    p = spec.prime
    k = st.degree
    if st.pullback is not None:
        e = parse_element(st.pullback, p)
        # the source tag only restates the base coefficients; act with the bare operation
        op = SteenrodElement.from_dict(p, dict(e.terms))
        v0 = base.apply(op, spec.base_degree, base_vec) if e.terms else base_vec
        v = w.push(k, v0)
        return [(v, "")]
    if w.fiber is None:
        raise SpecError("stage %s: restriction needs a previous fiber" % st.stage)
    x = fiber_vector(w.fiber, k, st.restriction, p)
    kb = w.kernel_basis.get(k, [])
    y = solve(kb, x, p) if kb else (None if any(x) else [])
    if y is None:
        raise SpecError(
            "stage %s: no class of degree %d restricts to %s on the fiber" % (st.stage, k, st.restriction)
        )
    dc = w.c_dims.get(k, 0)
    out = []
    for c in iproduct(range(p), repeat=dc):
        note = "" if not any(c) else "pullback part %s" % (list(c),)
        out.append((list(c) + y, note))
    return out


def _bockstein_candidates(m: Module, k: int, st: StageSpec) -> list[tuple[Vec, str]]:
    p = m.p
    beta = 1 if p == 2 else BETA
    d = m.dim(k + 1)
    out = []
    for v in iproduct(range(p), repeat=d):
        v = list(v)
        if st.bockstein == "nonzero" and not any(v):
            continue
        if st.bockstein == "zero" and any(v):
            continue
        if k + 1 + letter_degree(beta, p) <= m.hi and any(m.apply_letter(beta, k + 1, v)):
            continue  # a higher Bockstein lands in the kernel of beta
        out.append((v, "d theta = %s" % m.vector_label(k + 1, v)))
    return out


def transgression_map(
    stage: Module, degree: int, theta: Vec, fiber: Module, dtheta: Vec | None = None
) -> dict[int, list[Vec]]:
    """Matrix of tau: H^n(fiber) -> H^{n+1}(stage) for every fiber degree n.

    tau(a.iota) = a.theta; classes built on the higher Bockstein of the fiber
    go to a.dtheta, where dtheta is the image of that Bockstein.
    """
    if len(theta) != stage.dim(degree):
        raise SpecError("theta is not a class of H^%d of the stage" % degree)
    tau: dict[int, list[Vec]] = {}
    top = min(fiber.hi, stage.hi - 1)
    for n in range(fiber.lo, top + 1):
        cols = []
        for word, src in fiber.words[n]:
            if src.kind == "bock":
                if dtheta is None:
                    raise SpecError("the fiber has a higher Bockstein class but no value for it was given")
                cols.append(stage.apply_word(word, degree + 1, dtheta))
            else:
                cols.append(stage.apply_word(word, degree, theta))
        tau[n] = cols
    return tau


def transgress(stage: Module, degree: int, theta: Vec, fiber: Module, text: str) -> str:
    """Label of tau applied to a fiber class given as an element on the fiber's fundamental class."""
    p = stage.p
    e = adem_normalize(parse_element(text, p))
    n = fiber.lo + (e.degree or 0)
    v = fiber_vector(fiber, n, text, p)
    tau = transgression_map(stage, degree, theta, fiber)
    out = [0] * stage.dim(n + 1)
    for c, col in zip(v, tau[n]):
        out = [(a + c * b) % p for a, b in zip(out, col)]
    return stage.vector_label(n + 1, out)


def next_stage(w: World, st: StageSpec, theta: Vec, dtheta: Vec | None, p: int):
    """Extension data for the stage killed by theta (world-specific)."""
    m = w.module
    k = st.degree
    top = m.hi - 1
    fiber = em_module(st.coefficients, p, k - 1, top)
    tau = transgression_map(m, k, theta, fiber, dtheta)
    images = {n + 1: cols for n, cols in tau.items()}
    kept, reducer = quotient_data(m, images, m.lo, top)
    kb: dict[int, list[Vec]] = {}
    for n in range(m.lo, top + 1):
        if n < k - 1:
            kb[n] = []
            continue
        kb[n] = kernel(tau[n], m.dim(n + 1), p) if tau[n] else []
    c_labels = {n: [_pstar(m.labels[n][i]) for i in kept[n]] for n in range(m.lo, top + 1)}
    k_labels = {n: ["lift(%s)" % fiber.vector_label(n, v) for v in kb[n]] for n in range(m.lo, top + 1)}
    c_act, k_act, params = {}, {}, []
    for n in range(m.lo, top + 1):
        for letter in letters(p, top - n):
            t = n + letter_degree(letter, p)
            if kept[n] and kept[t]:
                c_act[(letter, n)] = [reducer(t, m.apply_letter(letter, n, unit(m.dim(n), i))) for i in kept[n]]
            if kb[n]:
                cols = []
                for v in kb[n]:
                    img = fiber.apply_letter(letter, n, v)
                    if kb[t]:
                        y = solve(kb[t], img, p)
                        if y is None:
                            raise AssertionError("tau is not A-linear")
                    else:
                        assert not any(img)
                        y = []
                    cols.append(y)
                k_act[(letter, n)] = cols
                for j in range(len(kb[n])):
                    for s in range(len(kept[t])):
                        params.append((letter, n, j, s))
    ext = Extension(p, m.lo, top, c_labels, k_labels, c_act, k_act, params)
    return fiber, ext, reducer, kb, kept


def _pstar(label: str) -> str:
    return label if label.startswith("p* ") else "p* " + label


def run_stable_tower(spec: TowerSpec, window: int | None = None) -> TowerReport:
    p = spec.prime
    window = spec.window if window is None else window
    top0 = window + len(spec.stages)
    base = em_module(spec.base, p, spec.base_degree, top0, lo=spec.base_degree)
    base_vec = unit(base.dim(spec.base_degree), 0)
    worlds = [World(base)]
    results = [_summarize(None, spec.base_name, worlds, base, spec)]
    for st in spec.stages:
        new_worlds: list[World] = []
        for w in worlds:
            m = w.module
            if st.degree + 1 > m.hi:
                raise WindowError("stage %s needs degree %d above the window" % (st.stage, st.degree + 1))
            for theta, note in _theta_candidates(w, st, base, base_vec, spec):
                if not any(theta):
                    raise SpecError(
                        "stage %s: k-invariant %s is zero in H^%d" % (st.stage, st.name or st.pullback or st.restriction, st.degree)
                    )
                m_ = st.coefficients.valuation(p) if st.coefficients.order else 0
                dopts: list[tuple[Vec | None, str]] = [(None, "")]
                if st.coefficients.order == 0 or m_ >= 2:
                    beta = 1 if p == 2 else BETA
                    if any(m.apply_letter(beta, st.degree, theta)):
                        raise SpecError(
                            "stage %s: beta of the reduction is nonzero, no lift to %s" % (st.stage, st.coefficients)
                        )
                    if st.coefficients.order:
                        dopts = _bockstein_candidates(m, st.degree, st)
                        if not dopts:
                            raise SpecError("stage %s: no admissible value for the higher Bockstein" % st.stage)
                for dtheta, dnote in dopts:
                    fiber, ext, reducer, kb, kept = next_stage(w, st, theta, dtheta, p)
                    for phi in ext.worlds(spec.max_worlds):
                        nm = ext.build(phi)
                        kd = {n: len(kb[n]) for n in kb}
                        nw = World(
                            nm,
                            w.pushers + [(reducer, kd)],
                            fiber,
                            kb,
                            {n: len(kept[n]) for n in kept},
                            w.choices + [c for c in (note, dnote) if c],
                        )
                        new_worlds.append(nw)
                        if len(new_worlds) > spec.max_worlds:
                            raise WindowError("more than %d module structures; narrow the tower file" % spec.max_worlds)
        worlds = new_worlds
        results.append(_summarize(st, st.stage, worlds, base, spec))
    return TowerReport(spec, results)


def _summarize(st: StageSpec | None, name: str, worlds: list[World], base: Module, spec: TowerSpec) -> StageResult:
    m0 = worlds[0].module
    dims: dict[int, int | None] = {}
    for n in range(m0.lo, m0.hi + 1):
        ds = {w.module.dim(n) for w in worlds}
        dims[n] = ds.pop() if len(ds) == 1 else None
    labels = {n: list(m0.labels[n]) for n in range(m0.lo, m0.hi + 1)}
    deviation = None
    for n in range(spec.base_degree + 1, m0.hi + 1):
        if dims[n] != 0:
            deviation = n
            break
    killed: dict[int, list[str]] = {}
    if st is not None:
        for n in range(m0.lo, m0.hi + 1):
            for i, lab in enumerate(base.labels[n]):
                vals = {any(w.push(n, unit(base.dim(n), i))) for w in worlds}
                if vals == {False}:
                    killed.setdefault(n, []).append(lab)
    notes = []
    if len(worlds) > 1:
        notes.append("%d module structures are compatible with the Adem relations" % len(worlds))
    unresolved = [n for n, d in dims.items() if d is None]
    if unresolved:
        notes.append("unresolved degrees: %s" % ", ".join(map(str, unresolved)))
    echo = ""
    if st is not None:
        echo = "%s: %s in H^%d(-; %s)" % (st.name or st.stage, st.pullback or "restricts to " + str(st.restriction), st.degree, st.coefficients)
    return StageResult(st, name, m0.lo, m0.hi, dims, labels, len(worlds), deviation, killed, notes, echo)


# ---------------------------------------------------------------------------
# homotopy table, assembly over primes


@dataclass(frozen=True)
class Group:
    """Finitely generated abelian group: free rank plus cyclic torsion orders."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Group":
        t = str(text).strip()
        if t == "0":
            return cls()
        rank, tors = 0, []
        for part in t.split(" x "):
            part = part.strip()
            base, _, mult = part.partition("^")
            k = int(mult) if mult else 1
            if base == "Z":
                rank += k
            elif base.startswith("Z") and base[1:].isdigit():
                tors += [int(base[1:])] * k
            else:
                raise ValueError("bad group %r" % text)
        return cls(rank, tuple(tors))

    @property
    def order(self) -> int | None:
        if self.rank:
            return None
        r = 1
        for t in self.torsion:
            r *= t
        return r

    def __str__(self) -> str:
        parts = ["Z"] * self.rank + ["Z%d" % t for t in self.torsion]
        return " x ".join(parts) if parts else "0"

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        """Rank and sorted prime-power torsion: equal iff the groups are isomorphic."""
        pp = []
        for t in self.torsion:
            q = 2
            while t > 1:
                k = 1
                while t % q == 0:
                    t //= q
                    k *= q
                if k > 1:
                    pp.append(k)
                q += 1
        return self.rank, tuple(sorted(pp))

    def __add__(self, other: "Group") -> "Group":
        return Group(self.rank + other.rank, self.torsion + other.torsion)


@dataclass
class HomotopyTable:
    stable: dict[int, Group]
    unstable: dict[int, Group]

    @classmethod
    def from_dict(cls, d: dict) -> "HomotopyTable":
        return cls(
            {int(k): Group.parse(v) for k, v in (d.get("stable") or {}).items()},
            {int(k): Group.parse(v) for k, v in (d.get("unstable") or {}).items()},
        )

    @classmethod
    def load(cls, path: str | Path | None = None) -> "HomotopyTable":
        path = Path(path) if path else Path(__file__).parent / "data" / "homotopy.yaml"
        return cls.from_dict(yaml.safe_load(path.read_text()))


@dataclass
class IntegralStage:
    name: str
    fiber_degree: int
    order: int
    kinvariants: list[tuple[int, str]]  # (prime, k-invariant name)
    relations: list[str]

    @property
    def fiber(self) -> str:
        return "Sigma^%d HZ%d" % (self.fiber_degree, self.order)


def assemble_primes(reports: Sequence[TowerReport]) -> list[IntegralStage]:
    """Merge prime-local stages with the same fiber degree into integral stages."""
    if not reports:
        return []
    bases = {(r.spec.base, r.spec.base_degree) for r in reports}
    if len(bases) > 1:
        raise SpecError("towers do not share a base")
    by_degree: dict[int, list[tuple[int, StageSpec, StageResult]]] = {}
    for r in reports:
        for st, res in zip(r.spec.stages, r.stages[1:]):
            by_degree.setdefault(st.degree - 1, []).append((r.spec.prime, st, res))
    out = []
    for i, deg in enumerate(sorted(by_degree), start=1):
        order = 1
        kis, rels = [], []
        for p, st, res in sorted(by_degree[deg], key=lambda t: t[0]):
            order *= st.coefficients.order
            kis.append((p, st.name or st.stage))
            for n, labs in sorted(res.killed.items()):
                for lab in labs:
                    rels.append("p* %s = 0 (from %s)" % (lab, res.name))
        out.append(IntegralStage("W%d" % i, deg, order, kis, rels))
    # relations persist to later integral stages
    seen: list[str] = []
    for s in out:
        fresh = [r for r in s.relations if r not in seen]
        s.relations = seen + fresh
        seen = list(s.relations)
    return out


@dataclass(frozen=True)
class Finding:
    degree: int
    message: str

    def __str__(self) -> str:
        return "n=%d: %s" % (self.degree, self.message)


def pi_consistency_check(summary: Sequence[IntegralStage], table: HomotopyTable) -> list[Finding]:
    """Compare each fiber Sigma^n HA with the stable homotopy group pi_n."""
    out = []
    for s in summary:
        g = table.stable.get(s.fiber_degree)
        if g is None:
            out.append(Finding(s.fiber_degree, "no table entry for the fiber degree"))
        elif g.order != s.order:
            out.append(
                Finding(
                    s.fiber_degree,
                    "tower fiber %s has order %d but the table lists %s" % (s.fiber, s.order, g),
                )
            )
    if summary:
        covered = {s.fiber_degree for s in summary}
        top = max(covered)
        for n, g in sorted(table.stable.items()):
            first = min(covered)
            if first <= n <= top and n not in covered and str(g) != "0":
                out.append(Finding(n, "table lists %s but no stage has a fiber in this degree" % g))
    return out


def postnikov_table(reports: Sequence[TowerReport], rows: int = 13, title: str = "") -> Table:
    """Degree-by-stage overview: generators up to the first nonzero degree, then '*'.

    The first nonzero degree above the base is labelled with the name of the
    k-invariant that kills it when the next stage does so, otherwise with the
    basis labels.
    """
    many = len(reports) > 1
    columns = ["n"]
    cols: list[tuple[StageResult, StageSpec | None]] = []
    for r in reports:
        head = r.spec.base_name + (" (p=%d)" % r.spec.prime if many else "")
        columns.append(head)
        columns += [s.name for s in r.stages[1:]]
        nxt = list(r.spec.stages) + [None]
        cols += list(zip(r.stages, nxt))
    out = []
    for n in range(rows):
        row = [str(n)]
        for res, following in cols:
            row.append(_postnikov_cell(res, following, n))
        out.append(row)
    return Table(columns, out, title)


def _postnikov_cell(res: StageResult, following: StageSpec | None, n: int) -> str:
    if res.deviation is not None and n > res.deviation:
        return "*"
    if n < res.lo or n > res.hi or not res.labels.get(n):
        return "0"
    if n == res.deviation and following is not None and following.degree == n:
        return following.name or following.stage
    return ", ".join(res.labels[n])


def fiber_groups(factors: Iterable[tuple[int, Coefficients, int]]) -> dict[int, Group]:
    """Homotopy of a product of K(A, n) fibers, from (prime, coefficients, n) triples.

    Prime-local towers each carry their own copy of a free summand, so Z
    factors in one degree are counted once per prime and the maximum is kept.
    """
    free: dict[int, dict[int, int]] = {}
    torsion: dict[int, list[int]] = {}
    for p, coeff, n in factors:
        if coeff.order == 0:
            free.setdefault(n, {})
            free[n][p] = free[n].get(p, 0) + 1
        else:
            torsion.setdefault(n, []).append(coeff.order)
    out = {}
    for n in sorted(set(free) | set(torsion)):
        out[n] = Group(max(free.get(n, {0: 0}).values()), tuple(torsion.get(n, ())))
    return out


def parse_fiber(text: str) -> list[tuple[Coefficients, int]]:
    """'K(Z4,7) x K(Z,7)' -> [(Z4, 7), (Z, 7)]."""
    out = []
    for part in text.split(" x "):
        m = re.fullmatch(r"K\((Z\d*),\s*(\d+)\)", part.strip())
        if not m:
            raise ValueError("bad fiber %r" % part)
        out.append((Coefficients.parse(m.group(1)), int(m.group(2))))
    return out


def unstable_fiber_check(groups: dict[int, Group], table: HomotopyTable, stage: str = "") -> list[Finding]:
    """Compare the homotopy of an unstable stage fiber with pi_n(S^4)."""
    out = []
    where = " of %s" % stage if stage else ""
    for n, g in sorted(groups.items()):
        ref = table.unstable.get(n)
        if ref is None:
            out.append(Finding(n, "no table entry for the fiber%s in degree %d" % (where, n)))
        elif g.invariants() != ref.invariants():
            out.append(Finding(n, "fiber%s has pi_%d = %s but the table lists %s" % (where, n, g, ref)))
    return out
