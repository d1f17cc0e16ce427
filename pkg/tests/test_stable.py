import pytest

from s4tower.em import Coefficients
from s4tower.linalg import Subspace
from s4tower.modules import em_module
from s4tower.stable import (
    Group,
    HomotopyTable,
    IntegralStage,
    SpecError,
    TowerSpec,
    assemble_primes,
    fiber_groups,
    fiber_vector,
    parse_fiber,
    pi_consistency_check,
    run_stable_tower,
    transgress,
    unstable_fiber_check,
)
from s4tower.steenrod import SteenrodElement, enumerate_admissible, multiply, op

from conftest import DATA


@pytest.fixture(scope="module")
def reports():
    return {p: run_stable_tower(TowerSpec.load(DATA / "towers" / ("stable_p%d.yaml" % p))) for p in (2, 3, 5)}


def _first_stage_dims(p, kinv, top):
    """dim H^n of the first stage, from products in the Steenrod algebra alone.

    The base Sigma^4 HZ has H^{4+d} = (A / A beta)_d, the fiber Sigma^{k-1} HZp
    has H^{k-1+d} = A_d, and tau(a) = a * kinv modulo A beta.
    """
    bock = op("Sq1" if p == 2 else "b1", p)
    k = 4 + op(kinv, p).degree

    def coords(e, keys):
        return [e.as_dict().get(w, 0) for w in keys]

    def left_ideal(d):
        keys = [m.word for m in enumerate_admissible(p, d)]
        ideal = Subspace(len(keys), p)
        for m in enumerate_admissible(p, d - 1):
            ideal.add(coords(multiply(SteenrodElement(p, ((m.word, 1),)), bock), keys))
        return keys, ideal

    def tau_rank(d):
        if d < 0:
            return 0
        keys, ideal = left_ideal(d + k - 4)
        span = Subspace(len(keys), p, ideal.rows)
        for m in enumerate_admissible(p, d):
            span.add(coords(multiply(SteenrodElement(p, ((m.word, 1),)), op(kinv, p)), keys))
        return span.dim - ideal.dim

    out = {}
    for n in range(4, top + 1):
        keys, ideal = left_ideal(n - 4)
        coker = len(keys) - ideal.dim - tau_rank(n - k)
        ker = len(enumerate_admissible(p, n - k + 1)) - tau_rank(n - k + 1) if n >= k - 1 else 0
        out[n] = coker + ker
    return out


def test_first_stage_matches_algebra_route_p2(reports):
    x1 = reports[2].stage("X1")
    assert {n: x1.dims[n] for n in range(4, 16)} == _first_stage_dims(2, "Sq2", 15)


def test_first_stage_matches_algebra_route_p3(reports):
    y1 = reports[3].stage("Y1")
    assert {n: y1.dims[n] for n in range(4, 14)} == _first_stage_dims(3, "P1", 13)
@pytest.mark.parametrize(
    "cls, image",
    [("Sq1", "Sq3 r2 i"), ("Sq2", "0"), ("Sq4 Sq1", "Sq5 Sq2 r2 i"), ("1", "Sq2 r2 i")],
)
def test_first_transgressions_p2(cls, image):
    base = em_module(Coefficients(0), 2, 4, 14, lo=4)
    fiber = em_module(Coefficients(2), 2, 5, 13)
    theta = fiber_vector(base, 6, "Sq2 r2", 2)
    assert transgress(base, 6, theta, fiber, cls) == image


def test_first_transgression_p3():
    base = em_module(Coefficients(0), 3, 4, 14, lo=4)
    fiber = em_module(Coefficients(3), 3, 7, 13)
    theta = fiber_vector(base, 8, "P1 r3", 3)
    assert transgress(base, 8, theta, fiber, "b1") == "b1 P1 r3 i"


def test_deviation_degrees(reports):
    got = {p: [s.deviation for s in r.stages] for p, r in reports.items()}
    assert got == {2: [6, 7, 8, 11, 12, 13], 3: [8, 12, None], 5: [12, None]}
    assert reports[2].stage("X5").dims[12] == 0


def test_every_stage_has_one_structure(reports):
    assert all(s.worlds == 1 and s.is_resolved() for r in reports.values() for s in r.stages)


def test_odd_stage_kills(reports):
    y1 = reports[3].stage("Y1")
    assert y1.dims[8] == 0 and y1.dims[12] == 1
    assert reports[3].stage("Y2").dims[12] == 0
    assert reports[5].stage("Z1").dims[12] == 0
    assert y1.killed[8] == ["P1 r3 i"]


def test_assembly(reports):
    summary = assemble_primes(list(reports.values()))
    assert [s.order for s in summary] == [2, 2, 24, 2, 240]
    assert [s.fiber for s in summary] == [
        "Sigma^5 HZ2", "Sigma^6 HZ2", "Sigma^7 HZ24", "Sigma^10 HZ2", "Sigma^11 HZ240",
    ]
    w3 = summary[2]
    assert (3, "P1 r3 i") in w3.kinvariants
    assert "p* P2 r3 i = 0 (from Y1)" in w3.relations


def test_pi_check_flags_only_degree_seven(reports):
    findings = pi_consistency_check(assemble_primes(list(reports.values())), HomotopyTable.load())
    assert [f.degree for f in findings] == [7]
    assert "order 24" in findings[0].message and "Z12" in findings[0].message


def test_pi_check_is_quiet_on_agreement():
    table = HomotopyTable.load()
    table.stable[7] = Group.parse("Z24")
    stages = [IntegralStage("W3", 7, 24, [], [])]
    assert pi_consistency_check(stages, table) == []


@pytest.mark.parametrize("text, order", [("Z2", 2), ("Z2^2", 4), ("Z24 x Z3", 72), ("0", 1)])
def test_group_orders(text, order):
    assert Group.parse(text).order == order


def test_group_with_free_part():
    g = Group.parse("Z x Z12")
    assert g.rank == 1 and str(g) == "Z x Z12"


def test_spec_needs_exactly_one_definition():
    bad = "prime: 2\nstages:\n  - {stage: X1, degree: 6, coefficients: Z2}\n"
    with pytest.raises(SpecError, match="exactly one"):
        TowerSpec.parse(bad)


def test_spec_rejects_unknown_fields():
    bad = "prime: 2\nstages:\n  - {stage: X1, degree: 6, coefficients: Z2, pullbak: Sq2 r2}\n"
    with pytest.raises(SpecError, match=r"stages\[0\]: unknown field\(s\) pullbak"):
        TowerSpec.parse(bad)


def test_zero_kinvariant_rejected():
    bad = "prime: 2\nstages:\n  - {stage: X1, degree: 5, coefficients: Z2, pullback: Sq1 r2}\n"
    with pytest.raises(SpecError, match="zero"):
        run_stable_tower(TowerSpec.parse(bad))


def test_window_cap():
    with pytest.raises(SpecError):
        TowerSpec.parse("prime: 2\nwindow: 20\n")


def test_group_isomorphism_invariants():
    assert Group.parse("Z x Z12").invariants() == (Group.parse("Z4 x Z") + Group.parse("Z3")).invariants()
    assert Group.parse("Z2^2").invariants() != Group.parse("Z4").invariants()


def test_shipped_unstable_fibers_agree_with_table():
    from s4tower.sss import FibrationSpec

    specs = [FibrationSpec.load(p) for p in sorted((DATA / "fibrations").glob("*.yaml"))]
    groups = fiber_groups((s.prime, f.coefficients, f.degree) for s in specs for f in s.fiber)
    assert {n: str(g) for n, g in groups.items()} == {5: "Z2", 6: "Z2", 7: "Z x Z4 x Z3"}
    assert unstable_fiber_check(groups, HomotopyTable.load()) == []


def test_mislabelled_fiber_is_flagged():
    groups = fiber_groups((0, c, n) for c, n in parse_fiber("K(Z11,8) x K(Z,7)"))
    findings = unstable_fiber_check(groups, HomotopyTable.load(), "W3")
    assert [f.degree for f in findings] == [7, 8]


def test_parse_fiber_rejects_junk():
    with pytest.raises(ValueError):
        parse_fiber("K(Z,7) x S^3")
