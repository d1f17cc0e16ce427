import itertools
import time

import pytest
import yaml

from s4tower.em import WindowError
from s4tower.linalg import rank
from s4tower.sss import (
    DeclaredBase,
    FibrationSpec,
    FilteredComplex,
    SpecError,
    UnknownStructure,
    build_e2,
    fiber_generators,
    read_off_total,
    replay,
    run_differentials,
)
from s4tower.tables import read_tsv

from conftest import DATA

SHIPPED = ["x1", "x2", "x3", "y1"]


def load(name):
    return FibrationSpec.load(DATA / "fibrations" / (name + ".yaml"))


def raw(name):
    return yaml.safe_load((DATA / "fibrations" / (name + ".yaml")).read_text())


@pytest.fixture(scope="module")
def results():
    return {n: run_differentials(load(n)) for n in SHIPPED}


def total_dims(result):
    out = {}
    for (s, t), labs in result.e_inf.entries.items():
        out[s + t] = out.get(s + t, 0) + len(labs)
    return out


@pytest.mark.parametrize("name", SHIPPED)
def test_d_squared_vanishes(name):
    assert FilteredComplex(load(name)).check_d_squared() == []


@pytest.mark.parametrize("name", SHIPPED)
def test_cohomology_of_total_complex_agrees(name, results):
    cx = FilteredComplex(load(name))
    p = cx.p
    got = total_dims(results[name])
    for n in range(cx.top):
        out_rank = rank(cx.d[n], p, cx.dim(n + 1)) if cx.d[n] else 0
        in_rank = rank(cx.d[n - 1], p, cx.dim(n)) if n and cx.d[n - 1] else 0
        assert got.get(n, 0) == cx.dim(n) - out_rank - in_rank, n


@pytest.mark.parametrize("name", SHIPPED)
def test_log_replays_to_e_infinity(name, results):
    r = results[name]
    assert replay(r.log, r.e2) == r.e_inf.dims()


@pytest.mark.parametrize("name", SHIPPED)
def test_pages_shrink(name, results):
    pages = results[name].pages
    for r in sorted(pages)[:-1]:
        for key, d in pages[r + 1].items():
            assert d <= pages[r].get(key, 0)


@pytest.mark.parametrize("name", SHIPPED)
def test_runtime(name):
    t = time.perf_counter()
    run_differentials(load(name))
    assert time.perf_counter() - t < 5


def test_x1_degrees(results):
    t = read_off_total(results["x1"])
    dims = {int(r[0]): int(r[1]) for r in t.rows}
    assert [dims[n] for n in range(4, 13)] == [1, 0, 0, 1, 3, 1, 1, 3, 5]
    assert t.notes == ["degree 13 and above: window-limited"]


def test_x1_named_classes(results):
    t = read_off_total(results["x1"])
    row = {r[0]: r[2] for r in t.rows}
    assert row["7"] == "alpha7 = [Sq2 i5]"
    assert row["10"] == "epsilon10 = [Sq4 Sq1 i5 + (i5)^2]"


def test_x1_square_of_fiber_class_transgresses():
    gens = {g.label: g for g in fiber_generators(load("x1"))}
    sq = gens["(i5)^2"]
    assert sq.rule == "Kudo"
    assert gens["Sq4 Sq1 i5"].tau == sq.tau


def test_x3_and_y1_kill_degree_eight(results):
    for name in ("x3", "y1"):
        dims = total_dims(results[name])
        assert dims.get(8, 0) == 0


def test_x3_uses_imported_differential(results):
    rules = {d.source_label: d.rule for d in results["x3"].log}
    assert rules["[b2 i7]"] == "imported"


def test_y1_differential(results):
    d9 = [d for d in results["y1"].log if d.r == 9]
    assert [d.target_label for d in d9] == ["p* b1 P1 r3 i4"]


UNDETERMINED = {
    ("Sq1", "alpha7"): "(r2 i4)^2",
    ("Sq4", "alpha7"): "r2 i4 * alpha7",
    ("Sq3", "beta8"): "r2 i4 * alpha7",
}


def test_x2_independent_of_undetermined_components():
    base = read_off_total(run_differentials(load("x2")), 10)
    for flips in itertools.product([False, True], repeat=len(UNDETERMINED)):
        d = raw("x2")
        # Cartan: Sq^k of (r2 i4)^2 vanishes for 0 < k < 8 because Sq1 r2 i4 = 0
        d["base"]["declared"]["steenrod"] += [
            {"op": "Sq%d" % k, "class": "(r2 i4)^2", "value": "0", "provenance": "Cartan"} for k in (1, 2, 3)
        ]
        for fact in d["base"]["declared"]["steenrod"]:
            key = (fact["op"], fact["class"])
            if key in UNDETERMINED and flips[list(UNDETERMINED).index(key)]:
                fact["value"] = "%s + %s" % (fact["value"], UNDETERMINED[key])
        t = read_off_total(run_differentials(FibrationSpec.from_dict(d)), 10)
        assert [r[:2] for r in t.rows] == [r[:2] for r in base.rows], flips


def test_missing_fact_aborts():
    d = raw("x2")
    d["base"]["declared"]["steenrod"] = [
        f for f in d["base"]["declared"]["steenrod"] if (f["op"], f["class"]) != ("Sq2", "alpha7")
    ]
    with pytest.raises(UnknownStructure, match="Sq2"):
        run_differentials(FibrationSpec.from_dict(d))


def test_imported_needs_provenance():
    d = raw("x3")
    d["imported_differentials"][0]["provenance"] = ""
    with pytest.raises(SpecError, match="provenance"):
        FibrationSpec.from_dict(d)


def test_bockstein_generator_needs_import():
    d = raw("x3")
    del d["imported_differentials"]
    with pytest.raises(SpecError):
        fiber_generators(FibrationSpec.from_dict(d))


def test_unknown_field_named():
    d = raw("x1")
    d["fibre"] = d.pop("fiber")
    with pytest.raises(SpecError, match="fibre"):
        FibrationSpec.from_dict(d)


def test_odd_prime_polynomial_generator_refused():
    spec = FibrationSpec.parse(
        "prime: 3\nwindow: 13\nbase: {eilenberg_maclane: {coefficients: Z, degree: 4}}\n"
        "fiber:\n  - {coefficients: Z3, degree: 4, kinvariant: '0'}\n"
    )
    with pytest.raises(WindowError):
        run_differentials(spec)


def test_declared_base_instability():
    b = DeclaredBase.from_dict(2, {"max_degree": 9, "classes": {4: ["x"], 8: ["x^2"]},
                                   "products": [{"left": "x", "right": "x", "value": "x^2"}]})
    x = b.vector(4, "x")
    assert b.act_letter(4, 4, x) == b.vector(8, "x^2")
    assert not any(b.act_letter(5, 4, x))


def test_declared_odd_classes_square_to_zero():
    b = DeclaredBase.from_dict(3, {"max_degree": 10, "classes": {5: ["y"]}})
    y = b.vector(5, "y")
    assert not any(b.mul(5, y, 5, y))


def test_e2_matches_tensor_product():
    spec = load("x1")
    e2 = build_e2(spec)
    assert e2.dim(0, 5) == 1 and e2.dim(4, 5) == 1 and e2.dim(4, 0) == 1


def test_golden_x1_row_count():
    t = read_tsv(DATA / "tables" / "unstable_x1.tsv")
    assert [r[0] for r in t.rows] == [str(n) for n in range(1, 13)]
