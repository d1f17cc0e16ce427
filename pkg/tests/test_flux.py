import pytest
from hypothesis import given
from hypothesis import strategies as st

from s4tower.flux import (
    FiniteGradedRing,
    RingError,
    coefficient_sweep,
    cube_pairing,
    hp1_cubed_ring,
    stable_divisibility_check,
    truncated_polynomial_ring,
    unstable_vanishing_check,
    witness_lift_argument,
)

from conftest import DATA

coeff = st.integers(-50, 50)


def test_shipped_ring_file_matches_builtin():
    ring = FiniteGradedRing.load(DATA / "rings" / "hp1_cubed.yaml")
    ref = hp1_cubed_ring()
    assert (ring.names, ring.degrees, sorted(ring.relations), ring.pairing) == (
        ref.names, ref.degrees, sorted(ref.relations), ref.pairing
    )


def test_ranks():
    ring = hp1_cubed_ring()
    assert [ring.rank(n) for n in range(0, 13, 2)] == [1, 0, 3, 0, 3, 0, 1]


def test_witness_pairing():
    ring = hp1_cubed_ring()
    assert cube_pairing(ring, ring.parse("u + v + w")) == 6


@given(coeff, coeff, coeff)
def test_cube_is_six_abc(a, b, c):
    # (au + bv + cw)^3 = 6abc uvw when u^2 = v^2 = w^2 = 0
    ring = hp1_cubed_ring()
    assert cube_pairing(ring, ring.element(4, [a, b, c])) == 6 * a * b * c


@given(coeff, coeff, coeff)
def test_stable_divisibility(a, b, c):
    ring = hp1_cubed_ring()
    rep = stable_divisibility_check(ring, ring.element(4, [a, b, c]))
    assert rep.divisibility in (1, 2, 3, 6)
    assert rep.pairing % rep.divisibility == 0
    if all(v.holds for v in rep.verdicts):
        assert rep.divisibility == 6


@given(coeff, coeff, coeff)
def test_unstable_square_vanishing(a, b, c):
    ring = hp1_cubed_ring()
    rep = unstable_vanishing_check(ring, ring.element(4, [a, b, c]))
    assert rep.verdicts[0].holds == (sum(1 for x in (a, b, c) if x) <= 1)
    if rep.verdicts[0].holds:
        assert rep.pairing == 0


def test_unstable_obstructs_witness():
    ring = hp1_cubed_ring()
    rep = unstable_vanishing_check(ring, ring.parse("u + v + w"))
    assert not rep.verdicts[0].holds and rep.pairing == 6


def test_truncated_polynomial_fails_both():
    ring = truncated_polynomial_ring(4, 4)
    rep = stable_divisibility_check(ring, ring.parse("t"))
    assert [v.holds for v in rep.verdicts] == [False, False]
    assert rep.divisibility == 1 and rep.pairing == 1


def test_sweep_bound_three():
    rows = list(coefficient_sweep(hp1_cubed_ring(), 3))
    assert len(rows) == 343
    passing = [pairing for _, m2, m3, pairing in rows if m2 and m3]
    assert all(x % 6 == 0 for x in passing)
    assert min(abs(x) for x in passing if x) == 6


def test_witness_trace():
    trace = witness_lift_argument()
    assert trace.holds and trace.pairing == 6
    names = [s.step for s in trace.steps]
    assert names[:3] == ["odd degrees vanish", "degree 6 vanishes", "indeterminacy vanishes"]
    assert names[-1] == "cube pairing"


def test_trace_notices_nonvanishing_degree():
    ring = FiniteGradedRing(["u", "a", "b"], [4, 6, 2], [(2, 0, 0), (0, 2, 0), (0, 0, 2)], (1, 1, 1))
    steps = {s.step: s.holds for s in witness_lift_argument(ring, ring.parse("u"), []).steps}
    assert steps["degree 6 vanishes"] is False


@pytest.mark.parametrize(
    "d, msg",
    [
        ({"generators": [{"name": "u", "degree": 3}], "pairing": "u"}, "even"),
        ({"generators": [{"name": "u", "degree": 4}], "relations": ["u"], "pairing": "u"}, "zero"),
        ({"generators": [{"name": "u", "degree": 4}]}, "pairing"),
        ({"generators": [{"name": "u", "degree": 4}], "pairing": "u", "extra": 1}, "extra"),
        ({"generators": [{"degree": 4}], "pairing": "u"}, "name"),
    ],
)
def test_ring_errors(d, msg):
    with pytest.raises(RingError, match=msg):
        FiniteGradedRing.from_dict(d)


def test_degree_check():
    ring = hp1_cubed_ring()
    with pytest.raises(RingError):
        stable_divisibility_check(ring, ring.parse("u v"))


def test_labels_round_trip():
    ring = hp1_cubed_ring()
    x = ring.parse("2u - v + 3w")
    assert ring.label(x) == "2u - v + 3w"
    assert ring.parse(ring.label(x)) == x
