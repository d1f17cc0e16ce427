import pytest
from hypothesis import given
from hypothesis import strategies as st

from s4tower.em import Coefficients, EMRing, WindowError, em_table, stable_basis, unstable_ring_generators
from s4tower.steenrod import SteenrodElement, adem_normalize, op, word_degree


def dims(ring, top):
    return [len(ring.basis(d)) for d in range(top + 1)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_kz2_is_polynomial(p):
    ring = EMRing.eilenberg_maclane(Coefficients(0), 2, p, 16)
    assert dims(ring, 16) == [1 - d % 2 for d in range(17)]


def test_kz2_2_low_degrees():
    # F2[i2, Sq1 i2, Sq2 Sq1 i2, ...] counted by hand
    ring = EMRing.eilenberg_maclane(Coefficients(2), 2, 2, 7)
    assert dims(ring, 7) == [1, 0, 1, 1, 1, 2, 2, 2]


def test_kz3_odd_square_vanishes():
    ring = EMRing.eilenberg_maclane(Coefficients(3), 7, 3, 14)
    i7 = ring.gen(0)
    assert ring.mul(i7, i7) == {}
    assert ring.poly_label(i7) == "i7"


def test_coefficients_prime_to_p_are_invisible():
    assert stable_basis(Coefficients(3), 2, range(5)) == {d: [] for d in range(5)}
    assert unstable_ring_generators(Coefficients(5), 4, 3) == []


@pytest.mark.parametrize("text", ["Z1", "Q", "Z/2", ""])
def test_bad_coefficients(text):
    with pytest.raises(ValueError):
        Coefficients.parse(text)


def test_window_is_enforced():
    ring = EMRing.eilenberg_maclane(Coefficients(0), 4, 2, 10)
    with pytest.raises(WindowError):
        ring.basis(11)


def test_empty_row_renders_none():
    t = em_table(Coefficients(0), 2, 4, range(11))
    assert t.rows[5] == ["5", "", ""]
    from s4tower.tables import render

    assert render(t, "tsv").splitlines()[6] == "5\t(none)\t(none)"


@pytest.mark.parametrize("coeff, q", [(0, 4), (2, 5), (2, 6)])
def test_instability_p2(coeff, q):
    ring = EMRing.eilenberg_maclane(Coefficients(coeff), q, 2, 16)
    for i, g in enumerate(ring.gens):
        x = ring.gen(i)
        if 2 * g.degree <= 16:
            assert ring.act(op("Sq%d" % g.degree, 2), x) == ring.mul(x, x)
        for k in range(g.degree + 1, 16 - g.degree + 1):
            assert ring.act(op("Sq%d" % k, 2), x) == {}


def test_instability_p3():
    ring = EMRing.eilenberg_maclane(Coefficients(0), 4, 3, 16)
    x = ring.gen(0)
    assert ring.act(op("P2", 3), x) == ring.power(x, 3)
    assert ring.act(op("P3", 3), x) == {}


SPACES = [((0, 4), 2), ((2, 5), 2), ((0, 4), 3), ((3, 7), 3)]


@st.composite
def word_and_class(draw):
    (coeff, q), p = draw(st.sampled_from(SPACES))
    top = 16
    ring = EMRing.eilenberg_maclane(Coefficients(coeff), q, p, top)
    d = draw(st.integers(q, top - 1))
    basis = ring.basis(d)
    if not basis:
        return ring, (), {}
    e = draw(st.sampled_from(basis))
    pool = list(range(1, top - d + 1)) if p == 2 else [0] + list(range(1, (top - d) // (2 * (p - 1)) + 1))
    w = tuple(draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3)))
    if word_degree(w, p) + d > top:
        return ring, (), {}
    return ring, w, {e: 1}


@given(word_and_class())
def test_action_respects_adem(args):
    ring, w, x = args
    if not w:
        return
    raw = SteenrodElement.from_dict(ring.p, {w: 1})
    assert ring.act(raw, x) == ring.act(adem_normalize(raw), x)


@given(word_and_class(), st.data())
def test_action_is_additive(args, data):
    ring, w, x = args
    if not w:
        return
    (e,) = x
    other = data.draw(st.sampled_from(ring.basis(ring.mono_degree(e))))
    a = SteenrodElement.from_dict(ring.p, {w: 1})
    assert ring.act(a, ring.add(x, {other: 1})) == ring.add(ring.act(a, x), ring.act(a, {other: 1}))


@given(st.integers(0, 8), st.data())
def test_cartan_formula_p2(k, data):
    ring = EMRing.eilenberg_maclane(Coefficients(2), 5, 2, 20)
    small = [i for i, g in enumerate(ring.gens) if g.degree <= 8]
    i, j = data.draw(st.sampled_from(small)), data.draw(st.sampled_from(small))
    x, y = ring.gen(i), ring.gen(j)

    def sq(n, f):
        return ring.act(op("Sq%d" % n, 2), f) if n else f

    if ring.degree_of(ring.mul(x, y)) is None or ring.gens[i].degree + ring.gens[j].degree + k > 20:
        return
    expected = ring.add(*(ring.mul(sq(a, x), sq(k - a, y)) for a in range(k + 1)))
    assert sq(k, ring.mul(x, y)) == expected
