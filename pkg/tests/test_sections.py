from fractions import Fraction as F

import pytest

from varlot import sections as sec
from varlot.topology import (
    Atom,
    IntervalOpen,
    PosetOpen,
    interval_space,
    space_from_poset,
)


@pytest.fixture
def stage3():
    return space_from_poset(["0", "1", "2"], [("0", "1"), ("0", "2")])


@pytest.fixture
def seg():
    return interval_space(F(0), F(2))


@pytest.fixture
def sym():
    return interval_space(F(-1), F(1))


def test_poset_constant_and_restrict(stage3):
    s = sec.constant(stage3.full(), F(3))
    sub = PosetOpen(stage3, frozenset({"1", "2"}))
    r = sec.restrict(s, sub)
    assert r.value_at("1") == 3 and r.value_at("2") == 3
    assert len(components(r.domain)) == 2 if (components := __import__("varlot.topology", fromlist=["components"]).components) else True


def test_poset_section_needs_component_constant(stage3):
    with pytest.raises(sec.SectionError, match="constant"):
        sec.from_point_values(stage3.full(), {"0": F(1), "1": F(1), "2": F(2)})
    two = PosetOpen(stage3, frozenset({"1", "2"}))
    s = sec.from_point_values(two, {"1": F(1), "2": F(2)})
    assert s.value_at("2") == 2


def test_restriction_identity_and_transitivity(seg):
    x = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(2), F(2))])
    assert sec.restrict(x, x.domain) == x
    v = IntervalOpen(seg, (Atom(F(0), F(3, 2), True, False),))
    w = IntervalOpen(seg, (Atom(F(1), F(3, 2), False, False),))
    assert sec.restrict(sec.restrict(x, v), w) == sec.restrict(x, w)


def test_restrict_outside_rejected(seg):
    v = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    s = sec.constant(v, F(1))
    with pytest.raises(sec.SectionError):
        sec.restrict(s, seg.full())


def test_evaluate_piecewise(seg):
    s = sec.from_breakpoints(seg.full(), [(F(0), F(1)), (F(1), F(0)), (F(2), F(1))])
    assert s.value_at(F(1, 2)) == F(1, 2)
    assert s.value_at(F(1)) == 0
    assert s.value_at(F(3, 2)) == F(1, 2)


def test_arithmetic_and_exactness(seg):
    x = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(2), F(2))])
    c = sec.constant(seg.full(), F(3))
    assert sec.add(x, c).value_at(F(1)) == 4
    assert sec.mul(c, x).value_at(F(1)) == 3
    with pytest.raises(sec.ExactnessError):
        sec.mul(x, x)


def test_divide_cases(seg):
    x = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(2), F(2))])
    c2 = sec.constant(seg.full(), F(2))
    half = sec.divide(x, c2)
    assert half is not None and half.value_at(F(1)) == F(1, 2)
    # Proportional: (2-2x)/(1-x) == 2 on [0,1).
    dom = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    num = sec.from_breakpoints(dom, [(F(0), F(2)), (F(1), F(0))])
    den = sec.from_breakpoints(dom, [(F(0), F(1)), (F(1), F(0))])
    q = sec.divide(num, den)
    assert q is not None and q.value_at(F(1, 2)) == 2 and sec.is_locally_constant(q)
    # Genuine hyperbola: (x+1)/(x+... ) not proportional, denominator non-constant.
    num2 = sec.from_breakpoints(seg.full(), [(F(0), F(1)), (F(2), F(3))])
    den2 = sec.from_breakpoints(seg.full(), [(F(0), F(1)), (F(2), F(2))])
    assert sec.divide(num2, den2) is None
    # Vanishing denominator.
    assert sec.divide(c2, x) is None


def test_compare_figure1_surrogate(sym):
    f = sec.from_breakpoints(sym.full(), [(F(-1), F(0)), (F(0), F(0)), (F(1), F(1))])
    g = sec.constant(sym.full(), F(1, 2))
    cmpres = sec.compare(f, g, sym.full())
    assert str(cmpres.lt) == "[-1,1/2)"
    assert str(cmpres.gt) == "(1/2,1]"
    assert cmpres.eq.is_empty()


def test_compare_equal_sections(seg):
    f = sec.from_breakpoints(seg.full(), [(F(0), F(1)), (F(2), F(5))])
    got = sec.compare(f, f, seg.full())
    assert got.eq == seg.full()
    assert got.lt.is_empty() and got.gt.is_empty()


def test_compare_poset_componentwise(stage3):
    two = PosetOpen(stage3, frozenset({"1", "2"}))
    f = sec.from_point_values(two, {"1": F(1), "2": F(3)})
    g = sec.constant(two, F(2))
    got = sec.compare(f, g, two)
    assert got.lt.points == frozenset({"1"})
    assert got.gt.points == frozenset({"2"})
    assert got.eq.is_empty()


def test_compare_antisymmetric_swap(seg):
    f = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(2), F(2))])
    g = sec.constant(seg.full(), F(1))
    a = sec.compare(f, g, seg.full())
    b = sec.compare(g, f, seg.full())
    assert a.lt == b.gt and a.gt == b.lt and a.eq == b.eq


def test_compare_eq_is_interior(seg):
    # f == g exactly on [1,2]; interior relative to [0,2] is (1,2].
    f = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(1), F(1)), (F(2), F(1))])
    g = sec.constant(seg.full(), F(1))
    got = sec.compare(f, g, seg.full())
    assert str(got.eq) == "(1,2]"
    assert str(got.lt) == "[0,1)"


def test_glue_poset(stage3):
    one = PosetOpen(stage3, frozenset({"1"}))
    two = PosetOpen(stage3, frozenset({"2"}))
    s1 = sec.constant(one, F(3))
    s2 = sec.constant(two, F(5))
    glued = sec.glue([s1, s2])
    assert isinstance(glued, sec.PosetSection)
    assert glued.value_at("1") == 3 and glued.value_at("2") == 5


def test_glue_poset_obstruction(stage3):
    two = PosetOpen(stage3, frozenset({"1", "2"}))
    s1 = sec.constant(two, F(3))
    s2 = sec.constant(PosetOpen(stage3, frozenset({"2"})), F(5))
    got = sec.glue([s1, s2])
    assert isinstance(got, sec.GlueObstruction)
    assert got.point == "2"
    assert {got.first, got.second} == {F(3), F(5)}


def test_glue_interval_same_formula(seg):
    u = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    v = IntervalOpen(seg, (Atom(F(1, 2), F(2), False, True),))
    s1 = sec.from_breakpoints(u, [(F(0), F(0)), (F(1), F(1))])
    s2 = sec.from_breakpoints(v, [(F(1, 2), F(1, 2)), (F(2), F(2))])
    glued = sec.glue([s1, s2])
    assert isinstance(glued, sec.IntervalSection)
    assert glued.domain == seg.full()
    assert glued.value_at(F(2)) == 2


def test_glue_interval_obstruction(seg):
    u = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    v = IntervalOpen(seg, (Atom(F(1, 2), F(2), False, True),))
    s1 = sec.constant(u, F(0))
    s2 = sec.constant(v, F(1))
    got = sec.glue([s1, s2])
    assert isinstance(got, sec.GlueObstruction)
    assert F(1, 2) < got.point < F(1)


def test_glue_then_restrict_roundtrip(seg):
    u = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    v = IntervalOpen(seg, (Atom(F(1, 2), F(2), False, True),))
    s1 = sec.from_breakpoints(u, [(F(0), F(1)), (F(1), F(3))])
    s2 = sec.from_breakpoints(v, [(F(1, 2), F(2)), (F(2), F(5))])
    glued = sec.glue([s1, s2])
    assert sec.restrict(glued, u) == s1
    assert sec.restrict(glued, v) == s2


def test_compare_restriction_naturality(seg):
    f = sec.from_breakpoints(seg.full(), [(F(0), F(0)), (F(2), F(2))])
    g = sec.constant(seg.full(), F(1))
    v = IntervalOpen(seg, (Atom(F(1, 2), F(3, 2), False, False),))
    whole = sec.compare(f, g, seg.full())
    local = sec.compare(sec.restrict(f, v), sec.restrict(g, v), v)
    from varlot.topology import meet

    assert meet(whole.lt, v) == local.lt
    assert meet(whole.gt, v) == local.gt


def test_witness_helpers(seg):
    s = sec.from_breakpoints(seg.full(), [(F(0), F(1)), (F(2), F(-1))])
    w = sec.negative_witness(s)
    assert w is not None and s.value_at(w) < 0
    assert sec.negative_witness(sec.constant(seg.full(), F(0))) is None
    t = sec.not_equal_witness(s, F(1))
    assert t is not None and s.value_at(t) != 1
    assert sec.not_equal_witness(sec.constant(seg.full(), F(1)), F(1)) is None


def test_negative_witness_open_endpoint(seg):
    dom = IntervalOpen(seg, (Atom(F(0), F(1), True, False),))
    # Negative only in the approach to the excluded endpoint 1.
    s = sec.from_breakpoints(dom, [(F(0), F(1)), (F(1), F(-1))])
    w = sec.negative_witness(s)
    assert w is not None
    assert s.value_at(w) < 0
