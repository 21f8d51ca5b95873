from fractions import Fraction as F

import pytest

from varlot import sections as sec
from varlot.lotteries import PrizeSet, delta, lottery_make
from varlot.preference import Family, TabulatedPreference, UtilityPreference
from varlot.representation import (
    DEFAULT_EPSILON,
    CalibrationError,
    ClassicalRejection,
    ClassicalResult,
    GlobalRep,
    GlueRepObstruction,
    LocalRep,
    PLT,
    RepFailure,
    TransformObstruction,
    check_monotonicity,
    classical_representation,
    constant_prize_representation,
    glue_representations,
    local_representation,
    rep_expected_utility,
    solve_calibration,
    uniqueness_transform,
    verify_representation,
)
from varlot.topology import (
    Atom,
    IntervalOpen,
    PosetOpen,
    canonical_cover,
    interval_space,
    space_from_poset,
)

P2 = PrizeSet(("z1", "z2"))


def ui_pref(space, w1, w2, prizes=P2):
    return UtilityPreference(prizes, (("z1", w1), ("z2", w2)))


@pytest.fixture
def seg01():
    return interval_space(F(0), F(1))


@pytest.fixture
def seg02():
    return interval_space(F(0), F(2))


def basic_lotteries(dom):
    d1 = delta(P2, dom, "z1")
    d2 = delta(P2, dom, "z2")
    m = lottery_make(
        P2, dom, {"z1": sec.constant(dom, F(1, 2)), "z2": sec.constant(dom, F(1, 2))}
    )
    return d1, d2, m


def test_check_monotonicity_pass(seg01):
    X = seg01.full()
    pref = ui_pref(seg01, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1, d2, _ = basic_lotteries(X)
    verdict = check_monotonicity(
        pref, d1, d2, sec.constant(X, F(1, 4)), sec.constant(X, F(3, 4)), X
    )
    assert verdict.passed


def test_check_monotonicity_precondition_failure(seg01):
    X = seg01.full()
    pref = ui_pref(seg01, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1, d2, _ = basic_lotteries(X)
    a = sec.constant(X, F(1, 2))
    verdict = check_monotonicity(pref, d1, d2, a, a, X)
    assert not verdict.passed and "a < b" in verdict.detail


def test_check_monotonicity_tabulated_component():
    space = space_from_poset(["0", "1", "2"], [("0", "1"), ("0", "2")])
    dom = space.full()
    d1, d2, m = basic_lotteries(dom)
    mk = lambda a: lottery_make(
        P2, dom, {"z1": sec.constant(dom, a), "z2": sec.constant(dom, 1 - a)}
    )
    h, l = mk(F(1, 4)), mk(F(3, 4))
    fam = Family((("d1", d1), ("d2", d2), ("m", m), ("h", h), ("l", l)))
    chain1 = ["d2", "h", "m", "l", "d1"]
    chain2 = ["d1", "l", "m", "h", "d2"]
    pairs1 = tuple((a, b) for i, a in enumerate(chain1) for b in chain1[i + 1 :])
    pairs2 = tuple((a, b) for i, a in enumerate(chain2) for b in chain2[i + 1 :])
    pref = TabulatedPreference(space, fam, (("1", pairs1), ("2", pairs2)))
    one = PosetOpen(space, frozenset({"1"}))
    # Mixes at weights 1/4 and 3/4 land exactly on the family members h and l.
    verdict = check_monotonicity(
        pref, d2, d1, sec.constant(one, F(1, 4)), sec.constant(one, F(3, 4)), one
    )
    assert verdict.passed


def test_calibration_symmetric_half(seg01):
    X = seg01.full()
    pref = ui_pref(seg01, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1, d2, m = basic_lotteries(X)
    res = solve_calibration(pref, d2, m, d1, X)
    assert res.exact
    assert sec.is_locally_constant(res.weight)
    assert res.weight.value_at(F(1, 3)) == F(1, 2)
    assert res.max_gap() <= DEFAULT_EPSILON
    for cert in res.certificate:
        assert cert.lower < F(1, 2) < cert.upper


def test_calibration_example3_constant_half(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = ui_pref(seg02, w1, sec.constant(X, F(1)))
    W = IntervalOpen(seg02, (Atom(F(0), F(1), True, False),))
    d1, d2, m = basic_lotteries(X)
    res = solve_calibration(pref, d2, m, d1, W)
    assert res.exact
    assert sec.is_locally_constant(res.weight)
    assert res.weight.value_at(F(1, 2)) == F(1, 2)


def test_calibration_variable_weight(seg02):
    # q puts weight x/2 on the better prize: the calibration weight is x/2.
    X = seg02.full()
    pref = ui_pref(seg02, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    half_x = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(1))])
    q = lottery_make(P2, X, {"z1": sec.sub(sec.constant(X, F(1)), half_x), "z2": half_x})
    res = solve_calibration(pref, d2, q, d1, X)
    assert res.exact
    assert res.weight.value_at(F(1)) == F(1, 2)
    assert res.weight.value_at(F(2)) == F(1)
    assert res.max_gap() <= DEFAULT_EPSILON
    # Certificate sandwiches the exact section at each sample stage, and each
    # in-range bound is forced on a neighborhood of the sample.
    for cert in res.certificate:
        assert cert.lower <= res.weight.value_at(cert.sample) <= cert.upper
        if 0 <= cert.lower <= 1:
            assert cert.lower_domain is not None
            assert cert.lower_domain.contains_point(cert.sample)
        if 0 <= cert.upper <= 1:
            assert cert.upper_domain is not None
            assert cert.upper_domain.contains_point(cert.sample)


def test_calibration_precondition_rejection(seg01):
    X = seg01.full()
    pref = ui_pref(seg01, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1, d2, m = basic_lotteries(X)
    with pytest.raises(CalibrationError, match=r"r < p"):
        solve_calibration(pref, m, m, m, X)
    with pytest.raises(CalibrationError, match=r"r <= q"):
        solve_calibration(pref, d2, m, d2, X)


def test_calibration_tabulated_exact_hit():
    space = space_from_poset(["a"], [])
    dom = space.full()
    d1, d2, m = basic_lotteries(dom)
    fam = Family((("d1", d1), ("d2", d2), ("m", m)))
    pref = TabulatedPreference(space, fam, (("a", (("d1", "m"), ("m", "d2"))),))
    res = solve_calibration(pref, d2, m, d1, dom)
    assert res.weight.value_at("a") == F(1, 2)
    assert res.max_gap() <= DEFAULT_EPSILON


def test_local_representation_example3_left(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = ui_pref(seg02, w1, sec.constant(X, F(1)))
    W = IntervalOpen(seg02, (Atom(F(0), F(1), True, False),))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    rep = local_representation(pref, W, fam, ("d1", "d2"))
    assert isinstance(rep, LocalRep)
    assert rep.weight("z1").value_at(F(1, 2)) == 0
    assert rep.weight("z2").value_at(F(1, 2)) == 1
    assert verify_representation(rep, pref, fam, W) == []


def test_local_representation_all_indifferent(seg01):
    X = seg01.full()
    w = sec.constant(X, F(5))
    pref = ui_pref(seg01, w, w)
    d1, d2, _ = basic_lotteries(X)
    fam = Family((("d1", d1), ("d2", d2)))
    rep = local_representation(pref, X, fam)
    assert isinstance(rep, LocalRep)
    assert rep.calibrations[0].kind == "indifferent"
    assert sec.not_equal_witness(rep.weight("z1"), F(0)) is None
    assert sec.not_equal_witness(rep.weight("z2"), F(0)) is None


def stage3_setup():
    space = space_from_poset(["0", "1", "2"], [("0", "1"), ("0", "2")])
    dom = space.full()
    d1, d2, m = basic_lotteries(dom)
    fam = Family((("d1", d1), ("d2", d2), ("m", m)))
    pref = TabulatedPreference(
        space,
        fam,
        (("1", (("d2", "m"), ("m", "d1"))), ("2", (("d1", "m"), ("m", "d2")))),
    )
    return space, fam, pref


def test_local_representation_stage3_discrete_subspace():
    space, fam, pref = stage3_setup()
    two = PosetOpen(space, frozenset({"1", "2"}))
    rep = local_representation(pref, two, fam, ("d1", "d2"))
    assert isinstance(rep, LocalRep)
    assert rep.weight("z1").value_at("1") == 1
    assert rep.weight("z2").value_at("1") == 0
    assert rep.weight("z1").value_at("2") == 0
    assert rep.weight("z2").value_at("2") == 1


def test_local_representation_fails_on_full_stage3():
    space, fam, pref = stage3_setup()
    rep = local_representation(pref, space.full(), fam, ("d1", "d2"))
    assert isinstance(rep, RepFailure)
    assert "neither all-indifferent nor strictly ranked" in rep.reason


def test_two_chart_crossing_prize(seg02):
    # Third prize crosses the unit: valued by the two-chart construction.
    prizes = PrizeSet(("z1", "z2", "z3"))
    X = seg02.full()
    x_sec = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = UtilityPreference(
        prizes,
        (("z1", sec.constant(X, F(0))), ("z2", sec.constant(X, F(1))), ("z3", x_sec)),
    )
    d1 = delta(prizes, X, "z1")
    d2 = delta(prizes, X, "z2")
    d3 = delta(prizes, X, "z3")
    fam = Family((("d1", d1), ("d2", d2), ("d3", d3)))
    rep = local_representation(pref, X, fam, ("d1", "d2"))
    assert isinstance(rep, LocalRep), rep
    got = rep.weight("z3")
    assert got.value_at(F(1, 2)) == F(1, 2)
    assert got.value_at(F(3, 2)) == F(3, 2)
    assert verify_representation(rep, pref, fam, X) == []


def test_uniqueness_identity(seg01):
    X = seg01.full()
    w1 = sec.constant(X, F(0))
    w2 = sec.constant(X, F(1))
    rep = LocalRep(X, P2, (("z1", w1), ("z2", w2)), ())
    t = uniqueness_transform(rep, rep, X)
    assert isinstance(t, PLT)
    assert sec.not_equal_witness(t.scale, F(1)) is None
    assert sec.not_equal_witness(t.shift, F(0)) is None


def test_uniqueness_planted_transform(seg01):
    X = seg01.full()
    x_sec = sec.from_breakpoints(X, [(F(0), F(0)), (F(1), F(1))])
    wa1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(1), F(1))])  # x
    wa2 = sec.constant(X, F(1))
    repA = LocalRep(X, P2, (("z1", wa1), ("z2", wa2)), ())
    wb1 = sec.add(sec.scale(wa1, F(3)), x_sec)  # 3x + x
    wb2 = sec.add(sec.scale(wa2, F(3)), x_sec)  # 3 + x
    repB = LocalRep(X, P2, (("z1", wb1), ("z2", wb2)), ())
    t = uniqueness_transform(repA, repB, X)
    assert isinstance(t, PLT)
    assert sec.not_equal_witness(t.scale, F(3)) is None
    assert sec.not_equal_witness(sec.sub(t.shift, x_sec), F(0)) is None
    for z in ("z1", "z2"):
        reproduced = t.apply(repA.weight(z))
        assert sec.not_equal_witness(sec.sub(reproduced, repB.weight(z)), F(0)) is None


def example3_reps(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])  # x
    w2 = sec.constant(X, F(1))
    rep_w = LocalRep(X, P2, (("z1", w1), ("z2", w2)), ())
    v1 = sec.constant(X, F(0))
    v2 = sec.from_breakpoints(X, [(F(0), F(2)), (F(1), F(0)), (F(2), F(-1))])
    rep_v = LocalRep(X, P2, (("z1", v1), ("z2", v2)), ())
    return rep_w, rep_v


def test_uniqueness_example3_obstruction(seg02):
    rep_w, rep_v = example3_reps(seg02)
    X = seg02.full()
    got = uniqueness_transform(rep_v, rep_w, X)
    assert isinstance(got, TransformObstruction)
    assert got.point == F(1)
    scales = {str(region): scale for region, scale, _ in got.partials}
    assert scales["[0,1)"] == F(1, 2)
    assert scales["(1,2]"] == F(1)
    # Per-side ratio oracle: (w2-w1)/(v2-v1) on each side of the kink.
    left = IntervalOpen(seg02, (Atom(F(0), F(1), True, False),))
    right = IntervalOpen(seg02, (Atom(F(1), F(2), False, True),))
    for side, expected in ((left, F(1, 2)), (right, F(1))):
        num = sec.sub(
            sec.restrict(rep_w.weight("z2"), side), sec.restrict(rep_w.weight("z1"), side)
        )
        den = sec.sub(
            sec.restrict(rep_v.weight("z2"), side), sec.restrict(rep_v.weight("z1"), side)
        )
        ratio = sec.divide(num, den)
        assert ratio is not None
        assert sec.not_equal_witness(ratio, expected) is None


def test_glue_representations_stage3_discrete():
    space, fam, pref = stage3_setup()
    one = PosetOpen(space, frozenset({"1"}))
    two = PosetOpen(space, frozenset({"2"}))
    target = PosetOpen(space, frozenset({"1", "2"}))
    rep = glue_representations(pref, fam, (one, two), target, ("d1", "d2"))
    assert isinstance(rep, GlobalRep)
    assert rep.weight("z1").value_at("1") == 1
    assert rep.weight("z1").value_at("2") == 0


def test_glue_representations_full_stage3_obstruction():
    space, fam, pref = stage3_setup()
    target = space.full()
    rep = glue_representations(pref, fam, canonical_cover(target), target, ("d1", "d2"))
    assert isinstance(rep, GlueRepObstruction)
    assert rep.element == space.full()


def test_glue_single_element_cover_roundtrip(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = ui_pref(seg02, w1, sec.constant(X, F(1)))
    W = IntervalOpen(seg02, (Atom(F(0), F(1), True, False),))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    rep = glue_representations(pref, fam, (W,), W, ("d1", "d2"))
    assert isinstance(rep, GlobalRep)
    local = local_representation(pref, W, fam, ("d1", "d2"))
    assert rep.weights == local.weights


def test_glue_overlapping_charts_aligned(seg02):
    X = seg02.full()
    pref = ui_pref(seg02, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    left = IntervalOpen(seg02, (Atom(F(0), F(3, 2), True, False),))
    right = IntervalOpen(seg02, (Atom(F(1, 2), F(2), False, True),))
    rep = glue_representations(pref, fam, (left, right), X, ("d1", "d2"))
    assert isinstance(rep, GlobalRep)
    assert sec.not_equal_witness(rep.weight("z1"), F(0)) is None
    assert sec.not_equal_witness(rep.weight("z2"), F(1)) is None


def test_restriction_naturality(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = ui_pref(seg02, w1, sec.constant(X, F(1)))
    W = IntervalOpen(seg02, (Atom(F(0), F(1), True, False),))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    rep = local_representation(pref, W, fam, ("d1", "d2"))
    V = IntervalOpen(seg02, (Atom(F(1, 4), F(3, 4), False, False),))
    from varlot.lotteries import mix, restrict_lottery

    lot = mix(sec.constant(X, F(1, 3)), d1, d2)
    left = sec.restrict(rep_expected_utility(rep, restrict_lottery(lot, W), W), V)
    right = rep_expected_utility(rep, restrict_lottery(lot, V), V)
    assert sec.not_equal_witness(sec.sub(left, right), F(0)) is None


def classical_two_point():
    space = space_from_poset(["a", "b"], [])
    dom = space.full()
    d1, d2, m = basic_lotteries(dom)
    fam = Family((("d1", d1), ("d2", d2)))
    pref = TabulatedPreference(space, fam, (("a", (("d1", "d2"),)),))
    return space, fam, pref


def test_classical_representation_two_point():
    space, fam, pref = classical_two_point()
    result = classical_representation(pref, fam, space)
    assert isinstance(result, ClassicalResult), result
    rep = result.rep
    assert rep.weight("z1").value_at("a") == 0
    assert rep.weight("z2").value_at("a") == 1
    assert rep.weight("z1").value_at("b") == rep.weight("z2").value_at("b")
    assert result.indifferent_region.points == frozenset({"b"})
    assert all("continuous" in c for c in result.indicator_checks)
    assert all(note.endswith("yes") for note in result.axiom_notes)


def test_classical_representation_rejects_stage3():
    space, fam, pref = stage3_setup()
    result = classical_representation(pref, fam, space)
    assert isinstance(result, ClassicalRejection)
    assert str(result.witness) == "{1}"


def test_classical_representation_singleton_vnm():
    space = space_from_poset(["s"], [])
    dom = space.full()
    d1, d2, m = basic_lotteries(dom)
    fam = Family((("d1", d1), ("d2", d2), ("m", m)))
    pref = TabulatedPreference(space, fam, (("s", (("d1", "m"), ("m", "d2"))),))
    result = classical_representation(pref, fam, space)
    assert isinstance(result, ClassicalResult)
    rep = result.rep
    assert rep.weight("z1").value_at("s") == 0
    assert rep.weight("z2").value_at("s") == 1


def test_constant_prize_representation_recovers_weights():
    space = interval_space(F(0), F(1))
    X = space.full()
    prizes = PrizeSet(("z1", "z2", "z3"))
    pref = UtilityPreference(
        prizes,
        (
            ("z1", sec.constant(X, F(0))),
            ("z2", sec.constant(X, F(1, 3))),
            ("z3", sec.constant(X, F(1))),
        ),
    )
    fam = Family(
        (
            ("d1", delta(prizes, X, "z1")),
            ("d2", delta(prizes, X, "z2")),
            ("d3", delta(prizes, X, "z3")),
        )
    )
    rep = constant_prize_representation(pref, fam, space, "d1", "d3")
    assert isinstance(rep, GlobalRep)
    assert sec.not_equal_witness(rep.weight("z2"), F(1, 3)) is None
    assert "u(z2) = 1/3" in rep.notes


def test_constant_prize_two_prizes():
    space = interval_space(F(0), F(1))
    X = space.full()
    pref = ui_pref(space, sec.constant(X, F(0)), sec.constant(X, F(1)))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    rep = constant_prize_representation(pref, fam, space, "d1", "d2")
    assert isinstance(rep, GlobalRep)
    assert sec.not_equal_witness(rep.weight("z1"), F(0)) is None
    assert sec.not_equal_witness(rep.weight("z2"), F(1)) is None


def test_constant_prize_rejects_example3(seg02):
    X = seg02.full()
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref = ui_pref(seg02, w1, sec.constant(X, F(1)))
    d1 = delta(P2, X, "z1")
    d2 = delta(P2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    got = constant_prize_representation(pref, fam, seg02, "d1", "d2")
    assert isinstance(got, ClassicalRejection)
    assert "violator pair (d1, d2)" in got.reason
