from fractions import Fraction as F

import pytest

from varlot import sections as sec
from varlot.lotteries import PrizeSet, delta, lottery_make
from varlot.preference import (
    Family,
    PreferenceError,
    TabulatedPreference,
    UtilityPreference,
    check_assumption6,
    check_assumption7,
    check_continuity,
    check_independence,
    check_minimal_comparability,
    check_weak_order,
    expected_utility,
    forces,
    truth_value,
)
from varlot.topology import PosetOpen, interval_space, space_from_poset

PRIZES2 = PrizeSet(("z1", "z2"))


@pytest.fixture
def stage3():
    return space_from_poset(["0", "1", "2"], [("0", "1"), ("0", "2")])


def stage3_family(space):
    dom = space.full()
    d1 = delta(PRIZES2, dom, "z1")
    d2 = delta(PRIZES2, dom, "z2")
    mk = lambda a: lottery_make(
        PRIZES2,
        dom,
        {"z1": sec.constant(dom, a), "z2": sec.constant(dom, 1 - a)},
    )
    return Family(
        (
            ("d1", d1),
            ("d2", d2),
            ("m", mk(F(1, 2))),
            ("h", mk(F(1, 4))),
            ("l", mk(F(3, 4))),
        )
    )


def stage3_pref(space, family):
    # Ranked by first coordinate at stage 1, by second at stage 2, silent at 0.
    chain1 = ["d2", "h", "m", "l", "d1"]
    chain2 = ["d1", "l", "m", "h", "d2"]
    pairs1 = tuple(
        (a, b) for i, a in enumerate(chain1) for b in chain1[i + 1 :]
    )
    pairs2 = tuple(
        (a, b) for i, a in enumerate(chain2) for b in chain2[i + 1 :]
    )
    return TabulatedPreference(space, family, (("1", pairs1), ("2", pairs2)))


@pytest.fixture
def example3_pref():
    space = interval_space(F(0), F(2))
    dom = space.full()
    w1 = sec.from_breakpoints(dom, [(F(0), F(0)), (F(2), F(2))])  # value x
    w2 = sec.constant(dom, F(1))
    return space, UtilityPreference(PRIZES2, (("z1", w1), ("z2", w2)))


def test_tabulated_truth_values_stage3(stage3):
    fam = stage3_family(stage3)
    pref = stage3_pref(stage3, fam)
    X = stage3.full()
    d1, d2 = fam.get("d1"), fam.get("d2")
    assert str(truth_value(pref, "prec", d2, d1, X)) == "{1}"
    assert str(truth_value(pref, "prec", d1, d2, X)) == "{2}"
    assert truth_value(pref, "sim", d1, d2, X).is_empty()
    assert truth_value(pref, "prec", d1, d2, X).points | truth_value(
        pref, "prec", d2, d1, X
    ).points == frozenset({"1", "2"})


def test_tabulated_rejects_unknown_lottery(stage3):
    fam = stage3_family(stage3)
    pref = stage3_pref(stage3, fam)
    other = lottery_make(
        PRIZES2,
        stage3.full(),
        {
            "z1": sec.constant(stage3.full(), F(1, 3)),
            "z2": sec.constant(stage3.full(), F(2, 3)),
        },
    )
    with pytest.raises(PreferenceError, match="family"):
        truth_value(pref, "prec", other, fam.get("d1"), stage3.full())


def test_tabulated_monotonicity_validated(stage3):
    fam = stage3_family(stage3)
    with pytest.raises(PreferenceError, match="monotone"):
        TabulatedPreference(stage3, fam, (("0", (("d1", "d2"),)),))


def test_tabulated_asymmetry_validated(stage3):
    fam = stage3_family(stage3)
    with pytest.raises(PreferenceError, match="asymmetric"):
        TabulatedPreference(stage3, fam, (("1", (("d1", "d2"), ("d2", "d1"))),))


def test_expected_utility_and_truth_values_example3(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    assert expected_utility(pref, d1, X).value_at(F(1, 2)) == F(1, 2)
    assert str(truth_value(pref, "prec", d1, d2, X)) == "[0,1)"
    assert str(truth_value(pref, "prec", d2, d1, X)) == "(1,2]"
    assert truth_value(pref, "sim", d1, d2, X).is_empty()


def test_sim_reflexive_and_preceq_definitional(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    assert truth_value(pref, "sim", d1, d1, X) == X
    from varlot.topology import not_within

    assert truth_value(pref, "preceq", d1, d2, X) == not_within(
        truth_value(pref, "prec", d2, d1, X), X
    )


def test_equal_weights_make_everything_indifferent():
    space = interval_space(F(0), F(1))
    X = space.full()
    w = sec.constant(X, F(1))
    pref = UtilityPreference(PRIZES2, (("z1", w), ("z2", w)))
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    assert truth_value(pref, "sim", d1, d2, X) == X


def test_weak_order_utility_passes(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    report = check_weak_order(pref, fam, X)
    assert report.passed, [f.detail for f in report.findings]


def test_weak_order_tabulated_passes(stage3):
    fam = stage3_family(stage3)
    pref = stage3_pref(stage3, fam)
    report = check_weak_order(pref, fam, stage3.full())
    assert report.passed, [f.detail for f in report.findings]


def test_local_character_counterexample_proper_opens_only():
    # Rank by the first coordinate on proper opens; deny every global strict
    # assertion: each proper cover piece forces d2 < d1, the union does not.
    space = interval_space(F(0), F(1))
    X = space.full()
    w1 = sec.constant(X, F(1))
    w2 = sec.constant(X, F(0))
    pref = UtilityPreference(PRIZES2, (("z1", w1), ("z2", w2)), proper_opens_only=True)
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    assert not forces(pref, "prec", d2, d1, X)
    report = check_weak_order(pref, fam, X)
    assert not report.passed
    kinds = {f.kind for f in report.findings}
    assert kinds == {"local-character"}
    for f in report.findings:
        assert f.replay is not None and f.replay()


def test_independence_utility_passes(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    mixers = (("half", sec.constant(X, F(1, 2))), ("one", sec.constant(X, F(1))))
    report = check_independence(pref, fam, mixers, X)
    assert report.passed


def test_independence_rejects_bad_mixer(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    fam = Family((("d1", d1),))
    with pytest.raises(PreferenceError, match="positive"):
        check_independence(pref, fam, (("zero", sec.constant(X, F(0))),), X)


def test_independence_planted_violation():
    # A deliberately corrupted table: d1 < d2, yet the half-half mixture is
    # ranked BELOW d2's mixture counterpart.  The checker must catch it.
    space = space_from_poset(["a"], [])
    dom = space.full()
    d1 = delta(PRIZES2, dom, "z1")
    d2 = delta(PRIZES2, dom, "z2")
    m = lottery_make(
        PRIZES2, dom, {"z1": sec.constant(dom, F(1, 2)), "z2": sec.constant(dom, F(1, 2))}
    )
    fam = Family((("d1", d1), ("d2", d2), ("m", m)))
    # mix(1/2, d1, d2) = m and mix(1/2, d2, d2) = d2, so independence demands
    # m < d2 given d1 < d2; the table records the reverse.
    pref = TabulatedPreference(space, fam, (("a", (("d1", "d2"), ("d2", "m"))),))
    report = check_independence(pref, fam, (("half", sec.constant(dom, F(1, 2))),), dom)
    assert not report.passed
    assert any(f.kind == "independence" for f in report.findings)
    for f in report.findings:
        if f.replay is not None:
            assert f.replay()


def test_continuity_utility_interval():
    space = interval_space(F(0), F(1))
    X = space.full()
    pref = UtilityPreference(
        PRIZES2, (("z1", sec.constant(X, F(0))), ("z2", sec.constant(X, F(1))))
    )
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    m = lottery_make(
        PRIZES2, X, {"z1": sec.constant(X, F(1, 2)), "z2": sec.constant(X, F(1, 2))}
    )
    fam = Family((("d1", d1), ("d2", d2), ("m", m)))
    report = check_continuity(pref, fam, X)
    assert report.passed
    assert any(f.kind == "witness" for f in report.findings)


def test_continuity_tabulated_stage3(stage3):
    fam = stage3_family(stage3)
    pref = stage3_pref(stage3, fam)
    one = PosetOpen(stage3, frozenset({"1"}))
    report = check_continuity(pref, fam, one)
    assert report.passed
    assert any(f.kind == "witness" for f in report.findings)


def test_minimal_comparability_stage3_fails_at_0(stage3):
    fam = stage3_family(stage3)
    pref = stage3_pref(stage3, fam)
    report = check_minimal_comparability(pref, fam, stage3)
    assert not report.passed
    assert "witness point 0" in report.findings[0].detail


def test_minimal_comparability_example3_fails_at_1(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    report = check_minimal_comparability(pref, fam, space)
    assert not report.passed
    assert "witness point 1:" in report.findings[0].detail


def test_assumption6_examples(stage3, example3_pref):
    fam3 = stage3_family(stage3)
    pref3 = stage3_pref(stage3, fam3)
    report = check_assumption6(pref3, fam3, stage3)
    assert not report.passed

    space, prefw = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    assert not check_assumption6(prefw, fam, space).passed

    # Adding a third prize with globally separated weights restores a global
    # strict pair, resolving the gluing difficulty.
    prizes3 = PrizeSet(("z1", "z2", "z3"))
    w1 = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(2))])
    pref3p = UtilityPreference(
        prizes3,
        (("z1", w1), ("z2", sec.constant(X, F(1))), ("z3", sec.constant(X, F(3)))),
    )
    famp = Family(
        (
            ("d1", delta(prizes3, X, "z1")),
            ("d2", delta(prizes3, X, "z2")),
            ("d3", delta(prizes3, X, "z3")),
        )
    )
    report = check_assumption6(pref3p, famp, space)
    assert report.passed
    assert "forced on the whole carrier" in report.findings[0].detail


def test_assumption6_all_indifferent_passes():
    space = interval_space(F(0), F(1))
    X = space.full()
    w = sec.constant(X, F(2))
    pref = UtilityPreference(PRIZES2, (("z1", w), ("z2", w)))
    fam = Family((("d1", delta(PRIZES2, X, "z1")), ("d2", delta(PRIZES2, X, "z2"))))
    report = check_assumption6(pref, fam, space)
    assert report.passed
    assert "trivial cover" in report.findings[0].detail


def test_assumption7(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    fam = Family((("d1", d1), ("d2", d2)))
    report = check_assumption7(pref, fam, space)
    assert not report.passed
    assert "violator pair (d1, d2)" in report.findings[0].detail
    # Constant weights pass.
    prefc = UtilityPreference(
        PRIZES2, (("z1", sec.constant(X, F(0))), ("z2", sec.constant(X, F(1))))
    )
    assert check_assumption7(prefc, fam, space).passed
    # A single lottery is a vacuous pass.
    assert check_assumption7(pref, Family((("d1", d1),)), space).passed


def test_assumption7_requires_constant_lotteries(example3_pref):
    space, pref = example3_pref
    X = space.full()
    x = sec.from_breakpoints(X, [(F(0), F(0)), (F(2), F(1))])
    varying = lottery_make(
        PRIZES2,
        X,
        {"z1": x, "z2": sec.sub(sec.constant(X, F(1)), x)},
    )
    with pytest.raises(PreferenceError, match="constant"):
        check_assumption7(pref, Family((("v", varying),)), space)


def test_asymmetry_invariant_utility(example3_pref):
    space, pref = example3_pref
    X = space.full()
    d1 = delta(PRIZES2, X, "z1")
    d2 = delta(PRIZES2, X, "z2")
    from varlot.topology import meet

    assert meet(
        truth_value(pref, "prec", d1, d2, X), truth_value(pref, "prec", d2, d1, X)
    ).is_empty()
