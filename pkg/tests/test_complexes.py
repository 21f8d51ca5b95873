from fractions import Fraction as F

import pytest

from varlot.complexes import (
    AffineMap,
    ComplexError,
    FaceChart,
    FaceComplex,
    HarmonizationObstruction,
    HarmonizationResult,
    harmonize_complex,
)


def vertex(name, value=F(0)):
    return FaceChart(name, (name,), ((name, value),))


def edge(name, a, va, b, vb):
    return FaceChart(name, (a, b), ((a, va), (b, vb)))


def triangle_complex():
    return FaceComplex(
        (
            vertex("a"),
            vertex("b"),
            vertex("c"),
            edge("ab", "a", F(0), "b", F(1)),
            edge("ac", "a", F(0), "c", F(2)),
            edge("bc", "b", F(0), "c", F(1)),
            FaceChart("abc", ("a", "b", "c"), None),
        )
    )


def test_triangle_harmonizes_with_hand_solved_values():
    result = harmonize_complex(triangle_complex())
    assert isinstance(result, HarmonizationResult)
    abc = result.chart("abc")
    # Adopts edge ab's zero/unit; c chains through ac at unit scale.
    assert abc.value("a") == 0
    assert abc.value("b") == 1
    assert abc.value("c") == 2
    assert result.map_for("ab", "abc") == AffineMap(F(1), F(0))
    assert result.map_for("ac", "abc") == AffineMap(F(1), F(0))
    assert result.map_for("bc", "abc") == AffineMap(F(1), F(1))


def test_identity_attachment_is_identity():
    result = harmonize_complex(triangle_complex())
    for name in ("a", "ab", "abc"):
        assert result.map_for(name, name) == AffineMap(F(1), F(0))


def test_functoriality_on_all_length_two_paths():
    result = harmonize_complex(triangle_complex())
    assert result.functorial_checks > 0
    by_pair = {(a, b): m for a, b, m in result.maps}
    for (a, b), m1 in by_pair.items():
        for (b2, c), m2 in by_pair.items():
            if b2 != b or (a, c) not in by_pair:
                continue
            composed = m2.compose(m1)
            direct = by_pair[(a, c)]
            src = result.chart(a)
            for v in src.vertices:
                assert composed.apply(src.value(v)) == direct.apply(src.value(v))


def test_two_triangles_sharing_an_edge():
    complex_ = FaceComplex(
        (
            vertex("a"),
            vertex("b"),
            vertex("c"),
            vertex("d"),
            edge("ab", "a", F(0), "b", F(1)),
            edge("ac", "a", F(0), "c", F(2)),
            edge("bc", "b", F(0), "c", F(1)),
            edge("ad", "a", F(0), "d", F(3)),
            edge("bd", "b", F(0), "d", F(2)),
            FaceChart("abc", ("a", "b", "c"), None),
            FaceChart("abd", ("a", "b", "d"), None),
        )
    )
    result = harmonize_complex(complex_)
    assert isinstance(result, HarmonizationResult)
    assert result.chart("abd").value("d") == 3
    # Shared edge ab maps identically into both triangles.
    assert result.map_for("ab", "abc") == result.map_for("ab", "abd")


def test_cyclic_rankings_obstruct():
    complex_ = FaceComplex(
        (
            vertex("a"),
            vertex("b"),
            vertex("c"),
            edge("ab", "a", F(0), "b", F(1)),
            edge("ac", "c", F(0), "a", F(1)),
            edge("bc", "b", F(0), "c", F(1)),
            FaceChart("abc", ("a", "b", "c"), None),
        )
    )
    got = harmonize_complex(complex_)
    assert isinstance(got, HarmonizationObstruction)
    assert "bc" in got.cycle
    assert "order-reversing" in got.detail


def test_mismatched_scale_edges_still_harmonize():
    # bc ranks c three units above b; chaining still finds consistent values,
    # with a non-unit scale on the bc attachment.
    complex_ = FaceComplex(
        (
            vertex("a"),
            vertex("b"),
            vertex("c"),
            edge("ab", "a", F(0), "b", F(1)),
            edge("ac", "a", F(0), "c", F(2)),
            edge("bc", "b", F(0), "c", F(3)),
            FaceChart("abc", ("a", "b", "c"), None),
        )
    )
    result = harmonize_complex(complex_)
    assert isinstance(result, HarmonizationResult)
    assert result.chart("abc").value("c") == 2
    assert result.map_for("bc", "abc") == AffineMap(F(1, 3), F(1))
    # Composition through bc still matches the direct vertex maps pointwise.
    direct = result.map_for("c", "abc")
    via_bc = result.map_for("bc", "abc").compose(result.map_for("c", "bc"))
    assert via_bc.apply(F(0)) == direct.apply(F(0))


def test_validation_errors():
    with pytest.raises(ComplexError, match="undeclared vertex"):
        FaceComplex((edge("ab", "a", F(0), "b", F(1)),))
    with pytest.raises(ComplexError, match="distinct"):
        FaceComplex((vertex("a"), vertex("a")))
