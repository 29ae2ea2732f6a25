"""Chern roots, virtual bundles and ch_4k"""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chern import (
    ChernRoot, GradedClass, VirtualBundle, bundle_to_text, ch4k, class_add, class_mul,
    class_to_text, complement, parse_class, whitney_sum, zero_class,
)
from errors import DegreeMismatch
from scalars import Scalar

roots = st.sampled_from(["x", "y", "w"])
bundles = st.builds(
    lambda items, trivial: VirtualBundle(tuple(items), trivial),
    st.lists(st.tuples(roots, st.integers(-2, 2)), max_size=3),
    st.integers(-3, 4),
)


def test_complement_of_a_line():
    eta = complement(VirtualBundle.line("x"), 10)
    assert eta.roots == ((ChernRoot("x"), -1),)
    assert eta.trivial_rank == 10
    assert (VirtualBundle.line("x") + eta).is_trivial()
    assert (VirtualBundle.line("x") + eta).rank == 10


def test_ch_of_a_line(line_x):
    assert ch4k(line_x, 1) == GradedClass((((("x", 2),), Fraction(1, 2)),), 4)
    assert class_to_text(ch4k(line_x, 1)) == "1/2*x^2"
    assert class_to_text(ch4k(line_x, 2)) == "1/24*x^4"


def test_ch_needs_positive_degree(line_x):
    with pytest.raises(ValueError):
        ch4k(line_x, 0)


def test_trivial_summands_are_invisible(line_x):
    assert ch4k(line_x + VirtualBundle.trivial(5), 1) == ch4k(line_x, 1)
    assert ch4k(VirtualBundle.trivial(3), 2) == zero_class(8)


def test_degree_mismatch_is_rejected(line_x):
    with pytest.raises(DegreeMismatch):
        class_add(ch4k(line_x, 1), ch4k(line_x, 2))
    with pytest.raises(DegreeMismatch):
        GradedClass((((("x", 1),), 1),), 4)


def test_product_of_classes_adds_degrees(line_x):
    square = class_mul(ch4k(line_x, 1), ch4k(VirtualBundle.line("y"), 1))
    assert square.degree == 8
    assert class_to_text(square) == "1/4*x^2*y^2"


def test_class_text_with_zeta_coefficients(line_x):
    cls = Scalar.zeta(3, Fraction(-1, 2)) * ch4k(line_x, 1)
    assert str(cls) == "-1/4*z3*x^2"
    assert parse_class("-1/4*z3*x^2") == cls
    assert parse_class("0", degree=4) == zero_class(4)
    with pytest.raises(DegreeMismatch):
        parse_class("x^2 + y")


def test_bundle_text():
    assert bundle_to_text(VirtualBundle()) == "trivial(0)"
    xi = VirtualBundle((("x", 2), ("y", -1)), 1)
    assert bundle_to_text(xi) == "line(x) + line(x) + complement(line(y), 0) + trivial(1)"


def test_invalid_root_name():
    with pytest.raises(ValueError):
        ChernRoot("1x")


@given(bundles, bundles, st.integers(1, 3))
def test_ch_is_additive(a, b, k):
    assert ch4k(whitney_sum(a, b), k) == ch4k(a, k) + ch4k(b, k)


@given(bundles, st.integers(0, 12))
def test_complement_sums_to_trivial(xi, total):
    eta = complement(xi, total)
    assert (xi + eta).is_trivial()
    assert (xi + eta).rank == total
    assert ch4k(eta, 1) == -ch4k(xi, 1)


@given(bundles, st.integers(1, 2))
def test_class_text_round_trip(xi, k):
    cls = Scalar.zeta(3, Fraction(3, 2)) * ch4k(xi, k) + ch4k(xi, k)
    assert parse_class(class_to_text(cls), degree=4 * k) == cls
