"""Transfer of pullback classes and direct M_2k computation"""

from fractions import Fraction

import pytest

from bundles import (
    DiskBundle, Double, FiberProduct, FiberStats, Handle, Hatcher, MorseBundle,
    RelDiskBundle, SphereBundle, Trivial, UnionVertical, VerticalBoundary,
)
from chern import VirtualBundle, ch4k, parse_class, zero_class
from errors import UnsupportedNode
from torsion import mmm_theory, tau
from transfer import (
    TotalSpaceClass, m2k_degree_zero, m2k_direct, relative_transfer_identities,
    transfer_additivity, transfer_pullback, vertical_tangent,
)

x = VirtualBundle.line("x")
y = VirtualBundle.line("y")


def trivial(rank):
    return VirtualBundle.trivial(rank)


def test_m2k_of_even_sphere():
    assert str(m2k_direct(SphereBundle(x + trivial(1), 2), 1)) == "2*x^2"
    assert m2k_direct(SphereBundle(x + trivial(2), 3), 1) == zero_class(4)


def test_vertical_tangent_bundles():
    assert vertical_tangent(SphereBundle(x + trivial(1), 2)) == x
    assert vertical_tangent(FiberProduct(DiskBundle(x), RelDiskBundle(y))) == x + y
    with pytest.raises(UnsupportedNode):
        vertical_tangent(Double(DiskBundle(x)))


@pytest.mark.parametrize("k", [1, 2])
def test_m2k_matches_mmm_torsion_on_every_node_kind(k):
    disk = DiskBundle(x + trivial(1))
    base = SphereBundle(x + trivial(1), 2)
    handles = (Handle(1, trivial(1), x), Handle(2, x, trivial(1)))
    exprs = [
        disk,
        RelDiskBundle(x + y),
        Double(disk),
        VerticalBoundary(disk),
        UnionVertical(disk, disk),
        FiberProduct(RelDiskBundle(y + trivial(1)), disk),
        MorseBundle(base, handles),
        MorseBundle(None, (Handle(0, trivial(0), x + y),)),
        Hatcher(x, 4, 10),
        Trivial(2, FiberStats(2, 2)),
    ]
    for expr in exprs:
        assert m2k_direct(expr, k) == tau(mmm_theory(k), expr)


def test_transfer_multiplies_by_relative_euler_characteristic():
    y_class = parse_class("x^2")
    assert str(TotalSpaceClass(SphereBundle(x + trivial(1), 2), y_class).transfer()) == "2*x^2"
    assert transfer_pullback(RelDiskBundle(x + trivial(1)), y_class) == -1 * y_class
    assert transfer_pullback(SphereBundle(x, 1), y_class) == zero_class(4)


def test_total_space_classes_need_degree_4k():
    with pytest.raises(ValueError):
        TotalSpaceClass(DiskBundle(x), parse_class("x"))


def test_relative_transfer_identities():
    y_class = ch4k(x, 1)
    for expr in (RelDiskBundle(x + trivial(1)), DiskBundle(x + trivial(2)), Hatcher(x, 3, 5)):
        found = relative_transfer_identities(expr, y_class)
        assert found.restriction_holds
        assert found.duality_holds
        assert found.holds


def test_transfer_additivity_on_a_double():
    disk = DiskBundle(x + trivial(1))
    lhs, rhs = transfer_additivity(disk, disk, ch4k(x, 1))
    assert lhs == rhs
    assert lhs == zero_class(4)


def test_degree_zero_value():
    assert m2k_degree_zero(SphereBundle(x + trivial(1), 2)) == 2
    assert m2k_degree_zero(RelDiskBundle(x + trivial(1))) == Fraction(-3, 2)
