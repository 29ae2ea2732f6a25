"""Torsion theories evaluated on bundle expressions"""

from fractions import Fraction
from math import factorial

import pytest

from bundles import (
    DiskBundle, Double, FiberProduct, FiberStats, Handle, Hatcher, MorseBundle,
    RelDiskBundle, SphereBundle, Trivial, UnionHandle, VerticalBoundary,
)
from chern import VirtualBundle, ch4k, zero_class
from errors import MalformedExpression, NotDecomposable
from scalars import Scalar
from torsion import (
    TorsionEvaluator, TorsionTheory, decompose, difference_torsion, even_fiber_constant,
    fr_odd_part, fr_theory, mmm_theory, profile, tau, tau_absolute, tau_dual, tau_even,
    tau_odd,
)
from verify import generic_theories

x = VirtualBundle.line("x")


def trivial(rank):
    return VirtualBundle.trivial(rank)


def sphere(n):
    return SphereBundle(x + trivial(n - 1), n)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n", range(1, 7))
def test_fr_sphere_values(k, n):
    expected = Scalar.zeta(2 * k + 1, (-1) ** (k + n)) * ch4k(x, k)
    assert tau(fr_theory(k), sphere(n)) == expected


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n", [2, 4, 6])
def test_mmm_even_sphere_values(k, n):
    assert tau(mmm_theory(k), sphere(n)) == 2 * factorial(2 * k) * ch4k(x, k)
    assert tau(mmm_theory(k), sphere(n - 1)) == zero_class(4 * k)


def test_theory_parameters():
    fr = fr_theory(1)
    assert fr.s1 == Scalar.zeta(3, Fraction(1, 2))
    assert fr.s2 == Scalar.zeta(3, Fraction(-1, 2))
    assert fr_theory(2).s1 == Scalar.zeta(5, Fraction(-1, 2))
    assert mmm_theory(2) == TorsionTheory(2, 0, 24)
    with pytest.raises(ValueError):
        TorsionTheory(0, 1, 1)


def test_disk_and_relative_disk():
    theory = TorsionTheory(1, Scalar.zeta(3), Scalar.of(2) - Scalar.zeta(3))
    xi = x + VirtualBundle.line("y")
    ch = ch4k(xi, 1)
    assert tau(theory, DiskBundle(xi)) == 2 * ch
    assert tau(theory, RelDiskBundle(xi)) == (2 - 2 * Scalar.zeta(3)) * ch
    assert tau(theory, DiskBundle(trivial(3))) == zero_class(4)


@pytest.mark.parametrize("n", range(2, 7))
def test_hatcher_closed_form_for_generic_parameters(n):
    for theory in generic_theories(20, 1, seed=n):
        hatcher = Hatcher(x, n, n + 3)
        expected = (-1) ** (n + 1) * 2 * theory.s1 * ch4k(x, 1)
        assert tau(theory, hatcher) == expected
    assert tau(mmm_theory(1), Hatcher(x, n, n + 3)) == zero_class(4)


def test_hatcher_pads_small_bundles():
    theory = fr_theory(1)
    assert tau(theory, Hatcher(x, 5, 8)) == tau(theory, Hatcher(x + trivial(3), 5, 8))


def test_morse_bundle_with_base():
    base = SphereBundle(x + trivial(1), 2)
    handles = (Handle(1, trivial(1), x), Handle(2, x, trivial(1)))
    morse = MorseBundle(base, handles)
    fr = fr_theory(1)
    assert str(tau(fr, morse)) == "-1/2*z3*x^2"
    assert str(tau_absolute(fr, morse)) == "-z3*x^2"
    assert str(tau(fr, VerticalBoundary(morse))) == "-z3*x^2"
    assert tau(fr, morse.reordered(handles[::-1])) == tau(fr, morse)


def test_morse_sphere_matches_sphere_bundle():
    theory = TorsionTheory(1, Scalar.zeta(3, 3), 7)
    for n in range(1, 5):
        plane = x + trivial(n - 2)
        morse = MorseBundle(None, (Handle(0, trivial(0), plane), Handle(n, plane, trivial(0))))
        assert tau(theory, morse) == tau(theory, SphereBundle(plane + trivial(1), n))


def test_double_and_boundary_definition():
    theory = TorsionTheory(1, Scalar.zeta(3, 2), Scalar.of(5))
    disk = DiskBundle(x + trivial(1))
    # D(D^3) = S^3 and dv D^3 = S^2
    assert tau(theory, Double(disk)) == tau(theory, SphereBundle(x + trivial(2), 3))
    assert tau(theory, VerticalBoundary(disk)) == tau(theory, SphereBundle(x + trivial(1), 2))
    half = Fraction(1, 2)
    assert tau_absolute(theory, disk) == half * tau(theory, Double(disk)) + half * tau(theory, VerticalBoundary(disk))


def test_union_handle_is_additive_on_relative_torsion():
    theory = TorsionTheory(1, Scalar.zeta(3), Scalar.of(2) - Scalar.zeta(3))
    eta = VirtualBundle.line("y") + trivial(1)
    piece = FiberProduct(RelDiskBundle(eta), DiskBundle(x))
    glued = UnionHandle(DiskBundle(x + eta), piece)
    assert tau(theory, glued) == tau(theory, DiskBundle(x + eta)) + tau(theory, piece)
    assert str(tau(theory, glued)) == "z3*y^2"


def test_product_with_closed_factors():
    fr = fr_theory(1)
    s2 = sphere(2)
    assert tau(fr, FiberProduct(s2, s2)) == 2 * tau(fr, s2) + 2 * tau(fr, s2)
    assert tau(fr, FiberProduct(sphere(3), s2)) == 2 * tau(fr, sphere(3))


def test_trivial_pairs_carry_no_torsion():
    assert tau(fr_theory(1), Trivial(2, FiberStats(2, 2))) == zero_class(4)


def test_even_and_odd_parts():
    fr = fr_theory(1)
    for n in range(1, 5):
        assert tau_even(fr, sphere(n)) + tau_odd(fr, sphere(n)) == tau(fr, sphere(n))
        if n % 2:
            assert tau_even(fr, sphere(n)) == zero_class(4)
        else:
            assert tau_odd(fr, sphere(n)) == zero_class(4)
    assert tau_odd(mmm_theory(1), DiskBundle(x + trivial(1))) == zero_class(4)


def test_duality_on_relative_disk():
    theory = TorsionTheory(1, Scalar.zeta(3), Scalar.of(4))
    rel = RelDiskBundle(x + trivial(1))
    lhs = tau(theory, rel) + (-1) ** 3 * tau_dual(theory, rel)
    assert lhs == 2 * tau(theory.even_part(), rel)


def test_decompose_and_uniqueness():
    theory = TorsionTheory(1, Scalar.zeta(3), Scalar.of(2) - Scalar.zeta(3))
    assert decompose(theory) == (Scalar.of(2), Scalar.of(1))
    assert decompose(fr_theory(2)) == (Scalar.of(1), Scalar.of(0))
    assert decompose(mmm_theory(1)) == (Scalar.of(0), Scalar.of(1))
    for expr in (sphere(3), DiskBundle(x), Hatcher(x, 4, 10), RelDiskBundle(x + trivial(1))):
        assert difference_torsion(theory, expr) == zero_class(4)


def test_decompose_rejects_generic_theories():
    with pytest.raises(NotDecomposable):
        decompose(TorsionTheory(1, Scalar.zeta(5), 1))
    with pytest.raises(NotDecomposable):
        decompose(TorsionTheory(1, 1, 1))
    with pytest.raises(NotDecomposable):
        decompose(TorsionTheory(1, Scalar.zeta(3) * Scalar.zeta(5), 0))


def test_even_fiber_proportionality_and_odd_part():
    c = even_fiber_constant(1)
    assert c == Scalar.zeta(3, Fraction(-1, 4))
    for n in (2, 4):
        assert tau(fr_theory(1), sphere(n)) == c * tau(mmm_theory(1), sphere(n))
        assert fr_odd_part(1, sphere(n)) == zero_class(4)
    assert fr_odd_part(1, sphere(3)) == tau(fr_theory(1), sphere(3))


def test_invalid_expressions_are_rejected():
    with pytest.raises(MalformedExpression):
        tau(fr_theory(1), SphereBundle(x, 4))


def test_evaluator_memoises_profiles():
    evaluator = TorsionEvaluator(fr_theory(1))
    disk = DiskBundle(x + trivial(1))
    assert evaluator.profile(disk) is evaluator.profile(disk)
    assert profile(fr_theory(1), disk) == evaluator.profile(disk)


def test_degree_two_theories():
    fr = fr_theory(2)
    assert str(tau(fr, sphere(1))) == "-1/24*z5*x^4"
    assert tau(fr, DiskBundle(x)) == zero_class(8)
