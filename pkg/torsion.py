#!/usr/bin/env python3
"""
Torsion Evaluator - Torsion Calculator
Structural evaluation of higher torsion theories (k, s1, s2) on bundle expressions
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, Tuple, Union

from bundles import (
    BundlePair, DiskBundle, Double, FiberProduct, Handle, Hatcher, MorseBundle,
    RelDiskBundle, SphereBundle, Trivial, UnionHandle, UnionVertical,
    VerticalBoundary, fiber_dim, product_strata, require_valid, stats,
)
from chern import GradedClass, ch4k, class_sum, zero_class
from errors import NotDecomposable, NotDivisible, UnsupportedNode
from scalars import Scalar, div_exact

logger = logging.getLogger(__name__)

ScalarLike = Union[Scalar, int, Fraction]


@dataclass(frozen=True)
class TorsionTheory:
    """Degree 4k torsion theory fixed by its sphere parameters s1 (odd) and s2 (even)"""
    k: int
    s1: Scalar
    s2: Scalar

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"torsion theories need k >= 1, got {self.k!r}")
        object.__setattr__(self, "s1", Scalar.of(self.s1))
        object.__setattr__(self, "s2", Scalar.of(self.s2))

    @property
    def degree(self) -> int:
        return 4 * self.k

    def s(self, n: int) -> Scalar:
        """Sphere parameter s_n by parity, s_0 = s2"""
        return self.s1 if n % 2 else self.s2

    def even_part(self) -> "TorsionTheory":
        return TorsionTheory(self.k, Scalar(), self.s2)

    def odd_part(self) -> "TorsionTheory":
        return TorsionTheory(self.k, self.s1, Scalar())

    def combine(self, a: ScalarLike, other: "TorsionTheory", b: ScalarLike) -> "TorsionTheory":
        """The theory a*self + b*other"""
        if other.k != self.k:
            raise ValueError(f"cannot combine theories of degree {self.degree} and {other.degree}")
        a, b = Scalar.of(a), Scalar.of(b)
        return TorsionTheory(self.k, a * self.s1 + b * other.s1, a * self.s2 + b * other.s2)


@dataclass(frozen=True)
class TorsionProfile:
    """Absolute torsion of the total space and of the strata d0, d1 and their corner"""
    total: GradedClass
    d0: GradedClass
    d1: GradedClass
    corner: GradedClass

    @property
    def relative(self) -> GradedClass:
        return self.total - self.d0

    @property
    def relative_dual(self) -> GradedClass:
        return self.total - self.d1

    @property
    def boundary(self) -> GradedClass:
        return self.d0 + self.d1 - self.corner

    @classmethod
    def closed(cls, total: GradedClass) -> "TorsionProfile":
        zero = zero_class(total.degree)
        return cls(total, zero, zero, zero)

    def strata(self) -> Tuple[GradedClass, ...]:
        return (self.total, self.d0, self.d1, self.corner)


class Dual:
    """Pair (chi, tau) multiplied by the Leibniz rule of the product formula"""
    __slots__ = ("chi", "tau")

    def __init__(self, chi: int, tau: GradedClass):
        self.chi = chi
        self.tau = tau

    def __add__(self, other: "Dual") -> "Dual":
        return Dual(self.chi + other.chi, self.tau + other.tau)

    def __sub__(self, other: "Dual") -> "Dual":
        return Dual(self.chi - other.chi, self.tau - other.tau)

    def __mul__(self, other: "Dual") -> "Dual":
        return Dual(self.chi * other.chi, other.chi * self.tau + self.chi * other.tau)


def leibniz_product(left_chi, left_tau, right_chi, right_tau) -> Tuple[GradedClass, ...]:
    """Torsion of the four strata of a fiber product"""
    left = [Dual(c, t) for c, t in zip(left_chi, left_tau)]
    right = [Dual(c, t) for c, t in zip(right_chi, right_tau)]
    return tuple(d.tau for d in product_strata(left, right))


class TorsionEvaluator:
    """Evaluates one torsion theory on bundle expressions, memoised per node"""

    def __init__(self, theory: TorsionTheory):
        self.theory = theory
        self._cache: Dict[BundlePair, TorsionProfile] = {}
        self._rules = {
            Trivial: self._trivial,
            SphereBundle: self._sphere,
            DiskBundle: self._disk,
            RelDiskBundle: self._rel_disk,
            Double: self._double,
            VerticalBoundary: self._vertical_boundary,
            UnionVertical: self._union_vertical,
            UnionHandle: self._union_handle,
            FiberProduct: self._fiber_product,
            MorseBundle: self._morse,
            Hatcher: self._hatcher,
        }

    @property
    def zero(self) -> GradedClass:
        return zero_class(self.theory.degree)

    def ch(self, xi) -> GradedClass:
        return ch4k(xi, self.theory.k)

    def profile(self, expr: BundlePair) -> TorsionProfile:
        cached = self._cache.get(expr)
        if cached is not None:
            return cached
        rule = self._rules.get(type(expr))
        if rule is None:
            raise UnsupportedNode(f"no torsion rule for {type(expr).__name__}")
        result = rule(expr)
        self._cache[expr] = result
        return result

    def handle_term(self, handle: Handle) -> GradedClass:
        """Contribution (-1)^i [(s1 + s2) ch(eta) + (s2 - s1) ch(xi)] of one critical point"""
        t = self.theory
        value = (t.s1 + t.s2) * self.ch(handle.eta) + (t.s2 - t.s1) * self.ch(handle.xi)
        return value if handle.index % 2 == 0 else -value

    def handle_sum(self, handles) -> GradedClass:
        return class_sum((self.handle_term(h) for h in handles), self.theory.degree)

    # Rules

    def _trivial(self, expr: Trivial) -> TorsionProfile:
        zero = self.zero
        return TorsionProfile(zero, zero, zero, zero)

    def _sphere(self, expr: SphereBundle) -> TorsionProfile:
        return TorsionProfile.closed(2 * self.theory.s(expr.n) * self.ch(expr.xi))

    def _boundary_sphere(self, xi, n: int) -> GradedClass:
        if n < 0:
            return self.zero
        return 2 * self.theory.s(n) * self.ch(xi)

    def _disk(self, expr: DiskBundle) -> TorsionProfile:
        t = self.theory
        n = expr.xi.rank
        zero = self.zero
        return TorsionProfile((t.s1 + t.s2) * self.ch(expr.xi), zero, self._boundary_sphere(expr.xi, n - 1), zero)

    def _rel_disk(self, expr: RelDiskBundle) -> TorsionProfile:
        t = self.theory
        n = expr.xi.rank
        zero = self.zero
        return TorsionProfile((t.s1 + t.s2) * self.ch(expr.xi), self._boundary_sphere(expr.xi, n - 1), zero, zero)

    def _double(self, expr: Double) -> TorsionProfile:
        inner = self.profile(expr.inner)
        return TorsionProfile.closed(2 * inner.total - inner.boundary)

    def _vertical_boundary(self, expr: VerticalBoundary) -> TorsionProfile:
        return TorsionProfile.closed(self.profile(expr.inner).boundary)

    def _union_vertical(self, expr: UnionVertical) -> TorsionProfile:
        first = self.profile(expr.first)
        second = self.profile(expr.second)
        return TorsionProfile.closed(first.total + second.total - first.boundary)

    def _union_handle(self, expr: UnionHandle) -> TorsionProfile:
        first = self.profile(expr.first)
        second = self.profile(expr.second)
        return TorsionProfile(
            first.total + second.total - second.d0,
            first.d0,
            first.d1 + second.d1 - second.d0,
            first.corner,
        )

    def _fiber_product(self, expr: FiberProduct) -> TorsionProfile:
        return TorsionProfile(*leibniz_product(
            stats(expr.first).strata(), self.profile(expr.first).strata(),
            stats(expr.second).strata(), self.profile(expr.second).strata(),
        ))

    def _morse(self, expr: MorseBundle) -> TorsionProfile:
        n = fiber_dim(expr)
        base = self.profile(expr.base).total if expr.base is not None else self.zero
        upward = self.handle_sum(expr.handles)
        downward = self.handle_sum(h.reversed(n) for h in expr.handles)
        total = base + upward
        return TorsionProfile(total, base, total - downward, self.zero)

    def _hatcher(self, expr: Hatcher) -> TorsionProfile:
        # d0 and d1 are trivial disk bundles; the corner is a trivial sphere bundle
        n = fiber_dim(expr)
        handles = expr.handles()
        total = self.handle_sum(handles)
        downward = self.handle_sum(h.reversed(n) for h in handles)
        return TorsionProfile(total, self.zero, total - downward, self.zero)


def evaluator_for(theory: TorsionTheory) -> TorsionEvaluator:
    return TorsionEvaluator(theory)


def profile(theory: TorsionTheory, expr: BundlePair) -> TorsionProfile:
    require_valid(expr)
    logger.debug(f"🧮 Evaluating k={theory.k} torsion on {type(expr).__name__}")
    return evaluator_for(theory).profile(expr)


def tau(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    """Relative torsion tau(E, d0E)"""
    return profile(theory, expr).relative


def tau_absolute(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    """Boundary case torsion tau(E), ignoring the splitting of the vertical boundary"""
    return profile(theory, expr).total


def tau_dual(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    """tau(E, d1E): the roles of d0 and d1 exchanged"""
    return profile(theory, expr).relative_dual


def tau_even(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    return tau(theory.even_part(), expr)


def tau_odd(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    return tau(theory.odd_part(), expr)


def fr_theory(k: int) -> TorsionTheory:
    """Higher Franz-Reidemeister torsion: s_n = 1/2 (-1)^(n+k) z(2k+1)"""
    half = Fraction(1, 2)
    sign = (-1) ** (k + 1)
    return TorsionTheory(k, Scalar.zeta(2 * k + 1, sign * half), Scalar.zeta(2 * k + 1, -sign * half))


def mmm_theory(k: int) -> TorsionTheory:
    """Miller-Morita-Mumford class: s1 = 0, s2 = (2k)!"""
    return TorsionTheory(k, Scalar(), Scalar.of(factorial(2 * k)))


def decompose(theory: TorsionTheory) -> Tuple[Scalar, Scalar]:
    """Coefficients (a, b) with tau = a tau_fr + b tau_mmm"""
    k = theory.k
    try:
        a = div_exact(theory.s1 * (2 * (-1) ** (k + 1)), Scalar.zeta(2 * k + 1))
    except NotDivisible as exc:
        raise NotDecomposable(f"s1 = {theory.s1} is not a multiple of z{2 * k + 1}") from exc
    if not a.is_rational():
        raise NotDecomposable(f"s1 = {theory.s1} is not a rational multiple of z{2 * k + 1}")
    b = (theory.s1 + theory.s2) * Fraction(1, factorial(2 * k))
    return a, b


def difference_torsion(theory: TorsionTheory, expr: BundlePair) -> GradedClass:
    """tau - a tau_fr - b tau_mmm"""
    a, b = decompose(theory)
    k = theory.k
    return tau(theory, expr) - a * tau(fr_theory(k), expr) - b * tau(mmm_theory(k), expr)


def even_fiber_constant(k: int) -> Scalar:
    """c with tau_fr = c * M_2k on closed even dimensional fibers"""
    return Scalar.zeta(2 * k + 1, Fraction((-1) ** k, 2 * factorial(2 * k)))


def fr_odd_part(k: int, expr: BundlePair) -> GradedClass:
    """tau_fr - c * M_2k"""
    return tau(fr_theory(k), expr) - even_fiber_constant(k) * tau(mmm_theory(k), expr)
