#!/usr/bin/env python3
"""
Transfer and MMM Classes - Torsion Calculator
Symbolic transfer of pullback classes and a direct computation of M_2k
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, Tuple

from bundles import (
    BundlePair, DiskBundle, Double, FiberProduct, Hatcher, MorseBundle,
    RelDiskBundle, SphereBundle, Trivial, UnionHandle, UnionVertical,
    VerticalBoundary, fiber_dim, require_valid, stats,
)
from chern import GradedClass, VirtualBundle, ch4k, class_sum, whitney_sum, zero_class
from errors import UnsupportedNode
from torsion import TorsionProfile, leibniz_product

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TotalSpaceClass:
    """A class on the total space of E pulled back from the base"""
    bundle: BundlePair
    cls: GradedClass

    def __post_init__(self):
        if self.cls.degree < 4 or self.cls.degree % 4:
            raise ValueError(f"transferable classes have degree 4k with k >= 1, got {self.cls.degree}")

    def transfer(self) -> GradedClass:
        return transfer_pullback(self.bundle, self.cls)


def transfer_pullback(expr: BundlePair, y: GradedClass) -> GradedClass:
    """tr^(E, d0) p^* y = chi(F, d0F) y"""
    return stats(expr).chi_rel * y


def vertical_tangent(expr: BundlePair) -> VirtualBundle:
    """Vertical tangent bundle as a pullback, up to trivial summands"""
    if isinstance(expr, (DiskBundle, RelDiskBundle)):
        return expr.xi
    if isinstance(expr, SphereBundle):
        return whitney_sum(expr.xi, VirtualBundle.trivial(-1))
    if isinstance(expr, FiberProduct):
        return whitney_sum(vertical_tangent(expr.first), vertical_tangent(expr.second))
    raise UnsupportedNode(f"vertical tangent bundle of {type(expr).__name__} is not a pullback")


class MMMEvaluator:
    """M_2k profiles computed from vertical tangent bundles, independent of any torsion theory"""

    def __init__(self, k: int):
        self.k = k
        self.scale = factorial(2 * k)
        self._cache: Dict[BundlePair, TorsionProfile] = {}

    @property
    def zero(self) -> GradedClass:
        return zero_class(4 * self.k)

    def profile(self, expr: BundlePair) -> TorsionProfile:
        cached = self._cache.get(expr)
        if cached is None:
            cached = self._compute(expr)
            self._cache[expr] = cached
        return cached

    def _tangential(self, expr: BundlePair) -> TorsionProfile:
        # every stratum of a linear bundle carries the same stable tangent bundle
        density = self.scale * ch4k(vertical_tangent(expr), self.k)
        return TorsionProfile(*(chi * density for chi in stats(expr).strata()))

    def _critical_sum(self, handles) -> GradedClass:
        return class_sum(
            ((-1) ** h.index * self.scale * ch4k(whitney_sum(h.xi, h.eta), self.k) for h in handles),
            4 * self.k,
        )

    def _compute(self, expr: BundlePair) -> TorsionProfile:
        zero = self.zero
        if isinstance(expr, Trivial):
            return TorsionProfile(zero, zero, zero, zero)
        if isinstance(expr, (SphereBundle, DiskBundle, RelDiskBundle)):
            return self._tangential(expr)
        if isinstance(expr, FiberProduct):
            return TorsionProfile(*leibniz_product(
                stats(expr.first).strata(), self.profile(expr.first).strata(),
                stats(expr.second).strata(), self.profile(expr.second).strata(),
            ))
        if isinstance(expr, Double):
            inner = self.profile(expr.inner)
            return TorsionProfile.closed(2 * inner.total - inner.boundary)
        if isinstance(expr, VerticalBoundary):
            return TorsionProfile.closed(self.profile(expr.inner).boundary)
        if isinstance(expr, UnionVertical):
            first, second = self.profile(expr.first), self.profile(expr.second)
            return TorsionProfile.closed(first.total + second.total - first.boundary)
        if isinstance(expr, UnionHandle):
            first, second = self.profile(expr.first), self.profile(expr.second)
            return TorsionProfile(
                first.total + second.total - second.d0,
                first.d0,
                first.d1 + second.d1 - second.d0,
                first.corner,
            )
        if isinstance(expr, MorseBundle):
            n = fiber_dim(expr)
            base = self.profile(expr.base).total if expr.base is not None else zero
            total = base + self._critical_sum(expr.handles)
            return TorsionProfile(total, base, total - self._critical_sum(h.reversed(n) for h in expr.handles), zero)
        if isinstance(expr, Hatcher):
            n = fiber_dim(expr)
            handles = expr.handles()
            total = self._critical_sum(handles)
            return TorsionProfile(total, zero, total - self._critical_sum(h.reversed(n) for h in handles), zero)
        raise UnsupportedNode(f"no M_2k rule for {type(expr).__name__}")


def m2k_profile(expr: BundlePair, k: int) -> TorsionProfile:
    require_valid(expr)
    return MMMEvaluator(k).profile(expr)


def m2k_direct(expr: BundlePair, k: int) -> GradedClass:
    """M_2k(E, d0) = tr^(E, d0)((2k)! ch_4k(T^v E))"""
    return m2k_profile(expr, k).relative


def m2k_degree_zero(expr: BundlePair) -> Fraction:
    """Degree zero MMM value (n/2) chi(F, d0)"""
    s = stats(expr)
    return Fraction(s.dim, 2) * s.chi_rel


@dataclass(frozen=True)
class TransferIdentities:
    """Evaluated sides of the relative transfer identities for one pullback class"""
    relative: GradedClass
    absolute: GradedClass
    boundary: GradedClass
    dual: GradedClass
    dim: int

    @property
    def restriction_holds(self) -> bool:
        return self.relative == self.absolute - self.boundary

    @property
    def duality_holds(self) -> bool:
        return self.dual == (-1) ** self.dim * self.relative

    @property
    def holds(self) -> bool:
        return self.restriction_holds and self.duality_holds


def relative_transfer_identities(expr: BundlePair, y: GradedClass) -> TransferIdentities:
    """tr^(E,d0) = tr^E - tr^(d0 E) and tr^(E,d1) = (-1)^n tr^(E,d0) on p^* y"""
    s = stats(expr)
    return TransferIdentities(
        relative=transfer_pullback(expr, y),
        absolute=s.chiF * y,
        boundary=s.chiD0 * y,
        dual=s.chi_rel1 * y,
        dim=s.dim,
    )


def transfer_additivity(first: BundlePair, second: BundlePair, y: GradedClass) -> Tuple[GradedClass, GradedClass]:
    """(tr^(E1 u E2) y, tr^E1 y + tr^E2 y - tr^(dE1) y) for pieces glued along the vertical boundary"""
    union = UnionVertical(first, second)
    require_valid(union)
    lhs = stats(union).chiF * y
    rhs = stats(first).chiF * y + stats(second).chiF * y - stats(first).chi_boundary * y
    return lhs, rhs
