#!/usr/bin/env python3
"""
Chern Calculus - Torsion Calculator
Formal Chern roots, virtual bundles and the normalised Chern character
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Optional, Tuple, Union

from typing_extensions import TypeAlias

from errors import DegreeMismatch
from scalars import Scalar, format_term, parse_terms, zeta_argument

logger = logging.getLogger(__name__)

RootMonomial: TypeAlias = Tuple[Tuple[str, int], ...]
Coefficient = Union[Scalar, int, Fraction]

_ROOT_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True, order=True)
class ChernRoot:
    """First Chern class of one rotation plane"""
    name: str

    def __post_init__(self):
        if not _ROOT_NAME.fullmatch(self.name):
            raise ValueError(f"invalid root name {self.name!r}")

    @property
    def degree(self) -> int:
        return 2


@dataclass(frozen=True)
class VirtualBundle:
    """Signed sum of rotation planes plus trivial real lines (splitting principle)"""
    roots: Tuple[Tuple[ChernRoot, int], ...] = ()
    trivial_rank: int = 0

    def __post_init__(self):
        merged: Dict[ChernRoot, int] = {}
        for root, multiplicity in self.roots:
            if isinstance(root, str):
                root = ChernRoot(root)
            merged[root] = merged.get(root, 0) + int(multiplicity)
        canonical = tuple((root, merged[root]) for root in sorted(merged) if merged[root])
        object.__setattr__(self, "roots", canonical)
        object.__setattr__(self, "trivial_rank", int(self.trivial_rank))

    @classmethod
    def line(cls, name: str) -> "VirtualBundle":
        return cls(((ChernRoot(name), 1),))

    @classmethod
    def trivial(cls, rank: int) -> "VirtualBundle":
        return cls((), rank)

    @property
    def rank(self) -> int:
        return 2 * sum(m for _, m in self.roots) + self.trivial_rank

    def root_names(self) -> List[str]:
        return [root.name for root, _ in self.roots]

    def is_trivial(self) -> bool:
        return not self.roots

    def __add__(self, other: "VirtualBundle") -> "VirtualBundle":
        return whitney_sum(self, other)


def whitney_sum(a: VirtualBundle, b: VirtualBundle) -> VirtualBundle:
    """Multiplicities and trivial ranks add"""
    return VirtualBundle(a.roots + b.roots, a.trivial_rank + b.trivial_rank)


def complement(xi: VirtualBundle, total_rank: int) -> VirtualBundle:
    """The bundle eta with xi + eta trivial of rank total_rank"""
    return VirtualBundle(tuple((root, -m) for root, m in xi.roots), total_rank - xi.trivial_rank)


def _mono_mul(left: RootMonomial, right: RootMonomial) -> RootMonomial:
    powers: Dict[str, int] = dict(left)
    for name, exp in right:
        powers[name] = powers.get(name, 0) + exp
    return tuple(sorted(powers.items()))


def _mono_degree(mono: RootMonomial) -> int:
    return 2 * sum(exp for _, exp in mono)


def _mono_text(mono: RootMonomial) -> str:
    return "*".join(name if exp == 1 else f"{name}^{exp}" for name, exp in mono)


@dataclass(frozen=True)
class GradedClass:
    """Homogeneous polynomial in Chern roots with Scalar coefficients"""
    terms: Tuple[Tuple[RootMonomial, Scalar], ...] = ()
    degree: int = 0

    def __post_init__(self):
        merged: Dict[RootMonomial, Scalar] = {}
        for mono, coefficient in self.terms:
            mono = tuple(sorted((str(n), int(e)) for n, e in mono if e))
            if _mono_degree(mono) != self.degree:
                raise DegreeMismatch(self.degree, _mono_degree(mono))
            merged[mono] = merged.get(mono, Scalar()) + Scalar.of(coefficient)
        canonical = tuple((mono, merged[mono]) for mono in sorted(merged) if merged[mono])
        object.__setattr__(self, "terms", canonical)

    def is_zero(self) -> bool:
        return not self.terms

    def root_names(self) -> List[str]:
        return sorted({name for mono, _ in self.terms for name, _ in mono})

    def coefficient(self, mono: RootMonomial) -> Scalar:
        return dict(self.terms).get(tuple(sorted(mono)), Scalar())

    def __add__(self, other: "GradedClass") -> "GradedClass":
        return class_add(self, other)

    def __sub__(self, other: "GradedClass") -> "GradedClass":
        return class_sub(self, other)

    def __neg__(self) -> "GradedClass":
        return class_neg(self)

    def __mul__(self, other) -> "GradedClass":
        if isinstance(other, GradedClass):
            return class_mul(self, other)
        if isinstance(other, (Scalar, int, Fraction)):
            return class_scale(self, other)
        return NotImplemented

    def __rmul__(self, other) -> "GradedClass":
        if isinstance(other, (Scalar, int, Fraction)):
            return class_scale(self, other)
        return NotImplemented

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return class_to_text(self)


def zero_class(degree: int) -> GradedClass:
    return GradedClass((), degree)


def class_add(a: GradedClass, b: GradedClass) -> GradedClass:
    if a.degree != b.degree:
        raise DegreeMismatch(a.degree, b.degree)
    return GradedClass(a.terms + b.terms, a.degree)


def class_neg(a: GradedClass) -> GradedClass:
    return GradedClass(tuple((mono, -c) for mono, c in a.terms), a.degree)


def class_sub(a: GradedClass, b: GradedClass) -> GradedClass:
    return class_add(a, class_neg(b))


def class_scale(c: GradedClass, s: Coefficient) -> GradedClass:
    s = Scalar.of(s)
    return GradedClass(tuple((mono, coefficient * s) for mono, coefficient in c.terms), c.degree)


def class_mul(a: GradedClass, b: GradedClass) -> GradedClass:
    return GradedClass(
        tuple((_mono_mul(ma, mb), ca * cb) for ma, ca in a.terms for mb, cb in b.terms),
        a.degree + b.degree,
    )


def class_sum(classes: Iterable[GradedClass], degree: int) -> GradedClass:
    terms: Tuple = ()
    for c in classes:
        if c.degree != degree:
            raise DegreeMismatch(degree, c.degree)
        terms += c.terms
    return GradedClass(terms, degree)


def ch4k(xi: VirtualBundle, k: int) -> GradedClass:
    """Degree-4k part of the normalised Chern character: sum m * x^(2k) / (2k)!"""
    if k < 1:
        raise ValueError(f"ch4k needs k >= 1, got {k}")
    denominator = factorial(2 * k)
    return GradedClass(
        tuple((((root.name, 2 * k),), Fraction(m, denominator)) for root, m in xi.roots),
        4 * k,
    )


# Text forms

def class_to_text(c: GradedClass) -> str:
    """Canonical text, e.g. '2*x^2 + 1/2*z3*y^2'"""
    if c.is_zero():
        return "0"
    pieces = []
    for mono, coefficient in c.terms:
        roots = _mono_text(mono)
        for zeta_mono, rational in coefficient.terms:
            zetas = "*".join(f"z{a}" if e == 1 else f"z{a}^{e}" for a, e in zeta_mono)
            factors = "*".join(part for part in (zetas, roots) if part)
            pieces.append(format_term(rational, factors))
    return " + ".join(pieces)


def parse_class(text: str, degree: Optional[int] = None) -> GradedClass:
    """Inverse of class_to_text; the zero class takes `degree` (default 0)"""
    terms = []
    found = None
    for coefficient, factors in parse_terms(text):
        if coefficient == 0:
            continue
        zeta_mono = []
        root_mono = []
        for name, exponent in factors.items():
            argument = zeta_argument(name)
            if argument is None:
                root_mono.append((name, exponent))
            else:
                zeta_mono.append((argument, exponent))
        mono = tuple(sorted(root_mono))
        mono_degree = _mono_degree(mono)
        if found is None:
            found = mono_degree
        elif found != mono_degree:
            raise DegreeMismatch(found, mono_degree)
        terms.append((mono, Scalar(((tuple(zeta_mono), coefficient),))))
    cls = GradedClass(tuple(terms), found if found is not None else 0)
    if cls.is_zero():
        return zero_class(degree if degree is not None else 0)
    if degree is not None and cls.degree != degree:
        raise DegreeMismatch(degree, cls.degree)
    return cls


def bundle_to_text(xi: VirtualBundle) -> str:
    """Canonical bundle text: 'line(x) + complement(line(y), 0) + trivial(1)'"""
    parts = []
    for root, m in xi.roots:
        if m > 0:
            parts.extend([f"line({root.name})"] * m)
    negative = []
    for root, m in xi.roots:
        if m < 0:
            negative.extend([f"line({root.name})"] * -m)
    if negative:
        parts.append(f"complement({' + '.join(negative)}, 0)")
    if xi.trivial_rank or not parts:
        parts.append(f"trivial({xi.trivial_rank})")
    return " + ".join(parts)
