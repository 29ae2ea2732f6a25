#!/usr/bin/env python3
"""
Scalars - Torsion Calculator
Exact coefficient algebra Q[z3, z5, z7, ...] with formal zeta symbols
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Tuple, Union

from errors import NotDivisible, ZeroDivisor

logger = logging.getLogger(__name__)

# A zeta monomial is a sorted tuple of (argument, exponent) pairs; () is the rational part.
ZetaMonomial = Tuple[Tuple[int, int], ...]
Rational = Union[int, Fraction]

# Display only. Never fed back into arithmetic.
_ZETA_DISPLAY = {
    3: 1.2020569031595942,
    5: 1.0369277551433699,
    7: 1.0083492773819228,
    9: 1.0020083928260822,
    11: 1.0004941886041195,
}


@dataclass(frozen=True, order=True)
class ZetaSymbol:
    """The formal symbol zeta(argument)"""
    argument: int

    def __post_init__(self):
        if not isinstance(self.argument, int) or self.argument < 3 or self.argument % 2 == 0:
            raise ValueError(f"zeta symbols need an odd argument >= 3, got {self.argument!r}")

    def __str__(self) -> str:
        return f"z{self.argument}"


def _mono_mul(left: ZetaMonomial, right: ZetaMonomial) -> ZetaMonomial:
    powers: Dict[int, int] = dict(left)
    for arg, exp in right:
        powers[arg] = powers.get(arg, 0) + exp
    return tuple(sorted(powers.items()))


def _mono_div(mono: ZetaMonomial, divisor: ZetaMonomial):
    powers: Dict[int, int] = dict(mono)
    for arg, exp in divisor:
        left = powers.get(arg, 0) - exp
        if left < 0:
            return None
        if left:
            powers[arg] = left
        else:
            powers.pop(arg, None)
    return tuple(sorted(powers.items()))


def _mono_key(mono: ZetaMonomial):
    return (sum(exp for _, exp in mono), mono)


def _mono_text(mono: ZetaMonomial) -> str:
    return "*".join(f"z{arg}" if exp == 1 else f"z{arg}^{exp}" for arg, exp in mono)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_term(coefficient: Fraction, factors: str) -> str:
    """Render coefficient*factors with the unit coefficient elided"""
    if not factors:
        return format_rational(coefficient)
    if coefficient == 1:
        return factors
    if coefficient == -1:
        return f"-{factors}"
    return f"{format_rational(coefficient)}*{factors}"


@dataclass(frozen=True)
class Scalar:
    """Exact Q-linear combination of zeta monomials, kept in canonical form"""
    terms: Tuple[Tuple[ZetaMonomial, Fraction], ...] = ()

    def __post_init__(self):
        merged: Dict[ZetaMonomial, Fraction] = {}
        for mono, coefficient in self.terms:
            mono = tuple(sorted((int(a), int(e)) for a, e in mono if e))
            merged[mono] = merged.get(mono, Fraction(0)) + Fraction(coefficient)
        canonical = tuple(
            (mono, merged[mono]) for mono in sorted(merged, key=_mono_key) if merged[mono] != 0
        )
        object.__setattr__(self, "terms", canonical)

    # Constructors

    @classmethod
    def of(cls, value: Union["Scalar", Rational]) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        return cls((((), Fraction(value)),))

    @classmethod
    def from_mapping(cls, mapping: Mapping[ZetaMonomial, Rational]) -> "Scalar":
        return cls(tuple(mapping.items()))

    @classmethod
    def zeta(cls, argument: int, coefficient: Rational = 1) -> "Scalar":
        symbol = ZetaSymbol(argument)
        mono = ((symbol.argument, 1),)
        return cls(((mono, Fraction(coefficient)),))

    # Inspection

    def as_dict(self) -> Dict[ZetaMonomial, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(not mono for mono, _ in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.terms[0][1] if self.terms else Fraction(0)

    def symbols(self) -> List[ZetaSymbol]:
        return sorted({ZetaSymbol(arg) for mono, _ in self.terms for arg, _ in mono})

    # Arithmetic

    def __add__(self, other) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return add(self, Scalar.of(other))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return neg(self)

    def __sub__(self, other) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return add(self, neg(Scalar.of(other)))

    def __rsub__(self, other) -> "Scalar":
        return add(Scalar.of(other), neg(self))

    def __mul__(self, other) -> "Scalar":
        if isinstance(other, (int, Fraction)):
            return scale(self, other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return to_text(self)


ZERO = Scalar()
ONE = Scalar.of(1)


def add(a: Scalar, b: Scalar) -> Scalar:
    """Termwise exact sum"""
    return Scalar(a.terms + b.terms)


def neg(a: Scalar) -> Scalar:
    return Scalar(tuple((mono, -c) for mono, c in a.terms))


def sub(a: Scalar, b: Scalar) -> Scalar:
    return add(a, neg(b))


def scale(a: Scalar, factor: Rational) -> Scalar:
    factor = Fraction(factor)
    return Scalar(tuple((mono, c * factor) for mono, c in a.terms))


def mul(a: Scalar, b: Scalar) -> Scalar:
    """Distributive product; zeta monomials multiply by multiset union"""
    return Scalar(tuple(
        (_mono_mul(ma, mb), ca * cb) for ma, ca in a.terms for mb, cb in b.terms
    ))


def div_exact(a: Scalar, d: Scalar) -> Scalar:
    """Exact quotient r with r*d == a, for d a rational multiple of one zeta monomial"""
    if d.is_zero():
        raise ZeroDivisor(f"cannot divide {a} by zero")
    if len(d.terms) != 1:
        raise NotDivisible(f"divisor {d} is not a single zeta monomial")
    divisor, coefficient = d.terms[0]
    quotient = []
    for mono, c in a.terms:
        reduced = _mono_div(mono, divisor)
        if reduced is None:
            raise NotDivisible(f"{a} is not divisible by {d}")
        quotient.append((reduced, c / coefficient))
    return Scalar(tuple(quotient))


def to_text(a: Scalar) -> str:
    """Canonical text, e.g. '3/2 + -1/2*z3'"""
    if a.is_zero():
        return "0"
    return " + ".join(format_term(c, _mono_text(mono)) for mono, c in a.terms)


def approx(a: Scalar, digits: int = 6) -> str:
    """Floating point rendering for display, truncating the zeta constants"""
    result = 0.0
    for mono, c in a.terms:
        value = float(c)
        for arg, exp in mono:
            value *= _zeta_float(arg) ** exp
        result += value
    return f"{result:.{digits}f}"


def _zeta_float(argument: int) -> float:
    if argument in _ZETA_DISPLAY:
        return _ZETA_DISPLAY[argument]
    return sum(n ** -float(argument) for n in range(1, 200))


# Text parsing

def tokenize_terms(text: str) -> List[str]:
    """Split polynomial text into numbers, identifiers and operator characters"""
    tokens = re.findall(r"\d+|[A-Za-z_][A-Za-z0-9_]*|[-+*/^]|\S", text)
    return tokens


def parse_terms(text: str) -> List[Tuple[Fraction, Dict[str, int]]]:
    """Parse 'c*f^e*... + ...' into (coefficient, {factor: exponent}) terms

    Factors are identifiers; numbers may appear as 'p' or 'p/q'. Binary and
    unary '-' are accepted. Raises ValueError on malformed text.
    """
    tokens = tokenize_terms(text)
    if not tokens:
        raise ValueError("empty polynomial text")
    position = 0

    def peek():
        return tokens[position] if position < len(tokens) else None

    def take(expected=None):
        nonlocal position
        token = peek()
        if token is None or (expected is not None and token != expected):
            raise ValueError(f"unexpected {token!r} in {text!r}")
        position += 1
        return token

    def number() -> Fraction:
        token = take()
        if not token.isdigit():
            raise ValueError(f"expected a number, got {token!r} in {text!r}")
        value = Fraction(int(token))
        if peek() == "/":
            take("/")
            denominator = take()
            if not denominator.isdigit() or int(denominator) == 0:
                raise ValueError(f"bad denominator {denominator!r} in {text!r}")
            value /= int(denominator)
        return value

    def term(sign: int):
        while peek() == "-":
            take("-")
            sign = -sign
        coefficient = Fraction(sign)
        factors: Dict[str, int] = {}
        while True:
            token = peek()
            if token is None:
                raise ValueError(f"truncated term in {text!r}")
            if token.isdigit():
                coefficient *= number()
            elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
                take()
                exponent = 1
                if peek() == "^":
                    take("^")
                    power = take()
                    if not power.isdigit():
                        raise ValueError(f"bad exponent {power!r} in {text!r}")
                    exponent = int(power)
                factors[token] = factors.get(token, 0) + exponent
            else:
                raise ValueError(f"unexpected {token!r} in {text!r}")
            if peek() == "*":
                take("*")
                continue
            return coefficient, factors

    terms = [term(1)]
    while peek() is not None:
        operator = take()
        if operator not in "+-":
            raise ValueError(f"unexpected {operator!r} in {text!r}")
        terms.append(term(1 if operator == "+" else -1))
    return terms


def zeta_argument(name: str):
    """Return m for an identifier 'zm' naming a zeta symbol, else None"""
    match = re.fullmatch(r"z(\d+)", name)
    if not match:
        return None
    argument = int(match.group(1))
    ZetaSymbol(argument)
    return argument


def parse_scalar(text: str) -> Scalar:
    """Inverse of to_text; also accepts binary '-'"""
    result = []
    for coefficient, factors in parse_terms(text):
        mono = []
        for name, exponent in factors.items():
            argument = zeta_argument(name)
            if argument is None:
                raise ValueError(f"{name!r} is not a zeta symbol in {text!r}")
            mono.append((argument, exponent))
        result.append((tuple(mono), coefficient))
    return Scalar(tuple(result))


def total(values: Iterable[Scalar]) -> Scalar:
    terms: Tuple = ()
    for value in values:
        terms += value.terms
    return Scalar(terms)
