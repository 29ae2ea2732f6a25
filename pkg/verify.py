#!/usr/bin/env python3
"""
Verification Suite - Torsion Calculator
Deterministic expression generator and the exact identity checks of higher torsion
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from typing_extensions import Literal

from bundles import (
    BundlePair, DiskBundle, Double, FiberProduct, FiberStats, Handle, Hatcher,
    MorseBundle, RelDiskBundle, SphereBundle, Trivial, UnionHandle, UnionVertical,
    VerticalBoundary, depth, fiber_dim, is_closed, require_valid, root_names,
    sphere_chi, stats, validate, walk,
)
from chern import ChernRoot, GradedClass, VirtualBundle, ch4k, zero_class
from errors import InvalidMinimizeCall, MalformedExpression, NotDecomposable, UnsupportedNode
from scalars import Scalar
from torsion import (
    TorsionEvaluator, TorsionProfile, TorsionTheory, decompose, even_fiber_constant,
    fr_theory, mmm_theory,
)
from transfer import MMMEvaluator, relative_transfer_identities, transfer_additivity, transfer_pullback

logger = logging.getLogger(__name__)

LEAF_KINDS = ("sphere", "disk", "reldisk", "morse", "hatcher", "trivial")
DEFAULT_WEIGHTS = {
    "sphere": 3, "disk": 3, "reldisk": 2, "morse": 3, "hatcher": 1, "trivial": 1,
    "double": 2, "dv": 1, "union": 2, "glue": 2, "prod": 2,
}
MAX_RETRIES = 25
HALF = Fraction(1, 2)


@dataclass
class ExprSpec:
    """Parameters of the random expression generator"""
    seed: int = 0
    max_depth: int = 4
    root_pool: Sequence[Union[str, ChernRoot]] = ("x", "y")
    weights: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    max_dim: int = 8

    def __post_init__(self):
        self.root_pool = tuple(r if isinstance(r, ChernRoot) else ChernRoot(r) for r in self.root_pool)
        if not self.root_pool:
            raise ValueError("the root pool must not be empty")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth}")


class ExpressionGenerator:
    """Draws valid bundle expressions from a seeded random stream"""

    def __init__(self, spec: ExprSpec, rng: Optional[random.Random] = None):
        self.spec = spec
        self.rng = rng or random.Random(spec.seed)

    def sample(self, count: int) -> List[BundlePair]:
        return [self.expression() for _ in range(count)]

    def expression(self, levels: Optional[int] = None) -> BundlePair:
        levels = self.spec.max_depth if levels is None else levels
        for _ in range(MAX_RETRIES):
            candidate = self._build(levels)
            if candidate is None:
                continue
            if depth(candidate) <= levels and fiber_dim(candidate) <= self.spec.max_dim and not validate(candidate):
                return candidate
        return DiskBundle(self.bundle(2))

    def bundle(self, rank: int) -> VirtualBundle:
        lines = self.rng.randint(0, min(2, max(rank, 0) // 2))
        roots = tuple((self.rng.choice(self.spec.root_pool), 1) for _ in range(lines))
        return VirtualBundle(roots, rank - 2 * lines)

    def _choose(self, kinds) -> str:
        weights = [self.spec.weights.get(kind, 0) for kind in kinds]
        if not any(weights):
            weights = [1] * len(kinds)
        return self.rng.choices(list(kinds), weights=weights)[0]

    def _build(self, levels: int) -> Optional[BundlePair]:
        if levels <= 1:
            return self._leaf(self._choose(("sphere", "disk")), levels)
        kind = self._choose(list(self.spec.weights))
        if kind in LEAF_KINDS:
            return self._leaf(kind, levels)
        if kind == "double":
            return Double(self.expression(levels - 1))
        if kind == "dv":
            inner = self.expression(levels - 1)
            return VerticalBoundary(inner) if fiber_dim(inner) >= 1 else None
        if kind == "union":
            first = self.expression(levels - 1)
            return UnionVertical(first, self.partner(first, levels - 1))
        if kind == "glue":
            first = self.expression(levels - 1)
            n = fiber_dim(first)
            index = self.rng.randint(0, n)
            return UnionHandle(first, handle_piece(Handle(index, self.bundle(index), self.bundle(n - index))))
        if kind == "prod":
            return FiberProduct(self.expression(levels - 1), self.expression(levels - 1))
        return None

    def _leaf(self, kind: str, levels: int) -> BundlePair:
        rng = self.rng
        if kind == "sphere":
            n = rng.randint(1, 4)
            return SphereBundle(self.bundle(n + 1), n)
        if kind == "disk":
            return DiskBundle(self.bundle(rng.randint(0, 4)))
        if kind == "reldisk":
            return RelDiskBundle(self.bundle(rng.randint(1, 4)))
        if kind == "morse":
            n = rng.randint(1, 4)
            base = None
            if n >= 2 and levels >= 2 and rng.random() < 0.5:
                base = SphereBundle(self.bundle(n), n - 1)
            handles = []
            for _ in range(rng.randint(1, 3)):
                index = rng.randint(0, n)
                handles.append(Handle(index, self.bundle(index), self.bundle(n - index)))
            return MorseBundle(base, tuple(handles))
        if kind == "hatcher":
            n = rng.randint(2, 4)
            return Hatcher(self.bundle(rng.randint(0, n)), n, n + rng.randint(1, 3))
        dim = rng.randint(0, 4)
        chi = 0 if dim % 2 else rng.choice([0, 2, -2])
        return Trivial(dim, FiberStats(dim, chi))

    def partner(self, expr: BundlePair, levels: int) -> BundlePair:
        """A second piece with the same vertical boundary as expr"""
        if is_closed(expr):
            n = fiber_dim(expr)
            options = [expr]
            if n >= 1:
                options.append(SphereBundle(self.bundle(n + 1), n))
            if depth(expr) + 1 <= levels:
                options.append(Double(expr))
            return self.rng.choice(options)
        if isinstance(expr, MorseBundle):
            handles = list(expr.handles)
            self.rng.shuffle(handles)
            return expr.reordered(handles)
        return expr


def gen_expr(spec: ExprSpec) -> BundlePair:
    """One valid expression, determined by the seed"""
    return ExpressionGenerator(spec).expression()


def _random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-4, 4), rng.randint(1, 3))


def random_theories(count: int, k: int, seed: int = 0) -> List[TorsionTheory]:
    """Decomposable custom theories a*fr + b*mmm with small random rationals"""
    rng = random.Random(f"theories-{seed}-{k}")
    return [
        fr_theory(k).combine(_random_fraction(rng), mmm_theory(k), _random_fraction(rng))
        for _ in range(count)
    ]


def generic_theories(count: int, k: int, seed: int = 0) -> List[TorsionTheory]:
    """Theories with unrelated symbolic parameters, generally not decomposable"""
    rng = random.Random(f"generic-{seed}-{k}")

    def parameter() -> Scalar:
        return (Scalar.of(_random_fraction(rng))
                + Scalar.zeta(2 * k + 1, _random_fraction(rng))
                + Scalar.zeta(2 * k + 3, _random_fraction(rng)))

    return [TorsionTheory(k, parameter(), parameter()) for _ in range(count)]


def default_theories(ks: Sequence[int], custom_count: int = 10, seed: int = 0) -> List[TorsionTheory]:
    theories: List[TorsionTheory] = []
    for k in ks:
        theories.append(fr_theory(k))
        theories.append(mmm_theory(k))
        theories.extend(random_theories(custom_count, k, seed))
    return theories


# Shared constructions

def handle_piece(handle: Handle) -> BundlePair:
    """The relative handle D^i(xi) x D^(n-i)(eta), glued along S^(i-1)(xi) x D(eta)"""
    return FiberProduct(RelDiskBundle(handle.xi), DiskBundle(handle.eta))


def handle_decomposition(expr: Union[MorseBundle, Hatcher]) -> BundlePair:
    """Collar on d0 followed by one handle piece per critical point"""
    n = fiber_dim(expr)
    if isinstance(expr, Hatcher):
        handles, base_chi = expr.handles(), 1
    else:
        handles = expr.handles
        base_chi = stats(expr.base).chiF if expr.base is not None else 0
    pieces: List[BundlePair] = []
    if base_chi or not handles:
        pieces.append(Trivial(n, FiberStats(n, base_chi, base_chi, base_chi, 0)))
    pieces.extend(handle_piece(h) for h in handles)
    result = pieces[0]
    for piece in pieces[1:]:
        result = UnionHandle(result, piece)
    return result


def matched_partner(expr: BundlePair, variant: int = 0) -> BundlePair:
    """Deterministic piece sharing the vertical boundary of expr"""
    if is_closed(expr):
        return Double(expr) if variant == 0 else UnionVertical(expr, expr)
    if isinstance(expr, MorseBundle) and expr.handles:
        handles = expr.handles[::-1] if variant == 0 else expr.handles[1:] + expr.handles[:1]
        return expr.reordered(handles)
    return expr


def sample_line(expr: BundlePair) -> VirtualBundle:
    names = root_names(expr)
    return VirtualBundle.line(names[0] if names else "x")


def standard_disk(rank: int) -> BundlePair:
    return DiskBundle(VirtualBundle.trivial(rank))


class CheckContext:
    """Evaluators shared by the checks of one suite run"""

    def __init__(self, evaluator_factory: Callable[[TorsionTheory], TorsionEvaluator] = TorsionEvaluator):
        self.evaluator_factory = evaluator_factory
        self._evaluators: Dict[TorsionTheory, TorsionEvaluator] = {}
        self._mmm: Dict[int, MMMEvaluator] = {}

    def profile(self, theory: TorsionTheory, expr: BundlePair) -> TorsionProfile:
        require_valid(expr)
        evaluator = self._evaluators.get(theory)
        if evaluator is None:
            evaluator = self._evaluators[theory] = self.evaluator_factory(theory)
        return evaluator.profile(expr)

    def tau(self, theory: TorsionTheory, expr: BundlePair) -> GradedClass:
        return self.profile(theory, expr).relative

    def absolute(self, theory: TorsionTheory, expr: BundlePair) -> GradedClass:
        return self.profile(theory, expr).total

    def mmm_profile(self, expr: BundlePair, k: int) -> TorsionProfile:
        require_valid(expr)
        evaluator = self._mmm.get(k)
        if evaluator is None:
            evaluator = self._mmm[k] = MMMEvaluator(k)
        return evaluator.profile(expr)

    def m2k(self, expr: BundlePair, k: int) -> GradedClass:
        return self.mmm_profile(expr, k).relative


Outcome = Optional[Tuple[Any, Any]]


@dataclass(frozen=True)
class Check:
    """One identity: evaluate returns (lhs, rhs), or None where it does not apply"""
    name: str
    citation: str
    evaluate: Callable[[CheckContext, TorsionTheory, BundlePair], Outcome]
    per_theory: bool = True


CHECKS: List[Check] = []


def identity(name: str, citation: str, per_theory: bool = True):
    def register(func):
        CHECKS.append(Check(name, citation, func, per_theory))
        return func
    return register


def get_check(name: str) -> Check:
    for check in CHECKS:
        if check.name == name:
            return check
    raise KeyError(f"unknown check {name}")


def _first_mismatch(pairs: Iterator[Tuple[Any, Any]]) -> Outcome:
    last = None
    for pair in pairs:
        if pair[0] != pair[1]:
            return pair
        last = pair
    return last


def _union_pieces(expr: BundlePair) -> Optional[Tuple[BundlePair, BundlePair]]:
    if isinstance(expr, UnionVertical):
        return expr.first, expr.second
    first, second = expr, matched_partner(expr)
    if validate(UnionVertical(first, second)):
        return None
    return first, second


# Axioms and the boundary case

@identity("additivity_axiom", "tau(E1 u E2) = 1/2 tau(DE1) + 1/2 tau(DE2)")
def _additivity_axiom(ctx, theory, expr):
    pieces = _union_pieces(expr)
    if pieces is None:
        return None
    first, second = pieces
    lhs = ctx.tau(theory, UnionVertical(first, second))
    rhs = HALF * ctx.tau(theory, Double(first)) + HALF * ctx.tau(theory, Double(second))
    return lhs, rhs


@identity("disjoint_additivity", "tau(E u E') = tau(E) + tau(E') for closed fibers")
def _disjoint_additivity(ctx, theory, expr):
    if not is_closed(expr):
        return None
    other = Double(expr)
    return ctx.tau(theory, UnionVertical(expr, other)), ctx.tau(theory, expr) + ctx.tau(theory, other)


@identity("boundary_definition", "tau(E) = 1/2 tau(DE) + 1/2 tau(dE)")
def _boundary_definition(ctx, theory, expr):
    if fiber_dim(expr) < 1:
        return None
    rhs = HALF * ctx.tau(theory, Double(expr)) + HALF * ctx.tau(theory, VerticalBoundary(expr))
    return ctx.absolute(theory, expr), rhs


@identity("boundary_additivity", "tau(E1 u E2) = tau(E1) + tau(E2) - tau(E1 n E2)")
def _boundary_additivity(ctx, theory, expr):
    pieces = _union_pieces(expr)
    if pieces is None or fiber_dim(expr) < 1:
        return None
    first, second = pieces
    lhs = ctx.tau(theory, UnionVertical(first, second))
    rhs = ctx.absolute(theory, first) + ctx.absolute(theory, second) - ctx.tau(theory, VerticalBoundary(first))
    return lhs, rhs


@identity("four_piece_exchange", "tau(E1 u E2) + tau(E3 u E4) = tau(E1 u E3) + tau(E2 u E4)")
def _four_piece_exchange(ctx, theory, expr):
    e1, e2, e3, e4 = expr, matched_partner(expr, 0), matched_partner(expr, 1), expr
    unions = [UnionVertical(e1, e2), UnionVertical(e3, e4), UnionVertical(e1, e3), UnionVertical(e2, e4)]
    if any(validate(u) for u in unions):
        return None
    values = [ctx.tau(theory, u) for u in unions]
    return values[0] + values[1], values[2] + values[3]


@identity("vertical_boundary_lemma", "tau(dE) = tau(d(E x D^2))")
def _vertical_boundary_lemma(ctx, theory, expr):
    if fiber_dim(expr) < 1:
        return None
    thickened = FiberProduct(expr, standard_disk(2))
    return ctx.tau(theory, VerticalBoundary(expr)), ctx.tau(theory, VerticalBoundary(thickened))


# Relative case

@identity("relative_additivity", "tau(E1 u E2, d0) = tau(E1, d0) + tau(E2, d0)")
def _relative_additivity(ctx, theory, expr):
    def pairs():
        for node in walk(expr):
            if isinstance(node, UnionHandle):
                yield ctx.tau(theory, node), ctx.tau(theory, node.first) + ctx.tau(theory, node.second)
            elif isinstance(node, (MorseBundle, Hatcher)):
                yield ctx.tau(theory, node), ctx.tau(theory, handle_decomposition(node))
    return _first_mismatch(pairs())


@identity("product_formula", "tau(E x E', d0) = chi(X, d0) tau(E, d0) + chi(F, d0) tau(E', d0)")
def _product_formula(ctx, theory, expr):
    def pairs():
        for other in (expr, RelDiskBundle(sample_line(expr) + VirtualBundle.trivial(1))):
            lhs = ctx.tau(theory, FiberProduct(expr, other))
            rhs = stats(other).chi_rel * ctx.tau(theory, expr) + stats(expr).chi_rel * ctx.tau(theory, other)
            yield lhs, rhs
    return _first_mismatch(pairs())


@identity("transfer_axiom", "tau(S^m(xi) over E) = chi(S^m) tau(E) + tr^E(tau_E(S^m(xi)))")
def _transfer_axiom(ctx, theory, expr):
    def pairs():
        for m in (1, 2):
            sphere = SphereBundle(sample_line(expr) + VirtualBundle.trivial(m - 1), m)
            lhs = ctx.tau(theory, FiberProduct(expr, sphere))
            rhs = sphere_chi(m) * ctx.tau(theory, expr) + transfer_pullback(expr, ctx.tau(theory, sphere))
            yield lhs, rhs
    return _first_mismatch(pairs())


@identity("stability", "tau(E x D^n) = tau(E)")
def _stability(ctx, theory, expr):
    return ctx.tau(theory, FiberProduct(expr, standard_disk(2))), ctx.tau(theory, expr)


@identity("duality_exercise", "tau(E, d0) + (-1)^n tau(E, d1) = 2 tau+(E, d0)")
def _duality_exercise(ctx, theory, expr):
    profile = ctx.profile(theory, expr)
    lhs = profile.relative + (-1) ** fiber_dim(expr) * profile.relative_dual
    return lhs, 2 * ctx.tau(theory.even_part(), expr)


# Computed values

def _sphere_value(theory: TorsionTheory, xi: VirtualBundle, n: int) -> GradedClass:
    return 2 * theory.s(n) * ch4k(xi, theory.k)


@identity("sphere_value", "tau(S^n(xi)) = 2 s_n ch(xi)")
def _sphere_values(ctx, theory, expr):
    return _first_mismatch(
        (ctx.tau(theory, node), _sphere_value(theory, node.xi, node.n))
        for node in walk(expr) if isinstance(node, SphereBundle)
    )


@identity("disk_value", "tau(D(xi)) = (s1 + s2) ch(xi)")
def _disk_values(ctx, theory, expr):
    return _first_mismatch(
        (ctx.tau(theory, node), (theory.s1 + theory.s2) * ch4k(node.xi, theory.k))
        for node in walk(expr) if isinstance(node, DiskBundle)
    )


@identity("relative_disk_value", "tau(D^i(xi), S^(i-1)(xi)) = (s_i - s_(i-1)) ch(xi)")
def _relative_disk_values(ctx, theory, expr):
    return _first_mismatch(
        (ctx.tau(theory, node),
         (theory.s(node.xi.rank) - theory.s(node.xi.rank - 1)) * ch4k(node.xi, theory.k))
        for node in walk(expr) if isinstance(node, RelDiskBundle) and node.xi.rank >= 1
    )


@identity("handle_value", "tau(handle of index i) = (-1)^i [(s1 + s2) ch(eta) + (s2 - s1) ch(xi)]")
def _handle_values(ctx, theory, expr):
    k = theory.k

    def expected(h: Handle) -> GradedClass:
        value = (theory.s1 + theory.s2) * ch4k(h.eta, k) + (theory.s2 - theory.s1) * ch4k(h.xi, k)
        return (-1) ** h.index * value

    return _first_mismatch(
        (ctx.tau(theory, handle_piece(h)), expected(h))
        for node in walk(expr) if isinstance(node, MorseBundle) for h in node.handles
    )


@identity("morse_sphere", "two critical points of index 0 and n give tau(S^n(xi))")
def _morse_sphere(ctx, theory, expr):
    def pairs():
        for node in walk(expr):
            if isinstance(node, SphereBundle):
                plane = node.xi + VirtualBundle.trivial(-1)
                morse = MorseBundle(None, (
                    Handle(0, VirtualBundle.trivial(0), plane),
                    Handle(node.n, plane, VirtualBundle.trivial(0)),
                ))
                yield ctx.tau(theory, morse), ctx.tau(theory, node)
    return _first_mismatch(pairs())


@identity("hatcher_value", "tau(Hatcher(xi, n)) = (-1)^(n+1) 2 s1 ch(xi)")
def _hatcher_values(ctx, theory, expr):
    return _first_mismatch(
        (ctx.tau(theory, node), (-1) ** (node.n + 1) * 2 * theory.s1 * ch4k(node.xi, theory.k))
        for node in walk(expr) if isinstance(node, Hatcher)
    )


@identity("handle_permutation", "tau(Morse bundle) is independent of the handle order")
def _handle_permutation(ctx, theory, expr):
    return _first_mismatch(
        (ctx.tau(theory, node.reordered(node.handles[::-1])), ctx.tau(theory, node))
        for node in walk(expr) if isinstance(node, MorseBundle)
    )


# Uniqueness and parity

@identity("uniqueness", "tau - a tau_fr - b M_2k = 0")
def _uniqueness(ctx, theory, expr):
    try:
        a, b = decompose(theory)
    except NotDecomposable:
        return None
    k = theory.k
    lhs = ctx.tau(theory, expr) - a * ctx.tau(fr_theory(k), expr) - b * ctx.tau(mmm_theory(k), expr)
    return lhs, zero_class(theory.degree)


@identity("decomposition", "(s1, s2) = a (s1, s2)_fr + b (s1, s2)_mmm")
def _decomposition(ctx, theory, expr):
    try:
        a, b = decompose(theory)
    except NotDecomposable:
        return None
    k = theory.k
    rebuilt = fr_theory(k).combine(a, mmm_theory(k), b)
    return ctx.tau(rebuilt, expr), ctx.tau(theory, expr)


@identity("even_odd_sum", "tau+ + tau- = tau")
def _even_odd_sum(ctx, theory, expr):
    return ctx.tau(theory.even_part(), expr) + ctx.tau(theory.odd_part(), expr), ctx.tau(theory, expr)


@identity("even_fiber_proportionality", "tau_fr = (-1)^k z(2k+1) / (2 (2k)!) M_2k on closed even fibers",
          per_theory=False)
def _even_fiber_proportionality(ctx, theory, expr):
    if not is_closed(expr) or fiber_dim(expr) % 2:
        return None
    k = theory.k
    return ctx.tau(fr_theory(k), expr), even_fiber_constant(k) * ctx.tau(mmm_theory(k), expr)


@identity("fr_odd_part", "tau_fr - c M_2k is the odd part of FR torsion", per_theory=False)
def _fr_odd_part(ctx, theory, expr):
    k = theory.k
    lhs = ctx.tau(fr_theory(k), expr) - even_fiber_constant(k) * ctx.tau(mmm_theory(k), expr)
    return lhs, ctx.tau(fr_theory(k).odd_part(), expr)


@identity("mmm_parity", "M_2k is even: tau-(M_2k) = 0 and M_2k = 0 on closed odd fibers", per_theory=False)
def _mmm_parity(ctx, theory, expr):
    mmm = mmm_theory(theory.k)
    zero = zero_class(mmm.degree)
    closed_odd = ctx.tau(mmm, expr) if is_closed(expr) and fiber_dim(expr) % 2 else zero
    return (ctx.tau(mmm.odd_part(), expr), closed_odd), (zero, zero)


# MMM classes and transfer

@identity("m2k_cross_validation", "tr((2k)! ch(T^v E)) = tau_mmm(E)", per_theory=False)
def _m2k_cross_validation(ctx, theory, expr):
    return ctx.m2k(expr, theory.k), ctx.tau(mmm_theory(theory.k), expr)


@identity("mmm_stability", "M_2k(E x D^n) = M_2k(E)", per_theory=False)
def _mmm_stability(ctx, theory, expr):
    return ctx.m2k(FiberProduct(expr, standard_disk(2)), theory.k), ctx.m2k(expr, theory.k)


@identity("mmm_additivity", "M(E1 u E2) = M(E1) + M(E2) - M(dE1)", per_theory=False)
def _mmm_additivity(ctx, theory, expr):
    pieces = _union_pieces(expr)
    if pieces is None or fiber_dim(expr) < 1:
        return None
    first, second = pieces
    k = theory.k
    rhs = (ctx.mmm_profile(first, k).total + ctx.mmm_profile(second, k).total
           - ctx.m2k(VerticalBoundary(first), k))
    return ctx.m2k(UnionVertical(first, second), k), rhs


@identity("mmm_relative_formula", "M(E, d0) = M(E) - M(d0 E)", per_theory=False)
def _mmm_relative_formula(ctx, theory, expr):
    k = theory.k

    def pairs():
        for node in walk(expr):
            if isinstance(node, RelDiskBundle) and node.xi.rank >= 2:
                rhs = ctx.m2k(DiskBundle(node.xi), k) - ctx.m2k(SphereBundle(node.xi, node.xi.rank - 1), k)
                yield ctx.m2k(node, k), rhs
            elif isinstance(node, MorseBundle) and node.base is not None:
                yield ctx.m2k(node, k), ctx.mmm_profile(node, k).total - ctx.m2k(node.base, k)
    return _first_mismatch(pairs())


@identity("transfer_restriction", "tr^(E, d0) = tr^E - tr^(d0 E)", per_theory=False)
def _transfer_restriction(ctx, theory, expr):
    found = relative_transfer_identities(expr, ch4k(sample_line(expr), theory.k))
    return found.relative, found.absolute - found.boundary


@identity("transfer_duality", "tr^(E, d1) = (-1)^n tr^(E, d0)", per_theory=False)
def _transfer_duality(ctx, theory, expr):
    found = relative_transfer_identities(expr, ch4k(sample_line(expr), theory.k))
    return found.dual, (-1) ** found.dim * found.relative


@identity("transfer_additivity", "tr^(E1 u E2) = tr^E1 + tr^E2 - tr^(dE1)", per_theory=False)
def _transfer_additivity(ctx, theory, expr):
    pieces = _union_pieces(expr)
    if pieces is None:
        return None
    return transfer_additivity(pieces[0], pieces[1], ch4k(sample_line(expr), theory.k))


@identity("euler_bookkeeping", "duality, doubling and product rules for relative Euler characteristics",
          per_theory=False)
def _euler_bookkeeping(ctx, theory, expr):
    s = stats(expr)
    n = fiber_dim(expr)
    closed_odd = s.chiF if is_closed(expr) and n % 2 else 0
    lhs = (s.chi_rel1, stats(Double(expr)).chiF, stats(FiberProduct(expr, expr)).chi_rel, closed_odd)
    rhs = ((-1) ** n * s.chi_rel, 2 * s.chiF - s.chi_boundary, s.chi_rel ** 2, 0)
    return lhs, rhs


# Reports

@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check over every theory and sample"""
    name: str
    citation: str
    samples: int
    status: Literal["pass", "fail"]
    theory: Optional[str] = None
    counterexample: Optional[str] = None
    lhs: Optional[str] = None
    rhs: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def summary_records(reports: Sequence[CheckReport]) -> List[Dict[str, Any]]:
    """Machine readable summary, one record per check"""
    return [
        {"name": r.name, "citation": r.citation, "samples": r.samples, "status": r.status}
        for r in reports
    ]


def replay_script(expr: BundlePair, theory: TorsionTheory, check_name: str = "") -> str:
    """DSL script that evaluates the counterexample through the CLI"""
    from script import render_expr, render_theory

    lines = [f"# counterexample for {check_name}"] if check_name else []
    lines.extend(f"root {name}" for name in root_names(expr))
    lines.append(f"theory T = {render_theory(theory)}")
    lines.append(f"E = {render_expr(expr)}")
    lines.append("query tau(T, E)")
    return "\n".join(lines) + "\n"


def _fails(ctx: CheckContext, check: Check, theory: TorsionTheory, expr: BundlePair) -> bool:
    if validate(expr):
        return False
    try:
        outcome = check.evaluate(ctx, theory, expr)
    except (UnsupportedNode, NotDecomposable, MalformedExpression):
        return False
    return outcome is not None and outcome[0] != outcome[1]


def _shrink_candidates(expr: BundlePair) -> Iterator[BundlePair]:
    children = expr.children()
    yield from children
    if isinstance(expr, MorseBundle):
        if expr.base is not None and expr.handles:
            yield MorseBundle(None, expr.handles)
        if len(expr.handles) > 1 or expr.base is not None:
            for position in range(len(expr.handles)):
                yield expr.without_handle(position)
    for position, child in enumerate(children):
        for smaller in _shrink_candidates(child):
            replaced = list(children)
            replaced[position] = smaller
            yield expr.with_children(*replaced)


def minimize(expr: BundlePair, check: Union[Check, str], theory: TorsionTheory,
             context: Optional[CheckContext] = None) -> BundlePair:
    """Greedily shrink a failing expression while the check keeps failing"""
    if isinstance(check, str):
        check = get_check(check)
    ctx = context or CheckContext()
    if not _fails(ctx, check, theory, expr):
        raise InvalidMinimizeCall(f"{check.name} does not fail on this expression")
    current = expr
    improved = True
    while improved:
        improved = False
        for candidate in _shrink_candidates(current):
            if _fails(ctx, check, theory, candidate):
                current = candidate
                improved = True
                break
    logger.info(f"🔍 Minimised {check.name} counterexample to depth {depth(current)}")
    return current


def _run_check(ctx: CheckContext, check: Check, theories: Sequence[TorsionTheory],
               expressions: Sequence[BundlePair]) -> CheckReport:
    from script import render_theory

    samples = 0
    for theory in theories:
        for expr in expressions:
            try:
                outcome = check.evaluate(ctx, theory, expr)
            except (UnsupportedNode, NotDecomposable):
                continue
            if outcome is None:
                continue
            samples += 1
            lhs, rhs = outcome
            if lhs == rhs:
                continue
            logger.warning(f"❌ {check.name} failed, minimising counterexample")
            smallest = minimize(expr, check, theory, ctx)
            lhs, rhs = check.evaluate(ctx, theory, smallest)
            return CheckReport(
                check.name, check.citation, samples, "fail",
                theory=render_theory(theory),
                counterexample=replay_script(smallest, theory, check.name),
                lhs=str(lhs), rhs=str(rhs),
            )
    return CheckReport(check.name, check.citation, samples, "pass")


def run_suite(spec: ExprSpec, theories: Sequence[TorsionTheory], samples: int = 200,
              evaluator_factory: Callable[[TorsionTheory], TorsionEvaluator] = TorsionEvaluator,
              checks: Optional[Sequence[Check]] = None) -> List[CheckReport]:
    """Evaluate every check with exact equality; failures are reported, never raised"""
    checks = list(CHECKS if checks is None else checks)
    expressions = ExpressionGenerator(spec).sample(samples)
    representatives: Dict[int, TorsionTheory] = {}
    for theory in theories:
        representatives.setdefault(theory.k, theory)
    ctx = CheckContext(evaluator_factory)
    logger.info(
        f"🧪 Running {len(checks)} checks on {len(expressions)} expressions "
        f"and {len(theories)} theories (seed {spec.seed})"
    )
    reports = []
    for check in checks:
        pool = theories if check.per_theory else list(representatives.values())
        report = _run_check(ctx, check, pool, expressions)
        logger.debug(f"{'✅' if report.passed else '❌'} {check.name}: {report.samples} samples")
        reports.append(report)
    return sorted(reports, key=lambda r: r.name)
