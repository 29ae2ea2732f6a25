#!/usr/bin/env python3
"""
Bundle Expressions - Torsion Calculator
Expression trees for smooth bundle pairs (E, d0E) -> B with Euler characteristic bookkeeping
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Set, Tuple

from chern import VirtualBundle, bundle_to_text, complement
from errors import MalformedExpression

logger = logging.getLogger(__name__)

# Bound on the memoised dimension, stats and diagnostics tables
CACHE_SIZE = 8192


def sphere_chi(n: int) -> int:
    """Euler characteristic of S^n, with S^-1 empty"""
    if n < 0:
        return 0
    return 1 + (-1) ** n


@dataclass(frozen=True)
class FiberStats:
    """Euler characteristics of the fiber F and its strata d0F, d1F and d0F n d1F"""
    dim: int
    chiF: int
    chiD0: int = 0
    chiD1: int = 0
    chiCorner: int = 0

    @property
    def chi_rel(self) -> int:
        """chi(F, d0F)"""
        return self.chiF - self.chiD0

    @property
    def chi_rel1(self) -> int:
        """chi(F, d1F)"""
        return self.chiF - self.chiD1

    @property
    def chi_boundary(self) -> int:
        return self.chiD0 + self.chiD1 - self.chiCorner

    def is_closed(self) -> bool:
        return self.chiD0 == 0 and self.chiD1 == 0 and self.chiCorner == 0

    def strata(self) -> Tuple[int, int, int, int]:
        return (self.chiF, self.chiD0, self.chiD1, self.chiCorner)


def product_strata(left, right):
    """Strata of a fiber product from the strata (F, d0, d1, corner) of its factors

    Works over any ring: integers for Euler characteristics, dual numbers for
    torsion. d0 of the product is d0F x X u F x d0X, likewise d1; the corner
    is assembled by inclusion-exclusion.
    """
    f, d0, d1, c = left
    x, e0, e1, c2 = right
    total = f * x
    first = d0 * x + f * e0 - d0 * e0
    second = d1 * x + f * e1 - d1 * e1
    corner = (
        c * x + f * c2 + d0 * e1 + d1 * e0
        - d0 * c2 - d1 * c2 - c * e0 - c * e1 + c * c2
    )
    return total, first, second, corner


class BundlePair:
    """Base class for bundle expression nodes"""

    def children(self) -> Tuple["BundlePair", ...]:
        return ()

    def with_children(self, *children: "BundlePair") -> "BundlePair":
        return self

    def bundles(self) -> Tuple[VirtualBundle, ...]:
        return ()


@dataclass(frozen=True)
class Trivial(BundlePair):
    """Product bundle B x F with prescribed fiber statistics"""
    dim: int
    stats: FiberStats


@dataclass(frozen=True)
class SphereBundle(BundlePair):
    """Unit sphere bundle S^n(xi), rank xi = n + 1"""
    xi: VirtualBundle
    n: int

    def bundles(self):
        return (self.xi,)


@dataclass(frozen=True)
class DiskBundle(BundlePair):
    """Disk bundle D^n(xi) with d0 empty and d1 the sphere bundle"""
    xi: VirtualBundle

    def bundles(self):
        return (self.xi,)


@dataclass(frozen=True)
class RelDiskBundle(BundlePair):
    """The pair (D^n(xi), S^(n-1)(xi))"""
    xi: VirtualBundle

    def bundles(self):
        return (self.xi,)


@dataclass(frozen=True)
class Double(BundlePair):
    """Fiberwise double of E along its vertical boundary"""
    inner: BundlePair

    def children(self):
        return (self.inner,)

    def with_children(self, inner):
        return Double(inner)


@dataclass(frozen=True)
class VerticalBoundary(BundlePair):
    inner: BundlePair

    def children(self):
        return (self.inner,)

    def with_children(self, inner):
        return VerticalBoundary(inner)


@dataclass(frozen=True)
class UnionVertical(BundlePair):
    """Two pieces glued along their whole common vertical boundary"""
    first: BundlePair
    second: BundlePair

    def children(self):
        return (self.first, self.second)

    def with_children(self, first, second):
        return UnionVertical(first, second)


@dataclass(frozen=True)
class UnionHandle(BundlePair):
    """Two pieces glued with first n second = d0(second) inside d1(first)"""
    first: BundlePair
    second: BundlePair

    def children(self):
        return (self.first, self.second)

    def with_children(self, first, second):
        return UnionHandle(first, second)


@dataclass(frozen=True)
class FiberProduct(BundlePair):
    first: BundlePair
    second: BundlePair

    def children(self):
        return (self.first, self.second)

    def with_children(self, first, second):
        return FiberProduct(first, second)


@dataclass(frozen=True)
class Handle:
    """Critical point of index i with negative/positive eigenspace bundles xi, eta"""
    index: int
    xi: VirtualBundle
    eta: VirtualBundle

    def reversed(self, dim: int) -> "Handle":
        return Handle(dim - self.index, self.eta, self.xi)

    def sort_key(self):
        return (self.index, bundle_to_text(self.xi), bundle_to_text(self.eta))


@dataclass(frozen=True)
class MorseBundle(BundlePair):
    """Bundle with a fiberwise Morse function; base is the closed bundle d0E or None"""
    base: Optional[BundlePair]
    handles: Tuple[Handle, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "handles", tuple(self.handles))

    def children(self):
        return (self.base,) if self.base is not None else ()

    def with_children(self, *children):
        return MorseBundle(children[0] if children else None, self.handles)

    def bundles(self):
        return tuple(b for h in self.handles for b in (h.xi, h.eta))

    def without_handle(self, position: int) -> "MorseBundle":
        return MorseBundle(self.base, self.handles[:position] + self.handles[position + 1:])

    def reordered(self, handles) -> "MorseBundle":
        return MorseBundle(self.base, tuple(handles))


@dataclass(frozen=True)
class Hatcher(BundlePair):
    """Hatcher's disk bundle built from xi; fiber dimension total_rank"""
    xi: VirtualBundle
    n: int
    total_rank: int

    def bundles(self):
        return (self.xi,)

    def padded_xi(self) -> VirtualBundle:
        return self.xi + VirtualBundle.trivial(self.n - self.xi.rank)

    def handles(self) -> Tuple[Handle, ...]:
        xi_n = self.padded_xi()
        return (
            Handle(self.n - 1, VirtualBundle.trivial(self.n - 1),
                   VirtualBundle.trivial(self.total_rank - self.n + 1)),
            Handle(self.n, xi_n, complement(xi_n, self.total_rank)),
        )


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding"""
    code: str
    message: str
    node: Optional[BundlePair] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class Workspace:
    """Declared roots and named bundles over the abstract base B"""
    roots: Set[str] = field(default_factory=set)
    bundles: Dict[str, VirtualBundle] = field(default_factory=dict)

    def declare_root(self, name: str):
        self.roots.add(name)

    def define_bundle(self, name: str, xi: VirtualBundle):
        missing = [r for r in xi.root_names() if r not in self.roots]
        if missing:
            raise ValueError(f"undeclared roots {', '.join(missing)} in bundle {name}")
        self.bundles[name] = xi

    def undeclared_roots(self, expr: BundlePair) -> List[str]:
        return sorted({r for r in root_names(expr) if r not in self.roots})


# Structure

def walk(expr: BundlePair) -> Iterator[BundlePair]:
    """Preorder traversal"""
    yield expr
    for child in expr.children():
        yield from walk(child)


def depth(expr: BundlePair) -> int:
    return 1 + max((depth(child) for child in expr.children()), default=0)


def root_names(expr: BundlePair) -> List[str]:
    return sorted({name for node in walk(expr) for xi in node.bundles() for name in xi.root_names()})


@lru_cache(maxsize=CACHE_SIZE)
def fiber_dim(expr: BundlePair) -> int:
    if isinstance(expr, Trivial):
        return expr.dim
    if isinstance(expr, SphereBundle):
        return expr.n
    if isinstance(expr, (DiskBundle, RelDiskBundle)):
        return expr.xi.rank
    if isinstance(expr, Double):
        return fiber_dim(expr.inner)
    if isinstance(expr, VerticalBoundary):
        return fiber_dim(expr.inner) - 1
    if isinstance(expr, (UnionVertical, UnionHandle)):
        return fiber_dim(expr.first)
    if isinstance(expr, FiberProduct):
        return fiber_dim(expr.first) + fiber_dim(expr.second)
    if isinstance(expr, MorseBundle):
        if expr.handles:
            h = expr.handles[0]
            return h.xi.rank + h.eta.rank
        if expr.base is not None:
            return fiber_dim(expr.base) + 1
        raise MalformedExpression("Morse bundle without base or handles", expr)
    if isinstance(expr, Hatcher):
        return expr.total_rank
    raise MalformedExpression(f"unknown node {type(expr).__name__}", expr)


def is_closed(expr: BundlePair) -> bool:
    """Structurally closed fibers: empty vertical boundary"""
    if isinstance(expr, (SphereBundle, Double, VerticalBoundary, UnionVertical)):
        return True
    if isinstance(expr, Trivial):
        return expr.stats.is_closed()
    if isinstance(expr, FiberProduct):
        return is_closed(expr.first) and is_closed(expr.second)
    return False


def boundary_signature(expr: BundlePair):
    """Hashable descriptor of the vertical boundary used to match gluing pieces"""
    if is_closed(expr):
        return ("closed", fiber_dim(expr))
    if isinstance(expr, (DiskBundle, RelDiskBundle)):
        return ("sphere", expr.xi, expr.xi.rank - 1)
    if isinstance(expr, MorseBundle):
        return ("morse", expr.base, tuple(sorted(expr.handles, key=Handle.sort_key)))
    return ("boundary", expr)


@lru_cache(maxsize=CACHE_SIZE)
def stats(expr: BundlePair) -> FiberStats:
    """Euler characteristics of the fiber strata by structural recursion"""
    n = fiber_dim(expr)
    if isinstance(expr, Trivial):
        return expr.stats
    if isinstance(expr, SphereBundle):
        if expr.n < 1:
            raise MalformedExpression("sphere bundles need n >= 1", expr)
        return FiberStats(n, sphere_chi(n))
    if isinstance(expr, DiskBundle):
        return FiberStats(n, 1, 0, sphere_chi(n - 1), 0)
    if isinstance(expr, RelDiskBundle):
        return FiberStats(n, 1, sphere_chi(n - 1), 0, 0)
    if isinstance(expr, Double):
        s = stats(expr.inner)
        return FiberStats(n, 2 * s.chiF - s.chi_boundary)
    if isinstance(expr, VerticalBoundary):
        return FiberStats(n, stats(expr.inner).chi_boundary)
    if isinstance(expr, UnionVertical):
        a = stats(expr.first)
        return FiberStats(n, a.chiF + stats(expr.second).chiF - a.chi_boundary)
    if isinstance(expr, UnionHandle):
        a, b = stats(expr.first), stats(expr.second)
        return FiberStats(
            n,
            a.chiF + b.chiF - b.chiD0,
            a.chiD0,
            a.chiD1 + b.chiD1 - b.chiD0,
            a.chiCorner,
        )
    if isinstance(expr, FiberProduct):
        return FiberStats(n, *product_strata(stats(expr.first).strata(), stats(expr.second).strata()))
    if isinstance(expr, MorseBundle):
        base = stats(expr.base).chiF if expr.base is not None else 0
        chi = base + sum((-1) ** h.index for h in expr.handles)
        upper = chi - sum((-1) ** (n - h.index) for h in expr.handles)
        return FiberStats(n, chi, base, upper, 0)
    if isinstance(expr, Hatcher):
        return FiberStats(n, 1, 1, 1, sphere_chi(n - 2))
    raise MalformedExpression(f"unknown node {type(expr).__name__}", expr)


# Validation

def _local_diagnostics(expr: BundlePair) -> List[Diagnostic]:
    found: List[Diagnostic] = []

    def report(code: str, message: str):
        found.append(Diagnostic(code, message, expr))

    if isinstance(expr, Trivial):
        s = expr.stats
        if expr.dim < 0:
            report("InvalidParameter", f"fiber dimension {expr.dim} is negative")
        if s.dim != expr.dim:
            report("DimensionMismatch", f"stats of dimension {s.dim} on a fiber of dimension {expr.dim}")
        if s.chi_boundary != (1 - (-1) ** expr.dim) * s.chiF:
            if s.is_closed():
                report("EulerMismatch", f"closed odd dimensional fiber with chi {s.chiF}")
            else:
                report("EulerMismatch", f"chi(dF) = {s.chi_boundary} must equal (1 - (-1)^n) chi(F)")
        if s.chi_rel1 != (-1) ** expr.dim * s.chi_rel:
            report("EulerMismatch", "chi(F, d1) must equal (-1)^n chi(F, d0)")
    elif isinstance(expr, SphereBundle):
        if expr.n < 1:
            report("InvalidParameter", f"sphere dimension {expr.n} must be at least 1")
        if expr.xi.rank != expr.n + 1:
            report("RankMismatch", f"S^{expr.n} needs a bundle of rank {expr.n + 1}, got {expr.xi.rank}")
    elif isinstance(expr, (DiskBundle, RelDiskBundle)):
        if expr.xi.rank < 0:
            report("RankMismatch", f"disk bundle of negative rank {expr.xi.rank}")
    elif isinstance(expr, VerticalBoundary):
        if fiber_dim(expr.inner) < 1:
            report("DimensionMismatch", "vertical boundary of a zero dimensional fiber")
    elif isinstance(expr, (UnionVertical, UnionHandle)):
        left, right = fiber_dim(expr.first), fiber_dim(expr.second)
        if left != right:
            report("DimensionMismatch", f"gluing fibers of dimensions {left} and {right}")
        elif isinstance(expr, UnionVertical) and boundary_signature(expr.first) != boundary_signature(expr.second):
            report("BoundaryMismatch", "pieces do not share their vertical boundary")
    elif isinstance(expr, MorseBundle):
        if not expr.handles and expr.base is None:
            report("InvalidParameter", "Morse bundle without base or handles")
            return found
        n = fiber_dim(expr)
        if expr.base is not None:
            if not is_closed(expr.base):
                report("InvalidParameter", "the base of a Morse bundle must be closed")
            if fiber_dim(expr.base) != n - 1:
                report("DimensionMismatch", f"base of dimension {fiber_dim(expr.base)} under a fiber of dimension {n}")
        for h in expr.handles:
            if not 0 <= h.index <= n:
                report("InvalidParameter", f"handle index {h.index} outside 0..{n}")
            if h.xi.rank != h.index:
                report("RankMismatch", f"index {h.index} handle with negative eigenspace of rank {h.xi.rank}")
            if h.xi.rank + h.eta.rank != n:
                report("RankMismatch", f"handle bundles of total rank {h.xi.rank + h.eta.rank} in dimension {n}")
    elif isinstance(expr, Hatcher):
        if expr.n < 1:
            report("InvalidParameter", f"Hatcher index n = {expr.n} must be at least 1")
        if not 0 <= expr.xi.rank <= expr.n:
            report("RankMismatch", f"Hatcher bundle needs rank xi <= {expr.n}, got {expr.xi.rank}")
        if expr.total_rank <= expr.n:
            report("InvalidParameter", f"total rank {expr.total_rank} must exceed n = {expr.n}")
    elif not isinstance(expr, (Double, FiberProduct)):
        report("UnknownNode", f"unknown node {type(expr).__name__}")
    return found


@lru_cache(maxsize=CACHE_SIZE)
def _diagnostics(expr: BundlePair) -> Tuple[Diagnostic, ...]:
    found: List[Diagnostic] = []
    for child in expr.children():
        found.extend(_diagnostics(child))
    if found:
        return tuple(found)
    try:
        found.extend(_local_diagnostics(expr))
    except MalformedExpression as e:
        found.append(Diagnostic("Malformed", str(e), expr))
    return tuple(found)


def validate(expr: BundlePair, workspace: Optional[Workspace] = None) -> List[Diagnostic]:
    """All rank, dimension and declaration problems of expr; empty when well formed"""
    found = list(_diagnostics(expr))
    if workspace is not None:
        for name in workspace.undeclared_roots(expr):
            found.append(Diagnostic("UndeclaredRoot", f"root {name} is not declared", expr))
    return found


def require_valid(expr: BundlePair, workspace: Optional[Workspace] = None) -> BundlePair:
    found = validate(expr, workspace)
    if found:
        logger.debug(f"❌ Invalid expression: {found[0]}")
        raise MalformedExpression("; ".join(str(d) for d in found), found[0].node, found)
    return expr
