"""Exact arithmetic for small finite groups.

Elements are dense integer ids ``0..order-1``.  Cyclic groups compute with
modular arithmetic, product groups with mixed-radix tuples (the last factor
varies fastest, matching ``itertools.product``), and arbitrary groups are
accepted as explicit Cayley tables that are verified eagerly on construction.
Groups are not assumed commutative anywhere; ``is_abelian`` is a queryable
property.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, PreconditionError

# Cayley tables are refused beyond this order so that every table held by the
# workbench has had its group axioms verified.
TABLE_VERIFY_BOUND = 512


class FiniteGroup:
    """Base class: a finite group on element ids 0..order-1."""

    order: int
    identity: int

    def op(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inverse(self, a: int) -> int:
        raise NotImplementedError

    def elements(self) -> range:
        return range(self.order)

    @cached_property
    def is_abelian(self) -> bool:
        return all(
            self.op(a, b) == self.op(b, a)
            for a in self.elements()
            for b in self.elements()
        )

    def describe(self) -> dict:
        """Serializable structural description of this group."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(order={self.order})"


class CyclicGroup(FiniteGroup):
    """Integers 0..n-1 under addition mod n."""

    def __init__(self, n: int):
        if n < 1:
            raise DomainError(f"cyclic group order must be >= 1, got {n}")
        self.order = n
        self.identity = 0

    def op(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def inverse(self, a: int) -> int:
        return (-a) % self.order

    @cached_property
    def is_abelian(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "cyclic", "order": self.order}


class ProductGroup(FiniteGroup):
    """Direct product of finite groups with mixed-radix element ids."""

    def __init__(self, factors: Sequence[FiniteGroup]):
        if not factors:
            raise DomainError("direct product needs at least one factor")
        self.factors = tuple(factors)
        self.order = 1
        for g in self.factors:
            self.order *= g.order
        self.identity = self.encode(tuple(g.identity for g in self.factors))

    def encode(self, values: Sequence[int]) -> int:
        """Mixed-radix id of a factor-value tuple (last factor fastest)."""
        if len(values) != len(self.factors):
            raise DomainError(
                f"expected {len(self.factors)} coordinates, got {len(values)}"
            )
        idx = 0
        for v, g in zip(values, self.factors):
            if not 0 <= v < g.order:
                raise DomainError(f"coordinate {v} outside factor of order {g.order}")
            idx = idx * g.order + v
        return idx

    def decode(self, a: int) -> tuple[int, ...]:
        if not 0 <= a < self.order:
            raise DomainError(f"element id {a} outside group of order {self.order}")
        out = []
        for g in reversed(self.factors):
            out.append(a % g.order)
            a //= g.order
        return tuple(reversed(out))

    def op(self, a: int, b: int) -> int:
        ta, tb = self.decode(a), self.decode(b)
        return self.encode(tuple(g.op(x, y) for g, x, y in zip(self.factors, ta, tb)))

    def inverse(self, a: int) -> int:
        return self.encode(tuple(g.inverse(x) for g, x in zip(self.factors, self.decode(a))))

    @cached_property
    def is_abelian(self) -> bool:
        return all(g.is_abelian for g in self.factors)

    def describe(self) -> dict:
        return {
            "kind": "product",
            "order": self.order,
            "factors": [g.describe() for g in self.factors],
        }


class TableGroup(FiniteGroup):
    """Group given by an explicit Cayley table, verified on construction."""

    def __init__(self, table: Sequence[Sequence[int]]):
        n = len(table)
        if n < 1:
            raise DomainError("empty Cayley table")
        if n > TABLE_VERIFY_BOUND:
            raise DomainError(
                f"Cayley tables above order {TABLE_VERIFY_BOUND} are not accepted"
            )
        arr = np.asarray(table, dtype=np.int64)
        if arr.shape != (n, n):
            raise DomainError(f"Cayley table must be {n}x{n}")
        if arr.min() < 0 or arr.max() >= n:
            raise DomainError("Cayley table entries must be element ids 0..order-1")
        self.order = n
        self._table = arr
        self.identity = self._find_identity()
        self._inverses = self._find_inverses()
        self._check_associativity()

    def _find_identity(self) -> int:
        ids = np.arange(self.order)
        for e in range(self.order):
            if (self._table[e] == ids).all() and (self._table[:, e] == ids).all():
                return e
        raise DomainError("Cayley table has no two-sided identity")

    def _find_inverses(self) -> np.ndarray:
        inv = np.full(self.order, -1, dtype=np.int64)
        for a in range(self.order):
            hits = np.flatnonzero(self._table[a] == self.identity)
            if hits.size != 1 or self._table[hits[0], a] != self.identity:
                raise DomainError(f"element {a} has no two-sided inverse")
            inv[a] = hits[0]
        return inv

    def _check_associativity(self) -> None:
        t = self._table
        # Row-chunked check of t[t[a, b], c] == t[a, t[b, c]] for all triples.
        for a in range(self.order):
            lhs = t[t[a]]
            rhs = t[a][t]
            if not (lhs == rhs).all():
                raise DomainError("Cayley table is not associative")

    def op(self, a: int, b: int) -> int:
        if not (0 <= a < self.order and 0 <= b < self.order):
            raise DomainError("element id outside group")
        return int(self._table[a, b])

    def inverse(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise DomainError("element id outside group")
        return int(self._inverses[a])

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self._table == self._table.T).all())

    def describe(self) -> dict:
        return {
            "kind": "table",
            "order": self.order,
            "table": self._table.tolist(),
        }


def make_cyclic(n: int) -> CyclicGroup:
    """Cyclic group of order n."""
    return CyclicGroup(n)


def direct_product(factors: Sequence[FiniteGroup]) -> ProductGroup:
    """Direct product of the given factor groups."""
    return ProductGroup(factors)


def group_from_description(desc: Mapping) -> FiniteGroup:
    """Rebuild a group from the dict format produced by ``describe``."""
    if not isinstance(desc, Mapping) or "kind" not in desc:
        raise DomainError("group description must be a mapping with a 'kind' key")
    kind = desc["kind"]
    if kind == "cyclic":
        return make_cyclic(int(desc["order"]))
    if kind == "product":
        return direct_product([group_from_description(d) for d in desc["factors"]])
    if kind == "table":
        g = TableGroup(desc["table"])
        if "order" in desc and int(desc["order"]) != g.order:
            raise DomainError("declared order does not match table size")
        return g
    raise DomainError(f"unknown group kind {kind!r}")


def is_subgroup(group: FiniteGroup, members: Iterable[int]) -> bool:
    """Whether the member set is closed, contains the identity and inverses."""
    s = set(members)
    for a in s:
        if not 0 <= a < group.order:
            raise DomainError(f"element id {a} outside group of order {group.order}")
    if group.identity not in s:
        return False
    for a in s:
        if group.inverse(a) not in s:
            return False
        for b in s:
            if group.op(a, b) not in s:
                return False
    return True


@dataclass(frozen=True)
class SubgroupHandle:
    """A verified subgroup of a parent group."""

    parent: FiniteGroup
    members: frozenset[int]

    def __post_init__(self):
        if not is_subgroup(self.parent, self.members):
            raise PreconditionError("member set is not a subgroup")
        # Lagrange, as a cheap sanity assertion on the verified subgroup.
        assert self.parent.order % len(self.members) == 0

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


def subgroup(group: FiniteGroup, members: Iterable[int]) -> SubgroupHandle:
    """Wrap a member set as a verified subgroup handle."""
    return SubgroupHandle(group, frozenset(members))


def generated_subgroup(group: FiniteGroup, generators: Iterable[int]) -> SubgroupHandle:
    """Smallest subgroup containing the generators (closure by products)."""
    members = {group.identity}
    frontier = [group.identity]
    gens = set(generators) | {group.inverse(g) for g in generators}
    for g in gens:
        if not 0 <= g < group.order:
            raise DomainError(f"generator {g} outside group of order {group.order}")
    while frontier:
        a = frontier.pop()
        for g in gens:
            b = group.op(a, g)
            if b not in members:
                members.add(b)
                frontier.append(b)
    return SubgroupHandle(group, frozenset(members))


def intersection(h1: SubgroupHandle, h2: SubgroupHandle) -> SubgroupHandle:
    """Intersection of two subgroups of the same parent."""
    if h1.parent is not h2.parent:
        raise PreconditionError("subgroups have different parent groups")
    return SubgroupHandle(h1.parent, h1.members & h2.members)


def subgroup_product(group: FiniteGroup, parts: Sequence[SubgroupHandle]) -> SubgroupHandle:
    """Internal product of subgroups of an abelian parent.

    For abelian groups the set of products is itself a subgroup; the result is
    still verified by the handle constructor.
    """
    if not group.is_abelian:
        raise PreconditionError("subgroup products are only taken in abelian groups")
    members = {group.identity}
    for h in parts:
        if h.parent is not group:
            raise PreconditionError("subgroup has a different parent group")
        members = {group.op(a, m) for a in members for m in h.members}
    return SubgroupHandle(group, frozenset(members))


def cosets(group: FiniteGroup, sub: SubgroupHandle) -> list[list[int]]:
    """Left cosets of the subgroup, ordered by smallest representative."""
    if sub.parent is not group and not is_subgroup(group, sub.members):
        raise PreconditionError("handle is not a subgroup of this group")
    seen = set()
    out = []
    for g in group.elements():
        if g in seen:
            continue
        c = sorted(group.op(g, h) for h in sub.members)
        seen.update(c)
        out.append(c)
    return out


def _as_total_map(f, size: int) -> list[int]:
    """Normalize a map given as a sequence or mapping into a dense list."""
    if isinstance(f, Mapping):
        vals = []
        for a in range(size):
            if a not in f:
                raise DomainError(f"map is missing element {a}")
            vals.append(f[a])
        return vals
    vals = list(f)
    if len(vals) != size:
        raise DomainError(f"map covers {len(vals)} elements, expected {size}")
    return vals


def is_homomorphism(f, dom: FiniteGroup, cod: FiniteGroup) -> bool:
    """Exhaustively check f(a op b) == f(a) op f(b) over the domain."""
    vals = _as_total_map(f, dom.order)
    for v in vals:
        if not 0 <= v < cod.order:
            raise DomainError(f"map value {v} outside codomain of order {cod.order}")
    for a in dom.elements():
        for b in dom.elements():
            if vals[dom.op(a, b)] != cod.op(vals[a], vals[b]):
                return False
    return True


def kernel(f, dom: FiniteGroup, cod: FiniteGroup) -> SubgroupHandle:
    """Kernel of a verified homomorphism."""
    if not is_homomorphism(f, dom, cod):
        raise PreconditionError("map is not a homomorphism")
    vals = _as_total_map(f, dom.order)
    return SubgroupHandle(
        dom, frozenset(a for a in dom.elements() if vals[a] == cod.identity)
    )


def fibers(f, dom: FiniteGroup) -> dict[int, list[int]]:
    """Preimage classes of a total map on the group, keyed by value."""
    vals = _as_total_map(f, dom.order)
    out: dict[int, list[int]] = {}
    for a in dom.elements():
        out.setdefault(vals[a], []).append(a)
    return out
