"""Codes characterized by a finite group and one subgroup per variable.

For a uniform group element g, the variable attached to subgroup ``G_f``
realizes the left coset ``g G_f``; every joint entropy is then
``log2(|G| / |intersection|)``.  Cosets are relabeled densely (ordered by
smallest representative) whenever such a code is bridged to an explicit
network code.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .codes import GlobalCodeTable, NetworkCode, build_global_table, relay_instance
from .errors import DomainError, InternalCheckError, PreconditionError, ResourceError
from .groups import (
    FiniteGroup,
    SubgroupHandle,
    group_from_description,
    intersection,
    subgroup,
    subgroup_product,
)
from .network import NetworkInstance
from .removal import RemovalResult, SourcePartition, fiber_edge_values, find_witness, restrict_code

GROUP_ORDER_CAP = 1 << 20
ENTROPY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GroupCharacterization:
    """A finite group with named subgroups, one per network variable."""

    group: FiniteGroup
    subgroups: dict[str, SubgroupHandle]

    def __post_init__(self):
        if self.group.order > GROUP_ORDER_CAP:
            raise ResourceError(
                f"group order {self.group.order} is above the cap of {GROUP_ORDER_CAP}"
            )
        for name, h in self.subgroups.items():
            if h.parent is not self.group:
                raise PreconditionError(f"subgroup {name!r} has a different parent group")

    @property
    def is_abelian(self) -> bool:
        return self.group.is_abelian

    def handle(self, key: str) -> SubgroupHandle:
        try:
            return self.subgroups[key]
        except KeyError:
            raise DomainError(f"unknown variable {key!r}") from None

    def intersection_members(self, keys: Sequence[str]) -> frozenset[int]:
        members = frozenset(self.group.elements())
        for k in keys:
            members &= self.handle(k).members
        return members

    @cached_property
    def _realize_maps(self) -> dict[str, tuple[int, ...]]:
        return {}

    def realize_map(self, key: str) -> tuple[int, ...]:
        """Dense coset label for every group element, for one variable."""
        cached = self._realize_maps.get(key)
        if cached is not None:
            return cached
        h = self.handle(key)
        labels = [-1] * self.group.order
        next_label = 0
        for g in self.group.elements():
            if labels[g] != -1:
                continue
            for m in h.members:
                labels[self.group.op(g, m)] = next_label
            next_label += 1
        out = tuple(labels)
        self._realize_maps[key] = out
        return out

    def variable_size(self, key: str) -> int:
        return self.group.order // self.handle(key).order


def induced_entropy(gc: GroupCharacterization, keys: Sequence[str]) -> float:
    """Joint entropy in bits of the variables named by keys."""
    if not keys:
        return 0.0
    return math.log2(gc.group.order / len(gc.intersection_members(keys)))


def coset_joint_entropy(gc: GroupCharacterization, keys: Sequence[str]) -> float:
    """The same entropy from explicit enumeration over group elements."""
    counts = Counter()
    maps = [gc.realize_map(k) for k in keys]
    for g in gc.group.elements():
        counts[tuple(m[g] for m in maps)] += 1
    n = gc.group.order
    return sum(c / n * math.log2(n / c) for c in counts.values())


def normalized_sources(gc: GroupCharacterization, source_keys: Sequence[str]) -> bool:
    """Whether the source subgroups intersect in the identity alone."""
    return gc.intersection_members(source_keys) == frozenset({gc.group.identity})


def independent_sources(gc: GroupCharacterization, source_keys: Sequence[str]) -> bool:
    """Whether the source variables are jointly uniform on their product.

    The joint variable ranges over cosets of the intersection subgroup, so
    its alphabet has order // |intersection| values; independence means that
    count equals the product of the individual alphabet sizes.
    """
    total = 1
    for k in source_keys:
        total *= gc.variable_size(k)
    joint = gc.group.order // len(gc.intersection_members(source_keys))
    return total == joint


def materialize(
    gc: GroupCharacterization, source_keys: Sequence[str], edge_key: str
) -> tuple[NetworkInstance, NetworkCode]:
    """Explicit instance and code realizing the characterized variables.

    Each source feeds a relay that emits the characterized edge message, and
    also feeds the terminal directly so decoding is zero-error; the edge
    message appears on edge ``"e"``.  Requires normalized, independent
    sources so that every combination of source symbols names exactly one
    group element.
    """
    if len(source_keys) > 9:
        raise DomainError("at most nine sources are supported by the naming scheme")
    if not normalized_sources(gc, source_keys):
        raise PreconditionError("source subgroups must intersect in the identity alone")
    if not independent_sources(gc, source_keys):
        raise PreconditionError("source variables must be jointly uniform")
    maps = [gc.realize_map(k) for k in source_keys]
    sizes = [gc.variable_size(k) for k in source_keys]
    combo_to_g: dict[tuple[int, ...], int] = {}
    for g in gc.group.elements():
        combo_to_g[tuple(m[g] for m in maps)] = g
    if len(combo_to_g) != gc.group.order:
        raise InternalCheckError("source labels fail to separate group elements")
    edge_map = gc.realize_map(edge_key)
    edge_size = gc.variable_size(edge_key)
    relay = []
    for combo in itertools.product(*[range(s) for s in sizes]):
        relay.append(edge_map[combo_to_g[combo]])
    return relay_instance(sizes, edge_size, relay)


@dataclass(frozen=True)
class AbelianRemovalPlan:
    """Partition and certificate produced for an abelian characterization.

    ``checks`` records the verified facts: the auxiliary subgroup sits inside
    the edge subgroup, the per-part entropy split matches numerically and as
    an exact integer identity, and the per-source size bound holds in
    cross-multiplied integer form.
    """

    edge_key: str
    source_keys: tuple[str, ...]
    g_prime: SubgroupHandle
    complements: tuple[SubgroupHandle, ...]
    instance: NetworkInstance
    code: NetworkCode
    table: GlobalCodeTable
    partition: SourcePartition
    checks: dict[str, bool]
    removal: RemovalResult


def abelian_removal_plan(
    gc: GroupCharacterization, edge_key: str, source_keys: Sequence[str]
) -> AbelianRemovalPlan:
    """Zero-error removal partition for an abelian group characterization.

    The auxiliary subgroup is the product over sources of the edge subgroup
    intersected with every other source's subgroups; its cosets partition the
    source tuple space, determine the edge message, split into products, and
    pass the witness bounds with eps = 0.
    """
    if not gc.is_abelian:
        raise PreconditionError("this removal route requires an abelian group")
    if not normalized_sources(gc, source_keys):
        raise PreconditionError("source subgroups must intersect in the identity alone")
    if not independent_sources(gc, source_keys):
        raise PreconditionError("source variables must be jointly uniform")
    group = gc.group
    g_e = gc.handle(edge_key)
    complements = []
    for i in range(len(source_keys)):
        others = [gc.handle(k) for j, k in enumerate(source_keys) if j != i]
        members = frozenset(group.elements())
        for h in others:
            members &= h.members
        complements.append(intersection(g_e, subgroup(group, members)))
    g_prime = subgroup_product(group, complements)

    k = len(source_keys)
    inter_with_sources = [
        len(g_prime.members & gc.handle(key).members) for key in source_keys
    ]
    checks = {
        "edge_determined": g_prime.members <= g_e.members,
        "product_split_exact": g_prime.order ** (k - 1) == math.prod(inter_with_sources),
        "product_split_numeric": abs(
            math.log2(g_prime.order)
            - sum(math.log2(g_prime.order / m) for m in inter_with_sources)
        )
        <= ENTROPY_TOLERANCE,
        "size_bound": all(
            g_prime.order * gc.handle(key).order >= g_e.order * m
            for key, m in zip(source_keys, inter_with_sources)
        ),
    }
    if not all(checks.values()):
        raise InternalCheckError(f"auxiliary subgroup failed verification: {checks}")

    inst, code = materialize(gc, source_keys, edge_key)
    table = build_global_table(inst, code)
    maps = [gc.realize_map(key) for key in source_keys]
    combo_to_g = {}
    for g in group.elements():
        combo_to_g[tuple(m[g] for m in maps)] = g
    prime_label = gc_realize_subgroup(group, g_prime)
    labels = []
    for combo in itertools.product(*[range(s) for s in table.source_sizes]):
        labels.append(prime_label[combo_to_g[combo]])
    part = SourcePartition(table.source_sizes, labels)

    if fiber_edge_values(table, "e", part) is None:
        raise InternalCheckError("coset partition fails to determine the edge message")
    witness = find_witness(table, "e", part, Fraction(0))
    if witness is None:
        raise InternalCheckError("coset partition has no witness part at eps = 0")
    removal = restrict_code(inst, code, table, "e", part, witness, Fraction(0))
    return AbelianRemovalPlan(
        edge_key=edge_key,
        source_keys=tuple(source_keys),
        g_prime=g_prime,
        complements=tuple(complements),
        instance=inst,
        code=code,
        table=table,
        partition=part,
        checks=checks,
        removal=removal,
    )


def gc_realize_subgroup(group: FiniteGroup, sub: SubgroupHandle) -> tuple[int, ...]:
    """Dense left-coset label of every element for an ad hoc subgroup."""
    labels = [-1] * group.order
    next_label = 0
    for g in group.elements():
        if labels[g] != -1:
            continue
        for m in sub.members:
            labels[group.op(g, m)] = next_label
        next_label += 1
    return tuple(labels)


@dataclass(frozen=True)
class TerminalDecision:
    """Dichotomy outcome for one terminal's demand.

    Either a zero-error decoder exists (the incoming coset refines the
    demanded coset) or every decoder errs on at least ``1 - 1/q`` of the
    elements, with q at least 2.
    """

    in_key: str
    source_key: str
    kind: str  # "zero_error" or "high_error"
    decoder: dict[int, int] | None
    q: int | None
    min_error: Fraction | None

    def to_dict(self) -> dict:
        return {
            "in_key": self.in_key,
            "source_key": self.source_key,
            "kind": self.kind,
            "decoder": {str(k): v for k, v in sorted(self.decoder.items())}
            if self.decoder is not None
            else None,
            "q": self.q,
            "min_error": str(self.min_error) if self.min_error is not None else None,
        }


def best_decoder_error(
    gc: GroupCharacterization, in_key: str, source_key: str
) -> Fraction:
    """Error of the best decoder from the incoming coset to the demanded one.

    The best decoder picks, per incoming coset, the demanded coset with the
    largest overlap.
    """
    in_map = gc.realize_map(in_key)
    src_map = gc.realize_map(source_key)
    overlap: dict[int, Counter] = {}
    for g in gc.group.elements():
        overlap.setdefault(in_map[g], Counter())[src_map[g]] += 1
    correct = sum(max(c.values()) for c in overlap.values())
    return 1 - Fraction(correct, gc.group.order)


def zero_error_upgrade(
    gc: GroupCharacterization, demands: Sequence[tuple[str, str]]
) -> list[TerminalDecision]:
    """Per-terminal dichotomy between exact decoding and constant error.

    ``demands`` pairs the variable observed by a terminal with the source it
    must reproduce.  When the observed subgroup is contained in the source
    subgroup, the emitted decoder is verified to never err.  Otherwise the
    observed coset meets exactly q demanded cosets, each equally often, so no
    decoder can beat a correct fraction of 1/q; this conditional uniformity
    is verified by enumeration.
    """
    out = []
    for in_key, source_key in demands:
        g_in = gc.handle(in_key)
        g_src = gc.handle(source_key)
        in_map = gc.realize_map(in_key)
        src_map = gc.realize_map(source_key)
        if g_in.members <= g_src.members:
            decoder: dict[int, int] = {}
            for g in gc.group.elements():
                prior = decoder.get(in_map[g])
                if prior is None:
                    decoder[in_map[g]] = src_map[g]
                elif prior != src_map[g]:
                    raise InternalCheckError(
                        "contained coset maps to two demanded cosets"
                    )
            for g in gc.group.elements():
                if decoder[in_map[g]] != src_map[g]:
                    raise InternalCheckError("zero-error decoder failed verification")
            out.append(
                TerminalDecision(in_key, source_key, "zero_error", decoder, None, None)
            )
            continue
        meet = len(g_in.members & g_src.members)
        q = g_in.order // meet
        overlap: dict[int, Counter] = {}
        for g in gc.group.elements():
            overlap.setdefault(in_map[g], Counter())[src_map[g]] += 1
        for counts in overlap.values():
            if len(counts) != q or set(counts.values()) != {meet}:
                raise InternalCheckError(
                    "incoming coset is not uniform over demanded cosets"
                )
        min_error = 1 - Fraction(1, q)
        if q < 2 or min_error < Fraction(1, 2):
            raise InternalCheckError("non-contained subgroup produced q < 2")
        if best_decoder_error(gc, in_key, source_key) != min_error:
            raise InternalCheckError("best decoder error disagrees with 1 - 1/q")
        out.append(
            TerminalDecision(in_key, source_key, "high_error", None, q, min_error)
        )
    return out


def characterization_to_dict(gc: GroupCharacterization) -> dict:
    return {
        "group": gc.group.describe(),
        "subgroups": {
            name: list(h.sorted_members) for name, h in sorted(gc.subgroups.items())
        },
    }


def parse_characterization(data: Mapping) -> GroupCharacterization:
    try:
        group = group_from_description(data["group"])
        subs = {
            str(name): subgroup(group, members)
            for name, members in data["subgroups"].items()
        }
    except (KeyError, TypeError, AttributeError) as exc:
        raise DomainError(f"malformed characterization data: {exc}") from None
    return GroupCharacterization(group, subs)


def load_characterization(path: str) -> GroupCharacterization:
    with open(path, encoding="utf-8") as fh:
        return parse_characterization(json.load(fh))
