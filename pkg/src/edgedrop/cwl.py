"""Coordinate-wise linear structure on global encoding functions.

A global encoding function is coordinate-wise linear (CWL) when, after fixing
a group structure on each source alphabet, it is a homomorphism from their
direct product onto a group structure carried by its own image.  Such
structure certifies edge removal directly: grouping each source's symbols by
their single-coordinate image yields a partition whose parts are products,
determine the edge message, and are all the same size, so averaging always
produces a usable witness part.

A piecewise variant covers functions that agree with a (possibly different)
CWL function on each part of a product-set partition of the domain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .codes import (
    GlobalCodeTable,
    NetworkCode,
    build_global_table,
    encoder_input_sizes,
    index_to_values,
    joint_entropy,
    mixed_radix_index,
    relay_instance,
)
from .errors import DomainError, InternalCheckError, PreconditionError, ResourceError
from .groupcodes import GroupCharacterization
from .groups import CyclicGroup, FiniteGroup, ProductGroup, TableGroup, direct_product, subgroup
from .network import NetworkInstance
from .removal import (
    RemovalResult,
    SourcePartition,
    _restrict_to_part,
    fiber_edge_values,
    fibers_are_products,
    restrict_code,
)

ENTROPY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CwlWitness:
    """A verified homomorphism witnessing coordinate-wise linearity.

    ``edge_support[k]`` is the edge symbol carried by edge group element k,
    and ``hom`` maps each dense source tuple index to an edge group element.
    """

    source_groups: tuple[FiniteGroup, ...]
    edge_group: FiniteGroup
    edge_support: tuple[int, ...]
    hom: tuple[int, ...]

    @property
    def source_sizes(self) -> tuple[int, ...]:
        return tuple(g.order for g in self.source_groups)

    def phi_table(self) -> tuple[int, ...]:
        """The encoding function as edge symbols over dense tuple indices."""
        return tuple(self.edge_support[k] for k in self.hom)


def _normalize_phi(phi, sizes: Sequence[int]) -> list[int]:
    total = math.prod(sizes)
    if isinstance(phi, Mapping):
        out = []
        for combo in itertools.product(*[range(s) for s in sizes]):
            if combo not in phi:
                raise DomainError(f"encoding function is missing tuple {combo}")
            out.append(phi[combo])
        return out
    out = list(phi)
    if len(out) != total:
        raise DomainError(f"encoding function covers {len(out)} tuples, expected {total}")
    return out


def _vector_op(group: FiniteGroup, a: int, bvec: np.ndarray) -> np.ndarray:
    """Vectorized ``group.op(a, b)`` over an array of right operands."""
    if isinstance(group, CyclicGroup):
        return (a + bvec) % group.order
    if isinstance(group, TableGroup):
        return group._table[a, bvec]
    if isinstance(group, ProductGroup):
        out = np.zeros_like(bvec)
        rem = bvec
        digits = []
        for g in reversed(group.factors):
            digits.append(rem % g.order)
            rem = rem // g.order
        digits.reverse()
        ta = group.decode(a)
        for g, da, db in zip(group.factors, ta, digits):
            out = out * g.order + _vector_op(g, da, db)
        return out
    return np.array([group.op(a, int(b)) for b in bvec], dtype=np.int64)


def _digit_arrays(sizes: Sequence[int], total: int) -> list[np.ndarray]:
    ids = np.arange(total, dtype=np.int64)
    out = []
    stride = total
    for s in sizes:
        stride //= s
        out.append((ids // stride) % s)
    return out


def _op_table(group: FiniteGroup) -> np.ndarray:
    if isinstance(group, TableGroup):
        return group._table
    return np.array(
        [[group.op(a, b) for b in group.elements()] for a in group.elements()],
        dtype=np.int64,
    )


def check_cwl(
    phi,
    source_groups: Sequence[FiniteGroup],
    edge_group: FiniteGroup,
    edge_support: Sequence[int],
) -> CwlWitness | None:
    """Verify the homomorphism law exhaustively over all pairs of tuples.

    ``phi`` maps source tuples to edge symbols, as a dense sequence or a
    mapping keyed by tuples.  The support must list one edge symbol per edge
    group element; a witness exists only if the image of phi is exactly that
    symbol set and the law holds everywhere.
    """
    if not source_groups:
        raise DomainError("at least one source group is required")
    sizes = [g.order for g in source_groups]
    values = _normalize_phi(phi, sizes)
    support = tuple(edge_support)
    if len(support) != edge_group.order:
        raise DomainError(
            f"support lists {len(support)} symbols for a group of order {edge_group.order}"
        )
    if len(set(support)) != len(support):
        raise DomainError("support symbols must be distinct")
    if set(values) != set(support):
        return None
    sym_to_elem = {s: k for k, s in enumerate(support)}
    phi_k = np.array([sym_to_elem[v] for v in values], dtype=np.int64)
    edge_table = _op_table(edge_group)
    total = len(values)
    digits = _digit_arrays(sizes, total)
    for a in range(total):
        a_digits = index_to_values(a, sizes)
        prod_ids = np.zeros(total, dtype=np.int64)
        for g, da, dvec in zip(source_groups, a_digits, digits):
            prod_ids = prod_ids * g.order + _vector_op(g, da, dvec)
        if not np.array_equal(phi_k[prod_ids], edge_table[phi_k[a], phi_k]):
            return None
    return CwlWitness(
        source_groups=tuple(source_groups),
        edge_group=edge_group,
        edge_support=support,
        hom=tuple(int(k) for k in phi_k),
    )


def derive_edge_group(
    phi, source_groups: Sequence[FiniteGroup]
) -> tuple[TableGroup, tuple[int, ...]] | None:
    """Induce the image group structure from the source groups, if one exists.

    The image carries a group operation compatible with phi exactly when
    equal images stay equal under multiplication by any common element; the
    induced operation is then the quotient structure and is unique.  Returns
    the verified table group on the sorted image together with that image.
    """
    sizes = [g.order for g in source_groups]
    values = _normalize_phi(phi, sizes)
    support = tuple(sorted(set(values)))
    sym_to_elem = {s: k for k, s in enumerate(support)}
    phi_k = np.array([sym_to_elem[v] for v in values], dtype=np.int64)
    n_sup = len(support)
    tbl = np.full((n_sup, n_sup), -1, dtype=np.int64)
    total = len(values)
    digits = _digit_arrays(sizes, total)
    for a in range(total):
        a_digits = index_to_values(a, sizes)
        prod_ids = np.zeros(total, dtype=np.int64)
        for g, da, dvec in zip(source_groups, a_digits, digits):
            prod_ids = prod_ids * g.order + _vector_op(g, da, dvec)
        want = phi_k[prod_ids]
        ka = int(phi_k[a])
        for s in range(n_sup):
            vals = np.unique(want[phi_k == s])
            if vals.size != 1:
                return None
            v = int(vals[0])
            if tbl[ka, s] == -1:
                tbl[ka, s] = v
            elif tbl[ka, s] != v:
                return None
    return TableGroup(tbl.tolist()), support


def coordinate_classes(w: CwlWitness) -> list[list[tuple[int, ...]]]:
    """Per source, the symbol classes sharing a single-coordinate image.

    The image of symbol v of source i is the witness value at the tuple that
    is v at coordinate i and the group identity elsewhere.  Classes are
    ordered by first occurrence, members ascending.
    """
    sizes = w.source_sizes
    out = []
    for i, g in enumerate(w.source_groups):
        base = [h.identity for h in w.source_groups]
        classes: dict[int, list[int]] = {}
        order: list[int] = []
        for v in range(g.order):
            base[i] = v
            image = w.hom[mixed_radix_index(base, sizes)]
            if image not in classes:
                classes[image] = []
                order.append(image)
            classes[image].append(v)
        out.append([sorted(classes[img]) for img in order])
    return out


def classes_equal_sized(classes: Sequence[Sequence[Sequence[int]]]) -> bool:
    """Whether, for each source, all coordinate classes have the same size."""
    return all(len({len(c) for c in per_source}) == 1 for per_source in classes)


def witness_partition(w: CwlWitness) -> SourcePartition:
    """Product partition labeling each tuple by its per-source class ids."""
    classes = coordinate_classes(w)
    assignments = []
    for size, per_source in zip(w.source_sizes, classes):
        a = [0] * size
        for cid, members in enumerate(per_source):
            for v in members:
                a[v] = cid
        assignments.append(a)
    return SourcePartition.from_source_classes(w.source_sizes, assignments)


def _witness_matches_column(w: CwlWitness, table: GlobalCodeTable, edge_id: str) -> bool:
    return (
        w.source_sizes == table.source_sizes
        and w.phi_table() == table.edge_column(edge_id)
    )


def cwl_remove(
    inst: NetworkInstance,
    code: NetworkCode,
    table: GlobalCodeTable,
    edge_id: str,
    w: CwlWitness,
) -> RemovalResult:
    """Remove a CWL edge through its coordinate class partition.

    The witness part is the one with the best good fraction (ties to the
    lexicographically smallest label); averaging over the equal-sized parts
    guarantees it meets the code's own error fraction, and the class sizes
    guarantee ``|kept| * |edge support| >= |alphabet|`` per source.
    """
    if not _witness_matches_column(w, table, edge_id):
        raise PreconditionError("witness does not match the edge's encoding function")
    part = witness_partition(w)
    if fiber_edge_values(table, edge_id, part) is None:
        raise InternalCheckError("class partition fails to determine the edge message")
    part_sizes = {len(ids) for ids in part.parts.values()}
    if len(part_sizes) != 1:
        raise InternalCheckError("class partition parts are not equal-sized")
    labels = part.sorted_labels()
    best = max(labels, key=lambda y: sum(1 for i in part.parts[y] if table.good[i]))
    eps = table.error
    good = sum(1 for i in part.parts[best] if table.good[i])
    part_size = len(part.parts[best])
    # Averaging: good fraction of the best part is at least 1 - eps.
    if good * eps.denominator < (eps.denominator - eps.numerator) * part_size:
        raise InternalCheckError("best part misses the averaging guarantee")
    if eps != 0 and good * eps.denominator == (eps.denominator - eps.numerator) * part_size:
        # Bad tuples spread perfectly evenly leave no class strictly better
        # than the global error, so no restriction can beat the target.
        raise PreconditionError(
            "every class matches the global error exactly; removal cannot improve on it"
        )
    support_size = len(w.edge_support)
    for proj, size in zip(part.projections(best), table.source_sizes):
        if len(proj) * support_size < size:
            raise InternalCheckError("kept symbols fall below the support bound")
    return restrict_code(inst, code, table, edge_id, part, best, eps)


@dataclass(frozen=True)
class CwlPiece:
    """One declared piece: per-source symbol sets and the matching function."""

    subsets: tuple[tuple[int, ...], ...]
    phi: tuple[int, ...]
    witness: CwlWitness


@dataclass(frozen=True)
class PiecewiseCwl:
    """A function that agrees with a CWL function exactly on each piece.

    All pieces share the source groups and the edge symbol set; each piece's
    own group operation on its image may differ (the shared set only bounds
    the rate arithmetic).
    """

    source_groups: tuple[FiniteGroup, ...]
    edge_support: tuple[int, ...]
    pieces: tuple[CwlPiece, ...]


def check_piecewise(
    phi,
    source_groups: Sequence[FiniteGroup],
    edge_support: Sequence[int],
    pieces: Sequence[tuple[Sequence[Sequence[int]], object]],
) -> PiecewiseCwl | None:
    """Validate a declared piecewise-CWL structure for phi.

    Each piece declares per-source symbol subsets (their product is the
    piece) and a candidate function.  Structural defects (subsets out of
    range, pieces that overlap or fail to cover) raise DomainError naming
    offending tuples; semantic failures (a piece that is not CWL over the
    shared groups, symbols outside the shared support, or agreement that is
    not exact) return None.
    """
    sizes = [g.order for g in source_groups]
    values = _normalize_phi(phi, sizes)
    total = len(values)
    if not pieces:
        raise DomainError("at least one piece is required")
    member_sets = []
    cleaned = []
    for subsets, piece_phi in pieces:
        if len(subsets) != len(sizes):
            raise DomainError("each piece needs one subset per source")
        subs = []
        for size, sub in zip(sizes, subsets):
            ss = tuple(sorted(set(sub)))
            if not ss:
                raise DomainError("piece subsets must be non-empty")
            if any(not 0 <= v < size for v in ss):
                raise DomainError("piece subset symbol outside its source alphabet")
            subs.append(ss)
        members = {
            mixed_radix_index(x, sizes) for x in itertools.product(*subs)
        }
        member_sets.append(members)
        cleaned.append((tuple(subs), _normalize_phi(piece_phi, sizes)))
    counts = [0] * total
    for members in member_sets:
        for idx in members:
            counts[idx] += 1
    offending = [index_to_values(i, sizes) for i, c in enumerate(counts) if c != 1]
    if offending:
        raise DomainError(
            f"pieces must partition the tuple space; offending tuples: {offending[:5]}"
        )
    support_set = set(edge_support)
    out_pieces = []
    for (subs, piece_values), members in zip(cleaned, member_sets):
        derived = derive_edge_group(piece_values, source_groups)
        if derived is None:
            return None
        piece_group, piece_support = derived
        if not set(piece_support) <= support_set:
            return None
        witness = check_cwl(piece_values, source_groups, piece_group, piece_support)
        if witness is None:
            raise InternalCheckError("derived piece structure failed re-verification")
        for idx in range(total):
            agrees = values[idx] == piece_values[idx]
            if agrees != (idx in members):
                return None
        out_pieces.append(CwlPiece(subs, tuple(piece_values), witness))
    return PiecewiseCwl(
        source_groups=tuple(source_groups),
        edge_support=tuple(edge_support),
        pieces=tuple(out_pieces),
    )


def piecewise_remove(
    inst: NetworkInstance,
    code: NetworkCode,
    table: GlobalCodeTable,
    edge_id: str,
    pw: PiecewiseCwl,
) -> RemovalResult:
    """Zero-error removal through a piecewise-CWL edge function.

    Picks the largest piece (at least a 1/K fraction of the tuple space,
    ties to the smallest piece index), then per source the class of that
    piece's function holding the most piece symbols (ties to the smallest
    class index).  The kept symbols per source number at least
    ``|alphabet| / (|support| * K)``, checked in integer form, and the
    restricted code is re-verified at zero error.
    """
    if table.error != 0:
        raise PreconditionError(
            "piecewise removal requires an exhaustively zero-error code"
        )
    sizes = table.source_sizes
    if tuple(g.order for g in pw.source_groups) != sizes:
        raise PreconditionError("piecewise structure does not match the source space")
    column = table.edge_column(edge_id)
    member_sets = [
        {mixed_radix_index(x, sizes) for x in itertools.product(*p.subsets)}
        for p in pw.pieces
    ]
    for members, piece in zip(member_sets, pw.pieces):
        for idx in members:
            if column[idx] != piece.phi[idx]:
                raise PreconditionError(
                    "piecewise structure does not match the edge's encoding function"
                )
    k_count = len(pw.pieces)
    piece_sizes = [math.prod(len(s) for s in p.subsets) for p in pw.pieces]
    best_piece = max(range(k_count), key=lambda k: (piece_sizes[k], -k))
    if piece_sizes[best_piece] * k_count < table.num_tuples:
        raise InternalCheckError("largest piece beats averaging; enumeration bug")
    piece = pw.pieces[best_piece]

    kept = []
    support_size = len(pw.edge_support)
    for i, g in enumerate(pw.source_groups):
        base = [h.identity for h in pw.source_groups]
        classes: dict[int, list[int]] = {}
        order: list[int] = []
        for v in range(g.order):
            base[i] = v
            image = piece.witness.hom[mixed_radix_index(base, sizes)]
            if image not in classes:
                classes[image] = []
                order.append(image)
            classes[image].append(v)
        good = set(piece.subsets[i])
        best_class = max(
            range(len(order)),
            key=lambda c: (len(set(classes[order[c]]) & good), -c),
        )
        members = sorted(set(classes[order[best_class]]) & good)
        # Averaging within the piece: the best class holds at least
        # |subset| / #classes piece symbols.
        if len(members) * len(order) < len(piece.subsets[i]):
            raise InternalCheckError("best class misses the per-source averaging bound")
        if len(members) * support_size * k_count < g.order:
            raise InternalCheckError("kept symbols fall below the piecewise bound")
        kept.append(members)

    indices = [
        mixed_radix_index(x, sizes) for x in itertools.product(*kept)
    ]
    if len({column[i] for i in indices}) != 1:
        raise InternalCheckError("edge message is not constant on the kept product")
    promised = [
        -(-g.order // (support_size * k_count)) for g in pw.source_groups
    ]
    label = (best_piece,) + tuple(min(m) for m in kept)
    return _restrict_to_part(
        inst, code, table, edge_id, indices, Fraction(0), promised, label,
    )


@dataclass(frozen=True)
class BalancedRelabeling:
    """Relabeling that turns a balanced map into a projection homomorphism.

    Domain element a gets the pair label (position within its fiber, fiber
    index); the map then reads off the second coordinate.
    """

    domain_labels: dict
    codomain_labels: dict
    fiber_size: int
    codomain_size: int
    witness: CwlWitness


def relabel_balanced(g: Mapping, codomain: Sequence | None = None) -> BalancedRelabeling:
    """Exhibit a balanced map as CWL after relabeling both sides.

    ``g`` must hit every declared codomain value equally often; otherwise a
    PreconditionError names an offending fiber.  The witness is the second
    projection from the product of two cyclic groups.
    """
    if not g:
        raise DomainError("the map must have a non-empty domain")
    domain = sorted(g)
    cod = sorted(set(codomain)) if codomain is not None else sorted(set(g.values()))
    extra = set(g.values()) - set(cod)
    if extra:
        raise DomainError(f"map values outside the declared codomain: {sorted(extra)}")
    q = len(cod)
    if len(domain) % q != 0:
        raise PreconditionError(
            f"codomain size {q} does not divide domain size {len(domain)}"
        )
    k = len(domain) // q
    fibers = {b: [a for a in domain if g[a] == b] for b in cod}
    for b, fiber in fibers.items():
        if len(fiber) != k:
            raise PreconditionError(
                f"fiber of {b!r} has {len(fiber)} elements, expected {k}"
            )
    domain_labels = {}
    for j, b in enumerate(cod):
        for i, a in enumerate(fibers[b]):
            domain_labels[a] = (i, j)
    codomain_labels = {b: j for j, b in enumerate(cod)}
    phi = [0] * (k * q)
    for i in range(k):
        for j in range(q):
            phi[i * q + j] = j
    witness = check_cwl(
        phi, [CyclicGroup(k), CyclicGroup(q)], CyclicGroup(q), tuple(range(q))
    )
    if witness is None:
        raise InternalCheckError("projection failed its own CWL check")
    for a in domain:
        i, j = domain_labels[a]
        if codomain_labels[g[a]] != witness.phi_table()[i * q + j]:
            raise InternalCheckError("relabeled map disagrees with the projection")
    return BalancedRelabeling(
        domain_labels=domain_labels,
        codomain_labels=codomain_labels,
        fiber_size=k,
        codomain_size=q,
        witness=witness,
    )


def characterize_witness(w: CwlWitness) -> GroupCharacterization:
    """Group characterization induced by a CWL witness, verified numerically.

    The carrier is the product of the source groups; source i's subgroup
    pins coordinate i to its identity, and the edge subgroup is the kernel
    of the witness homomorphism.  Every subset entropy of the realized
    variables is checked against ``log2(|G| / |intersection|)`` within
    1e-9 bits, with the variables materialized through an explicit relay
    network.
    """
    product = direct_product(w.source_groups)
    sizes = w.source_sizes
    total = product.order
    subgroups = {}
    for i, g in enumerate(w.source_groups):
        members = []
        for idx in range(total):
            if index_to_values(idx, sizes)[i] == g.identity:
                members.append(idx)
        subgroups[f"s{i + 1}"] = subgroup(product, members)
    kernel_members = [idx for idx in range(total) if w.hom[idx] == w.edge_group.identity]
    subgroups["e"] = subgroup(product, kernel_members)
    gc = GroupCharacterization(product, subgroups)

    edge_size = max(w.edge_support) + 1
    inst, code = relay_instance(sizes, edge_size, w.phi_table())
    table = build_global_table(inst, code)
    keys = [f"s{i + 1}" for i in range(len(sizes))] + ["e"]
    for r in range(len(keys) + 1):
        for alpha in itertools.combinations(keys, r):
            inter = gc.intersection_members(alpha)
            formula = math.log2(total / len(inter))
            sources = [int(k[1:]) - 1 for k in alpha if k != "e"]
            edges = ["e"] if "e" in alpha else []
            measured = joint_entropy(table, sources=sources, edges=edges)
            if abs(measured - formula) > ENTROPY_TOLERANCE:
                raise InternalCheckError(
                    f"entropy of {alpha} is {measured}, formula gives {formula}"
                )
    return gc


@dataclass(frozen=True)
class SearchBudget:
    """Caps for the bounded CWL search."""

    max_group_assignments: int = 64
    max_table_rewrites: int = 1
    max_relabels_per_order: int = 0


@dataclass(frozen=True)
class CwlSearchResult:
    code: NetworkCode
    witness: CwlWitness
    rewritten: bool


def _integer_partitions(e: int) -> list[tuple[int, ...]]:
    if e == 0:
        return [()]
    out = []
    def rec(remaining, largest, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(remaining, largest), 0, -1):
            rec(remaining - part, part, prefix + [part])
    rec(e, e, [])
    return out


def _prime_factorization(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def abelian_structures(n: int) -> list[FiniteGroup]:
    """Every abelian group of order n, one per isomorphism type.

    The plain cyclic group comes first; other types are products of cyclic
    prime-power factors in descending order.
    """
    if n < 1:
        raise DomainError(f"group order must be >= 1, got {n}")
    if n == 1:
        return [CyclicGroup(1)]
    per_prime = []
    for p, e in _prime_factorization(n):
        per_prime.append([[p ** part for part in parts] for parts in _integer_partitions(e)])
    combos = []
    for pick in itertools.product(*per_prime):
        factors = sorted((f for group in pick for f in group), reverse=True)
        combos.append(tuple(factors))
    combos.sort(key=lambda fs: (len(fs), fs))
    out: list[FiniteGroup] = []
    for factors in combos:
        if len(factors) == 1:
            out.append(CyclicGroup(factors[0]))
        else:
            out.append(direct_product([CyclicGroup(f) for f in factors]))
    return out


def _relabeled(group: FiniteGroup, perm: Sequence[int]) -> TableGroup:
    inv = [0] * group.order
    for a, pa in enumerate(perm):
        inv[pa] = a
    tbl = [
        [perm[group.op(inv[a], inv[b])] for b in group.elements()]
        for a in group.elements()
    ]
    return TableGroup(tbl)


def _source_candidates(n: int, relabels: int) -> list[FiniteGroup]:
    base = abelian_structures(n)
    if relabels <= 0:
        return base
    out = list(base)
    for g in base:
        taken = 0
        for perm in itertools.permutations(range(n)):
            if perm == tuple(range(n)):
                continue
            out.append(_relabeled(g, perm))
            taken += 1
            if taken >= relabels:
                break
    return out


def _rewrite_full_information(
    inst: NetworkInstance, code: NetworkCode, edge_id: str
) -> NetworkCode | None:
    """Replace the edge message with its encoder's full input, if it fits.

    Consumers recover the original message by composing the old encoder
    table, so every other edge message and every decoding outcome is
    unchanged.
    """
    in_sizes = encoder_input_sizes(inst, code, edge_id)
    total = math.prod(in_sizes)
    edge_size = code.edge_alphabets[edge_id]
    if total > edge_size:
        return None
    old = code.encoders[edge_id]
    head = inst.edge(edge_id).head

    def old_value(w: int) -> int:
        return old[w] if w < total else old[0]

    encoders = dict(code.encoders)
    encoders[edge_id] = tuple(range(total)) + tuple(
        0 for _ in range(edge_size - total)
    )
    for e in inst.out_edges(head):
        ins = inst.in_edges(head)
        sizes = [code.edge_alphabets[f.id] for f in ins]
        pos = [f.id for f in ins].index(edge_id)
        table = code.encoders[e.id]
        entries = []
        for combo in itertools.product(*[range(s) for s in sizes]):
            full = combo[:pos] + (old_value(combo[pos]),) + combo[pos + 1 :]
            entries.append(table[mixed_radix_index(full, sizes)])
        encoders[e.id] = tuple(entries)
    decoders = dict(code.decoders)
    if head in inst.terminals:
        ins = inst.in_edges(head)
        sizes = [code.edge_alphabets[f.id] for f in ins]
        pos = [f.id for f in ins].index(edge_id)
        rows = []
        for combo in itertools.product(*[range(s) for s in sizes]):
            full = combo[:pos] + (old_value(combo[pos]),) + combo[pos + 1 :]
            rows.append(code.decoders[head][mixed_radix_index(full, sizes)])
        decoders[head] = tuple(rows)
    return NetworkCode(
        blocklength=code.blocklength,
        source_alphabets=code.source_alphabets,
        edge_alphabets=dict(code.edge_alphabets),
        encoders=encoders,
        decoders=decoders,
    )


def cwl_search(
    inst: NetworkInstance,
    code: NetworkCode,
    edge_id: str,
    budget: SearchBudget = SearchBudget(),
) -> CwlSearchResult | None:
    """Bounded search for a CWL certificate on one edge.

    First tries to certify the code's own encoding function under candidate
    source group assignments (abelian structures, optionally relabeled); the
    edge group is always induced, never enumerated.  If that fails, rewrites
    the edge to carry strictly more information with exact downstream
    compensation and retries.  Both phases share the assignment budget;
    results are deterministic for a fixed budget.
    """
    table = build_global_table(inst, code)
    assignments_left = budget.max_group_assignments

    def try_code(cand_code: NetworkCode, cand_table: GlobalCodeTable, rewritten: bool):
        nonlocal assignments_left
        phi = cand_table.edge_column(edge_id)
        candidates = [
            _source_candidates(n, budget.max_relabels_per_order)
            for n in cand_table.source_sizes
        ]
        for assignment in itertools.product(*candidates):
            if assignments_left <= 0:
                return None
            assignments_left -= 1
            derived = derive_edge_group(phi, assignment)
            if derived is None:
                continue
            edge_group, support = derived
            witness = check_cwl(phi, assignment, edge_group, support)
            if witness is None:
                raise InternalCheckError("derived structure failed re-verification")
            return CwlSearchResult(cand_code, witness, rewritten)
        return None

    found = try_code(code, table, rewritten=False)
    if found is not None:
        return found
    rewrites_left = budget.max_table_rewrites
    if rewrites_left > 0 and assignments_left > 0:
        rewritten_code = _rewrite_full_information(inst, code, edge_id)
        if rewritten_code is not None:
            table2 = build_global_table(inst, rewritten_code)
            if table2.good != table.good:
                raise InternalCheckError("rewrite changed decoding outcomes")
            found = try_code(rewritten_code, table2, rewritten=True)
            if found is not None:
                return found
    return None
