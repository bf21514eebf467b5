"""Shared generators for the randomized suites.

Instances are small layered acyclic graphs; codes are random tables, usually
paired with best-effort decoders so that low-error codes occur often enough to
drive the removal routes.  Everything is seeded explicitly by the caller.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter

from edgedrop.codes import NetworkCode, evaluate_global
from edgedrop.network import Edge, NetworkInstance, Source, validate_instance
from edgedrop.removal import SourcePartition

MAX_TUPLES = 512


def random_instance(rng: random.Random) -> NetworkInstance:
    """A valid instance with at most 3 sources, alphabets <= 8, <= 10 edges."""
    k = rng.randint(1, 3)
    sizes = [rng.choice((2, 2, 2, 3, 3, 4, 4, 5, 6, 8)) for _ in range(k)]
    while math.prod(sizes) > MAX_TUPLES:
        sizes[sizes.index(max(sizes))] = 2
    n_mid = rng.randint(0, 2)
    n_term = rng.randint(1, 2)
    source_nodes = [f"s{i + 1}" for i in range(k)]
    mids = [f"m{i + 1}" for i in range(n_mid)]
    terminals = [f"t{i + 1}" for i in range(n_term)]
    edges: list[Edge] = []
    counter = itertools.count(1)

    def add_edge(tail: str, head: str) -> None:
        edges.append(Edge(f"e{next(counter)}", tail, head, rng.randint(2, 8)))

    for s in source_nodes:
        for _ in range(rng.randint(1, 2)):
            if len(edges) >= 8:
                break
            add_edge(s, rng.choice(mids + terminals))
    for pos, m in enumerate(mids):
        if not any(e.head == m for e in edges):
            continue
        for _ in range(rng.randint(1, 2)):
            if len(edges) >= 8:
                break
            add_edge(m, rng.choice(mids[pos + 1:] + terminals))
    for t in terminals:
        if not any(e.head == t for e in edges):
            fed_mids = [m for m in mids if any(e.head == m for e in edges)]
            add_edge(rng.choice(source_nodes + fed_mids), t)
    demands = [[0] * n_term for _ in range(k)]
    for j in range(n_term):
        for i in rng.sample(range(k), rng.randint(1, k)):
            demands[i][j] = 1
    inst = NetworkInstance(
        nodes=tuple(source_nodes + mids + terminals),
        edges=tuple(edges),
        sources=tuple(Source(s, sz) for s, sz in zip(source_nodes, sizes)),
        terminals=tuple(terminals),
        demands=tuple(tuple(row) for row in demands),
    )
    assert validate_instance(inst) == []
    return inst


def best_effort_decoders(
    inst: NetworkInstance,
    source_alphabets: tuple[int, ...],
    edge_alphabets: dict[str, int],
    encoders: dict[str, tuple[int, ...]],
    rng: random.Random,
) -> dict[str, tuple[tuple[int, ...], ...]]:
    """Decoder tables voting for the most frequent demanded tuple per input."""
    probe = NetworkCode(1, source_alphabets, edge_alphabets, encoders, {})
    votes: dict[str, dict[tuple[int, ...], Counter]] = {t: {} for t in inst.terminals}
    for x in itertools.product(*[range(s) for s in source_alphabets]):
        row = evaluate_global(inst, probe, x)
        by_id = {e.id: v for e, v in zip(inst.edges, row)}
        for t in inst.terminals:
            key = tuple(by_id[f.id] for f in inst.in_edges(t))
            wanted = tuple(x[i] for i in inst.demanded_sources(t))
            votes[t].setdefault(key, Counter())[wanted] += 1
    decoders = {}
    for t in inst.terminals:
        in_sizes = [edge_alphabets[f.id] for f in inst.in_edges(t)]
        demanded = inst.demanded_sources(t)
        rows = []
        for combo in itertools.product(*[range(s) for s in in_sizes]):
            counter = votes[t].get(combo)
            if counter:
                rows.append(max(sorted(counter), key=lambda v: counter[v]))
            else:
                rows.append(tuple(rng.randrange(source_alphabets[i]) for i in demanded))
        decoders[t] = tuple(rows)
    return decoders


def random_code(rng: random.Random, inst: NetworkInstance) -> NetworkCode:
    sizes = tuple(s.alphabet_size for s in inst.sources)
    edge_alphabets = {e.id: e.alphabet_size for e in inst.edges}
    encoders = {}
    for e in inst.edges:
        if inst.is_source_node(e.tail):
            width = sizes[inst.source_index(e.tail)]
        else:
            width = math.prod(edge_alphabets[f.id] for f in inst.in_edges(e.tail))
        encoders[e.id] = tuple(rng.randrange(e.alphabet_size) for _ in range(width))
    if rng.random() < 0.7:
        decoders = best_effort_decoders(inst, sizes, edge_alphabets, encoders, rng)
    else:
        decoders = {}
        for t in inst.terminals:
            width = math.prod(edge_alphabets[f.id] for f in inst.in_edges(t))
            demanded = inst.demanded_sources(t)
            decoders[t] = tuple(
                tuple(rng.randrange(sizes[i]) for i in demanded) for _ in range(width)
            )
    return NetworkCode(
        blocklength=1,
        source_alphabets=sizes,
        edge_alphabets=edge_alphabets,
        encoders=encoders,
        decoders=decoders,
    )


def random_partition(rng: random.Random, table) -> SourcePartition:
    sizes = table.source_sizes
    kind = rng.randrange(5)
    if kind == 0:
        return SourcePartition.from_edge_values(table, rng.choice(table.inst.edges).id)
    if kind == 1:
        classes = []
        for s in sizes:
            n_cls = rng.randint(1, s)
            classes.append([rng.randrange(n_cls) for _ in range(s)])
        return SourcePartition.from_source_classes(sizes, classes)
    if kind == 2:
        return SourcePartition.singletons(sizes)
    if kind == 3:
        return SourcePartition.whole(sizes)
    n_labels = rng.randint(1, 6)
    return SourcePartition(
        sizes, [rng.randrange(n_labels) for _ in range(math.prod(sizes))]
    )
