"""Hand-checked algebra oracles plus seeded structural property sweeps."""

import random

import pytest

from edgedrop.errors import DomainError, PreconditionError
from edgedrop.groups import (
    CyclicGroup,
    ProductGroup,
    TableGroup,
    cosets,
    direct_product,
    fibers,
    generated_subgroup,
    group_from_description,
    intersection,
    is_homomorphism,
    is_subgroup,
    kernel,
    make_cyclic,
    subgroup,
    subgroup_product,
)


def test_cyclic_arithmetic():
    g = make_cyclic(12)
    assert g.order == 12
    assert g.identity == 0
    assert g.op(7, 8) == 3
    assert g.inverse(5) == 7
    assert g.inverse(0) == 0
    assert g.is_abelian


def test_cyclic_rejects_nonpositive_order():
    with pytest.raises(DomainError):
        make_cyclic(0)


def test_product_group_encoding():
    g = direct_product([make_cyclic(2), make_cyclic(3)])
    assert g.order == 6
    assert g.encode((1, 2)) == 5
    assert g.decode(5) == (1, 2)
    # (1, 2) + (1, 2) = (0, 1) componentwise.
    assert g.op(5, 5) == g.encode((0, 1))
    assert g.inverse(g.encode((1, 1))) == g.encode((1, 2))
    assert g.identity == 0


def test_table_group_roundtrip_of_cyclic():
    n = 5
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    g = TableGroup(table)
    assert g.order == n
    assert g.identity == 0
    assert g.op(3, 4) == 2
    assert g.inverse(2) == 3


def test_table_group_relabeled_identity():
    # Z_2 with the identity sitting at position 1 is still a group.
    g = TableGroup([[1, 0], [0, 1]])
    assert g.identity == 1
    assert g.op(0, 0) == 1


def test_table_group_rejects_defects():
    with pytest.raises(DomainError):
        TableGroup([[0, 1], [1, 1]])  # element 1 has no inverse
    with pytest.raises(DomainError):
        TableGroup([[0, 0], [0, 0]])  # no two-sided identity
    # A loop of order 5: identity and inverses exist but associativity fails.
    loop5 = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(DomainError):
        TableGroup(loop5)


def test_table_group_order_cap():
    n = 600
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    with pytest.raises(DomainError):
        TableGroup(table)


def test_subgroup_handles():
    g = make_cyclic(6)
    h = subgroup(g, [0, 3])
    assert sorted(h.members) == [0, 3]
    assert is_subgroup(g, [0, 3])
    assert not is_subgroup(g, [0, 2])  # 2 + 2 = 4 falls outside
    assert cosets(g, h) == [[0, 3], [1, 4], [2, 5]]


def test_subgroup_rejects_nonclosed():
    g = make_cyclic(6)
    with pytest.raises(PreconditionError):
        subgroup(g, [0, 2])


def test_generated_subgroup():
    g = make_cyclic(12)
    h = generated_subgroup(g, [8])
    assert sorted(h.members) == [0, 4, 8]


def test_intersection_and_product():
    g = make_cyclic(12)
    evens = subgroup(g, [0, 2, 4, 6, 8, 10])
    threes = subgroup(g, [0, 3, 6, 9])
    both = intersection(evens, threes)
    assert sorted(both.members) == [0, 6]
    g6 = make_cyclic(6)
    h1 = subgroup(g6, [0, 3])
    h2 = subgroup(g6, [0, 2, 4])
    assert sorted(subgroup_product(g6, [h1, h2]).members) == [0, 1, 2, 3, 4, 5]


def test_homomorphism_checks():
    g6, g2 = make_cyclic(6), make_cyclic(2)
    parity = [x % 2 for x in range(6)]
    assert is_homomorphism(parity, g6, g2)
    assert sorted(kernel(parity, g6, g2).members) == [0, 2, 4]
    v4 = direct_product([make_cyclic(2), make_cyclic(2)])
    both_ones = [1 if v4.decode(a) == (1, 1) else 0 for a in v4.elements()]
    assert not is_homomorphism(both_ones, v4, g2)


def test_fibers_of_reduction():
    g = make_cyclic(6)
    fib = fibers([x % 3 for x in range(6)], g)
    assert fib == {0: [0, 3], 1: [1, 4], 2: [2, 5]}


def test_group_from_description_roundtrip():
    for g in (
        make_cyclic(7),
        direct_product([make_cyclic(2), make_cyclic(4)]),
        TableGroup([[(a + b) % 3 for b in range(3)] for a in range(3)]),
    ):
        h = group_from_description(g.describe())
        assert h.order == g.order
        assert all(
            h.op(a, b) == g.op(a, b) for a in g.elements() for b in g.elements()
        )


def _random_small_group(rng):
    if rng.random() < 0.5:
        return make_cyclic(rng.randint(1, 12))
    return direct_product(
        [make_cyclic(rng.randint(1, 4)) for _ in range(rng.randint(2, 3))]
    )


def test_group_axioms_random_sweep():
    rng = random.Random(11)
    for _ in range(40):
        g = _random_small_group(rng)
        for _ in range(20):
            a, b, c = (rng.randrange(g.order) for _ in range(3))
            assert g.op(g.op(a, b), c) == g.op(a, g.op(b, c))
            assert g.op(a, g.identity) == a
            assert g.op(g.identity, a) == a
            assert g.op(a, g.inverse(a)) == g.identity


def test_lagrange_random_sweep():
    rng = random.Random(23)
    for _ in range(40):
        g = _random_small_group(rng)
        gens = [rng.randrange(g.order) for _ in range(rng.randint(1, 2))]
        h = generated_subgroup(g, gens)
        assert g.order % len(h.members) == 0
        blocks = cosets(g, h)
        assert sorted(x for b in blocks for x in b) == list(g.elements())
        assert all(len(b) == len(h.members) for b in blocks)


def test_kernel_fibers_equal_sized():
    rng = random.Random(31)
    for _ in range(30):
        n = rng.randint(2, 12)
        m = rng.randint(2, 6)
        g, cod = make_cyclic(n), make_cyclic(m)
        c = rng.randrange(m)
        if (c * n) % m != 0:
            continue  # not a homomorphism for this pair
        f = [(c * x) % m for x in range(n)]
        assert is_homomorphism(f, g, cod)
        fib = fibers(f, g)
        sizes = {len(v) for v in fib.values()}
        assert len(sizes) == 1
        assert len(fib) * sizes.pop() == n
