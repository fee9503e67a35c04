"""Group structure, conjugacy classes, square roots, and level fusion."""
from __future__ import annotations

import itertools

import pytest

from chebrace.groups import (
    DIHEDRAL,
    Element,
    FLIP_EVEN,
    FLIP_ODD,
    MINUS_ONE,
    ONE,
    QUATERNION,
    Group,
    GroupKind,
    brute_force_fusion,
    build_group,
    power,
)

FAMILIES = (DIHEDRAL, QUATERNION)
SMALL = [build_group(GroupKind(f, n)) for f in FAMILIES for n in (3, 4, 5)]


@pytest.mark.parametrize("group", SMALL, ids=str)
def test_group_axioms_exhaustively(group):
    els = group.elements()
    assert len(els) == group.order == len(set(els))
    e = group.identity()
    for g in els:
        assert group.multiply(g, e) == group.multiply(e, g) == g
        assert group.multiply(g, group.inverse(g)) == e
    for g, h, k in itertools.islice(itertools.product(els, els, els), 4096):
        assert group.multiply(group.multiply(g, h), k) == \
            group.multiply(g, group.multiply(h, k))


@pytest.mark.parametrize("group", SMALL, ids=str)
def test_defining_relations(group):
    a = Element(1, 0)
    b = Element(0, 1)
    n = group.n
    # a has order 2^(n-1); b a b^-1 = a^-1
    aa = group.identity()
    for _ in range(group.rotation_order):
        aa = group.multiply(aa, a)
    assert aa == group.identity()
    conj = group.multiply(group.multiply(b, a), group.inverse(b))
    assert conj == group.inverse(a)
    bb = group.multiply(b, b)
    if group.family == DIHEDRAL:
        assert bb == group.identity()
    else:
        assert bb == Element(1 << (n - 2), 0)  # b^2 is the central involution


@pytest.mark.parametrize("group", SMALL, ids=str)
def test_class_partition(group):
    labels = group.class_labels()
    assert len(labels) == (1 << (group.n - 2)) + 3
    seen: set[Element] = set()
    for lab in labels:
        members = group.class_members(lab)
        assert len(members) == group.class_size(lab)
        for m in members:
            assert group.conjugacy_class_of(m) == lab
            assert m not in seen
            seen.add(m)
    assert len(seen) == group.order
    assert sum(group.class_size(lab) for lab in labels) == group.order


@pytest.mark.parametrize("group", SMALL, ids=str)
def test_classes_are_closed_under_conjugation(group):
    for lab in group.class_labels():
        rep = group.class_representative(lab)
        orbit = {
            group.multiply(group.multiply(t, rep), group.inverse(t))
            for t in group.elements()
        }
        assert orbit == set(group.class_members(lab))


@pytest.mark.parametrize("group", SMALL, ids=str)
def test_square_root_count_matches_brute_force(group):
    counts = {lab: 0 for lab in group.class_labels()}
    for g in group.elements():
        counts[group.conjugacy_class_of(group.multiply(g, g))] += 1
    for lab, brute in counts.items():
        assert group.square_root_count(lab) == brute, lab


def test_square_root_density_families_differ_at_center():
    q = build_group(GroupKind(QUATERNION, 5))
    d = build_group(GroupKind(DIHEDRAL, 5))
    # flips square to the central involution in one family, to 1 in the other
    assert q.square_root_count(MINUS_ONE) == 2 + q.rotation_order
    assert q.square_root_count(ONE) == 2
    assert d.square_root_count(ONE) == 2 + d.rotation_order
    assert d.square_root_count(MINUS_ONE) == 2


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("n", (4, 5, 6))
def test_class_fusion_matches_brute_force(family, n):
    group = build_group(GroupKind(family, n))
    for i in range(3, n + 1):
        for lab in group.level(i).class_labels():
            assert group.class_fusion(i, lab) == brute_force_fusion(group, i, lab)


def test_fusion_merges_exactly_the_flip_pair_below_the_top_level():
    group = build_group(GroupKind(QUATERNION, 6))
    for i in range(3, 6):
        labels = group.level(i).class_labels()
        fused = [group.class_fusion(i, lab) for lab in labels]
        assert fused.count(FLIP_EVEN) == 2
        assert FLIP_ODD not in fused
        rotations = fused[:-2]
        assert len(set(rotations)) == len(rotations)
    top = [group.class_fusion(6, lab) for lab in group.class_labels()]
    assert top == group.class_labels()


def test_level_subgroup_embedding_is_a_homomorphism():
    group = build_group(GroupKind(QUATERNION, 6))
    level = group.level(4)
    for g in level.elements():
        for h in level.elements():
            lhs = group.embed(4, level.multiply(g, h))
            rhs = group.multiply(group.embed(4, g), group.embed(4, h))
            assert lhs == rhs


def test_kind_validation():
    with pytest.raises(Exception):
        GroupKind(QUATERNION, 2)
    with pytest.raises(Exception):
        GroupKind("cyclic", 4)
    with pytest.raises(ValueError):
        build_group(GroupKind(QUATERNION, 4)).level(2)


def test_element_orders():
    q = build_group(GroupKind(QUATERNION, 3))
    assert q.element_order(Element(0, 1)) == 4  # quaternion flips have order 4
    d = build_group(GroupKind(DIHEDRAL, 3))
    assert d.element_order(Element(0, 1)) == 2
    assert q.element_order(Element(1, 0)) == 4
    assert q.element_order(Element(2, 0)) == 2


def test_power_label_str():
    assert str(power(3)) == "power(3)"
    assert str(ONE) == "one"
