"""Exact character tables for the two 2-group families.

Both families of order 2^n have four degree-1 characters factoring through
the Klein quotient and 2^(n-2)-1 degree-2 characters psi_j whose rotation
values are zeta^(jk) + zeta^(-jk) for zeta of order 2^(n-1).  Everything is
kept in exact cyclotomic form so orthogonality, Frobenius-Schur sums, and
the odd-index cancellation sum are literal identities, not float checks.

The degree-2 value at the central involution comes out of the generic
rotation formula at k = 2^(n-2), i.e. 2*(-1)^j.  Induction from a tower
level and the disjointness partition of inductions are computed from the
closed-form component sets, which the tests arbitrate against brute-force
induced class functions and Frobenius reciprocity.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .cyclotomic import (
    CycloInt,
    add,
    compress,
    conjugate,
    cos_pair,
    cyclo_int,
    cyclo_zero,
    mul,
    promote,
    root_power,
    scale,
)
from .groups import ClassLabel, Group

ORTHOGONAL = "orthogonal"
SYMPLECTIC = "symplectic"
UNITARY = "unitary"


@dataclass(frozen=True, eq=False)
class Character:
    cid: str
    degree: int
    values: Mapping[ClassLabel, CycloInt]

    def value(self, label: ClassLabel) -> CycloInt:
        return self.values[label]


@dataclass(frozen=True, eq=False)
class CharacterTable:
    group: Group
    characters: tuple[Character, ...]

    def by_id(self, cid: str) -> Character:
        for chi in self.characters:
            if chi.cid == cid:
                return chi
        raise KeyError(cid)

    @property
    def ring_order(self) -> int:
        return self.group.rotation_order

    def ids(self) -> list[str]:
        return [chi.cid for chi in self.characters]


def psi_id(j: int) -> str:
    return f"psi_{j}"


def character_ids(group: Group) -> list[str]:
    """Canonical enumeration: chi0..chi3 then psi_1..psi_(2^(n-2)-1)."""
    return ["chi0", "chi1", "chi2", "chi3"] + [
        psi_id(j) for j in range(1, 1 << (group.n - 2))
    ]


def character_degree(cid: str) -> int:
    return 2 if cid.startswith("psi_") else 1


def character_value(group: Group, cid: str, label: ClassLabel) -> CycloInt:
    """Exact table entry, evaluated lazily so huge groups never need a table.

    The rotation exponent of the class representative determines everything:
    degree-1 values are signs of the exponent / flip bits, degree-2 values
    are zeta^(j k) + zeta^(-j k) on rotations and 0 on flips.
    """
    m = group.rotation_order

    def sign(c: int) -> CycloInt:
        return cyclo_int(m, 1 if c % 2 == 0 else -1)

    if label.kind == "power":
        k = label.k
    elif label.kind == "minus_one":
        k = 1 << (group.n - 2)
    else:
        k = 0
    flipped = label.kind in ("flip_even", "flip_odd")
    parity = 0 if label.kind != "flip_odd" else 1

    if cid == "chi0":
        return cyclo_int(m, 1)
    if cid == "chi1":
        return cyclo_int(m, -1 if flipped else 1)
    if cid == "chi2":
        return sign(parity) if flipped else sign(k)
    if cid == "chi3":
        return sign(parity + 1) if flipped else sign(k)
    if cid.startswith("psi_"):
        j = int(cid.split("_")[1])
        assert 1 <= j < (1 << (group.n - 2)), cid
        if flipped:
            return cyclo_zero(m)
        return cos_pair(m, j * k)
    raise KeyError(cid)


def character_table(group: Group) -> CharacterTable:
    labels = group.class_labels()
    chars = tuple(
        Character(cid, character_degree(cid),
                  {lab: character_value(group, cid, lab) for lab in labels})
        for cid in character_ids(group)
    )
    table = CharacterTable(group, chars)
    assert sum(c.degree**2 for c in chars) == group.order
    return table


def inner_product(group: Group, f: Mapping[ClassLabel, CycloInt],
                  g: Mapping[ClassLabel, CycloInt]) -> Fraction:
    """(1/|G|) sum_C |C| f(C) conj(g(C)), exact; raises if not rational."""
    m = group.rotation_order
    acc = cyclo_zero(m)
    for lab in group.class_labels():
        term = mul(f[lab], conjugate(g[lab]))
        acc = add(acc, scale(term, group.class_size(lab)))
    return Fraction(acc.as_int(), group.order)


def frobenius_schur(table: CharacterTable, chi: Character) -> int:
    """(1/|G|) sum_g chi(g^2), via classes: g -> g^2 is class-constant."""
    group = table.group
    acc = cyclo_zero(table.ring_order)
    for lab in group.class_labels():
        rep = group.class_representative(lab)
        sq = group.conjugacy_class_of(group.multiply(rep, rep))
        acc = add(acc, scale(chi.value(sq), group.class_size(lab)))
    total = acc.as_int()
    assert total % group.order == 0
    ind = total // group.order
    assert ind in (-1, 0, 1)
    return ind


def fs_type(table: CharacterTable, chi: Character) -> str:
    return {1: ORTHOGONAL, -1: SYMPLECTIC, 0: UNITARY}[frobenius_schur(table, chi)]


def is_symplectic(cid: str) -> bool:
    """Closed form for these families: exactly the odd-index psi_j are symplectic,
    and only in the quaternion family (checked against the brute sum in tests)."""
    return cid.startswith("psi_") and int(cid.split("_")[1]) % 2 == 1


def is_faithful(table: CharacterTable, chi: Character) -> bool:
    """True iff chi(C) = chi(1) only at the identity class."""
    m = table.ring_order
    top = cyclo_int(m, chi.degree)
    for lab in table.group.class_labels():
        if lab.kind == "one":
            continue
        if chi.value(lab) == top:
            return False
    return True


@dataclass(frozen=True)
class InducedDecomposition:
    level: int
    source_id: str
    components: tuple[tuple[str, int], ...]

    def component_ids(self) -> set[str]:
        return {cid for cid, _ in self.components}

    def multiplicity(self, cid: str) -> int:
        return dict(self.components).get(cid, 0)


def _psi_range(n: int, residue: int, modulus: int) -> list[int]:
    start = residue % modulus
    if start == 0:
        start = modulus
    return list(range(start, 1 << (n - 2), modulus))


def induce(group: Group, i: int, source_id: str) -> InducedDecomposition:
    """Decompose the induction of a level-i irreducible into the full group.

    Closed components: the two relevant degree-1 characters plus psi_j for
    j = 0 mod 2^(i-1) (sources chi0, chi1), the pure psi block at
    j = 2^(i-2) mod 2^(i-1) (sources chi2, chi3), and the folded block
    j = +-k mod 2^(i-1) (source psi_k).  Verified against brute-force
    induced class functions in the tests; degree bookkeeping asserted here.
    """
    n = group.n
    if not 3 <= i <= n:
        raise ValueError(f"level must satisfy 3 <= i <= {n}, got {i}")
    if i == n:
        comps = [(source_id, 1)]
        src_degree = character_degree(source_id)
    else:
        step = 1 << (i - 1)
        if source_id in ("chi0", "chi1"):
            heads = ["chi0", "chi2"] if source_id == "chi0" else ["chi1", "chi3"]
            comps = [(h, 1) for h in heads]
            comps += [(psi_id(j), 1) for j in _psi_range(n, 0, step)]
            src_degree = 1
        elif source_id in ("chi2", "chi3"):
            comps = [(psi_id(j), 1) for j in _psi_range(n, 1 << (i - 2), step)]
            src_degree = 1
        elif source_id.startswith("psi_"):
            k = int(source_id.split("_")[1])
            assert 1 <= k < (1 << (i - 2))
            js = sorted(set(_psi_range(n, k, step)) | set(_psi_range(n, -k, step)))
            comps = [(psi_id(j), 1) for j in js]
            src_degree = 2
        else:
            raise KeyError(source_id)
    total = sum(mult * character_degree(cid) for cid, mult in comps)
    assert total == (1 << (n - i)) * src_degree, (source_id, i, total)
    return InducedDecomposition(i, source_id, tuple(sorted(comps)))


def restrict(group: Group, i: int, cid: str) -> dict[ClassLabel, CycloInt]:
    """Values of a full-group character on the classes of the level-i subgroup."""
    level = group.level(i)
    out: dict[ClassLabel, CycloInt] = {}
    for lab in level.class_labels():
        rep = level.class_representative(lab)
        full_lab = group.conjugacy_class_of(group.embed(i, rep))
        out[lab] = compress(character_value(group, cid, full_lab),
                            level.rotation_order)
    return out


def brute_force_induce(table: CharacterTable, i: int,
                       values: Mapping[ClassLabel, CycloInt]) -> dict[str, int]:
    """Oracle: induced class function summed over the whole group, then
    decomposed by exact inner products.  Quadratic in |G|; tests cap n."""
    group = table.group
    level = group.level(i)
    m = group.rotation_order
    member_of = {group.embed(i, h): lab
                 for lab in level.class_labels()
                 for h in level.class_members(lab)}
    ind_vals: dict[ClassLabel, CycloInt] = {}
    for lab in group.class_labels():
        g = group.class_representative(lab)
        acc = cyclo_zero(m)
        for t in group.elements():
            conj_g = group.multiply(group.multiply(t, g), group.inverse(t))
            src = member_of.get(conj_g)
            if src is not None:
                acc = add(acc, promote(values[src], m))
        ind_vals[lab] = acc  # |H| * Ind(value); divided out below
    out: dict[str, int] = {}
    for chi in table.characters:
        raw = inner_product(group, ind_vals, chi.values)
        mult = Fraction(raw, level.order)
        assert mult.denominator == 1 and mult >= 0
        if mult:
            out[chi.cid] = int(mult)
    return out


@dataclass(frozen=True)
class SRPartition:
    """Split of a level's irreducibles by whether their inductions stay disjoint.

    b1/b2 are the definition-faithful max-degree and size of the shared part;
    published_b1/published_b2 carry the value 2 quoted alongside the towers'
    analysis, which disagrees below the top level (see README).
    """

    level: int
    s_ids: tuple[str, ...]
    r_ids: tuple[str, ...]
    b1: int
    b2: int
    published_b1: int
    published_b2: int
    published_r_ids: tuple[str, ...]


def sr_partition(group: Group, i: int) -> SRPartition:
    level_ids = character_ids(group.level(i))
    comps = {cid: induce(group, i, cid).component_ids() for cid in level_ids}
    s_ids = tuple(
        cid for cid in level_ids
        if all(comps[cid].isdisjoint(comps[other])
               for other in level_ids if other != cid)
    )
    r_ids = tuple(cid for cid in level_ids
                  if cid not in s_ids and cid != "chi0")
    b1 = max((character_degree(cid) for cid in r_ids), default=0)
    b2 = len(r_ids)
    return SRPartition(i, s_ids, r_ids, b1, b2,
                       published_b1=2, published_b2=2,
                       published_r_ids=("chi2", "chi3"))


def symplectic_value_sum(i: int, k: int) -> CycloInt:
    """Sum of zeta^(jk) + zeta^(-jk) over odd j in [1, 2^(i-2)-1], zeta of
    order 2^(i-1).  Cancels to zero exactly; asserted by tests and relied on
    by the race mean computation."""
    if i < 3:
        raise ValueError(f"need i >= 3, got {i}")
    if not 1 <= k <= (1 << (i - 2)) - 1:
        raise ValueError(f"need 1 <= k <= {(1 << (i - 2)) - 1}, got {k}")
    m = 1 << (i - 1)
    acc = cyclo_zero(m)
    for j in range(1, 1 << (i - 2), 2):
        acc = add(acc, cos_pair(m, j * k))
    return acc


def export_table_csv(table: CharacterTable, fileobj) -> None:
    """Classes as columns, characters as rows, float values."""
    labels = table.group.class_labels()
    writer = csv.writer(fileobj)
    writer.writerow(["character"] + [str(lab) for lab in labels])
    for chi in table.characters:
        writer.writerow([chi.cid] + [repr(chi.value(lab).to_float()) for lab in labels])


def degree_two_matrices(group: Group, j: int, element) -> list[list[complex]]:
    """Explicit 2x2 matrix of psi_j at an element, for the conductor oracle.

    Rotations are diag(zeta^(je), zeta^(-je)); the flip is the swap matrix in
    the dihedral family and for even j, and the symplectic rotation for odd j
    in the quaternion family.
    """
    m = group.rotation_order
    za = root_power(m, j * element.exponent).to_complex()
    zb = root_power(m, -j * element.exponent).to_complex()
    rot = [[za, 0j], [0j, zb]]
    if not element.flip:
        return rot
    if group.family == "quaternion" and j % 2 == 1:
        flip = [[0j, -1 + 0j], [1 + 0j, 0j]]
    else:
        flip = [[0j, 1 + 0j], [1 + 0j, 0j]]
    return [
        [
            rot[r][0] * flip[0][c] + rot[r][1] * flip[1][c]
            for c in range(2)
        ]
        for r in range(2)
    ]
