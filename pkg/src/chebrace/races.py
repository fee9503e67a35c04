"""The limiting race random variable for a class pair at a tower level.

For Galois group G of order 2^i acting as Gal(L/K) and two conjugacy classes
C1, C2, the normalized prime-counting difference converges (under the usual
axioms) to

    X = |C2^(1/2)|/|C2| - |C1^(1/2)|/|C1| + z(C2) - z(C1)
        + 2 sum_lambda |lambda(C2+) - lambda(C1+)| sum_{gamma>0} X_gamma/sqrt(1/4+gamma^2)

where the lambda run over the irreducibles of the full group, C+ denotes the
fused class there, z(C) = 2 sum_{chi != chi0} chi(C) ord_{s=1/2} L(s,chi) over
the level's own irreducibles, and the X_gamma are independent cosines of
uniform angles.  The mean is an exact integer; the variance used throughout
is the actual variance of X, i.e. (1/2) sum r^2 = 2 sum_lambda w^2 B0(lambda)
with the one-sided B0 convention.

The race is undefined exactly when the fused classes coincide (the two
counting functions are then identical); in these families that happens only
for the two reflection classes below the top level.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .arithmetic import ArithmeticScenario
from .characters import character_ids, character_value, induce
from .cyclotomic import add, cyclo_zero, scale, sub
from .groups import DIHEDRAL, MINUS_ONE, ONE, ClassLabel, Group, GroupKind
from .zeros import ZeroSet


class RaceUndefinedError(ValueError):
    """Fused classes coincide: the two counting functions are identical."""


@dataclass(frozen=True)
class RaceSpec:
    scenario: ArithmeticScenario
    level: int
    c1: ClassLabel
    c2: ClassLabel

    def __post_init__(self) -> None:
        n = self.scenario.kind.n
        if not 3 <= self.level <= n:
            raise ValueError(f"level must satisfy 3 <= level <= {n}, got {self.level}")
        lg = self.level_group
        for lab in (self.c1, self.c2):
            if lab.kind == "power" and not 1 <= lab.k <= (1 << (self.level - 2)) - 1:
                raise ValueError(f"{lab} out of range at level {self.level}")
        if self.c1 == self.c2:
            raise ValueError("classes must differ")
        assert lg.order == 1 << self.level

    @property
    def group(self) -> Group:
        return self.scenario.group

    @property
    def level_group(self) -> Group:
        return self.scenario.group.level(self.level)

    def fused_pair(self) -> tuple[ClassLabel, ClassLabel]:
        g = self.group
        return (g.class_fusion(self.level, self.c1),
                g.class_fusion(self.level, self.c2))

    def is_defined(self) -> bool:
        a, b = self.fused_pair()
        return a != b


def level_orders(scenario: ArithmeticScenario, level: int) -> dict[str, int]:
    """Central vanishing order of each level irreducible: the L-function
    factors through the induction, so the order is the multiplicity-weighted
    sum of full-group central orders over the components."""
    group = scenario.group
    out: dict[str, int] = {}
    for cid in character_ids(group.level(level)):
        dec = induce(group, level, cid)
        out[cid] = sum(mult * scenario.central_order(comp)
                       for comp, mult in dec.components)
    return out


def z_value(level_group: Group, label: ClassLabel, orders: Mapping[str, int]) -> int:
    """Exact integer 2 sum_{chi != chi0} chi(label) ord(chi).

    Values are accumulated in the cyclotomic ring; the result must land in
    the integers (it does whenever the order map is constant on each Galois
    orbit of characters, e.g. the symplectic-block orders)."""
    m = level_group.rotation_order
    acc = cyclo_zero(m)
    for cid, order in orders.items():
        if cid == "chi0" or order == 0:
            continue
        acc = add(acc, scale(character_value(level_group, cid, label), order))
    total = scale(acc, 2)
    return total.as_int()


def sqrt_density(level_group: Group, label: ClassLabel) -> int:
    """|C^(1/2)|/|C| as an exact integer (it always is in these families)."""
    rho = Fraction(level_group.square_root_count(label),
                   level_group.class_size(label))
    assert rho.denominator == 1, (label, rho)
    return int(rho)


def mean(spec: RaceSpec) -> int:
    """Exact integer mean of X for the race, per the limiting formula."""
    if not spec.is_defined():
        raise RaceUndefinedError(
            f"race undefined: fused classes coincide for ({spec.c1}, {spec.c2}) "
            f"at level {spec.level}; the counting functions are identical")
    lg = spec.level_group
    orders = level_orders(spec.scenario, spec.level)
    return (sqrt_density(lg, spec.c2) - sqrt_density(lg, spec.c1)
            + z_value(lg, spec.c2, orders) - z_value(lg, spec.c1, orders))


def weights(spec: RaceSpec) -> dict[str, float]:
    """|lambda(C2+) - lambda(C1+)| over the full-group irreducibles."""
    if not spec.is_defined():
        raise RaceUndefinedError(
            f"race undefined: fused classes coincide for ({spec.c1}, {spec.c2})")
    g = spec.group
    f1, f2 = spec.fused_pair()
    out: dict[str, float] = {}
    for cid in character_ids(g):
        diff = sub(character_value(g, cid, f2), character_value(g, cid, f1))
        out[cid] = abs(diff.to_complex())
    return out


def variance(spec: RaceSpec, b0_map: Mapping[str, float]) -> float:
    """2 sum_lambda |lambda(C1+)-lambda(C2+)|^2 B0(lambda); with the
    one-sided B0 this is the actual variance of X."""
    w = weights(spec)
    total = 0.0
    for cid, wv in w.items():
        if wv == 0.0:
            continue
        if cid not in b0_map:
            raise KeyError(f"b0 value missing for weighted character {cid}")
        total += wv * wv * b0_map[cid]
    total *= 2.0
    if not total > 0.0:
        raise ValueError("variance must be positive when the fused classes differ")
    return total


def bias_factor(spec: RaceSpec, b0_map: Mapping[str, float]) -> float:
    """mean / sqrt(variance)."""
    return mean(spec) / math.sqrt(variance(spec, b0_map))


@dataclass(frozen=True, eq=False)
class RaceModel:
    """Materialized finite model of X: integer mean, descending amplitude
    list r = 2 w(lambda)/sqrt(1/4+gamma^2) over the provided zero sets,
    variance = (1/2) sum r^2, and bias_factor = mean/sqrt(variance)."""

    mean: int
    variance: float
    bias_factor: float
    terms: np.ndarray
    per_character_weights: dict[str, float]

    def __post_init__(self) -> None:
        assert self.variance >= 0.0
        assert self.terms.size == 0 or float(self.terms.min()) > 0.0


def term_list(spec: RaceSpec, zero_sets: Mapping[str, ZeroSet]) -> RaceModel:
    """Build the RaceModel from per-character zero sets; every character with
    nonzero weight must be covered."""
    return assemble_race_model(mean(spec), weights(spec), zero_sets)


def assemble_race_model(mean_value: int, weight_map: Mapping[str, float],
                        zero_sets: Mapping[str, ZeroSet]) -> RaceModel:
    """Materialize a RaceModel from an explicit mean and weight map; used by
    term_list and by ad-hoc races built outside the two families."""
    chunks: list[np.ndarray] = []
    for cid in sorted(weight_map):
        wv = weight_map[cid]
        if wv == 0.0:
            continue
        if cid not in zero_sets:
            raise KeyError(f"zero set missing for weighted character {cid}")
        g = np.asarray(zero_sets[cid].ordinates, dtype=float)
        if g.size:
            chunks.append(2.0 * wv / np.sqrt(0.25 + g * g))
    terms = np.sort(np.concatenate(chunks))[::-1] if chunks else np.empty(0)
    var = 0.5 * float(np.sum(terms * terms))
    if not var > 0.0:
        raise ValueError("no oscillation terms: provide nonempty zero sets "
                         "for the weighted characters")
    return RaceModel(mean_value, var, mean_value / math.sqrt(var), terms,
                     dict(weight_map))


# -- closed-form means and published tables ------------------------------------


def race_mean_closed_form(kind: GroupKind, w_axiom: int, level: int,
                          c1: ClassLabel, c2: ClassLabel) -> int | None:
    """Direct evaluation of the mean in closed form (defined-race pairs only).

    Derived from the square-root densities (identity and central involution
    swap their counts between the two families; even rotation classes give 2,
    everything else 0) plus the symplectic z contribution, which vanishes
    except at +-1 where it is -+2^(n-2)(1-W) in the quaternion family.
    Returns None for the undefined pair.
    """
    n = kind.n
    i = level
    quo = kind.family != DIHEDRAL

    def rho(lab: ClassLabel) -> int:
        if lab == ONE:
            return 2 if quo else (1 << (i - 1)) + 2
        if lab == MINUS_ONE:
            return (1 << (i - 1)) + 2 if quo else 2
        if lab.kind == "power":
            return 2 if lab.k % 2 == 0 else 0
        return 0

    def z(lab: ClassLabel) -> int:
        if not quo:
            return 0
        if lab == ONE:
            return (1 << (n - 2)) * (1 - w_axiom)
        if lab == MINUS_ONE:
            return -(1 << (n - 2)) * (1 - w_axiom)
        return 0

    if {c1.kind, c2.kind} == {"flip_even", "flip_odd"} and i < n:
        return None
    return rho(c2) - rho(c1) + z(c2) - z(c1)


def published_mean(kind: GroupKind, w_axiom: int, level: int,
                   c1: ClassLabel, c2: ClassLabel) -> int | None:
    """The mean as printed in the published race tables for these families.

    Quaternion rows agree with race_mean_closed_form everywhere.  The
    dihedral rows involving the identity class are printed one higher than
    direct evaluation of the limiting formula; both values are surfaced and
    the discrepancy is flagged rather than resolved (see README).
    """
    base = race_mean_closed_form(kind, w_axiom, level, c1, c2)
    if base is None:
        return None
    if kind.family == DIHEDRAL and ONE in (c1, c2):
        return base + 1 if c1 == ONE else base - 1
    return base


STATUS_MATCH = "match"
STATUS_OPEN_QUESTION = "open-question"
STATUS_UNDEFINED = "undefined"


@dataclass(frozen=True)
class MeanRow:
    c1: ClassLabel
    c2: ClassLabel
    mean_formula: int | None
    mean_published: int | None
    status: str


def mean_table(family: str, n: int, level: int, w_axiom: int) -> list[MeanRow]:
    """Exact means for every unordered class pair at the level, with the
    published value alongside and a status flag; the undefined pair is
    reported, never skipped."""
    kind = GroupKind(family, n)
    group = Group(kind)
    labels = group.level(level).class_labels()
    rows: list[MeanRow] = []
    orders = None
    scen = _table_scenario(kind, w_axiom)
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            c1, c2 = labels[a], labels[b]
            spec = RaceSpec(scen, level, c1, c2)
            if not spec.is_defined():
                rows.append(MeanRow(c1, c2, None, None, STATUS_UNDEFINED))
                continue
            if orders is None:
                orders = level_orders(scen, level)
            lg = spec.level_group
            formula = (sqrt_density(lg, c2) - sqrt_density(lg, c1)
                       + z_value(lg, c2, orders) - z_value(lg, c1, orders))
            closed = race_mean_closed_form(kind, w_axiom, level, c1, c2)
            assert closed == formula, (c1, c2, closed, formula)
            pub = published_mean(kind, w_axiom, level, c1, c2)
            status = STATUS_MATCH if pub == formula else STATUS_OPEN_QUESTION
            rows.append(MeanRow(c1, c2, formula, pub, status))
    return rows


def _table_scenario(kind: GroupKind, w_axiom: int) -> ArithmeticScenario:
    """Minimal scenario carrying only the family and root-number axiom, used
    for mean tables where conductor sizes are irrelevant."""
    from .arithmetic import VirtualPrime
    from .groups import Element

    if kind.family == DIHEDRAL:
        w_axiom = +1
    return ArithmeticScenario(
        kind, w_axiom,
        (VirtualPrime(5, math.log(5.0), Element(1, 0)),),
        log_disc=1.0, explicit=False)


def write_mean_table_csv(rows: list[MeanRow], fileobj) -> None:
    writer = csv.writer(fileobj)
    writer.writerow(["c1", "c2", "mean_formula", "mean_published", "status"])
    for r in rows:
        writer.writerow([
            str(r.c1), str(r.c2),
            "" if r.mean_formula is None else r.mean_formula,
            "" if r.mean_published is None else r.mean_published,
            r.status,
        ])


def mean_table_json(rows: list[MeanRow]) -> str:
    return json.dumps([
        {
            "c1": str(r.c1), "c2": str(r.c2),
            "mean_formula": r.mean_formula,
            "mean_published": r.mean_published,
            "status": r.status,
        }
        for r in rows
    ], indent=2, sort_keys=True) + "\n"
