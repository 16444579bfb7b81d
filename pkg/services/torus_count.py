"""
Point counts on the torus (F_p^*)^n and the non-degeneracy check.

The torus is enumerated once per cone in numpy blocks. Every point gets a
stratum code whose bit i is set when the i-th face function vanishes there;
points with a nonzero code are also tested for full Jacobian rank.
"""
import logging
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from config import settings
from errors import BudgetExceededError, DimensionMismatchError
from polyring import BaseField, PolyMapping, PrimeFieldPolynomial, face_function, reduce_mod_p

logger = logging.getLogger(__name__)


def subset_label(mask: int) -> str:
    members = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    return "{" + ",".join(members) + "}"


def subset_mask(subset: Iterable[int]) -> int:
    """Bitmask of a set of 1-based component indices."""
    mask = 0
    for i in subset:
        mask |= 1 << (i - 1)
    return mask


@dataclass(frozen=True)
class CountTable:
    """Card of V_{Delta,I} for every I, indexed by bitmask (bit i-1 for component i)."""
    cone_id: str
    p: int
    nvars: int
    counts: tuple

    def __post_init__(self):
        expected = (self.p - 1) ** self.nvars
        if sum(self.counts) != expected:
            raise ValueError(f"counts of cone {self.cone_id} sum to {sum(self.counts)}, expected {expected}")

    @property
    def r(self) -> int:
        return len(self.counts).bit_length() - 1

    def count(self, subset: Iterable[int] = ()) -> int:
        return self.counts[subset_mask(subset)]

    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return {subset_label(mask): value for mask, value in enumerate(self.counts)}


@dataclass(frozen=True)
class Witness:
    cone_id: str
    subset: tuple   # 1-based indices of the vanishing face functions
    point: tuple
    rank: int

    def describe(self) -> str:
        members = ",".join(str(i) for i in self.subset)
        return f"cone {self.cone_id}, I={{{members}}}, z={self.point}, rank {self.rank}"


@dataclass(frozen=True)
class NondegeneracyReport:
    verdict: bool
    witnesses: tuple
    cones_checked: int = 0
    spot_checks: int = 0

    def __post_init__(self):
        if self.verdict == bool(self.witnesses):
            raise ValueError("verdict must be false exactly when witnesses exist")

    @classmethod
    def from_witnesses(cls, witnesses: Sequence[Witness], cones_checked: int = 0,
                       spot_checks: int = 0) -> "NondegeneracyReport":
        return cls(not witnesses, tuple(witnesses), cones_checked, spot_checks)


def power_mod(base: np.ndarray, exponent: int, p: int) -> np.ndarray:
    result = np.ones_like(base)
    square = base.copy()
    while exponent:
        if exponent & 1:
            result = result * square % p
        square = square * square % p
        exponent >>= 1
    return result


class _BlockEvaluator:
    """Evaluates polynomials over F_p on a block of torus points, sharing powers."""

    def __init__(self, coordinates: list, p: int):
        self.coordinates = coordinates
        self.p = p
        self._powers: dict = {}

    def power(self, j: int, exponent: int) -> np.ndarray:
        key = (j, exponent)
        if key not in self._powers:
            self._powers[key] = power_mod(self.coordinates[j], exponent, self.p)
        return self._powers[key]

    def evaluate(self, polynomial: PrimeFieldPolynomial) -> np.ndarray:
        total = np.zeros_like(self.coordinates[0])
        for exponent, coefficient in polynomial.terms:
            term = np.full_like(total, coefficient)
            for j, e in enumerate(exponent):
                if e:
                    term = term * self.power(j, e) % self.p
            total = (total + term) % self.p
        return total


def _check_budget(field: BaseField, nvars: int, budget: Optional[int]) -> int:
    size = (field.p - 1) ** nvars
    limit = settings.enumeration_budget if budget is None else budget
    if size > limit:
        raise BudgetExceededError("torus enumeration", size, limit, "choose a smaller prime")
    return size


def rank_at_point(rows: Sequence[PrimeFieldPolynomial], point: Sequence[int]) -> int:
    """Rank over F_p of the Jacobian [d h_i / d x_j (z)] for the given rows."""
    if not rows:
        return 0
    nvars = rows[0].nvars
    p = rows[0].p
    if len(point) != nvars:
        raise DimensionMismatchError(f"point {tuple(point)} has wrong length for {nvars} variables")
    domain = GF(p)
    matrix = [[domain(row.derivative(j).evaluate(point)) for j in range(nvars)] for row in rows]
    return DomainMatrix(matrix, (len(rows), nvars), domain).rank()


def survey_cone(faces: Sequence[PrimeFieldPolynomial], field: BaseField, cone_id: str = "",
                budget: Optional[int] = None, check_rank: bool = True) -> tuple:
    """
    One pass over (F_p^*)^n: the CountTable of the faces and, when
    check_rank is set, every point where the vanishing faces have deficient
    Jacobian rank.
    """
    if not faces:
        raise DimensionMismatchError("at least one face function is needed")
    nvars = faces[0].nvars
    p = field.p
    total = _check_budget(field, nvars, budget)
    r = len(faces)
    radix = p - 1
    counts = np.zeros(1 << r, dtype=np.int64)
    gradients = [[face.derivative(j) for j in range(nvars)] for face in faces]
    witnesses = []

    for start in range(0, total, settings.block_size):
        index = np.arange(start, min(start + settings.block_size, total), dtype=np.int64)
        coordinates = []
        for _ in range(nvars):
            coordinates.append(index % radix + 1)
            index = index // radix
        evaluator = _BlockEvaluator(coordinates, p)
        codes = np.zeros_like(coordinates[0])
        for i, face in enumerate(faces):
            codes |= (evaluator.evaluate(face) == 0).astype(np.int64) << i
        counts += np.bincount(codes, minlength=1 << r)
        if not check_rank:
            continue
        vanishing = np.nonzero(codes)[0]
        if vanishing.size == 0:
            continue
        partials = [[evaluator.evaluate(g)[vanishing] for g in row] for row in gradients]
        domain = GF(p)
        for position, point_index in enumerate(vanishing):
            mask = int(codes[point_index])
            members = [i for i in range(r) if mask >> i & 1]
            matrix = [[domain(int(partials[i][j][position])) for j in range(nvars)] for i in members]
            rank = DomainMatrix(matrix, (len(members), nvars), domain).rank()
            if rank < len(members):
                point = tuple(int(c[point_index]) for c in coordinates)
                witnesses.append(Witness(cone_id, tuple(i + 1 for i in members), point, rank))

    table = CountTable(cone_id, p, nvars, tuple(int(c) for c in counts))
    logger.debug(f"Cone {cone_id}: counts {table.as_dict()}, {len(witnesses)} rank failures")
    return table, witnesses


def count_strata(faces: Sequence[PrimeFieldPolynomial], field: BaseField, cone_id: str = "",
                 budget: Optional[int] = None) -> CountTable:
    table, _ = survey_cone(faces, field, cone_id, budget, check_rank=False)
    return table


def cone_faces(mapping: PolyMapping, barycenter: Sequence[int], field: BaseField) -> list:
    """Reduced face functions h_{i,b} of every component at the vector b."""
    return [reduce_mod_p(face_function(h, barycenter), field) for h in mapping.components]


def check_nondegeneracy(mapping: PolyMapping, fan, field: BaseField,
                        budget: Optional[int] = None, spot_check: bool = False) -> NondegeneracyReport:
    """Test the rank condition at the barycenter of every cone, the origin included."""
    witnesses = []
    cones = fan.all_cones()
    for cone in cones:
        _, failures = survey_cone(cone_faces(mapping, cone.barycenter, field), field, cone.cone_id, budget)
        witnesses.extend(failures)
    report = NondegeneracyReport.from_witnesses(witnesses, len(cones))
    if spot_check:
        report = merge_reports(report, spot_check_nondegeneracy(mapping, field, budget=budget))
    return report


def spot_check_nondegeneracy(mapping: PolyMapping, field: BaseField, samples: Optional[int] = None,
                             bound: Optional[int] = None, seed: int = 0,
                             budget: Optional[int] = None) -> NondegeneracyReport:
    """The rank condition at random lattice vectors k in [0, bound]^n, independent of any fan."""
    samples = settings.spot_check_samples if samples is None else samples
    bound = settings.spot_check_bound if bound is None else bound
    rng = random.Random(seed)
    witnesses = []
    checked = 0
    seen = set()
    for _ in range(samples):
        k = tuple(rng.randint(0, bound) for _ in range(mapping.nvars))
        if not any(k) or k in seen:
            continue
        seen.add(k)
        _, failures = survey_cone(cone_faces(mapping, k, field), field, f"k={k}", budget)
        witnesses.extend(failures)
        checked += 1
    return NondegeneracyReport.from_witnesses(witnesses, spot_checks=checked)


def merge_reports(first: NondegeneracyReport, second: NondegeneracyReport) -> NondegeneracyReport:
    return NondegeneracyReport.from_witnesses(
        first.witnesses + second.witnesses,
        first.cones_checked + second.cones_checked,
        first.spot_checks + second.spot_checks,
    )
