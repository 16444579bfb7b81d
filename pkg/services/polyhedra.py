"""
Newton polyhedra Gamma(G) = conv(union of m + R_+^n) with both descriptions.

Facets come from an incremental double-description pass over the cone of
valid inequalities {(a, d') : a >= 0, <a, v> + d' >= 0}; every extreme ray
(a, d') with a != 0 is a facet <a, x> >= -d'. All arithmetic is on Python ints.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gcd
from typing import Iterable, Sequence

from sympy import Matrix

from errors import DimensionMismatchError, SpecValidationError

logger = logging.getLogger(__name__)

Point = tuple[int, ...]


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def primitive(vector: Sequence[int]) -> tuple[int, ...]:
    """Divide by the gcd of the entries; the zero vector is returned unchanged."""
    divisor = 0
    for x in vector:
        divisor = gcd(divisor, x)
    if divisor <= 1:
        return tuple(vector)
    return tuple(x // divisor for x in vector)


@lru_cache(maxsize=65536)
def rank_of(rows: tuple) -> int:
    """Rank over Q of an integer matrix given as a tuple of row tuples."""
    if not rows:
        return 0
    return Matrix(rows).rank()


@dataclass(frozen=True)
class Facet:
    normal: Point  # primitive, nonnegative
    offset: int    # <normal, x> >= offset on the polyhedron

    def holds_at(self, point: Sequence[int]) -> bool:
        return dot(self.normal, point) >= self.offset

    def is_tight(self, point: Sequence[int]) -> bool:
        return dot(self.normal, point) == self.offset


@dataclass(frozen=True)
class FaceDescriptor:
    """A nonempty face: the generators it contains and the facets containing it."""
    tight_facets: frozenset  # facet indices
    vertex_subset: tuple     # sorted vertices on the face
    dim: int
    recession_axes: tuple = ()  # coordinate rays e_j lying in the face's recession cone

    def key(self) -> tuple:
        return (self.dim, self.vertex_subset, self.recession_axes)

    def describe(self) -> str:
        points = ", ".join(str(v) for v in self.vertex_subset)
        return f"dim {self.dim} face through {points}"


@dataclass(frozen=True)
class NewtonPolyhedron:
    nvars: int
    vertices: tuple  # lexicographically sorted lattice points
    facets: tuple    # Facets sorted by normal

    def contains(self, point: Sequence[int]) -> bool:
        if len(point) != self.nvars:
            raise DimensionMismatchError(f"point {tuple(point)} has wrong length")
        return all(facet.holds_at(point) for facet in self.facets)

    def facet_normals(self) -> tuple:
        return tuple(facet.normal for facet in self.facets)

    def translate(self, shift: Sequence[int]) -> "NewtonPolyhedron":
        return newton_polyhedron(tuple(a + b for a, b in zip(v, shift)) for v in self.vertices)

    @cached_property
    def generator_incidence(self) -> tuple:
        """
        For each facet the generators lying on it: vertices as ("v", index),
        coordinate rays as ("e", j).
        """
        incidence = []
        for facet in self.facets:
            members = {("v", i) for i, v in enumerate(self.vertices) if facet.is_tight(v)}
            members |= {("e", j) for j, a in enumerate(facet.normal) if a == 0}
            incidence.append(frozenset(members))
        return tuple(incidence)

    @cached_property
    def all_generators(self) -> frozenset:
        return frozenset(
            [("v", i) for i in range(len(self.vertices))] + [("e", j) for j in range(self.nvars)]
        )

    def describe_generators(self, generators: frozenset) -> FaceDescriptor:
        tight = frozenset(
            k for k, members in enumerate(self.generator_incidence) if generators <= members
        )
        normals = tuple(self.facets[k].normal for k in sorted(tight))
        return FaceDescriptor(
            tight_facets=tight,
            vertex_subset=tuple(sorted(self.vertices[i] for kind, i in generators if kind == "v")),
            dim=self.nvars - rank_of(normals),
            recession_axes=tuple(sorted(j for kind, j in generators if kind == "e")),
        )

    @cached_property
    def faces(self) -> tuple:
        """Every nonempty face, the polyhedron itself included, by closure under intersection."""
        seen = {self.all_generators}
        frontier = [self.all_generators]
        while frontier:
            current = frontier.pop()
            for members in self.generator_incidence:
                smaller = current & members
                if smaller in seen or not any(kind == "v" for kind, _ in smaller):
                    continue
                seen.add(smaller)
                frontier.append(smaller)
        faces = [self.describe_generators(generators) for generators in seen]
        faces.sort(key=lambda face: (-face.dim, face.vertex_subset, face.recession_axes))
        return tuple(faces)


def _validate_points(points: Iterable[Sequence[int]]) -> list[Point]:
    cleaned = sorted({tuple(int(x) for x in p) for p in points})
    if not cleaned:
        raise SpecValidationError("a Newton polyhedron needs a nonempty support")
    nvars = len(cleaned[0])
    if nvars == 0:
        raise DimensionMismatchError("support points must have at least one coordinate")
    for p in cleaned:
        if len(p) != nvars:
            raise DimensionMismatchError(f"support point {p} has length {len(p)}, expected {nvars}")
        if any(x < 0 for x in p):
            raise SpecValidationError(f"support point {p} is not in N^{nvars}")
    return cleaned


def prune_dominated(points: Sequence[Point]) -> list[Point]:
    """Drop p whenever another point q satisfies q <= p componentwise."""
    kept = []
    for p in points:
        dominated = any(q != p and all(a <= b for a, b in zip(q, p)) for q in points)
        if not dominated:
            kept.append(p)
    return kept


def _double_description(points: Sequence[Point], nvars: int) -> list[tuple]:
    """Extreme rays of {(a, d') : a >= 0, <a, v> + d' >= 0 for v in points}."""
    dim = nvars + 1
    first = points[0]
    constraints = [tuple(1 if j == i else 0 for j in range(dim)) for i in range(nvars)]
    constraints.append(tuple(first) + (1,))
    rays = [tuple(1 if j == i else 0 for j in range(nvars)) + (-first[i],) for i in range(nvars)]
    rays.append((0,) * nvars + (1,))

    for point in points[1:]:
        row = tuple(point) + (1,)
        values = [dot(row, ray) for ray in rays]
        if min(values) >= 0:
            constraints.append(row)
            continue
        zero_sets = [
            frozenset(k for k, c in enumerate(constraints) if dot(c, ray) == 0) for ray in rays
        ]
        positive = [i for i, s in enumerate(values) if s > 0]
        negative = [i for i, s in enumerate(values) if s < 0]
        updated = [rays[i] for i, s in enumerate(values) if s >= 0]
        for i in positive:
            for j in negative:
                common = zero_sets[i] & zero_sets[j]
                if len(common) < dim - 2:
                    continue
                if any(k != i and k != j and common <= zero_sets[k] for k in range(len(rays))):
                    continue
                combined = tuple(values[i] * m - values[j] * p for p, m in zip(rays[i], rays[j]))
                updated.append(primitive(combined))
        rays = sorted(set(updated))
        constraints.append(row)
    return rays


def newton_polyhedron(support: Iterable[Sequence[int]]) -> NewtonPolyhedron:
    points = _validate_points(support)
    nvars = len(points[0])
    candidates = prune_dominated(points)
    rays = _double_description(candidates, nvars)

    facets = {}
    for ray in rays:
        normal = primitive(ray[:nvars])
        if not any(normal):
            continue
        offset = min(dot(normal, v) for v in candidates)
        facets[normal] = Facet(normal, offset)
    facet_list = tuple(facets[normal] for normal in sorted(facets))

    vertices = []
    for v in candidates:
        tight = tuple(f.normal for f in facet_list if f.is_tight(v))
        if rank_of(tight) == nvars:
            vertices.append(v)
    logger.debug(f"Newton polyhedron: {len(vertices)} vertices, {len(facet_list)} facets "
                 f"from {len(points)} support points")
    return NewtonPolyhedron(nvars=nvars, vertices=tuple(vertices), facets=facet_list)


def minkowski_sum(first: NewtonPolyhedron, second: NewtonPolyhedron) -> NewtonPolyhedron:
    if first.nvars != second.nvars:
        raise DimensionMismatchError(
            f"cannot add polyhedra in R^{first.nvars} and R^{second.nvars}"
        )
    return newton_polyhedron(
        tuple(a + b for a, b in zip(u, v)) for u in first.vertices for v in second.vertices
    )


def polynomial_polyhedron(h) -> NewtonPolyhedron:
    """Gamma(h) of an IntegerPolynomial."""
    return newton_polyhedron(h.support)


def mapping_polyhedron(components: Sequence) -> NewtonPolyhedron:
    """Gamma(h_1, ..., h_r) as the iterated Minkowski sum of the Gamma(h_i)."""
    total = polynomial_polyhedron(components[0])
    for h in components[1:]:
        total = minkowski_sum(total, polynomial_polyhedron(h))
    return total


def _check_vector(a: Sequence[int], polyhedron: NewtonPolyhedron) -> tuple:
    a = tuple(int(x) for x in a)
    if len(a) != polyhedron.nvars:
        raise DimensionMismatchError(f"vector {a} has wrong length for R^{polyhedron.nvars}")
    if any(x < 0 for x in a):
        raise SpecValidationError(f"vector {a} must be nonnegative")
    return a


def d_value(a: Sequence[int], polyhedron: NewtonPolyhedron) -> int:
    """d(a, Gamma) = min of <a, x> over Gamma, attained at a vertex because a >= 0."""
    a = _check_vector(a, polyhedron)
    return min(dot(a, v) for v in polyhedron.vertices)


def first_meet_locus(a: Sequence[int], polyhedron: NewtonPolyhedron) -> FaceDescriptor:
    a = _check_vector(a, polyhedron)
    lowest = d_value(a, polyhedron)
    generators = frozenset(
        [("v", i) for i, v in enumerate(polyhedron.vertices) if dot(a, v) == lowest]
        + [("e", j) for j, x in enumerate(a) if x == 0]
    )
    return polyhedron.describe_generators(generators)
