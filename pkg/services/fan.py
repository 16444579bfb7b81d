"""
Simplicial fans subordinate to a Newton polyhedron.

The normal fan is read off the face lattice: the cone of a face tau is
strictly spanned by the normals of the facets containing tau. Cones that are
not simplicial are split with a placing triangulation over their own rays, and
the relatively open faces of that triangulation lying inside the open cone
become the pieces of the partition.
"""
import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

from sympy import Matrix

from errors import DimensionMismatchError, TriangulationError
from services.polyhedra import FaceDescriptor, NewtonPolyhedron, first_meet_locus, rank_of

logger = logging.getLogger(__name__)

ORIGIN_ID = "0"


def _nonsingular_rows(generators: Sequence[tuple]) -> tuple[tuple, Matrix]:
    """Row indices whose square submatrix of the generator matrix is invertible."""
    nvars = len(generators[0])
    size = len(generators)
    for rows in itertools.combinations(range(nvars), size):
        block = Matrix([[w[j] for w in generators] for j in rows])
        if block.det() != 0:
            return rows, block
    raise TriangulationError(f"generators {list(generators)} are linearly dependent")


@dataclass(frozen=True)
class SimplicialCone:
    """The relatively open cone sum of lambda_i w_i with every lambda_i > 0."""
    cone_id: str
    generators: tuple   # primitive facet normals, linearly independent
    barycenter: tuple
    parent_face: Optional[FaceDescriptor] = None

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def is_origin(self) -> bool:
        return not self.generators

    @cached_property
    def _coordinate_system(self) -> tuple:
        rows, block = _nonsingular_rows(self.generators)
        determinant = int(block.det())
        adjugate = [[int(x) for x in row] for row in block.adjugate().tolist()]
        if determinant < 0:
            determinant = -determinant
            adjugate = [[-x for x in row] for row in adjugate]
        return rows, adjugate, determinant

    def scaled_coordinates(self, point: Sequence[int]) -> Optional[tuple]:
        """
        Integers N with point = sum(N_i w_i) / D, D the returned positive
        denominator; None when the point is outside the linear span.
        """
        rows, adjugate, determinant = self._coordinate_system
        picked = [point[j] for j in rows]
        numerators = tuple(sum(a * x for a, x in zip(row, picked)) for row in adjugate)
        for j in range(len(point)):
            total = sum(n * w[j] for n, w in zip(numerators, self.generators))
            if total != point[j] * determinant:
                return None
        return numerators, determinant

    def coefficients(self, point: Sequence[int]) -> Optional[tuple]:
        solved = self.scaled_coordinates(point)
        if solved is None:
            return None
        numerators, determinant = solved
        return tuple(Fraction(n, determinant) for n in numerators)

    def contains_relative_interior(self, point: Sequence[int]) -> bool:
        if self.is_origin:
            return not any(point)
        if len(point) != len(self.barycenter):
            raise DimensionMismatchError(f"point {tuple(point)} has wrong length")
        solved = self.scaled_coordinates(point)
        return solved is not None and all(n > 0 for n in solved[0])

    def describe(self) -> str:
        if self.is_origin:
            return "{0}"
        return " + ".join(f"{w}R>0" for w in self.generators)


def fundamental_points(cone: SimplicialCone) -> tuple:
    """
    Lattice points sum(lambda_i w_i) with 0 < lambda_i <= 1.

    Candidates range over the bounding box of the closed parallelepiped,
    projected to rows where the generator matrix is invertible.
    """
    if cone.is_origin:
        return ((0,) * len(cone.barycenter),)
    rows, adjugate, determinant = cone._coordinate_system
    bounds = [range(0, sum(w[j] for w in cone.generators) + 1) for j in rows]
    nvars = len(cone.barycenter)
    found = []
    for picked in itertools.product(*bounds):
        numerators = [sum(a * x for a, x in zip(row, picked)) for row in adjugate]
        if not all(0 < n <= determinant for n in numerators):
            continue
        point = []
        for j in range(nvars):
            total = sum(n * w[j] for n, w in zip(numerators, cone.generators))
            if total % determinant:
                break
            point.append(total // determinant)
        else:
            found.append(tuple(point))
    return tuple(sorted(found))


def normal_fan(polyhedron: NewtonPolyhedron) -> list[tuple[FaceDescriptor, tuple]]:
    """(tau, rays of Delta_tau) for every face tau; the whole polyhedron maps to {0}."""
    fan = []
    for face in polyhedron.faces:
        rays = tuple(sorted(polyhedron.facets[k].normal for k in face.tight_facets))
        fan.append((face, rays))
    return fan


def _ordered_rays(rays: Sequence[tuple], seed: int) -> list[tuple]:
    ordered = sorted(set(rays))
    if seed:
        random.Random(seed).shuffle(ordered)
    return ordered


def _solve_in_basis(basis: Sequence[tuple], target: tuple) -> tuple:
    columns = Matrix([list(w) for w in basis]).T
    solution, parameters = columns.gauss_jordan_solve(Matrix(list(target)))
    return tuple(solution)


def triangulate(rays: Sequence[tuple], seed: int = 0) -> list[tuple]:
    """
    Placing triangulation of the pointed cone spanned by rays.

    Rays are placed in lexicographic order (shuffled by a nonzero seed). A ray
    outside the current span is coned over every simplex; otherwise it is
    joined to every boundary facet it can see. Returns maximal simplices as
    tuples of rays.
    """
    ordered = _ordered_rays(rays, seed)
    if not ordered:
        return []
    simplices = [(ordered[0],)]
    span = 1
    for ray in ordered[1:]:
        if rank_of(tuple(simplices[0]) + (ray,)) > span:
            simplices = [simplex + (ray,) for simplex in simplices]
            span += 1
            continue
        facet_count: dict[frozenset, int] = {}
        for simplex in simplices:
            for opposite in simplex:
                facet = frozenset(w for w in simplex if w != opposite)
                facet_count[facet] = facet_count.get(facet, 0) + 1
        added = []
        for simplex in simplices:
            mu = _solve_in_basis(simplex, ray)
            for opposite, coefficient in zip(simplex, mu):
                facet = frozenset(w for w in simplex if w != opposite)
                if facet_count[facet] == 1 and coefficient < 0:
                    added.append(tuple(sorted(facet)) + (ray,))
        if not added:
            raise TriangulationError(f"ray {ray} is not an extreme ray of the cone spanned by {ordered}")
        simplices.extend(added)
    if span != rank_of(tuple(ordered)):
        raise TriangulationError(f"rays {ordered} do not span a cone of dimension {span}")
    return [tuple(sorted(simplex)) for simplex in simplices]


def _open_pieces(face: FaceDescriptor, rays: tuple, polyhedron: NewtonPolyhedron, seed: int) -> list[tuple]:
    """Generator sets of the open simplicial pieces partitioning Delta_tau."""
    if rank_of(rays) == len(rays):
        return [rays]
    pieces = set()
    for simplex in triangulate(rays, seed):
        for size in range(1, len(simplex) + 1):
            for subset in itertools.combinations(simplex, size):
                pieces.add(tuple(sorted(subset)))
    inside = []
    for subset in sorted(pieces):
        barycenter = tuple(sum(column) for column in zip(*subset))
        if first_meet_locus(barycenter, polyhedron).tight_facets == face.tight_facets:
            inside.append(subset)
    return inside


def _direction_key(cone: SimplicialCone) -> tuple:
    total = sum(cone.barycenter)
    return tuple(-Fraction(x, total) for x in cone.barycenter), cone.generators


@dataclass(frozen=True)
class SubordinateFan:
    polyhedron: NewtonPolyhedron
    cones: tuple        # SimplicialCones partitioning R_+^n minus the origin
    origin: SimplicialCone
    seed: int = 0
    by_face: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def all_cones(self) -> tuple:
        """The origin pseudo-cone followed by the proper cones."""
        return (self.origin,) + self.cones

    def rays(self) -> tuple:
        return tuple(sorted({w for cone in self.cones for w in cone.generators}))

    def locate(self, point: Sequence[int]) -> SimplicialCone:
        point = tuple(int(x) for x in point)
        if len(point) != self.polyhedron.nvars:
            raise DimensionMismatchError(f"point {point} has wrong length")
        if not any(point):
            return self.origin
        face = first_meet_locus(point, self.polyhedron)
        for cone in self.by_face.get(face.tight_facets, self.cones):
            if cone.contains_relative_interior(point):
                return cone
        raise TriangulationError(f"no cone of the fan contains {point}")


def build_fan(polyhedron: NewtonPolyhedron, seed: int = 0) -> SubordinateFan:
    nvars = polyhedron.nvars
    pieces = []
    for face, rays in normal_fan(polyhedron):
        if not rays:
            continue
        for generators in _open_pieces(face, rays, polyhedron, seed):
            barycenter = tuple(sum(column) for column in zip(*generators))
            pieces.append(SimplicialCone("", generators, barycenter, face))
    pieces.sort(key=_direction_key)
    cones = tuple(
        SimplicialCone(f"D{i}", cone.generators, cone.barycenter, cone.parent_face)
        for i, cone in enumerate(pieces, start=1)
    )
    whole = next(face for face, rays in normal_fan(polyhedron) if not rays)
    origin = SimplicialCone(ORIGIN_ID, (), (0,) * nvars, whole)
    by_face: dict = {}
    for cone in cones:
        by_face.setdefault(cone.parent_face.tight_facets, []).append(cone)
    logger.info(f"Subordinate fan: {len(cones)} cones on {len({w for c in cones for w in c.generators})} rays"
                f" (seed {seed})")
    return SubordinateFan(polyhedron, cones, origin, seed, by_face)
