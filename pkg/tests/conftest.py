from fractions import Fraction

import pytest

import database
from config import settings
from polyparse import parse_mapping
from polyring import BaseField
from problem import spec_from_dict
from services.fan import build_fan
from services.polyhedra import mapping_polyhedron
from services.torus_count import cone_faces, count_strata
from services.zeta_core import LaurentPolynomial, ZetaRational

XY = ["x", "y"]


@pytest.fixture
def worked_mapping():
    """(f, g) = (x^2 - y, x^2*y)."""
    return parse_mapping(["x^2 - y", "x^2*y"], XY)


@pytest.fixture
def worked_fan(worked_mapping):
    return build_fan(mapping_polyhedron(worked_mapping.components))


@pytest.fixture
def surveyed():
    """Count tables of every cone of a fan, keyed by cone id."""
    def _survey(mapping, fan, field):
        return {
            cone.cone_id: count_strata(cone_faces(mapping, cone.barycenter, field), field, cone.cone_id)
            for cone in fan.all_cones()
        }
    return _survey


@pytest.fixture
def worked_spec():
    def _spec(prime=5, **options):
        return spec_from_dict({
            "variables": XY,
            "mode": "rational",
            "polynomials": ["x^2 - y", "x^2*y"],
            "prime": prime,
            "options": options,
        })
    return _spec


@pytest.fixture(autouse=True)
def no_spot_check(monkeypatch):
    """Keep runs fast; tests that need the spot check call it directly."""
    monkeypatch.setattr(settings, "spot_check_samples", 0)


@pytest.fixture
def memory_cache(monkeypatch):
    database.configure_engine("sqlite:///:memory:")
    database.init_db()
    monkeypatch.setattr(settings, "count_cache_enabled", True)
    yield database
    database.clear_cache()


def worked_closed_form(q: int) -> ZetaRational:
    """Closed form of Z(s, f/g) for (x^2 - y, x^2*y) in t = q^-s."""
    F = Fraction
    L = {
        (0,): F(q) - F(1, q) - 2,
        (-2,): -F(1, q ** 4) + F(1, q ** 2) + 2 * F(1, q),
        (-1,): F(1, q ** 3) - F(1, q ** 2),
        (-3,): F(1, q ** 3) - F(1, q ** 2) - F(1, q),
        (1,): F(1, q),
    }
    numerator = LaurentPolynomial.from_dict(1, {e: c * F(q - 1, q ** 2) for e, c in L.items()})
    factors = [(-1, (-1,)), (-1, (1,)), (-1, (-2,)), (-3, (-2,))]
    return ZetaRational.build(q, numerator, factors)


@pytest.fixture
def closed_form():
    return worked_closed_form


@pytest.fixture
def field5():
    return BaseField(5)
