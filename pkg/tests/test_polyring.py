import pytest

from errors import DimensionMismatchError, SpecValidationError
from polyring import (
    BaseField, IntegerPolynomial, PolyMapping, face_function, jacobian_row, reduce_mod_p,
)

x = IntegerPolynomial.variable(2, 0)
y = IntegerPolynomial.variable(2, 1)


def test_arithmetic_and_canonical_text():
    h = (x + y) ** 2
    assert h.as_dict() == {(2, 0): 1, (1, 1): 2, (0, 2): 1}
    assert h.to_text() == "x^2 + 2*x*y + y^2"
    assert (x * x - y).to_text(["u", "v"]) == "u^2 - v"
    assert (h - h).is_zero()
    assert (x * x * y).is_monomial()


def test_evaluate_over_integers_and_modulo():
    h = x * x - y
    assert h.evaluate((3, 4)) == 5
    assert h.evaluate((3, 4), 5) == 0
    with pytest.raises(DimensionMismatchError):
        h.evaluate((1,))


def test_derivative_and_jacobian_row():
    h = x * x * y + IntegerPolynomial.constant(2, 7)
    assert h.derivative(0).as_dict() == {(1, 1): 2}
    assert jacobian_row(h, 2).as_dict() == {(2, 0): 1}
    with pytest.raises(DimensionMismatchError):
        jacobian_row(h, 3)


def test_face_function_picks_the_first_meet_locus():
    f = x * x - y
    assert face_function(f, (1, 0)).to_text() == "-y"
    assert face_function(f, (1, 2)) == f
    assert face_function(f, (0, 1)).to_text() == "x^2"
    assert face_function(f, (0, 0)) == f
    with pytest.raises(SpecValidationError):
        face_function(f, (-1, 0))


def test_reduce_mod_p_drops_multiples_of_p():
    field = BaseField(3)
    h = IntegerPolynomial.from_dict(2, {(2, 0): 3, (0, 1): 4})
    reduced = reduce_mod_p(h, field)
    assert reduced.terms == (((0, 1), 1),)
    assert reduced.evaluate((2, 2)) == 2
    assert reduced.derivative(1).terms == (((0, 0), 1),)


def test_base_field_requires_a_prime():
    assert BaseField(7).q == 7
    with pytest.raises(SpecValidationError):
        BaseField(9)


def test_mapping_preconditions():
    with pytest.raises(SpecValidationError):
        PolyMapping(())
    with pytest.raises(SpecValidationError):
        PolyMapping((x, IntegerPolynomial.constant(2, 3)))
    with pytest.raises(SpecValidationError):
        PolyMapping((x, y, x * y))
    with pytest.raises(DimensionMismatchError):
        PolyMapping((x, IntegerPolynomial.variable(3, 0)))

    mapping = PolyMapping((x + IntegerPolynomial.constant(2, 1), y))
    with pytest.raises(SpecValidationError):
        mapping.check_vanishes_at_origin()
    with pytest.raises(SpecValidationError):
        PolyMapping((x.scale(5), y)).check_for_field(BaseField(5))
