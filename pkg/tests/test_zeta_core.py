from fractions import Fraction

import mpmath
import pytest

from errors import DegenerateMappingError, ZetaError
from polyparse import parse_mapping
from polyring import BaseField
from services.fan import build_fan
from services.polyhedra import mapping_polyhedron
from services.torus_count import CountTable, check_nondegeneracy
from services.zeta_core import (
    RATIONAL_SPECIALIZATION, Binomial, ExpMonomial, LaurentPolynomial, ZetaRational, assemble_Z,
    assemble_Z_rational, cone_terms, l_factor, l_factor_rational,
)

Q = 5


def poly(mapping):
    return LaurentPolynomial.from_dict(1, {(e,): c for e, c in mapping.items()})


def test_laurent_arithmetic_and_division():
    one_minus_t = poly({0: 1, 1: -1})
    product = one_minus_t * poly({0: 1, 1: 1})
    assert product == poly({0: 1, 2: -1})
    assert product.exact_divide(one_minus_t) == poly({0: 1, 1: 1})
    assert poly({0: 1, 2: 1}).exact_divide(one_minus_t) is None
    # negative exponents are shifted before dividing
    shifted = poly({-3: 1, -1: -1})
    assert shifted.exact_divide(poly({-1: 1, 0: -1})) == poly({-2: 1, -1: 1})


def test_substitution_and_evaluation():
    p = LaurentPolynomial.from_dict(2, {(1, 0): 2, (0, 1): 3})
    assert p.substitute(RATIONAL_SPECIALIZATION) == poly({1: 2, -1: 3})
    assert p.evaluate_exact([Fraction(1, 2), Fraction(1, 3)]) == 2
    assert p.to_text() == "3*t2 + 2*t1"


def test_negative_leading_exponent_is_flipped():
    z = ZetaRational.build(Q, LaurentPolynomial.constant(1, 1), [(-1, (-2,))])
    assert z.denominator == (Binomial((2,), 1),)
    assert z.numerator == poly({2: -Q})
    # 1/(1 - q^-1 t^-2) at s = -1, i.e. t = q
    assert z.evaluate_exact([-1]) == Fraction(1) / (1 - Fraction(1, Q) * Fraction(1, Q ** 2))


def test_zero_binomial_is_rejected_and_constants_fold():
    with pytest.raises(ZetaError):
        ZetaRational.build(Q, LaurentPolynomial.constant(1, 1), [(0, (0,))])
    folded = ZetaRational.build(Q, LaurentPolynomial.constant(1, 1), [(1, (0,))])
    assert folded.denominator == ()
    assert folded.numerator == poly({0: Fraction(1, 1 - Q)})


def test_sum_and_canonical_form():
    a = ZetaRational.build(Q, poly({0: 1}), [(1, (1,))])
    b = ZetaRational.build(Q, poly({1: -Q}), [(1, (1,))])
    total = (a + b).canonicalize()
    assert total.denominator == ()
    assert total.numerator == poly({0: 1})
    assert (a + b).same_function(ZetaRational.constant(Q, 1, 1))


def test_specialize_and_multiplicity():
    z = ZetaRational.build(Q, LaurentPolynomial.constant(2, 1), [(-1, (1, 0)), (-1, (0, 1))])
    special = z.specialize(RATIONAL_SPECIALIZATION)
    assert special.multiplicity(Binomial((1,), -1)) == 1
    assert special.multiplicity(Binomial((1,), 1)) == 1
    assert special.denominator_real_parts() == [Fraction(-1), Fraction(1)]


def test_mpmath_and_exact_evaluation_agree(worked_mapping, worked_fan, surveyed, field5):
    counts = surveyed(worked_mapping, worked_fan, field5)
    f, g = worked_mapping.components
    zeta = assemble_Z_rational(f, g, worked_fan, counts, field5)
    with mpmath.workdps(40):
        numeric = zeta.evaluate([-2])
        exact = zeta.evaluate_exact([-2])
        assert abs(numeric - mpmath.mpf(exact.numerator) / exact.denominator) < mpmath.mpf(10) ** -30


def test_exp_monomial_rendering():
    assert ExpMonomial(-2, (-2,)).render() == "q^{-2+2s}"
    assert ExpMonomial(-1, (1,)).render() == "q^{-1-s}"
    assert ExpMonomial(0, (0,)).render() == "1"
    assert ExpMonomial(-3, (1, 2)).render() == "q^{-3-s1-2s2}"


def test_rational_l_factor_is_the_specialized_multivariate_one():
    field = BaseField(Q)
    table = CountTable("0", Q, 2, (9, 4, 2, 1))
    multivariate = l_factor(table, field, 2).specialize(RATIONAL_SPECIALIZATION)
    assert multivariate.same_function(l_factor_rational(table, field))


def test_l_factor_of_an_empty_stratum_is_the_torus_measure():
    field = BaseField(Q)
    table = CountTable("D1", Q, 2, (16, 0, 0, 0))
    assert l_factor(table, field, 2).same_function(ZetaRational.constant(Q, 2, Fraction(16, 25)))


def test_worked_example_cone_rows(worked_mapping, worked_fan, surveyed, field5):
    counts = surveyed(worked_mapping, worked_fan, field5)
    terms = {t.cone_id: t for t in cone_terms(worked_mapping.components, worked_fan, counts, field5, rational=True)}
    assert terms["0"].render_s() == "1"
    assert terms["D1"].render_s() == "(q^{-1+2s}) / (1 - q^{-1+2s})"
    assert terms["D2"].render_s() == "(q^{-2+2s} + q^{-4+4s}) / (1 - q^{-1+2s})(1 - q^{-3+2s})"
    assert terms["D4"].render_s() == "(q^{-4+3s}) / (1 - q^{-1+s})(1 - q^{-3+2s})"
    assert len(terms["D2"].s_numerator) == 2


def test_multivariate_formula_specializes_to_the_rational_one(worked_mapping, worked_fan, surveyed, field5):
    counts = surveyed(worked_mapping, worked_fan, field5)
    f, g = worked_mapping.components
    multivariate = assemble_Z(worked_mapping, worked_fan, counts, field5)
    rational = assemble_Z_rational(f, g, worked_fan, counts, field5)
    assert multivariate.specialize(RATIONAL_SPECIALIZATION).same_function(rational)
    assert multivariate.evaluate_exact([0, 0]) == 1


def test_monomial_zeta_is_a_product_of_geometric_series(surveyed):
    field = BaseField(3)
    mapping = parse_mapping(["x*y"], ["x", "y"])
    fan = build_fan(mapping_polyhedron(mapping.components))
    counts = surveyed(mapping, fan, field)
    zeta = assemble_Z(mapping, fan, counts, field)
    one_variable = ZetaRational.build(3, LaurentPolynomial.constant(1, Fraction(2, 3)), [(-1, (1,))])
    assert zeta.same_function(one_variable * one_variable)
    assert zeta.denominator == (Binomial((1,), -1), Binomial((1,), -1))


def test_degenerate_mapping_is_refused_unless_overridden(surveyed):
    field = BaseField(3)
    mapping = parse_mapping(["(x + y)^2", "x*y"], ["x", "y"])
    fan = build_fan(mapping_polyhedron(mapping.components))
    report = check_nondegeneracy(mapping, fan, field)
    counts = surveyed(mapping, fan, field)
    f, g = mapping.components
    with pytest.raises(DegenerateMappingError):
        assemble_Z_rational(f, g, fan, counts, field, report)
    zeta = assemble_Z_rational(f, g, fan, counts, field, report, override=True)
    assert not zeta.certified
