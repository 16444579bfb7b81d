"""
Exact rational functions in t_i = q^(-s_i) and the explicit formulas.

A ZetaRational is a Laurent polynomial over Q divided by a multiset of
binomials 1 - q^a t^b kept factored. q is a concrete prime for the whole run,
so every coefficient is an exact Fraction.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from config import settings
from errors import DegenerateMappingError, DimensionMismatchError, ZetaError
from polyring import BaseField, IntegerPolynomial
from services.fan import SimplicialCone, SubordinateFan, fundamental_points
from services.polyhedra import NewtonPolyhedron, d_value, polynomial_polyhedron
from services.torus_count import CountTable

logger = logging.getLogger(__name__)

# (s_1, s_2) -> (s, -s): t_1 -> t, t_2 -> t^-1
RATIONAL_SPECIALIZATION = ((1,), (-1,))


def q_power(q: int, exponent: int) -> Fraction:
    return Fraction(q) ** exponent


def variable_names(nvars: int) -> list[str]:
    if nvars == 1:
        return ["t"]
    return [f"t{i + 1}" for i in range(nvars)]


@lru_cache(maxsize=None)
def _laurent_ring(nvars: int):
    polynomial_ring, *_ = ring(",".join(variable_names(nvars)), QQ)
    return polynomial_ring


def _to_mp(value):
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpmathify(value)


@dataclass(frozen=True)
class LaurentPolynomial:
    """Finite sum of c_e t^e with e in Z^nvars and nonzero Fraction c_e."""
    nvars: int
    terms: tuple  # ((exponent, Fraction), ...) sorted by exponent

    @classmethod
    def from_dict(cls, nvars: int, mapping: dict) -> "LaurentPolynomial":
        cleaned = {}
        for exponent, coefficient in mapping.items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != nvars:
                raise DimensionMismatchError(f"exponent {exponent} has wrong length for {nvars} variables")
            coefficient = Fraction(coefficient)
            if coefficient:
                cleaned[exponent] = coefficient
        return cls(nvars, tuple(sorted(cleaned.items())))

    @classmethod
    def constant(cls, nvars: int, value) -> "LaurentPolynomial":
        return cls.from_dict(nvars, {(0,) * nvars: value})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coefficient=1) -> "LaurentPolynomial":
        return cls.from_dict(len(exponent), {tuple(exponent): coefficient})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        merged = self.as_dict()
        for exponent, coefficient in other.terms:
            merged[exponent] = merged.get(exponent, 0) + coefficient
        return LaurentPolynomial.from_dict(self.nvars, merged)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        if self.nvars != other.nvars:
            raise DimensionMismatchError("Laurent polynomials in different numbers of variables")
        product: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                exponent = tuple(a + b for a, b in zip(e1, e2))
                product[exponent] = product.get(exponent, 0) + c1 * c2
        return LaurentPolynomial.from_dict(self.nvars, product)

    def scale(self, factor) -> "LaurentPolynomial":
        factor = Fraction(factor)
        return LaurentPolynomial.from_dict(self.nvars, {e: c * factor for e, c in self.terms})

    def min_exponents(self) -> tuple:
        if not self.terms:
            return (0,) * self.nvars
        return tuple(min(e[i] for e, _ in self.terms) for i in range(self.nvars))

    def _ring_element(self):
        polynomial_ring = _laurent_ring(self.nvars)
        shift = self.min_exponents()
        lifted = {
            tuple(e - s for e, s in zip(exponent, shift)): QQ(c.numerator, c.denominator)
            for exponent, c in self.terms
        }
        return polynomial_ring.from_dict(lifted), shift

    def exact_divide(self, divisor: "LaurentPolynomial") -> Optional["LaurentPolynomial"]:
        """self / divisor when the quotient is a Laurent polynomial, else None."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return self
        dividend, dividend_shift = self._ring_element()
        lifted_divisor, divisor_shift = divisor._ring_element()
        quotient, remainder = dividend.div(lifted_divisor)
        if remainder:
            return None
        offset = tuple(a - b for a, b in zip(dividend_shift, divisor_shift))
        return LaurentPolynomial.from_dict(self.nvars, {
            tuple(e + o for e, o in zip(exponent, offset)): Fraction(int(c.numerator), int(c.denominator))
            for exponent, c in quotient.items()
        })

    def substitute(self, weights: Sequence[Sequence[int]]) -> "LaurentPolynomial":
        """t_i -> prod_j u_j^weights[i][j]."""
        if len(weights) != self.nvars:
            raise DimensionMismatchError(f"{len(weights)} weight rows for {self.nvars} variables")
        width = len(weights[0])
        mapped: dict = {}
        for exponent, coefficient in self.terms:
            image = tuple(sum(e * row[j] for e, row in zip(exponent, weights)) for j in range(width))
            mapped[image] = mapped.get(image, 0) + coefficient
        return LaurentPolynomial.from_dict(width, mapped)

    def evaluate_exact(self, values: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for exponent, coefficient in self.terms:
            value = coefficient
            for t, e in zip(values, exponent):
                value *= Fraction(t) ** e
            total += value
        return total

    def evaluate(self, values: Sequence) -> "mpmath.mpf":
        total = mpmath.mpf(0)
        for exponent, coefficient in self.terms:
            value = _to_mp(coefficient)
            for t, e in zip(values, exponent):
                value *= mpmath.power(t, e)
            total += value
        return total

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        names = names or variable_names(self.nvars)
        if not self.terms:
            return "0"
        pieces = []
        for index, (exponent, coefficient) in enumerate(self.terms):
            factors = []
            for name, e in zip(names, exponent):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            monomial = "*".join(factors)
            magnitude = abs(coefficient)
            if not monomial:
                body = str(magnitude)
            elif magnitude == 1:
                body = monomial
            else:
                body = f"{magnitude}*{monomial}"
            if index == 0:
                pieces.append(f"-{body}" if coefficient < 0 else body)
            else:
                pieces.append(f" - {body}" if coefficient < 0 else f" + {body}")
        return "".join(pieces)


@dataclass(frozen=True, order=True)
class Binomial:
    """1 - q^qexp * t^texps with texps != 0 and first nonzero entry positive."""
    texps: tuple
    qexp: int

    def laurent(self, q: int) -> LaurentPolynomial:
        nvars = len(self.texps)
        return LaurentPolynomial.from_dict(nvars, {(0,) * nvars: 1, self.texps: -q_power(q, self.qexp)})

    def real_part(self) -> Fraction:
        """Re(s) of the zeros of 1 - q^a q^(-b s) in the one-variable case."""
        if len(self.texps) != 1:
            raise DimensionMismatchError("real parts are defined for one-variable binomials only")
        return Fraction(self.qexp, self.texps[0])

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        names = names or variable_names(len(self.texps))
        factors = [f"q^{self.qexp}"] if self.qexp else []
        for name, e in zip(names, self.texps):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}^{e}")
        return f"(1 - {'*'.join(factors)})"


def normalize_factors(q: int, numerator: LaurentPolynomial, factors) -> tuple:
    """
    Bring every factor (qexp, texps) into Binomial shape: factors with a
    negative leading t-exponent are inverted through
    1/(1-X) = -X^-1/(1-X^-1), constants are folded into the numerator.
    """
    binomials = []
    for qexp, texps in factors:
        texps = tuple(texps)
        leading = next((e for e in texps if e), 0)
        if leading == 0:
            if qexp == 0:
                raise ZetaError("zero binomial factor in a denominator")
            numerator = numerator.scale(1 / (1 - q_power(q, qexp)))
        elif leading < 0:
            inverse = LaurentPolynomial.monomial(tuple(-e for e in texps), -q_power(q, -qexp))
            numerator = numerator * inverse
            binomials.append(Binomial(tuple(-e for e in texps), -qexp))
        else:
            binomials.append(Binomial(texps, qexp))
    return numerator, tuple(sorted(binomials))


@dataclass(frozen=True)
class ZetaRational:
    q: int
    numerator: LaurentPolynomial
    denominator: tuple  # sorted Binomials, repeated by multiplicity
    certified: bool = field(default=True, compare=False)

    @classmethod
    def build(cls, q: int, numerator: LaurentPolynomial, factors=()) -> "ZetaRational":
        """factors: (qexp, texps) pairs, each meaning 1 - q^qexp t^texps."""
        numerator, binomials = normalize_factors(q, numerator, factors)
        return cls(q, numerator, binomials)

    @classmethod
    def constant(cls, q: int, nvars: int, value) -> "ZetaRational":
        return cls(q, LaurentPolynomial.constant(nvars, value), ())

    @property
    def nvars(self) -> int:
        return self.numerator.nvars

    def _check(self, other: "ZetaRational"):
        if self.q != other.q or self.nvars != other.nvars:
            raise DimensionMismatchError("rational functions over different q or variables")

    def __add__(self, other: "ZetaRational") -> "ZetaRational":
        self._check(other)
        mine, theirs = Counter(self.denominator), Counter(other.denominator)
        common = mine | theirs
        left, right = self.numerator, other.numerator
        for binomial, multiplicity in common.items():
            for _ in range(multiplicity - mine[binomial]):
                left = left * binomial.laurent(self.q)
            for _ in range(multiplicity - theirs[binomial]):
                right = right * binomial.laurent(self.q)
        return ZetaRational(self.q, left + right, tuple(sorted(common.elements())),
                            self.certified and other.certified)

    def __mul__(self, other: "ZetaRational") -> "ZetaRational":
        self._check(other)
        return ZetaRational(self.q, self.numerator * other.numerator,
                            tuple(sorted(self.denominator + other.denominator)),
                            self.certified and other.certified)

    def scale(self, factor) -> "ZetaRational":
        return ZetaRational(self.q, self.numerator.scale(factor), self.denominator, self.certified)

    def mark_uncertified(self) -> "ZetaRational":
        return ZetaRational(self.q, self.numerator, self.denominator, certified=False)

    def canonicalize(self) -> "ZetaRational":
        """Cancel denominator binomials that divide the numerator, until none does."""
        numerator = self.numerator
        remaining = list(self.denominator)
        if numerator.is_zero():
            return ZetaRational(self.q, numerator, (), self.certified)
        changed = True
        while changed:
            changed = False
            for binomial in sorted(set(remaining)):
                quotient = numerator.exact_divide(binomial.laurent(self.q))
                if quotient is not None:
                    numerator = quotient
                    remaining.remove(binomial)
                    changed = True
                    break
        return ZetaRational(self.q, numerator, tuple(sorted(remaining)), self.certified)

    def specialize(self, weights: Sequence[Sequence[int]]) -> "ZetaRational":
        """Substitute t_i -> prod_j u_j^weights[i][j], e.g. ((1,), (-1,)) for (s, -s)."""
        numerator = self.numerator.substitute(weights)
        width = len(weights[0])
        factors = [
            (b.qexp, tuple(sum(e * row[j] for e, row in zip(b.texps, weights)) for j in range(width)))
            for b in self.denominator
        ]
        numerator, binomials = normalize_factors(self.q, numerator, factors)
        return ZetaRational(self.q, numerator, binomials, self.certified)

    def expanded_denominator(self) -> LaurentPolynomial:
        product = LaurentPolynomial.constant(self.nvars, 1)
        for binomial in self.denominator:
            product = product * binomial.laurent(self.q)
        return product

    def same_function(self, other: "ZetaRational") -> bool:
        """Cross-multiplied identity N1*D2 == N2*D1."""
        self._check(other)
        return self.numerator * other.expanded_denominator() == other.numerator * self.expanded_denominator()

    def multiplicity(self, binomial: Binomial) -> int:
        return self.denominator.count(binomial)

    def denominator_real_parts(self) -> list[Fraction]:
        return sorted({b.real_part() for b in self.denominator})

    def evaluate(self, point: Sequence, dps: Optional[int] = None):
        """Value at s = point (rational, real or complex) with mpmath."""
        if len(point) != self.nvars:
            raise DimensionMismatchError(f"{len(point)} coordinates for {self.nvars} variables")
        with mpmath.workdps(dps or settings.oracle_precision_digits):
            q = mpmath.mpf(self.q)
            values = [mpmath.power(q, -_to_mp(s)) for s in point]
            denominator = mpmath.mpf(1)
            for binomial in self.denominator:
                term = mpmath.power(q, binomial.qexp)
                for t, e in zip(values, binomial.texps):
                    term *= mpmath.power(t, e)
                denominator *= 1 - term
            return self.numerator.evaluate(values) / denominator

    def evaluate_exact(self, point: Sequence[int]) -> Fraction:
        """Exact value at an integer point s."""
        values = [q_power(self.q, -int(s)) for s in point]
        denominator = self.expanded_denominator().evaluate_exact(values)
        if denominator == 0:
            raise ZeroDivisionError(f"pole at s = {tuple(point)}")
        return self.numerator.evaluate_exact(values) / denominator

    def to_text(self) -> str:
        numerator = self.numerator.to_text()
        if not self.denominator:
            return numerator
        factors = "".join(b.to_text() for b in self.denominator)
        return f"({numerator}) / {factors}"


@dataclass(frozen=True)
class ExpMonomial:
    """q^qexp * prod t_i^sexps_i, i.e. q^(qexp - sum sexps_i s_i)."""
    qexp: int
    sexps: tuple

    def laurent(self, q: int) -> LaurentPolynomial:
        return LaurentPolynomial.monomial(self.sexps, q_power(q, self.qexp))

    def specialize(self, weights: Sequence[Sequence[int]]) -> "ExpMonomial":
        width = len(weights[0])
        return ExpMonomial(self.qexp, tuple(
            sum(e * row[j] for e, row in zip(self.sexps, weights)) for j in range(width)
        ))

    def render(self) -> str:
        """q^{-1+2s} style; s-coefficients are the negated t-exponents."""
        names = ["s"] if len(self.sexps) == 1 else [f"s{i + 1}" for i in range(len(self.sexps))]
        exponent = str(self.qexp) if self.qexp else ""
        for name, e in zip(names, self.sexps):
            coefficient = -e
            if not coefficient:
                continue
            sign = "-" if coefficient < 0 else ("+" if exponent else "")
            magnitude = "" if abs(coefficient) == 1 else str(abs(coefficient))
            exponent += f"{sign}{magnitude}{name}"
        if not exponent:
            return "1"
        return f"q^{{{exponent}}}"


@dataclass(frozen=True)
class ConeTerm:
    cone_id: str
    L_part: ZetaRational
    S_part: ZetaRational
    s_numerator: tuple = ()    # ExpMonomials summed in the numerator of S
    s_denominator: tuple = ()  # ExpMonomials X with a factor (1 - X) each

    def product(self) -> ZetaRational:
        return self.L_part * self.S_part

    def render_s(self) -> str:
        if not self.s_denominator:
            return "1"
        numerator = " + ".join(m.render() for m in self.s_numerator)
        denominator = "".join(f"(1 - {m.render()})" for m in self.s_denominator)
        return f"({numerator}) / {denominator}"


def l_factor(counts: CountTable, field: BaseField, r: int) -> ZetaRational:
    """
    q^-n sum_I Card(V_I) prod_{i in I} (q-1) q^-1 t_i / (1 - q^-1 t_i);
    the empty product is 1.
    """
    if counts.r != r:
        raise DimensionMismatchError(f"count table has {counts.r} components, expected {r}")
    q, n = field.q, counts.nvars
    total = ZetaRational.constant(q, r, 0)
    for mask, count in enumerate(counts.counts):
        if not count:
            continue
        members = [i for i in range(r) if mask >> i & 1]
        exponent = tuple(1 if i in members else 0 for i in range(r))
        coefficient = Fraction(count * (q - 1) ** len(members)) * q_power(q, -n - len(members))
        factors = [(-1, tuple(1 if j == i else 0 for j in range(r))) for i in members]
        total = total + ZetaRational.build(q, LaurentPolynomial.monomial(exponent, coefficient), factors)
    return total


def l_factor_rational(counts: CountTable, field: BaseField) -> ZetaRational:
    """
    q^-n [(q-1)^n - N_f (1-t)/(1-q^-1 t) - N_g (1-t^-1)/(1-q^-1 t^-1)
          - N_fg (1-t)(1-t^-1) / (q (1-q^-1 t)(1-q^-1 t^-1))]
    """
    if counts.r != 2:
        raise DimensionMismatchError("the rational closed form needs counts for exactly (f, g)")
    q, n = field.q, counts.nvars
    scale = q_power(q, -n)
    n_f, n_g, n_fg = counts.count([1]), counts.count([2]), counts.count([1, 2])

    one_minus_t = LaurentPolynomial.from_dict(1, {(0,): 1, (1,): -1})
    one_minus_inverse = LaurentPolynomial.from_dict(1, {(0,): 1, (-1,): -1})
    total = ZetaRational.constant(q, 1, scale * (q - 1) ** n)
    if n_f:
        total = total + ZetaRational.build(q, one_minus_t.scale(-scale * n_f), [(-1, (1,))])
    if n_g:
        total = total + ZetaRational.build(q, one_minus_inverse.scale(-scale * n_g), [(-1, (-1,))])
    if n_fg:
        numerator = (one_minus_t * one_minus_inverse).scale(-scale * n_fg / q)
        total = total + ZetaRational.build(q, numerator, [(-1, (1,)), (-1, (-1,))])
    return total


def s_delta_terms(cone: SimplicialCone, gammas: Sequence[NewtonPolyhedron]) -> tuple:
    """
    Numerator monomials q^-sigma(t) prod t_i^d(t, Gamma_i) over the
    fundamental points, and one denominator monomial per generator.
    """
    if cone.is_origin:
        return (ExpMonomial(0, (0,) * len(gammas)),), ()
    numerator = tuple(
        ExpMonomial(-sum(point), tuple(d_value(point, gamma) for gamma in gammas))
        for point in fundamental_points(cone)
    )
    denominator = tuple(
        ExpMonomial(-sum(w), tuple(d_value(w, gamma) for gamma in gammas)) for w in cone.generators
    )
    return numerator, denominator


def s_delta(cone: SimplicialCone, gammas: Sequence[NewtonPolyhedron], field: BaseField,
            specialization: Optional[Sequence[Sequence[int]]] = None) -> ZetaRational:
    numerator_terms, denominator_terms = s_delta_terms(cone, gammas)
    if specialization is not None:
        numerator_terms = tuple(m.specialize(specialization) for m in numerator_terms)
        denominator_terms = tuple(m.specialize(specialization) for m in denominator_terms)
    nvars = len(numerator_terms[0].sexps)
    numerator = LaurentPolynomial.constant(nvars, 0)
    for monomial in numerator_terms:
        numerator = numerator + monomial.laurent(field.q)
    factors = [(m.qexp, m.sexps) for m in denominator_terms]
    return ZetaRational.build(field.q, numerator, factors)


def _require_certified(report, override: bool) -> bool:
    if report is None or report.verdict:
        return True
    if not override:
        raise DegenerateMappingError(report)
    logger.warning("Mapping is degenerate; assembling the formula without certification")
    return False


def cone_terms(components: Sequence[IntegerPolynomial], fan: SubordinateFan, counts: dict,
               field: BaseField, rational: bool = False) -> list[ConeTerm]:
    """One ConeTerm per cone of the fan, the origin pseudo-cone first."""
    gammas = [polynomial_polyhedron(h) for h in components]
    specialization = RATIONAL_SPECIALIZATION if rational else None
    terms = []
    for cone in fan.all_cones():
        table = counts[cone.cone_id]
        if rational:
            l_part = l_factor_rational(table, field)
        else:
            l_part = l_factor(table, field, len(components))
        numerator_terms, denominator_terms = s_delta_terms(cone, gammas)
        if specialization is not None:
            numerator_terms = tuple(m.specialize(specialization) for m in numerator_terms)
            denominator_terms = tuple(m.specialize(specialization) for m in denominator_terms)
        s_part = s_delta(cone, gammas, field, specialization)
        terms.append(ConeTerm(cone.cone_id, l_part, s_part, numerator_terms, denominator_terms))
    return terms


def _sum_terms(terms: Sequence[ConeTerm], q: int, nvars: int) -> ZetaRational:
    total = ZetaRational.constant(q, nvars, 0)
    for term in terms:
        total = total + term.product()
    return total.canonicalize()


def assemble_Z(mapping, fan: SubordinateFan, counts: dict, field: BaseField,
               report=None, override: bool = False) -> ZetaRational:
    """Z(s, h) = L_0 + sum over cones of L_Delta S_Delta, canonicalized."""
    certified = _require_certified(report, override)
    terms = cone_terms(mapping.components, fan, counts, field)
    zeta = _sum_terms(terms, field.q, mapping.r)
    logger.info(f"Assembled Z(s, h) over {len(terms)} cone terms: "
                f"{len(zeta.numerator.terms)} numerator terms, {len(zeta.denominator)} denominator factors")
    return zeta if certified else zeta.mark_uncertified()


def assemble_Z_rational(f: IntegerPolynomial, g: IntegerPolynomial, fan: SubordinateFan, counts: dict,
                        field: BaseField, report=None, override: bool = False) -> ZetaRational:
    """Z(s, f/g) = Z(s, -s, f, g) through the closed-form L factors."""
    certified = _require_certified(report, override)
    terms = cone_terms((f, g), fan, counts, field, rational=True)
    zeta = _sum_terms(terms, field.q, 1)
    logger.info(f"Assembled Z(s, f/g) over {len(terms)} cone terms: "
                f"{len(zeta.denominator)} denominator factors")
    return zeta if certified else zeta.mark_uncertified()
