"""
Exact multivariate polynomials over Z and over prime fields.

Exponent vectors are tuples of naturals in the declaration order of the
variables; coefficients are Python ints, so nothing ever overflows.
"""
import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from sympy import isprime

from errors import DimensionMismatchError, SpecValidationError

logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]


def graded_lex_key(exponent: Exponent) -> tuple:
    """Sort key putting terms in graded-lexicographic descending order."""
    return (-sum(exponent), tuple(-e for e in exponent))


def _canonical_terms(nvars: int, mapping: Mapping[Exponent, int], modulus: Optional[int] = None):
    terms = {}
    for exponent, coefficient in mapping.items():
        exponent = tuple(int(e) for e in exponent)
        if len(exponent) != nvars:
            raise DimensionMismatchError(
                f"exponent {exponent} has length {len(exponent)}, expected {nvars}"
            )
        if any(e < 0 for e in exponent):
            raise SpecValidationError(f"negative exponent in {exponent}")
        coefficient = int(coefficient)
        if modulus is not None:
            coefficient %= modulus
        if coefficient:
            terms[exponent] = coefficient
    return tuple(sorted(terms.items(), key=lambda item: graded_lex_key(item[0])))


def _monomial_text(exponent: Exponent, variables: Sequence[str]) -> str:
    factors = []
    for name, e in zip(variables, exponent):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    return "*".join(factors)


def _render(terms, variables: Sequence[str]) -> str:
    if not terms:
        return "0"
    pieces = []
    for index, (exponent, coefficient) in enumerate(terms):
        sign = "-" if coefficient < 0 else "+"
        magnitude = abs(coefficient)
        monomial = _monomial_text(exponent, variables)
        if not monomial:
            body = str(magnitude)
        elif magnitude == 1:
            body = monomial
        else:
            body = f"{magnitude}*{monomial}"
        if index == 0:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


def default_variables(nvars: int) -> list[str]:
    if nvars <= 3:
        return ["x", "y", "z"][:nvars]
    return [f"x{i + 1}" for i in range(nvars)]


@dataclass(frozen=True)
class IntegerPolynomial:
    """h(x) = sum of c_m x^m with nonzero integer c_m."""
    nvars: int
    terms: tuple  # ((exponent, coefficient), ...) in graded-lex descending order

    @classmethod
    def from_dict(cls, nvars: int, mapping: Mapping[Exponent, int]) -> "IntegerPolynomial":
        if nvars < 1:
            raise SpecValidationError("a polynomial needs at least one variable")
        return cls(nvars, _canonical_terms(nvars, mapping))

    @classmethod
    def constant(cls, nvars: int, value: int) -> "IntegerPolynomial":
        return cls.from_dict(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "IntegerPolynomial":
        """The coordinate function x_index (0-based)."""
        exponent = tuple(1 if i == index else 0 for i in range(nvars))
        return cls.from_dict(nvars, {exponent: 1})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coefficient: int = 1) -> "IntegerPolynomial":
        return cls.from_dict(len(exponent), {tuple(exponent): coefficient})

    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    @property
    def support(self) -> tuple[Exponent, ...]:
        return tuple(exponent for exponent, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.support)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_term(self) -> int:
        return self.as_dict().get((0,) * self.nvars, 0)

    def _check_arity(self, other: "IntegerPolynomial"):
        if self.nvars != other.nvars:
            raise DimensionMismatchError(
                f"cannot combine polynomials in {self.nvars} and {other.nvars} variables"
            )

    def __add__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        self._check_arity(other)
        merged = self.as_dict()
        for exponent, coefficient in other.terms:
            merged[exponent] = merged.get(exponent, 0) + coefficient
        return IntegerPolynomial.from_dict(self.nvars, merged)

    def __neg__(self) -> "IntegerPolynomial":
        return IntegerPolynomial(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        return self + (-other)

    def __mul__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        self._check_arity(other)
        product: dict[Exponent, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                exponent = tuple(a + b for a, b in zip(e1, e2))
                product[exponent] = product.get(exponent, 0) + c1 * c2
        return IntegerPolynomial.from_dict(self.nvars, product)

    def __pow__(self, power: int) -> "IntegerPolynomial":
        if power < 0:
            raise SpecValidationError(f"exponent must be a nonnegative integer, got {power}")
        result = IntegerPolynomial.constant(self.nvars, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def scale(self, factor: int) -> "IntegerPolynomial":
        return IntegerPolynomial.from_dict(self.nvars, {e: c * factor for e, c in self.terms})

    def evaluate(self, point: Sequence[int], modulus: Optional[int] = None) -> int:
        if len(point) != self.nvars:
            raise DimensionMismatchError(f"point {tuple(point)} has wrong length for {self.nvars} variables")
        total = 0
        for exponent, coefficient in self.terms:
            value = coefficient
            for x, e in zip(point, exponent):
                value *= pow(x, e, modulus) if modulus else x ** e
            total += value
        return total % modulus if modulus else total

    def derivative(self, index: int) -> "IntegerPolynomial":
        """Formal partial derivative with respect to x_index (0-based)."""
        if not 0 <= index < self.nvars:
            raise DimensionMismatchError(f"variable index {index} out of range")
        result = {}
        for exponent, coefficient in self.terms:
            e = exponent[index]
            if e:
                lowered = exponent[:index] + (e - 1,) + exponent[index + 1:]
                result[lowered] = result.get(lowered, 0) + coefficient * e
        return IntegerPolynomial.from_dict(self.nvars, result)

    def to_text(self, variables: Optional[Sequence[str]] = None) -> str:
        return _render(self.terms, variables or default_variables(self.nvars))

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class BaseField:
    """The local field data the computation needs: residue field F_p, q = p, uniformizer p."""
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not isprime(self.p):
            raise SpecValidationError(f"p = {self.p} is not a prime")

    @property
    def q(self) -> int:
        return self.p

    @property
    def uniformizer(self) -> int:
        return self.p


@dataclass(frozen=True)
class PrimeFieldPolynomial:
    """A polynomial over F_p with coefficients in [1, p)."""
    nvars: int
    p: int
    terms: tuple

    @property
    def support(self) -> tuple[Exponent, ...]:
        return tuple(exponent for exponent, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def evaluate(self, point: Sequence[int]) -> int:
        total = 0
        for exponent, coefficient in self.terms:
            value = coefficient
            for x, e in zip(point, exponent):
                value = value * pow(x, e, self.p) % self.p
            total += value
        return total % self.p

    def derivative(self, index: int) -> "PrimeFieldPolynomial":
        result = {}
        for exponent, coefficient in self.terms:
            e = exponent[index]
            if e:
                lowered = exponent[:index] + (e - 1,) + exponent[index + 1:]
                result[lowered] = result.get(lowered, 0) + coefficient * e
        return PrimeFieldPolynomial(self.nvars, self.p, _canonical_terms(self.nvars, result, self.p))

    def scale(self, unit: int) -> "PrimeFieldPolynomial":
        scaled = {e: c * unit for e, c in self.terms}
        return PrimeFieldPolynomial(self.nvars, self.p, _canonical_terms(self.nvars, scaled, self.p))

    def __mul__(self, other: "PrimeFieldPolynomial") -> "PrimeFieldPolynomial":
        product: dict[Exponent, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                exponent = tuple(a + b for a, b in zip(e1, e2))
                product[exponent] = product.get(exponent, 0) + c1 * c2
        return PrimeFieldPolynomial(self.nvars, self.p, _canonical_terms(self.nvars, product, self.p))

    def to_text(self, variables: Optional[Sequence[str]] = None) -> str:
        return _render(self.terms, variables or default_variables(self.nvars))


@dataclass(frozen=True)
class PolyMapping:
    """h = (h_1, ..., h_r) with every h_i in Z[x_1..x_n], r <= n."""
    components: tuple

    def __post_init__(self):
        components = tuple(self.components)
        object.__setattr__(self, "components", components)
        if not components:
            raise SpecValidationError("a polynomial mapping needs at least one component")
        nvars = components[0].nvars
        for index, h in enumerate(components):
            if h.nvars != nvars:
                raise DimensionMismatchError(
                    f"component {index + 1} has {h.nvars} variables, expected {nvars}"
                )
            if h.is_constant():
                raise SpecValidationError(f"component {index + 1} is constant")
        if len(components) > nvars:
            raise SpecValidationError(
                f"mapping has {len(components)} components but only {nvars} variables (need r <= n)"
            )

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    @property
    def r(self) -> int:
        return len(self.components)

    def check_for_field(self, field: BaseField) -> None:
        """Each component must be nonzero modulo p."""
        for index, h in enumerate(self.components):
            if reduce_mod_p(h, field).is_zero():
                raise SpecValidationError(
                    f"component {index + 1} vanishes identically modulo {field.p}"
                )

    def check_vanishes_at_origin(self) -> None:
        for index, h in enumerate(self.components):
            if h.constant_term() != 0:
                raise SpecValidationError(
                    f"component {index + 1} does not vanish at the origin "
                    f"(constant term {h.constant_term()})"
                )


def face_function(h: IntegerPolynomial, a: Sequence[int]) -> IntegerPolynomial:
    """
    The sub-sum of h over the monomials on the first meet locus F(a, Gamma(h)).

    Since a >= 0 the minimum of <a, .> over Gamma(h) is attained on the support,
    so no hull is needed here. a = 0 returns h itself.
    """
    a = tuple(int(x) for x in a)
    if len(a) != h.nvars:
        raise DimensionMismatchError(f"vector {a} has wrong length for {h.nvars} variables")
    if any(x < 0 for x in a):
        raise SpecValidationError(f"face vectors must be nonnegative, got {a}")
    if h.is_zero():
        return h
    pairings = {exponent: sum(x * e for x, e in zip(a, exponent)) for exponent in h.support}
    lowest = min(pairings.values())
    return IntegerPolynomial(
        h.nvars, tuple((e, c) for e, c in h.terms if pairings[e] == lowest)
    )


def reduce_mod_p(h: IntegerPolynomial, field: BaseField) -> PrimeFieldPolynomial:
    return PrimeFieldPolynomial(h.nvars, field.p, _canonical_terms(h.nvars, h.as_dict(), field.p))


def jacobian_row(h: IntegerPolynomial, j: int) -> IntegerPolynomial:
    """dh/dx_j for 1 <= j <= nvars."""
    if not 1 <= j <= h.nvars:
        raise DimensionMismatchError(f"variable index {j} out of range 1..{h.nvars}")
    return h.derivative(j - 1)

