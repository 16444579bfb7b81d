"""
Formula-free numerical check: truncated p-adic integration modulo p^M.

O^n is cut into the cosets x + (p^M O)^n. Monomial components are integrated
exactly, coordinate by coordinate, including the geometric tail on p^M O.
Any other component is exact on a coset when h(x) is nonzero mod p^M and is
otherwise bracketed.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from config import settings
from errors import BudgetExceededError, DimensionMismatchError, OracleRegionError
from polyring import BaseField, IntegerPolynomial
from services.torus_count import power_mod

logger = logging.getLogger(__name__)

INT64_SAFE_MODULUS = 3_037_000_499  # largest m with (m - 1)^2 + m < 2^63


@dataclass(frozen=True)
class TruncationEstimate:
    level: int
    value: object     # mpf: exact contribution of the resolved cosets
    lower: object     # mpf bracket of the full integral
    upper: object     # mpf, or +inf when a negative exponent meets an unresolved coset
    resolved_mass: Fraction

    @property
    def width(self):
        return self.upper - self.lower

    def brackets(self, reference, tolerance=0) -> bool:
        return self.lower - tolerance <= reference <= self.upper + tolerance


def p_adic_valuation(value: int, p: int) -> int:
    if value == 0:
        raise ValueError("valuation of zero")
    order = 0
    while value % p == 0:
        value //= p
        order += 1
    return order


def _valuations(values: np.ndarray, p: int, level: int) -> np.ndarray:
    """ord_p of residues mod p^level; zero residues get level."""
    orders = np.zeros_like(values)
    remaining = values.copy()
    zero = remaining == 0
    for _ in range(level):
        divisible = (remaining % p == 0) & ~zero
        orders += divisible
        remaining = np.where(divisible, remaining // p, remaining)
    orders[zero] = level
    return orders.astype(np.int64)


def _evaluate_mod(h: IntegerPolynomial, coordinates: list, modulus: int) -> np.ndarray:
    total = np.zeros_like(coordinates[0])
    for exponent, coefficient in h.terms:
        term = np.full_like(total, coefficient % modulus)
        for j, e in enumerate(exponent):
            if e:
                term = term * power_mod(coordinates[j], e, modulus) % modulus
        total = (total + term) % modulus
    return total


def check_region(s0: Sequence[Fraction], band=None) -> None:
    """Multivariate mode needs every s_i > 0; f/g mode needs s inside the holomorphy band."""
    if band is not None:
        if not band.contains(Fraction(s0[0])):
            raise OracleRegionError(
                f"s = {s0[0]} is outside the band ({band.beta_tilde}, {band.alpha_tilde})"
            )
        return
    if any(Fraction(s) <= 0 for s in s0):
        raise OracleRegionError(f"every s_i must be positive, got {tuple(str(s) for s in s0)}")


def _residue_coordinates(index: np.ndarray, nvars: int, modulus: int) -> list:
    """Split flat indices into n residues mod p^M; object arrays once a product of residues overflows int64."""
    dtype = np.int64 if modulus <= INT64_SAFE_MODULUS else object
    coordinates = []
    for _ in range(nvars):
        coordinates.append((index % modulus).astype(dtype))
        index = index // modulus
    return coordinates


def _signatures(components: Sequence[IntegerPolynomial], field: BaseField, level: int) -> tuple:
    """Distinct coset signatures (coordinate orders, non-monomial orders) and their counts."""
    nvars = components[0].nvars
    p = field.p
    modulus = p ** level
    total = modulus ** nvars
    if total > settings.oracle_budget:
        raise BudgetExceededError("oracle enumeration", total, settings.oracle_budget, "lower the level M")
    general = [h for h in components if not h.is_monomial()]
    found: dict = {}
    for start in range(0, total, settings.block_size):
        index = np.arange(start, min(start + settings.block_size, total), dtype=np.int64)
        coordinates = _residue_coordinates(index, nvars, modulus)
        columns = [_valuations(c, p, level) for c in coordinates]
        columns += [_valuations(_evaluate_mod(h, coordinates, modulus), p, level) for h in general]
        rows, counts = np.unique(np.stack(columns, axis=1), axis=0, return_counts=True)
        for row, count in zip(rows, counts):
            key = tuple(int(x) for x in row)
            found[key] = found.get(key, 0) + int(count)
    return found, total


def truncated_zeta(components: Sequence[IntegerPolynomial], s0: Sequence, field: BaseField,
                   level: int, band=None, dps: Optional[int] = None) -> TruncationEstimate:
    """Bracket the integral of prod |h_i|^(s_i) over O^n using residues mod p^level."""
    if len(s0) != len(components):
        raise DimensionMismatchError(f"{len(s0)} exponents for {len(components)} components")
    if level < 1:
        raise OracleRegionError("the truncation level must be at least 1")
    s0 = [Fraction(s) for s in s0]
    check_region(s0, band)
    nvars = components[0].nvars
    q = field.q
    monomials = [(i, h) for i, h in enumerate(components) if h.is_monomial()]
    general = [i for i, h in enumerate(components) if not h.is_monomial()]
    signatures, total = _signatures(components, field, level)

    with mpmath.workdps(dps or settings.oracle_precision_digits):
        Q = mpmath.mpf(q)
        s = [mpmath.mpf(x.numerator) / x.denominator for x in s0]
        coset = mpmath.power(Q, -level)
        deep_exponent = []
        for j in range(nvars):
            e = sum(s[i] * h.support[0][j] for i, h in monomials)
            if 1 + e <= 0:
                raise OracleRegionError(f"|x_{j + 1}|^{mpmath.nstr(e, 10)} is not integrable near 0")
            deep_exponent.append(e)
        tails = [
            (1 - 1 / Q) * mpmath.power(Q, -level * (1 + e)) / (1 - mpmath.power(Q, -(1 + e)))
            for e in deep_exponent
        ]

        value = mpmath.mpf(0)
        lower = mpmath.mpf(0)
        upper = mpmath.mpf(0)
        resolved = 0
        for key in sorted(signatures):
            count = signatures[key]
            orders, general_orders = key[:nvars], key[nvars:]
            factor = mpmath.mpf(1)
            for j, order in enumerate(orders):
                factor *= tails[j] if order >= level else coset
            for i, h in monomials:
                exponent, coefficient = h.terms[0]
                order = p_adic_valuation(coefficient, field.p)
                order += sum(e * v for e, v in zip(exponent, orders) if v < level)
                factor *= mpmath.power(Q, -order * s[i])
            low, high = factor, factor
            exact = True
            for i, order in zip(general, general_orders):
                if order < level:
                    scale = mpmath.power(Q, -order * s[i])
                    low, high = low * scale, high * scale
                    continue
                if s[i] == 0:
                    continue
                exact = False
                bound = mpmath.power(Q, -level * s[i])
                if s[i] > 0:
                    low, high = mpmath.mpf(0), high * bound
                else:
                    low, high = low * bound, mpmath.inf
            if exact:
                resolved += count
                value += count * low
            lower += count * low
            upper += count * high if high != mpmath.inf else mpmath.inf

        estimate = TruncationEstimate(level, value, lower, upper, Fraction(resolved, total))
    logger.info(f"Oracle level {level}: value {mpmath.nstr(value, 15)}, "
                f"bracket width {mpmath.nstr(estimate.width, 5)}, resolved mass {float(estimate.resolved_mass):.6f}")
    return estimate


def truncated_zeta_rational(f: IntegerPolynomial, g: IntegerPolynomial, s: Fraction, field: BaseField,
                            level: int, band=None, dps: Optional[int] = None) -> TruncationEstimate:
    """The integral of |f/g|^s, i.e. exponents (s, -s) on (f, g)."""
    s = Fraction(s)
    return truncated_zeta((f, g), (s, -s), field, level, band, dps)


def oracle_table(components: Sequence[IntegerPolynomial], s0: Sequence, field: BaseField,
                 levels: int, band=None) -> list[TruncationEstimate]:
    """Estimates for M = 1..levels; the bracket narrows as M grows."""
    return [truncated_zeta(components, s0, field, level, band) for level in range(1, levels + 1)]
