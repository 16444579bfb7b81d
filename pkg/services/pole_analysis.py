"""
Candidate poles of Z(s, f/g), the holomorphy band, and exact multiplicities.

A candidate with real part r0 = u/v (lowest terms, v > 0) is tested at the
real point t0 = q^-r0. Every binomial 1 - q^a t^b with a/b = r0 has a simple
zero there, and 1 - q^u t^v is the minimal polynomial of t0 over Q, so the
numerator's order at t0 is the number of times it divides by that binomial.
"""
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath

from config import settings
from services.fan import SubordinateFan
from services.polyhedra import NewtonPolyhedron, d_value
from services.zeta_core import Binomial, ZetaRational

logger = logging.getLogger(__name__)

INFINITY = float("inf")
TRIVIAL_SOURCE = "trivial"

Extended = Union[Fraction, float]


@dataclass(frozen=True)
class PoleCandidate:
    real_part: Fraction
    c: int  # imaginary parts are 2 pi k / (c ln q)
    source: Union[tuple, str]  # facet normal, or TRIVIAL_SOURCE for the +-1 families
    certified_multiplicity: int = 0
    leading_coefficient: Optional[str] = None

    def describe_source(self) -> str:
        return self.source if isinstance(self.source, str) else str(self.source)


@dataclass(frozen=True)
class BandReport:
    alpha: Extended
    beta: Extended
    alpha_tilde: Extended
    beta_tilde: Extended
    T_plus: tuple
    T_minus: tuple
    P_alpha: tuple = ()
    P_beta: tuple = ()
    rho: int = 0
    kappa: int = 0
    M_kappa_alpha: tuple = ()  # cone ids with exactly kappa generators in P(alpha)
    M_rho_beta: tuple = ()

    def contains(self, value: Fraction) -> bool:
        """Strictly inside (beta_tilde, alpha_tilde)."""
        return self.beta_tilde < value < self.alpha_tilde

    def midpoint(self) -> Fraction:
        return (Fraction(self.alpha_tilde) + Fraction(self.beta_tilde)) / 2


def difference(w: Sequence[int], gamma_f: NewtonPolyhedron, gamma_g: NewtonPolyhedron) -> int:
    """d(w, Gamma(g)) - d(w, Gamma(f))."""
    return d_value(w, gamma_g) - d_value(w, gamma_f)


def ratio(w: Sequence[int], gamma_f: NewtonPolyhedron, gamma_g: NewtonPolyhedron) -> Fraction:
    return Fraction(sum(w), difference(w, gamma_f, gamma_g))


def classify_normals(normals: Sequence[tuple], gamma_f: NewtonPolyhedron,
                     gamma_g: NewtonPolyhedron) -> tuple[tuple, tuple]:
    """(T_+, T_-) by the sign of the difference; zero-difference normals go to neither."""
    plus, minus = [], []
    for w in sorted(normals):
        sign = difference(w, gamma_f, gamma_g)
        if sign > 0:
            plus.append(tuple(w))
        elif sign < 0:
            minus.append(tuple(w))
    return tuple(plus), tuple(minus)


def _generators_in(fan: Optional[SubordinateFan], chosen: tuple) -> tuple[int, tuple]:
    """Largest number of one cone's generators lying in chosen, and the cones achieving it."""
    if fan is None or not chosen:
        return 0, ()
    members = set(chosen)
    best, cones = 0, []
    for cone in fan.cones:
        m = sum(1 for w in cone.generators if w in members)
        if m > best:
            best, cones = m, [cone.cone_id]
        elif m == best and m:
            cones.append(cone.cone_id)
    return best, tuple(cones)


def band(T_plus: Sequence[tuple], T_minus: Sequence[tuple], gamma_f: NewtonPolyhedron,
         gamma_g: NewtonPolyhedron, fan: Optional[SubordinateFan] = None) -> BandReport:
    """alpha, beta, their clamps at +-1, P(alpha), P(beta), kappa and rho."""
    alpha: Extended = min((ratio(w, gamma_f, gamma_g) for w in T_plus), default=INFINITY)
    beta: Extended = max((ratio(w, gamma_f, gamma_g) for w in T_minus), default=-INFINITY)
    p_alpha = tuple(w for w in T_plus if ratio(w, gamma_f, gamma_g) == alpha)
    p_beta = tuple(w for w in T_minus if ratio(w, gamma_f, gamma_g) == beta)
    kappa, m_alpha = _generators_in(fan, p_alpha)
    rho, m_beta = _generators_in(fan, p_beta)
    report = BandReport(
        alpha=alpha,
        beta=beta,
        alpha_tilde=min(Fraction(1), alpha),
        beta_tilde=max(Fraction(-1), beta),
        T_plus=tuple(T_plus),
        T_minus=tuple(T_minus),
        P_alpha=p_alpha,
        P_beta=p_beta,
        rho=rho,
        kappa=kappa,
        M_kappa_alpha=m_alpha,
        M_rho_beta=m_beta,
    )
    logger.info(f"Holomorphy band ({report.beta_tilde}, {report.alpha_tilde}); "
                f"alpha={alpha} kappa={kappa}, beta={beta} rho={rho}")
    return report


def candidate_poles(normals: Sequence[tuple], gamma_f: NewtonPolyhedron,
                    gamma_g: NewtonPolyhedron) -> list[PoleCandidate]:
    """The +-1 families plus sigma(w)/diff(w) for every normal with nonzero difference."""
    candidates = [
        PoleCandidate(Fraction(-1), 1, TRIVIAL_SOURCE),
        PoleCandidate(Fraction(1), 1, TRIVIAL_SOURCE),
    ]
    for w in sorted(normals):
        c = difference(w, gamma_f, gamma_g)
        if c:
            candidates.append(PoleCandidate(Fraction(sum(w), c), c, tuple(w)))
    return candidates


def _minimal_binomial(r0: Fraction) -> Binomial:
    return Binomial((r0.denominator,), r0.numerator)


def pole_order(zeta: ZetaRational, r0: Fraction) -> tuple[int, int]:
    """(denominator order, numerator order) of the canonical form at t0 = q^-r0."""
    denominator_order = sum(1 for b in zeta.denominator if b.real_part() == r0)
    if not denominator_order:
        return 0, 0
    divisor = _minimal_binomial(r0).laurent(zeta.q)
    numerator = zeta.numerator
    numerator_order = 0
    while numerator_order < denominator_order:
        quotient = numerator.exact_divide(divisor)
        if quotient is None:
            break
        numerator = quotient
        numerator_order += 1
    return denominator_order, numerator_order


def leading_coefficient(zeta: ZetaRational, r0: Fraction, multiplicity: int, dps: Optional[int] = None):
    """
    lim (1 - q^(s - r0))^m Z(s) for r0 > 0 and lim (1 - q^(r0 - s))^m Z(s)
    for r0 < 0, the limit taken from the holomorphy band side.
    """
    if multiplicity <= 0:
        return None
    vanishing = [b for b in zeta.denominator if b.real_part() == r0]
    others = [b for b in zeta.denominator if b.real_part() != r0]
    removed = len(vanishing) - multiplicity
    divisor = _minimal_binomial(r0).laurent(zeta.q)
    numerator = zeta.numerator
    for _ in range(removed):
        numerator = numerator.exact_divide(divisor)
    # with Y = q^(r0 - s): 1 - q^a t^b = 1 - Y^b ~ b (1 - Y) near r0
    with mpmath.workdps(dps or settings.oracle_precision_digits):
        q = mpmath.mpf(zeta.q)
        t0 = mpmath.power(q, -mpmath.mpf(r0.numerator) / r0.denominator)
        value = numerator.evaluate([t0]) * mpmath.mpf(r0.denominator) ** removed
        for binomial in vanishing:
            value /= binomial.texps[0]
        for binomial in others:
            value /= 1 - mpmath.power(q, binomial.qexp) * mpmath.power(t0, binomial.texps[0])
        if r0 > 0 and multiplicity % 2:
            value = -value
        return value


def certify_poles(zeta: ZetaRational, candidates: Sequence[PoleCandidate]) -> list[PoleCandidate]:
    """Attach the exact multiplicity (and leading coefficient) to every candidate."""
    certified = []
    orders: dict = {}
    for candidate in candidates:
        r0 = candidate.real_part
        if r0 not in orders:
            denominator_order, numerator_order = pole_order(zeta, r0)
            multiplicity = max(0, denominator_order - numerator_order)
            coefficient = leading_coefficient(zeta, r0, multiplicity)
            orders[r0] = (multiplicity, None if coefficient is None else mpmath.nstr(coefficient, 20))
            logger.debug(f"Candidate {r0}: denominator order {denominator_order}, "
                         f"numerator order {numerator_order}")
        multiplicity, coefficient = orders[r0]
        certified.append(replace(candidate, certified_multiplicity=multiplicity,
                                 leading_coefficient=coefficient))
    return certified


def pole_set(certified: Sequence[PoleCandidate]) -> list[tuple[Fraction, int]]:
    """Distinct (real part, multiplicity) pairs of the actual poles."""
    found = {}
    for candidate in certified:
        if candidate.certified_multiplicity > 0:
            found[candidate.real_part] = candidate.certified_multiplicity
    return sorted(found.items())
