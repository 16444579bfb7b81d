"""
Run orchestration: spec -> polyhedra -> fan -> torus surveys -> Z -> poles -> oracle.

Only the per-cone torus surveys run concurrently; everything after them is a
single-threaded pass over the collected tables.
"""
import asyncio
import logging
from fractions import Fraction
from typing import Optional

import mpmath

import database
from config import settings
from polyring import BaseField, PolyMapping, face_function
from problem import ProblemSpec
from report.schema import (
    BandModel, BinomialModel, ConeModel, ConeTermModel, FacetModel, FanModel, LaurentTermModel,
    NondegeneracyModel, OracleRowModel, PoleModel, PolyhedronModel, ProblemModel, RunReport,
    WitnessModel, ZetaModel,
)
from services.fan import SimplicialCone, SubordinateFan, build_fan, fundamental_points
from services.oracle import TruncationEstimate, oracle_table
from services.pole_analysis import (
    BandReport, PoleCandidate, band, candidate_poles, certify_poles, classify_normals,
)
from services.polyhedra import NewtonPolyhedron, mapping_polyhedron, polynomial_polyhedron
from services.torus_count import (
    CountTable, NondegeneracyReport, Witness, cone_faces, merge_reports, spot_check_nondegeneracy,
    survey_cone,
)
from services.zeta_core import ZetaRational, assemble_Z, assemble_Z_rational, cone_terms

logger = logging.getLogger(__name__)


def _text(value) -> str:
    if isinstance(value, float):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Fraction):
        return str(value)
    if value == mpmath.inf:
        return "inf"
    if value == -mpmath.inf:
        return "-inf"
    return mpmath.nstr(value, 20)


def survey(mapping: PolyMapping, cone: SimplicialCone, field: BaseField) -> tuple[CountTable, list]:
    """Counts and rank failures of one cone, through the count cache when enabled."""
    faces = cone_faces(mapping, cone.barycenter, field)
    key = database.faces_key(faces) if settings.count_cache_enabled else None
    if key is not None:
        cached = database.load_survey(key)
        if cached is not None:
            counts, rows = cached
            logger.debug(f"Cone {cone.cone_id}: survey loaded from cache")
            witnesses = [Witness(cone.cone_id, tuple(subset), tuple(point), rank) for subset, point, rank in rows]
            return CountTable(cone.cone_id, field.p, mapping.nvars, tuple(counts)), witnesses
    table, witnesses = survey_cone(faces, field, cone.cone_id)
    if key is not None:
        database.store_survey(key, field.p, mapping.nvars, table.counts,
                              [(w.subset, w.point, w.rank) for w in witnesses])
    return table, witnesses


async def survey_fan(mapping: PolyMapping, fan: SubordinateFan, field: BaseField) -> tuple[dict, NondegeneracyReport]:
    """Survey every cone (origin included) concurrently; results keyed by cone id."""
    cones = fan.all_cones()
    results = await asyncio.gather(*(asyncio.to_thread(survey, mapping, cone, field) for cone in cones))
    counts = {}
    witnesses = []
    for cone, (table, failures) in zip(cones, results):
        counts[cone.cone_id] = table
        witnesses.extend(failures)
    report = NondegeneracyReport.from_witnesses(witnesses, len(cones))
    logger.info(f"Surveyed {len(cones)} cones over F_{field.p}: {len(witnesses)} rank failures")
    return counts, report


def _polyhedron_model(label: str, polyhedron: NewtonPolyhedron) -> PolyhedronModel:
    return PolyhedronModel(
        label=label,
        vertices=[list(v) for v in polyhedron.vertices],
        facets=[FacetModel(normal=list(f.normal), offset=f.offset) for f in polyhedron.facets],
    )


def _fan_model(fan: SubordinateFan, mapping: PolyMapping, variables: list[str]) -> FanModel:
    cones = [
        ConeModel(
            cone_id=cone.cone_id,
            generators=[list(w) for w in cone.generators],
            barycenter=list(cone.barycenter),
            face_functions=[face_function(h, cone.barycenter).to_text(variables) for h in mapping.components],
            fundamental_points=len(fundamental_points(cone)),
        )
        for cone in fan.all_cones()
    ]
    return FanModel(seed=fan.seed, rays=[list(w) for w in fan.rays()], cones=cones)


def _nondegeneracy_model(report: NondegeneracyReport, overridden: bool) -> NondegeneracyModel:
    return NondegeneracyModel(
        verdict=report.verdict,
        cones_checked=report.cones_checked,
        spot_checks=report.spot_checks,
        overridden=overridden,
        witnesses=[
            WitnessModel(cone_id=w.cone_id, subset=list(w.subset), point=list(w.point), rank=w.rank)
            for w in report.witnesses
        ],
    )


def _zeta_model(zeta: ZetaRational) -> ZetaModel:
    try:
        at_zero = str(zeta.evaluate_exact((0,) * zeta.nvars))
    except ZeroDivisionError:
        at_zero = None
    return ZetaModel(
        q=zeta.q,
        certified=zeta.certified,
        numerator=[LaurentTermModel(t_exponent=list(e), coefficient=str(c)) for e, c in zeta.numerator.terms],
        denominator=[BinomialModel(q_exponent=b.qexp, t_exponent=list(b.texps)) for b in zeta.denominator],
        text=zeta.to_text(),
        value_at_zero=at_zero,
        denominator_real_parts=[str(r) for r in zeta.denominator_real_parts()],
    )


def _pole_model(candidate: PoleCandidate) -> PoleModel:
    return PoleModel(
        real_part=str(candidate.real_part),
        c=candidate.c,
        source=candidate.describe_source(),
        multiplicity=candidate.certified_multiplicity,
        leading_coefficient=candidate.leading_coefficient,
    )


def _band_model(report: BandReport) -> BandModel:
    return BandModel(
        alpha=_text(report.alpha),
        beta=_text(report.beta),
        alpha_tilde=_text(report.alpha_tilde),
        beta_tilde=_text(report.beta_tilde),
        T_plus=[list(w) for w in report.T_plus],
        T_minus=[list(w) for w in report.T_minus],
        P_alpha=[list(w) for w in report.P_alpha],
        P_beta=[list(w) for w in report.P_beta],
        kappa=report.kappa,
        rho=report.rho,
        M_kappa_alpha=list(report.M_kappa_alpha),
        M_rho_beta=list(report.M_rho_beta),
    )


def _oracle_rows(estimates: list[TruncationEstimate], point: list[Fraction],
                 zeta: ZetaRational) -> list[OracleRowModel]:
    dps = settings.oracle_precision_digits
    with mpmath.workdps(dps):
        symbolic = zeta.evaluate(point)
        tolerance = abs(symbolic) * mpmath.mpf(10) ** (10 - dps)
        return [
            OracleRowModel(
                level=e.level,
                point=[str(s) for s in point],
                value=_text(e.value),
                lower=_text(e.lower),
                upper=_text(e.upper),
                resolved_mass=str(e.resolved_mass),
                symbolic=_text(symbolic),
                brackets_symbolic=bool(e.brackets(symbolic, tolerance)),
            )
            for e in estimates
        ]


def default_rational_point(report: BandReport) -> Fraction:
    """Midpoint of (max(0, beta_tilde), alpha_tilde): inside the band with s >= 0 where possible."""
    low = max(Fraction(0), Fraction(report.beta_tilde))
    if low < report.alpha_tilde:
        return (low + Fraction(report.alpha_tilde)) / 2
    return report.midpoint()


async def run_async(spec: ProblemSpec, override_degenerate: Optional[bool] = None,
                    fan_seed: Optional[int] = None, oracle_level: Optional[int] = None) -> RunReport:
    """Full pipeline for one spec; keyword arguments override the spec's options."""
    options = spec.options
    override = options.override_degenerate if override_degenerate is None else override_degenerate
    seed = options.fan_seed if fan_seed is None else fan_seed
    level = options.oracle_level if oracle_level is None else oracle_level

    field = spec.field()
    mapping = spec.mapping()
    variables = spec.variables
    labels = ["f", "g"] if spec.rational else [f"h_{i + 1}" for i in range(mapping.r)]

    gammas = [polynomial_polyhedron(h) for h in mapping.components]
    total = mapping_polyhedron(mapping.components)
    logger.info(f"Newton polyhedron: {len(total.vertices)} vertices, {len(total.facets)} facets")
    fan = build_fan(total, seed)

    if settings.count_cache_enabled:
        database.init_db()
    counts, report = await survey_fan(mapping, fan, field)
    if settings.spot_check_samples > 0:
        spot = await asyncio.to_thread(spot_check_nondegeneracy, mapping, field)
        report = merge_reports(report, spot)
    if not report.verdict:
        logger.warning(f"Non-degeneracy failed with {len(report.witnesses)} witnesses: "
                       f"{report.witnesses[0].describe()}")

    if spec.rational:
        f, g = mapping.components
        zeta = assemble_Z_rational(f, g, fan, counts, field, report, override)
    else:
        zeta = assemble_Z(mapping, fan, counts, field, report, override)
    terms = cone_terms(mapping.components, fan, counts, field, rational=spec.rational)

    candidates, poles, band_report = [], [], None
    if spec.rational:
        gamma_f, gamma_g = gammas
        normals = total.facet_normals()
        T_plus, T_minus = classify_normals(normals, gamma_f, gamma_g)
        band_report = band(T_plus, T_minus, gamma_f, gamma_g, fan)
        candidates = certify_poles(zeta, candidate_poles(normals, gamma_f, gamma_g))
        seen = set()
        for candidate in sorted(candidates, key=lambda c: c.real_part):
            if candidate.certified_multiplicity > 0 and candidate.real_part not in seen:
                seen.add(candidate.real_part)
                poles.append(candidate)
        logger.info(f"Certified poles: {[str(c.real_part) for c in poles] or 'none'}")

    oracle_rows = []
    if level > 0:
        point = spec.oracle_point()
        if point is None:
            point = [default_rational_point(band_report)] if spec.rational else [Fraction(1)] * mapping.r
        if spec.rational:
            f, g = mapping.components
            estimates = oracle_table((f, g), (point[0], -point[0]), field, level, band_report)
        else:
            estimates = oracle_table(mapping.components, point, field, level)
        oracle_rows = _oracle_rows(estimates, point, zeta)

    return RunReport(
        problem=ProblemModel(
            variables=list(variables),
            mode=spec.mode,
            polynomials=[h.to_text(variables) for h in mapping.components],
            prime=field.p,
            fan_seed=seed,
        ),
        polyhedra=[_polyhedron_model(label, gamma) for label, gamma in zip(labels, gammas)]
        + [_polyhedron_model("total", total)],
        fan=_fan_model(fan, mapping, list(variables)),
        nondegeneracy=_nondegeneracy_model(report, override and not report.verdict),
        cone_terms=[
            ConeTermModel(cone_id=term.cone_id, counts=counts[term.cone_id].as_dict(),
                          L=term.L_part.to_text(), S=term.render_s())
            for term in terms
        ],
        zeta=_zeta_model(zeta),
        candidates=[_pole_model(c) for c in candidates],
        poles=[_pole_model(c) for c in poles],
        band=None if band_report is None else _band_model(band_report),
        oracle=oracle_rows,
    )


def run(spec: ProblemSpec, **overrides) -> RunReport:
    return asyncio.run(run_async(spec, **overrides))
