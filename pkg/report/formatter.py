from typing import Sequence

from report.schema import RunReport

NO_POLES_LINE = "No poles outside the trivial families."


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for row in rows:
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _vector(v: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def format_problem(report: RunReport) -> str:
    problem = report.problem
    names = ", ".join(problem.variables)
    if problem.mode == "rational":
        f, g = problem.polynomials
        head = f"Z(s, f/g) with f = {f}, g = {g}"
    else:
        head = "Z(s, h) with " + ", ".join(
            f"h_{i + 1} = {h}" for i, h in enumerate(problem.polynomials)
        )
    return f"{head}\nvariables ({names}), p = {problem.prime}, fan seed {problem.fan_seed}"


def format_polyhedra(report: RunReport) -> str:
    blocks = []
    for polyhedron in report.polyhedra:
        vertices = ", ".join(_vector(v) for v in polyhedron.vertices)
        facets = "; ".join(f"<{_vector(f.normal)}, x> >= {f.offset}" for f in polyhedron.facets)
        blocks.append(f"Gamma({polyhedron.label}): vertices {vertices}\n  facets {facets}")
    return "\n".join(blocks)


def format_fan(report: RunReport) -> str:
    """Cone | generators | barycenter | one face-function column per input."""
    labels = ["f", "g"] if report.problem.mode == "rational" else [
        f"h_{i + 1}" for i in range(len(report.problem.polynomials))
    ]
    headers = ["Cone", "Generators", "Barycenter"] + [f"{label}_b" for label in labels]
    rows = []
    for cone in report.fan.cones:
        generators = " + ".join(f"{_vector(w)}R>0" for w in cone.generators) or "{0}"
        rows.append([cone.cone_id, generators, _vector(cone.barycenter)] + list(cone.face_functions))
    return _table(headers, rows)


def format_nondegeneracy(report: RunReport) -> str:
    check = report.nondegeneracy
    if check.verdict:
        return (f"Non-degenerate over F_{report.problem.prime} "
                f"({check.cones_checked} cones, {check.spot_checks} spot checks)")
    lines = [f"DEGENERATE over F_{report.problem.prime}: {len(check.witnesses)} witnesses"]
    if check.overridden:
        lines.append("Formula assembled under override; it is not certified.")
    for w in check.witnesses[:10]:
        members = ",".join(str(i) for i in w.subset)
        lines.append(f"  cone {w.cone_id}, I={{{members}}}, z={_vector(w.point)}, rank {w.rank}")
    if len(check.witnesses) > 10:
        lines.append(f"  ... {len(check.witnesses) - 10} more")
    return "\n".join(lines)


def format_cone_terms(report: RunReport) -> str:
    return _table(["Cone", "L_Delta", "S_Delta"], [[t.cone_id, t.L, t.S] for t in report.cone_terms])


def format_zeta(report: RunReport) -> str:
    zeta = report.zeta
    lines = [f"Z = {zeta.text}"]
    if not zeta.certified:
        lines.append("(uncertified: the mapping failed the non-degeneracy check)")
    if zeta.value_at_zero is not None:
        lines.append(f"Z at s = 0: {zeta.value_at_zero}")
    parts = ", ".join(zeta.denominator_real_parts) or "none"
    lines.append(f"Denominator real parts: {parts}")
    return "\n".join(lines)


def format_poles(report: RunReport) -> str:
    if report.band is None:
        return ""
    band = report.band
    lines = [
        f"Holomorphy band: ({band.beta_tilde}, {band.alpha_tilde})",
        f"alpha = {band.alpha}, kappa = {band.kappa}, P(alpha) = {[_vector(w) for w in band.P_alpha]}",
        f"beta = {band.beta}, rho = {band.rho}, P(beta) = {[_vector(w) for w in band.P_beta]}",
        "",
    ]
    rows = [
        [c.real_part, str(c.c), c.source, str(c.multiplicity), c.leading_coefficient or "-"]
        for c in report.candidates
    ]
    lines.append(_table(["Candidate", "c", "Source", "Multiplicity", "Leading coefficient"], rows))
    if report.poles:
        lines.append("Poles: " + ", ".join(f"{p.real_part} (order {p.multiplicity})" for p in report.poles))
    if not [p for p in report.poles if p.real_part not in ("-1", "1")]:
        lines.append(NO_POLES_LINE)
    return "\n".join(lines)


def format_oracle(report: RunReport) -> str:
    if not report.oracle:
        return ""
    point = ", ".join(report.oracle[0].point)
    rows = [
        [str(r.level), r.value, f"[{r.lower}, {r.upper}]", r.resolved_mass,
         "yes" if r.brackets_symbolic else "no"]
        for r in report.oracle
    ]
    head = f"Truncated integration at s = ({point}), symbolic value {report.oracle[0].symbolic}"
    return head + "\n" + _table(["M", "Resolved value", "Bracket", "Resolved mass", "Contains Z"], rows)


def format_text(report: RunReport) -> str:
    sections = [
        format_problem(report),
        format_polyhedra(report),
        format_fan(report),
        format_nondegeneracy(report),
        format_cone_terms(report),
        format_zeta(report),
        format_poles(report),
        format_oracle(report),
    ]
    return "\n\n".join(s for s in sections if s) + "\n"


def print_report(report: RunReport, fmt: str = "text") -> bytes:
    if fmt == "structured":
        return (report.model_dump_json(indent=2) + "\n").encode("utf-8")
    return format_text(report).encode("utf-8")
