"""
Structured run report.

Every exact number is a string (Fractions as "p/q", mpmath values with 20
significant digits, "inf"/"-inf" for unbounded ends) so that the JSON form is
stable across platforms. There are no timestamps; equal specs give equal
reports.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict

SCHEMA_VERSION = "newton-zeta-report/1"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class FacetModel(_Frozen):
    normal: list[int]
    offset: int


class PolyhedronModel(_Frozen):
    label: str  # "f", "g", "h_1", ... or "total" for the Minkowski sum
    vertices: list[list[int]]
    facets: list[FacetModel]


class ConeModel(_Frozen):
    cone_id: str
    generators: list[list[int]]
    barycenter: list[int]
    face_functions: list[str]  # one per input polynomial, at the barycenter
    fundamental_points: int


class FanModel(_Frozen):
    seed: int
    rays: list[list[int]]
    cones: list[ConeModel]


class WitnessModel(_Frozen):
    cone_id: str
    subset: list[int]
    point: list[int]
    rank: int


class NondegeneracyModel(_Frozen):
    verdict: bool
    cones_checked: int
    spot_checks: int
    overridden: bool
    witnesses: list[WitnessModel]


class ConeTermModel(_Frozen):
    cone_id: str
    counts: dict[str, int]
    L: str
    S: str


class BinomialModel(_Frozen):
    q_exponent: int
    t_exponent: list[int]


class LaurentTermModel(_Frozen):
    t_exponent: list[int]
    coefficient: str


class ZetaModel(_Frozen):
    q: int
    certified: bool
    numerator: list[LaurentTermModel]
    denominator: list[BinomialModel]
    text: str
    value_at_zero: Optional[str] = None
    denominator_real_parts: list[str]


class PoleModel(_Frozen):
    real_part: str
    c: int
    source: str
    multiplicity: int
    leading_coefficient: Optional[str] = None


class BandModel(_Frozen):
    alpha: str
    beta: str
    alpha_tilde: str
    beta_tilde: str
    T_plus: list[list[int]]
    T_minus: list[list[int]]
    P_alpha: list[list[int]]
    P_beta: list[list[int]]
    kappa: int
    rho: int
    M_kappa_alpha: list[str]
    M_rho_beta: list[str]


class OracleRowModel(_Frozen):
    level: int
    point: list[str]
    value: str
    lower: str
    upper: str
    resolved_mass: str
    symbolic: Optional[str] = None
    brackets_symbolic: Optional[bool] = None


class ProblemModel(_Frozen):
    variables: list[str]
    mode: str
    polynomials: list[str]
    prime: int
    fan_seed: int


class RunReport(_Frozen):
    schema_version: str = SCHEMA_VERSION
    problem: ProblemModel
    polyhedra: list[PolyhedronModel]
    fan: FanModel
    nondegeneracy: NondegeneracyModel
    cone_terms: list[ConeTermModel]
    zeta: ZetaModel
    candidates: list[PoleModel] = []
    poles: list[PoleModel] = []
    band: Optional[BandModel] = None
    oracle: list[OracleRowModel] = []


def report_schema() -> dict:
    return RunReport.model_json_schema()
