"""Problem spec files.

A spec is a TOML document:

    variables = ["x", "y"]
    mode = "rational"             # or "multivariate"
    polynomials = ["x^2 - y", "x^2*y"]
    prime = 5

    [options]
    fan_seed = 0
    oracle_level = 0              # 0 disables the oracle
    oracle_point = ["1/4"]        # default: band midpoint, or every s_i = 1
    override_degenerate = false
    output_format = "text"        # or "structured"
"""
import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from sympy import isprime

from errors import SpecValidationError
from polyparse import parse_polynomial, validate_variables
from polyring import BaseField, IntegerPolynomial, PolyMapping

logger = logging.getLogger(__name__)

MULTIVARIATE = "multivariate"
RATIONAL = "rational"


class RunOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fan_seed: int = Field(default=0, ge=0)
    oracle_level: int = Field(default=0, ge=0)
    oracle_point: Optional[list[str]] = None
    override_degenerate: bool = False
    output_format: Literal["text", "structured"] = "text"

    @field_validator("oracle_point")
    @classmethod
    def _rational_strings(cls, value):
        if value is None:
            return value
        for item in value:
            try:
                Fraction(item)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"{item!r} is not a rational number")
        return [str(Fraction(item)) for item in value]


class ProblemSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variables: list[str]
    mode: Literal["multivariate", "rational"] = MULTIVARIATE
    polynomials: list[str] = Field(min_length=1)
    prime: int
    options: RunOptions = Field(default_factory=RunOptions)

    @field_validator("variables")
    @classmethod
    def _check_variables(cls, value):
        try:
            validate_variables(value)
        except SpecValidationError as e:
            raise ValueError(str(e))
        return value

    @field_validator("prime")
    @classmethod
    def _check_prime(cls, value):
        if not isprime(value):
            raise ValueError(f"{value} is not prime")
        return value

    @model_validator(mode="after")
    def _check_mode(self):
        if self.mode == RATIONAL and len(self.polynomials) != 2:
            raise ValueError(f"rational mode needs exactly two polynomials (f, g), got {len(self.polynomials)}")
        if self.options.oracle_point is not None:
            expected = 1 if self.mode == RATIONAL else len(self.polynomials)
            if len(self.options.oracle_point) != expected:
                raise ValueError(f"oracle_point needs {expected} coordinates")
        return self

    @property
    def rational(self) -> bool:
        return self.mode == RATIONAL

    def field(self) -> BaseField:
        return BaseField(self.prime)

    def components(self) -> tuple[IntegerPolynomial, ...]:
        return tuple(parse_polynomial(text, self.variables) for text in self.polynomials)

    def mapping(self) -> PolyMapping:
        """
        Parsed and checked input: every component non-constant, vanishing at
        the origin and nonzero mod p.
        """
        components = self.components()
        for index, h in enumerate(components):
            if h.is_constant():
                role = ("f", "g")[index] if self.rational else f"h_{index + 1}"
                raise SpecValidationError(f"{role} = {self.polynomials[index]!r} is constant")
        mapping = PolyMapping(components)
        if not self.rational:
            mapping.check_vanishes_at_origin()
        mapping.check_for_field(self.field())
        return mapping

    def oracle_point(self) -> Optional[list[Fraction]]:
        if self.options.oracle_point is None:
            return None
        return [Fraction(item) for item in self.options.oracle_point]


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(x) for x in item["loc"]) or "spec"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def spec_from_dict(data: dict) -> ProblemSpec:
    try:
        return ProblemSpec.model_validate(data)
    except ValidationError as e:
        raise SpecValidationError(f"invalid problem spec: {_describe(e)}")


def load_spec(path) -> ProblemSpec:
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError:
        raise SpecValidationError(f"spec file {path} does not exist")
    except tomllib.TOMLDecodeError as e:
        raise SpecValidationError(f"spec file {path} is not valid TOML: {e}")
    spec = spec_from_dict(data)
    logger.info(f"Loaded {spec.mode} spec from {path}: {len(spec.polynomials)} polynomials, p={spec.prime}")
    return spec
