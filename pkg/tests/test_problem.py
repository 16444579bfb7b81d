from fractions import Fraction

import pytest

from errors import ParseError, SpecValidationError
from problem import load_spec, spec_from_dict


def base(**changes):
    data = {"variables": ["x", "y"], "mode": "rational", "polynomials": ["x^2 - y", "x^2*y"], "prime": 5}
    data.update(changes)
    return data


def test_defaults():
    spec = spec_from_dict(base())
    assert spec.rational
    assert spec.options.fan_seed == 0
    assert spec.options.output_format == "text"
    assert spec.oracle_point() is None
    assert spec.mapping().r == 2


@pytest.mark.parametrize("changes, fragment", [
    ({"prime": 6}, "not prime"),
    ({"polynomials": ["x"]}, "exactly two"),
    ({"variables": ["x", "x"]}, "declared twice"),
    ({"mode": "quotient"}, "mode"),
    ({"options": {"oracle_point": ["a"]}}, "not a rational"),
    ({"options": {"oracle_point": ["1", "2"]}}, "oracle_point"),
    ({"options": {"colour": "red"}}, "colour"),
])
def test_invalid_specs(changes, fragment):
    with pytest.raises(SpecValidationError) as info:
        spec_from_dict(base(**changes))
    assert fragment in str(info.value)


def test_constant_g_is_rejected():
    spec = spec_from_dict(base(polynomials=["x^2 - y", "7"]))
    with pytest.raises(SpecValidationError, match="g = '7' is constant"):
        spec.mapping()


def test_multivariate_components_must_vanish_at_the_origin():
    spec = spec_from_dict(base(mode="multivariate", polynomials=["x + 1"]))
    with pytest.raises(SpecValidationError):
        spec.mapping()


def test_component_vanishing_mod_p_is_rejected():
    spec = spec_from_dict(base(polynomials=["5*x", "y"]))
    with pytest.raises(SpecValidationError):
        spec.mapping()


def test_parse_errors_surface_from_mapping():
    spec = spec_from_dict(base(polynomials=["x^2 - 2y", "x*y"]))
    with pytest.raises(ParseError):
        spec.mapping()


def test_load_from_toml(tmp_path):
    path = tmp_path / "spec.toml"
    path.write_text(
        'variables = ["x", "y"]\n'
        'mode = "rational"\n'
        'polynomials = ["x", "y"]\n'
        "prime = 3\n\n"
        "[options]\n"
        "oracle_level = 2\n"
        'oracle_point = ["2/8"]\n'
    )
    spec = load_spec(path)
    assert spec.options.oracle_level == 2
    assert spec.oracle_point() == [Fraction(1, 4)]


def test_load_errors(tmp_path):
    with pytest.raises(SpecValidationError):
        load_spec(tmp_path / "missing.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("variables = [\n")
    with pytest.raises(SpecValidationError):
        load_spec(broken)
