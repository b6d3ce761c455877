import json

import numpy as np
import pytest

from hopt.errors import FormatError, SpaceError
from hopt.space import (
    Candidate,
    ChoiceSpec,
    CustomSpec,
    FloatSpec,
    IntSpec,
    SearchSpace,
    check_values,
    contains,
    float_grid_bounds,
    int_grid_bounds,
    parse_format,
    power_grid,
    round_decimals,
    round_significant,
    space_digest,
    space_from_json,
    validate_space,
)


class TestValidation:
    def test_valid_int_with_multiple(self):
        space = SearchSpace(n=IntSpec(100, 500, multiple_of=100))
        assert validate_space(space) == []

    def test_valid_log_float(self):
        space = SearchSpace(lr=FloatSpec(1e-5, 1e-3, log=True))
        assert validate_space(space) == []

    def test_log_requires_positive_low(self):
        space = SearchSpace(lr=FloatSpec(-1.0, 1.0, log=True))
        violations = validate_space(space)
        assert len(violations) == 1
        assert "log requires low > 0" in violations[0]
        assert "lr" in violations[0]

    def test_bounds_order(self):
        assert validate_space(SearchSpace(a=IntSpec(5, 2)))
        assert validate_space(SearchSpace(a=FloatSpec(1.0, 0.0)))

    def test_multiple_and_power_exclusive(self):
        violations = validate_space(SearchSpace(a=IntSpec(1, 100, multiple_of=2, power_of=2)))
        assert any("mutually exclusive" in v for v in violations)

    def test_empty_multiple_grid(self):
        violations = validate_space(SearchSpace(a=IntSpec(101, 199, multiple_of=200)))
        assert any("no multiple" in v for v in violations)

    def test_power_needs_grid_point(self):
        assert validate_space(SearchSpace(a=IntSpec(5, 7, power_of=2)))
        assert validate_space(SearchSpace(a=IntSpec(0, 64, power_of=2)))

    def test_precision_only_linear(self):
        violations = validate_space(
            SearchSpace(a=FloatSpec(0.1, 1.0, log=True, precision=2))
        )
        assert any("precision" in v for v in violations)

    def test_significant_digits_only_log(self):
        violations = validate_space(
            SearchSpace(a=FloatSpec(0.1, 1.0, log=False, significant_digits=2))
        )
        assert any("significant_digits" in v for v in violations)

    def test_choice_non_empty(self):
        assert validate_space(SearchSpace(a=ChoiceSpec([])))
        assert validate_space(SearchSpace(a=ChoiceSpec(["adam", "sgd"]))) == []

    def test_deterministic_and_order_stable(self):
        space = SearchSpace(
            a=FloatSpec(-1.0, 1.0, log=True),
            b=IntSpec(5, 2),
        )
        assert validate_space(space) == validate_space(space)
        assert [v.split(":")[0] for v in validate_space(space)] == [
            "parameter 'a'",
            "parameter 'b'",
        ]


class TestParseFormat:
    def test_linear(self):
        q = parse_format("0.1f")
        assert (q.mode, q.digits) == ("linear", 1)

    def test_log(self):
        q = parse_format("0.1g")
        assert (q.mode, q.digits) == ("log", 1)

    def test_colon_prefix(self):
        assert parse_format(":0.2f").digits == 2

    def test_unknown_conversion(self):
        with pytest.raises(FormatError):
            parse_format("0.3x")

    @pytest.mark.parametrize("bad", ["", "f", "1.2f", "0.f", ":0.2", "0.2F"])
    def test_malformed(self, bad):
        with pytest.raises(FormatError):
            parse_format(bad)


class TestContains:
    def test_power_of_two(self):
        spec = IntSpec(2, 64, power_of=2)
        assert contains(spec, 32)
        assert not contains(spec, 33)
        assert not contains(spec, 1)
        assert not contains(spec, 128)

    def test_precision_grid(self):
        spec = FloatSpec(0.0, 1.0, precision=1)
        assert not contains(spec, 0.55)
        assert contains(spec, 0.5)
        assert contains(spec, 1.0)

    def test_significant_digits_grid(self):
        spec = FloatSpec(1e-5, 1e-3, log=True, significant_digits=1)
        assert contains(spec, 2e-4)
        assert contains(spec, 5e-5)
        assert not contains(spec, 2.3784e-4)

    def test_multiple_of(self):
        spec = IntSpec(100, 500, multiple_of=100)
        assert contains(spec, 400)
        assert not contains(spec, 450)
        assert not contains(spec, 600)

    def test_plain_bounds_inclusive(self):
        spec = IntSpec(100, 500)
        assert contains(spec, 100) and contains(spec, 500)
        assert not contains(spec, 99) and not contains(spec, 501)

    def test_choice_membership(self):
        spec = ChoiceSpec(["adam", "sgd", "rmsprop"])
        assert contains(spec, "sgd")
        assert not contains(spec, "adamw")

    def test_shaped_values(self):
        spec = IntSpec(0, 10, shape=3)
        assert contains(spec, np.array([5, 2, 7]))
        assert not contains(spec, np.array([5, 2, 11]))
        assert not contains(spec, np.array([5, 2]))
        assert not contains(spec, [5, 2, 7])

    def test_type_mismatch(self):
        assert not contains(IntSpec(0, 10), 0.5)
        assert not contains(IntSpec(0, 10), True)
        assert not contains(FloatSpec(0.0, 1.0), "0.5")
        assert not contains(FloatSpec(0.0, 1.0), float("nan"))


class TestGrids:
    def test_int_grid_bounds(self):
        assert int_grid_bounds(IntSpec(101, 499, multiple_of=100)) == (200, 400)

    def test_power_grid(self):
        assert power_grid(IntSpec(2, 64, power_of=2)) == [2, 4, 8, 16, 32, 64]
        assert power_grid(IntSpec(3, 60, power_of=2)) == [4, 8, 16, 32]

    def test_round_half_away_from_zero(self):
        assert round_decimals(0.25, 1) == 0.3
        assert round_decimals(-0.25, 1) == -0.3
        assert round_decimals(0.55, 1) == 0.6

    def test_round_significant(self):
        assert round_significant(0.00023784, 1) == 2e-4
        assert round_significant(0.00025, 1) == 3e-4
        assert round_significant(0.95, 1) == 1.0

    def test_float_grid_bounds_snap_inward(self):
        assert float_grid_bounds(FloatSpec(0.01, 0.99, precision=1)) == (0.1, 0.9)


class TestCandidate:
    def test_key_set_enforced(self):
        space = SearchSpace(a=IntSpec(0, 10), b=FloatSpec(0.0, 1.0))
        with pytest.raises(SpaceError):
            Candidate.build(space, {"a": 5}, "random", "c0")
        with pytest.raises(SpaceError):
            Candidate.build(space, {"a": 5, "b": 0.5, "c": 1}, "random", "c0")
        cand = Candidate.build(space, {"a": 5, "b": 0.5}, "random", "c0")
        assert cand.values == {"a": 5, "b": 0.5}

    def test_out_of_domain_value(self):
        space = SearchSpace(a=IntSpec(0, 10))
        problems = check_values(space, {"a": 11})
        assert problems and "a" in problems[0]


class TestJsonLoading:
    DOC = {
        "units": {"type": "int", "low": 64, "high": 512, "multiple_of": 64},
        "lr": {"type": "float", "low": 1e-5, "high": 1e-3, "log": True},
        "decay": {"type": "float", "low": 1e-6, "high": 1e-4, "format": "0.1g"},
        "opt": {"type": "choice", "options": ["adam", "sgd"], "is_ordinal": False},
    }

    def test_round_trip(self):
        space = space_from_json(json.dumps(self.DOC))
        assert space.names() == ["units", "lr", "decay", "opt"]
        assert space["units"].multiple_of == 64
        assert space["lr"].log is True

    def test_format_string_expands(self):
        space = space_from_json(self.DOC)
        decay = space["decay"]
        assert decay.log is True and decay.significant_digits == 1

    def test_format_conflicts_with_explicit_fields(self):
        with pytest.raises(SpaceError):
            space_from_json({"a": {"type": "float", "low": 1e-3, "high": 1.0, "log": True, "format": "0.1g"}})

    def test_unknown_type(self):
        with pytest.raises(SpaceError):
            space_from_json({"a": {"type": "matrix", "low": 0, "high": 1}})

    def test_invalid_space_rejected(self):
        with pytest.raises(SpaceError):
            space_from_json({"a": {"type": "float", "low": -1, "high": 1, "log": True}})

    def test_digest_stability(self):
        s1 = space_from_json(self.DOC)
        s2 = space_from_json(json.dumps(self.DOC))
        assert space_digest(s1) == space_digest(s2)
        other = space_from_json({"a": {"type": "int", "low": 0, "high": 1}})
        assert space_digest(other) != space_digest(s1)


def test_custom_spec_roundtrip():
    spec = CustomSpec(seed_fn=lambda rng: "seed", mutate_fn=lambda v, tau, rng: v)
    space = SearchSpace(c=spec)
    assert validate_space(space) == []
    assert contains(spec, "anything")
