import pytest

from hopt.errors import ParseError
from hopt.util import Duration, format_duration, parse_duration, parse_run_args


class TestParseDuration:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("90s", 90.0),
            ("90", 90.0),
            ("1h 30min", 5400.0),
            ("1h30min", 5400.0),
            ("0.5d", 43200.0),
            ("2m", 120.0),
            ("1hr", 3600.0),
            ("3 days", 259200.0),
            ("1h 1m 1s", 3661.0),
            ("0s", 0.0),
        ],
    )
    def test_accepts(self, text, expected):
        assert parse_duration(text).seconds == expected

    @pytest.mark.parametrize("bad", ["", "   ", "fast", "1 fortnight", "-5s", "h", "1.2.3s"])
    def test_rejects(self, bad):
        with pytest.raises(ParseError):
            parse_duration(bad)

    def test_error_quotes_offending_token(self):
        with pytest.raises(ParseError, match="fortnight"):
            parse_duration("1 fortnight")

    def test_round_trip(self):
        for text in ("90s", "1h 30min", "0.5d"):
            d = parse_duration(text)
            assert parse_duration(format_duration(d)).seconds == d.seconds

    def test_negative_duration_rejected(self):
        with pytest.raises(ParseError):
            Duration(seconds=-1.0)


class TestParseRunArgs:
    def test_duration_becomes_wallclock(self):
        assert parse_run_args("30min") == ("wallclock", 1800.0)

    def test_steps_literal(self):
        assert parse_run_args("300 steps") == ("steps", 300)
        assert parse_run_args("1 step") == ("steps", 1)

    def test_bare_number_is_seconds(self):
        assert parse_run_args("45") == ("wallclock", 45.0)

    def test_unknown_token_lists_both_grammars(self):
        with pytest.raises(ParseError, match="steps"):
            parse_run_args("fast")

    def test_empty_rejected(self):
        with pytest.raises(ParseError):
            parse_run_args("")
