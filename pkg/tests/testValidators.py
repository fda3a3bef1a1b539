import math

import pytest

from utils.validators import (
    validate_even_length,
    validate_positive_int,
    validate_positive_real,
    validate_probability_level,
    validate_support,
    validate_unit_interval,
)


class TestNumericValidators:

    @pytest.mark.parametrize("value, minimum, expected", [
        (5, 1, True),
        (0, 1, False),
        (0, 0, True),
        (2.5, 1, False),
        (True, 0, False),
        ("7", 1, False),
    ])
    def test_positive_int(self, value, minimum, expected):
        is_valid, _ = validate_positive_int(value, "n", minimum=minimum)
        assert is_valid is expected

    def test_positive_int_message_names_parameter(self):
        _, message = validate_positive_int(0, "trials")
        assert "trials" in message

    @pytest.mark.parametrize("value, allow_zero, expected", [
        (0.5, False, True),
        (0.0, False, False),
        (0.0, True, True),
        (-1.0, True, False),
        (math.inf, False, False),
        ("x", False, False),
    ])
    def test_positive_real(self, value, allow_zero, expected):
        assert validate_positive_real(value, "sigma", allow_zero=allow_zero)[0] is expected

    def test_unit_interval(self):
        assert validate_unit_interval(0.0, "a")[0]
        assert validate_unit_interval(1.0, "a")[0]
        assert not validate_unit_interval(1.01, "a")[0]

    @pytest.mark.parametrize("level, expected", [(0.05, True), (0.0, False), (1.0, False)])
    def test_probability_level(self, level, expected):
        assert validate_probability_level(level)[0] is expected


class TestStructureValidators:

    @pytest.mark.parametrize("support, expected", [
        ([1, 5, 10], True),
        ([], True),
        ([0, 3], False),
        ([3, 3], False),
        ([2, 11], False),
    ])
    def test_support(self, support, expected):
        assert validate_support(support, 10)[0] is expected

    @pytest.mark.parametrize("length, expected", [(4, True), (5, False), (0, False)])
    def test_even_length(self, length, expected):
        assert validate_even_length(length)[0] is expected
