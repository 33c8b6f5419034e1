"""
Unit tests for the TextValue utility class.

This module is licensed under the MIT License.
"""

import math

import pytest

from pairwise_graphlimit.text_values import TextValue
from pairwise_graphlimit.value_kind import ValueKind


class TestTextValueIntegers:
    """Test cases for integer recognition and conversion."""

    @pytest.mark.parametrize("value,expected", [
        ("128", True),
        ("-3", True),
        ("+7", True),
        (" 64 ", True),
        ("1e3", False),
        ("0.5", False),
        ("eight", False),
        ("", False),
        (None, False),
        (True, False),
        (16, True),
    ])
    def test_is_int_like(self, value, expected):
        """Test integer-like validation."""
        assert TextValue.is_int_like(value) == expected

    def test_to_int(self):
        """Test converting integer text."""
        assert TextValue.to_int("512") == 512
        assert TextValue.to_int(" -4 ") == -4
        assert TextValue.to_int(9) == 9

    def test_to_int_invalid(self):
        """Test that non-integer text is rejected."""
        with pytest.raises(ValueError, match="not an integer"):
            TextValue.to_int("1.5")


class TestTextValueFloats:
    """Test cases for float recognition and conversion."""

    @pytest.mark.parametrize("value,expected", [
        ("0.25", True),
        ("1e-3", True),
        ("5E+2", True),
        (".5", True),
        ("5", True),
        ("inf", True),
        ("nan", True),
        ("1e", False),
        ("abc", False),
        (None, False),
    ])
    def test_is_float_like(self, value, expected):
        """Test float-like validation, scientific notation included."""
        assert TextValue.is_float_like(value) == expected

    def test_to_float(self):
        """Test converting float text."""
        assert TextValue.to_float("1e-3") == 1e-3
        assert TextValue.to_float("2") == 2.0
        assert math.isinf(TextValue.to_float("-inf"))

    def test_to_float_invalid(self):
        """Test that non-numeric text is rejected."""
        with pytest.raises(ValueError, match="not a number"):
            TextValue.to_float("fast")


class TestTextValueBooleansAndNone:
    """Test cases for switches and null values."""

    @pytest.mark.parametrize("value,expected", [
        ("true", True),
        ("Yes", True),
        ("on", True),
        ("false", False),
        ("NO", False),
        ("off", False),
    ])
    def test_to_bool(self, value, expected):
        """Test converting switch words."""
        assert TextValue.to_bool(value) is expected

    def test_to_bool_rejects_digits(self):
        """Test that 1 and 0 are not switch words."""
        assert not TextValue.is_bool_like("1")
        with pytest.raises(ValueError):
            TextValue.to_bool("1")

    @pytest.mark.parametrize("value", [None, "none", "NULL", " null "])
    def test_is_none_like(self, value):
        """Test null recognition."""
        assert TextValue.is_none_like(value)

    def test_is_empty_like(self):
        """Test empty recognition."""
        assert TextValue.is_empty_like("   ")
        assert not TextValue.is_empty_like("x")
        assert not TextValue.is_empty_like(None)


class TestTextValueLists:
    """Test cases for comma-separated lists."""

    def test_split_list(self):
        """Test splitting and trimming list items."""
        assert TextValue.split_list("8, 16 ,32") == ["8", "16", "32"]

    def test_split_list_trailing_separator(self):
        """Test that a trailing comma makes a one-element list."""
        assert TextValue.split_list("8,") == ["8"]

    def test_split_list_empty_item(self):
        """Test that an empty inner item is rejected."""
        with pytest.raises(ValueError, match="empty item"):
            TextValue.split_list("8,,16")


class TestTextValueInference:
    """Test cases for kind inference."""

    @pytest.mark.parametrize("value,expected", [
        ("128", ValueKind.INTEGER),
        ("1e-3", ValueKind.FLOAT),
        ("0.5", ValueKind.FLOAT),
        ("yes", ValueKind.BOOLEAN),
        ("8, 16", ValueKind.LIST),
        ("linear", ValueKind.STRING),
        ("none", ValueKind.NONE),
        ("", ValueKind.EMPTY),
        (3, ValueKind.INTEGER),
        (0.1, ValueKind.FLOAT),
        (False, ValueKind.BOOLEAN),
        ([1, 2], ValueKind.LIST),
    ])
    def test_infer_kind(self, value, expected):
        """Test inference in order of specificity."""
        assert TextValue.infer_kind(value) == expected
