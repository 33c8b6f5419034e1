"""
text_values module - Recognition and conversion of configuration text values

This module offers the low-level tools the configuration reader needs:
- Kind recognition (is_*_like methods)
- Conversion (to_* methods)
- Kind inference for a single scalar or comma-separated list

This module is licensed under the MIT License.
"""

import re
from typing import Any

from pairwise_graphlimit.value_kind import ValueKind


class TextValue:
    """
    Utility class for recognising and converting configuration values.

    This class provides static methods for:
    - Kind validation (is_*_like methods)
    - Conversion (to_* methods)
    - Kind inference
    """

    _FLOAT_REGEX = re.compile(r"""^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$""")
    _INTEGER_REGEX = re.compile(r"""^[-+]?\d+$""")
    _SPECIAL_FLOATS = ("inf", "+inf", "-inf", "nan")

    _TRUE_WORDS = ("true", "yes", "on")
    _FALSE_WORDS = ("false", "no", "off")

    LIST_SEPARATOR = ","

    @classmethod
    def is_bool_like(
        cls,
        value: str | bool | None,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Check if value can be interpreted as a boolean switch.

        Args:
            value: Value to check (string or bool)
            trim: Whether to trim whitespace before checking

        Returns:
            True if value is bool or one of true/false/yes/no/on/off (any case)

        Examples:
            >>> TextValue.is_bool_like('true')   # True
            >>> TextValue.is_bool_like('No')     # True
            >>> TextValue.is_bool_like('1')      # False
        """
        if value is None:
            return False

        if isinstance(value, bool):
            return True

        if isinstance(value, str):
            normalized = value.strip().lower() if trim else value.lower()
            return normalized in cls._TRUE_WORDS + cls._FALSE_WORDS

        return False

    @classmethod
    def is_none_like(
        cls,
        value: Any,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Check if value represents None/null.

        Examples:
            >>> TextValue.is_none_like(None)    # True
            >>> TextValue.is_none_like('none')  # True
            >>> TextValue.is_none_like('null')  # True
        """
        if value is None:
            return True

        if isinstance(value, str):
            normalized = value.strip().lower() if trim else value.lower()
            return normalized in ("none", "null")

        return False

    @classmethod
    def is_empty_like(
        cls,
        value: Any,
        *,
        trim: bool = True,
    ) -> bool:
        """Check if value is an empty string or contains only whitespace."""
        if not isinstance(value, str):
            return False

        return not value.strip() if trim else not value

    @classmethod
    def is_int_like(
        cls,
        value: str | int | None,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Check if value can be interpreted as an integer.

        Examples:
            >>> TextValue.is_int_like('128')    # True
            >>> TextValue.is_int_like('-3')     # True
            >>> TextValue.is_int_like('1e3')    # False
        """
        if value is None or isinstance(value, bool):
            return False

        if isinstance(value, int):
            return True

        if isinstance(value, str):
            normalized = value.strip() if trim else value
            return bool(cls._INTEGER_REGEX.match(normalized))

        return False

    @classmethod
    def is_float_like(
        cls,
        value: str | float | None,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Check if value can be interpreted as a float.

        Scientific notation is accepted since time steps and tolerances are
        usually written that way.

        Examples:
            >>> TextValue.is_float_like('0.25')   # True
            >>> TextValue.is_float_like('1e-3')   # True
            >>> TextValue.is_float_like('5')      # True
            >>> TextValue.is_float_like('abc')    # False
        """
        if value is None or isinstance(value, bool):
            return False

        if isinstance(value, float | int):
            return True

        if isinstance(value, str):
            normalized = value.strip() if trim else value
            return bool(cls._FLOAT_REGEX.match(normalized)) or normalized.lower() in cls._SPECIAL_FLOATS

        return False

    @classmethod
    def is_list_like(
        cls,
        value: Any,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Check if value is a comma-separated list of at least two items.

        Examples:
            >>> TextValue.is_list_like('8, 16, 32')  # True
            >>> TextValue.is_list_like('8')          # False
        """
        if not isinstance(value, str):
            return False

        normalized = value.strip() if trim else value
        return cls.LIST_SEPARATOR in normalized

    @classmethod
    def to_bool(
        cls,
        value: str | bool,
        *,
        trim: bool = True,
    ) -> bool:
        """
        Convert value to a boolean.

        Raises:
            ValueError: If value is not bool-like
        """
        if isinstance(value, bool):
            return value

        if not cls.is_bool_like(value, trim=trim):
            msg = f"not a boolean: {value!r}"
            raise ValueError(msg)

        normalized = value.strip().lower() if trim else value.lower()
        return normalized in cls._TRUE_WORDS

    @classmethod
    def to_int(
        cls,
        value: str | int,
        *,
        trim: bool = True,
    ) -> int:
        """
        Convert value to an integer.

        Raises:
            ValueError: If value is not int-like
        """
        if isinstance(value, int) and not isinstance(value, bool):
            return value

        if not cls.is_int_like(value, trim=trim):
            msg = f"not an integer: {value!r}"
            raise ValueError(msg)

        return int(value.strip() if trim else value)

    @classmethod
    def to_float(
        cls,
        value: str | float,
        *,
        trim: bool = True,
    ) -> float:
        """
        Convert value to a float.

        Raises:
            ValueError: If value is not float-like
        """
        if isinstance(value, float | int) and not isinstance(value, bool):
            return float(value)

        if not cls.is_float_like(value, trim=trim):
            msg = f"not a number: {value!r}"
            raise ValueError(msg)

        return float(value.strip() if trim else value)

    @classmethod
    def split_list(
        cls,
        value: str,
        *,
        trim: bool = True,
    ) -> list[str]:
        """
        Split a comma-separated value into its items.

        A trailing separator is tolerated ('8, 16,'), so one-element lists can be
        written as '8,'.

        Raises:
            ValueError: If an inner item is empty
        """
        items = value.split(cls.LIST_SEPARATOR)
        if items and not items[-1].strip():
            items = items[:-1]
        if any(not item.strip() for item in items):
            msg = f"empty item in list: {value!r}"
            raise ValueError(msg)
        return [item.strip() if trim else item for item in items]

    @classmethod
    def infer_kind(
        cls,
        value: Any,
        *,
        trim: bool = True,
    ) -> ValueKind:
        """
        Infer the kind of a single configuration value.

        Checks run in order of specificity: native types, none, empty, list,
        boolean, integer, float, and finally string.

        Examples:
            >>> TextValue.infer_kind('128')        # ValueKind.INTEGER
            >>> TextValue.infer_kind('1e-3')       # ValueKind.FLOAT
            >>> TextValue.infer_kind('8, 16')      # ValueKind.LIST
            >>> TextValue.infer_kind('linear')     # ValueKind.STRING
        """
        if isinstance(value, bool):
            return ValueKind.BOOLEAN
        if isinstance(value, int):
            return ValueKind.INTEGER
        if isinstance(value, float):
            return ValueKind.FLOAT
        if isinstance(value, list | tuple):
            return ValueKind.LIST

        if cls.is_none_like(value, trim=trim):
            return ValueKind.NONE
        if cls.is_empty_like(value, trim=trim):
            return ValueKind.EMPTY
        if cls.is_list_like(value, trim=trim):
            return ValueKind.LIST
        if cls.is_bool_like(value, trim=trim):
            return ValueKind.BOOLEAN
        if cls.is_int_like(value, trim=trim):
            return ValueKind.INTEGER
        if cls.is_float_like(value, trim=trim):
            return ValueKind.FLOAT
        return ValueKind.STRING
