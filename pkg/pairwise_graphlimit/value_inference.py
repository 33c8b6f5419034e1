"""
value_inference module - Typed conversion of configuration values

The configuration reader hands every right-hand side to ValueInference, which infers
its kind, converts it, and profiles list items so that refinement lists such as
'8, 16, 32' become list[int] while '1e-3, 5e-4' become list[float].

This module is licensed under the MIT License.
"""

from collections.abc import Iterable
from typing import Any

from pairwise_graphlimit.text_values import TextValue
from pairwise_graphlimit.value_kind import ValueKind


class ValueInference:
    """
    ValueInference class - Kind inference and conversion of configuration values.

    Core Capabilities:
    - Single value kind inference and conversion
    - List profiling to determine the common kind of list items
    - Coercion to an expected kind, with INTEGER widening to FLOAT

    Usage Examples:
        >>> ValueInference.convert_value('128')          # 128
        >>> ValueInference.convert_value('8, 16, 32')    # [8, 16, 32]
        >>> ValueInference.coerce('2', ValueKind.FLOAT)  # 2.0
    """

    _SCALAR_KINDS = (ValueKind.BOOLEAN, ValueKind.INTEGER, ValueKind.FLOAT, ValueKind.STRING)

    @staticmethod
    def infer_kind(value: Any) -> ValueKind:
        """Infer the kind of a configuration value."""
        return TextValue.infer_kind(value)

    @classmethod
    def profile_values(
        cls,
        values: Iterable[Any],
    ) -> ValueKind:
        """
        Infer the common kind of a collection of scalar values.

        Integers mixed with floats profile as FLOAT; any other mixture is MIXED.

        Raises:
            ValueError: If values is a plain string

        Examples:
            >>> ValueInference.profile_values(['8', '16'])        # ValueKind.INTEGER
            >>> ValueInference.profile_values(['1', '0.5'])       # ValueKind.FLOAT
            >>> ValueInference.profile_values(['1', 'linear'])    # ValueKind.MIXED
        """
        if isinstance(values, str):
            msg = "values must be a collection, not a string"
            raise ValueError(msg)

        values_list = list(values)
        if not values_list:
            return ValueKind.EMPTY

        counts = dict.fromkeys(ValueKind, 0)
        for value in values_list:
            counts[TextValue.infer_kind(value)] += 1
        total = len(values_list)

        for kind in cls._SCALAR_KINDS:
            if counts[kind] == total:
                return kind
        if counts[ValueKind.INTEGER] + counts[ValueKind.FLOAT] == total:
            return ValueKind.FLOAT
        return ValueKind.MIXED

    @classmethod
    def convert_scalar(cls, value: Any, kind: ValueKind) -> Any:
        """Convert a scalar value to the given kind."""
        if kind == ValueKind.BOOLEAN:
            return TextValue.to_bool(value)
        if kind == ValueKind.INTEGER:
            return TextValue.to_int(value)
        if kind == ValueKind.FLOAT:
            return TextValue.to_float(value)
        if kind in (ValueKind.NONE, ValueKind.EMPTY):
            return None
        return value.strip() if isinstance(value, str) else value

    @classmethod
    def convert_value(
        cls,
        value: Any,
    ) -> Any:
        """
        Convert a value to its inferred kind automatically.

        Returns:
            bool, int, float, str, None, or a list of one scalar kind

        Raises:
            ValueError: If a list mixes incompatible kinds

        Examples:
            >>> ValueInference.convert_value('0.25')        # 0.25
            >>> ValueInference.convert_value('yes')         # True
            >>> ValueInference.convert_value('none')        # None
            >>> ValueInference.convert_value('4, 8, 16')    # [4, 8, 16]
        """
        kind = cls.infer_kind(value)
        if kind != ValueKind.LIST:
            return cls.convert_scalar(value, kind)

        items = list(value) if isinstance(value, list | tuple) else TextValue.split_list(value)
        item_kind = cls.profile_values(items)
        if item_kind == ValueKind.MIXED:
            msg = f"list mixes value kinds: {value!r}"
            raise ValueError(msg)
        return [cls.convert_scalar(item, item_kind) for item in items]

    @classmethod
    def coerce(
        cls,
        value: Any,
        expected: ValueKind,
        *,
        item_kind: ValueKind | None = None,
    ) -> Any:
        """
        Convert value and check it against an expected kind.

        INTEGER values are accepted where FLOAT is expected, and a scalar is
        accepted where a LIST is expected (as a one-element list).

        Args:
            value: Raw configuration text (or already-typed value)
            expected: Kind the caller needs
            item_kind: Required item kind when expected is LIST

        Raises:
            ValueError: If the value does not fit the expected kind
        """
        converted = cls.convert_value(value)
        kind = cls.infer_kind(converted)

        if expected == ValueKind.LIST:
            items = converted if isinstance(converted, list) else [converted]
            if item_kind is None:
                return items
            return [cls.coerce(item, item_kind) for item in items]

        if kind == expected:
            return converted
        if expected == ValueKind.FLOAT and kind == ValueKind.INTEGER:
            return float(converted)
        if expected == ValueKind.STRING and kind in (ValueKind.INTEGER, ValueKind.FLOAT):
            return str(value).strip()

        msg = f"expected {expected.value}, got {kind.value}: {value!r}"
        raise ValueError(msg)
