"""
value_kind module - Provides enumeration of configuration value kinds

This module is licensed under the MIT License.
"""

from enum import Enum


class ValueKind(Enum):
    """
    Enumeration of the kinds a configuration value can take.

    - STRING: Free text (scenario names, family ids, kernel kinds)
    - INTEGER: Whole numbers (resolutions, record strides)
    - FLOAT: Real numbers, including scientific notation (time steps, tolerances)
    - BOOLEAN: true/false/yes/no switches
    - LIST: Comma-separated sequence of scalar values (refinement levels)
    - MIXED: A list whose elements do not share a kind
    - EMPTY: Empty values
    - NONE: Null values ('none', 'null')
    """

    STRING = "str"
    INTEGER = "int"
    FLOAT = "float"
    BOOLEAN = "bool"
    LIST = "list"
    MIXED = "mixed"
    EMPTY = "empty"
    NONE = "none"
