"""Scalar value helpers.

Property values are plain Python scalars: ``int``/``float`` for numerics,
``str`` for strings and individual references, ``None`` for "never set".
Strict equality (``===``) compares canonical string forms, so every scalar
has exactly one canonical rendering: integral numbers drop the fraction
(``70.0`` -> ``"70"``), strings are themselves, null is the empty string.
"""

from __future__ import annotations

from typing import Union

Scalar = Union[int, float, str, None]


def canonical(value: Scalar) -> str:
    """Canonical string form used by strict (``===``) comparison."""
    if value is None:
        return ""
    if isinstance(value, bool):  # bools are not a BSL surface type; normalize
        return "1" if value else "0"
    if isinstance(value, (int, float)):
        f = float(value)
        if f.is_integer():
            return str(int(f))
        return repr(f)
    return value


def parse_number(text: str) -> float | None:
    """Numeric reading of a string, or None if it has none."""
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def coercible(value: Scalar) -> bool:
    """True when the value can be read as a number."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return True
    if isinstance(value, str):
        return parse_number(value) is not None
    return False


def same(a: Scalar, b: Scalar) -> bool:
    """Value identity used by change detection: numeric compare when both
    sides are numbers, canonical-form compare otherwise."""
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    return canonical(a) == canonical(b)


def from_number(f: float) -> int | float:
    """Collapse integral floats back to ints for presentation."""
    return int(f) if float(f).is_integer() else f
