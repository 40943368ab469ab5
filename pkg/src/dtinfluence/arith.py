"""Number handling shared by every module.

Two arithmetic modes coexist: exact (``int`` / ``Fraction``) and float.
Values are plain Python numbers, so mixing a float into an exact
computation silently degrades it to float mode.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, float]

FLOAT_SLACK = 1e-9


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def mode_of(*values) -> str:
    return "rational" if all(is_exact(v) for v in values) else "float"


def parse_number(token: str, exact: bool = True) -> Number:
    """Parse ``a/b``, an integer or a decimal.

    Fractions and integers are always exact. Decimals become floats unless
    ``exact`` asks for their exact rational value.
    """
    token = token.strip()
    if "/" in token:
        return Fraction(token)
    try:
        return int(token)
    except ValueError:
        pass
    if exact:
        return Fraction(token)
    return float(token)


def to_str(x) -> str:
    """Lossless string form: ``a/b`` for rationals, ``repr`` for floats."""
    if x is None:
        return "null"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def from_str(s: str) -> Number:
    if s in ("inf", "-inf"):
        return float(s)
    if "/" in s:
        return Fraction(s)
    try:
        return int(s)
    except ValueError:
        return float(s)


def pretty(x) -> str:
    """Human form: 10 significant digits, exact fraction in brackets."""
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{float(x):.10g} [{x}]"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)



def ratio(a, b) -> Number:
    """a / b that stays rational when both sides are."""
    if is_exact(a) and is_exact(b):
        return Fraction(a) / b
    return a / b
