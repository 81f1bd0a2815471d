"""Scalar precision helpers.

Double mode uses numpy complex128. The "dd" mode evaluates with mpmath at
106 bits of mantissa, the width of a double-double, with an unbounded
exponent so doubly exponential orbit growth never overflows.
"""
from __future__ import annotations

from contextlib import contextmanager
from typing import Any, Iterator, Sequence

import mpmath

from .models import Precision

DD_BITS = 106
ESCAPE_MODULUS = 1e150
# Deviations below this are dominated by double rounding.
DD_SWITCH = 1e-13


def bits_for(precision: Precision | str) -> int:
    return DD_BITS if Precision(precision) == Precision.DD else 53


@contextmanager
def working_precision(precision: Precision | str) -> Iterator[int]:
    bits = bits_for(precision)
    with mpmath.workprec(bits):
        yield bits


def to_mpc(values: Sequence[Any]) -> list[mpmath.mpc]:
    return [mpmath.mpc(complex(v)) if not isinstance(v, mpmath.mpc) else v for v in values]


def mp_log10_abs(value: Any) -> float:
    """log10 |value| for complex / mpc inputs; -inf at zero."""
    mag = abs(value)
    if mag == 0:
        return float("-inf")
    return float(mpmath.log10(mag))
