"""Dynamics of g_x, g_y, g_z on their invariant fibers.

On the fiber x = c the map g_x = s_z s_y is affine in (y, z) with linear
part [[-1, -c], [c, c^2 - 1]]; g_y and g_z act the same way on the cyclic
coordinate pairs (z, x) and (x, y).
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from fractions import Fraction
from typing import Any, Iterable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .action import apply_word
from .console import get_logger
from .errors import EscapedTube, OrbitEscaped
from .models import (
    Axis,
    FiberClassification,
    FiberKind,
    ParameterQuadruple,
    TargetBox,
    TubeSpec,
    format_complex,
)
from .words import GeneratorWord

log = get_logger(__name__)

# Coordinates moved by g_axis, in cyclic order.
FIBER_COORDS = {Axis.X: (1, 2), Axis.Y: (2, 0), Axis.Z: (0, 1)}
GENERATOR = {
    Axis.X: GeneratorWord("zy"),
    Axis.Y: GeneratorWord("xz"),
    Axis.Z: GeneratorWord("yx"),
}

_REAL_TOL = 1e-12
_PARABOLIC_TOL = 1e-12


def cycled_params(p: ParameterQuadruple, axis: Axis | str) -> tuple[complex, complex, complex]:
    """(P_axis, P_u, P_v): the parameter of the axis then those of its fiber coordinates."""
    A, B, C, _ = p.as_tuple()
    return {Axis.X: (A, B, C), Axis.Y: (B, C, A), Axis.Z: (C, A, B)}[Axis(axis)]


def fiber_linear_part(p: ParameterQuadruple, axis: Axis | str, c: complex) -> np.ndarray:
    c = complex(c)
    return np.array([[-1, -c], [c, c * c - 1]], dtype=complex)


def fiber_translation(p: ParameterQuadruple, axis: Axis | str, c: complex) -> np.ndarray:
    _, pu, pv = cycled_params(p, axis)
    c = complex(c)
    return np.array([pu, pv - pu * c], dtype=complex)


def _is_real_segment(c: complex) -> bool:
    return abs(c.imag) <= _REAL_TOL and -2 < c.real < 2


def classify_fiber(p: ParameterQuadruple, axis: Axis | str, c: complex) -> FiberClassification:
    """Elliptic on real c in (-2, 2), parabolic at c = +-2, loxodromic elsewhere.

    The rotation is the theta in (0, 1) with c = 2 cos(pi theta); the
    multipliers are then exp(+-2 pi i theta).
    """
    axis = Axis(axis)
    c = complex(c)
    if min(abs(c - 2), abs(c + 2)) <= _PARABOLIC_TOL:
        return FiberClassification(
            axis=axis, c=c, kind=FiberKind.PARABOLIC, multipliers=[1 + 0j, 1 + 0j]
        )
    if _is_real_segment(c):
        theta = math.acos(c.real / 2) / math.pi
        mu = cmath.exp(2j * math.pi * theta)
        return FiberClassification(
            axis=axis,
            c=c,
            kind=FiberKind.ELLIPTIC,
            multipliers=[mu, mu.conjugate()],
            rotation=theta,
        )
    t = c * c - 2
    disc = cmath.sqrt(t * t - 4)
    mu = (t + disc) / 2
    if abs(mu) < 1:
        mu = (t - disc) / 2
    return FiberClassification(
        axis=axis, c=c, kind=FiberKind.LOXODROMIC, multipliers=[mu, 1 / mu]
    )


def fiber_period(c: complex, max_denominator: int = 64) -> Optional[int]:
    """Smallest q with (linear part)^q = Id, or None when the rotation is irrational."""
    c = complex(c)
    if not _is_real_segment(c):
        return None
    theta = math.acos(c.real / 2) / math.pi
    frac = Fraction(theta).limit_denominator(max_denominator)
    if abs(float(frac) - theta) > 1e-9:
        return None
    return frac.denominator


def bad_fiber_values(p: ParameterQuadruple, axis: Axis | str) -> list[complex]:
    """Fiber constants where the fiber conic degenerates, plus c = +-2."""
    pa, pu, pv = cycled_params(p, axis)
    D = p.D
    c = Polynomial([0, 1])
    det = (c**2 - pa * c - D) * (4 - c**2) - pu**2 - pv**2 + pu * pv * c
    roots = [complex(r) for r in det.roots()]
    values = roots + [2 + 0j, -2 + 0j]
    out: list[complex] = []
    for v in values:
        if all(abs(v - w) > 1e-9 for w in out):
            out.append(v)
    return out


def is_bad_fiber(
    p: ParameterQuadruple, axis: Axis | str, c: complex, tol: float = 1e-6
) -> bool:
    c = complex(c)
    return any(abs(c - b) <= tol for b in bad_fiber_values(p, axis))


def grid_values(kind: str = "shear") -> tuple[float, ...]:
    """Fiber constants used by the shear census and the periodic-fiber checks.

    ``shear``: 0 and sqrt(2) (g^2 and g^4 are the identity on those fibers).
    ``periodic``: every c = 2cos(pi theta) with theta of denominator 2, 3, 4, 6.
    """
    if kind == "shear":
        return (0.0, math.sqrt(2))
    if kind == "periodic":
        return (0.0, 1.0, -1.0, math.sqrt(2), -math.sqrt(2), math.sqrt(3), -math.sqrt(3))
    raise ValueError(f"unknown grid {kind!r}")


FIBER_TABLE_COLUMNS = ["c", "kind", "theta_or_modulus", "period", "bad"]


def fiber_table(
    p: ParameterQuadruple, axis: Axis | str, values: Iterable[complex]
) -> str:
    """CSV with one classified row per fiber constant."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIBER_TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for c in values:
        fc = classify_fiber(p, axis, c)
        if fc.kind == FiberKind.ELLIPTIC:
            measure = fc.rotation
        else:
            measure = max(abs(m) for m in fc.multipliers)
        period = fiber_period(c)
        writer.writerow(
            {
                "c": format_complex(c),
                "kind": fc.kind.value,
                "theta_or_modulus": f"{measure:.12g}",
                "period": "" if period is None else period,
                "bad": is_bad_fiber(p, axis, c),
            }
        )
    return buf.getvalue()


def find_return_iterate(
    p: ParameterQuadruple,
    tube: TubeSpec,
    q: Any,
    target: TargetBox,
    n_max: int,
    drift_tol: float = 1e-6,
) -> Optional[int]:
    """Smallest |n| <= n_max with g_axis^n(q) in ``target``.

    Candidates are tried in the order 0, +1, -1, +2, -2, ... A direction
    whose orbit escapes numerically is abandoned.
    """
    axis = tube.axis
    k = axis.index
    iu, iv = FIBER_COORDS[axis]
    start = np.array([complex(v) for v in q])
    if not tube.contains(start):
        raise EscapedTube("start point lies outside the tube", n=0, center=tube.center)
    conserved = start[k]

    def hit(pt: np.ndarray) -> bool:
        return target.contains(pt[iu], pt[iv])

    if hit(start):
        return 0
    forward_word = GENERATOR[axis]
    backward_word = forward_word.inverse()
    walkers = {1: start, -1: start}
    alive = {1: True, -1: True}
    for n in range(1, n_max + 1):
        for sign in (1, -1):
            if not alive[sign]:
                continue
            try:
                pt = apply_word(p, forward_word if sign > 0 else backward_word, walkers[sign])
            except OrbitEscaped:
                alive[sign] = False
                continue
            drift = abs(pt[k] - conserved)
            if drift > drift_tol * (1 + abs(conserved)):
                raise EscapedTube(
                    f"conserved coordinate drifted by {drift:.3e}", n=sign * n, drift=drift
                )
            walkers[sign] = pt
            if hit(pt):
                return sign * n
        if not (alive[1] or alive[-1]):
            log.debug("both directions escaped before n=%d", n)
            return None
    return None
