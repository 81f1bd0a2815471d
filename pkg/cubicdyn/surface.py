"""Parameter families and surface geometry.

Surface: x^2 + y^2 + z^2 + xyz = Ax + By + Cz + D.

Points are triples or numpy arrays whose last axis has length 3; every
polynomial helper works on both, so batches flow through unchanged.
"""
from __future__ import annotations

import cmath
import math
import warnings
from fractions import Fraction
from typing import Any, Iterable, Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ChartDegenerate, DomainWarning
from .models import (
    Chart,
    KappaQuadruple,
    ParameterQuadruple,
    SurfacePoint,
    TraceQuadruple,
    parse_complex,
)


MARKOFF = ParameterQuadruple(A=0, B=0, C=0, D=0, label="markoff")
PICARD = ParameterQuadruple(A=0, B=0, C=0, D=4, label="picard")

# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def from_traces(t: TraceQuadruple | Sequence[Any]) -> ParameterQuadruple:
    a1, a2, a3, a4 = t.as_tuple() if isinstance(t, TraceQuadruple) else t
    A = a1 * a4 + a2 * a3
    B = a2 * a4 + a1 * a3
    C = a3 * a4 + a1 * a2
    D = 4 - (a1 * a2 * a3 * a4 + a1**2 + a2**2 + a3**2 + a4**2)
    return ParameterQuadruple(A=A, B=B, C=C, D=D, label="traces")


def kappa_to_traces(k: KappaQuadruple) -> TraceQuadruple:
    a = [2 * cmath.cos(math.pi * complex(v)) for v in k.as_tuple()]
    return TraceQuadruple(a1=a[0], a2=a[1], a3=a[2], a4=a[3])


def from_kappa(k: KappaQuadruple) -> ParameterQuadruple:
    p = from_traces(kappa_to_traces(k))
    return p.model_copy(update={"label": "kappa"})


def painleve_parameters(k: KappaQuadruple) -> tuple[complex, complex, complex, complex]:
    """(alpha, beta, gamma, delta) of the sixth Painleve equation."""
    k1, k2, k3, k4 = k.as_tuple()
    return (k4**2 / 2, -(k1**2) / 2, k2**2 / 2, (1 - k3**2) / 2)


def dm_params(a: float) -> ParameterQuadruple:
    a = float(a)
    if not -2 < a < 2:
        warnings.warn(
            f"dm parameter a={a} outside (-2, 2)", DomainWarning, stacklevel=2
        )
    s = 2 * a + 4
    return ParameterQuadruple(
        A=s, B=s, C=s, D=-(a * a + 8 * a + 8), label=f"dm:{a!r}"
    )


def torus_params(D: complex) -> ParameterQuadruple:
    return ParameterQuadruple(A=0, B=0, C=0, D=D, label=f"torus:{D!r}")


def _scalars(body: str, count: int, family: str) -> list[complex]:
    parts = [p for p in body.split(",") if p.strip()]
    if len(parts) != count:
        raise ValueError(f"{family} expects {count} values, got {body!r}")
    return [parse_complex(p) for p in parts]


def parse_family(spec: str) -> ParameterQuadruple:
    """Build parameters from a family spelling.

    markoff | picard | torus:D | dm:a | traces:a1,a2,a3,a4 |
    kappa:k1,k2,k3,k4 | params:A,B,C,D
    """
    name, _, body = spec.strip().partition(":")
    name = name.lower()
    if name == "markoff":
        return MARKOFF
    if name == "picard":
        return PICARD
    if name == "torus":
        (D,) = _scalars(body, 1, name)
        return torus_params(D)
    if name == "dm":
        (a,) = _scalars(body, 1, name)
        if a.imag:
            raise ValueError("dm parameter must be real")
        return dm_params(a.real)
    if name == "traces":
        p = from_traces(_scalars(body, 4, name))
        return p.model_copy(update={"label": spec})
    if name == "kappa":
        k = _scalars(body, 4, name)
        p = from_kappa(KappaQuadruple(k1=k[0], k2=k[1], k3=k[2], k4=k[3]))
        return p.model_copy(update={"label": spec})
    if name == "params":
        A, B, C, D = _scalars(body, 4, name)
        return ParameterQuadruple(A=A, B=B, C=C, D=D, label=spec)
    raise ValueError(f"unknown parameter family {spec!r}")


# ---------------------------------------------------------------------------
# Polynomial helpers
# ---------------------------------------------------------------------------


def _split(q: Any) -> tuple[Any, Any, Any]:
    if isinstance(q, np.ndarray) and q.ndim > 1:
        return q[..., 0], q[..., 1], q[..., 2]
    return q[0], q[1], q[2]


def surface_residual(p: ParameterQuadruple, q: Any) -> Any:
    x, y, z = _split(q)
    A, B, C, D = p.as_tuple()
    return x * x + y * y + z * z + x * y * z - A * x - B * y - C * z - D


def relative_residual(p: ParameterQuadruple, q: Any) -> Any:
    arr = np.asarray(q, dtype=complex)
    norm = np.linalg.norm(arr, axis=-1)
    return np.abs(surface_residual(p, arr)) / (1.0 + norm**3)


def gradient(p: ParameterQuadruple, q: Any) -> np.ndarray:
    """[yz - A + 2x, zx - B + 2y, xy - C + 2z] (stacked on the last axis)."""
    x, y, z = _split(q)
    A, B, C, _ = p.as_tuple()
    return np.stack(
        [y * z - A + 2 * x, z * x - B + 2 * y, x * y - C + 2 * z], axis=-1
    )


def surface_point(p: ParameterQuadruple, q: Sequence[complex]) -> SurfacePoint:
    x, y, z = (complex(v) for v in q)
    return SurfacePoint(
        x=x, y=y, z=z, residual=float(abs(surface_residual(p, (x, y, z))))
    )


def sample_surface(p: ParameterQuadruple, xy: np.ndarray) -> np.ndarray:
    """Both roots z of z^2 + (xy - C) z + (x^2 + y^2 - Ax - By - D) = 0.

    ``xy`` has shape (n, 2); returns shape (2n, 3), roots interleaved per
    input pair.
    """
    xy = np.asarray(xy, dtype=complex).reshape(-1, 2)
    A, B, C, D = p.as_tuple()
    x, y = xy[:, 0], xy[:, 1]
    b = x * y - C
    c = x * x + y * y - A * x - B * y - D
    disc = np.sqrt(b * b - 4 * c)
    z1 = (-b + disc) / 2
    z2 = (-b - disc) / 2
    # Avoid cancellation in the smaller root.
    big = np.where(np.abs(z1) >= np.abs(z2), z1, z2)
    small = np.where(np.abs(big) > 0, c / np.where(big == 0, 1, big), 0)
    out = np.empty((2 * len(xy), 3), dtype=complex)
    out[0::2, 0] = x
    out[0::2, 1] = y
    out[0::2, 2] = big
    out[1::2, 0] = x
    out[1::2, 1] = y
    out[1::2, 2] = small
    return out


def random_surface_points(
    p: ParameterQuadruple,
    n: int,
    rng: np.random.Generator,
    box: float = 3.0,
) -> np.ndarray:
    """n on-surface points with (x, y) uniform in the complex box |Re|,|Im| < box."""
    m = (n + 1) // 2
    xy = rng.uniform(-box, box, size=(m, 2)) + 1j * rng.uniform(-box, box, size=(m, 2))
    return sample_surface(p, xy)[:n]


# ---------------------------------------------------------------------------
# Singular points
# ---------------------------------------------------------------------------


def _critical_candidates(p: ParameterQuadruple) -> list[np.ndarray]:
    """Solutions of 2x + yz = A, 2y + xz = B, 2z + xy = C.

    x = (A - yz)/2 and y = (2B - Az)/(4 - z^2) reduce the system to a quintic
    in z. The planes z = +-2 are handled apart: there 2B - Az must vanish and
    y solves -z y^2 + A y + 4z - 2C = 0. The quintic has leading coefficient
    4 for every parameter choice, so the elimination never degenerates.
    """
    A, B, C, _ = p.as_tuple()
    z = Polynomial([0, 1])
    dn = 4 - z**2
    nm = 2 * B - A * z
    quintic = 4 * z * dn**2 + A * nm * dn - nm**2 * z - 2 * C * dn**2
    out: list[np.ndarray] = []
    for zr in quintic.roots():
        d = 4 - zr * zr
        if abs(d) < 1e-8:
            continue
        yr = (2 * B - A * zr) / d
        xr = (A - yr * zr) / 2
        out.append(np.array([xr, yr, zr], dtype=complex))
    for z0 in (2.0, -2.0):
        if abs(2 * B - A * z0) > 1e-10 * (1 + abs(A) + abs(B)):
            continue
        for yr in np.roots([-z0, A, 4 * z0 - 2 * C]):
            xr = (A - yr * z0) / 2
            out.append(np.array([xr, yr, z0], dtype=complex))
    return out


def _polish(p: ParameterQuadruple, q: np.ndarray, steps: int = 8) -> np.ndarray:
    """Gauss-Newton on (gradient, residual) = 0."""
    for _ in range(steps):
        x, y, z = q
        g = gradient(p, q)
        F = np.concatenate([g, [surface_residual(p, q)]])
        J = np.array(
            [[2, z, y], [z, 2, x], [y, x, 2], list(g)], dtype=complex
        )
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        q = q + step
        if np.linalg.norm(step) < 1e-15 * (1 + np.linalg.norm(q)):
            break
    return q


def _is_singular(p: ParameterQuadruple, q: np.ndarray, tol: float) -> bool:
    scale = 1 + np.linalg.norm(q)
    return (
        abs(surface_residual(p, q)) < tol * scale**3
        and np.linalg.norm(gradient(p, q)) < tol * scale**2
    )


def _dedupe(points: Iterable[np.ndarray], radius: float) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for q in points:
        if all(np.linalg.norm(q - k) > radius for k in kept):
            kept.append(q)
    return kept


def _grid_candidates(p: ParameterQuadruple, n: int = 20, box: float = 6.0) -> list[np.ndarray]:
    axis = np.linspace(-box, box, n)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    rng = np.random.default_rng(0)
    seeds = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=-1).astype(complex)
    seeds += 1e-3j * rng.standard_normal(seeds.shape)
    out = []
    for q in seeds:
        with np.errstate(all="ignore"):
            r = _polish(p, q, steps=30)
        if np.all(np.isfinite(r)):
            out.append(r)
    return out


def singular_points(
    p: ParameterQuadruple,
    method: Literal["eliminate", "grid"] = "eliminate",
    tol: float = 1e-10,
) -> list[SurfacePoint]:
    """Common zeros of the residual and the gradient.

    ``eliminate`` solves the quintic; ``grid`` runs Newton from a dense grid
    and serves as an independent cross-check.
    """
    candidates = _critical_candidates(p) if method == "eliminate" else _grid_candidates(p)
    found = []
    for q in candidates:
        q = _polish(p, q)
        if _is_singular(p, q, tol):
            found.append(q)
    found = _dedupe(found, 1e-8)
    found.sort(key=lambda q: (round(q[0].real, 9), round(q[1].real, 9), round(q[2].real, 9)))
    return [surface_point(p, q) for q in found]


def critical_points(p: ParameterQuadruple) -> list[np.ndarray]:
    """All polished solutions of the involution fixed-point system in C^3."""
    out = []
    for q in _critical_candidates(p):
        q = _polish(p, q)
        if np.linalg.norm(gradient(p, q)) < 1e-10 * (1 + np.linalg.norm(q)) ** 2:
            out.append(q)
    return _dedupe(out, 1e-8)


# ---------------------------------------------------------------------------
# Singular parameters
# ---------------------------------------------------------------------------


def _singular_expression(a: Sequence[Any]) -> tuple[Any, Any]:
    a1, a2, a3, a4 = a
    s = 2 * (a1**2 + a2**2 + a3**2 + a4**2) - a1 * a2 * a3 * a4 - 16
    prod = (4 - a1**2) * (4 - a2**2) * (4 - a3**2) * (4 - a4**2)
    return s * s - prod, abs(s * s) + abs(prod)


def is_singular_parameter(t: TraceQuadruple | Sequence[Any], tol: float = 1e-12) -> bool:
    values = list(t.as_tuple()) if isinstance(t, TraceQuadruple) else list(t)
    exact = all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)
    if exact:
        expr, _ = _singular_expression([Fraction(v) for v in values])
        return any(v in (2, -2) for v in values) or expr == 0
    values = [complex(v) for v in values]
    if any(min(abs(v - 2), abs(v + 2)) <= tol for v in values):
        return True
    expr, scale = _singular_expression(values)
    return abs(expr) <= tol * max(1.0, scale)


# ---------------------------------------------------------------------------
# Volume form
# ---------------------------------------------------------------------------


def chart_denominator(p: ParameterQuadruple, q: Any, chart: Chart | str) -> complex:
    """Denominator of the invariant 2-form in the given chart."""
    x, y, z = (complex(v) for v in _split(q))
    A, B, C, _ = p.as_tuple()
    chart = Chart(chart)
    if chart == Chart.XY:
        return 2 * z + x * y - C
    if chart == Chart.YZ:
        return 2 * x + y * z - A
    return 2 * y + z * x - B


_CHART_INDEX = {Chart.XY: (0, 1), Chart.YZ: (1, 2), Chart.ZX: (2, 0)}


def tangent_basis(p: ParameterQuadruple, q: Any) -> tuple[np.ndarray, np.ndarray]:
    """Two vectors spanning ker(gradient) (complex bilinear kernel)."""
    g = gradient(p, np.asarray(q, dtype=complex))
    k = int(np.argmax(np.abs(g)))
    if abs(g[k]) == 0:
        raise ChartDegenerate("gradient vanishes; point is singular")
    i, j = [m for m in range(3) if m != k]
    t1 = np.zeros(3, dtype=complex)
    t2 = np.zeros(3, dtype=complex)
    t1[i] = 1
    t1[k] = -g[i] / g[k]
    t2[j] = 1
    t2[k] = -g[j] / g[k]
    return t1, t2


def volume_form_value(
    p: ParameterQuadruple,
    q: Any,
    chart: Chart | str,
    t1: np.ndarray,
    t2: np.ndarray,
) -> complex:
    chart = Chart(chart)
    den = chart_denominator(p, q, chart)
    if abs(den) < 1e-12:
        raise ChartDegenerate(f"{chart.value} denominator vanishes", chart=chart.value)
    a, b = _CHART_INDEX[chart]
    return complex(t1[a] * t2[b] - t1[b] * t2[a]) / den


def volume_form_ratio(
    p: ParameterQuadruple,
    q: Any,
    chart_a: Chart | str,
    chart_b: Chart | str,
) -> complex:
    """Omega in chart_a divided by Omega in chart_b on the same tangent pair."""
    t1, t2 = tangent_basis(p, q)
    return volume_form_value(p, q, chart_a, t1, t2) / volume_form_value(
        p, q, chart_b, t1, t2
    )
