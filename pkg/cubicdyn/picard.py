"""Exact cross-checks at the Picard parameters (0, 0, 0, 4).

Phi(u, v) = (-u - 1/u, -v - 1/v, -u/v - v/u) semiconjugates the monomial map
eta_M(u, v) = (u^m11 v^m12, u^m21 v^m22) to the word map of M = to_sl2(w).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .action import apply_word_batch, exact_word_jacobian, word_jet
from .console import get_logger
from .errors import NotInImage, OutlierFound, ZeroCoordinate
from .models import FixedPointKind, SurfacePoint
from .surface import PICARD
from .words import ElementKind, GeneratorWord, IntegerMatrix2, classify, from_sl2, to_sl2

log = get_logger(__name__)

CAYLEY_POINTS = (
    (-2.0, -2.0, -2.0),
    (-2.0, 2.0, 2.0),
    (2.0, -2.0, 2.0),
    (2.0, 2.0, -2.0),
)


@dataclass(frozen=True)
class TorusPoint:
    u: complex
    v: complex

    def __post_init__(self) -> None:
        if self.u == 0 or self.v == 0:
            raise ZeroCoordinate("torus coordinates must be nonzero", u=self.u, v=self.v)


def phi(t: TorusPoint) -> np.ndarray:
    u, v = complex(t.u), complex(t.v)
    return np.array([-u - 1 / u, -v - 1 / v, -u / v - v / u])


def phi_batch(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.stack([-U - 1 / U, -V - 1 / V, -U / V - V / U], axis=-1)


def eta(M: IntegerMatrix2, t: TorusPoint) -> TorusPoint:
    u, v = complex(t.u), complex(t.v)
    return TorusPoint(u**M.m11 * v**M.m12, u**M.m21 * v**M.m22)


def eta_batch(M: IntegerMatrix2, U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.power(U, M.m11) * np.power(V, M.m12),
        np.power(U, M.m21) * np.power(V, M.m22),
    )


def _annulus(M: IntegerMatrix2) -> float:
    # Keeps every monomial below 1e100.
    e = max(abs(M.m11) + abs(M.m12), abs(M.m21) + abs(M.m22), 1)
    return min(5.0, 10 ** (100 / e))


def verify_semiconjugacy(w: GeneratorWord, samples: int = 1000, seed: int = 0) -> float:
    """max ||Phi(eta_M(u, v)) - w(Phi(u, v))|| / (1 + ||.||) over sampled (u, v)."""
    if w.is_identity:
        return 0.0
    M = to_sl2(w)
    rho = _annulus(M)
    rng = np.random.default_rng(seed)
    logs = rng.uniform(-math.log(rho), math.log(rho), size=(samples, 2))
    angles = rng.uniform(0, 2 * math.pi, size=(samples, 2))
    tor = np.exp(logs + 1j * angles)
    U, V = tor[:, 0], tor[:, 1]
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = phi_batch(*eta_batch(M, U, V))
        rhs, escaped = apply_word_batch(PICARD, w, phi_batch(U, V))
    keep = ~escaped & np.all(np.isfinite(lhs), axis=1)
    if not keep.any():
        return math.inf
    diff = np.linalg.norm(lhs[keep] - rhs[keep], axis=1)
    scale = 1 + np.linalg.norm(lhs[keep], axis=1)
    return float(np.max(diff / scale))


def _word_for(M: IntegerMatrix2) -> GeneratorWord:
    # -M acts on the torus like M up to (u, v) -> (1/u, 1/v), which Phi forgets.
    try:
        return from_sl2(M)
    except NotInImage:
        return from_sl2(IntegerMatrix2(-M.m11, -M.m12, -M.m21, -M.m22))


def sing_pt_eigenvalues(M: IntegerMatrix2, point: Any = CAYLEY_POINTS[0]) -> list[complex]:
    """Eigenvalues of the 3x3 Jacobian of the word map of M at a Cayley point."""
    J = word_jet(PICARD, _word_for(M), point).jacobian
    ev = np.linalg.eigvals(J)
    return sorted((complex(v) for v in ev), key=lambda v: (abs(v), v.imag))


def predicted_eigenvalues(M: IntegerMatrix2) -> list[complex]:
    t = M.trace
    disc = cmath.sqrt(t * t - 4)
    mu = (t + disc) / 2
    out = [1 + 0j, mu * mu, 1 / (mu * mu)]
    return sorted(out, key=lambda v: (abs(v), v.imag))


def singular_jacobian_identities(M: IntegerMatrix2) -> dict[str, Any]:
    """Exact integer diagonal of the Jacobian at (-2, -2, -2) against closed forms."""
    _, J = exact_word_jacobian((0, 0, 0, 4), _word_for(M), (-2, -2, -2))
    m11, m12, m21, m22 = M.as_tuple()
    n11, n22, n33 = int(J[0, 0]), int(J[1, 1]), int(J[2, 2])
    expected = {
        "n11": m11 * m11 + m11 * m12,
        "n22": m22 * m22 + m22 * m21,
        "n33": (m11 - m21) * (m22 - m12),
        "trace": m11 * m11 + m22 * m22 + 2 * m12 * m21 + 1,
    }
    actual = {"n11": n11, "n22": n22, "n33": n33, "trace": n11 + n22 + n33}
    return {
        "matrix": list(M.as_tuple()),
        "actual": actual,
        "expected": expected,
        "ok": actual == expected,
    }


# ---------------------------------------------------------------------------
# Hyperbolic locus
# ---------------------------------------------------------------------------


def torus_lift(q: Any, tol: float = 1e-6) -> Optional[TorusPoint]:
    """(u, v) with Phi(u, v) = q, choosing the root signs that match z."""
    x, y, z = (complex(v) for v in q)
    us = [(-x + s * cmath.sqrt(x * x - 4)) / 2 for s in (1, -1)]
    vs = [(-y + s * cmath.sqrt(y * y - 4)) / 2 for s in (1, -1)]
    best, err = None, math.inf
    for u in us:
        for v in vs:
            if u == 0 or v == 0:
                continue
            e = abs(-u / v - v / u - z)
            if e < err:
                best, err = TorusPoint(u, v), e
    return best if err < tol * (1 + abs(z)) else None


def lift_behaviour(M: IntegerMatrix2, q: Any, tol: float = 1e-6) -> str:
    """'fixed' when eta_M fixes the lift, 'swapped' when it inverts it."""
    t = torus_lift(q)
    if t is None:
        return "unresolved"
    img = eta(M, t)
    if abs(img.u - t.u) + abs(img.v - t.v) < tol:
        return "fixed"
    if abs(img.u - 1 / t.u) + abs(img.v - 1 / t.v) < tol:
        return "swapped"
    return "unresolved"


def hyperbolic_locus_check(
    w: GeneratorWord, strategy: Any = None, box_tol: Optional[float] = None
) -> dict[str, Any]:
    """Every fixed point of a hyperbolic word at Picard is a saddle in [-2, 2]^3.

    Raises OutlierFound on the first point that is outside the box or that is
    smooth without saddle eigenvalues of modulus |mu|, mu the leading
    eigenvalue of M. The box tolerance defaults to the square root of the
    Newton tolerance; roots at the singular points are snapped exactly.
    """
    from .fixed_points import SeedStrategy, newton_fixed_points

    if classify(w).kind != ElementKind.HYPERBOLIC:
        raise ValueError(f"{w.spelling!r} is not hyperbolic")
    M = to_sl2(w)
    t = abs(M.trace)
    mu = (t + math.sqrt(t * t - 4)) / 2
    strategy = strategy or SeedStrategy(torus_grid=12, random=100)
    if box_tol is None:
        box_tol = math.sqrt(strategy.tol)
    search = newton_fixed_points(PICARD, w, strategy)
    lifts = {"fixed": 0, "swapped": 0, "unresolved": 0}
    saddles = singular = 0
    worst = 0.0
    for rec in search.records:
        pt = rec.point
        coords = pt.coords()
        if any(abs(c.imag) > box_tol or abs(c.real) > 2 + box_tol for c in coords):
            raise OutlierFound("fixed point outside [-2, 2]^3", point=list(coords), word=w.spelling)
        lifts[lift_behaviour(M, coords)] += 1
        if rec.kind == FixedPointKind.SINGULAR:
            singular += 1
            continue
        if rec.kind != FixedPointKind.SADDLE or rec.restricted is None:
            raise OutlierFound("smooth fixed point is not a saddle", point=list(coords), kind=rec.kind.value)
        big = max(abs(v) for v in rec.restricted.eigenvalues)
        worst = max(worst, abs(big - mu) / mu)
        if big < 1 + 1e-6 or abs(big - mu) > 1e-6 * mu:
            raise OutlierFound(
                f"saddle modulus {big:.9g} differs from |mu| = {mu:.9g}", point=list(coords)
            )
        saddles += 1
    return {
        "word": w.spelling,
        "matrix": list(M.as_tuple()),
        "points": len(search.records),
        "saddles": saddles,
        "singular": singular,
        "mu": mu,
        "max_modulus_mismatch": worst,
        "lift": lifts,
        "seeds": search.seeds,
    }


def cayley_points() -> list[SurfacePoint]:
    return [SurfacePoint(x=x, y=y, z=z) for x, y, z in CAYLEY_POINTS]
