"""Fatou certificates: the escape ball, the monotone-escape verifier,
Bowditch-style orbit tests and the cubic escape roots that seed them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Iterator

import mpmath
import numpy as np
from scipy.optimize import brentq, newton

from .console import get_logger
from .errors import BracketFailure, DomainWarning, NoEscapeRoot, RadiusTooSmall
from .models import (
    BQReport,
    FatouBall,
    FatouCertificate,
    FatouStatus,
    ParameterQuadruple,
    Precision,
    format_complex,
)
from .precision import ESCAPE_MODULUS, mp_log10_abs, working_precision

log = get_logger(__name__)

_OTHERS = ((1, 2), (2, 0), (0, 1))
LETTERS = "xyz"


def fatou_ball(A: complex, B: complex, C: complex, R: float) -> FatouBall:
    r = max(abs(complex(A)), abs(complex(B)), abs(complex(C)))
    threshold = 2 + math.sqrt(r)
    if R <= threshold:
        raise RadiusTooSmall(
            f"R={R} must exceed 2 + sqrt(r) = {threshold}", R=R, r=r
        )
    eps = min(R - threshold, R + 1 - math.sqrt(4 * R + r + 1))
    return FatouBall(r=r, R=R, epsilon=eps)


def sample_ball(
    center: Any, radius: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n points uniform in the open ball of C^3 = R^6 around ``center``."""
    g = rng.standard_normal((n, 6))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    scale = radius * rng.uniform(0, 1, size=(n, 1)) ** (1 / 6)
    g *= scale * (1 - 1e-12)
    return np.asarray(center, dtype=complex) + g[:, :3] + 1j * g[:, 3:]


def ball_inequalities(
    p: ParameterQuadruple, ball: FatouBall, points: np.ndarray
) -> dict[str, Any]:
    """Check (R-eps)^2 - (R+eps) - r >= R+eps and the per-letter lower bound.

    Every sampled point must have |s_k(q)_k| above (R-eps)^2 - (R+eps) - r
    for each letter k.
    """
    R, eps, r = ball.R, ball.epsilon, ball.r
    lower = (R - eps) ** 2 - (R + eps) - r
    target = R + eps
    Q = np.asarray(points, dtype=complex)
    P = p.as_tuple()
    measured = math.inf
    for k, (i, j) in enumerate(_OTHERS):
        new = -Q[:, k] - Q[:, i] * Q[:, j] + P[k]
        measured = min(measured, float(np.min(np.abs(new))))
    return {
        "lower_bound": lower,
        "target": target,
        "analytic_ok": lower >= target - 1e-12 * max(1.0, target),
        "measured_min": measured,
        "measured_ok": measured > lower,
    }


# ---------------------------------------------------------------------------
# Breadth-first word exploration
# ---------------------------------------------------------------------------


@dataclass
class _Level:
    points: np.ndarray  # (n, 3), complex or object (mpc)
    letter: np.ndarray  # (n,) index of the last applied letter, -1 at the root
    parent: np.ndarray  # (n,) index into the previous level
    old_modulus: np.ndarray  # (n,) modulus of the coordinate before the letter
    new_modulus: np.ndarray  # (n,) modulus of the coordinate after the letter


def _abs(values: np.ndarray) -> np.ndarray:
    if values.dtype == object:
        return np.array([abs(v) for v in values], dtype=object)
    return np.abs(values)


def _explore(
    p: ParameterQuadruple, q: Any, depth: int, use_mp: bool
) -> Iterator[_Level]:
    """Yield one level per word length in length-lexicographic order.

    Children of a word w are kw (k applied last), grouped by k, so each
    level is sorted by spelling. With ``use_mp`` the arrays switch to mpmath
    scalars once a modulus passes the escape cutoff.
    """
    P = list(p.as_tuple())
    root = np.array([[complex(v) for v in q]], dtype=complex)
    empty = np.zeros(1)
    level = _Level(root, np.array([-1]), np.array([0]), empty, empty)
    yield level
    for _ in range(depth):
        pts, last = level.points, level.letter
        if use_mp and pts.dtype != object and np.max(np.abs(pts)) > ESCAPE_MODULUS:
            log.debug("switching BFS to mpmath at %d nodes", len(pts))
            pts = np.vectorize(mpmath.mpc, otypes=[object])(pts)
            P = [mpmath.mpc(v) for v in P]
        chunks_pts, chunks_letter, chunks_parent, chunks_old, chunks_new = [], [], [], [], []
        for k, (i, j) in enumerate(_OTHERS):
            idx = np.nonzero(last != k)[0]
            if not len(idx):
                continue
            child = pts[idx].copy()
            old = child[:, k].copy()
            child[:, k] = -old - child[:, i] * child[:, j] + P[k]
            chunks_pts.append(child)
            chunks_letter.append(np.full(len(idx), k))
            chunks_parent.append(idx)
            chunks_old.append(_abs(old))
            chunks_new.append(_abs(child[:, k]))
        level = _Level(
            np.concatenate(chunks_pts),
            np.concatenate(chunks_letter),
            np.concatenate(chunks_parent),
            np.concatenate(chunks_old),
            np.concatenate(chunks_new),
        )
        yield level


def _spell(levels: list[_Level], index: int) -> str:
    letters = []
    for level in reversed(levels[1:]):
        letters.append(LETTERS[level.letter[index]])
        index = level.parent[index]
    return "".join(letters)


def _min_modulus(points: np.ndarray) -> Any:
    if points.dtype == object:
        return min(abs(v) for v in points.ravel())
    return float(np.min(np.abs(points)))


def certify_monotone_escape(
    p: ParameterQuadruple,
    q: Any,
    depth: int,
    precision: Precision | str = Precision.DD,
) -> FatouCertificate:
    """Monotone-escape certificate over every reduced word of length <= depth.

    A path passes when each letter does not decrease the modulus of the
    coordinate it replaces and every coordinate stays above 2 + sqrt(r).
    Certified means monotone escape to the stated depth only.
    """
    threshold = 2 + math.sqrt(p.r)
    use_mp = Precision(precision) == Precision.DD
    levels: list[_Level] = []
    modulus_log: list[float] = []
    checked = 0
    with working_precision(precision), np.errstate(over="ignore", invalid="ignore"):
        for d, level in enumerate(_explore(p, q, depth, use_mp)):
            levels.append(level)
            checked += len(level.points)
            low = _min_modulus(level.points)
            modulus_log.append(mp_log10_abs(low))
            if level.points.dtype != object and not np.all(np.isfinite(level.points)):
                return FatouCertificate(
                    status=FatouStatus.INCONCLUSIVE,
                    depth=d,
                    modulus_log=modulus_log,
                    threshold=threshold,
                    words_checked=checked,
                    note="double overflow before the requested depth",
                )
            mods = _abs(level.points)
            bad_min = np.array([min(row) <= threshold for row in mods])
            bad_mono = np.array(
                [n < o for n, o in zip(level.new_modulus, level.old_modulus)]
            ) if d else np.zeros(1, dtype=bool)
            bad = np.nonzero(bad_min | bad_mono)[0]
            if len(bad):
                witness = _spell(levels, int(bad[0]))
                log.debug("monotone escape fails at %r (depth %d)", witness, d)
                return FatouCertificate(
                    status=FatouStatus.FAILED,
                    depth=d,
                    witness_word=witness,
                    modulus_log=modulus_log,
                    threshold=threshold,
                    words_checked=checked,
                    note="first violating word in length-lexicographic order",
                )
    return FatouCertificate(
        status=FatouStatus.CERTIFIED,
        depth=depth,
        modulus_log=modulus_log,
        threshold=threshold,
        words_checked=checked,
    )


def bq_orbit_test(p: ParameterQuadruple, q: Any, depth: int) -> BQReport:
    """Both orbit conditions over the even-length words of length <= depth."""
    condition1 = True
    violations = 0
    explored = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for d, level in enumerate(_explore(p, q, depth, use_mp=False)):
            if d % 2:
                continue
            pts = level.points
            explored += len(pts)
            on_segment = (np.abs(pts.imag) <= 1e-12) & (np.abs(pts.real) <= 2)
            if on_segment.any():
                condition1 = False
            violations += int(np.count_nonzero((np.abs(pts) <= 2).any(axis=1)))
    exact = all(v == 0 for v in p.as_tuple()[:3])
    return BQReport(
        condition1=condition1,
        condition2_violations=violations,
        depth=depth,
        explored=explored,
        radius_label="exact" if exact else "radius-2 heuristic",
    )


# ---------------------------------------------------------------------------
# Escape roots
# ---------------------------------------------------------------------------


def _newton_polish(coeffs: list[complex], u: complex, steps: int = 6) -> complex:
    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    for _ in range(steps):
        d = dpoly(u)
        if d == 0:
            break
        u = u - poly(u) / d
    return complex(u)


def cubic_escape_root(D: complex) -> complex:
    """Root of u^3 + 3u^2 - D with |u| > 2; (u, u, u) then lies on S_{0,0,0,D}."""
    D = complex(D)
    if abs(D - 4) < 1e-12:
        raise NoEscapeRoot("u^3 + 3u^2 - 4 = (u-1)(u+2)^2 has no root beyond 2", D=D)
    coeffs = [1, 3, 0, -D]
    roots = sorted(np.roots(coeffs), key=lambda u: (abs(u), u.imag))
    u = _newton_polish(coeffs, complex(roots[-1]))
    if abs(u) <= 2:
        raise NoEscapeRoot(f"largest root has modulus {abs(u):.6g}", D=D)
    return u


def dm_cubic(a: float, u: float) -> float:
    s = 2 * a + 4
    return u**3 + 3 * u**2 - 3 * s * u + a * a + 8 * a + 8


def dm_fatou_root(a: float) -> float:
    """Real root u0 < -(2 + sqrt(2a + 4)) of the Dubrovin-Mazzocco seed cubic."""
    a = float(a)
    if not -2 < a < 2:
        warnings.warn(f"dm parameter a={a} outside (-2, 2)", DomainWarning, stacklevel=2)
    hi = -(2 + math.sqrt(max(2 * a + 4, 0.0)))
    lo = -50.0
    f_lo, f_hi = dm_cubic(a, lo), dm_cubic(a, hi)
    if not (f_lo < 0 < f_hi):
        raise BracketFailure(
            "no sign change on the bracket", a=a, bracket=[lo, hi], values=[f_lo, f_hi]
        )
    u0 = brentq(lambda u: dm_cubic(a, u), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    s = 2 * a + 4
    u0 = newton(
        lambda u: dm_cubic(a, u),
        u0,
        fprime=lambda u: 3 * u * u + 6 * u - 3 * s,
        tol=1e-15,
        maxiter=8,
        disp=False,
    )
    residual = abs(dm_cubic(a, u0))
    if residual > 1e-12 * max(1.0, abs(u0) ** 3):
        raise BracketFailure(f"residual {residual:.3e} after polish", a=a)
    return float(u0)


@dataclass(frozen=True)
class FatouSeed:
    u: complex
    ball: FatouBall
    certificate: FatouCertificate

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.certificate.status.value,
            "u": format_complex(self.u),
            "R": self.ball.R,
            "epsilon": self.ball.epsilon,
            "depth": self.certificate.depth,
            "witness": self.certificate.witness_word,
        }


def fatou_seed(
    p: ParameterQuadruple,
    depth: int = 10,
    precision: Precision | str = Precision.DD,
) -> FatouSeed:
    """Diagonal point (u, u, u) on the surface with |u| beyond the ball threshold.

    Torus parameters use ``cubic_escape_root``, Dubrovin-Mazzocco labels use
    ``dm_fatou_root``; anything else takes the largest root of
    u^3 + 3u^2 - (A+B+C)u - D.
    """
    A, B, C, D = p.as_tuple()
    if A == B == C == 0:
        u = cubic_escape_root(D)
    elif (p.label or "").startswith("dm:"):
        u = complex(dm_fatou_root(float(p.label.split(":", 1)[1])))
    else:
        coeffs = [1, 3, -(A + B + C), -D]
        roots = sorted(np.roots(coeffs), key=lambda v: (abs(v), v.imag))
        u = _newton_polish(coeffs, complex(roots[-1]))
    ball = fatou_ball(A, B, C, abs(u))
    cert = certify_monotone_escape(p, (u, u, u), depth, precision)
    return FatouSeed(u=u, ball=ball, certificate=cert)
