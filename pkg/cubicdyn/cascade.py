"""Iterated-commutator cascades near a common fixed point.

Level S(0) holds near-identity seeds; S(n+1) holds commutators of
non-commuting S(n) elements. Deviations sup ||gamma(q) - q|| are measured
on Sobol samples of the surface inside a ball and compared with K / 2^n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

import mpmath
import numpy as np
from scipy.stats import qmc

from .action import apply_word_batch, apply_word_batch_dd, word_jet
from .console import get_logger
from .errors import HypothesisViolated, NoReturnFound, SeedTooLoose
from .models import (
    CascadeBudget,
    CascadeReport,
    CommutatorLevel,
    ParameterQuadruple,
    Precision,
)
from .precision import DD_SWITCH, working_precision
from .surface import MARKOFF, dm_params, sample_surface
from .words import GeneratorWord, commutator, commutes

log = get_logger(__name__)

H_X = GeneratorWord("zyzy")
H_Y = GeneratorWord("xzxz")
H_Z = GeneratorWord("yxyx")
G_X = GeneratorWord("zy")
G_Y = GeneratorWord("xz")

MARKOFF_EPSILON = 0.016
FULL_EXPANSION_MAX_LEVEL = 3
_DD_CHUNK = 1024


def budget_for(epsilon: float) -> CascadeBudget:
    """K = epsilon / 32, the largest K keeping every working radius >= epsilon / 2."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return CascadeBudget(epsilon=epsilon, K=epsilon / 32)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def surface_ball_samples(
    p: ParameterQuadruple,
    center: Sequence[complex],
    radius: float,
    n: int,
    seed: int = 0,
) -> np.ndarray:
    """Up to n surface points within ``radius`` of ``center``.

    (x, y) offsets come from a scrambled Sobol sequence in the 4 real
    dimensions; z is the root of the surface quadratic nearest the center.
    Seven eighths are taken in sequence order, the rest are the farthest
    remaining candidates so the boundary sphere is represented.
    """
    c = np.asarray([complex(v) for v in center])
    sobol = qmc.Sobol(d=4, scramble=True, seed=seed)
    m = max(4, math.ceil(math.log2(max(16 * n, 2))))
    u = 2 * sobol.random_base2(m) - 1
    offsets = radius * (u[:, :2] + 1j * u[:, 2:])
    offsets = offsets[np.linalg.norm(offsets, axis=1) < radius]
    xy = c[:2] + offsets
    both = sample_surface(p, xy).reshape(-1, 2, 3)
    pick = np.argmin(np.abs(both[:, :, 2] - c[2]), axis=1)
    pts = both[np.arange(len(both)), pick]
    dist = np.linalg.norm(pts - c, axis=1)
    inside = np.nonzero(dist < radius)[0]
    if len(inside) < n:
        log.debug("ball sample short: %d of %d points inside", len(inside), n)
    n_interior = min(len(inside), n - n // 8)
    interior = inside[:n_interior]
    rest = inside[n_interior:]
    shell = rest[np.argsort(-dist[rest], kind="stable")][: n - n_interior]
    return pts[np.concatenate([interior, np.sort(shell)])]


def _deviations(p: ParameterQuadruple, w: GeneratorWord, Q: np.ndarray) -> np.ndarray:
    out, escaped = apply_word_batch(p, w, Q)
    dev = np.linalg.norm(out - Q, axis=1)
    dev[escaped] = np.inf
    return dev


def _dd_sup(p: ParameterQuadruple, w: GeneratorWord, Q: np.ndarray, chunk: int = _DD_CHUNK) -> float:
    """sup of ||w(q) - q|| over every sample at 106 bits."""
    best = mpmath.mpf(0)
    for start in range(0, len(Q), chunk):
        src, img = apply_word_batch_dd(p, w, Q[start : start + chunk])
        with working_precision(Precision.DD):
            diff = img - src
            sq = [sum(abs(v) ** 2 for v in row) for row in diff]
            best = max(best, max(sq))
    with working_precision(Precision.DD):
        return float(mpmath.sqrt(best))


def measure_sup(
    p: ParameterQuadruple,
    w: GeneratorWord,
    Q: np.ndarray,
    precision: Precision | str = Precision.DD,
) -> tuple[float, Precision]:
    """Sampled sup of ||w(q) - q||, refined at double-double below DD_SWITCH."""
    if w.is_identity:
        return 0.0, Precision.DOUBLE
    dev = _deviations(p, w, Q)
    sup = float(np.max(dev))
    if Precision(precision) == Precision.DD and sup < DD_SWITCH:
        log.debug("deviation %.3e below switch; dd re-evaluation of %d samples", sup, len(Q))
        return _dd_sup(p, w, Q), Precision.DD
    return sup, Precision.DOUBLE


# ---------------------------------------------------------------------------
# Commutator estimate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    lhs: float
    rhs: float
    d1: float
    d2: float
    samples: int

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    def __bool__(self) -> bool:
        return self.passed


def commutator_bound_check(
    f1: GeneratorWord,
    f2: GeneratorWord,
    p: ParameterQuadruple,
    center: Sequence[complex],
    epsilon: float,
    tau: float,
    samples: int = 1024,
    seed: int = 0,
) -> BoundCheck:
    """sup ||[f1,f2](q) - q|| <= (2/tau) sup ||f1 - id|| sup ||f2 - id|| on B_{eps-4K-tau}."""
    Q = surface_ball_samples(p, center, epsilon, samples, seed)
    d1 = float(np.max(_deviations(p, f1, Q))) if not f1.is_identity else 0.0
    d2 = float(np.max(_deviations(p, f2, Q))) if not f2.is_identity else 0.0
    K = max(d1, d2)
    if not 4 * K + tau < epsilon:
        raise HypothesisViolated(
            "4 max deviation + tau must stay below epsilon",
            deviation=K,
            tau=tau,
            epsilon=epsilon,
        )
    inner = surface_ball_samples(p, center, epsilon - 4 * K - tau, samples, seed + 1)
    comm = commutator(f1, f2)
    lhs = 0.0 if comm.is_identity else float(np.max(_deviations(p, comm, inner)))
    rhs = 2 * d1 * d2 / tau
    return BoundCheck(
        passed=lhs <= rhs * (1 + 1e-9) + 1e-15,
        lhs=lhs,
        rhs=rhs,
        d1=d1,
        d2=d2,
        samples=len(inner),
    )


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------


def _level(
    n: int,
    elements: Iterable[GeneratorWord],
    p: Optional[ParameterQuadruple] = None,
    Q: Optional[np.ndarray] = None,
    precision: Precision | str = Precision.DD,
) -> CommutatorLevel:
    words = list(elements)
    sups: list[float] = []
    used = Precision.DOUBLE
    if p is not None and Q is not None:
        for w in words:
            sup, prec = measure_sup(p, w, Q, precision)
            sups.append(sup)
            if prec == Precision.DD:
                used = Precision.DD
    return CommutatorLevel(
        n=n,
        elements=[w.spelling for w in words],
        measured_sup=sups,
        precision=used,
        samples=0 if Q is None else len(Q),
    )


def seed_markoff(
    p: ParameterQuadruple = MARKOFF,
    center: Sequence[complex] = (0, 0, 0),
    epsilon: float = MARKOFF_EPSILON,
    samples: int = 512,
    seed: int = 0,
) -> CommutatorLevel:
    """S(0) = {h_x, h_x^-1, h_y, h_y^-1} with h = g^2, tangent to the identity at 0."""
    Q = surface_ball_samples(p, center, epsilon, samples, seed)
    return _level(0, [H_X, H_X.inverse(), H_Y, H_Y.inverse()], p, Q)


@dataclass(frozen=True)
class DMSeed:
    k: int
    level: CommutatorLevel
    conditioning: float
    base_point: tuple[complex, complex, complex]
    eigenvalue: complex


def seed_dm(a: float, tau: float, k_max: int = 10**6) -> DMSeed:
    """Smallest k with ||(D g_x at p1)^k - Id|| < tau, p1 = (a, 2, 2).

    The unit-modulus eigenvalue lambda = exp(i phi) with 2 cos(phi) = a^2 - 2
    narrows the search to k with |lambda^k - 1| < tau; the 3x3 matrix power
    decides among those.
    """
    p = dm_params(a)
    p1 = (complex(a), 2 + 0j, 2 + 0j)
    J = word_jet(p, G_X, p1).jacobian
    lam = complex(a * a / 2 - 1, math.sqrt(max(0.0, 4 * a * a - a**4)) / 2)
    phi = math.atan2(lam.imag, lam.real)
    ks = np.arange(1, k_max + 1)
    near = np.abs(2 * np.sin(ks * phi / 2))
    eye = np.eye(3)
    for k in ks[near < tau]:
        k = int(k)
        if np.linalg.norm(np.linalg.matrix_power(J, k) - eye, 2) < tau:
            break
    else:
        raise NoReturnFound(f"no return below tau={tau} for k <= {k_max}", a=a, tau=tau)
    _, vecs = np.linalg.eig(J)
    conditioning = float(np.linalg.cond(vecs))
    log.info("dm seed a=%s: k=%d, eigenbasis condition %.3g", a, k, conditioning)
    fx = G_X**k
    fy = G_Y.inverse() * fx * G_Y
    level = _level(0, [fx, fx.inverse(), fy, fy.inverse()])
    return DMSeed(k=k, level=level, conditioning=conditioning, base_point=p1, eigenvalue=lam)


def _seed_words(level: CommutatorLevel) -> list[GeneratorWord]:
    return [GeneratorWord(s) for s in level.elements]


def fit_epsilon(
    level0: CommutatorLevel,
    p: ParameterQuadruple,
    center: Sequence[complex],
    epsilon: float,
    samples: int = 512,
    seed: int = 0,
    max_halvings: int = 20,
) -> CascadeBudget:
    """Halve epsilon until every seed deviation on B_eps is below K = eps / 32."""
    words = _seed_words(level0)
    for _ in range(max_halvings + 1):
        budget = budget_for(epsilon)
        Q = surface_ball_samples(p, center, epsilon, samples, seed)
        worst = max(float(np.max(_deviations(p, w, Q))) for w in words)
        if worst < budget.K:
            return budget
        log.debug("eps=%.3e too loose (deviation %.3e >= K %.3e)", epsilon, worst, budget.K)
        epsilon /= 2
    raise SeedTooLoose(
        f"seed deviation still above K after {max_halvings} halvings",
        epsilon=epsilon,
        deviation=worst,
    )


# ---------------------------------------------------------------------------
# Cascade
# ---------------------------------------------------------------------------


def _canonical_pair(words: list[GeneratorWord]) -> tuple[GeneratorWord, GeneratorWord]:
    first = words[0]
    for other in words[1:]:
        if not commutes(first, other):
            return first, other
    raise AssertionError(f"level has no non-commuting pair: {[w.spelling for w in words]}")


def next_level(words: list[GeneratorWord], full: bool = False) -> list[GeneratorWord]:
    g1, g2 = _canonical_pair(words)
    out = [commutator(g1, g2), commutator(g1.inverse(), g2.inverse())]
    if commutes(out[0], out[1]):
        raise AssertionError("canonical commutators commute")
    if full:
        seen = {w.spelling for w in out}
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                c = commutator(words[i], words[j])
                if not c.is_identity and c.spelling not in seen:
                    seen.add(c.spelling)
                    out.append(c)
    return out


def run_cascade(
    level0: CommutatorLevel,
    p: ParameterQuadruple,
    budget: CascadeBudget,
    center: Sequence[complex],
    n_max: int,
    samples: int = 512,
    seed: int = 0,
    full: bool = False,
    precision: Precision | str = Precision.DD,
) -> CascadeReport:
    """Build S(1..n_max) and measure each element on the half-radius ball."""
    words = _seed_words(level0)
    big = surface_ball_samples(p, center, budget.epsilon, samples, seed)
    for w in words:
        dev = float(np.max(_deviations(p, w, big)))
        if not dev < budget.K:
            raise SeedTooLoose(
                f"seed {w.spelling} deviates by {dev:.3e} >= K={budget.K:.3e}",
                word=w.spelling,
                deviation=dev,
                K=budget.K,
            )
    half = surface_ball_samples(p, center, budget.epsilon / 2, samples, seed + 1)
    levels = [_level(0, words, p, half, precision)]
    for n in range(1, n_max + 1):
        words = next_level(words, full=full and n <= FULL_EXPANSION_MAX_LEVEL)
        levels.append(_level(n, words, p, half, precision))
        log.info("level %d: %d elements, sup %.3e", n, len(words), max(levels[-1].measured_sup))
    decay_ok = all(
        s <= budget.level_bound(lv.n) for lv in levels for s in lv.measured_sup
    )
    return CascadeReport(
        budget=budget,
        base_point=[complex(v) for v in center],
        levels=levels,
        decay_ok=decay_ok,
        params=p,
    )


def markoff_cascade(
    levels: int = 3,
    samples: int = 512,
    epsilon: float = MARKOFF_EPSILON,
    seed: int = 0,
    precision: Precision | str = Precision.DD,
) -> CascadeReport:
    level0 = seed_markoff(MARKOFF, (0, 0, 0), epsilon, samples, seed)
    return run_cascade(
        level0, MARKOFF, budget_for(epsilon), (0, 0, 0), levels, samples, seed, precision=precision
    )


def dm_cascade(
    a: float,
    levels: int = 3,
    samples: int = 512,
    tau: float = 0.01,
    epsilon: float = 0.05,
    seed: int = 0,
    precision: Precision | str = Precision.DD,
) -> tuple[DMSeed, CascadeReport]:
    dm = seed_dm(a, tau)
    p = dm_params(a)
    budget = fit_epsilon(dm.level, p, dm.base_point, epsilon, samples, seed)
    report = run_cascade(
        dm.level, p, budget, dm.base_point, levels, samples, seed, precision=precision
    )
    return dm, report


def summarize(report: CascadeReport) -> dict[str, Any]:
    """Compact per-level view used by scan records."""
    return {
        "status": "ok",
        "decay_ok": report.decay_ok,
        "epsilon": report.budget.epsilon,
        "K": report.budget.K,
        "levels": [max(lv.measured_sup) if lv.measured_sup else None for lv in report.levels],
    }
