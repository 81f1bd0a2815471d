"""Charts near the triangle at infinity and the escape cascade.

Near the vertex v_k the standard coordinates are the two minor coordinates
divided by the dominant one; the distance to the vertex is their Euclidean
norm. Distances shrink doubly exponentially along the cascade, so they are
carried as log10 values computed with mpmath.
"""
from __future__ import annotations

import math
from typing import Any, Literal, Sequence

import mpmath
import numpy as np

from .action import apply_word
from .console import get_logger
from .errors import ContractionFailure, NotAlgebraicallyStable, NotNearVertex
from .models import ChartPoint, EscapeCertificate, EscapeLevel, ParameterQuadruple, Precision
from .precision import working_precision
from .words import GeneratorWord, InfinityVertex, commutator, ind_attr

log = get_logger(__name__)

CHART_RADIUS = 0.2
MAX_RETRIES = 4

_MINOR = {0: (1, 2), 1: (0, 2), 2: (0, 1)}
PAIRS = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j]


def _dominant(q: Sequence[Any]) -> int:
    mods = [abs(v) for v in q]
    return max(range(3), key=lambda i: mods[i])


def to_chart(q: Sequence[Any], radius: float = CHART_RADIUS) -> ChartPoint:
    k = _dominant(q)
    i, j = _MINOR[k]
    u1, u2 = q[i] / q[k], q[j] / q[k]
    if not (abs(u1) < radius and abs(u2) < radius):
        raise NotNearVertex(
            "no coordinate dominates the others", radius=radius, point=[complex(v) for v in q]
        )
    return ChartPoint(vertex=f"v{k + 1}", u1=complex(u1), u2=complex(u2))


def dist_to_vertices(q: Sequence[Any], radius: float = CHART_RADIUS) -> tuple[InfinityVertex, float]:
    chart = to_chart(q, radius)
    return InfinityVertex(chart.vertex), chart.dist


def log10_dist_to_vertices(
    q: Sequence[Any], radius: float = CHART_RADIUS
) -> tuple[InfinityVertex, float]:
    """Like dist_to_vertices but exact in exponent range (mpmath)."""
    with working_precision(Precision.DD):
        mq = [v if isinstance(v, mpmath.mpc) else mpmath.mpc(complex(v)) for v in q]
        k = _dominant(mq)
        i, j = _MINOR[k]
        u1, u2 = mq[i] / mq[k], mq[j] / mq[k]
        if not (abs(u1) < radius and abs(u2) < radius):
            raise NotNearVertex("no coordinate dominates the others", radius=radius)
        d = mpmath.sqrt(abs(u1) ** 2 + abs(u2) ** 2)
        if d == 0:
            return InfinityVertex(f"v{k + 1}"), float("-inf")
        return InfinityVertex(f"v{k + 1}"), float(mpmath.log10(d))


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

H = {1: GeneratorWord("zyzy"), 2: GeneratorWord("xzxz"), 3: GeneratorWord("yxyx")}
G = {1: GeneratorWord("zy"), 2: GeneratorWord("xz"), 3: GeneratorWord("yx")}


def build_gamma_ij(
    style: Literal["markoff", "dm"] = "markoff", k: int = 1
) -> dict[tuple[int, int], GeneratorWord]:
    """The six words gamma_{i,j} with Ind = v_i and Attr = v_j.

    ``markoff``: h = g^2, gamma_12 = [h_x, h_z], gamma_13 = [h_y, h_z],
    gamma_23 = [h_y, h_x]. ``dm``: the same pattern with f_x = g_x^k and
    f_y, f_z its conjugates by g_y, g_z. gamma_ji = gamma_ij^-1.
    """
    if style == "markoff":
        f = H
    elif style == "dm":
        if k < 1:
            raise ValueError("k must be >= 1")
        fx = G[1] ** k
        f = {1: fx, 2: G[2].inverse() * fx * G[2], 3: G[3].inverse() * fx * G[3]}
    else:
        raise ValueError(f"unknown style {style!r}")
    base = {
        (1, 2): commutator(f[1], f[3]),
        (1, 3): commutator(f[2], f[3]),
        (2, 3): commutator(f[2], f[1]),
    }
    out: dict[tuple[int, int], GeneratorWord] = {}
    for (i, j), w in base.items():
        out[(i, j)] = w
        out[(j, i)] = w.inverse()
    for (i, j), w in out.items():
        ind, attr = ind_attr(w)
        if (ind.index + 1, attr.index + 1) != (i, j):
            raise NotAlgebraicallyStable(
                f"gamma_{i}{j} has Ind={ind.value}, Attr={attr.value}", word=w.spelling
            )
    return out


def level_words(
    gammas: dict[tuple[int, int], GeneratorWord], n_max: int
) -> list[dict[Any, GeneratorWord]]:
    """Even levels are keyed by (i, j); odd levels by i.

    tau_i = [gamma_ij, gamma_ik] (j < k the other two vertices) and the next
    even level is gamma_ij = [tau_j, tau_i].
    """
    levels: list[dict[Any, GeneratorWord]] = [dict(gammas)]
    for n in range(1, n_max + 1):
        prev = levels[-1]
        if n % 2:
            cur: dict[Any, GeneratorWord] = {}
            for i in (1, 2, 3):
                j, k = [m for m in (1, 2, 3) if m != i]
                cur[i] = commutator(prev[(i, j)], prev[(i, k)])
        else:
            cur = {(i, j): commutator(prev[j], prev[i]) for i, j in PAIRS}
        levels.append(cur)
    return levels


def _pick(level: dict[Any, GeneratorWord], n: int, start: int) -> tuple[GeneratorWord, int]:
    """Word of level n applied from vertex ``start`` and the vertex it lands at.

    Level words past the first are commutators and not cyclically reduced, so
    the target comes from the labels: gamma_ij^(n) lands at v_j and tau_i^(n)
    at v_i. Both are holomorphic off v_i, and i is never ``start``.
    """
    nxt = start % 3 + 1
    if n % 2:
        return level[nxt], nxt
    j = nxt % 3 + 1
    return level[(nxt, j)], j


# ---------------------------------------------------------------------------
# Escape cascade
# ---------------------------------------------------------------------------


def _image_distance(
    p: ParameterQuadruple, w: GeneratorWord, q: Sequence[complex], radius: float, n: int
) -> tuple[InfinityVertex, float]:
    img = apply_word(p, w, q, precision=Precision.DD)
    try:
        return log10_dist_to_vertices(img, radius)
    except NotNearVertex as e:
        raise ContractionFailure(
            f"level {n} image is not near a vertex", level=n, radius=radius
        ) from e


def _attempt(
    p: ParameterQuadruple,
    levels: list[dict[Any, GeneratorWord]],
    q: Sequence[complex],
    radius: float,
) -> EscapeCertificate:
    start, log_d0 = log10_dist_to_vertices(q, radius)
    k = start.index + 1
    log_ratio = -math.inf
    for (i, j), w in levels[0].items():
        if i == k:
            continue
        vertex, log_d = _image_distance(p, w, q, radius, 0)
        if vertex.index + 1 != j:
            raise ContractionFailure(
                f"gamma_{i}{j} sent the point to {vertex.value}", level=0, radius=radius
            )
        log_ratio = max(log_ratio, log_d - log_d0)
    if not log_ratio < 0:
        raise ContractionFailure(
            f"no contraction at level 0 (log10 ratio {log_ratio:.3g})", level=0, radius=radius
        )
    records: list[EscapeLevel] = []
    for n, level in enumerate(levels):
        w, target = _pick(level, n, k)
        attr = InfinityVertex(f"v{target}")
        vertex, log_d = _image_distance(p, w, q, radius, n)
        if vertex != attr:
            raise ContractionFailure(
                f"level {n} landed at {vertex.value}, expected {attr.value}",
                level=n,
                radius=radius,
            )
        bound = 4**n * log_ratio + log_d0
        records.append(
            EscapeLevel(
                n=n,
                word=w.spelling,
                start_vertex=start.value,
                vertex=vertex.value,
                expected_vertex=attr.value,
                log10_dist=log_d,
                bound_ok=log_d <= bound + 1e-9 * abs(bound),
            )
        )
        log.debug("level %d: log10 dist %.4g (bound %.4g)", n, log_d, bound)
    return EscapeCertificate(
        lam=10**log_ratio,
        log10_start_dist=log_d0,
        levels=records,
        verified_levels=len(records),
        chart_radius=radius,
    )


def escape_cascade(
    p: ParameterQuadruple,
    gammas: dict[tuple[int, int], GeneratorWord],
    q: Sequence[complex],
    n_max: int,
    radius: float = CHART_RADIUS,
    retries: int = MAX_RETRIES,
) -> EscapeCertificate:
    """Apply the level words to q and certify dist_n <= lambda^(4^n) dist_0.

    lambda is the largest level-0 contraction ratio over the holomorphic
    gamma_ij at q. On an itinerary failure the chart radius is halved, up to
    ``retries`` times; q itself never changes, so a start point outside the
    halved chart ends the retries with NotNearVertex.
    """
    levels = level_words(gammas, n_max)
    point = np.array([complex(v) for v in q])
    last: ContractionFailure | None = None
    for attempt in range(retries + 1):
        try:
            return _attempt(p, levels, point, radius)
        except ContractionFailure as e:
            last = e
            log.info("escape attempt %d failed (%s); halving chart radius", attempt, e)
            radius /= 2
    assert last is not None
    raise last


def summarize(cert: EscapeCertificate) -> dict[str, Any]:
    return {
        "status": "ok",
        "lambda": cert.lam,
        "verified_levels": cert.verified_levels,
        "bound_ok": all(lv.bound_ok for lv in cert.levels),
        "log10_dist": [lv.log10_dist for lv in cert.levels],
    }
