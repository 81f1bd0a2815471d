"""Fixed points of word maps on the surface and their classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial import cKDTree

from .action import restricted_derivative, word_jet_batch
from .console import get_logger
from .errors import SingularPoint
from .fatou import sample_ball
from .fibers import FIBER_COORDS, GENERATOR, cycled_params, fiber_period
from .models import (
    Axis,
    FixedPointKind,
    FixedPointRecord,
    ParameterQuadruple,
    RestrictedDerivative,
    SurfacePoint,
    format_complex,
)
from .picard import phi_batch
from .surface import critical_points, gradient, singular_points, surface_point, surface_residual
from .words import (
    ElementKind,
    GeneratorWord,
    Parity,
    classify,
    cyclic_reduce,
    enumerate_words,
)

log = get_logger(__name__)

SADDLE_BAND = 1e-6
SHEAR_TRACE_TOL = 1e-8
SHEAR_NILPOTENT_MIN = 1e-6


class SeedStrategy(BaseModel):
    """Multi-start seeds for the Newton search."""

    grid_n: int = Field(20, ge=0, description="Points per axis of the real grid")
    grid_box: float = Field(6.0, gt=0.0)
    torus_grid: int = Field(0, ge=0, description="Phi(T^2) seeds per angle")
    random: int = Field(200, ge=0, description="Random complex seeds")
    random_box: float = Field(10.0, gt=0.0)
    seed: int = 0
    max_iter: int = Field(60, ge=1)
    tol: float = Field(1e-10, gt=0.0)
    dedupe: float = Field(1e-6, gt=0.0)
    snap: float = Field(
        1e-4, ge=0.0, description="Roots this close to a fixed singular point are moved onto it"
    )


def build_seeds(strategy: SeedStrategy) -> np.ndarray:
    parts = []
    if strategy.grid_n:
        axis = np.linspace(-strategy.grid_box, strategy.grid_box, strategy.grid_n)
        g = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        parts.append(g.astype(complex))
    if strategy.torus_grid:
        angles = (np.arange(strategy.torus_grid) + 0.5) * 2 * np.pi / strategy.torus_grid
        th, ph = np.meshgrid(angles, angles, indexing="ij")
        parts.append(phi_batch(np.exp(1j * th.ravel()), np.exp(1j * ph.ravel())))
    if strategy.random:
        rng = np.random.default_rng(strategy.seed)
        parts.append(sample_ball(np.zeros(3), strategy.random_box, strategy.random, rng))
    if not parts:
        raise ValueError("seed strategy produces no seeds")
    return np.concatenate(parts)


def _converged(p: ParameterQuadruple, F: np.ndarray, Q: np.ndarray, tol: float) -> np.ndarray:
    scale = 1 + np.linalg.norm(Q, axis=1)
    res = np.abs(surface_residual(p, Q))
    return (np.linalg.norm(F, axis=1) < tol * scale) & (res < tol * scale**3)


def newton_solve(
    p: ParameterQuadruple, w: GeneratorWord, seeds: np.ndarray, strategy: SeedStrategy
) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss-Newton on (w(q) - q, F(q)) = 0 with the bordered 4x3 Jacobian."""
    Q = np.array(seeds, dtype=complex)
    active = np.ones(len(Q), dtype=bool)
    done = np.zeros(len(Q), dtype=bool)
    eye = np.eye(3)
    with np.errstate(all="ignore"):
        for it in range(strategy.max_iter + 1):
            idx = np.nonzero(active)[0]
            if not len(idx):
                break
            cur = Q[idx]
            vals, J, escaped = word_jet_batch(p, w, cur)
            F = vals - cur
            ok = ~escaped & _converged(p, F, cur, strategy.tol)
            done[idx[ok]] = True
            bad = escaped | ~np.all(np.isfinite(F), axis=1)
            active[idx[ok | bad]] = False
            if it == strategy.max_iter:
                break
            move = ~(ok | bad)
            if not move.any():
                continue
            sub = idx[move]
            rows = cur[move]
            bordered = np.concatenate([J[move] - eye, gradient(p, rows)[:, None, :]], axis=1)
            rhs = np.concatenate([F[move], surface_residual(p, rows)[:, None]], axis=1)
            step = -(np.linalg.pinv(bordered) @ rhs[..., None])[..., 0]
            size = np.linalg.norm(step, axis=1)
            cap = 1 + np.linalg.norm(rows, axis=1)
            factor = np.minimum(1.0, cap / np.where(size > 0, size, 1.0))
            Q[sub] = rows + step * factor[:, None]
            blown = np.linalg.norm(Q[sub], axis=1) > 1e6
            active[sub[blown]] = False
    return Q, done


def snap_to_singular(
    p: ParameterQuadruple, w: GeneratorWord, points: np.ndarray, radius: float
) -> np.ndarray:
    """Replace roots within ``radius`` of a singular point fixed by ``w`` by that point.

    Newton converges only linearly at singular points, so roots stall a few
    1e-6 away from them.
    """
    if not len(points) or radius <= 0:
        return points
    sing = np.array([sp.coords() for sp in singular_points(p)], dtype=complex).reshape(-1, 3)
    if not len(sing):
        return points
    vals, _, escaped = word_jet_batch(p, w, sing)
    scale = 1 + np.linalg.norm(sing, axis=1)
    with np.errstate(invalid="ignore"):
        fixed = ~escaped & (np.linalg.norm(vals - sing, axis=1) < 1e-8 * scale)
    sing = sing[fixed]
    if not len(sing):
        return points
    tree = cKDTree(np.concatenate([sing.real, sing.imag], axis=1))
    dist, nearest = tree.query(np.concatenate([points.real, points.imag], axis=1))
    near = dist <= radius
    out = points.copy()
    out[near] = sing[nearest[near]]
    if near.any():
        log.debug("%s: %d roots snapped onto singular points", w.spelling, int(near.sum()))
    return out


def dedupe_points(points: np.ndarray, radius: float) -> np.ndarray:
    """First representative of every cluster of points within ``radius``."""
    if not len(points):
        return points
    emb = np.concatenate([points.real, points.imag], axis=1)
    tree = cKDTree(emb)
    removed = np.zeros(len(points), dtype=bool)
    for i in range(len(points)):
        if removed[i]:
            continue
        for j in tree.query_ball_point(emb[i], radius):
            if j > i:
                removed[j] = True
    return points[~removed]


def _trace_distance(t: complex) -> float:
    """Distance from t to the real segment [-2, 2]."""
    return abs(t - min(2.0, max(-2.0, t.real)))


def classify_fixed_point(
    p: ParameterQuadruple, w: GeneratorWord, q: Any
) -> FixedPointRecord:
    qa = np.array([complex(v) for v in q])
    sp = surface_point(p, qa)
    scale = 1 + np.linalg.norm(qa)
    if np.linalg.norm(gradient(p, qa)) <= 1e-8 * scale**2:
        try:
            rd: Optional[RestrictedDerivative] = restricted_derivative(p, w, qa, fixed_tol=1e-8)
        except SingularPoint:
            rd = None
        return FixedPointRecord(point=sp, word=w.spelling, kind=FixedPointKind.SINGULAR, restricted=rd)
    rd = restricted_derivative(p, w, qa, fixed_tol=1e-8)
    t = rd.trace
    dist = _trace_distance(t)
    M2 = np.array(rd.matrix2, dtype=complex)
    if dist > SADDLE_BAND:
        kind = FixedPointKind.SADDLE
    elif abs(t - 2) <= SHEAR_TRACE_TOL:
        nilpotent = np.linalg.norm(M2 - np.eye(2))
        kind = FixedPointKind.SHEAR if nilpotent > SHEAR_NILPOTENT_MIN else FixedPointKind.PARABOLIC_LIKE
    elif abs(t + 2) <= SHEAR_TRACE_TOL:
        kind = FixedPointKind.PARABOLIC_LIKE
    else:
        kind = FixedPointKind.ELLIPTIC_LIKE
    return FixedPointRecord(
        point=sp,
        word=w.spelling,
        kind=kind,
        restricted=rd,
        borderline=1e-10 < dist <= SADDLE_BAND,
    )


@dataclass
class FixedPointSearch:
    records: list[FixedPointRecord] = field(default_factory=list)
    seeds: int = 0
    converged: int = 0
    escaped: int = 0

    def __iter__(self) -> Iterator[FixedPointRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def newton_fixed_points(
    p: ParameterQuadruple,
    w: GeneratorWord,
    strategy: Optional[SeedStrategy] = None,
) -> FixedPointSearch:
    """Multi-start Newton for fixed points of ``w`` on the surface.

    Seeds that do not converge are dropped; the census is kept on the result.
    """
    if w.is_identity:
        raise ValueError("the identity fixes every point")
    strategy = strategy or SeedStrategy()
    seeds = build_seeds(strategy)
    Q, done = newton_solve(p, w, seeds, strategy)
    found = dedupe_points(snap_to_singular(p, w, Q[done], strategy.snap), strategy.dedupe)
    order = np.lexsort((found[:, 2].real, found[:, 1].real, found[:, 0].real)) if len(found) else []
    records = []
    for q in found[order] if len(found) else []:
        try:
            records.append(classify_fixed_point(p, w, q))
        except SingularPoint as e:
            log.debug("skipping %s: %s", q, e)
    search = FixedPointSearch(
        records=records,
        seeds=len(seeds),
        converged=int(done.sum()),
        escaped=int(len(seeds) - done.sum()),
    )
    log.info(
        "%s: %d seeds, %d converged, %d distinct fixed points",
        w.spelling, search.seeds, search.converged, len(records),
    )
    return search


def common_fixed_points(p: ParameterQuadruple) -> list[SurfacePoint]:
    """Common fixed points of s_x, s_y, s_z that lie on the surface."""
    out = []
    for q in critical_points(p):
        scale = 1 + np.linalg.norm(q)
        if abs(surface_residual(p, q)) < 1e-8 * scale**3:
            out.append(surface_point(p, q))
    out.sort(key=lambda sp: (round(sp.x.real, 9), round(sp.y.real, 9), round(sp.z.real, 9)))
    return out


# ---------------------------------------------------------------------------
# Shear census
# ---------------------------------------------------------------------------


def _fiber_points(
    p: ParameterQuadruple, axis: Axis, c: complex, U: np.ndarray
) -> np.ndarray:
    """Both fiber-conic points over each first fiber coordinate in ``U``."""
    pa, pu, pv = cycled_params(p, axis)
    iu, iv = FIBER_COORDS[axis]
    b = c * U - pv
    cc = U * U - pu * U + c * c - pa * c - p.D
    disc = np.sqrt(b * b - 4 * cc)
    out = np.zeros((2 * len(U), 3), dtype=complex)
    out[:, axis.index] = c
    out[:, iu] = np.repeat(U, 2)
    out[0::2, iv] = (-b + disc) / 2
    out[1::2, iv] = (-b - disc) / 2
    return out


def _exceptional_points(p: ParameterQuadruple, axis: Axis, c: complex) -> np.ndarray:
    """Fiber points with u = P_u / 2 or v = P_v / 2."""
    pa, pu, pv = cycled_params(p, axis)
    iu, iv = FIBER_COORDS[axis]
    first = _fiber_points(p, axis, c, np.array([pu / 2]))
    # Same conic with the roles of u and v swapped.
    b = c * (pv / 2) - pu
    cc = (pv / 2) ** 2 - pv * (pv / 2) + c * c - pa * c - p.D
    disc = np.sqrt(complex(b * b - 4 * cc))
    second = np.zeros((2, 3), dtype=complex)
    second[:, axis.index] = c
    second[:, iv] = pv / 2
    second[:, iu] = [(-b + disc) / 2, (-b - disc) / 2]
    return dedupe_points(np.concatenate([first, second]), 1e-9)


def shear_census(
    p: ParameterQuadruple,
    axis: Axis | str = Axis.X,
    c: float = 0.0,
    n: int = 1000,
    seed: int = 0,
    box: float = 3.0,
    tol: float = 1e-6,
) -> dict[str, Any]:
    """Classify sampled points of a periodic fiber under g_axis^period."""
    axis = Axis(axis)
    c = complex(c)
    period = fiber_period(c)
    if period is None:
        raise ValueError(f"fiber {c} has no finite period")
    word = GENERATOR[axis] ** period
    _, pu, pv = cycled_params(p, axis)
    iu, iv = FIBER_COORDS[axis]
    rng = np.random.default_rng(seed)
    m = (n + 1) // 2
    U = rng.uniform(-box, box, m) + 1j * rng.uniform(-box, box, m)
    pts = _fiber_points(p, axis, c, U)[:n]
    counts = {"shear": 0, "exceptional": 0, "singular": 0, "other": 0}
    others: list[dict[str, Any]] = []
    for q in pts:
        if abs(q[iu] - pu / 2) <= tol or abs(q[iv] - pv / 2) <= tol:
            counts["exceptional"] += 1
            continue
        rec = classify_fixed_point(p, word, q)
        if rec.kind == FixedPointKind.SHEAR:
            counts["shear"] += 1
        elif rec.kind == FixedPointKind.SINGULAR:
            counts["singular"] += 1
        else:
            counts["other"] += 1
            if len(others) < 20:
                others.append({"point": [format_complex(v) for v in q], "kind": rec.kind.value})
    exceptional = []
    for q in _exceptional_points(p, axis, c):
        try:
            kind = classify_fixed_point(p, word, q).kind.value
        except SingularPoint:
            kind = FixedPointKind.SINGULAR.value
        exceptional.append({"point": [format_complex(v) for v in q], "kind": kind})
    return {
        "axis": axis.value,
        "c": format_complex(c),
        "period": period,
        "word": word.spelling,
        "sampled": len(pts),
        "counts": counts,
        "non_shear": others,
        "exceptional_points": exceptional,
    }


# ---------------------------------------------------------------------------
# Property P screen
# ---------------------------------------------------------------------------


def _cyclic_key(s: str) -> str:
    rotations = [s[i:] + s[:i] for i in range(len(s))]
    r = s[::-1]
    rotations += [r[i:] + r[:i] for i in range(len(r))]
    return min(rotations)


def screen_words(max_len: int) -> list[GeneratorWord]:
    """Cyclically reduced hyperbolic words of Gamma, one per rotation/inversion class."""
    seen: set[str] = set()
    out = []
    for w in enumerate_words(max_len, Parity.GAMMA):
        if len(w) < 2:
            continue
        _, conj = cyclic_reduce(w)
        if not conj.is_identity or classify(w).kind != ElementKind.HYPERBOLIC:
            continue
        key = _cyclic_key(w.spelling)
        if key in seen:
            continue
        seen.add(key)
        out.append(w)
    return out


def property_p_screen(
    p: ParameterQuadruple,
    max_len: int = 4,
    strategy: Optional[SeedStrategy] = None,
    band: float = 1e-4,
) -> list[FixedPointRecord]:
    """Smooth fixed points of hyperbolic words whose restricted trace is near [-2, 2]."""
    strategy = strategy or SeedStrategy(grid_n=6, random=60)
    flagged = []
    words = screen_words(max_len)
    for w in words:
        for rec in newton_fixed_points(p, w, strategy).records:
            if rec.kind == FixedPointKind.SINGULAR or rec.restricted is None:
                continue
            if _trace_distance(rec.restricted.trace) <= band:
                flagged.append(rec)
    log.info("property P: %d words screened, %d flags", len(words), len(flagged))
    return flagged
