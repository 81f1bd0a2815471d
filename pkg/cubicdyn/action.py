"""Numeric action of words on C^3: values, Jacobians and restricted derivatives.

s_x(x, y, z) = (-x - yz + A, y, z) and cyclically; a word is applied from
its right-most letter. The same evaluation loop serves single points,
numpy batches (leading axes), exact Fractions in object arrays and mpmath
scalars.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Any, Sequence

import mpmath
import numpy as np
from scipy.linalg import eig, null_space

from .errors import ChartDegenerate, NotFixedPoint, OrbitEscaped, SingularPoint
from .models import Chart, ParameterQuadruple, Precision, RestrictedDerivative, format_complex
from .precision import ESCAPE_MODULUS, working_precision
from .surface import chart_denominator, gradient, surface_residual, tangent_basis, volume_form_value
from .words import GeneratorWord, Letter

_AXIS = {"x": 0, "y": 1, "z": 2}
_OTHERS = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def _spelling(w: GeneratorWord | str | Letter) -> str:
    if isinstance(w, GeneratorWord):
        return w.spelling
    if isinstance(w, Letter):
        return w.value
    return GeneratorWord.parse(w).spelling


def _col(v: Any) -> Any:
    return np.asarray(v)[..., None]


def _run(
    P: Sequence[Any],
    spelling: str,
    coords: list[Any],
    J: np.ndarray | None = None,
    cutoff: float | None = None,
    batch: bool = False,
) -> tuple[list[Any], np.ndarray | None]:
    c = list(coords)
    escaped = None
    if batch and cutoff is not None:
        escaped = np.zeros(np.shape(c[0]), dtype=bool)
    for step, ch in enumerate(reversed(spelling)):
        k = _AXIS[ch]
        i, j = _OTHERS[k]
        if J is not None:
            J[..., k, :] = (
                -J[..., k, :] - _col(c[j]) * J[..., i, :] - _col(c[i]) * J[..., j, :]
            )
        c[k] = -c[k] - c[i] * c[j] + P[k]
        if cutoff is None:
            continue
        if batch:
            with np.errstate(invalid="ignore"):
                big = np.maximum(np.maximum(abs(c[0]), abs(c[1])), abs(c[2]))
                escaped |= ~(big <= cutoff)
        elif not max(abs(c[0]), abs(c[1]), abs(c[2])) <= cutoff:
            raise OrbitEscaped(
                f"orbit escaped after {step + 1} letter(s)",
                step=step + 1,
                prefix=spelling[len(spelling) - step - 1 :],
                partial=[complex(v) for v in c],
            )
    return c, escaped


def apply_letter(p: ParameterQuadruple, letter: Letter | str, q: Any) -> np.ndarray:
    ch = letter.value if isinstance(letter, Letter) else letter
    arr = np.array(q, dtype=complex)
    c, _ = _run(p.as_tuple(), ch, [arr[..., 0], arr[..., 1], arr[..., 2]])
    return np.stack(c, axis=-1)


def apply_word(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    q: Any,
    precision: Precision | str = Precision.DOUBLE,
    cutoff: float | None = ESCAPE_MODULUS,
) -> np.ndarray:
    """Image of a single point; raises OrbitEscaped past ``cutoff``.

    In dd mode the result is an object array of mpmath.mpc values and no
    cutoff applies.
    """
    s = _spelling(w)
    if Precision(precision) == Precision.DD:
        with working_precision(Precision.DD):
            P = [mpmath.mpc(v) for v in p.as_tuple()]
            c = [v if isinstance(v, mpmath.mpc) else mpmath.mpc(complex(v)) for v in q]
            c, _ = _run(P, s, c)
        return np.array(c, dtype=object)
    x, y, z = (complex(v) for v in q)
    c, _ = _run(p.as_tuple(), s, [x, y, z], cutoff=cutoff)
    return np.array(c, dtype=complex)


def apply_word_batch(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    Q: np.ndarray,
    cutoff: float = ESCAPE_MODULUS,
) -> tuple[np.ndarray, np.ndarray]:
    """Images of an (n, 3) batch plus the mask of escaped rows (set to nan)."""
    Q = np.asarray(Q, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        c, escaped = _run(
            p.as_tuple(),
            _spelling(w),
            [Q[..., 0].copy(), Q[..., 1].copy(), Q[..., 2].copy()],
            cutoff=cutoff,
            batch=True,
        )
    out = np.stack(c, axis=-1)
    out[escaped] = np.nan
    return out, escaped


def apply_word_batch_dd(
    p: ParameterQuadruple, w: GeneratorWord | str, Q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(sources, images) of an (n, 3) batch as object arrays of mpmath.mpc at 106 bits."""
    to_mpc = np.vectorize(mpmath.mpc, otypes=[object])
    with working_precision(Precision.DD):
        P = [mpmath.mpc(v) for v in p.as_tuple()]
        src = [to_mpc(np.asarray(Q, dtype=complex)[:, k]) for k in range(3)]
        c, _ = _run(P, _spelling(w), list(src))
    return np.stack(src, axis=-1), np.stack(c, axis=-1)


@dataclass(frozen=True)
class Jet:
    value: np.ndarray
    jacobian: np.ndarray


def letter_jacobian(letter: Letter | str, q: Any) -> np.ndarray:
    ch = letter.value if isinstance(letter, Letter) else letter
    x, y, z = q
    J = np.eye(3, dtype=complex)
    if ch == "x":
        J[0] = [-1, -z, -y]
    elif ch == "y":
        J[1] = [-z, -1, -x]
    else:
        J[2] = [-y, -x, -1]
    return J


def word_jet(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    q: Any,
    cutoff: float | None = ESCAPE_MODULUS,
) -> Jet:
    x, y, z = (complex(v) for v in q)
    J = np.eye(3, dtype=complex)
    c, _ = _run(p.as_tuple(), _spelling(w), [x, y, z], J=J, cutoff=cutoff)
    return Jet(value=np.array(c, dtype=complex), jacobian=J)


def word_jet_batch(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    Q: np.ndarray,
    cutoff: float = ESCAPE_MODULUS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    Q = np.asarray(Q, dtype=complex)
    J = np.broadcast_to(np.eye(3, dtype=complex), Q.shape[:-1] + (3, 3)).copy()
    with np.errstate(over="ignore", invalid="ignore"):
        c, escaped = _run(
            p.as_tuple(),
            _spelling(w),
            [Q[..., 0].copy(), Q[..., 1].copy(), Q[..., 2].copy()],
            J=J,
            cutoff=cutoff,
            batch=True,
        )
    values = np.stack(c, axis=-1)
    values[escaped] = np.nan
    J[escaped] = np.nan
    return values, J, escaped


def exact_word_jacobian(
    params: Sequence[Any], w: GeneratorWord | str, q: Sequence[Any]
) -> tuple[list[Any], np.ndarray]:
    """Value and Jacobian with exact scalars (ints / Fractions) in object arrays."""
    J = np.array([[1 if i == j else 0 for j in range(3)] for i in range(3)], dtype=object)
    c, _ = _run(list(params), _spelling(w), list(q), J=J)
    return c, J


def restricted_derivative(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    q: Any,
    fixed_tol: float = 1e-8,
    singular_tol: float = 1e-8,
) -> RestrictedDerivative:
    """Jacobian of ``w`` at a fixed point compressed to an invariant plane.

    Smooth points use ker(gradient). At singular points the gradient
    vanishes and the plane is the invariant complement of the eigenvalue-1
    line (kernel of its left eigenvector), which requires eigenvalue 1 to be
    simple.
    """
    coords = q.coords() if hasattr(q, "coords") else q
    qa = np.array([complex(v) for v in coords])
    jet = word_jet(p, w, qa)
    scale = 1 + np.linalg.norm(qa)
    drift = np.linalg.norm(jet.value - qa)
    if drift > fixed_tol * scale:
        raise NotFixedPoint(f"|w(q) - q| = {drift:.3e}", drift=drift)
    J = jet.jacobian
    g = gradient(p, qa)
    plane = "tangent"
    if np.linalg.norm(g) > singular_tol * scale**2:
        basis = null_space(g[None, :])
    else:
        vals, left = eig(J, left=True, right=False)
        near = np.abs(vals - 1) < 1e-6
        if near.sum() != 1:
            raise SingularPoint(
                "singular point without a simple eigenvalue 1",
                eigenvalues=[complex(v) for v in vals],
            )
        ell = left[:, int(np.argmax(near))].conj()
        basis = null_space(ell[None, :])
        plane = "eigen_complement"
    M2 = basis.conj().T @ J @ basis
    ev = np.linalg.eigvals(M2)
    return RestrictedDerivative(
        matrix2=M2.tolist(),
        eigenvalues=sorted(ev.tolist(), key=lambda v: (abs(v), v.imag)),
        trace=complex(np.trace(M2)),
        det=complex(np.linalg.det(M2)),
        plane=plane,
    )


def volume_form_pullback(
    p: ParameterQuadruple,
    w: GeneratorWord | str,
    q: Any,
    chart: Chart | str | None = None,
) -> complex:
    """(w^* Omega)(t1, t2) / Omega(t1, t2) at q; +-1 for every word."""
    qa = np.array([complex(v) for v in q])
    jet = word_jet(p, w, qa)
    if chart is None:
        chart = max(
            Chart,
            key=lambda ch: min(
                abs(chart_denominator(p, qa, ch)),
                abs(chart_denominator(p, jet.value, ch)),
            ),
        )
    t1, t2 = tangent_basis(p, qa)
    base = volume_form_value(p, qa, chart, t1, t2)
    if abs(base) == 0:
        raise ChartDegenerate("tangent pair is degenerate in this chart")
    image = volume_form_value(
        p, jet.value, chart, jet.jacobian @ t1, jet.jacobian @ t2
    )
    return image / base


# ---------------------------------------------------------------------------
# Orbit traces
# ---------------------------------------------------------------------------

ORBIT_COLUMNS = ["step", "prefix", "x", "y", "z", "residual"]


def orbit_trace(
    p: ParameterQuadruple, w: GeneratorWord | str, q: Any
) -> list[dict[str, Any]]:
    """Rows after each applied letter; stops at the escape cutoff."""
    s = _spelling(w)
    cur = np.array([complex(v) for v in q])
    rows = [_row(p, 0, "", cur)]
    for k in range(1, len(s) + 1):
        try:
            cur = apply_word(p, s[-k], cur)
        except OrbitEscaped:
            break
        rows.append(_row(p, k, s[len(s) - k :], cur))
    return rows


def _row(p: ParameterQuadruple, step: int, prefix: str, q: np.ndarray) -> dict[str, Any]:
    return {
        "step": step,
        "prefix": prefix,
        "x": format_complex(q[0]),
        "y": format_complex(q[1]),
        "z": format_complex(q[2]),
        "residual": float(abs(surface_residual(p, q))),
    }


def orbit_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ORBIT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
