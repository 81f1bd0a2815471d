"""Core Pydantic models for cubicdyn certificates, reports and run configs.

Records that cross a module, process or file boundary live here. Hot-path
objects (words, numpy point batches) stay as plain dataclasses / arrays in
their own modules and are converted to these models at the edges.

Complex scalars serialize in JSON as ``"re+imi"`` strings (``"1.5-2.0i"``)
and parse from that form, from Python numbers or from ``[re, im]`` pairs.
"""
from __future__ import annotations

import hashlib
import json
import math
from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Mapping, Optional

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    model_validator,
)

# ---------------------------------------------------------------------------
# Complex scalar codec
# ---------------------------------------------------------------------------


def parse_complex(value: Any) -> complex:
    """Parse ``value`` into a Python complex.

    Accepts complex / real numbers, ``[re, im]`` pairs and strings such as
    ``"1.5-2i"``, ``"3i"``, ``"-i"`` or ``"2+0.5j"``.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not complex scalars")
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float, Fraction)):
        return complex(value)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"expected [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("j", "i")
        if not text:
            raise ValueError("empty complex scalar")
        if text.endswith("i"):
            body = text[:-1]
            if body in ("", "+", "-") or body[-1] in "+-":
                body += "1"
            text = body + "j"
        try:
            return complex(text)
        except ValueError as e:
            raise ValueError(f"not a complex scalar: {value!r}") from e
    try:
        return complex(value)  # numpy scalars, mpmath mpc/mpf
    except (TypeError, ValueError) as e:
        raise ValueError(f"not a complex scalar: {value!r}") from e


def format_complex(z: Any) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


ComplexScalar = Annotated[
    complex,
    BeforeValidator(parse_complex),
    PlainSerializer(format_complex, return_type=str, when_used="json"),
]


def stable_config_hash(data: Mapping[str, Any]) -> str:
    """Return truncated SHA256 hex of the canonical JSON form of ``data``.

    Keys are sorted and separators fixed so equal configs hash equally
    regardless of the order they were written in.
    """
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


class Precision(str, Enum):
    """Scalar mode used for word evaluation."""

    DOUBLE = "double"
    DD = "dd"


class Chart(str, Enum):
    XY = "XY"
    YZ = "YZ"
    ZX = "ZX"


class FiberKind(str, Enum):
    ELLIPTIC = "Elliptic"
    LOXODROMIC = "Loxodromic"
    PARABOLIC = "ParabolicFiber"


class FatouStatus(str, Enum):
    CERTIFIED = "Certified"
    FAILED = "FailedWithWitness"
    INCONCLUSIVE = "Inconclusive"


class FixedPointKind(str, Enum):
    SADDLE = "Saddle"
    ELLIPTIC_LIKE = "EllipticLike"
    PARABOLIC_LIKE = "ParabolicLike"
    SHEAR = "Shear"
    SINGULAR = "SingularSurfacePoint"


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return "xyz".index(self.value)


# ---------------------------------------------------------------------------
# Parameters and points
# ---------------------------------------------------------------------------


class ParameterQuadruple(BaseModel):
    """Coefficients of x^2 + y^2 + z^2 + xyz = Ax + By + Cz + D."""

    model_config = ConfigDict(frozen=True)

    A: ComplexScalar = Field(..., description="Coefficient of x")
    B: ComplexScalar = Field(..., description="Coefficient of y")
    C: ComplexScalar = Field(..., description="Coefficient of z")
    D: ComplexScalar = Field(..., description="Constant term")
    label: Optional[str] = Field(
        None, description="Family spelling this quadruple was built from"
    )

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.A, self.B, self.C, self.D)

    @property
    def r(self) -> float:
        """max(|A|, |B|, |C|), the radius entering the Fatou ball."""
        return max(abs(self.A), abs(self.B), abs(self.C))

    def shifted(self, **offsets: complex) -> "ParameterQuadruple":
        values = {k: getattr(self, k) + complex(v) for k, v in offsets.items()}
        values["label"] = None
        return self.model_copy(update=values)

    def __str__(self) -> str:
        body = ", ".join(format_complex(v) for v in self.as_tuple())
        return f"{self.label or 'params'}({body})"


class TraceQuadruple(BaseModel):
    model_config = ConfigDict(frozen=True)

    a1: ComplexScalar
    a2: ComplexScalar
    a3: ComplexScalar
    a4: ComplexScalar

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a1, self.a2, self.a3, self.a4)


class KappaQuadruple(BaseModel):
    model_config = ConfigDict(frozen=True)

    k1: ComplexScalar
    k2: ComplexScalar
    k3: ComplexScalar
    k4: ComplexScalar

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.k1, self.k2, self.k3, self.k4)


class SurfacePoint(BaseModel):
    """Point of C^3 with its cached surface residual."""

    model_config = ConfigDict(frozen=True)

    x: ComplexScalar
    y: ComplexScalar
    z: ComplexScalar
    residual: float = Field(
        0.0, ge=0.0, description="|defining polynomial| at the point"
    )

    def coords(self) -> tuple[complex, complex, complex]:
        return (self.x, self.y, self.z)

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.x) ** 2 + abs(self.y) ** 2 + abs(self.z) ** 2)

    def on_surface(self, tol: float = 1e-10) -> bool:
        return self.residual <= tol * (1.0 + self.norm**3)


class RestrictedDerivative(BaseModel):
    """Derivative of a word map compressed to an invariant 2-plane."""

    matrix2: List[List[ComplexScalar]] = Field(
        ..., description="2x2 matrix in an orthonormal basis of the plane"
    )
    eigenvalues: List[ComplexScalar] = Field(default_factory=list)
    trace: ComplexScalar = 0j
    det: ComplexScalar = 1 + 0j
    plane: Literal["tangent", "eigen_complement"] = Field(
        "tangent",
        description=(
            "tangent: ker(gradient) at a smooth point; eigen_complement: "
            "invariant complement of the eigenvalue-1 line at a singular point"
        ),
    )

    @model_validator(mode="after")
    def _validate_shape(self) -> "RestrictedDerivative":
        if len(self.matrix2) != 2 or any(len(row) != 2 for row in self.matrix2):
            raise ValueError("matrix2 must be 2x2")
        return self


# ---------------------------------------------------------------------------
# Fibers
# ---------------------------------------------------------------------------


class FiberClassification(BaseModel):
    axis: Axis
    c: ComplexScalar
    kind: FiberKind
    multipliers: List[ComplexScalar] = Field(..., min_length=2, max_length=2)
    rotation: Optional[float] = Field(
        None, description="theta in (0,1) with c = 2cos(pi theta) (Elliptic only)"
    )

    @model_validator(mode="after")
    def _reciprocal(self) -> "FiberClassification":
        m1, m2 = self.multipliers
        if abs(m1 * m2 - 1) > 1e-10:
            raise ValueError("multipliers must be reciprocal")
        if self.kind != FiberKind.ELLIPTIC and self.rotation is not None:
            raise ValueError("rotation only defined for elliptic fibers")
        return self


class TubeSpec(BaseModel):
    """Tube {|coordinate - center| < radius} around a fiber."""

    axis: Axis
    center: ComplexScalar
    radius: float = Field(..., gt=0.0)
    bad_values: List[ComplexScalar] = Field(
        default_factory=list,
        description="Fiber constants the tube must avoid (caller supplied)",
    )

    @model_validator(mode="after")
    def _avoid_bad_set(self) -> "TubeSpec":
        for b in self.bad_values:
            if abs(b - self.center) < self.radius:
                raise ValueError(
                    f"tube of radius {self.radius} around {self.center} "
                    f"contains bad fiber value {b}"
                )
        return self

    def contains(self, q: Any) -> bool:
        return abs(complex(q[self.axis.index]) - self.center) < self.radius


class TargetBox(BaseModel):
    """Open box in the two fiber coordinates (real and imaginary parts)."""

    center: List[ComplexScalar] = Field(..., min_length=2, max_length=2)
    half_width: float = Field(..., gt=0.0)

    def contains(self, u: complex, v: complex) -> bool:
        h = self.half_width
        du = u - self.center[0]
        dv = v - self.center[1]
        return (
            abs(du.real) < h
            and abs(du.imag) < h
            and abs(dv.real) < h
            and abs(dv.imag) < h
        )


# ---------------------------------------------------------------------------
# Fatou certificates
# ---------------------------------------------------------------------------


class FatouBall(BaseModel):
    r: float = Field(..., ge=0.0, description="max(|A|,|B|,|C|)")
    R: float = Field(..., description="Modulus of the centre coordinate u")
    epsilon: float = Field(..., gt=0.0)

    @property
    def threshold(self) -> float:
        return 2.0 + math.sqrt(self.r)

    @model_validator(mode="after")
    def _check_eps(self) -> "FatouBall":
        if self.R <= self.threshold:
            raise ValueError("R must exceed 2 + sqrt(r)")
        expected = min(
            self.R - self.threshold,
            self.R + 1 - math.sqrt(4 * self.R + self.r + 1),
        )
        if abs(expected - self.epsilon) > 1e-12 * max(1.0, self.R):
            raise ValueError("epsilon does not match the ball formula")
        return self


class FatouCertificate(BaseModel):
    status: FatouStatus
    depth: int = Field(..., ge=0)
    witness_word: Optional[str] = Field(
        None, description="First violating word over x,y,z (left applied last)"
    )
    modulus_log: List[float] = Field(
        default_factory=list,
        description="log10 of the minimum coordinate modulus at each depth",
    )
    threshold: float = Field(..., description="2 + sqrt(r)")
    words_checked: int = 0
    note: str = "monotone-escape certified to the stated depth"


class BQReport(BaseModel):
    condition1: bool = Field(
        ..., description="No explored coordinate lies in the real segment [-2,2]"
    )
    condition2_violations: int = Field(..., ge=0)
    depth: int = Field(..., ge=0)
    explored: int = Field(..., ge=1)
    radius_label: Literal["exact", "radius-2 heuristic"] = "exact"


# ---------------------------------------------------------------------------
# Commutator cascade
# ---------------------------------------------------------------------------


class CascadeBudget(BaseModel):
    epsilon: float = Field(..., gt=0.0, description="Ball radius")
    K: float = Field(..., gt=0.0, description="Level-0 deviation budget")

    @model_validator(mode="after")
    def _linear(self) -> "CascadeBudget":
        if self.K > self.epsilon / 32 * (1 + 1e-12):
            raise ValueError("K must not exceed epsilon/32")
        return self

    def working_radius(self, n: int) -> float:
        """eps_n = eps - 8K - K * sum_{j=1}^{n-1} 2^(3-j)."""
        tail = sum(2.0 ** (3 - j) for j in range(1, n))
        return self.epsilon - 8 * self.K - self.K * tail

    def level_bound(self, n: int) -> float:
        return self.K / 2**n


class CommutatorLevel(BaseModel):
    n: int = Field(..., ge=0)
    elements: List[str] = Field(
        ..., min_length=1, description="Reduced spellings; first two are canonical"
    )
    measured_sup: List[float] = Field(default_factory=list)
    precision: Precision = Precision.DOUBLE
    samples: int = 0

    @model_validator(mode="after")
    def _sizes(self) -> "CommutatorLevel":
        if self.measured_sup and len(self.measured_sup) != len(self.elements):
            raise ValueError("one measured_sup entry per element")
        return self


class CascadeReport(BaseModel):
    budget: CascadeBudget
    base_point: List[ComplexScalar] = Field(..., min_length=3, max_length=3)
    levels: List[CommutatorLevel]
    decay_ok: bool
    params: Optional[ParameterQuadruple] = None
    note: str = "measured sup is a lower bound of the true sup over the ball"


# ---------------------------------------------------------------------------
# Infinity
# ---------------------------------------------------------------------------


class ChartPoint(BaseModel):
    """Standard coordinates near a vertex: ratios of the two minor coordinates."""

    vertex: Literal["v1", "v2", "v3"]
    u1: ComplexScalar
    u2: ComplexScalar

    @property
    def dist(self) -> float:
        return math.hypot(abs(self.u1), abs(self.u2))


class EscapeLevel(BaseModel):
    n: int = Field(..., ge=0)
    word: str
    start_vertex: str
    vertex: str
    expected_vertex: str
    log10_dist: float
    bound_ok: bool


class EscapeCertificate(BaseModel):
    lam: float = Field(..., gt=0.0, lt=1.0, alias="lambda")
    log10_start_dist: float
    levels: List[EscapeLevel] = Field(default_factory=list)
    verified_levels: int = Field(0, ge=0)
    chart_radius: float = Field(..., gt=0.0)

    model_config = ConfigDict(populate_by_name=True)

    @property
    def distances(self) -> list[tuple[int, str, float]]:
        return [(lv.n, lv.vertex, lv.log10_dist) for lv in self.levels]


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------


class FixedPointRecord(BaseModel):
    point: SurfacePoint
    word: str
    kind: FixedPointKind
    restricted: Optional[RestrictedDerivative] = None
    borderline: bool = Field(
        False, description="Restricted trace within the 1e-6 band of [-2,2]"
    )


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

AxisTarget = Literal["dm_a", "A", "B", "C", "D", "D_imag", "ABC"]
ProbeName = Literal["fatou", "cascade", "escape", "property_p"]


class AxisSpec(BaseModel):
    target: AxisTarget = Field(..., description="What the axis value perturbs")
    start: float
    stop: float
    num: int = Field(..., ge=1)

    def values(self) -> list[float]:
        if self.num == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.num - 1)
        return [self.start + i * step for i in range(self.num)]


class RunConfig(BaseModel):
    """Scan configuration; everything except output/workers enters the hash."""

    family: str = Field("dm:0", description="Base family, e.g. markoff, dm:0")
    axes: List[AxisSpec] = Field(..., min_length=1, max_length=2)
    probes: List[ProbeName] = Field(
        default_factory=lambda: ["fatou", "cascade", "escape", "property_p"]
    )
    fatou_depth: int = Field(10, ge=0, le=16)
    cascade_levels: int = Field(3, ge=0)
    cascade_samples: int = Field(512, ge=8)
    cascade_epsilon: Optional[float] = Field(None, gt=0.0)
    escape_levels: int = Field(2, ge=0)
    escape_point: List[ComplexScalar] = Field(
        default_factory=lambda: [1e4 + 0j, 2 + 0j, 3 + 0j],
        min_length=3,
        max_length=3,
    )
    property_p_max_len: int = Field(4, ge=2)
    precision: Precision = Precision.DD
    seed: int = 0
    record_timing: bool = Field(
        False, description="Store wall time per cell (breaks byte identity)"
    )
    workers: Optional[int] = Field(None, ge=1)
    output: Optional[str] = None

    @model_validator(mode="after")
    def _dm_axis(self) -> "RunConfig":
        targets = [a.target for a in self.axes]
        if len(set(targets)) != len(targets):
            raise ValueError("axes must perturb distinct targets")
        if "dm_a" in targets and not self.family.startswith("dm"):
            raise ValueError("dm_a axis requires a dm family")
        return self

    @property
    def grid_shape(self) -> tuple[int, int]:
        n0 = self.axes[0].num
        n1 = self.axes[1].num if len(self.axes) > 1 else 1
        return (n0, n1)

    def hash_payload(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"workers", "output"})

    def config_hash(self) -> str:
        return stable_config_hash(self.hash_payload())


class ScanRecord(BaseModel):
    cell_id: List[int] = Field(..., min_length=2, max_length=2)
    grid: List[int] = Field(..., min_length=2, max_length=2)
    values: List[float]
    params: ParameterQuadruple
    fatou: Optional[Dict[str, Any]] = None
    cascade: Optional[Dict[str, Any]] = None
    escape: Optional[Dict[str, Any]] = None
    property_p: Optional[Dict[str, Any]] = None
    wall_time: Optional[float] = None

    @property
    def index(self) -> int:
        return self.cell_id[0] * self.grid[1] + self.cell_id[1]
