"""Exception hierarchy for cubicdyn.

Every error raised by the library derives from :class:`CubicDynError` and
keeps the values that explain the failure in ``context`` so CLI handlers and
scan probes can serialize them without parsing messages.
"""
from __future__ import annotations

from typing import Any


class CubicDynError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.context: dict[str, Any] = context

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "detail": str(self),
            "context": {k: _plain(v) for k, v in self.context.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class DomainWarning(UserWarning):
    """Input outside the documented range; the value is still computed."""


# Word algebra
class NotAlgebraicallyStable(CubicDynError):
    pass


class OddLengthWord(CubicDynError):
    pass


class NotInImage(CubicDynError):
    """Matrix of Gamma(2) that is not the image of any word (the -I coset)."""


# Surface and action
class ChartDegenerate(CubicDynError):
    pass


class NotFixedPoint(CubicDynError):
    pass


class SingularPoint(CubicDynError):
    pass


class OrbitEscaped(CubicDynError):
    """Coordinate modulus passed the escape cutoff.

    ``context['partial']`` holds the last finite point and ``context['step']``
    the number of letters applied before the cutoff was crossed.
    """


class ZeroCoordinate(CubicDynError):
    pass


# Fibers
class EscapedTube(CubicDynError):
    pass


# Fatou certificates
class RadiusTooSmall(CubicDynError):
    pass


class NoEscapeRoot(CubicDynError):
    pass


class BracketFailure(CubicDynError):
    pass


# Cascade
class HypothesisViolated(CubicDynError):
    pass


class NoReturnFound(CubicDynError):
    pass


class SeedTooLoose(CubicDynError):
    pass


# Infinity
class ContractionFailure(CubicDynError):
    pass


class NotNearVertex(CubicDynError):
    pass


# Fixed points / oracle
class OutlierFound(CubicDynError):
    pass


# Scans and configuration
class MixedGrids(CubicDynError):
    pass


class ConfigError(CubicDynError):
    pass
