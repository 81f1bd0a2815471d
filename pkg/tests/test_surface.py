"""Tests for parameter families and surface geometry."""
import math

import numpy as np
import pytest

from cubicdyn.errors import ChartDegenerate, DomainWarning
from cubicdyn.models import KappaQuadruple
from cubicdyn.surface import (
    MARKOFF,
    PICARD,
    dm_params,
    from_traces,
    gradient,
    is_singular_parameter,
    painleve_parameters,
    parse_family,
    random_surface_points,
    relative_residual,
    sample_surface,
    singular_points,
    surface_residual,
    tangent_basis,
    torus_params,
    volume_form_ratio,
)


def _coords(points):
    return sorted(tuple(round(c.real, 6) for c in sp.coords()) for sp in points)


def test_from_traces_zero_traces_is_picard():
    p = from_traces((0, 0, 0, 0))
    assert p.as_tuple() == PICARD.as_tuple()


def test_dm_params_values():
    p = dm_params(0.0)
    assert p.as_tuple() == (4, 4, 4, -8)
    assert p.label == "dm:0.0"


def test_dm_params_warns_outside_range():
    with pytest.warns(DomainWarning):
        dm_params(2.5)


def test_painleve_parameters_half_kappa():
    k = KappaQuadruple(k1=0.5, k2=0.5, k3=0.5, k4=0.5)
    alpha, beta, gamma, delta = painleve_parameters(k)
    assert alpha == pytest.approx(1 / 8)
    assert beta == pytest.approx(-1 / 8)
    assert gamma == pytest.approx(1 / 8)
    assert delta == pytest.approx(3 / 8)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("markoff", (0, 0, 0, 0)),
        ("picard", (0, 0, 0, 4)),
        ("torus:5i", (0, 0, 0, 5j)),
        ("dm:0", (4, 4, 4, -8)),
        ("params:1,2,3,4", (1, 2, 3, 4)),
    ],
)
def test_parse_family(text, expected):
    assert parse_family(text).as_tuple() == pytest.approx(expected)


@pytest.mark.parametrize("text", ["moon", "dm:1+1i", "torus:1,2", "params:1,2"])
def test_parse_family_rejects(text):
    with pytest.raises(ValueError):
        parse_family(text)


def test_sample_surface_points_lie_on_surface(rng):
    p = dm_params(0.7)
    xy = rng.uniform(-3, 3, size=(50, 2)) + 1j * rng.uniform(-3, 3, size=(50, 2))
    pts = sample_surface(p, xy)
    assert pts.shape == (100, 3)
    assert np.max(relative_residual(p, pts)) < 1e-12


def test_random_surface_points_count(rng):
    pts = random_surface_points(MARKOFF, 7, rng)
    assert pts.shape == (7, 3)
    assert np.max(relative_residual(MARKOFF, pts)) < 1e-12


def test_markoff_singular_point_is_origin():
    pts = singular_points(MARKOFF)
    assert _coords(pts) == [(0.0, 0.0, 0.0)]


def test_picard_singular_points_are_cayley_points():
    pts = singular_points(PICARD)
    assert _coords(pts) == sorted(
        [(-2.0, -2.0, -2.0), (-2.0, 2.0, 2.0), (2.0, -2.0, 2.0), (2.0, 2.0, -2.0)]
    )


def test_dm_singular_points():
    pts = singular_points(dm_params(0.0))
    assert _coords(pts) == sorted([(0.0, 2.0, 2.0), (2.0, 0.0, 2.0), (2.0, 2.0, 0.0)])


@pytest.mark.slow
def test_grid_method_agrees_on_markoff():
    assert _coords(singular_points(MARKOFF, method="grid")) == [(0.0, 0.0, 0.0)]


def test_singular_parameter_exact_and_float():
    assert is_singular_parameter((0, 0, 0, 0))
    assert is_singular_parameter((2, 1, 0, 3))
    assert not is_singular_parameter((0, 0, 0, 1))
    assert not is_singular_parameter((0.1, 0.2, 0.3, 0.4))


def test_volume_form_is_chart_independent(rng):
    p = dm_params(0.3)
    for q in random_surface_points(p, 5, rng):
        assert abs(volume_form_ratio(p, q, "XY", "YZ") - 1) < 1e-9
        assert abs(volume_form_ratio(p, q, "ZX", "XY") - 1) < 1e-9


def test_tangent_basis_spans_kernel(rng):
    p = torus_params(1.5)
    q = random_surface_points(p, 1, rng)[0]
    g = gradient(p, q)
    for t in tangent_basis(p, q):
        assert abs(np.dot(g, t)) < 1e-12 * (1 + np.linalg.norm(g))


def test_tangent_basis_fails_at_singular_point():
    with pytest.raises(ChartDegenerate):
        tangent_basis(MARKOFF, (0, 0, 0))


def test_surface_residual_batches():
    Q = np.array([[0, 0, 0], [1, 1, 1]], dtype=complex)
    assert surface_residual(MARKOFF, Q).tolist() == [0, 4]
    assert math.isclose(abs(surface_residual(PICARD, (-2, -2, -2))), 0.0)
