"""Tests for the Picard cross-checks."""
import numpy as np
import pytest

from cubicdyn.errors import ZeroCoordinate
from cubicdyn.fixed_points import SeedStrategy, newton_fixed_points
from cubicdyn.models import FixedPointKind
from cubicdyn.picard import (
    CAYLEY_POINTS,
    TorusPoint,
    cayley_points,
    eta,
    hyperbolic_locus_check,
    lift_behaviour,
    phi,
    phi_batch,
    predicted_eigenvalues,
    sing_pt_eigenvalues,
    singular_jacobian_identities,
    torus_lift,
    verify_semiconjugacy,
)
from cubicdyn.surface import PICARD, relative_residual, singular_points
from cubicdyn.words import (
    MATRIX_IDENTITY,
    ElementKind,
    GeneratorWord,
    IntegerMatrix2,
    Parity,
    classify,
    enumerate_words,
    from_sl2,
)

HYPERBOLIC_MATRICES = [
    IntegerMatrix2(1, -2, -2, 5),
    IntegerMatrix2(5, 2, 2, 1),
    IntegerMatrix2(3, 2, 4, 3),
    IntegerMatrix2(3, -4, -2, 3),
]


def test_phi_of_unit_is_cayley_point():
    assert np.allclose(phi(TorusPoint(1, 1)), CAYLEY_POINTS[0])
    assert np.allclose(phi(TorusPoint(-1, -1)), (2, 2, -2))


def test_zero_torus_coordinate():
    with pytest.raises(ZeroCoordinate):
        TorusPoint(0, 1)


def test_phi_lands_on_picard(picard, rng):
    U = np.exp(rng.uniform(-1, 1, 50) + 1j * rng.uniform(0, 6, 50))
    V = np.exp(rng.uniform(-1, 1, 50) + 1j * rng.uniform(0, 6, 50))
    assert np.max(relative_residual(picard, phi_batch(U, V))) < 1e-12


def test_eta_identity():
    t = TorusPoint(2 + 1j, 0.5)
    assert eta(MATRIX_IDENTITY, t) == t


@pytest.mark.parametrize("spelling", ["zy", "xz", "zyzx", "zyxzyx", "yzxyzxzy"])
def test_semiconjugacy(spelling):
    assert verify_semiconjugacy(GeneratorWord(spelling), samples=500) < 1e-9


def test_semiconjugacy_short_words():
    words = [w for w in enumerate_words(6, Parity.GAMMA) if not w.is_identity]
    worst = max(verify_semiconjugacy(w, samples=200, seed=i) for i, w in enumerate(words))
    assert worst < 1e-9


def test_identity_residual_is_zero():
    assert verify_semiconjugacy(GeneratorWord("")) == 0.0


@pytest.mark.parametrize("M", HYPERBOLIC_MATRICES)
@pytest.mark.parametrize("point", CAYLEY_POINTS)
def test_cayley_eigenvalues(M, point):
    got = sing_pt_eigenvalues(M, point)
    want = predicted_eigenvalues(M)
    for g, w in zip(got, want):
        assert abs(g - w) <= 1e-8 * abs(w)


@pytest.mark.parametrize("M", HYPERBOLIC_MATRICES)
def test_exact_jacobian_identities(M):
    report = singular_jacobian_identities(M)
    assert report["ok"], report
    assert report["actual"]["trace"] == report["expected"]["trace"]


def test_torus_lift_roundtrip():
    t = TorusPoint(1.5 + 0.5j, 0.7 - 0.2j)
    q = phi(t)
    lifted = torus_lift(q)
    assert lifted is not None
    assert np.allclose(phi(lifted), q)


def test_lift_fixed_by_identity():
    assert lift_behaviour(MATRIX_IDENTITY, phi(TorusPoint(1.5, 0.5j))) == "fixed"


def test_cayley_points_are_the_singular_points(picard):
    pts = cayley_points()
    assert len(pts) == 4
    found = {tuple(round(c.real) for c in q.coords()) for q in singular_points(picard)}
    assert {tuple(round(c.real) for c in pt.coords()) for pt in pts} == found


def test_hyperbolic_fixed_points_are_confined():
    w = from_sl2(HYPERBOLIC_MATRICES[0])
    assert classify(w).kind == ElementKind.HYPERBOLIC
    report = hyperbolic_locus_check(w)
    assert report["singular"] == 4
    assert report["saddles"] > 0
    assert report["saddles"] + report["singular"] == report["points"]
    assert report["max_modulus_mismatch"] < 1e-6


def test_locus_points_are_distinct_and_singular_ones_exact():
    w = from_sl2(HYPERBOLIC_MATRICES[0])
    search = newton_fixed_points(PICARD, w, SeedStrategy(torus_grid=12, random=100))
    pts = np.array([rec.point.coords() for rec in search.records])
    gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(gaps, np.inf)
    assert gaps.min() > 1e-6
    singular = [rec.point.coords() for rec in search.records if rec.kind == FixedPointKind.SINGULAR]
    assert len(singular) == 4
    assert {tuple(round(c.real) for c in q) for q in singular} == {
        tuple(int(c) for c in q) for q in CAYLEY_POINTS
    }
    for q in singular:
        assert all(abs(c - round(c.real)) < 1e-9 for c in q)


def test_locus_check_rejects_parabolic():
    with pytest.raises(ValueError):
        hyperbolic_locus_check(GeneratorWord("zy"))


@pytest.mark.slow
def test_locus_check_words_to_length_eight():
    words = [
        w for w in enumerate_words(8, Parity.GAMMA)
        if classify(w).kind == ElementKind.HYPERBOLIC
    ][:10]
    for w in words:
        report = hyperbolic_locus_check(w)
        assert report["saddles"] + report["singular"] == report["points"]
