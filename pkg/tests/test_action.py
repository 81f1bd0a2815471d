"""Tests for the numeric action of words on C^3."""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cubicdyn.action import (
    ORBIT_COLUMNS,
    apply_letter,
    apply_word,
    apply_word_batch,
    exact_word_jacobian,
    orbit_csv,
    orbit_trace,
    restricted_derivative,
    volume_form_pullback,
    word_jet,
    word_jet_batch,
)
from cubicdyn.errors import NotFixedPoint, OrbitEscaped
from cubicdyn.models import Precision
from cubicdyn.surface import MARKOFF, PICARD, dm_params, random_surface_points, relative_residual
from cubicdyn.words import GeneratorWord

TRIPLE = (-3, -3, -3)


def test_letter_on_markoff_triple():
    assert np.allclose(apply_letter(MARKOFF, "x", TRIPLE), [-6, -3, -3])


def test_letters_are_involutions(rng):
    p = dm_params(0.4)
    q = random_surface_points(p, 3, rng)
    for ch in "xyz":
        assert np.allclose(apply_letter(p, ch, apply_letter(p, ch, q)), q)


def test_right_most_letter_acts_first():
    assert np.allclose(apply_word(MARKOFF, "yx", TRIPLE), [-6, -15, -3])


def test_words_preserve_the_surface(rng):
    p = dm_params(-0.5)
    Q = random_surface_points(p, 40, rng, box=1.5)
    out, escaped = apply_word_batch(p, "zyxzyx", Q)
    assert not escaped.any()
    assert np.max(relative_residual(p, out)) < 1e-10


def test_dd_matches_double_on_short_words():
    q = (0.3 + 0.1j, -0.2, 1.1)
    p = dm_params(0.25)
    dd = apply_word(p, "xzyzx", q, precision=Precision.DD)
    assert isinstance(dd[0], mpmath.mpc)
    ref = apply_word(p, "xzyzx", q)
    assert np.allclose([complex(v) for v in dd], ref, rtol=1e-13)


def test_orbit_escape_reports_step_and_prefix():
    with pytest.raises(OrbitEscaped) as info:
        apply_word(MARKOFF, "yx", TRIPLE, cutoff=10)
    assert info.value.context["step"] == 2
    assert info.value.context["prefix"] == "yx"


def test_batch_marks_escaped_rows():
    Q = np.array([TRIPLE, (0.0, 0.0, 0.0)], dtype=complex)
    out, escaped = apply_word_batch(MARKOFF, "yx", Q, cutoff=10)
    assert escaped.tolist() == [True, False]
    assert np.isnan(out[0]).all()
    assert np.allclose(out[1], 0)


def test_jacobian_matches_finite_differences():
    p = dm_params(0.1)
    q = np.array([0.4 + 0.2j, -0.7, 0.9 - 0.1j])
    w = "zxyzx"
    J = word_jet(p, w, q).jacobian
    h = 1e-6
    for k in range(3):
        e = np.zeros(3, dtype=complex)
        e[k] = h
        fd = (apply_word(p, w, q + e) - apply_word(p, w, q - e)) / (2 * h)
        assert np.allclose(J[:, k], fd, atol=1e-6)


def test_batch_jet_matches_single():
    p = dm_params(0.1)
    Q = np.array([[0.1, 0.2, 0.3], [1.0, -1.0, 0.5j]], dtype=complex)
    vals, J, escaped = word_jet_batch(p, "xyz", Q)
    assert not escaped.any()
    for n in range(2):
        jet = word_jet(p, "xyz", Q[n])
        assert np.allclose(vals[n], jet.value)
        assert np.allclose(J[n], jet.jacobian)


def test_exact_jacobian_is_rational():
    vals, J = exact_word_jacobian((0, 0, 0, 4), "zy", (Fraction(1, 2), -2, 3))
    assert all(isinstance(v, (int, Fraction)) for v in vals)
    assert all(isinstance(v, (int, Fraction)) for v in J.ravel())
    numeric = word_jet(PICARD, "zy", (0.5, -2, 3))
    exact = np.array([[complex(v) for v in row] for row in J])
    assert np.allclose(exact, numeric.jacobian)


def test_restricted_derivative_of_involution_at_smooth_fixed_point():
    s = 2 * math.sqrt(2)
    q = (-4.0, s, s)
    rd = restricted_derivative(MARKOFF, "x", q)
    assert rd.plane == "tangent"
    assert abs(rd.trace) < 1e-12
    assert abs(rd.det + 1) < 1e-12


def test_restricted_derivative_at_singular_point():
    rd = restricted_derivative(MARKOFF, GeneratorWord("zy"), (0, 0, 0))
    assert rd.plane == "eigen_complement"
    assert abs(rd.trace + 2) < 1e-12
    assert np.allclose(rd.eigenvalues, [-1, -1])


def test_restricted_derivative_requires_fixed_point():
    with pytest.raises(NotFixedPoint):
        restricted_derivative(MARKOFF, "x", TRIPLE)


@pytest.mark.parametrize("word,sign", [("x", -1), ("zyx", -1), ("zy", 1), ("zyxz", 1)])
def test_volume_form_pullback_sign(rng, word, sign):
    p = dm_params(0.3)
    q = random_surface_points(p, 1, rng, box=1.0)[0]
    assert abs(volume_form_pullback(p, word, q) - sign) < 1e-8


def test_orbit_trace_rows_and_csv():
    rows = orbit_trace(MARKOFF, "zyx", TRIPLE)
    assert [r["step"] for r in rows] == [0, 1, 2, 3]
    assert [r["prefix"] for r in rows] == ["", "x", "yx", "zyx"]
    assert all(r["residual"] < 1e-9 for r in rows)
    text = orbit_csv(rows)
    assert text.splitlines()[0] == ",".join(ORBIT_COLUMNS)
    assert len(text.splitlines()) == 5
