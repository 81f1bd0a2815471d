"""Tests for fiber classification and fiber walks."""
import math

import numpy as np
import pytest

from cubicdyn.action import apply_word
from cubicdyn.errors import EscapedTube
from cubicdyn.fibers import (
    FIBER_TABLE_COLUMNS,
    GENERATOR,
    bad_fiber_values,
    classify_fiber,
    cycled_params,
    fiber_linear_part,
    fiber_period,
    fiber_table,
    fiber_translation,
    find_return_iterate,
    grid_values,
    is_bad_fiber,
)
from cubicdyn.models import Axis, FiberKind, TargetBox, TubeSpec
from cubicdyn.surface import MARKOFF, dm_params


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_affine_fiber_map_matches_generator(axis):
    p = dm_params(0.6)
    ax = Axis(axis)
    k = ax.index
    iu, iv = {0: (1, 2), 1: (2, 0), 2: (0, 1)}[k]
    q = np.zeros(3, dtype=complex)
    q[k], q[iu], q[iv] = 0.7, 0.2 + 0.1j, -1.3
    img = apply_word(p, GENERATOR[ax], q)
    L = fiber_linear_part(p, ax, 0.7)
    t = fiber_translation(p, ax, 0.7)
    assert np.allclose(img[[iu, iv]], L @ q[[iu, iv]] + t)
    assert img[k] == pytest.approx(0.7)


def test_cycled_params_order():
    from cubicdyn.models import ParameterQuadruple

    p = ParameterQuadruple(A=1, B=2, C=3, D=0)
    assert cycled_params(p, "x") == (1, 2, 3)
    assert cycled_params(p, "y") == (2, 3, 1)
    assert cycled_params(p, "z") == (3, 1, 2)


def test_zero_fiber_has_order_two():
    fc = classify_fiber(MARKOFF, "x", 0)
    assert fc.kind == FiberKind.ELLIPTIC
    assert fc.rotation == pytest.approx(0.5)
    L = fiber_linear_part(MARKOFF, "x", 0)
    assert np.array_equal(L @ L, np.eye(2))


def test_sqrt_two_fiber_has_order_four():
    L = fiber_linear_part(MARKOFF, "x", math.sqrt(2))
    L2 = L @ L
    assert not np.allclose(L2, np.eye(2))
    assert np.allclose(L2 @ L2, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("c", [2.5, 3.0, 1 + 1j])
def test_loxodromic_multipliers_are_reciprocal_eigenvalues(c):
    fc = classify_fiber(MARKOFF, "y", c)
    assert fc.kind == FiberKind.LOXODROMIC
    m1, m2 = fc.multipliers
    assert abs(m1 * m2 - 1) < 1e-12
    assert abs(m1) > 1
    ev = np.linalg.eigvals(fiber_linear_part(MARKOFF, "y", c))
    assert min(abs(ev - m1)) < 1e-10


def test_parabolic_fibers():
    assert classify_fiber(MARKOFF, "z", 2).kind == FiberKind.PARABOLIC
    assert classify_fiber(MARKOFF, "z", -2).kind == FiberKind.PARABOLIC


@pytest.mark.parametrize("c,q", [(0.0, 2), (math.sqrt(2), 4), (1.0, 3), (-1.0, 3), (2.5, None)])
def test_fiber_period(c, q):
    assert fiber_period(c) == q


def test_fiber_period_irrational_rotation():
    assert fiber_period(0.3) is None
    assert fiber_period(0.5 + 0.1j) is None


def test_bad_fibers_at_markoff():
    values = bad_fiber_values(MARKOFF, "x")
    assert any(abs(v - 2) < 1e-9 for v in values)
    assert any(abs(v + 2) < 1e-9 for v in values)
    assert is_bad_fiber(MARKOFF, "x", 0.0)
    assert not is_bad_fiber(MARKOFF, "x", 1.0)


def test_grid_values():
    assert grid_values("shear") == (0.0, math.sqrt(2))
    assert len(grid_values("periodic")) == 7
    with pytest.raises(ValueError):
        grid_values("dense")


def test_fiber_table_csv():
    text = fiber_table(MARKOFF, "x", [0, math.sqrt(2), 3, 2])
    lines = text.splitlines()
    assert lines[0] == ",".join(FIBER_TABLE_COLUMNS)
    assert len(lines) == 5
    assert lines[1].split(",")[1] == "Elliptic"
    assert lines[1].split(",")[3] == "2"
    assert lines[3].split(",")[1] == "Loxodromic"
    assert lines[4].split(",")[1] == "ParabolicFiber"


def test_return_iterate_on_order_two_fiber():
    tube = TubeSpec(axis="x", center=0, radius=0.1)
    target = TargetBox(center=[-1, -1j], half_width=0.1)
    assert find_return_iterate(MARKOFF, tube, (0, 1, 1j), target, n_max=4) == 1
    assert find_return_iterate(MARKOFF, tube, (0, 1, 1j), TargetBox(center=[1, 1j], half_width=0.1), 4) == 0


def test_return_iterate_none_when_unreachable():
    tube = TubeSpec(axis="x", center=0, radius=0.1)
    target = TargetBox(center=[5, 5], half_width=0.1)
    assert find_return_iterate(MARKOFF, tube, (0, 1, 1j), target, n_max=6) is None


def test_return_iterate_rejects_point_outside_tube():
    tube = TubeSpec(axis="x", center=0, radius=0.1)
    target = TargetBox(center=[0, 0], half_width=0.1)
    with pytest.raises(EscapedTube):
        find_return_iterate(MARKOFF, tube, (1, 1, 1), target, n_max=3)


def test_tube_must_avoid_bad_values():
    with pytest.raises(ValueError):
        TubeSpec(axis="x", center=0.05, radius=0.1, bad_values=[0])
