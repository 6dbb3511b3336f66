"""Time scalings, transition densities, and one-step kernel operators."""

import math

import numpy as np
import pytest

from chernoff import (
    GridFunction,
    InvalidTimeOrder,
    KernelUnderResolved,
    ManifoldSpec,
    ScalingComponent,
    ShapeMismatch,
    TimeScaling,
    UnsupportedScaling,
    assemble_step_operator,
    build_grid,
    normalized_manifold_density,
    pushforward_identity_check,
    resolution_check,
    transition_density,
)

CIRCLE = ManifoldSpec("circle", 1.0)


def circle_grid(n=128):
    return build_grid(CIRCLE, n)


# ---------------------------------------------------------------------------
# scalings


def test_scaling_families_evaluate_and_differentiate():
    affine = TimeScaling.scalar_affine(1.0, 2.0)
    assert affine.c(0.5) == 2.0
    assert affine.c_prime(0.5) == 2.0
    expo = TimeScaling.scalar_exponential(3.0, -1.0)
    assert math.isclose(expo.c(2.0), 3.0 * math.exp(-2.0))
    assert math.isclose(expo.c_prime(2.0), -3.0 * math.exp(-2.0))
    const = TimeScaling.scalar_constant(4.0)
    assert const.c(17.0) == 4.0 and const.c_prime(17.0) == 0.0


def test_custom_scaling_uses_supplied_callables():
    custom = TimeScaling.scalar_custom(lambda t: 1.0 + t * t, lambda t: 2.0 * t)
    assert custom.c(2.0) == 5.0
    assert custom.c_prime(3.0) == 6.0


def test_diagonal_scaling_shape_contract():
    diag = TimeScaling.diagonal(
        [ScalingComponent("constant", 1.0), ScalingComponent("affine", 1.0, 1.0)]
    )
    np.testing.assert_allclose(diag.diag(1.0, 2), [1.0, 2.0])
    assert math.isclose(diag.det(1.0, 2), 2.0)
    assert math.isclose(diag.max_singular_value(1.0, 2), 2.0)
    with pytest.raises(ShapeMismatch):
        diag.diag(1.0, 3)
    with pytest.raises(UnsupportedScaling):
        _ = diag.component


def test_scaling_rejects_unknown_family_and_zero_values():
    with pytest.raises(ValueError):
        ScalingComponent("quadratic", 1.0)
    vanishing = TimeScaling.scalar_affine(1.0, -1.0)
    with pytest.raises(ValueError):
        vanishing.diag(1.0, 2)


# ---------------------------------------------------------------------------
# transition density


def test_transition_density_identity_scaling_value():
    # standard 2d Gaussian at zero displacement after time 1
    val = transition_density(
        TimeScaling.identity(), 0.0, np.array([1.0, 0.0]), 1.0, np.array([1.0, 0.0])
    )
    assert math.isclose(float(val), 1.0 / (2 * math.pi), rel_tol=1e-14)


def test_transition_density_scaled_value():
    # c(t) = 2 doubles the image displacement (|2y - 2x|^2 = 16) and
    # contributes det = 4; elapsed time 1/2 puts 2(t-s) = 1 in the exponent
    x = np.array([1.0, 0.0])
    y = np.array([-1.0, 0.0])
    val = transition_density(TimeScaling.scalar_constant(2.0), 0.0, x, 0.5, y)
    expected = (4.0 / math.pi) * math.exp(-16.0)
    assert math.isclose(float(val), expected, rel_tol=1e-13)


def test_transition_density_requires_time_order():
    x = np.array([1.0, 0.0])
    with pytest.raises(InvalidTimeOrder):
        transition_density(TimeScaling.identity(), 1.0, x, 1.0, x)


def test_transition_density_broadcasts_over_targets():
    grid = circle_grid(16)
    vals = transition_density(TimeScaling.identity(), 0.0, grid.nodes[0], 0.3, grid.nodes)
    assert vals.shape == (16,)
    assert np.all(vals > 0)


# ---------------------------------------------------------------------------
# step operators


def test_step_operator_rows_are_stochastic():
    grid = circle_grid()
    op = assemble_step_operator(grid, TimeScaling.identity(), 0.0, 0.05)
    assert op.matrix.shape == (128, 128)
    assert np.all(op.matrix >= 0)
    np.testing.assert_allclose(op.matrix.sum(axis=1), 1.0, atol=1e-13)


def test_step_operator_is_circulant_for_identity_scaling():
    grid = circle_grid()
    op = assemble_step_operator(grid, TimeScaling.identity(), 0.0, 0.05)
    for i in (1, 17, 127):
        np.testing.assert_allclose(op.matrix[i], np.roll(op.matrix[0], i), atol=1e-15)


def test_step_operator_is_a_contraction():
    grid = circle_grid()
    op = assemble_step_operator(grid, TimeScaling.scalar_affine(1.0, 0.5), 0.0, 0.05)
    f = GridFunction(grid, np.cos(grid.angles()))
    assert op.apply(f).sup_norm <= f.sup_norm + 1e-14


def test_step_operator_smooths_towards_the_mean():
    grid = circle_grid()
    f = GridFunction(grid, np.cos(grid.angles()))
    out = assemble_step_operator(grid, TimeScaling.identity(), 0.0, 0.2).apply(f)
    # one wide Gaussian step should damp the first harmonic by roughly e^{-t/2}
    damping = out.values[0] / f.values[0]
    assert 0.8 * math.exp(-0.1) < damping < 1.0


def test_resolution_check_reports_and_raises():
    grid = circle_grid(64)
    info = resolution_check(grid, TimeScaling.identity(), 0.0, 0.25)
    assert info["ratio"] >= 1.0  # ratio of width to the 3-spacing floor
    assert math.isclose(info["width"], 0.5)
    assert math.isclose(info["max_spacing"], 2 * math.sin(math.pi / 64), rel_tol=1e-12)
    with pytest.raises(KernelUnderResolved):
        resolution_check(grid, TimeScaling.identity(), 0.0, 1e-4)


def test_under_resolved_step_operator_raises_before_assembly():
    grid = circle_grid(32)
    with pytest.raises(KernelUnderResolved):
        assemble_step_operator(grid, TimeScaling.identity(), 0.0, 1e-5)


def test_normalized_density_integrates_to_one():
    grid = circle_grid()
    dens = normalized_manifold_density(
        grid, TimeScaling.scalar_affine(1.0, 1.0), 0.0, grid.nodes[5], 0.1
    )
    total = float(np.sum(grid.weights * dens.values))
    assert math.isclose(total, 1.0, abs_tol=1e-12)


def test_pushforward_identity_two_quadratures_agree():
    grid = circle_grid(256)
    scaling = TimeScaling.scalar_affine(1.0, 1.0)
    lhs, rhs, gap = pushforward_identity_check(grid, scaling, 0.2, 0.45, np.cos(grid.angles()))
    assert gap < 1e-12 * max(1.0, abs(lhs))
    assert math.isclose(lhs, rhs, rel_tol=1e-10)


def test_grid_function_validates_values():
    grid = circle_grid(16)
    with pytest.raises(ShapeMismatch):
        GridFunction(grid, np.ones(15))
    with pytest.raises(ValueError):
        GridFunction(grid, np.full(16, np.nan))
