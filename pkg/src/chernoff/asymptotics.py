"""Short-time expansions of Gaussian smoothing integrals on the manifold.

For a smooth g and small t, the unnormalized integral

    I(t) = (2*pi*t)^(-d/2) * int_M g(z) exp(-|z - y|^2 / (2t)) dvol(z)

behaves like a0 + a1*t + O(t^(3/2)), and the normalized ratio (the same
integral divided by the g == 1 case) like g(x) - (t/2) (Laplacian g)(x) with
all curvature contributions cancelling. This module produces the predicted
(a0, a1) pairs and fits measured values of I(t) to extract them empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedFit, InvalidConfig
from .geometry import (
    ManifoldSpec,
    QuadratureGrid,
    chordal_sq,
    double_laplacian_chordal,
    geodesic_distance,
    scalar_curvature,
    _require_on_manifold,
)
from .kernels import TimeScaling, resolution_check
from .spectral import SpectralFunction

__all__ = [
    "ExpansionPrediction",
    "ExpansionFit",
    "predict_unnormalized",
    "predict_normalized",
    "measure_unnormalized",
    "measure_normalized",
    "remainder_exponent_check",
    "kernel_tail_bound",
    "default_t_samples",
]

_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class ExpansionPrediction:
    """Closed-form leading coefficients a0 + a1*t of a smoothing integral."""

    a0: float
    a1: float
    source: str


@dataclass(frozen=True)
class ExpansionFit:
    """Least-squares estimate of the expansion from sampled integral values.

    The model is a0 + a1*t + b*t^(3/2) + c*t^2; the two nuisance terms keep
    the fitted (a0, a1) free of leading-remainder bias. ``remainder_exponent``
    is the log-log slope of |I(t) - a0_hat - a1_hat*t| against t.
    """

    a0_hat: float
    a1_hat: float
    k_hat: float
    remainder_exponent: float
    t_window: tuple
    residual_norm: float


def default_t_samples() -> np.ndarray:
    """Nine log-spaced times over [1e-4, 1e-2] (the validated fit window)."""
    return np.logspace(-4.0, -2.0, 9)


def _laplacian_at(spec: ManifoldSpec, g: SpectralFunction, point) -> float:
    """Nonnegative Laplacian of a band-limited g at a point."""
    weighted = g.with_multipliers(g.eigenvalues())
    return float(weighted.evaluate(np.asarray(point, dtype=float)))


def predict_unnormalized(spec: ManifoldSpec, g: SpectralFunction, y) -> ExpansionPrediction:
    """Predicted coefficients for the unnormalized integral at base point y.

    a0 = g(y); a1 = -(1/2) Lap g(y) - g(y) * (scal(y)/6 + D/16) where D is
    the twice-applied Laplacian of the squared chordal distance at y.
    """
    y = _require_on_manifold(spec, y)
    g_y = float(g.evaluate(y))
    lap_g = _laplacian_at(spec, g, y)
    curvature_block = scalar_curvature(spec, y) / 6.0 + double_laplacian_chordal(spec, y) / 16.0
    return ExpansionPrediction(g_y, -0.5 * lap_g - g_y * curvature_block, "unnormalized")


def predict_normalized(spec: ManifoldSpec, g: SpectralFunction, x) -> ExpansionPrediction:
    """Predicted coefficients for the normalized ratio: curvature cancels."""
    x = _require_on_manifold(spec, x)
    g_x = float(g.evaluate(x))
    return ExpansionPrediction(g_x, -0.5 * _laplacian_at(spec, g, x), "normalized")


def _validate_samples(grid: QuadratureGrid, t_samples) -> np.ndarray:
    t = np.asarray(t_samples, dtype=float)
    if len(t) < 6:
        raise InvalidConfig("expansion fit needs at least 6 sample times")
    if t.min() <= 0 or t.max() / t.min() < 10.0 - 1e-9:
        raise InvalidConfig("sample times must be positive and span at least a decade")
    identity = TimeScaling.identity()
    for ti in np.sort(t):
        resolution_check(grid, identity, 0.0, float(ti))
    return t


def _gaussian_means(grid: QuadratureGrid, values, y, t: np.ndarray, normalized: bool):
    d = grid.spec.intrinsic_dim
    sq = chordal_sq(grid.nodes, y)
    out = np.empty(len(t))
    for i, ti in enumerate(t):
        kernel = grid.weights * np.exp(-sq / (2.0 * ti))
        num = float(np.dot(kernel, values))
        if normalized:
            out[i] = num / float(np.sum(kernel))
        else:
            out[i] = num / (2.0 * math.pi * ti) ** (d / 2.0)
    return out


def _fit_expansion(t: np.ndarray, samples: np.ndarray) -> ExpansionFit:
    t_max = float(t.max())
    tau = t / t_max
    design = np.column_stack([np.ones_like(tau), tau, tau**1.5, tau**2])
    condition = float(np.linalg.cond(design))
    if condition > _CONDITION_LIMIT:
        raise IllConditionedFit(f"design matrix condition {condition:.3e} exceeds 1e8")
    coeffs, _, _, _ = np.linalg.lstsq(design, samples, rcond=None)
    a0 = float(coeffs[0])
    a1 = float(coeffs[1] / t_max)
    k_hat = float(coeffs[2] / t_max**1.5)
    model = design @ coeffs
    residual_norm = float(np.sqrt(np.mean((samples - model) ** 2)))
    remainder = np.abs(samples - a0 - a1 * t)
    floor = 1e-16 * max(1.0, float(np.max(np.abs(samples))))
    slope = np.polyfit(np.log(t), np.log(np.maximum(remainder, floor)), 1)[0]
    return ExpansionFit(a0, a1, k_hat, float(slope), (float(t.min()), t_max), residual_norm)


def measure_unnormalized(grid: QuadratureGrid, g, y, t_samples=None) -> ExpansionFit:
    """Fit the sampled unnormalized integral; g is given by node values."""
    t = _validate_samples(grid, default_t_samples() if t_samples is None else t_samples)
    y = _require_on_manifold(grid.spec, y)
    values = np.asarray(getattr(g, "values", g), dtype=float)
    return _fit_expansion(t, _gaussian_means(grid, values, y, t, normalized=False))


def measure_normalized(grid: QuadratureGrid, g, x, t_samples=None) -> ExpansionFit:
    """Fit the sampled normalized ratio; g is given by node values."""
    t = _validate_samples(grid, default_t_samples() if t_samples is None else t_samples)
    x = _require_on_manifold(grid.spec, x)
    values = np.asarray(getattr(g, "values", g), dtype=float)
    return _fit_expansion(t, _gaussian_means(grid, values, x, t, normalized=True))


def remainder_exponent_check(fit: ExpansionFit, threshold: float = 1.4) -> bool:
    """True when the residual after a0 + a1*t decays at least like t^1.4."""
    return fit.remainder_exponent >= threshold


def kernel_tail_bound(grid: QuadratureGrid, y, t_samples=None):
    """Normalized-kernel mass outside the geodesic ball of radius r/2 at y.

    Returns (t0, rows) where rows are (t, tail_mass) and t0 is the largest
    sampled t below which every smaller sample satisfies mass <= t^(3/2).
    """
    t = np.sort(np.asarray(default_t_samples() if t_samples is None else t_samples, dtype=float))
    y = _require_on_manifold(grid.spec, y)
    outside = geodesic_distance(grid.spec, grid.nodes, np.broadcast_to(y, grid.nodes.shape)) > (
        0.5 * grid.spec.radius
    )
    sq = chordal_sq(grid.nodes, y)
    rows = []
    t0 = None
    for ti in t:
        kernel = grid.weights * np.exp(-sq / (2.0 * ti))
        mass = float(np.sum(kernel[outside]) / np.sum(kernel))
        rows.append((float(ti), mass))
        if mass <= ti**1.5 and (t0 is None or ti > t0) and all(
            m <= tj**1.5 for tj, m in rows if tj <= ti
        ):
            t0 = float(ti)
    return t0, rows
