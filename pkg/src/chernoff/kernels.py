"""Time-inhomogeneous Gaussian transition density and one-step kernel operators.

The ambient transition density between times s < t is

    p(s, x, t, y) = det(sigma(t)) / (2*pi*(t-s))^(m/2)
                    * exp(-|sigma(t)y - sigma(s)x|^2 / (2*(t-s))),

with sigma(t) a diagonal, continuously differentiable, nondegenerate matrix
family. Restricting y to the manifold grid and renormalizing against the
quadrature weights yields one row-stochastic step operator per time pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _accel
from .errors import InvalidTimeOrder, KernelUnderResolved, ShapeMismatch, UnsupportedScaling
from .geometry import QuadratureGrid, _require_on_manifold

__all__ = [
    "ScalingComponent",
    "TimeScaling",
    "GridFunction",
    "KernelOperator",
    "transition_density",
    "normalized_manifold_density",
    "assemble_step_operator",
    "resolution_check",
    "pushforward_identity_check",
]


@dataclass(frozen=True)
class ScalingComponent:
    """One diagonal entry c(t): constant a, affine a + b*t, exponential a*e^(b*t),
    or a custom pair of callables (value, derivative)."""

    family: str
    a: float = 1.0
    b: float = 0.0
    func: Optional[Callable[[float], float]] = None
    dfunc: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.family not in ("constant", "affine", "exponential", "custom"):
            raise ValueError(f"unknown scaling family {self.family!r}")
        if self.family == "custom" and (self.func is None or self.dfunc is None):
            raise ValueError("custom scaling needs value and derivative callables")

    def value(self, t: float) -> float:
        if self.family == "constant":
            return self.a
        if self.family == "affine":
            return self.a + self.b * t
        if self.family == "exponential":
            return self.a * math.exp(self.b * t)
        return float(self.func(t))

    def derivative(self, t: float) -> float:
        if self.family == "constant":
            return 0.0
        if self.family == "affine":
            return self.b
        if self.family == "exponential":
            return self.a * self.b * math.exp(self.b * t)
        return float(self.dfunc(t))


@dataclass(frozen=True)
class TimeScaling:
    """Diagonal matrix family sigma(t) with exact derivative and determinant.

    ``scalar=True`` means a single c(t) broadcast over every ambient
    coordinate (sigma(t) = c(t) * I); otherwise one component per coordinate.
    """

    components: tuple
    scalar: bool = True

    @classmethod
    def identity(cls) -> "TimeScaling":
        return cls((ScalingComponent("constant", 1.0),), scalar=True)

    @classmethod
    def scalar_constant(cls, c: float) -> "TimeScaling":
        return cls((ScalingComponent("constant", c),), scalar=True)

    @classmethod
    def scalar_affine(cls, a: float, b: float) -> "TimeScaling":
        return cls((ScalingComponent("affine", a, b),), scalar=True)

    @classmethod
    def scalar_exponential(cls, a: float, b: float) -> "TimeScaling":
        return cls((ScalingComponent("exponential", a, b),), scalar=True)

    @classmethod
    def scalar_custom(cls, func, dfunc) -> "TimeScaling":
        return cls((ScalingComponent("custom", func=func, dfunc=dfunc),), scalar=True)

    @classmethod
    def diagonal(cls, components) -> "TimeScaling":
        return cls(tuple(components), scalar=False)

    @property
    def component(self) -> ScalingComponent:
        if not self.scalar:
            raise UnsupportedScaling("operation requires scalar scaling c(t)*I")
        return self.components[0]

    def c(self, t: float) -> float:
        return self.component.value(t)

    def c_prime(self, t: float) -> float:
        return self.component.derivative(t)

    def diag(self, t: float, m: int) -> np.ndarray:
        if self.scalar:
            vals = np.full(m, self.components[0].value(t))
        else:
            if len(self.components) != m:
                raise ShapeMismatch(
                    f"diagonal scaling has {len(self.components)} components, ambient dim is {m}"
                )
            vals = np.array([comp.value(t) for comp in self.components])
        if np.any(vals == 0.0):
            raise ValueError(f"scaling degenerate at t={t}")
        return vals

    def diag_derivative(self, t: float, m: int) -> np.ndarray:
        if self.scalar:
            return np.full(m, self.components[0].derivative(t))
        return np.array([comp.derivative(t) for comp in self.components])

    def det(self, t: float, m: int) -> float:
        return float(np.prod(self.diag(t, m)))

    def max_singular_value(self, t: float, m: int) -> float:
        return float(np.max(np.abs(self.diag(t, m))))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values attached to the nodes of a quadrature grid."""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise ShapeMismatch(
                f"expected {self.grid.n_nodes} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """One discretized step operator: a nonnegative row-stochastic matrix."""

    grid: QuadratureGrid
    s: float
    t: float
    matrix: np.ndarray

    def __post_init__(self):
        row_sums = self.matrix.sum(axis=1)
        if np.any(self.matrix < 0) or np.max(np.abs(row_sums - 1.0)) > 1e-12:
            raise ValueError("kernel matrix must be nonnegative with unit row sums")

    def apply(self, f) -> GridFunction:
        values = np.asarray(getattr(f, "values", f), dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise ShapeMismatch("function length does not match kernel size")
        return GridFunction(self.grid, self.matrix @ values)


def transition_density(scaling: TimeScaling, s: float, x, t: float, y):
    """Ambient Gaussian transition density p(s, x, t, y); vectorized over y."""
    if not s < t:
        raise InvalidTimeOrder(f"need s < t, got s={s}, t={t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = x.shape[-1]
    diag_s = scaling.diag(s, m)
    diag_t = scaling.diag(t, m)
    dt = t - s
    z = diag_t * y - diag_s * x
    sq = np.sum(z * z, axis=-1)
    det = float(np.prod(diag_t))
    return det / (2.0 * math.pi * dt) ** (m / 2.0) * np.exp(-sq / (2.0 * dt))


def resolution_check(grid: QuadratureGrid, scaling: TimeScaling, s: float, t: float) -> dict:
    """Require the kernel width to cover at least three adjacent image nodes.

    Width is sqrt(t-s) / max_singular_value(sigma(t)); spacing is the largest
    chordal gap between adjacent nodes of the image grid sigma(t) * x_j.
    Returns the measured quantities; raises KernelUnderResolved when
    width < 3 * spacing.
    """
    if not s < t:
        raise InvalidTimeOrder(f"need s < t, got s={s}, t={t}")
    m = grid.spec.ambient_dim
    width = math.sqrt(t - s) / scaling.max_singular_value(t, m)
    image = grid.nodes * scaling.diag(t, m)
    ia, ib = grid.adjacent_pairs()
    gaps = np.linalg.norm(image[ia] - image[ib], axis=1)
    spacing = float(gaps.max())
    if width < 3.0 * spacing:
        raise KernelUnderResolved(
            f"kernel width {width:.3e} below 3x node spacing {spacing:.3e}; "
            "refine the grid or enlarge the step"
        )
    return {"width": width, "max_spacing": spacing, "ratio": width / (3.0 * spacing)}


def _kernel_rows(grid: QuadratureGrid, scaling: TimeScaling, s: float, t: float, src_points):
    """Row-stochastic kernel rows from arbitrary source points to grid nodes."""
    m = grid.spec.ambient_dim
    src = np.atleast_2d(np.asarray(src_points, dtype=float)) * scaling.diag(s, m)
    dst = grid.nodes * scaling.diag(t, m)
    return _accel.kernel_matrix(src, dst, grid.weights, 1.0 / (2.0 * (t - s)))


def assemble_step_operator(
    grid: QuadratureGrid, scaling: TimeScaling, s: float, t: float
) -> KernelOperator:
    """Discretize one conditioning step into a row-stochastic matrix.

    Entry (i, j) is w_j * p(s, x_i, t, x_j) normalized over j with the same
    quadrature sum, so constants are preserved to machine precision.
    """
    resolution_check(grid, scaling, s, t)
    matrix = _kernel_rows(grid, scaling, s, t, grid.nodes)
    return KernelOperator(grid, s, t, matrix)


def normalized_manifold_density(
    grid: QuadratureGrid, scaling: TimeScaling, s: float, x, t: float
) -> GridFunction:
    """One-step transition density against the volume measure, renormalized
    so that its quadrature mass is exactly one."""
    resolution_check(grid, scaling, s, t)
    x = _require_on_manifold(grid.spec, x)
    row = _kernel_rows(grid, scaling, s, t, x)[0]
    return GridFunction(grid, row / grid.weights)


def pushforward_identity_check(
    grid: QuadratureGrid, scaling: TimeScaling, s: float, t: float, f, x=None
):
    """Compare two quadratures of the same smoothing integral.

    Left side: the manifold quadrature of p(s, x, t, y) f(y). Right side:
    det(sigma(t)) times the standard heat kernel integrated over the image
    grid sigma(t) * x_j carrying the pushforward of the volume measure
    (weights unchanged). Returns (lhs, rhs, |lhs - rhs|).
    """
    if not s < t:
        raise InvalidTimeOrder(f"need s < t, got s={s}, t={t}")
    x = grid.nodes[0] if x is None else np.asarray(x, dtype=float)
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ShapeMismatch("function length does not match grid size")
    m = grid.spec.ambient_dim
    lhs = float(np.dot(grid.weights, transition_density(scaling, s, x, t, grid.nodes) * values))

    dt = t - s
    x_s = scaling.diag(s, m) * x
    image = grid.nodes * scaling.diag(t, m)
    sq = np.sum((image - x_s) ** 2, axis=-1)
    heat = np.exp(-sq / (2.0 * dt)) / (2.0 * math.pi * dt) ** (m / 2.0)
    rhs = float(scaling.det(t, m) * np.dot(grid.weights, heat * values))
    return lhs, rhs, abs(lhs - rhs)
