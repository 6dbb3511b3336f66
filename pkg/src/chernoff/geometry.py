"""Embedded circle and sphere: quadrature, spectra, curvature, tangent maps.

The two supported manifolds are the centered circle S^1_r in R^2 and the
centered sphere S^2_r in R^3. Points are stored in ambient coordinates;
angles (circle) and colatitude/longitude (sphere) are derived views.

The Laplace-Beltrami operator is taken with the nonnegative (spectral) sign
convention throughout: eigenvalues are k^2/r^2 on the circle and l(l+1)/r^2
on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lpmv, roots_legendre

from .errors import InvalidResolution, PointNotOnManifold, ShapeMismatch

__all__ = [
    "ManifoldSpec",
    "QuadratureGrid",
    "EigenIndex",
    "build_grid",
    "chordal_sq",
    "geodesic_distance",
    "eigenvalue",
    "eigenfunction",
    "scalar_curvature",
    "double_laplacian_chordal",
    "project_tangent",
    "integrate",
    "basis_indices",
    "default_cap",
]

_MIN_CIRCLE_NODES = 8
_MIN_SPHERE_NODES = 8
_ON_MANIFOLD_RTOL = 1e-8


@dataclass(frozen=True)
class ManifoldSpec:
    """Which manifold, and at what radius.

    Parameters
    ----------
    kind : {"circle", "sphere"}
    radius : float
        Positive radius of the centered manifold.
    """

    kind: str
    radius: float

    def __post_init__(self):
        if self.kind not in ("circle", "sphere"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def ambient_dim(self) -> int:
        return 2 if self.kind == "circle" else 3

    @property
    def intrinsic_dim(self) -> int:
        return 1 if self.kind == "circle" else 2

    @property
    def volume(self) -> float:
        r = self.radius
        return 2.0 * math.pi * r if self.kind == "circle" else 4.0 * math.pi * r * r

    @property
    def diameter(self) -> float:
        """Largest chordal distance between two points."""
        return 2.0 * self.radius


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights discretizing the volume measure.

    ``sum(weights)`` equals the total volume (circumference or surface area)
    and every node lies on the manifold; both are checked at construction.
    """

    spec: ManifoldSpec
    nodes: np.ndarray
    weights: np.ndarray
    resolution: tuple
    _adjacent: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        r = self.spec.radius
        radii = np.linalg.norm(nodes, axis=1)
        if not np.all(np.abs(radii - r) <= 1e-12 * r):
            raise PointNotOnManifold("grid nodes deviate from the manifold radius")
        if not np.all(weights > 0):
            raise ValueError("quadrature weights must be positive")
        total = weights.sum()
        if abs(total - self.spec.volume) > 1e-10 * self.spec.volume:
            raise ValueError("quadrature weights do not sum to the manifold volume")
        object.__setattr__(self, "_adjacent", _adjacent_pairs(self.spec, self.resolution))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def angles(self) -> np.ndarray:
        """Circle only: node angles in [0, 2*pi)."""
        if self.spec.kind != "circle":
            raise ValueError("angles() is a circle-only view")
        theta = np.arctan2(self.nodes[:, 1], self.nodes[:, 0])
        return np.mod(theta, 2.0 * math.pi)

    def adjacent_pairs(self):
        """Index arrays (i, j) of neighboring nodes, used for spacing checks.

        Circle: consecutive nodes around the ring. Sphere: consecutive nodes
        within each colatitude ring plus same-longitude nodes of consecutive
        rings.
        """
        return self._adjacent


def _adjacent_pairs(spec: ManifoldSpec, resolution) -> tuple:
    if spec.kind == "circle":
        n = resolution[0]
        i = np.arange(n)
        return i, (i + 1) % n
    n_colat, n_lon = resolution
    ring = np.arange(n_lon)
    ring_next = (ring + 1) % n_lon
    i_list, j_list = [], []
    for k in range(n_colat):
        base = k * n_lon
        i_list.append(base + ring)
        j_list.append(base + ring_next)
    for k in range(n_colat - 1):
        base = k * n_lon
        i_list.append(base + ring)
        j_list.append(base + n_lon + ring)
    return np.concatenate(i_list), np.concatenate(j_list)


def build_grid(spec: ManifoldSpec, resolution) -> QuadratureGrid:
    """Build the quadrature grid for the volume measure.

    Circle: ``resolution`` is an int n >= 8; nodes are uniform in angle with
    weight 2*pi*r/n each. Sphere: ``resolution`` is (n_colat, n_lon), both
    >= 8; nodes are Gauss-Legendre in cos(colatitude) crossed with uniform
    longitude, weights gl_weight * (2*pi/n_lon) * r^2.
    """
    r = spec.radius
    if spec.kind == "circle":
        if np.ndim(resolution) != 0:
            (resolution,) = resolution
        n = int(resolution)
        if n < _MIN_CIRCLE_NODES:
            raise InvalidResolution(f"circle grid needs n >= {_MIN_CIRCLE_NODES}, got {n}")
        theta = 2.0 * math.pi * np.arange(n) / n
        nodes = r * np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(n, 2.0 * math.pi * r / n)
        return QuadratureGrid(spec, nodes, weights, (n,))

    n_colat, n_lon = (int(v) for v in resolution)
    if n_colat < _MIN_SPHERE_NODES or n_lon < _MIN_SPHERE_NODES:
        raise InvalidResolution(
            f"sphere grid needs n_colat, n_lon >= {_MIN_SPHERE_NODES}, got {(n_colat, n_lon)}"
        )
    u, gl_w = roots_legendre(n_colat)  # u = cos(colatitude), ascending
    phi = 2.0 * math.pi * np.arange(n_lon) / n_lon
    sin_colat = np.sqrt(1.0 - u**2)
    x = np.outer(sin_colat, np.cos(phi))
    y = np.outer(sin_colat, np.sin(phi))
    z = np.outer(u, np.ones(n_lon))
    nodes = r * np.column_stack([x.ravel(), y.ravel(), z.ravel()])
    weights = np.repeat(gl_w, n_lon) * (2.0 * math.pi / n_lon) * r * r
    return QuadratureGrid(spec, nodes, weights, (n_colat, n_lon))


def chordal_sq(p, q) -> np.ndarray:
    """Squared ambient (straight-line) distance |p - q|^2."""
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return np.sum(d * d, axis=-1)


def _require_on_manifold(spec: ManifoldSpec, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    if not np.all(np.abs(r - spec.radius) <= _ON_MANIFOLD_RTOL * spec.radius):
        raise PointNotOnManifold(f"point at radius {r} not on manifold of radius {spec.radius}")
    return p


def geodesic_distance(spec: ManifoldSpec, p, q) -> float:
    """Arc distance r * (central angle) between two on-manifold points."""
    p = _require_on_manifold(spec, p)
    q = _require_on_manifold(spec, q)
    dot = np.sum(p * q, axis=-1)
    if spec.kind == "circle":
        cross = p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
        cross = np.abs(cross)
    else:
        cross = np.linalg.norm(np.cross(p, q), axis=-1)
    angle = np.arctan2(cross, dot)
    return spec.radius * angle


def eigenvalue(spec: ManifoldSpec, idx: "EigenIndex") -> float:
    """Nonnegative Laplace-Beltrami eigenvalue of the indexed eigenfunction."""
    r = spec.radius
    if spec.kind == "circle":
        return idx.mode**2 / r**2
    return idx.mode * (idx.mode + 1) / r**2


@dataclass(frozen=True)
class EigenIndex:
    """Index into the Laplace-Beltrami eigenbasis.

    Circle: ``mode`` is the angular frequency k >= 0 and ``parity`` selects
    cos/sin (k = 0 is the constant, parity must be "cos"). Sphere: ``mode``
    is the degree l >= 0 and ``order`` the real-form order q in [-l, l];
    ``parity`` is unused.
    """

    mode: int
    parity: str = "cos"
    order: int = 0

    def __post_init__(self):
        if self.mode < 0:
            raise ValueError("mode must be >= 0")
        if self.parity not in ("cos", "sin"):
            raise ValueError("parity must be 'cos' or 'sin'")
        if self.mode == 0 and self.parity == "sin":
            raise ValueError("mode 0 has no sine eigenfunction")
        if abs(self.order) > self.mode:
            raise ValueError("order must satisfy |q| <= l")

    @classmethod
    def circle(cls, k: int, parity: str = "cos") -> "EigenIndex":
        return cls(mode=k, parity=parity)

    @classmethod
    def sphere(cls, l: int, q: int) -> "EigenIndex":
        return cls(mode=l, order=q)


def eigenfunction(spec: ManifoldSpec, idx: EigenIndex, point) -> np.ndarray:
    """Evaluate the orthonormal real eigenfunction at ambient point(s).

    Orthonormality is with respect to the volume measure of the radius-r
    manifold, so values carry a 1/sqrt(r) (circle) or 1/r (sphere) factor
    relative to the unit-radius conventions.
    """
    point = np.asarray(point, dtype=float)
    r = spec.radius
    if spec.kind == "circle":
        theta = np.arctan2(point[..., 1], point[..., 0])
        k = idx.mode
        if k == 0:
            return np.full(theta.shape, 1.0 / math.sqrt(2.0 * math.pi * r))
        if idx.parity == "cos":
            return np.cos(k * theta) / math.sqrt(math.pi * r)
        return np.sin(k * theta) / math.sqrt(math.pi * r)

    l, q = idx.mode, idx.order
    cos_colat = np.clip(point[..., 2] / r, -1.0, 1.0)
    phi = np.arctan2(point[..., 1], point[..., 0])
    aq = abs(q)
    norm = math.sqrt(
        (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - aq) / math.factorial(l + aq)
    )
    assoc = lpmv(aq, l, cos_colat)
    if q == 0:
        return norm * assoc / r
    if q > 0:
        return math.sqrt(2.0) * norm * assoc * np.cos(q * phi) / r
    return math.sqrt(2.0) * norm * assoc * np.sin(aq * phi) / r


def scalar_curvature(spec: ManifoldSpec, point=None) -> float:
    """Scalar curvature: 0 on a circle, 2/r^2 on a sphere (constant)."""
    if point is not None:
        _require_on_manifold(spec, point)
    if spec.kind == "circle":
        return 0.0
    return 2.0 / spec.radius**2


def double_laplacian_chordal(spec: ManifoldSpec, y=None) -> float:
    """Twice-applied Laplacian of z -> |z - y|^2, evaluated at z = y.

    The value is independent of the Laplacian sign convention (the operator
    is applied twice) and of the base point by symmetry: -2/r^2 on the
    circle, -8/r^2 on the sphere.
    """
    if y is not None:
        _require_on_manifold(spec, y)
    if spec.kind == "circle":
        return -2.0 / spec.radius**2
    return -8.0 / spec.radius**2


def project_tangent(spec: ManifoldSpec, base, v) -> np.ndarray:
    """Orthogonal projection of ambient vector(s) v onto the tangent space at base."""
    base = _require_on_manifold(spec, base)
    v = np.asarray(v, dtype=float)
    normal = base / np.linalg.norm(base, axis=-1, keepdims=True)
    return v - np.sum(v * normal, axis=-1, keepdims=True) * normal


def integrate(grid: QuadratureGrid, f) -> float:
    """Quadrature integral sum(w_i * f_i) over the grid nodes.

    ``f`` may be a plain array of node values or any object with a
    ``values`` attribute of matching length.
    """
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ShapeMismatch(f"expected {grid.n_nodes} node values, got shape {values.shape}")
    return float(np.dot(grid.weights, values))


def default_cap(grid: QuadratureGrid) -> int:
    """Default eigenbasis truncation staying inside quadrature exactness."""
    if grid.spec.kind == "circle":
        return grid.resolution[0] // 4
    return grid.resolution[0] // 2 - 1


def basis_indices(spec: ManifoldSpec, cap: int):
    """All eigenbasis indices up to mode/degree ``cap``, lowest first."""
    out = []
    if spec.kind == "circle":
        out.append(EigenIndex.circle(0))
        for k in range(1, cap + 1):
            out.append(EigenIndex.circle(k, "cos"))
            out.append(EigenIndex.circle(k, "sin"))
    else:
        for l in range(cap + 1):
            for q in range(-l, l + 1):
                out.append(EigenIndex.sphere(l, q))
    return out
