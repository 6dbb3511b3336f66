"""Stepwise-conditioned chain on the grid and its distributional checks.

One step of the chain draws the next grid node from the normalized kernel
row of the current node — the discrete analogue of conditioning the ambient
diffusion to return to the manifold at the next partition time. Between
partition times the conditioned law has an explicit ambient density, checked
here by quadrature; at partition times the chain's finite-dimensional
expectations are compared against the exact kernel-matrix contractions and
the closed-form diffusion limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from . import _accel
from .engine import Partition, _StepCache
from .errors import (
    InvalidConfig,
    InvalidTimeOrder,
    ShellTooThick,
    TimesNotInPartition,
)
from .geometry import QuadratureGrid, _require_on_manifold
from .kernels import TimeScaling, _kernel_rows, transition_density
from .spectral import ScalarGeneratorModel, SpectralFunction, propagate

__all__ = [
    "PathSkeleton",
    "FddReport",
    "sample_step",
    "sample_skeleton",
    "off_partition_density",
    "off_partition_normalization",
    "shell_density_limit",
    "fdd_reference",
    "fdd_estimate",
]


@dataclass(frozen=True, eq=False)
class PathSkeleton:
    """One sampled chain path: a grid-node index per partition time."""

    partition: Partition
    grid: QuadratureGrid
    node_indices: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        idx = np.asarray(self.node_indices, dtype=np.int64)
        if idx.shape != (len(self.partition.times),):
            raise ValueError("one node index per partition time required")
        object.__setattr__(self, "node_indices", idx)

    @property
    def points(self) -> np.ndarray:
        return self.grid.nodes[self.node_indices]


@dataclass(frozen=True)
class FddReport:
    """Monte Carlo estimate of a finite-dimensional expectation vs references."""

    times: tuple
    function_label: str
    mc_mean: float
    mc_stderr: float
    chain_reference: float
    diffusion_reference: Optional[float]
    z_score: float
    n_paths: int
    seed: int


def _row_cdf(matrix: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(matrix, axis=1)
    cdf /= cdf[:, -1:]
    cdf[:, -1] = 1.0
    return cdf


def sample_step(
    grid: QuadratureGrid, scaling: TimeScaling, t0: float, x_index: int, t1: float, rng
) -> int:
    """Draw the next node from the kernel row of node ``x_index``."""
    row = _kernel_rows(grid, scaling, t0, t1, grid.nodes[x_index])[0]
    cdf = np.cumsum(row)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def sample_skeleton(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    partition: Partition,
    x0_index: int,
    rng,
    seed: Optional[int] = None,
) -> PathSkeleton:
    """Sample one path by sequential one-step draws along the partition."""
    indices = [int(x0_index)]
    times = partition.times
    for j in range(partition.n_steps):
        indices.append(sample_step(grid, scaling, times[j], indices[-1], times[j + 1], rng))
    return PathSkeleton(partition, grid, np.array(indices, dtype=np.int64), seed)


def off_partition_density(
    grid: QuadratureGrid, scaling: TimeScaling, r: float, z, tau: float, t_i: float, y
):
    """Ambient density of the conditioned path at a time between partition points.

    The path last touched the manifold at time r (point z) and is conditioned
    to return at time t_i; at the intermediate time tau its position has the
    Lebesgue density

        p(r, z, tau, y) * int_M p(tau, y, t_i, xbar) dvol(xbar)
                        / int_M p(r, z, t_i, xbar) dvol(xbar).

    Vectorized over a batch of ambient points y.
    """
    if not (r < tau < t_i):
        raise InvalidTimeOrder(f"need r < tau < t_i, got {r}, {tau}, {t_i}")
    z = _require_on_manifold(grid.spec, z)
    y = np.asarray(y, dtype=float)
    batch = np.atleast_2d(y)
    free = transition_density(scaling, r, z, tau, batch)
    return_mass = transition_density(
        scaling, tau, batch[:, None, :], t_i, grid.nodes[None, :, :]
    ) @ grid.weights
    denom = float(np.dot(grid.weights, transition_density(scaling, r, z, t_i, grid.nodes)))
    out = free * return_mass / denom
    return out if y.ndim > 1 else float(out[0])


def off_partition_normalization(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    r: float,
    z,
    tau: float,
    t_i: float,
    box_points: int = 160,
    box_widths: float = 6.0,
) -> float:
    """Integrate the off-partition density over a truncated ambient box.

    Circle (2D ambient) only. The box covers the manifold image plus
    ``box_widths`` kernel widths; the result should be 1 up to truncation
    and quadrature error.
    """
    m = grid.spec.ambient_dim
    if m != 2:
        raise InvalidConfig("box normalization is implemented for the circle only")
    radius = grid.spec.radius
    d_tau = np.abs(scaling.diag(tau, m))
    reach = radius * max(
        np.max(np.abs(scaling.diag(r, m))), np.max(np.abs(scaling.diag(t_i, m)))
    ) / float(np.min(d_tau))
    width = (math.sqrt(tau - r) + math.sqrt(t_i - tau)) / float(np.min(d_tau))
    half = reach + box_widths * width
    x_nodes, x_weights = roots_legendre(box_points)
    x_nodes = half * x_nodes
    x_weights = half * x_weights
    xx, yy = np.meshgrid(x_nodes, x_nodes, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    density = off_partition_density(grid, scaling, r, z, tau, t_i, points)
    return float(np.sum(density.reshape(box_points, box_points) * np.outer(x_weights, x_weights)))


def shell_density_limit(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    s: float,
    x,
    t: float,
    eps_list,
    f,
    n_radial: int = 64,
    n_angular: int = 2048,
):
    """Expectations under conditioning into shrinking shells around the circle.

    For each half-width eps, the ambient endpoint law conditioned into the
    shell r - eps <= |y| <= r + eps is integrated (in polar coordinates)
    against f projected radially onto the circle; the rows converge to the
    expectation under the normalized one-step manifold kernel, which is
    returned as ``limit``.
    """
    if grid.spec.kind != "circle":
        raise InvalidConfig("shell conditioning is implemented for the circle only")
    radius = grid.spec.radius
    eps_arr = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise InvalidConfig("eps_list must be strictly decreasing")
    for eps in eps_arr:
        if eps >= radius / 2.0:
            raise ShellTooThick(f"shell half-width {eps} too thick for radius {radius}")
    x = _require_on_manifold(grid.spec, x)

    row = _kernel_rows(grid, scaling, s, t, x)[0]
    f_nodes = np.asarray(f(grid.nodes), dtype=float)
    limit = float(np.dot(row, f_nodes))

    phi = 2.0 * math.pi * np.arange(n_angular) / n_angular
    directions = np.column_stack([np.cos(phi), np.sin(phi)])
    f_angular = np.asarray(f(radius * directions), dtype=float)
    rows = []
    for eps in eps_arr:
        rho_nodes, rho_weights = roots_legendre(n_radial)
        rho = radius + eps * rho_nodes
        w_rho = eps * rho_weights
        points = rho[:, None, None] * directions[None, :, :]
        dens = transition_density(scaling, s, x, t, points)
        radial_jac = (rho * w_rho)[:, None]
        num = float(np.sum(dens * radial_jac * f_angular[None, :]))
        den = float(np.sum(dens * radial_jac))
        rows.append((eps, num / den))
    return rows, limit


def _partition_index(partition: Partition, time: float) -> int:
    match = np.nonzero(np.isclose(partition.times, time, rtol=0.0, atol=1e-12))[0]
    if len(match) != 1:
        raise TimesNotInPartition(f"time {time} is not a partition point")
    return int(match[0])


def _as_node_values(grid: QuadratureGrid, f) -> np.ndarray:
    if callable(f):
        return np.asarray(f(grid.nodes), dtype=float)
    return np.asarray(getattr(f, "values", f), dtype=float)


def fdd_reference(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    partition: Partition,
    x0_index: int,
    times,
    functions,
    include_diffusion: bool = True,
):
    """Exact references for E[f_1(X_{tau_1}) ... f_k(X_{tau_k})].

    Returns (chain_value, diffusion_value): the first contracts the kernel
    matrices of the partition (the exact law of the discrete chain), the
    second composes the closed-form propagator between observation times
    (scalar scaling only; pass include_diffusion=False otherwise).
    """
    times = [float(tv) for tv in times]
    if len(times) != len(functions) or not 1 <= len(times) <= 3:
        raise InvalidConfig("need between 1 and 3 observation times, one function each")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InvalidConfig("observation times must be strictly increasing")
    obs_idx = [_partition_index(partition, tv) for tv in times]
    f_values = [_as_node_values(grid, f) for f in functions]

    cache = _StepCache(grid, scaling)
    part_times = partition.times
    values = f_values[-1].copy()
    for pos in range(len(times) - 1, -1, -1):
        stop = obs_idx[pos - 1] if pos > 0 else 0
        for j in range(obs_idx[pos], stop, -1):
            values = cache.step(part_times[j - 1], part_times[j]).matrix @ values
        if pos > 0:
            values = values * f_values[pos - 1]
    chain_value = float(values[x0_index])

    diffusion_value = None
    if include_diffusion:
        model = ScalarGeneratorModel(grid.spec, scaling)
        g = f_values[-1]
        for pos in range(len(times) - 1, 0, -1):
            sf = SpectralFunction.from_grid(grid, g)
            sf = propagate(model, times[pos - 1], times[pos], sf)
            g = sf.to_grid(grid).values * f_values[pos - 1]
        sf = propagate(model, float(part_times[0]), times[0], SpectralFunction.from_grid(grid, g))
        diffusion_value = float(sf.evaluate(grid.nodes[x0_index]))
    return chain_value, diffusion_value


def _batch_states(grid, scaling, partition, x0_index, obs_idx, n_paths, seed):
    """Advance n_paths chains; return states at the requested partition indices.

    Paths draw from a counter-based generator filling an (n_paths, n_steps)
    uniform matrix row-major, so path i consumes the counter block
    [i * n_steps, (i+1) * n_steps) regardless of the batch size.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    uniforms = rng.random((n_paths, partition.n_steps))
    cache = _StepCache(grid, scaling)
    samplers = {}
    states = np.full(n_paths, x0_index, dtype=np.int64)
    recorded = {}
    if 0 in obs_idx:
        recorded[0] = states.copy()
    times = partition.times
    for j in range(1, partition.n_steps + 1):
        op = cache.step(times[j - 1], times[j])
        key = id(op)
        sampler = samplers.get(key)
        if sampler is None:
            sampler = _accel.make_sampler(_row_cdf(op.matrix))
            samplers[key] = sampler
        states = sampler(states, uniforms[:, j - 1])
        if j in obs_idx:
            recorded[j] = states.copy()
    return recorded


def fdd_estimate(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    partition: Partition,
    x0_index: int,
    times,
    functions,
    n_paths: int,
    seed: int,
    function_label: str = "",
) -> FddReport:
    """Monte Carlo finite-dimensional expectation over sampled chain paths."""
    if n_paths < 10_000:
        raise InvalidConfig("need at least 10^4 paths for a stable estimate")
    times = [float(tv) for tv in times]
    obs_idx = [_partition_index(partition, tv) for tv in times]
    include_diffusion = scaling.scalar
    chain_ref, diffusion_ref = fdd_reference(
        grid, scaling, partition, x0_index, times, functions, include_diffusion
    )
    recorded = _batch_states(grid, scaling, partition, x0_index, set(obs_idx), n_paths, seed)
    f_values = [_as_node_values(grid, f) for f in functions]
    samples = np.ones(n_paths)
    for pos, j in enumerate(obs_idx):
        samples = samples * f_values[pos][recorded[j]]
    mc_mean = float(np.mean(samples))
    spread = float(np.std(samples, ddof=1))
    mc_stderr = spread / math.sqrt(n_paths)
    if mc_stderr == 0.0:
        z_score = 0.0 if mc_mean == chain_ref else math.inf
    else:
        z_score = abs(mc_mean - chain_ref) / mc_stderr
    return FddReport(
        times=tuple(times),
        function_label=function_label,
        mc_mean=mc_mean,
        mc_stderr=mc_stderr,
        chain_reference=chain_ref,
        diffusion_reference=diffusion_ref,
        z_score=z_score,
        n_paths=n_paths,
        seed=seed,
    )
