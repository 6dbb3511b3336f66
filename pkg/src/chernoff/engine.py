"""Products of step operators over partitions and their convergence studies.

A product over the partition t_0 < t_1 < ... < t_n applies the latest step
first: the input function is transformed by the (t_{n-1}, t_n) operator,
then successively by earlier-time operators. This ordering matters for
time-dependent scaling and is pinned by a dedicated test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidConfig, InvalidPartition
from .kernels import GridFunction, QuadratureGrid, TimeScaling, assemble_step_operator
from .spectral import ScalarGeneratorModel, SpectralFunction, generator_apply

__all__ = [
    "Partition",
    "ConvergenceTable",
    "GeneratorDefectTable",
    "uniform_partition",
    "apply_product",
    "convergence_study",
    "self_convergence_study",
    "generator_consistency_check",
]


@dataclass(frozen=True, eq=False)
class Partition:
    """Strictly increasing times; ``n_steps`` may be zero only for the
    degenerate single-time case (no operator can be applied then)."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) < 1:
            raise InvalidPartition("partition needs at least one time")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise InvalidPartition("partition times must be strictly increasing")
        object.__setattr__(self, "times", times)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def mesh(self) -> float:
        if self.n_steps == 0:
            return 0.0
        return float(np.max(np.diff(self.times)))


def uniform_partition(s: float, t: float, n: int) -> Partition:
    """n equal steps from s to t."""
    if n < 1 or not s < t:
        raise InvalidPartition(f"need s < t and n >= 1, got s={s}, t={t}, n={n}")
    return Partition(s + (t - s) * np.arange(n + 1) / n)


class _StepCache:
    """Assembles step operators, reusing any step with identical scaling data.

    With constant scaling and a uniform partition most steps share the exact
    same matrix; keying on the exact float inputs keeps this an identity-
    preserving optimization (reused steps are bitwise the same operator).
    """

    def __init__(self, grid: QuadratureGrid, scaling: TimeScaling):
        self.grid = grid
        self.scaling = scaling
        self._cache = {}

    def step(self, s: float, t: float):
        m = self.grid.spec.ambient_dim
        key = (t - s, tuple(self.scaling.diag(s, m)), tuple(self.scaling.diag(t, m)))
        op = self._cache.get(key)
        if op is None:
            op = assemble_step_operator(self.grid, self.scaling, s, t)
            self._cache[key] = op
        return op


def apply_product(
    grid: QuadratureGrid, scaling: TimeScaling, partition: Partition, f
) -> GridFunction:
    """Apply the full product of step operators over the partition to f."""
    if partition.n_steps < 1:
        raise InvalidPartition("product needs at least one step")
    cache = _StepCache(grid, scaling)
    values = np.asarray(getattr(f, "values", f), dtype=float)
    times = partition.times
    for j in range(partition.n_steps, 0, -1):
        values = cache.step(times[j - 1], times[j]).matrix @ values
    return GridFunction(grid, values)


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    """Rows (n, mesh, sup_error) plus a log-log least-squares rate fit."""

    rows: tuple
    order: float
    intercept: float
    order_ci95: float

    def errors(self) -> np.ndarray:
        return np.array([row[2] for row in self.rows])


def _fit_order(rows) -> tuple:
    mesh = np.array([row[1] for row in rows])
    err = np.array([max(row[2], 1e-300) for row in rows])
    fit = stats.linregress(np.log(mesh), np.log(err))
    return float(fit.slope), float(fit.intercept), float(1.96 * fit.stderr)


def convergence_study(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    s: float,
    t: float,
    f,
    n_list,
    reference,
) -> ConvergenceTable:
    """Sup-error of the partition product against a fixed reference function."""
    n_list = list(n_list)
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidConfig("n_list must be ascending with at least 3 entries")
    ref_values = np.asarray(getattr(reference, "values", reference), dtype=float)
    rows = []
    for n in n_list:
        part = uniform_partition(s, t, n)
        result = apply_product(grid, scaling, part, f)
        sup_error = float(np.max(np.abs(result.values - ref_values)))
        rows.append((n, part.mesh, sup_error))
    order, intercept, ci = _fit_order(rows)
    return ConvergenceTable(tuple(rows), order, intercept, ci)


def self_convergence_study(
    grid: QuadratureGrid, scaling: TimeScaling, s: float, t: float, f, n_list
) -> ConvergenceTable:
    """Convergence against the product at twice the finest requested n.

    Used where no closed-form propagator exists (non-scalar scaling).
    """
    n_list = list(n_list)
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidConfig("n_list must be ascending with at least 3 entries")
    if n_list[-1] < 4 * n_list[0]:
        raise InvalidConfig("last n must be at least 4x the first for a self-reference")
    reference = apply_product(grid, scaling, uniform_partition(s, t, 2 * n_list[-1]), f)
    return convergence_study(grid, scaling, s, t, f, n_list, reference)


@dataclass(frozen=True, eq=False)
class GeneratorDefectTable:
    """Rows (h, defect) for |(Q_{t-h,t} f - f)/h - A_t f| plus the decay fit."""

    rows: tuple
    exponent: float

    def defects(self) -> np.ndarray:
        return np.array([row[1] for row in self.rows])


def generator_consistency_check(
    grid: QuadratureGrid,
    scaling: TimeScaling,
    t: float,
    f_spectral: SpectralFunction,
    h_list,
) -> GeneratorDefectTable:
    """Difference quotient of one step against the generator, per step size.

    The defect sup-norm should shrink as h does; the fitted exponent of
    defect vs h is returned for threshold checks.
    """
    h_list = list(h_list)
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise InvalidConfig("h_list must be strictly decreasing")
    model = ScalarGeneratorModel(grid.spec, scaling)
    f_grid = f_spectral.to_grid(grid).values
    target = generator_apply(model, t, f_spectral).to_grid(grid).values
    rows = []
    for h in h_list:
        op = assemble_step_operator(grid, scaling, t - h, t)
        quotient = (op.matrix @ f_grid - f_grid) / h
        rows.append((h, float(np.max(np.abs(quotient - target)))))
    fit = stats.linregress(
        np.log([row[0] for row in rows]), np.log([max(row[1], 1e-300) for row in rows])
    )
    return GeneratorDefectTable(tuple(rows), float(fit.slope))
