"""Named test functions shared by the CLI, presets, and tests.

Identifiers: ``const``; circle harmonics ``cos:k`` / ``sin:k`` (amplitude 1);
sphere Legendre profiles ``polar:l`` (value 1 at the north pole) and
orthonormal harmonics ``harm:l:q``. Each entry evaluates pointwise in ambient
coordinates and knows its exact eigenbasis coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import lpmv

from .errors import InvalidConfig
from .geometry import EigenIndex, ManifoldSpec, QuadratureGrid, eigenfunction
from .kernels import GridFunction
from .spectral import SpectralFunction

__all__ = ["TestFunction", "resolve"]


@dataclass(frozen=True)
class TestFunction:
    """A named function on the manifold with known spectral content."""

    name: str
    spec: ManifoldSpec
    band: int
    fn: Callable[[np.ndarray], np.ndarray]
    spectral_entries: dict

    def __call__(self, points) -> np.ndarray:
        return self.fn(np.asarray(points, dtype=float))

    def on_grid(self, grid: QuadratureGrid) -> GridFunction:
        return GridFunction(grid, self(grid.nodes))

    def to_spectral(self, cap: int = None) -> SpectralFunction:
        cap = self.band if cap is None else max(cap, self.band)
        return SpectralFunction.from_coefficients(self.spec, self.spectral_entries, cap)


def _angle(points) -> np.ndarray:
    return np.arctan2(points[..., 1], points[..., 0])


def _int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise InvalidConfig(f"function {name!r} has a non-integer mode") from exc


def resolve(spec: ManifoldSpec, name: str) -> TestFunction:
    """Look up a test function by identifier for the given manifold."""
    r = spec.radius
    parts = str(name).split(":")
    kind = parts[0]

    if kind == "const" and len(parts) == 1:
        if spec.kind == "circle":
            entries = {EigenIndex.circle(0): math.sqrt(2.0 * math.pi * r)}
        else:
            entries = {EigenIndex.sphere(0, 0): r * math.sqrt(4.0 * math.pi)}
        return TestFunction(name, spec, 0, lambda p: np.ones(p.shape[:-1]), entries)

    if kind in ("cos", "sin") and len(parts) == 2:
        if spec.kind != "circle":
            raise InvalidConfig(f"function {name!r} is circle-only")
        k = _int(parts[1], name)
        if k < 1:
            raise InvalidConfig(f"function {name!r} needs mode >= 1")
        trig = np.cos if kind == "cos" else np.sin
        entries = {EigenIndex.circle(k, kind): math.sqrt(math.pi * r)}
        return TestFunction(name, spec, k, lambda p, k=k, trig=trig: trig(k * _angle(p)), entries)

    if kind == "polar" and len(parts) == 2:
        if spec.kind != "sphere":
            raise InvalidConfig(f"function {name!r} is sphere-only")
        l = _int(parts[1], name)
        if l < 0:
            raise InvalidConfig(f"function {name!r} needs degree >= 0")
        entries = {EigenIndex.sphere(l, 0): r * math.sqrt(4.0 * math.pi / (2 * l + 1))}
        return TestFunction(
            name,
            spec,
            l,
            lambda p, l=l, r=r: lpmv(0, l, np.clip(p[..., 2] / r, -1.0, 1.0)),
            entries,
        )

    if kind == "harm" and len(parts) == 3:
        if spec.kind != "sphere":
            raise InvalidConfig(f"function {name!r} is sphere-only")
        l, q = _int(parts[1], name), _int(parts[2], name)
        try:
            idx = EigenIndex.sphere(l, q)
        except ValueError as exc:
            raise InvalidConfig(f"function {name!r}: {exc}") from exc
        return TestFunction(
            name, spec, l, lambda p, idx=idx: eigenfunction(spec, idx, p), {idx: 1.0}
        )

    raise InvalidConfig(f"unknown test function {name!r}")
