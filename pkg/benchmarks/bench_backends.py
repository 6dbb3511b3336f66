"""Timing comparison between the compiled kernel backend and the numpy fallback.

Builds a circle grid, assembles one Gaussian step matrix with each backend,
and times both the matrix assembly and the sampler advance used by the Monte
Carlo chain.  Also reports the maximum elementwise deviation between the two
backends, which should sit near machine precision (the two use different
summation orders, so exact bit equality is not expected across backends).

Run from the repository root after installing the package:

    python benchmarks/bench_backends.py --nodes 1024 --repeats 5
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from chernoff._accel import BACKEND, fallback
from chernoff.geometry import ManifoldSpec, build_grid

if BACKEND == "compiled":
    from chernoff._accel import _fastkern
else:
    _fastkern = None


@dataclass
class BenchConfig:
    nodes: int = 1024
    step: float = 0.01
    repeats: int = 5
    paths: int = 200_000
    seed: int = 7


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernel(cfg: BenchConfig) -> None:
    grid = build_grid(ManifoldSpec("circle", 1.0), cfg.nodes)
    src = grid.nodes
    inv_two_h = 1.0 / (2.0 * cfg.step)

    mat_py = fallback.kernel_matrix(src, src, grid.weights, inv_two_h)
    t_py = _time(lambda: fallback.kernel_matrix(src, src, grid.weights, inv_two_h), cfg.repeats)
    print(f"kernel_matrix  python    {cfg.nodes}x{cfg.nodes}: {t_py * 1e3:8.2f} ms")

    if _fastkern is None:
        print("kernel_matrix  compiled  unavailable (pure-Python install)")
        return

    mat_c = _fastkern.kernel_matrix(src, src, grid.weights, inv_two_h)
    t_c = _time(lambda: _fastkern.kernel_matrix(src, src, grid.weights, inv_two_h), cfg.repeats)
    dev = float(np.max(np.abs(mat_c - mat_py)))
    print(f"kernel_matrix  compiled  {cfg.nodes}x{cfg.nodes}: {t_c * 1e3:8.2f} ms")
    print(f"kernel_matrix  speedup   {t_py / t_c:8.2f}x   max deviation {dev:.3e}")


def bench_sampler(cfg: BenchConfig) -> None:
    rng = np.random.default_rng(cfg.seed)
    rows = 512
    cdf = np.cumsum(rng.random((rows, cfg.nodes)), axis=1)
    cdf /= cdf[:, -1:]
    cdf[:, -1] = 1.0
    states = rng.integers(0, rows, size=cfg.paths)
    uniforms = rng.random(cfg.paths)

    adv_py = fallback.make_sampler(cdf)
    out_py = adv_py(states, uniforms)
    t_py = _time(lambda: adv_py(states, uniforms), cfg.repeats)
    print(f"chain_advance  python    {cfg.paths} draws: {t_py * 1e3:8.2f} ms")

    if _fastkern is None:
        print("chain_advance  compiled  unavailable (pure-Python install)")
        return

    adv_c = _fastkern.make_sampler(cdf)
    out_c = adv_c(states, uniforms)
    t_c = _time(lambda: adv_c(states, uniforms), cfg.repeats)
    agree = np.array_equal(out_py, out_c)
    print(f"chain_advance  compiled  {cfg.paths} draws: {t_c * 1e3:8.2f} ms")
    print(f"chain_advance  speedup   {t_py / t_c:8.2f}x   draws identical: {agree}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=1024)
    parser.add_argument("--step", type=float, default=0.01)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--paths", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    cfg = BenchConfig(args.nodes, args.step, args.repeats, args.paths, args.seed)
    print(f"active backend: {BACKEND}")
    bench_kernel(cfg)
    bench_sampler(cfg)


if __name__ == "__main__":
    main()
