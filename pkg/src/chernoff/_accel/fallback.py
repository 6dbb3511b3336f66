"""Pure-NumPy implementations of the two hot kernels.

These mirror the compiled extension in ``_fastkern.pyx``. Each backend is
bit-reproducible run to run; across backends results agree to roundoff but
not bit-for-bit (the compiled code sums rows in ascending index order, NumPy
uses its deterministic pairwise reduction).
"""

import numpy as np


def kernel_matrix(src, dst, weights, inv_two_h):
    """Row-stochastic Gaussian kernel matrix between two point clouds.

    Row i is proportional to ``weights[j] * exp(-|dst_j - src_i|^2 * inv_two_h)``
    and normalized to sum to one. The squared-distance row minimum is
    subtracted inside the exponent so the largest term is exp(0).
    """
    src = np.ascontiguousarray(src, dtype=float)
    dst = np.ascontiguousarray(dst, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    d2 = np.zeros((src.shape[0], dst.shape[0]))
    for c in range(src.shape[1]):
        diff = dst[None, :, c] - src[:, None, c]
        d2 += diff * diff
    d2 -= d2.min(axis=1, keepdims=True)
    out = weights[None, :] * np.exp(-d2 * inv_two_h)
    out /= out.sum(axis=1, keepdims=True)
    return out


def make_sampler(cdf):
    """Categorical sampler over the rows of a CDF matrix.

    ``cdf`` holds per-row cumulative probabilities with last column exactly
    1.0. The returned callable maps (states, uniforms) to the next states:
    for each path, the drawn column is the first index whose cumulative
    probability exceeds the uniform.
    """
    cdf = np.asarray(cdf, dtype=float)
    n = cdf.shape[1]
    # Row i occupies [i, i+1] after the offset, so a single global
    # searchsorted resolves every path's row-local inverse-CDF lookup.
    flat = (cdf + np.arange(cdf.shape[0])[:, None]).ravel()

    def advance(states, uniforms):
        states = np.asarray(states, dtype=np.int64)
        pos = np.searchsorted(flat, states + uniforms, side="right")
        return (pos - states * n).astype(np.int64)

    return advance
