"""Pure-numpy band-convolution kernel (fallback backend).

Same contract and the same phase factorization as the compiled extension
in _bandconv.pyx; selected at import time by phasewave.bands when the
extension is unavailable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def band_convolve(xs, fvals, targets, lo, hi, lengths, omega, dk):
    """Windowed Monte-Carlo convolution with the band-selection kernel.

    xs must be sorted ascending; lo/hi are the window index bounds per
    target and lengths the (possibly clipped) window lengths.  Returns the
    complex band content estimate per target.
    """
    half = 0.5 * dk
    b = half * xs
    cb, sb = np.cos(b), np.sin(b)
    down = np.exp(-1j * omega * xs) * fvals
    out = np.empty(targets.shape[0], dtype=np.complex128)
    scale0 = dk / (2.0 * np.pi)
    for i in range(targets.shape[0]):
        aidx, bidx = lo[i], hi[i]
        a = half * targets[i]
        y = a - b[aidx:bidx]
        num = np.sin(a) * cb[aidx:bidx] - np.cos(a) * sb[aidx:bidx]
        snc = np.where(np.abs(y) > 1e-9, num / np.where(np.abs(y) > 1e-9, y, 1.0), 1.0)
        acc = snc @ down[aidx:bidx]
        out[i] = acc * (scale0 * lengths[i] / (bidx - aidx)) \
            * np.exp(1j * omega * targets[i])
    return out
