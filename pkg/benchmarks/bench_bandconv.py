"""Benchmark: compiled vs pure-numpy band-convolution kernel.

Usage: python benchmarks/bench_bandconv.py [n_samples]

Times the windowed Monte-Carlo band convolution (the hot kernel of the
parallel pipeline) on a realistic workload: wideband samples on [-pi, pi],
8 bands, truncation radius 2.
"""

import sys
import time

import numpy as np

from phasewave import ansatz, bands
from phasewave import _bandconv_py
from phasewave.presets import target1

try:
    from phasewave import _bandconv
except ImportError:
    _bandconv = None


def time_backend(mod, xs_sorted, fv, targets, lo, hi, lengths, centers, dk,
                 repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for w in centers:
            mod.band_convolve(xs_sorted, fv, targets, lo, hi, lengths, w, dk)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
    rng = np.random.default_rng(0)
    xs = np.sort(rng.uniform(-np.pi, np.pi, n))
    fv = target1(xs).astype(np.complex128)
    delta, dk = 2.0, 5.0
    lo = np.searchsorted(xs, xs - delta).astype(np.int64)
    hi = np.searchsorted(xs, xs + delta, side="right").astype(np.int64)
    lengths = np.minimum(xs + delta, xs[-1]) - np.maximum(xs - delta, xs[0])
    centers = [s.center for s in bands.symmetric_bands([2.5, 22.5, 137.5, 202.5], dk)]

    t_py = time_backend(_bandconv_py, xs, fv, xs, lo, hi, lengths, centers, dk)
    print(f"samples={n}  bands={len(centers)}  window~{int(np.median(hi - lo))}")
    print(f"numpy fallback : {t_py:8.3f} s")
    if _bandconv is None:
        print("compiled       : not built")
        return
    t_cy = time_backend(_bandconv, xs, fv, xs, lo, hi, lengths, centers, dk)
    ref = _bandconv_py.band_convolve(xs, fv, xs, lo, hi, lengths, centers[0], dk)
    fast = _bandconv.band_convolve(xs, fv, xs, lo, hi, lengths, centers[0], dk)
    agree = np.abs(ref - fast).max()
    print(f"compiled       : {t_cy:8.3f} s   (speedup {t_py / t_cy:.1f}x, "
          f"max |diff| {agree:.2e})")


if __name__ == "__main__":
    main()
