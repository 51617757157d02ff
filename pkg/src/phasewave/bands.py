"""Parallel band pipeline: extract shifted band data, train per band, reassemble.

The band-selection kernel K_j(x) = (dk/2pi) exp(i w_j x) sinc(dk x / 2) is
normalized so that convolution against it is an exact pass filter for the
band [w_j - dk/2, w_j + dk/2].  Band content is estimated from scattered
samples by a windowed Monte-Carlo sum; the shifted targets
exp(-i w_j x) f_j(x) are baseband signals each learnable by one small
complex subnet, independently of all other bands.

The windowed accumulation is the hot kernel: a compiled extension is used
when available, with a pure-numpy fallback selected at import time (see
backend_name()).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import nn
from .ansatz import COMPLEX, CoupledAnsatz, SampleSet, Term, fit_train
from .errors import ConfigError, DataError

try:  # compiled hot kernel, falls back to numpy
    from . import _bandconv as _conv
except ImportError:  # pragma: no cover - depends on build environment
    from . import _bandconv_py as _conv


def backend_name() -> str:
    """Which band-convolution backend is active ('cython' or 'numpy')."""
    return _conv.BACKEND


# ---------------------------------------------------------------------------
# band descriptions


def default_truncation(width: float) -> float:
    """Kernel support radius: ten main sinc lobes."""
    return 10.0 * 2.0 * np.pi / width


@dataclass
class BandSpec:
    """One frequency band: center w_j, width dk, kernel truncation radius."""

    center: float
    width: float
    truncation: float | None = None

    def __post_init__(self):
        if not (self.width > 0):
            raise ConfigError(f"band width must be positive, got {self.width}")
        if self.truncation is None:
            self.truncation = default_truncation(self.width)
        if not (self.truncation > 0):
            raise ConfigError("truncation radius must be positive")


@dataclass
class ComplexSubnet:
    real_part: nn.Mlp
    imag_part: nn.Mlp


@dataclass
class BandTask:
    """Extraction result for one band plus its (optional) trained subnet."""

    spec: BandSpec
    shifted_samples: SampleSet
    subnet: ComplexSubnet | None = None
    window_counts: np.ndarray | None = None
    history: list = field(default_factory=list)


def bandpass_kernel(spec: BandSpec, x) -> complex | np.ndarray:
    """K_j(x); direct convolution against it has the band indicator symbol."""
    xs = np.asarray(x, dtype=float)
    y = 0.5 * spec.width * xs
    sinc = np.ones_like(y)
    nz = np.abs(y) > 1e-12
    sinc = np.where(nz, np.sin(np.where(nz, y, 1.0)) / np.where(nz, y, 1.0), 1.0)
    out = (spec.width / (2 * np.pi)) * np.exp(1j * spec.center * xs) * sinc
    return complex(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# extraction


def extract_band(data: SampleSet, spec: BandSpec, at=None) -> BandTask:
    """Estimate the band content at every sample point and shift it to baseband.

    f_j(x_i) ~ (L_i / N_i) * sum over samples in (x_i - delta, x_i + delta)
    of K_j(x_i - x_s) f(x_s), with L_i the window length clipped to the
    sampled range and N_i the per-window sample count.  The shifted target
    exp(-i w_j x_i) f_j(x_i) has spectrum inside [-dk/2, dk/2].

    By default the band content is evaluated at the sample locations (the
    training data for the band's subnet); pass `at` to evaluate elsewhere.
    """
    if data.dim != 1:
        raise ConfigError("band extraction is 1-D only")
    xs = np.asarray(data.xs, dtype=float)
    order = np.argsort(xs, kind="stable")
    xs_sorted = np.ascontiguousarray(xs[order])
    f_sorted = np.ascontiguousarray(np.asarray(data.ys)[order], dtype=np.complex128)
    targets = xs if at is None else np.asarray(at, dtype=float)
    delta = spec.truncation
    lo = np.searchsorted(xs_sorted, targets - delta, side="left").astype(np.int64)
    hi = np.searchsorted(xs_sorted, targets + delta, side="right").astype(np.int64)
    counts = hi - lo
    if np.any(counts == 0):
        bad = float(targets[int(np.argmin(counts))])
        raise DataError(f"empty convolution window at x={bad} (delta={delta})")
    xmin, xmax = xs_sorted[0], xs_sorted[-1]
    lengths = np.minimum(targets + delta, xmax) - np.maximum(targets - delta, xmin)
    fj = _conv.band_convolve(
        xs_sorted, f_sorted, np.ascontiguousarray(targets), lo, hi,
        np.ascontiguousarray(lengths), float(spec.center), float(spec.width),
    )
    shifted = np.exp(-1j * spec.center * targets) * fj
    return BandTask(spec, SampleSet(targets, shifted), window_counts=counts)


# ---------------------------------------------------------------------------
# per-band training


def _band_seed_key(cfg: nn.TrainConfig, spec: BandSpec) -> list[int]:
    return [cfg.seed, int(np.float64(spec.center).view(np.int64)) & 0x7FFFFFFF]


def train_band(
    task: BandTask,
    cfg: nn.TrainConfig,
    layer_sizes: Sequence[int] = (1, 40, 40, 40, 40, 1),
) -> BandTask:
    """Fit the band's complex subnet to its shifted samples (independent of
    all other bands; deterministic given cfg.seed and the band center)."""
    key = _band_seed_key(cfg, task.spec)
    if task.subnet is None:
        re = nn.mlp_init(layer_sizes, init_scale=cfg.init_scale, seed=key + [0])
        im = nn.mlp_init(layer_sizes, init_scale=cfg.init_scale, seed=key + [1])
        task.subnet = ComplexSubnet(re, im)
    zero = np.zeros(1)
    carrier = CoupledAnsatz(
        COMPLEX,
        np.array([0.0]),
        [Term(task.subnet.real_part, zero, 0, False),
         Term(task.subnet.imag_part, zero, 1, False)],
    )
    band_cfg = nn.TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, lr=cfg.lr,
        seed=key[1] ^ cfg.seed, beta_reg=cfg.beta_reg, init_scale=cfg.init_scale,
    )
    _, history = fit_train(carrier, task.shifted_samples, band_cfg)
    task.subnet = ComplexSubnet(carrier.terms[0].net, carrier.terms[1].net)
    task.history = list(task.history) + history
    return task


def subnet_eval(subnet: ComplexSubnet, x) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return nn.forward_value(subnet.real_part, xs) + 1j * nn.forward_value(
        subnet.imag_part, xs
    )


def assemble(tasks: Sequence[BandTask], x) -> complex | np.ndarray:
    """Wideband approximant: sum of up-shifted per-band subnets."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.zeros(xs.shape[0], dtype=np.complex128)
    for t in tasks:
        if t.subnet is None:
            raise ConfigError(f"band at {t.spec.center} has no trained subnet")
        total += np.exp(1j * t.spec.center * xs) * subnet_eval(t.subnet, xs)
    return complex(total[0]) if np.ndim(x) == 0 else total


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class BandReport:
    center: float
    extract_seconds: float
    train_seconds: float
    min_window: int
    median_window: float
    final_loss: float


def run_parallel(
    data: SampleSet,
    specs: Sequence[BandSpec],
    cfg: nn.TrainConfig,
    layer_sizes: Sequence[int] = (1, 40, 40, 40, 40, 1),
    threads: int = 1,
    train_points: int | None = None,
) -> tuple[list[BandTask], list[BandReport]]:
    """Extract and train every band; bands are independent and may run in
    parallel worker threads without changing any numerical result.

    train_points limits the number of extraction targets the subnets are
    trained on (an evenly strided subset of the sample locations); the
    convolution windows always use every sample, so a denser sample set
    buys lower extraction noise without growing the training set.
    """
    at = None
    if train_points is not None and train_points < data.n:
        order = np.sort(np.asarray(data.xs, dtype=float))
        stride = max(1, data.n // train_points)
        at = order[::stride][:train_points]

    def one(spec: BandSpec) -> tuple[BandTask, BandReport]:
        t0 = time.perf_counter()
        task = extract_band(data, spec, at=at)
        t1 = time.perf_counter()
        train_band(task, cfg, layer_sizes)
        t2 = time.perf_counter()
        rep = BandReport(
            center=spec.center,
            extract_seconds=t1 - t0,
            train_seconds=t2 - t1,
            min_window=int(task.window_counts.min()),
            median_window=float(np.median(task.window_counts)),
            final_loss=float(task.history[-1]) if task.history else float("nan"),
        )
        return task, rep

    if threads <= 1:
        results = [one(s) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, specs))
    tasks = [r[0] for r in results]
    reports = [r[1] for r in results]
    return tasks, reports


def symmetric_bands(centers: Sequence[float], width: float,
                    truncation: float | None = None) -> list[BandSpec]:
    """Bands at +-c for each |c| in centers, sorted ascending by center."""
    mags = sorted({abs(float(c)) for c in centers})
    specs = [
        BandSpec(sign * c, width, truncation)
        for c in mags
        for sign in ((-1.0, 1.0) if c != 0 else (1.0,))
    ]
    specs.sort(key=lambda s: s.center)
    return specs
