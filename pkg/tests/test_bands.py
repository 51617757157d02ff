"""Band extraction pipeline: kernel, convolution, per-band training, assembly.

Oracles: analytic Fourier decomposition of sinusoid targets (a band picks
exactly one complex exponential line), and the FFT of the sampled kernel
for the pass-band symbol.
"""

import numpy as np
import pytest

from phasewave import ansatz, bands, nn
from phasewave.errors import ConfigError, DataError


def const_complex_subnet(layer_sizes, re, im):
    def const_net(c):
        net = nn.mlp_init(layer_sizes, seed=0)
        for w in net.weights:
            w[:] = 0.0
        net.biases[-1][0] = c
        return net

    return bands.ComplexSubnet(const_net(re), const_net(im))


# ---------------------------------------------------------------------------
# kernel


def test_kernel_at_zero_and_zeros():
    spec = bands.BandSpec(center=0.0, width=5.0, truncation=2.0)
    assert bands.bandpass_kernel(spec, 0.0) == pytest.approx(5.0 / (2 * np.pi))
    for n in (1, 2, 3):
        x = 2 * np.pi * n / 5.0
        assert abs(bands.bandpass_kernel(spec, x)) < 1e-12
    spec5 = bands.BandSpec(center=5.0, width=5.0, truncation=2.0)
    assert bands.bandpass_kernel(spec5, 0.0) == pytest.approx(5.0 / (2 * np.pi))


def test_kernel_fft_symbol_is_band_indicator():
    # sampled kernel on a long grid: symbol ~ 1 inside |k| < dk/2, ~ 0 outside,
    # to <= 2% away from the edges
    dk = 5.0
    L, n = 400.0, 2 ** 17
    x = (np.arange(n) - n // 2) * (L / n)
    spec = bands.BandSpec(center=0.0, width=dk, truncation=L)
    k_vals = bands.bandpass_kernel(spec, x)
    symbol = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(k_vals))) * (L / n)
    freqs = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=L / n))
    margin = 0.25
    inside = np.abs(freqs) < dk / 2 - margin
    outside = np.abs(freqs) > dk / 2 + margin
    assert np.abs(symbol[inside] - 1).max() <= 0.02
    assert np.abs(symbol[outside]).max() <= 0.02


def test_default_truncation_is_ten_lobes():
    spec = bands.BandSpec(center=0.0, width=5.0)
    assert spec.truncation == pytest.approx(10 * 2 * np.pi / 5.0)


# ---------------------------------------------------------------------------
# extraction


def _uniform_samples(rng, lo, hi, n):
    return np.sort(rng.uniform(lo, hi, n))


def test_extract_cos3_band5_small_truncation():
    # delta=2 keeps a slowly-oscillating kernel tail outside the window; the
    # honest truncation floor is ~0.085 analytic plus sampling noise, so the
    # frozen bound is 0.12 (tighter bounds are unreachable at delta=2).
    rng = np.random.default_rng(0)
    xs = _uniform_samples(rng, -np.pi, np.pi, 10_000)
    data = ansatz.SampleSet(xs, np.cos(3 * xs))
    task = bands.extract_band(data, bands.BandSpec(5.0, 5.0, truncation=2.0))
    interior = np.abs(xs) <= np.pi - 2.0
    exact_shift = 0.5 * np.exp(-1j * 2.0 * xs)
    err = np.abs(task.shifted_samples.ys - exact_shift)
    assert err[interior].max() <= 0.12
    assert err[interior].mean() <= 0.10
    assert task.window_counts.min() >= 1


def test_extract_band_without_spectral_mass_is_small():
    rng = np.random.default_rng(1)
    xs = _uniform_samples(rng, -np.pi, np.pi, 10_000)
    data = ansatz.SampleSet(xs, np.cos(3 * xs))
    task = bands.extract_band(data, bands.BandSpec(50.0, 5.0, truncation=2.0))
    interior = np.abs(xs) <= np.pi - 2.0
    assert np.abs(task.shifted_samples.ys[interior]).max() <= 5e-2


def test_extract_dc_band_of_constant():
    rng = np.random.default_rng(2)
    xs = _uniform_samples(rng, -np.pi, np.pi, 20_000)
    data = ansatz.SampleSet(xs, np.ones_like(xs))
    task = bands.extract_band(data, bands.BandSpec(0.0, 5.0, truncation=2.0))
    interior = np.abs(xs) <= np.pi - 2.0
    assert np.abs(task.shifted_samples.ys[interior] - 1).max() <= 5e-2


def test_band_pass_oracle_wide_domain():
    # finite sum of sinusoids with lines strictly inside distinct bands,
    # dense sampling, truncation >= ten lobes (9*pi lands on a zero of the
    # slowest kernel-tail oscillation), evaluation away from the boundary
    h = 0.02
    xs = np.arange(-32.0, 32.0, h)
    f = np.cos(3.0 * xs) + 0.5 * np.sin(11.0 * xs)
    data = ansatz.SampleSet(xs, f)
    at = np.linspace(-1, 1, 101)
    delta = 9 * np.pi
    assert delta >= bands.default_truncation(5.0)
    lines = {
        5.0: 0.5 * np.exp(1j * 3.0 * at),
        -5.0: 0.5 * np.exp(-1j * 3.0 * at),
        10.0: (0.25 / 1j) * np.exp(1j * 11.0 * at),
        -10.0: (-0.25 / 1j) * np.exp(-1j * 11.0 * at),
    }
    recon = np.zeros(at.size, dtype=complex)
    for center, line in lines.items():
        task = bands.extract_band(
            data, bands.BandSpec(center, 5.0, truncation=delta), at=at
        )
        fj = np.exp(1j * center * at) * task.shifted_samples.ys
        assert np.abs(fj - line).max() <= 5e-2, center
        recon += fj
    f_at = np.cos(3.0 * at) + 0.5 * np.sin(11.0 * at)
    assert np.abs(recon - f_at).max() <= 5e-2


def test_hermitian_symmetry_of_conjugate_bands():
    rng = np.random.default_rng(4)
    xs = _uniform_samples(rng, -np.pi, np.pi, 5_000)
    data = ansatz.SampleSet(xs, np.cos(3 * xs) + 0.3 * np.cos(xs))
    plus = bands.extract_band(data, bands.BandSpec(5.0, 5.0, truncation=2.0))
    minus = bands.extract_band(data, bands.BandSpec(-5.0, 5.0, truncation=2.0))
    diff = np.abs(minus.shifted_samples.ys - np.conj(plus.shifted_samples.ys))
    assert diff.max() <= 1e-10


def test_shifted_target_is_baseband():
    # uniform sample grid so the shifted tone lands exactly on an FFT bin
    dx = 2 * np.pi / 256
    xs = np.arange(-3 * np.pi, 3 * np.pi, dx)
    data = ansatz.SampleSet(xs, np.cos(3.0 * xs))
    task = bands.extract_band(data, bands.BandSpec(5.0, 5.0, truncation=6.0))
    mask = (xs >= -np.pi) & (xs < np.pi)
    sig = task.shifted_samples.ys[mask]
    spec = np.fft.fft(sig)
    freqs = 2 * np.pi * np.fft.fftfreq(sig.size, d=dx)
    energy = np.abs(spec) ** 2
    inband = energy[np.abs(freqs) <= 2.5].sum()
    assert inband / energy.sum() >= 0.95


def test_empty_window_raises_data_error():
    xs = np.array([-1.0, 0.0, 1.0])
    data = ansatz.SampleSet(xs, np.ones(3))
    with pytest.raises(DataError, match="x=5.0"):
        bands.extract_band(
            data, bands.BandSpec(0.0, 5.0, truncation=0.5), at=np.array([5.0])
        )


# ---------------------------------------------------------------------------
# backends


def test_backends_agree():
    from phasewave import _bandconv_py

    rng = np.random.default_rng(5)
    xs = np.sort(rng.uniform(-2, 2, 500))
    fv = (rng.normal(size=500) + 1j * rng.normal(size=500)).astype(np.complex128)
    targets = np.linspace(-1.5, 1.5, 37)
    lo = np.searchsorted(xs, targets - 0.8).astype(np.int64)
    hi = np.searchsorted(xs, targets + 0.8, side="right").astype(np.int64)
    lengths = np.minimum(targets + 0.8, xs[-1]) - np.maximum(targets - 0.8, xs[0])
    ref = _bandconv_py.band_convolve(xs, fv, targets, lo, hi, lengths, 7.0, 5.0)
    try:
        from phasewave import _bandconv
    except ImportError:
        pytest.skip("compiled backend not built")
    fast = _bandconv.band_convolve(xs, fv, targets, lo, hi, lengths, 7.0, 5.0)
    assert np.allclose(fast, ref, rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------------------
# training and assembly


def test_train_band_zero_target():
    rng = np.random.default_rng(6)
    xs = np.sort(rng.uniform(-1, 1, 64))
    task = bands.BandTask(
        bands.BandSpec(5.0, 5.0), ansatz.SampleSet(xs, np.zeros(64, complex))
    )
    cfg = nn.TrainConfig(epochs=100, batch_size=16, lr=0.01, seed=0, init_scale=0.05)
    bands.train_band(task, cfg, layer_sizes=(1, 8, 1))
    assert task.history[-1] <= 1e-6


def test_train_band_learns_shifted_tone():
    rng = np.random.default_rng(7)
    xs = np.sort(rng.uniform(-np.pi, np.pi, 2400))
    target = 0.5 * np.exp(-1j * 2.0 * xs)
    task = bands.BandTask(bands.BandSpec(5.0, 5.0), ansatz.SampleSet(xs, target))
    cfg = nn.TrainConfig(epochs=500, batch_size=300, lr=0.003, seed=1)
    bands.train_band(task, cfg)  # default 1-40-40-40-40-1 subnets
    got = bands.subnet_eval(task.subnet, xs)
    rel = np.linalg.norm(got - target) / np.linalg.norm(target)
    assert rel <= 2e-2, rel


def test_assemble_single_dc_band_is_subnet():
    task = bands.BandTask(
        bands.BandSpec(0.0, 5.0),
        ansatz.SampleSet(np.zeros(1), np.zeros(1, complex)),
        subnet=const_complex_subnet([1, 4, 1], 0.7, -0.2),
    )
    assert bands.assemble([task], 0.3) == pytest.approx(0.7 - 0.2j)


def test_assemble_conjugate_bands_give_cosine():
    mk = lambda c: bands.BandTask(
        bands.BandSpec(c, 5.0),
        ansatz.SampleSet(np.zeros(1), np.zeros(1, complex)),
        subnet=const_complex_subnet([1, 4, 1], 0.5, 0.0),
    )
    xs = np.linspace(-2, 2, 41)
    got = bands.assemble([mk(3.0), mk(-3.0)], xs)
    assert np.allclose(got.real, np.cos(3 * xs), atol=1e-12)
    assert np.allclose(got.imag, 0.0, atol=1e-12)


def test_parallel_runs_thread_invariant():
    rng = np.random.default_rng(8)
    xs = np.sort(rng.uniform(-np.pi, np.pi, 800))
    data = ansatz.SampleSet(xs, np.cos(3 * xs))
    specs = bands.symmetric_bands([2.5], 5.0, truncation=2.0)
    cfg = nn.TrainConfig(epochs=10, batch_size=200, lr=0.002, seed=3)

    def run(threads):
        tasks, _ = bands.run_parallel(data, specs, cfg, layer_sizes=(1, 8, 1),
                                      threads=threads)
        return np.concatenate(
            [nn.flatten_params(t.subnet.real_part) for t in tasks]
            + [nn.flatten_params(t.subnet.imag_part) for t in tasks]
        )

    assert np.array_equal(run(1), run(4))


def test_symmetric_bands_layout():
    specs = bands.symmetric_bands([2.5, 22.5], 5.0)
    assert [s.center for s in specs] == [-22.5, -2.5, 2.5, 22.5]


def test_run_parallel_reports():
    rng = np.random.default_rng(9)
    xs = np.sort(rng.uniform(-np.pi, np.pi, 400))
    data = ansatz.SampleSet(xs, np.cos(2 * xs))
    specs = [bands.BandSpec(0.0, 5.0, truncation=1.5)]
    cfg = nn.TrainConfig(epochs=3, batch_size=100, lr=0.002, seed=0)
    tasks, reports = bands.run_parallel(data, specs, cfg, layer_sizes=(1, 6, 1))
    assert len(reports) == 1
    rep = reports[0]
    assert rep.min_window >= 1 and rep.extract_seconds >= 0
    assert np.isfinite(rep.final_loss)
