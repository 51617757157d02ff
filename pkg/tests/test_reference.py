"""Reference oracles: FD solvers, closed forms, spectra, overlap diagnostic."""

import math

import numpy as np
import pytest

from phasewave import ansatz, reference
from phasewave.errors import (
    ConfigError,
    DegenerateReferenceError,
    ResolutionError,
    ResonanceError,
)
from phasewave.problems import DirichletBC, HelmholtzProblem, RobinBC


# ---------------------------------------------------------------------------
# finite differences


def _manufactured_dirichlet(lam=3.0):
    # exact solution sin(pi x) on [-1, 1]
    f = lambda x: (lam ** 2 - np.pi ** 2) * np.sin(np.pi * x)
    p = HelmholtzProblem(lam=lam, f_fn=f, bc=DirichletBC(-1.0, 1.0))
    return p, lambda x: np.sin(np.pi * x)


def test_fd_dirichlet_second_order():
    p, exact = _manufactured_dirichlet()
    errs = []
    for n in (64, 128):
        g = reference.Grid1D(-1, 1, n)
        u = reference.fd_solve(p, g)
        errs.append(np.abs(u - exact(g.nodes)).max())
    ratio = errs[0] / errs[1]
    assert 3.6 <= ratio <= 4.4, ratio


def test_fd_robin_second_order():
    # compactly supported bump solution satisfies the radiation closures
    lam = 3.0

    def bump(x):
        x = np.asarray(x, dtype=float)
        core = np.maximum(1 - x * x, 0.0)
        return core ** 4

    def bump_dd(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1
        core = np.maximum(1 - x * x, 0.0)
        val = -8 * core ** 3 + 48 * x * x * core ** 2
        return np.where(inside, val, 0.0)

    f = lambda x: bump_dd(x) + lam ** 2 * bump(x)
    p = HelmholtzProblem(lam=lam, f_fn=f, bc=RobinBC(2.0))
    errs = []
    for n in (128, 256):
        g = reference.Grid1D(-2, 2, n)
        u = reference.fd_solve(p, g)
        errs.append(np.abs(u - bump(g.nodes)).max())
    ratio = errs[0] / errs[1]
    assert 3.6 <= ratio <= 4.4, ratio


def test_fd_zero_source_gives_zero():
    p = HelmholtzProblem(lam=3.0, bc=DirichletBC(-1, 1))
    u = reference.fd_solve(p, reference.Grid1D(-1, 1, 100))
    assert np.abs(u).max() == 0.0


def test_fd_green_equivalence():
    # radiation FD on [-2,2] vs exterior-Green quadrature, c=0
    lam = 20.0

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1, (1 - x * x) ** 2 * np.sin(5 * x), 0.0)

    p = HelmholtzProblem(lam=lam, f_fn=f, bc=RobinBC(2.0))
    g = reference.Grid1D(-2, 2, 16_384)
    u = reference.fd_solve(p, g)
    mask = np.abs(g.nodes) <= 1.0
    u_green = reference.green_quadrature_solution(f, lam, g.nodes[mask])
    assert reference.rel_l2_error(u[mask], u_green) <= 1e-3


def test_fd_resolution_warning_and_strict():
    p = HelmholtzProblem(lam=200.0, f_fn=lambda x: np.sin(2 * x),
                         bc=DirichletBC(-1, 1))
    g = reference.Grid1D(-1, 1, 100)  # far below 20 points per wavelength
    with pytest.warns(reference.ResolutionWarning):
        reference.fd_solve(p, g)
    with pytest.raises(ResolutionError):
        reference.fd_solve(p, g, strict=True)


def test_fd_detects_resonance():
    # lam = pi is a Dirichlet eigenvalue of u'' + lam^2 u on [-1, 1] (length 2)
    p = HelmholtzProblem(lam=np.pi, f_fn=lambda x: np.ones_like(x),
                         bc=DirichletBC(-1, 1))
    with pytest.raises(ResonanceError):
        reference.fd_solve(p, reference.Grid1D(-1, 1, 512))


def test_fd_reference_richardson_estimate():
    p, exact = _manufactured_dirichlet()
    g, u, est = reference.fd_reference(p, 128)
    true_err = np.abs(u - exact(g.nodes)).max()
    # fine-grid error is ~est/3 for a second-order pair
    assert true_err <= est <= 20 * true_err
    assert true_err <= 1e-3


# ---------------------------------------------------------------------------
# closed forms


def test_exact_elliptic_values():
    assert reference.exact_elliptic(3.0, 250.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert reference.exact_elliptic(3.0, 250.0, -1.0) == pytest.approx(0.0, abs=1e-12)
    assert reference.exact_elliptic(3.0, 250.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    want = -math.sin(250.0) / math.sinh(3.0) * math.sinh(1.5) + math.sin(125.0)
    assert reference.exact_elliptic(3.0, 250.0, 0.5) == pytest.approx(want, rel=1e-14)


def test_exact_elliptic_satisfies_equation():
    lam, mu = 3.0, 250.0
    x = np.linspace(-1, 1, 101)
    u = reference.exact_elliptic(lam, mu, x)
    u_dd = (-np.sin(mu) / np.sinh(lam)) * lam ** 2 * np.sinh(lam * x) \
        - mu ** 2 * np.sin(mu * x)
    residual = u_dd - lam ** 2 * u + (lam ** 2 + mu ** 2) * np.sin(mu * x)
    assert np.abs(residual).max() <= 1e-9 * (lam ** 2 + mu ** 2)


def test_exact_const_helmholtz_satisfies_equation():
    lam, mu = 200.0, 2.0
    x = np.linspace(-1, 1, 101)
    u = reference.exact_const_helmholtz(lam, mu, x)
    assert abs(u[0]) < 1e-12 and abs(u[-1]) < 1e-12
    u_dd = -mu ** 2 * np.sin(mu * x) + np.sin(mu) / np.sin(lam) * lam ** 2 \
        * np.sin(lam * x)
    residual = u_dd + lam ** 2 * u - (lam ** 2 - mu ** 2) * np.sin(mu * x)
    assert np.abs(residual).max() <= 1e-8 * lam ** 2


# ---------------------------------------------------------------------------
# error norms


def test_rel_l2_error_basics():
    ref = np.array([1.0, 2.0, -3.0])
    assert reference.rel_l2_error(ref, ref) == 0.0
    assert reference.rel_l2_error(1.01 * ref, ref) == pytest.approx(0.01, rel=1e-12)
    with pytest.raises(DegenerateReferenceError):
        reference.rel_l2_error(ref, np.zeros(3))


def test_rel_l2_error_matches_extended_precision():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 1, 500)
    ref = np.sin(20 * x) + 0.3 * np.sin(91 * x)
    approx = ref + 1e-3 * rng.normal(size=x.size)
    got = reference.rel_l2_error(approx, ref)
    num = math.sqrt(math.fsum(float(d) ** 2 for d in (approx - ref)))
    den = math.sqrt(math.fsum(float(r) ** 2 for r in ref))
    assert got == pytest.approx(num / den, rel=1e-12)


# ---------------------------------------------------------------------------
# spectra


def test_dft_zero_signal():
    rep = reference.dft_spectrum(np.zeros(64), dx=0.1)
    assert np.all(rep.mags == 0.0)
    assert rep.parseval_energy == 0.0


def test_dft_parseval_identity():
    rng = np.random.default_rng(1)
    sig = rng.normal(size=1024)
    dx = 2.0 / 1024
    rep = reference.dft_spectrum(sig, dx)
    grid_energy = dx * np.sum(sig ** 2)
    assert rep.parseval_energy == pytest.approx(grid_energy, rel=1e-12)
    spectral = (dx / sig.size) * np.sum(rep.mags ** 2)
    assert spectral == pytest.approx(rep.parseval_energy, rel=1e-10)


def test_dft_pure_tone_localization():
    # incommensurate tone: dominant bins are the nearest to +-100 and, with
    # the Hann taper, >= 99% of the energy lies within the [90, 110] band
    x = np.linspace(-1, 1, 4096, endpoint=False)
    rep = reference.dft_spectrum(np.sin(100 * x), dx=x[1] - x[0], window="hann")
    peak = np.abs(rep.freqs[np.argmax(rep.mags)])
    bin_width = 2 * np.pi / 2.0
    assert abs(peak - 100) <= bin_width
    assert reference.band_energy_fraction(rep, 90, 110) >= 0.99


def test_dft_commensurate_tone_two_bins():
    # tone on an exact bin: two nearest bins carry (essentially) all energy
    n = 1024
    x = np.linspace(-1, 1, n, endpoint=False)
    k = 16 * np.pi  # exactly bin 16 of a length-2 window
    rep = reference.dft_spectrum(np.sin(k * x), dx=x[1] - x[0])
    power = rep.mags ** 2
    top2 = np.sort(power)[-2:].sum()
    assert top2 / power.sum() >= 0.99
    dominant = np.sort(np.abs(rep.freqs[np.argsort(power)[-2:]]))
    assert np.allclose(dominant, [k, k], rtol=1e-12)


def test_dft_validation():
    with pytest.raises(ConfigError):
        reference.dft_spectrum(np.zeros(3), dx=0.1)
    with pytest.raises(ConfigError):
        reference.dft_spectrum(np.zeros(16), dx=0.1, window="hamming")


# ---------------------------------------------------------------------------
# cross-term overlap


def test_cross_term_ratio_identity_is_exact():
    a = ansatz.make_ansatz("complex", [0.0, 5.0], [1, 8, 1], seed=0)
    grid = reference.Grid1D(-np.pi, np.pi, 512)
    assert reference.cross_term_ratio(a, 0, 0, grid) == 1.0
    assert reference.cross_term_ratio(a, 1, 1, grid) == 1.0


def test_cross_term_ratio_disjoint_bands_small():
    # smooth envelopes with phase centers 40 rad apart: spectra are disjoint
    a = ansatz.make_ansatz("complex", [0.0, 40.0], [1, 12, 1],
                           init_scale=0.5, seed=3)
    grid = reference.Grid1D(-np.pi, np.pi, 1024)
    assert reference.cross_term_ratio(a, 0, 1, grid) <= 0.05
    assert reference.cross_term_ratio(a, 1, 0, grid) <= 0.05


def test_cross_term_ratio_dead_subnet():
    a = ansatz.make_ansatz("complex", [0.0, 5.0], [1, 6, 1], seed=0)
    for t in a.terms[:2]:  # zero the first subnet pair entirely
        for w in t.net.weights:
            w[:] = 0.0
        for b in t.net.biases:
            b[:] = 0.0
    grid = reference.Grid1D(-np.pi, np.pi, 256)
    with pytest.raises(DegenerateReferenceError):
        reference.cross_term_ratio(a, 0, 1, grid)


def test_cross_term_ratio_validation():
    a_real = ansatz.make_ansatz("real", [0.0, 5.0], [1, 6, 1], seed=0)
    grid = reference.Grid1D(-np.pi, np.pi, 256)
    with pytest.raises(ConfigError):
        reference.cross_term_ratio(a_real, 0, 1, grid)
