"""Ground-truth oracles: finite-difference solvers, closed forms, spectra.

These are the independent references the trained models are judged
against, so they are deliberately boring: second-order central
differences on fine grids, banded direct solves, plain FFTs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded

from . import nn
from .ansatz import COMPLEX, CoupledAnsatz
from .errors import (
    ConfigError,
    DegenerateReferenceError,
    ResolutionError,
    ResonanceError,
)
from .problems import DirichletBC, HelmholtzProblem, RobinBC


class ResolutionWarning(UserWarning):
    """Grid carries fewer than 20 points per wavelength."""


@dataclass
class Grid1D:
    a: float
    b: float
    n: int  # number of intervals

    def __post_init__(self):
        if self.n < 2 or not (self.b > self.a):
            raise ConfigError("grid needs b > a and at least 2 intervals")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)


# ---------------------------------------------------------------------------
# finite-difference reference solver


def fd_solve(p: HelmholtzProblem, g: Grid1D, strict: bool = False) -> np.ndarray:
    """Second-order FD solution of L[u] = f on the grid; returns nodal values.

    Dirichlet endpoints are pinned; the radiation (Robin) conditions use
    ghost-point closures so the boundary rows stay second order.  Raises
    ResonanceError when the discrete operator is singular or the solution
    is resonantly amplified.
    """
    lo, hi = p.domain
    if not (np.isclose(g.a, lo) and np.isclose(g.b, hi)):
        raise ConfigError(f"grid [{g.a}, {g.b}] does not span the domain [{lo}, {hi}]")
    ppw = 2 * np.pi / (abs(p.lam) * g.h)
    if ppw < 20:
        if strict:
            raise ResolutionError(
                f"{ppw:.1f} points per wavelength < 20; refine the grid"
            )
        warnings.warn(
            f"{ppw:.1f} points per wavelength < 20", ResolutionWarning, stacklevel=2
        )
    xs = g.nodes
    q = p.coefficient(xs).astype(complex)
    f = np.asarray(p.f_fn(xs), dtype=complex)
    h2 = g.h * g.h
    robin = isinstance(p.bc, RobinBC)
    if robin:
        m = g.n + 1
        ab = np.zeros((3, m), dtype=complex)
        ab[0, 1:] = 1.0 / h2          # superdiagonal
        ab[1, :] = -2.0 / h2 + q      # main
        ab[2, :-1] = 1.0 / h2         # subdiagonal
        rhs = f.copy()
        lam = p.lam
        # ghost closures: u'(-a) = -i lam u(-a), u'(a) = +i lam u(a)
        ab[1, 0] += 2j * lam / g.h
        ab[0, 1] += 1.0 / h2
        ab[1, -1] += 2j * lam / g.h
        ab[2, -2] += 1.0 / h2
    else:
        m = g.n - 1
        ab = np.zeros((3, m), dtype=complex)
        ab[0, 1:] = 1.0 / h2
        ab[1, :] = -2.0 / h2 + q[1:-1]
        ab[2, :-1] = 1.0 / h2
        rhs = f[1:-1].copy()
        rhs[0] -= p.bc.u1 / h2
        rhs[-1] -= p.bc.u2 / h2
    try:
        u = solve_banded((1, 1), ab, rhs)
        # probe the inverse's norm: near a discrete eigenvalue the operator
        # amplifies a generic right-hand side far beyond the resolvent scale
        probe = np.random.default_rng(0).normal(size=m)
        probe /= np.linalg.norm(probe)
        amp = np.linalg.norm(solve_banded((1, 1), ab, probe.astype(complex)))
    except np.linalg.LinAlgError as exc:
        raise ResonanceError(f"singular discrete operator: {exc}") from exc
    if not np.all(np.isfinite(u)) or (not robin and amp > 30.0):
        raise ResonanceError(
            f"discrete operator near-singular (amplification {amp:.1e}); "
            "lam is close to a Dirichlet eigenvalue"
        )
    if robin:
        full = u
    else:
        full = np.empty(g.n + 1, dtype=complex)
        full[0], full[-1] = p.bc.u1, p.bc.u2
        full[1:-1] = u
    # residual sanity check on interior rows
    res = (full[:-2] - 2 * full[1:-1] + full[2:]) / h2 + q[1:-1] * full[1:-1] - f[1:-1]
    denom = np.abs(f).max() + np.abs(full).max() * (2 / h2 + np.abs(q).max())
    if np.abs(res).max() > 1e-8 * denom:
        raise ResonanceError("banded solve residual too large (near-singular system)")
    if not robin and not np.iscomplexobj(np.asarray(p.f_fn(xs))) and \
            not (np.iscomplexobj(np.asarray(p.bc.u1)) or np.iscomplexobj(np.asarray(p.bc.u2))):
        return full.real
    return full


def fd_reference(p: HelmholtzProblem, n: int, strict: bool = False):
    """Richardson-guarded reference: solve at n and 2n intervals.

    Returns (grid_n, u_fine_on_grid_n, err_estimate); the estimate is the
    max difference between the two solutions on the coarse nodes.
    """
    lo, hi = p.domain
    g1, g2 = Grid1D(lo, hi, n), Grid1D(lo, hi, 2 * n)
    u1 = fd_solve(p, g1, strict=strict)
    u2 = fd_solve(p, g2, strict=strict)
    u2_on_1 = u2[::2]
    return g1, u2_on_1, float(np.abs(u2_on_1 - u1).max())


# ---------------------------------------------------------------------------
# closed forms


def exact_elliptic(lam: float, mu: float, x) -> np.ndarray:
    """Solution of u'' - lam^2 u = -(lam^2 + mu^2) sin(mu x), u(+-1) = 0."""
    if lam == 0:
        raise ConfigError("lam must be nonzero")
    x = np.asarray(x, dtype=float)
    return -np.sin(mu) / np.sinh(lam) * np.sinh(lam * x) + np.sin(mu * x)


def exact_const_helmholtz(lam: float, mu: float, x) -> np.ndarray:
    """Solution of u'' + lam^2 u = (lam^2 - mu^2) sin(mu x), u(+-1) = 0."""
    if np.abs(np.sin(lam)) < 1e-12:
        raise ResonanceError(f"lam={lam} is resonant for the unit interval")
    x = np.asarray(x, dtype=float)
    return np.sin(mu * x) - np.sin(mu) / np.sin(lam) * np.sin(lam * x)


def green_quadrature_solution(f_fn, lam: float, xs, panels: int = 64,
                              order: int = 16) -> np.ndarray:
    """u(x) = integral of f(xi) G_ext(x, xi) over [-1, 1], by panel Gauss
    quadrature split at the kernel kink; oracle for the radiation solver."""
    nodes, wts = leggauss(order)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    base = np.linspace(-1.0, 1.0, panels + 1)
    out = np.empty(xs.size, dtype=complex)
    for i, x in enumerate(xs):
        edges = base
        if -1.0 < x < 1.0:
            edges = np.unique(np.concatenate([base, [x]]))
        acc = 0.0 + 0.0j
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            xi = mid + half * nodes
            acc += half * np.sum(wts * np.asarray(f_fn(xi))
                                 * np.exp(1j * lam * np.abs(x - xi)))
        out[i] = acc / (2j * lam)
    return out


# ---------------------------------------------------------------------------
# error norms


def rel_l2_error(approx, ref) -> float:
    """||approx - ref||_2 / ||ref||_2 over a shared grid."""
    approx = np.asarray(approx)
    ref = np.asarray(ref)
    if approx.shape != ref.shape:
        raise ConfigError("approx and ref must share the grid")
    denom = np.linalg.norm(ref)
    if denom == 0:
        raise DegenerateReferenceError("reference has zero norm")
    return float(np.linalg.norm(approx - ref) / denom)


def max_abs_error(approx, ref) -> float:
    approx = np.asarray(approx)
    ref = np.asarray(ref)
    if approx.shape != ref.shape:
        raise ConfigError("approx and ref must share the grid")
    return float(np.abs(approx - ref).max())


# ---------------------------------------------------------------------------
# spectra


@dataclass
class SpectrumReport:
    """DFT magnitudes on physical rad/length bins plus the signal energy."""

    freqs: np.ndarray
    mags: np.ndarray
    parseval_energy: float
    dx: float
    window: str | None = None


def dft_spectrum(signal, dx: float, window: str | None = None) -> SpectrumReport:
    """DFT magnitude spectrum of a uniformly sampled signal.

    Bins are physical frequencies (rad per unit length).  parseval_energy
    is dx * sum |signal|^2 of the (windowed) signal, which equals
    (dx/n) * sum mags^2 by the Parseval identity.  window='hann' tapers
    non-periodic signals (error signals on a finite interval) so that
    leakage does not smear band-mass diagnostics.
    """
    sig = np.asarray(signal)
    if sig.ndim != 1 or sig.size < 4:
        raise ConfigError("need a 1-D signal with at least 4 samples")
    if not (dx > 0):
        raise ConfigError("dx must be positive")
    if window == "hann":
        sig = sig * np.hanning(sig.size)
    elif window is not None:
        raise ConfigError(f"unknown window {window!r}")
    mags = np.abs(np.fft.fft(sig))
    freqs = 2 * np.pi * np.fft.fftfreq(sig.size, d=dx)
    energy = float(dx * np.sum(np.abs(sig) ** 2))
    return SpectrumReport(freqs, mags, energy, dx, window)


def band_energy_fraction(report: SpectrumReport, lo: float, hi: float) -> float:
    """Fraction of spectral energy with |frequency| in [lo, hi]."""
    power = report.mags ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    mask = (np.abs(report.freqs) >= lo) & (np.abs(report.freqs) <= hi)
    return float(power[mask].sum() / total)


# ---------------------------------------------------------------------------
# spectral-overlap diagnostic


def cross_term_ratio(a: CoupledAnsatz, m: int, n: int, grid: Grid1D,
                     window: str | None = "hann") -> float:
    """Overlap of the spectra of two phase-shifted subnets.

    Samples g_k(x) = exp(i w_k x) (R_k + i I_k)(x) on the grid (windowed to
    the compact domain), and returns
    integral |G_m| |G_n| dk / integral |G_m|^2 dk  estimated from FFTs.
    Equals 1.0 exactly for m == n; small values mean the coupled loss
    nearly separates into independent per-band losses.
    """
    if a.form != COMPLEX:
        raise ConfigError("cross_term_ratio needs the complex ansatz form")
    n_freqs = a.freqs.shape[0]
    if not (0 <= m < n_freqs and 0 <= n < n_freqs):
        raise ConfigError(f"subnet indices ({m}, {n}) out of range")
    xs = grid.nodes

    def shifted_spectrum(idx: int) -> np.ndarray:
        re_t, im_t = a.terms[2 * idx], a.terms[2 * idx + 1]
        vals = nn.forward_value(re_t.net, xs) + 1j * nn.forward_value(im_t.net, xs)
        w = float(np.atleast_1d(re_t.freq)[0])
        sig = np.exp(1j * w * xs) * vals
        if window == "hann":
            sig = sig * np.hanning(sig.size)
        return np.abs(np.fft.fft(sig))

    mags_m = shifted_spectrum(m)
    mags_n = mags_m if n == m else shifted_spectrum(n)
    denom = float((mags_m * mags_m).sum())
    if denom <= 0 or not np.isfinite(denom):
        raise DegenerateReferenceError(f"subnet {m} has an empty spectrum")
    return float((mags_m * mags_n).sum() / denom)
