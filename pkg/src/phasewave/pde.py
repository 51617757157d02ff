"""Least-squares residual training for 1-D Helmholtz/elliptic boundary problems.

The loss is  sum_i |L[T](x_i) - f(x_i)|^2 + rho * L_bc  with
L[T] = T'' + sign (lam^2 + c omega(x)) T evaluated through the ansatz's
exact input-derivative channels.  Dirichlet problems use the real ansatz
form; radiation (Robin) problems are complex-valued and use the complex
form.
"""

from __future__ import annotations

import numpy as np

from . import nn, reference
from .ansatz import (
    COMPLEX,
    REAL,
    CoupledAnsatz,
    ansatz_eval,
    bind_flat,
    eval_channels,
    flatten_ansatz,
    scatter_term_grads,
)
from .errors import ConfigError, TrainingError
from .problems import DirichletBC, HelmholtzProblem, RobinBC


def default_penalty(n_colloc: int) -> float:
    """Boundary penalty keeping two boundary terms against n residual terms."""
    return 100.0 * n_colloc / 4.0


def operator_residual(p: HelmholtzProblem, values, d1, d2, xs) -> np.ndarray:
    """L[u] - f from raw value/derivative channel arrays (oracle-friendly)."""
    xs = np.asarray(xs, dtype=float)
    del d1  # first derivative does not enter the operator
    return np.asarray(d2) + p.coefficient(xs) * np.asarray(values) \
        - np.asarray(p.f_fn(xs))


def _boundary_points(p: HelmholtzProblem) -> np.ndarray:
    lo, hi = p.domain
    return np.array([lo, hi])


def _boundary_residuals(p: HelmholtzProblem, t0, t1):
    """Two boundary residual values from (T, T') at the domain endpoints."""
    if isinstance(p.bc, DirichletBC):
        return t0[0] - p.bc.u1, t0[1] - p.bc.u2
    lam = p.lam
    return t1[0] + 1j * lam * t0[0], t1[1] - 1j * lam * t0[1]


def _check_problem_form(a: CoupledAnsatz, p: HelmholtzProblem, xs) -> None:
    if a.dim != 1:
        raise ConfigError("PDE residual training is 1-D only")
    if isinstance(p.bc, RobinBC) and a.form != COMPLEX:
        raise ConfigError("radiation problems need the complex ansatz form")
    if a.form == REAL:
        probe = np.asarray(p.f_fn(xs[:1]))
        if np.iscomplexobj(probe):
            raise ConfigError("real-form ansatz cannot take a complex source")
        if isinstance(p.bc, DirichletBC) and (
            np.iscomplexobj(np.asarray(p.bc.u1)) or np.iscomplexobj(np.asarray(p.bc.u2))
        ):
            raise ConfigError("real-form ansatz cannot take complex boundary values")


def residual_loss(a: CoupledAnsatz, p: HelmholtzProblem, coll, rho: float | None = None) -> float:
    """Interior squared-residual sum plus the weighted boundary penalty."""
    xs = np.asarray(coll, dtype=float)
    _check_problem_form(a, p, xs)
    if rho is None:
        rho = p.rho if p.rho is not None else default_penalty(xs.size)
    (T, T1, T2), _ = eval_channels(a, xs, derivs=True)
    r = T2 + p.coefficient(xs) * T - np.asarray(p.f_fn(xs))
    loss = float(np.real(r * np.conj(r)).sum())
    (b0, b1, b2), _ = eval_channels(a, _boundary_points(p), derivs=True)
    g1, g2 = _boundary_residuals(p, b0, b1)
    loss += rho * float(abs(g1) ** 2 + abs(g2) ** 2)
    return loss


def solve(p: HelmholtzProblem, a: CoupledAnsatz, coll, cfg: nn.TrainConfig):
    """Mini-batch Adam descent on residual_loss; the boundary term rides in
    every batch.  Returns (ansatz, history) with per-epoch full losses."""
    xs = np.asarray(coll, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ConfigError("collocation set must be a non-empty 1-D array")
    if cfg.batch_size > xs.size:
        raise ConfigError("batch_size exceeds collocation count")
    _check_problem_form(a, p, xs)
    rho = p.rho if p.rho is not None else default_penalty(xs.size)
    bpts = _boundary_points(p)
    theta = flatten_ansatz(a)
    bind_flat(a, theta)
    state = nn.AdamState.fresh(theta.size, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    history: list[float] = []
    q_all = p.coefficient(xs)
    f_all = np.asarray(p.f_fn(xs))
    for _ in range(cfg.epochs):
        perm = rng.permutation(xs.size)
        for start in range(0, xs.size, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            pts = np.concatenate([xs[idx], bpts])
            (T, T1, T2), records = eval_channels(a, pts, derivs=True, tape=True)
            nb = idx.size
            q = q_all[idx]
            r = T2[:nb] + q * T[:nb] - f_all[idx]
            G0 = np.zeros(pts.size, dtype=T.dtype)
            G1 = np.zeros_like(G0)
            G2 = np.zeros_like(G0)
            G0[:nb] = 2.0 * r * q
            G2[:nb] = 2.0 * r
            g1, g2 = _boundary_residuals(p, T[nb:], T1[nb:])
            if isinstance(p.bc, DirichletBC):
                G0[nb] += rho * 2.0 * g1
                G0[nb + 1] += rho * 2.0 * g2
            else:
                lam = p.lam
                # d|g|^2 contributions through T and T' at each endpoint
                G0[nb] += rho * 2.0 * g1 * np.conj(1j * lam)
                G1[nb] += rho * 2.0 * g1
                G0[nb + 1] += rho * 2.0 * g2 * np.conj(-1j * lam)
                G1[nb + 1] += rho * 2.0 * g2
            grad = scatter_term_grads(a, records, (G0, G1, G2), cfg.beta_reg)
            nn.adam_step(state, theta, grad)
        epoch_loss = residual_loss(a, p, xs, rho)
        if cfg.beta_reg:
            epoch_loss += cfg.beta_reg * nn.weight_reg(a.nets)
        history.append(epoch_loss)
        if not np.isfinite(epoch_loss):
            raise TrainingError("PDE residual loss became non-finite", history=history)
    return a, history


def known_failure_diagnostic(
    trained: CoupledAnsatz,
    grid: reference.Grid1D,
    ref_values,
    window: str | None = "hann",
) -> reference.SpectrumReport:
    """Spectrum of (T - reference) on a uniform grid.

    The interesting diagnostic is where the error's spectral mass sits:
    band masses are read off with reference.band_energy_fraction.
    """
    ref_values = np.asarray(ref_values)
    if ref_values.shape != grid.nodes.shape:
        raise ConfigError("reference values do not match the grid")
    approx = ansatz_eval(trained, grid.nodes)
    err = approx - ref_values
    if not np.iscomplexobj(ref_values):
        err = err.real
    return reference.dft_spectrum(err, grid.h, window=window)
