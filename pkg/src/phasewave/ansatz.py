"""Coupled phase-shifted ansatz: frequency grids, evaluation, fitting.

An ansatz is a sum of terms, each term being one real tanh MLP multiplied
by a fixed oscillatory basis function of the input:

* complex form: per frequency w the two terms  net*exp(i w.x)  and
  net*(i exp(i w.x))  play the roles of real and imaginary subnet.
* real form: per frequency vector w the terms are products of cos/sin
  factors per coordinate, selected by a bitmask kind (bit k set -> sin in
  coordinate k).  In 1-D this is exactly A(x)cos(wx) + B(x)sin(wx).

Terms whose basis is identically zero (a sin factor at frequency 0) are
kept in the structure but skipped during evaluation; they only feel the
weight-regularization pull.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import nn
from .errors import ConfigError, TrainingError

Array = np.ndarray

REAL = "real"
COMPLEX = "complex"


# ---------------------------------------------------------------------------
# frequency grids


def grid_select(freqs) -> Array:
    """Deduplicate and sort an explicit frequency list (1-D or vectors)."""
    arr = np.asarray(freqs, dtype=float)
    if arr.size == 0:
        raise ConfigError("frequency list must be non-empty")
    if arr.ndim == 1:
        return np.unique(arr)
    if arr.ndim == 2:
        return np.unique(arr, axis=0)
    raise ConfigError(f"frequencies must be scalars or vectors, got shape {arr.shape}")


def grid_sweep(kmin: float, kmax: float, step: float) -> Array:
    """Arithmetic progression kmin, kmin+step, ..., <= kmax."""
    if not (step > 0):
        raise ConfigError(f"sweep step must be positive, got {step}")
    if kmin > kmax:
        raise ConfigError(f"empty sweep range [{kmin}, {kmax}]")
    count = int(np.floor((kmax - kmin) / step + 1e-9)) + 1
    return kmin + step * np.arange(count)


def product_grid(axis: Sequence[float], dim: int = 2) -> Array:
    """Cartesian product of one axis with itself, as (len**dim, dim) vectors."""
    axes = [np.asarray(axis, dtype=float)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return grid_select(np.stack([m.ravel() for m in mesh], axis=1))


# ---------------------------------------------------------------------------
# data


@dataclass
class SampleSet:
    """Training points and targets; xs is (N,) or (N, d), ys is (N,)."""

    xs: Array
    ys: Array

    def __post_init__(self):
        self.xs = np.asarray(self.xs)
        self.ys = np.asarray(self.ys)
        if self.xs.shape[0] != self.ys.shape[0]:
            raise ConfigError("xs and ys must have equal length")

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.xs.ndim == 1 else self.xs.shape[1]


# ---------------------------------------------------------------------------
# ansatz structure


@dataclass
class Term:
    net: nn.Mlp
    freq: Array  # shape (d,)
    kind: int
    dead: bool


@dataclass
class CoupledAnsatz:
    form: str
    freqs: Array  # (M,) for d=1, else (M, d)
    terms: list[Term]

    @property
    def dim(self) -> int:
        return 1 if self.freqs.ndim == 1 else self.freqs.shape[1]

    @property
    def nets(self) -> list[nn.Mlp]:
        return [t.net for t in self.terms]

    @property
    def n_params(self) -> int:
        return sum(t.net.n_params for t in self.terms)


def make_ansatz(
    form: str,
    freqs,
    layer_sizes: Sequence[int],
    init_scale: float = 1.0,
    seed: int = 0,
) -> CoupledAnsatz:
    """Build a fresh ansatz with independently seeded subnets per term."""
    if form not in (REAL, COMPLEX):
        raise ConfigError(f"form must be 'real' or 'complex', got {form!r}")
    grid = np.asarray(freqs, dtype=float)
    dim = 1 if grid.ndim == 1 else grid.shape[1]
    if layer_sizes[0] != dim:
        raise ConfigError(
            f"subnet input width {layer_sizes[0]} does not match frequency dim {dim}"
        )
    if form == COMPLEX:
        kinds = (0, 1)  # real part, imaginary part
    else:
        kinds = tuple(range(2 ** dim))  # cos/sin product selector
    terms = []
    idx = 0
    for m in range(grid.shape[0]):
        fvec = np.atleast_1d(grid[m])
        for kind in kinds:
            dead = form == REAL and any(
                fvec[k] == 0.0 and (kind >> k) & 1 for k in range(dim)
            )
            net = nn.mlp_init(layer_sizes, init_scale=init_scale, seed=[seed, idx])
            terms.append(Term(net, fvec, kind, dead))
            idx += 1
    return CoupledAnsatz(form, grid, terms)


# ---------------------------------------------------------------------------
# basis functions


def _phase_arg(freq: Array, x: Array) -> Array:
    """w . x over the batch; x is (B,) for d=1 or (B, d)."""
    if x.ndim == 1:
        return freq[0] * x
    return x @ freq


def _basis_value(form: str, freq: Array, kind: int, x: Array) -> Array:
    if form == COMPLEX:
        e = np.exp(1j * _phase_arg(freq, x))
        return 1j * e if kind else e
    if x.ndim == 1:
        arg = freq[0] * x
        return np.sin(arg) if kind else np.cos(arg)
    out = np.ones(x.shape[0])
    for k in range(x.shape[1]):
        arg = freq[k] * x[:, k]
        out = out * (np.sin(arg) if (kind >> k) & 1 else np.cos(arg))
    return out


def _basis_derivs(form: str, freq: Array, kind: int, x: Array):
    """(phi, phi', phi'') for scalar inputs."""
    w = freq[0]
    if form == COMPLEX:
        e = np.exp(1j * w * x)
        if kind:
            e = 1j * e
        return e, 1j * w * e, -(w * w) * e
    c, s = np.cos(w * x), np.sin(w * x)
    if kind:
        return s, w * c, -(w * w) * s
    return c, -w * s, -(w * w) * c


# ---------------------------------------------------------------------------
# evaluation


def _out_dtype(form: str):
    return np.complex128 if form == COMPLEX else np.float64


def eval_channels(a: CoupledAnsatz, x: Array, derivs: bool = False, tape: bool = False):
    """Batched ansatz evaluation.

    Returns (channels, term_records) where channels is (T,) or (T, T', T'')
    and term_records holds, for each live term, the net tape and basis
    arrays needed to scatter loss adjoints back to the subnets.
    """
    x = np.asarray(x, dtype=float)
    b_sz = x.shape[0]
    dtype = _out_dtype(a.form)
    if derivs and a.dim != 1:
        raise ConfigError("input-derivative evaluation requires dimension 1")
    T = np.zeros(b_sz, dtype=dtype)
    T1 = np.zeros(b_sz, dtype=dtype) if derivs else None
    T2 = np.zeros(b_sz, dtype=dtype) if derivs else None
    records = []
    for term in a.terms:
        if term.dead:
            records.append(None)
            continue
        if derivs:
            phi, dphi, d2phi = _basis_derivs(a.form, term.freq, term.kind, x)
            if tape:
                (y, y1, y2), net_tape = nn.forward_derivs(term.net, x, tape=True)
            else:
                y, y1, y2 = nn.forward_derivs(term.net, x)
                net_tape = None
            T += y * phi
            T1 += y1 * phi + y * dphi
            T2 += y2 * phi + 2.0 * y1 * dphi + y * d2phi
            if tape:
                records.append((term, net_tape, (phi, dphi, d2phi)))
        else:
            phi = _basis_value(a.form, term.freq, term.kind, x)
            if tape:
                y, net_tape = nn.forward_value(term.net, x, tape=True)
                records.append((term, net_tape, (phi,)))
            else:
                y = nn.forward_value(term.net, x)
            T += y * phi
    if derivs:
        return (T, T1, T2), records
    return (T,), records


def ansatz_eval(a: CoupledAnsatz, x) -> complex | Array:
    """Ansatz value; complex scalar for scalar x, complex array for batches."""
    scalar = np.ndim(x) == 0 or (a.dim > 1 and np.ndim(x) == 1)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if a.dim > 1:
        xs = xs.reshape(-1, a.dim)
        if np.asarray(x).ndim == 1 and np.asarray(x).shape[0] != a.dim:
            raise ConfigError("point dimension does not match ansatz")
    (T,), _ = eval_channels(a, xs)
    T = T.astype(np.complex128)
    return complex(T[0]) if scalar else T


def ansatz_eval_with_derivs(a: CoupledAnsatz, x):
    """Value/d1/d2 of the ansatz at scalar x (or 1-D batch); complex triple."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    (T, T1, T2), _ = eval_channels(a, xs, derivs=True)
    if scalar:
        return nn.DerivTriple(complex(T[0]), complex(T1[0]), complex(T2[0]))
    return nn.DerivTriple(T.astype(np.complex128), T1.astype(np.complex128),
                          T2.astype(np.complex128))


# ---------------------------------------------------------------------------
# flat parameter handling


def flatten_ansatz(a: CoupledAnsatz) -> Array:
    return np.concatenate([nn.flatten_params(t.net) for t in a.terms])


def bind_flat(a: CoupledAnsatz, theta: Array) -> None:
    """Rebind every subnet to views into theta (in-place training support)."""
    off = 0
    for term in a.terms:
        n = term.net.n_params
        term.net = nn.unflatten_params(theta[off : off + n], term.net.layer_sizes)
        off += n
    if off != theta.size:
        raise ConfigError("flat vector does not match ansatz parameter count")


# ---------------------------------------------------------------------------
# fitting


def fit_loss(a: CoupledAnsatz, batch: SampleSet, beta_reg: float = 0.0) -> float:
    """Sum of squared residual moduli plus beta_reg * weight_reg."""
    _check_targets(a, batch)
    (T,), _ = eval_channels(a, _batch_xs(a, batch))
    r = T - batch.ys
    loss = float(np.real(r * np.conj(r)).sum()) if np.iscomplexobj(r) else float((r * r).sum())
    if beta_reg:
        loss += beta_reg * nn.weight_reg(a.nets)
    return loss


def _check_targets(a: CoupledAnsatz, data: SampleSet) -> None:
    if a.form == REAL and np.iscomplexobj(data.ys):
        raise ConfigError("real-form ansatz cannot fit complex targets")
    if data.dim != a.dim:
        raise ConfigError(f"sample dim {data.dim} != ansatz dim {a.dim}")


def _batch_xs(a: CoupledAnsatz, data: SampleSet) -> Array:
    return np.asarray(data.xs, dtype=float)


def scatter_term_grads(
    a: CoupledAnsatz,
    records,
    adjoints,
    beta_reg: float = 0.0,
) -> Array:
    """Assemble the flat parameter gradient from output-channel adjoints.

    adjoints is (G0,) or (G0, G1, G2): per-sample partials of the loss with
    respect to the ansatz value (and derivative) channels, complex for the
    complex form.  Regularization gradients are added for every term,
    including dead ones.
    """
    parts = []
    derivs = len(adjoints) == 3
    for term, rec in zip(a.terms, records):
        if rec is None:
            grads = [(np.zeros_like(w), np.zeros_like(b))
                     for w, b in zip(term.net.weights, term.net.biases)]
        else:
            _, net_tape, basis = rec
            if derivs:
                G0, G1, G2 = adjoints
                phi, dphi, d2phi = basis
                gy = _re(G0 * np.conj(phi) + G1 * np.conj(dphi) + G2 * np.conj(d2phi))
                gy1 = _re(G1 * np.conj(phi) + 2.0 * G2 * np.conj(dphi))
                gy2 = _re(G2 * np.conj(phi))
                grads = nn.backward_derivs(term.net, net_tape, gy, gy1, gy2)
            else:
                (G0,) = adjoints
                (phi,) = basis
                grads = nn.backward_value(term.net, net_tape, _re(G0 * np.conj(phi)))
        if beta_reg:
            reg = nn.weight_reg_grads(term.net, beta_reg)
            grads = [(dw + rw, db + rb) for (dw, db), (rw, rb) in zip(grads, reg)]
        parts.append(nn.pack_grads(grads))
    return np.concatenate(parts)


def _re(x: Array) -> Array:
    return np.ascontiguousarray(np.real(x)) if np.iscomplexobj(x) else x


def fit_train(a: CoupledAnsatz, data: SampleSet, cfg: nn.TrainConfig):
    """Mini-batch Adam descent on fit_loss; trains in place.

    Returns (ansatz, history) where history[k] is the full-data loss after
    epoch k.  Raises TrainingError with the partial history on divergence.
    """
    _check_targets(a, data)
    if data.n == 0:
        raise ConfigError("training data must be non-empty")
    if cfg.batch_size > data.n:
        raise ConfigError(f"batch_size {cfg.batch_size} exceeds sample count {data.n}")
    theta = flatten_ansatz(a)
    bind_flat(a, theta)
    state = nn.AdamState.fresh(theta.size, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    xs = _batch_xs(a, data)
    ys = data.ys
    history: list[float] = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(data.n)
        for start in range(0, data.n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            (T,), records = eval_channels(a, xs[idx], tape=True)
            r = T - ys[idx]
            grad = scatter_term_grads(a, records, (2.0 * r,), cfg.beta_reg)
            nn.adam_step(state, theta, grad)
        epoch_loss = fit_loss(a, data, cfg.beta_reg)
        history.append(epoch_loss)
        if not np.isfinite(epoch_loss):
            raise TrainingError("training loss became non-finite", history=history)
    return a, history
