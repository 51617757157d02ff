"""Green's-function integral formulation of the 1-D wave problems.

The differential problem is converted to  u = f_G - c K[u]  with a closed
form kernel G; discretizing u in a hat-function nodal basis turns the
residual into  A T + c B T - f_G  evaluated at collocation points, where
T is the ansatz at the mesh nodes.  A, B and f_G are assembled once by
per-element Gauss-Legendre quadrature (split at the kernel kink) and
cached on disk keyed by a content hash.

No input derivatives of the network enter this loss, which is what makes
the formulation well-conditioned at large wave numbers.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import nn
from .ansatz import (
    CoupledAnsatz,
    bind_flat,
    eval_channels,
    flatten_ansatz,
    scatter_term_grads,
)
from .errors import ConfigError, KernelError, TrainingError
from .problems import HelmholtzProblem

EXTERIOR = "exterior"
INTERIOR_DIRICHLET = "interior_dirichlet"


@dataclass
class GreenKernel:
    """Closed-form kernel of u'' + lam^2 u = delta(x - x') on [-1, 1].

    exterior: outgoing-radiation kernel exp(i lam |x-x'|) / (2 i lam).
    interior_dirichlet: built from u1 = sin(lam (x+1)), u2 = sin(lam (x-1))
    with Wronskian lam sin(2 lam); vanishes at both endpoints.
    """

    kind: str
    lam: float

    def __post_init__(self):
        if self.kind not in (EXTERIOR, INTERIOR_DIRICHLET):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        if not (self.lam > 0):
            raise ConfigError("kernel wave number must be positive")
        if self.kind == INTERIOR_DIRICHLET and abs(np.sin(2 * self.lam)) <= 1e-8:
            raise KernelError(
                f"lam={self.lam} is (near-)resonant: |sin 2 lam| <= 1e-8"
            )


def green_eval(k: GreenKernel, x, xp):
    """Kernel values, broadcasting over x and xp."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if k.kind == EXTERIOR:
        return np.exp(1j * k.lam * np.abs(x - xp)) / (2j * k.lam)
    lo = np.minimum(x, xp)
    hi = np.maximum(x, xp)
    wron = k.lam * np.sin(2 * k.lam)
    return np.sin(k.lam * (lo + 1.0)) * np.sin(k.lam * (hi - 1.0)) / wron


@dataclass
class MeshBasis:
    """Uniform hat-function basis on [-1, 1] with m nodes."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError("mesh needs at least 2 nodes")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.m)

    @property
    def h(self) -> float:
        return 2.0 / (self.m - 1)

    def hat_matrix(self, xs) -> np.ndarray:
        """phi_j(x_i) for all basis functions: each row has at most two
        nonzeros summing to 1 for x inside [-1, 1]."""
        xs = np.asarray(xs, dtype=float)
        out = np.zeros((xs.size, self.m))
        t = (xs + 1.0) / self.h
        k = np.clip(np.floor(t).astype(int), 0, self.m - 2)
        frac = t - k
        rows = np.arange(xs.size)
        out[rows, k] = 1.0 - frac
        out[rows, k + 1] = frac
        return out


@dataclass
class QuadratureRule:
    """Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 2*order-1."""

    order: int

    def __post_init__(self):
        if self.order < 2:
            raise ConfigError("quadrature order must be at least 2")
        self.nodes, self.weights = leggauss(self.order)

    def map_to(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return mid + half * self.nodes, half * self.weights


@dataclass
class IntegralSystem:
    """Precomputed discretization: interpolation matrix A, kernel matrix B,
    source vector f_G, the collocation points and the coupling constant."""

    A: np.ndarray
    B: np.ndarray
    f_G: np.ndarray
    coll: np.ndarray
    c: float


# ---------------------------------------------------------------------------
# assembly


def _element_contrib(k, omega_fn, f_fn, mesh, coll, quad, a, b, jl):
    """Quadrature of one panel [a, b] inside element jl: returns the updates
    for B[:, jl], B[:, jl+1] and f_G (kernel evaluated at every x_i)."""
    xi, w = quad.map_to(a, b)
    g = green_eval(k, coll[:, None], xi[None, :])
    om = np.asarray(omega_fn(xi))
    hat_l = (mesh.nodes[jl + 1] - xi) / mesh.h
    hat_r = (xi - mesh.nodes[jl]) / mesh.h
    fv = np.asarray(f_fn(xi))
    return g @ (w * om * hat_l), g @ (w * om * hat_r), g @ (w * fv)


def assemble_system(
    k: GreenKernel,
    p: HelmholtzProblem,
    mesh: MeshBasis,
    coll,
    quad: QuadratureRule,
    cache_dir="auto",
) -> IntegralSystem:
    """Assemble A, B, f_G with the integration split at any collocation
    point that falls inside an element (the kernel has a kink there)."""
    coll = np.asarray(coll, dtype=float)
    if coll.ndim != 1 or coll.size == 0:
        raise ConfigError("collocation points must be a non-empty 1-D array")
    if coll.min() < -1.0 or coll.max() > 1.0:
        raise ConfigError("collocation points must lie in [-1, 1]")
    cache_path = _cache_path(cache_dir, k, p, mesh, coll, quad)
    if cache_path is not None and cache_path.exists():
        return _load_cache(cache_path, p.c, coll)
    A = mesh.hat_matrix(coll)
    dtype = complex if k.kind == EXTERIOR or np.iscomplexobj(
        np.asarray(p.f_fn(coll[:1]))
    ) else float
    B = np.zeros((coll.size, mesh.m), dtype=complex)
    f_G = np.zeros(coll.size, dtype=complex)
    nodes = mesh.nodes
    for e in range(mesh.m - 1):
        bl, br, bf = _element_contrib(
            k, p.omega_fn, p.f_fn, mesh, coll, quad, nodes[e], nodes[e + 1], e
        )
        B[:, e] += bl
        B[:, e + 1] += br
        f_G += bf
    # per-row corrections: re-integrate the element containing x_i with the
    # panel split at the kink
    t = (coll + 1.0) / mesh.h
    elems = np.clip(np.floor(t).astype(int), 0, mesh.m - 2)
    for i in range(coll.size):
        e = elems[i]
        xi_left, xi_right = nodes[e], nodes[e + 1]
        x = coll[i]
        if x <= xi_left or x >= xi_right:
            continue  # kink sits on a node; plain rule already exact
        one = np.array([x])
        base = _element_contrib(k, p.omega_fn, p.f_fn, mesh, one, quad,
                                xi_left, xi_right, e)
        left = _element_contrib(k, p.omega_fn, p.f_fn, mesh, one, quad,
                                xi_left, x, e)
        right = _element_contrib(k, p.omega_fn, p.f_fn, mesh, one, quad,
                                 x, xi_right, e)
        B[i, e] += left[0][0] + right[0][0] - base[0][0]
        B[i, e + 1] += left[1][0] + right[1][0] - base[1][0]
        f_G[i] += left[2][0] + right[2][0] - base[2][0]
    if dtype is float:
        B = np.ascontiguousarray(B.real)
        f_G = np.ascontiguousarray(f_G.real)
    sys = IntegralSystem(A, B, f_G, coll, float(p.c))
    if cache_path is not None:
        _store_cache(cache_path, sys, k, p, mesh, quad)
    return sys


# ---------------------------------------------------------------------------
# cache (documented in the README; npz with a content-hash key)


def _default_cache_dir():
    env = os.environ.get("PHASEWAVE_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "phasewave"


def _content_key(k, p, mesh, coll, quad) -> str:
    """Content hash identifying an assembly; callables are identified by
    their values on a fixed probe grid."""
    probe = np.linspace(-1.0, 1.0, 257)
    h = hashlib.sha256()
    h.update(k.kind.encode())
    h.update(np.float64([k.lam, p.c, p.sign, mesh.m, quad.order]).tobytes())
    h.update(np.asarray(p.omega_fn(probe), dtype=np.complex128).tobytes())
    h.update(np.asarray(p.f_fn(probe), dtype=np.complex128).tobytes())
    h.update(np.asarray(coll, dtype=float).tobytes())
    return h.hexdigest()[:32]


def _cache_path(cache_dir, k, p, mesh, coll, quad) -> Path | None:
    if cache_dir is None:
        return None
    base = _default_cache_dir() if cache_dir == "auto" else Path(cache_dir)
    return base / f"assembly-{_content_key(k, p, mesh, coll, quad)}.npz"


def _store_cache(path: Path, sys: IntegralSystem, k, p, mesh, quad) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = json.dumps(
        {
            "kind": k.kind,
            "lam": k.lam,
            "c": p.c,
            "mesh_nodes": mesh.m,
            "quad_order": quad.order,
            "format": 1,
        }
    )
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, A=sys.A, B=sys.B, f_G=sys.f_G, coll=sys.coll, meta=np.array(meta))
    os.replace(tmp, path)


def _load_cache(path: Path, c: float, coll) -> IntegralSystem:
    with np.load(path, allow_pickle=False) as z:
        sys = IntegralSystem(z["A"], z["B"], z["f_G"], z["coll"], float(c))
    if sys.coll.shape != np.asarray(coll).shape or not np.allclose(sys.coll, coll):
        raise ConfigError(f"cache file {path} does not match the collocation set")
    return sys


# ---------------------------------------------------------------------------
# loss and training


def integral_loss(a: CoupledAnsatz, sys: IntegralSystem, mesh: MeshBasis) -> float:
    """Squared norm of the collocation residual A T + c B T - f_G."""
    (T,), _ = eval_channels(a, mesh.nodes)
    r = sys.A @ T + sys.c * (sys.B @ T) - sys.f_G
    return float(np.real(r @ np.conj(r)))


def solve_integral(
    p: HelmholtzProblem,
    k: GreenKernel,
    a: CoupledAnsatz,
    sys: IntegralSystem,
    cfg: nn.TrainConfig,
    mesh: MeshBasis | None = None,
):
    """Adam descent on integral_loss over mini-batches of residual rows."""
    if mesh is None:
        mesh = MeshBasis(sys.A.shape[1])
    if sys.A.shape[1] != mesh.m:
        raise ConfigError("system was assembled on a different mesh")
    n_rows = sys.A.shape[0]
    if cfg.batch_size > n_rows:
        raise ConfigError("batch_size exceeds the number of residual rows")
    C = sys.A + sys.c * sys.B
    nodes = mesh.nodes
    theta = flatten_ansatz(a)
    bind_flat(a, theta)
    state = nn.AdamState.fresh(theta.size, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    history: list[float] = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n_rows)
        for start in range(0, n_rows, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            (T,), records = eval_channels(a, nodes, tape=True)
            r = C[idx] @ T - sys.f_G[idx]
            adj = 2.0 * (C[idx].conj().T @ r)
            grad = scatter_term_grads(a, records, (adj,), cfg.beta_reg)
            nn.adam_step(state, theta, grad)
        epoch_loss = integral_loss(a, sys, mesh)
        if cfg.beta_reg:
            epoch_loss += cfg.beta_reg * nn.weight_reg(a.nets)
        history.append(epoch_loss)
        if not np.isfinite(epoch_loss):
            raise TrainingError("integral residual loss became non-finite",
                                history=history)
    return a, history
