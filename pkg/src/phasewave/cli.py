"""Experiment runner CLI.

    phasewave run --preset <name> | --config <file> [--seed N] [--out-dir D]
                  [--threads K] [--strict]
    phasewave list-presets

Each run writes deterministic artifacts into the output directory:
result.json (metrics, config echo + hash), solution.csv, history.csv and,
when applicable, spectrum.csv / bands.csv / ratios.csv.  Identical config
and seed reproduce identical artifacts except the timing block.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, ansatz, bands, integral, nn, pde, presets, reference
from .errors import (
    ConfigError,
    DegenerateReferenceError,
    KernelError,
    PhasewaveError,
    ResolutionError,
    ResonanceError,
    TrainingError,
)
from .problems import DirichletBC, HelmholtzProblem, RobinBC

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_ORACLE = 4


# ---------------------------------------------------------------------------
# config helpers


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def parse_freqs(spec: str) -> np.ndarray:
    """Frequency grid specs: explicit list, sweep:lo:hi:step,
    product:a,b,c (2-D grid of an axis), product-sweep:lo:hi:step."""
    spec = spec.strip()
    if spec.startswith("sweep:"):
        lo, hi, step = (float(t) for t in spec[len("sweep:"):].split(":"))
        return ansatz.grid_sweep(lo, hi, step)
    if spec.startswith("product-sweep:"):
        lo, hi, step = (float(t) for t in spec[len("product-sweep:"):].split(":"))
        return ansatz.product_grid(ansatz.grid_sweep(lo, hi, step))
    if spec.startswith("product:"):
        return ansatz.product_grid(_floats(spec[len("product:"):]))
    return ansatz.grid_select(_floats(spec))


def build_problem(sec: dict) -> HelmholtzProblem:
    lam = float(sec.get("lam", 1.0))
    mu = float(sec.get("mu", 0.0))
    c = float(sec.get("c", 0.0))
    sign = int(sec.get("sign", 1))
    omega_name = sec.get("omega", "")
    if omega_name == "scatter":
        omega_fn = presets.omega_scatter()
    elif float(sec.get("m", 0.0)) != 0.0:
        omega_fn = presets.omega_chirp(float(sec["m"]))
    else:
        omega_fn = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    source = sec.get("source", "muwave")
    if source not in presets.SOURCES:
        raise ConfigError(f"unknown source {source!r}")
    f_fn = presets.SOURCES[source](lam, mu)
    bc_kind = sec.get("bc", "dirichlet")
    if bc_kind == "dirichlet":
        bc = DirichletBC(float(sec.get("a", -1.0)), float(sec.get("b", 1.0)),
                         float(sec.get("u1", 0.0)), float(sec.get("u2", 0.0)))
    elif bc_kind == "robin":
        bc = RobinBC(float(sec.get("a", 2.0)))
    else:
        raise ConfigError(f"unknown bc {bc_kind!r}")
    rho = float(sec["rho"]) if "rho" in sec else None
    return HelmholtzProblem(lam=lam, mu=mu, c=c, omega_fn=omega_fn, f_fn=f_fn,
                            sign=sign, bc=bc, rho=rho)


def build_train_config(sec: dict, seed_override: int | None) -> nn.TrainConfig:
    seed = seed_override if seed_override is not None else int(sec.get("seed", 0))
    return nn.TrainConfig(
        epochs=int(sec.get("epochs", 100)),
        batch_size=int(sec.get("batch_size", 100)),
        lr=float(sec.get("lr", 0.002)),
        seed=seed,
        beta_reg=float(sec.get("beta_reg", 0.0)),
        init_scale=float(sec.get("init_scale", 1.0)),
    )


def build_stage_configs(sec: dict, seed_override: int | None) -> list[nn.TrainConfig]:
    """Training stages: `stages = epochs:batch:lr, ...` when present, else the
    single epochs/batch_size/lr triple.  Stage k trains the same model
    further with its own optimizer state (seed offset per stage)."""
    base = build_train_config(sec, seed_override)
    if "stages" not in sec:
        return [base]
    stages = []
    for i, part in enumerate(sec["stages"].split(",")):
        try:
            ep, bs, lr = part.strip().split(":")
        except ValueError:
            raise ConfigError(f"bad stage spec {part.strip()!r}; "
                              "expected epochs:batch:lr") from None
        stages.append(nn.TrainConfig(
            epochs=int(ep), batch_size=int(bs), lr=float(lr),
            seed=base.seed + i, beta_reg=base.beta_reg,
            init_scale=base.init_scale,
        ))
    return stages


def _resolve_reference(name: str, p: HelmholtzProblem, grid: np.ndarray,
                       strict: bool):
    """Reference values on the evaluation grid plus a provenance label."""
    if name == "exact-elliptic":
        return reference.exact_elliptic(p.lam, p.mu, grid), "exact_elliptic"
    if name == "exact-const":
        return reference.exact_const_helmholtz(p.lam, p.mu, grid), \
            "exact_const_helmholtz"
    if name.startswith("fd:"):
        n = int(name.split(":", 1)[1])
        lo, hi = p.domain
        stride, rem = divmod(n, grid.size - 1)
        if rem != 0:
            raise ConfigError(
                f"fd reference n={n} must be a multiple of test intervals "
                f"{grid.size - 1}"
            )
        g, u, est = reference.fd_reference(p, n, strict=strict)
        # fd_reference returns the fine solve on the n-grid; subsample
        vals = u[::stride]
        if not np.allclose(g.nodes[::stride], grid, atol=1e-12):
            raise ConfigError("fd reference grid does not contain the test grid")
        return vals, f"fd_reference_n{2 * n}_richardson_{est:.3e}"
    raise ConfigError(f"unknown reference {name!r}")


# ---------------------------------------------------------------------------
# artifact writers


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_solution_csv(path: Path, grid, approx, ref) -> None:
    approx = np.asarray(approx)
    ref = np.asarray(ref)
    cols_xy: list[np.ndarray]
    if np.asarray(grid).ndim == 2:
        header = ["x", "y"]
        cols_xy = [np.asarray(grid)[:, 0], np.asarray(grid)[:, 1]]
    else:
        header = ["x"]
        cols_xy = [np.asarray(grid)]
    header += ["approx_re", "approx_im", "ref_re", "ref_im", "abs_err"]
    cols = cols_xy + [
        approx.real, np.imag(approx) + 0.0, ref.real, np.imag(ref) + 0.0,
        np.abs(approx - ref),
    ]
    _write_csv(path, header, cols)


def write_history_csv(path: Path, history, extra: dict | None = None) -> None:
    cols = [np.arange(1, len(history) + 1), np.asarray(history, dtype=float)]
    header = ["epoch", "loss"]
    for name, vals in (extra or {}).items():
        header.append(name)
        cols.append(np.asarray(vals, dtype=float))
    _write_csv(path, header, cols)


def write_spectrum_csv(path: Path, report: reference.SpectrumReport) -> None:
    order = np.argsort(report.freqs)
    _write_csv(path, ["freq", "mag"],
               [report.freqs[order], report.mags[order]])


# ---------------------------------------------------------------------------
# experiment kinds


def _sample_points(rng, dim, lo, hi, n):
    if dim == 1:
        return rng.uniform(lo, hi, n)
    return rng.uniform(lo, hi, size=(n, dim))


def _test_grid(dim, lo, hi, test_points):
    if dim == 1:
        return np.linspace(lo, hi, test_points)
    axis = np.linspace(lo, hi, test_points)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def run_fit_coupled(cfg, out_dir, opts) -> dict:
    target_fn, dim, (lo, hi) = presets.lookup_target(cfg["target"]["name"])
    freqs = parse_freqs(cfg["ansatz"]["freqs"])
    layers = _ints(cfg["ansatz"]["layers"])
    tc = build_train_config(cfg["training"], opts.seed)
    n_samples = int(cfg["training"].get("samples", 1000))
    rng = np.random.default_rng(tc.seed)
    xs = _sample_points(rng, dim, lo, hi, n_samples)
    data = ansatz.SampleSet(xs, target_fn(xs))
    a = ansatz.make_ansatz(cfg["ansatz"].get("form", "real"), freqs, layers,
                           init_scale=tc.init_scale, seed=tc.seed)
    history = []
    for stage in build_stage_configs(cfg["training"], opts.seed):
        _, h = ansatz.fit_train(a, data, stage)
        history += h
    grid = _test_grid(dim, lo, hi, int(cfg["evaluation"].get("test_points", 10000)))
    approx = ansatz.ansatz_eval(a, grid)
    ref = target_fn(grid)
    approx_cmp = approx.real if not np.iscomplexobj(ref) else approx
    metrics = {
        "rel_l2": {"value": reference.rel_l2_error(approx_cmp, ref),
                   "reference": f"target:{cfg['target']['name']}"},
        "max_abs": {"value": reference.max_abs_error(approx_cmp, ref),
                    "reference": f"target:{cfg['target']['name']}"},
        "final_loss": {"value": float(history[-1]) if history else None,
                       "reference": "training data"},
    }
    write_solution_csv(out_dir / "solution.csv", grid, approx, ref)
    write_history_csv(out_dir / "history.csv", history)
    if cfg["evaluation"].get("spectrum") == "error" and dim == 1:
        err = approx.real - ref
        rep = reference.dft_spectrum(err, grid[1] - grid[0], window="hann")
        write_spectrum_csv(out_dir / "spectrum.csv", rep)
    return metrics


def run_compare_plain(cfg, out_dir, opts) -> dict:
    target_fn, dim, (lo, hi) = presets.lookup_target(cfg["target"]["name"])
    tc = build_train_config(cfg["training"], opts.seed)
    n_samples = int(cfg["training"].get("samples", 1000))
    rng = np.random.default_rng(tc.seed)
    xs = _sample_points(rng, dim, lo, hi, n_samples)
    data = ansatz.SampleSet(xs, target_fn(xs))
    coupled = ansatz.make_ansatz("real", parse_freqs(cfg["ansatz"]["freqs"]),
                                 _ints(cfg["ansatz"]["layers"]),
                                 init_scale=tc.init_scale, seed=tc.seed)
    plain = ansatz.make_ansatz("real", np.array([0.0]),
                               _ints(cfg["compare"]["plain_layers"]),
                               init_scale=tc.init_scale, seed=tc.seed)
    _, hist_coupled = ansatz.fit_train(coupled, data, tc)
    _, hist_plain = ansatz.fit_train(plain, data, tc)
    grid = _test_grid(dim, lo, hi, int(cfg["evaluation"].get("test_points", 10000)))
    approx = ansatz.ansatz_eval(coupled, grid).real
    ref = target_fn(grid)
    metrics = {
        "rel_l2": {"value": reference.rel_l2_error(approx, ref),
                   "reference": f"target:{cfg['target']['name']}"},
        "coupled_loss": {"value": float(hist_coupled[-1]),
                         "reference": "training data"},
        "plain_loss": {"value": float(hist_plain[-1]),
                       "reference": "training data"},
        "loss_ratio_plain_over_coupled": {
            "value": float(hist_plain[-1] / hist_coupled[-1]),
            "reference": "training data"},
        "coupled_params": {"value": coupled.n_params, "reference": "model"},
        "plain_params": {"value": plain.n_params, "reference": "model"},
    }
    write_solution_csv(out_dir / "solution.csv", grid, approx, ref)
    write_history_csv(out_dir / "history.csv", hist_coupled,
                      extra={"plain_loss": hist_plain})
    return metrics


def _band_projection_symbol(freqs_fft, centers, width, truncation):
    """Fourier symbol of the truncated band kernels summed over the bands:
    (1/pi) [Si((dk/2 + w - k) delta) + Si((dk/2 - w + k) delta)] per band."""
    from scipy.special import sici

    total = np.zeros(freqs_fft.size)
    half = width / 2.0
    for w in centers:
        a = sici((half + w - freqs_fft) * truncation)[0]
        b = sici((half - w + freqs_fft) * truncation)[0]
        total += (a + b) / np.pi
    return total


def band_projection_oracle(target_fn, lo, hi, specs, at):
    """Truncated-kernel band projection of the target computed spectrally on
    a dense padded grid: the independent oracle for the trainable part of
    the parallel pipeline."""
    delta = specs[0].truncation
    pad = delta + 1.0
    n = 2 ** 18
    xs = np.linspace(lo - pad, hi + pad, n, endpoint=False)
    fx = np.where((xs >= lo) & (xs <= hi), target_fn(xs), 0.0)
    dx = xs[1] - xs[0]
    fk = np.fft.fft(fx)
    kk = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    sym = _band_projection_symbol(kk, [s.center for s in specs],
                                  specs[0].width, delta)
    proj = np.fft.ifft(fk * sym)
    return np.interp(at, xs, proj.real) + 1j * np.interp(at, xs, proj.imag)


def run_fit_parallel(cfg, out_dir, opts) -> dict:
    target_fn, dim, (lo, hi) = presets.lookup_target(cfg["target"]["name"])
    if dim != 1:
        raise ConfigError("parallel band fitting is 1-D only")
    sec = cfg["bands"]
    trunc = float(sec["truncation"]) if "truncation" in sec else None
    specs = bands.symmetric_bands(_floats(sec["centers"]), float(sec["width"]),
                                  trunc)
    tc = build_train_config(cfg["training"], opts.seed)
    rng = np.random.default_rng(tc.seed)
    xs = rng.uniform(lo, hi, int(cfg["training"].get("samples", 10000)))
    data = ansatz.SampleSet(xs, target_fn(xs))
    layers = _ints(cfg["ansatz"]["layers"])
    train_points = cfg["training"].get("train_points")
    stage_cfgs = build_stage_configs(cfg["training"], opts.seed)
    tasks, reports = bands.run_parallel(
        data, specs, stage_cfgs[0], layers, threads=opts.threads,
        train_points=int(train_points) if train_points else None,
    )
    for stage in stage_cfgs[1:]:
        def _continue(pair, stage=stage):
            task, rep = pair
            t0 = time.perf_counter()
            bands.train_band(task, stage, layers)
            rep.train_seconds += time.perf_counter() - t0
            rep.final_loss = float(task.history[-1])
            return task, rep

        pairs = list(zip(tasks, reports))
        if opts.threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=opts.threads) as pool:
                pairs = list(pool.map(_continue, pairs))
        else:
            pairs = [_continue(x) for x in pairs]
        tasks = [x[0] for x in pairs]
        reports = [x[1] for x in pairs]
    grid = np.linspace(lo, hi, int(cfg["evaluation"].get("test_points", 2000)))
    approx = bands.assemble(tasks, grid)
    ref = target_fn(grid)
    delta = specs[0].truncation
    interior = (grid >= lo + delta) & (grid <= hi - delta)
    proj = band_projection_oracle(target_fn, lo, hi, specs, grid[interior])
    metrics = {
        "rel_l2": {"value": reference.rel_l2_error(approx.real, ref),
                   "reference": f"target:{cfg['target']['name']}"},
        "rel_l2_vs_band_projection": {
            "value": reference.rel_l2_error(approx[interior], proj),
            "reference": "truncated-kernel band projection (interior)"},
        "min_window_count": {
            "value": int(min(r.min_window for r in reports)),
            "reference": "extraction windows"},
    }
    write_solution_csv(out_dir / "solution.csv", grid, approx, ref)
    hist_len = max(len(t.history) for t in tasks)
    summed = np.zeros(hist_len)
    for t in tasks:
        summed += np.asarray(t.history)
    write_history_csv(out_dir / "history.csv", summed)
    _write_csv(
        out_dir / "bands.csv",
        ["center", "extract_seconds", "train_seconds", "min_window",
         "median_window", "final_loss"],
        [np.array([r.center for r in reports]),
         np.array([r.extract_seconds for r in reports]),
         np.array([r.train_seconds for r in reports]),
         np.array([r.min_window for r in reports]),
         np.array([r.median_window for r in reports]),
         np.array([r.final_loss for r in reports])],
    )
    return metrics


def _solve_metrics(cfg, p, a, history, out_dir, opts, is_complex):
    ev = cfg["evaluation"]
    lo, hi = p.domain
    grid = np.linspace(lo, hi, int(ev.get("test_points", 4001)))
    ref, ref_label = _resolve_reference(ev.get("reference", "fd:16384"), p, grid,
                                        opts.strict)
    approx = ansatz.ansatz_eval(a, grid)
    if not is_complex:
        approx = approx.real
        ref = ref.real
    mask = np.ones(grid.size, dtype=bool)
    suffix = ""
    if "restrict" in ev:
        r0, r1 = _floats(ev["restrict"])
        mask = (grid >= r0) & (grid <= r1)
        suffix = f" on [{r0}, {r1}]"
    metrics = {
        "rel_l2": {"value": reference.rel_l2_error(approx[mask], ref[mask]),
                   "reference": ref_label + suffix},
        "max_abs": {"value": reference.max_abs_error(approx[mask], ref[mask]),
                    "reference": ref_label + suffix},
        "final_loss": {"value": float(history[-1]) if history else None,
                       "reference": "residual"},
    }
    write_solution_csv(out_dir / "solution.csv", grid, approx, ref)
    write_history_csv(out_dir / "history.csv", history)
    return metrics, grid, approx, ref


def run_solve_ode(cfg, out_dir, opts, spectrum: bool = False) -> dict:
    p = build_problem(cfg["problem"])
    tc = build_train_config(cfg["training"], opts.seed)
    freqs = parse_freqs(cfg["ansatz"]["freqs"])
    layers = _ints(cfg["ansatz"]["layers"])
    form = cfg["ansatz"].get("form", "real")
    a = ansatz.make_ansatz(form, freqs, layers, init_scale=tc.init_scale,
                           seed=tc.seed)
    lo, hi = p.domain
    coll = np.linspace(lo, hi, int(cfg["training"].get("colloc", 10000)))
    history = []
    for stage in build_stage_configs(cfg["training"], opts.seed):
        _, h = pde.solve(p, a, coll, stage)
        history += h
    metrics, grid, approx, ref = _solve_metrics(cfg, p, a, history, out_dir,
                                                opts, form == "complex")
    if spectrum:
        sec = cfg.get("spectrum", {})
        g = reference.Grid1D(lo, hi, grid.size - 1)
        rep = pde.known_failure_diagnostic(a, g, ref)
        write_spectrum_csv(out_dir / "spectrum.csv", rep)
        lo_band = _floats(sec.get("band_low", "90, 110"))
        hi_band = _floats(sec.get("band_high", "190, 210"))
        metrics["error_mass_low_band"] = {
            "value": reference.band_energy_fraction(rep, *lo_band),
            "reference": f"error spectrum, |k| in {lo_band}"}
        metrics["error_mass_high_band"] = {
            "value": reference.band_energy_fraction(rep, *hi_band),
            "reference": f"error spectrum, |k| in {hi_band}"}
    return metrics


def run_solve_integral(cfg, out_dir, opts) -> dict:
    p = build_problem(cfg["problem"])
    tc = build_train_config(cfg["training"], opts.seed)
    sec = cfg["integral"]
    kernel = integral.GreenKernel(sec.get("kernel", "interior_dirichlet"), p.lam)
    mesh = integral.MeshBasis(int(sec.get("mesh_nodes", 513)))
    coll = np.linspace(-1, 1, int(sec.get("colloc_points", 1024)))
    quad = integral.QuadratureRule(int(sec.get("quad_order", 16)))
    sys_ = integral.assemble_system(kernel, p, mesh, coll, quad)
    form = cfg["ansatz"].get("form", "real")
    a = ansatz.make_ansatz(form, parse_freqs(cfg["ansatz"]["freqs"]),
                           _ints(cfg["ansatz"]["layers"]),
                           init_scale=tc.init_scale, seed=tc.seed)
    history = []
    for stage in build_stage_configs(cfg["training"], opts.seed):
        _, h = integral.solve_integral(p, kernel, a, sys_, stage, mesh)
        history += h
    metrics, _, _, _ = _solve_metrics(cfg, p, a, history, out_dir, opts,
                                      form == "complex")
    return metrics


def run_appendix_diagnostic(cfg, out_dir, opts) -> dict:
    sec = cfg["diagnostic"]
    etas = _floats(sec.get("etas", "0.5, 0.1, 0.02"))
    n_seeds = int(sec.get("seeds", 20))
    grid = reference.Grid1D(-np.pi, np.pi, int(sec.get("grid_points", 2048)))
    freqs = parse_freqs(cfg["ansatz"]["freqs"])
    layers = _ints(cfg["ansatz"]["layers"])
    n_freqs = freqs.shape[0]
    pairs = [(m, n) for m in range(n_freqs) for n in range(n_freqs) if m != n]
    rows = []
    monotone = 0
    base_seed = opts.seed if opts.seed is not None else 0
    for seed in range(base_seed, base_seed + n_seeds):
        ratios = {}
        for eta in etas:
            a = ansatz.make_ansatz("complex", freqs, layers, init_scale=eta,
                                   seed=seed)
            for m, n in pairs:
                r = reference.cross_term_ratio(a, m, n, grid)
                ratios[(eta, m, n)] = r
                rows.append((seed, eta, m, n, r))
        ok = all(
            ratios[(etas[i], m, n)] <= ratios[(etas[i + 1], m, n)]
            for i in range(len(etas) - 1)
            for (m, n) in pairs
        )
        monotone += ok
    _write_csv(
        out_dir / "ratios.csv",
        ["seed", "eta", "m", "n", "ratio"],
        [np.array([r[i] for r in rows]) for i in range(5)],
    )
    identity = reference.cross_term_ratio(
        ansatz.make_ansatz("complex", freqs, layers, seed=base_seed), 0, 0, grid
    )
    return {
        "monotone_fraction": {"value": monotone / n_seeds,
                              "reference": "spectral-overlap sweep"},
        "identity_ratio": {"value": identity,
                           "reference": "cross_term_ratio(0, 0)"},
    }


KIND_RUNNERS = {
    "fit-coupled": run_fit_coupled,
    "compare-plain-dnn": run_compare_plain,
    "fit-parallel": run_fit_parallel,
    "solve-ode": run_solve_ode,
    "spectrum": lambda cfg, out, opts: run_solve_ode(cfg, out, opts, spectrum=True),
    "solve-integral": run_solve_integral,
    "appendix-diagnostic": run_appendix_diagnostic,
}


# ---------------------------------------------------------------------------
# orchestration


class _Opts:
    def __init__(self, seed, threads, strict):
        self.seed = seed
        self.threads = threads
        self.strict = strict


def _canonical_config_text(cfg: dict) -> str:
    lines = []
    for section in sorted(cfg):
        lines.append(f"[{section}]")
        for key in sorted(cfg[section]):
            lines.append(f"{key} = {cfg[section][key]}")
    return "\n".join(lines) + "\n"


def run_experiment(cfg: dict, out_dir: Path, seed: int | None = None,
                   threads: int = 1, strict: bool = False,
                   preset_name: str | None = None,
                   epochs: int | None = None) -> tuple[int, dict]:
    """Execute one experiment; returns (exit_code, result record)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if "experiment" not in cfg or "kind" not in cfg["experiment"]:
        raise ConfigError("config needs an [experiment] section with a kind")
    kind = cfg["experiment"]["kind"]
    if kind not in KIND_RUNNERS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    if seed is not None:
        cfg.setdefault("training", {})["seed"] = str(seed)
    if epochs is not None:
        cfg.setdefault("training", {})["epochs"] = str(epochs)
    canon = _canonical_config_text(cfg)
    (out_dir / "config.ini").write_text(canon, encoding="utf-8")
    record = {
        "kind": kind,
        "preset": preset_name,
        "config": cfg,
        "config_hash": hashlib.sha256(canon.encode()).hexdigest(),
        "library_version": __version__,
        "band_backend": bands.backend_name(),
    }
    opts = _Opts(seed, threads, strict)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        record["metrics"] = KIND_RUNNERS[kind](cfg, out_dir, opts)
        record["status"] = "ok"
    except TrainingError as exc:
        record["status"] = f"diverged: {exc}"
        write_history_csv(out_dir / "history.csv", exc.history or [float("nan")])
        code = EXIT_DIVERGED
    except (ResonanceError, ResolutionError, KernelError,
            DegenerateReferenceError) as exc:
        record["status"] = f"oracle failure: {exc}"
        code = EXIT_ORACLE
    record["timing"] = {
        "wall_time_s": time.perf_counter() - t0,
        "threads": threads,
    }
    (out_dir / "result.json").write_text(
        json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return code, record


def list_presets_text() -> str:
    rows = [("name", "kind", "what it runs", "expected", "desk runtime")]
    for name in sorted(presets.PRESETS):
        pre = presets.PRESETS[name]
        kind = presets.parse_config(pre.config_text)["experiment"]["kind"]
        rows.append((name, kind, pre.describes, pre.expected, pre.desk_runtime))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for r in rows:
        lines.append(
            f"{r[0]:<{widths[0]}}  {r[1]:<{widths[1]}}  {r[2]:<{widths[2]}}  "
            f"{r[3]}  [{r[4]}]"
        )
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phasewave",
                                     description="wideband ansatz experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment")
    src = runp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="named preset (see list-presets)")
    src.add_argument("--config", help="experiment config file")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--epochs", type=int, default=None,
                      help="override the training epoch count")
    runp.add_argument("--out-dir", default="phasewave-out")
    runp.add_argument("--threads", type=int, default=1)
    runp.add_argument("--strict", action="store_true",
                      help="escalate resolution warnings to errors")
    sub.add_parser("list-presets", help="table of named presets")
    args = parser.parse_args(argv)

    if args.command == "list-presets":
        sys.stdout.write(list_presets_text())
        return EXIT_OK

    try:
        if args.preset:
            cfg = presets.preset_config(args.preset)
            name = args.preset
        else:
            cfg = presets.load_config_file(args.config)
            name = None
        code, record = run_experiment(cfg, Path(args.out_dir), seed=args.seed,
                                      threads=args.threads, strict=args.strict,
                                      preset_name=name, epochs=args.epochs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhasewaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    status = record.get("status", "")
    metrics = record.get("metrics", {})
    for key in sorted(metrics):
        print(f"{key} = {metrics[key]['value']}  (vs {metrics[key]['reference']})")
    print(f"status: {status}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
