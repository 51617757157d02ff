"""Named experiment configurations.

Every preset is an embedded config in the same flat INI format accepted by
`phasewave run --config`; desk presets shrink sample/epoch budgets to
minutes-scale runs with correspondingly relaxed tolerances, full presets
keep the original budgets.  Expected metrics are recorded with each preset
and echoed by `phasewave list-presets`.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# ---------------------------------------------------------------------------
# named target functions


def target1(x):
    """Piecewise five-tone benchmark: 10(sin x + sin 3x) on [-pi, 0],
    10(sin 23x + sin 137x + sin 203x) on [0, pi]."""
    x = np.asarray(x, dtype=float)
    return np.where(
        x <= 0,
        10 * (np.sin(x) + np.sin(3 * x)),
        10 * (np.sin(23 * x) + np.sin(137 * x) + np.sin(203 * x)),
    )


def _square(u):
    return np.sign(np.sin(u))


def squarewave1(x):
    """target1 with each sine replaced by a square wave of the same frequency."""
    x = np.asarray(x, dtype=float)
    return np.where(
        x <= 0,
        10 * (_square(x) + _square(3 * x)),
        10 * (_square(23 * x) + _square(137 * x) + _square(203 * x)),
    )


def g_1d(x):
    """Four-tone factor of the separable 2-D benchmark."""
    x = np.asarray(x, dtype=float)
    return np.where(
        x <= 0,
        np.sin(x) + np.sin(3 * x),
        np.sin(23 * x) + np.sin(137 * x),
    )


def g_2d(p):
    p = np.asarray(p, dtype=float)
    return g_1d(p[..., 0]) * g_1d(p[..., 1])


def gtilde_1d(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0, np.sin(x) + np.sin(3 * x), np.sin(23 * x))


def gtilde_2d(p):
    p = np.asarray(p, dtype=float)
    return np.sin(gtilde_1d(p[..., 0]) * gtilde_1d(p[..., 1]))


TARGETS = {
    "target1": (target1, 1, (-np.pi, np.pi)),
    "squarewave1": (squarewave1, 1, (-np.pi, np.pi)),
    "g2d": (g_2d, 2, (-np.pi, np.pi)),
    "gtilde2d": (gtilde_2d, 2, (-np.pi, np.pi)),
}


def lookup_target(name: str):
    try:
        return TARGETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown target {name!r}; known: {sorted(TARGETS)}"
        ) from None


# ---------------------------------------------------------------------------
# named sources / media for the solver presets


def source_muwave(lam: float, mu: float):
    """f(x) = (lam^2 - mu^2) sin(mu x): manufactured oscillatory source."""
    return lambda x: (lam ** 2 - mu ** 2) * np.sin(mu * np.asarray(x, dtype=float))


def source_elliptic(lam: float, mu: float):
    """f(x) = -(lam^2 + mu^2) sin(mu x): source of the damped benchmark."""
    return lambda x: -(lam ** 2 + mu ** 2) * np.sin(mu * np.asarray(x, dtype=float))


def source_scatter(lam: float, mu: float):
    """Compactly supported scattering source chi (lam^2-mu^2)(1-x^2) sin(mu x)."""

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(
            np.abs(x) <= 1, (lam ** 2 - mu ** 2) * (1 - x ** 2) * np.sin(mu * x), 0.0
        )

    return f


def omega_chirp(m: float):
    """Media perturbation omega(x) = sin(m x^2)."""
    return lambda x: np.sin(m * np.asarray(x, dtype=float) ** 2)


def omega_scatter():
    """Compactly supported perturbation chi sin(1 - x^2)."""

    def w(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1, np.sin(1 - x ** 2), 0.0)

    return w


SOURCES = {"muwave": source_muwave, "elliptic": source_elliptic,
           "scatter": source_scatter}


# ---------------------------------------------------------------------------
# preset registry


@dataclass(frozen=True)
class Preset:
    name: str
    describes: str
    expected: str
    desk_runtime: str
    config_text: str


def _p(name, describes, expected, desk_runtime, text) -> Preset:
    return Preset(name, describes, expected, desk_runtime, text.strip() + "\n")


PRESETS: dict[str, Preset] = {}


def _register(preset: Preset) -> None:
    PRESETS[preset.name] = preset


_register(_p(
    "target1-coupled",
    "coupled fit of the five-tone piecewise target, desk budget",
    "rel_l2 <= 2e-2 on 10000 test points",
    "~3 min",
    """
[experiment]
kind = fit-coupled
[target]
name = target1
[ansatz]
form = real
freqs = 0, 5, 25, 135, 200
layers = 1, 40, 40, 40, 40, 1
[training]
samples = 2000
epochs = 300
batch_size = 50
lr = 0.003
stages = 200:50:0.003, 100:50:0.0005
seed = 0
init_scale = 1.0
[evaluation]
test_points = 10000
""",
))

_register(_p(
    "target1-coupled-full",
    "coupled fit of the five-tone piecewise target, full budget",
    "rel_l2 <= 5e-3 on 10000 test points",
    "~10 min",
    """
[experiment]
kind = fit-coupled
[target]
name = target1
[ansatz]
form = real
freqs = 0, 5, 25, 135, 200
layers = 1, 40, 40, 40, 40, 1
[training]
samples = 10000
epochs = 1000
batch_size = 500
lr = 0.003
stages = 700:500:0.003, 300:500:0.0003
seed = 0
init_scale = 1.0
[evaluation]
test_points = 10000
""",
))

_register(_p(
    "target1-compare-plain",
    "coupled fit vs a plain MLP of equal parameter budget, equal epochs",
    "plain training loss >= 10x coupled loss after 500 epochs",
    "~6 min",
    """
[experiment]
kind = compare-plain-dnn
[target]
name = target1
[ansatz]
form = real
freqs = 0, 5, 25, 135, 200
layers = 1, 40, 40, 40, 40, 1
[compare]
plain_layers = 1, 128, 128, 128, 128, 1
[training]
samples = 2000
epochs = 500
batch_size = 200
lr = 0.005
seed = 0
init_scale = 1.0
[evaluation]
test_points = 10000
""",
))

_register(_p(
    "target1-parallel",
    "8-band extraction + independent per-band fits of the five-tone target",
    "thread-invariant; rel_l2 vs band-projection <= 2e-2 "
    "(rel_l2 vs target floored at ~0.2 by out-of-band energy)",
    "~4 min",
    """
[experiment]
kind = fit-parallel
[target]
name = target1
[bands]
centers = 2.5, 22.5, 137.5, 202.5
width = 5
truncation = 2.0
[ansatz]
layers = 1, 40, 40, 40, 40, 1
[training]
samples = 10000
epochs = 240
batch_size = 500
lr = 0.003
seed = 0
init_scale = 1.0
[evaluation]
test_points = 2000
""",
))

_register(_p(
    "squarewave-select",
    "coupled fit of the square-wave target with hand-picked frequencies",
    "reported rel_l2 (discontinuous target; no gate)",
    "~3 min",
    """
[experiment]
kind = fit-coupled
[target]
name = squarewave1
[ansatz]
form = real
freqs = 0, 5, 25, 135, 200
layers = 1, 40, 40, 40, 40, 1
[training]
samples = 2000
epochs = 300
batch_size = 200
lr = 0.005
seed = 0
[evaluation]
test_points = 10000
spectrum = error
""",
))

_register(_p(
    "squarewave-sweep-reduced",
    "square-wave fit with a swept frequency comb (desk-scale sweep)",
    "reported rel_l2 and error spectrum (no gate)",
    "~8 min",
    """
[experiment]
kind = fit-coupled
[target]
name = squarewave1
[ansatz]
form = real
freqs = sweep:0:210:10
layers = 1, 20, 20, 1
[training]
samples = 2000
epochs = 150
batch_size = 200
lr = 0.005
seed = 0
[evaluation]
test_points = 10000
spectrum = error
""",
))

_register(_p(
    "fit2d-g",
    "2-D separable four-tone product target, desk budget",
    "rel_l2 <= 5e-2 on a 100x100 grid",
    "~5 min",
    """
[experiment]
kind = fit-coupled
[target]
name = g2d
[ansatz]
form = real
freqs = product:0,5,25,135
layers = 2, 30, 30, 30, 1
[training]
samples = 9216
epochs = 60
batch_size = 256
lr = 0.005
seed = 0
[evaluation]
test_points = 100
""",
))

_register(_p(
    "fit2d-gtilde-full",
    "2-D modulated target with a 21x21 swept frequency comb (overnight scale)",
    "targets rel_l2 ~ 5e-3 (not gated; overnight)",
    "hours",
    """
[experiment]
kind = fit-coupled
[target]
name = gtilde2d
[ansatz]
form = real
freqs = product-sweep:10:210:10
layers = 2, 40, 40, 40, 40, 1
[training]
samples = 409600
epochs = 80
batch_size = 100
lr = 0.002
seed = 0
[evaluation]
test_points = 100
""",
))

_register(_p(
    "helmholtz-const-3-2",
    "interior constant-coefficient problem at low wave number (smoke)",
    "max_abs <= 1e-2 vs closed form",
    "~1 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 3
mu = 2
source = muwave
bc = dirichlet
a = -1
b = 1
[ansatz]
form = real
freqs = 0, 2, 3
layers = 1, 40, 40, 40, 40, 1
[training]
colloc = 2000
epochs = 100
batch_size = 100
lr = 0.005
seed = 0
[evaluation]
reference = exact-const
test_points = 4001
""",
))

_register(_p(
    "helmholtz-const-200",
    "interior constant-coefficient problem, wave number 200, desk budget",
    "max_abs <= 1e-2 vs FD reference",
    "~2 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 200
mu = 2
source = muwave
bc = dirichlet
a = -1
b = 1
rho = 400
[ansatz]
form = real
freqs = 0, 2, 200
layers = 1, 40, 40, 40, 40, 1
[training]
colloc = 4000
epochs = 250
batch_size = 100
lr = 0.002
stages = 150:100:0.002, 100:100:0.0003
seed = 0
init_scale = 0.5
[evaluation]
reference = fd:32768
test_points = 8193
""",
))

_register(_p(
    "helmholtz-const-200-full",
    "interior constant-coefficient problem, wave number 200, full budget",
    "max_abs <= 1e-3 vs FD reference",
    "~6 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 200
mu = 2
source = muwave
bc = dirichlet
a = -1
b = 1
rho = 1000
[ansatz]
form = real
freqs = 0, 2, 200
layers = 1, 40, 40, 40, 40, 1
[training]
colloc = 10000
epochs = 250
batch_size = 100
lr = 0.002
stages = 150:100:0.002, 100:100:0.0002
seed = 0
init_scale = 0.5
[evaluation]
reference = fd:32768
test_points = 8193
""",
))

_register(_p(
    "helmholtz-var-2-200",
    "variable media perturbation, low wave number, oscillatory source",
    "max_abs <= 1e-2 vs FD reference",
    "~3 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 2
mu = 200
c = 3.6
m = 1
source = muwave
bc = dirichlet
a = -1
b = 1
rho = 400
[ansatz]
form = real
freqs = 1, 2, 3, 4, 200
layers = 1, 40, 40, 40, 40, 1
[training]
colloc = 4000
epochs = 800
batch_size = 100
lr = 0.005
stages = 500:100:0.005, 300:100:0.0003
seed = 0
init_scale = 0.5
[evaluation]
reference = fd:16384
test_points = 8193
""",
))

_register(_p(
    "helmholtz-diff-100",
    "high wave number + strong media perturbation, differential residual "
    "(known high-wave-number error concentration)",
    "error spectral mass in [90,110] exceeds mass in [190,210]",
    "~4 min",
    """
[experiment]
kind = spectrum
[problem]
lam = 100
mu = 200
c = 1000
m = 100
source = muwave
bc = dirichlet
a = -1
b = 1
rho = 400
[ansatz]
form = real
freqs = 0, 90, 100, 110, 190, 200, 210
layers = 1, 40, 40, 40, 40, 1
[training]
colloc = 6000
epochs = 300
batch_size = 100
lr = 0.002
seed = 0
[evaluation]
reference = fd:16384
test_points = 8193
[spectrum]
band_low = 90, 110
band_high = 190, 210
""",
))

_register(_p(
    "helmholtz-int-100",
    "same high-wave-number problem through the integral formulation",
    "rel_l2 <= 5e-2 vs FD reference",
    "~3 min",
    """
[experiment]
kind = solve-integral
[problem]
lam = 100
mu = 200
c = 1000
m = 100
source = muwave
bc = dirichlet
a = -1
b = 1
[ansatz]
form = real
freqs = 0, 90, 100, 110, 190, 200, 210
layers = 1, 40, 40, 40, 40, 1
[integral]
kernel = interior_dirichlet
mesh_nodes = 2049
colloc_points = 4096
quad_order = 16
[training]
epochs = 700
batch_size = 512
lr = 0.003
stages = 400:512:0.003, 300:512:0.0003
seed = 0
init_scale = 0.5
[evaluation]
reference = fd:16384
test_points = 8193
""",
))

_register(_p(
    "elliptic-250",
    "damped interior problem with a 250 rad/len source",
    "max_abs <= 1e-2 vs closed form",
    "~1 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 3
mu = 250
sign = -1
source = elliptic
bc = dirichlet
a = -1
b = 1
rho = 400
[ansatz]
form = real
freqs = 0, 250
layers = 1, 20, 20, 20, 20, 1
[training]
colloc = 4000
epochs = 650
batch_size = 100
lr = 0.005
stages = 400:100:0.005, 250:100:0.0003
seed = 0
init_scale = 0.5
[evaluation]
reference = exact-elliptic
test_points = 4001
""",
))

_register(_p(
    "exterior-diff-3000ep",
    "exterior scattering via the radiation-penalized differential residual",
    "reported rel_l2 vs FD reference on [-1,1] (compared against the "
    "integral run)",
    "~10 min",
    """
[experiment]
kind = solve-ode
[problem]
lam = 100
mu = 200
c = 1000
omega = scatter
source = scatter
bc = robin
a = 2
rho = 100
[ansatz]
form = complex
freqs = -200, -100, 0, 100, 200
layers = 1, 20, 20, 20, 20, 1
[training]
colloc = 3000
epochs = 3000
batch_size = 600
lr = 0.002
seed = 0
init_scale = 0.5
[evaluation]
reference = fd:32768
test_points = 8193
restrict = -1, 1
""",
))

_register(_p(
    "exterior-ie-300ep",
    "exterior scattering via the integral formulation, 10x fewer epochs",
    "rel_l2 on [-1,1] below the differential run's",
    "~3 min",
    """
[experiment]
kind = solve-integral
[problem]
lam = 100
mu = 200
c = 1000
omega = scatter
source = scatter
bc = robin
a = 2
[ansatz]
form = complex
freqs = -200, -100, 0, 100, 200
layers = 1, 20, 20, 20, 20, 1
[integral]
kernel = exterior
mesh_nodes = 2049
colloc_points = 4096
quad_order = 16
[training]
epochs = 300
batch_size = 512
lr = 0.003
stages = 200:512:0.003, 100:512:0.0003
seed = 0
init_scale = 0.5

[evaluation]
reference = fd:32768
test_points = 8193
restrict = -1, 1
""",
))

_register(_p(
    "appendix-eta-sweep",
    "spectral-overlap ratios of phase-shifted subnets at shrinking init scales",
    "ratio non-increasing in init scale on >= 90% of 20 seeds",
    "~1 min",
    """
[experiment]
kind = appendix-diagnostic
[ansatz]
form = complex
freqs = 0, 5
layers = 1, 20, 20, 1
[diagnostic]
etas = 0.5, 0.1, 0.02
seeds = 20
grid_points = 2048
""",
))


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; run `phasewave list-presets`"
        ) from None


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Parse the flat INI config format into a dict of sections."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return {s: dict(cp.items(s)) for s in cp.sections()}


def preset_config(name: str) -> dict[str, dict[str, str]]:
    return parse_config(get_preset(name).config_text)


def load_config_file(path) -> dict[str, dict[str, str]]:
    with io.open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
