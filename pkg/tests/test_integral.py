"""Green kernels, quadrature assembly, integral residual training."""

import numpy as np
import pytest
from scipy.integrate import quad as sciquad

from phasewave import ansatz, integral, nn, reference
from phasewave.errors import ConfigError, KernelError
from phasewave.problems import DirichletBC, HelmholtzProblem, RobinBC


# ---------------------------------------------------------------------------
# kernels


def test_exterior_kernel_values():
    k = integral.GreenKernel("exterior", 100.0)
    assert integral.green_eval(k, 0.3, 0.3) == pytest.approx(-0.005j, abs=1e-15)
    got = integral.green_eval(k, 0.0, 0.01)
    assert got == pytest.approx(np.exp(1j) / (200j), rel=1e-12)


def test_interior_kernel_vanishes_at_endpoints():
    k = integral.GreenKernel("interior_dirichlet", 7.3)
    xs = np.linspace(-1, 1, 11)
    assert np.abs(integral.green_eval(k, 1.0, xs)).max() <= 1e-14
    assert np.abs(integral.green_eval(k, xs, -1.0)).max() <= 1e-14


def test_interior_kernel_rejects_resonance():
    with pytest.raises(KernelError):
        integral.GreenKernel("interior_dirichlet", np.pi / 2)


@pytest.mark.parametrize("kind,lam", [("exterior", 5.0), ("exterior", 100.0),
                                      ("interior_dirichlet", 5.0),
                                      ("interior_dirichlet", 100.0)])
def test_kernel_residual_and_jump(kind, lam):
    k = integral.GreenKernel(kind, lam)
    xp = 0.234
    h = 1e-4
    # (d2/dx2 + lam^2) G = 0 away from the diagonal
    xs = np.array([-0.7, -0.2, 0.5, 0.9])
    for x in xs:
        g = lambda t: integral.green_eval(k, t, xp)
        lap = (g(x + h) - 2 * g(x) + g(x - h)) / h ** 2
        assert abs(lap + lam ** 2 * g(x)) <= 1e-3 * lam ** 2

    # unit jump of dG/dx across x = x' (Richardson-extrapolated in the
    # offset so the one-sided curvature term cancels; offsets scale with
    # the oscillation length so the cubic term stays below tolerance)
    hj = 1e-6

    def jump(eps):
        gp = (integral.green_eval(k, xp + eps + hj, xp)
              - integral.green_eval(k, xp + eps - hj, xp)) / (2 * hj)
        gm = (integral.green_eval(k, xp - eps + hj, xp)
              - integral.green_eval(k, xp - eps - hj, xp)) / (2 * hj)
        return gp - gm

    eps = 0.02 / lam
    j = 2 * jump(eps) - jump(2 * eps)
    assert abs(j - 1.0) <= 1e-3


def test_kernel_symmetry_exact():
    for kind in ("exterior", "interior_dirichlet"):
        k = integral.GreenKernel(kind, 13.0)
        rng = np.random.default_rng(0)
        xs = rng.uniform(-1, 1, 20)
        ys = rng.uniform(-1, 1, 20)
        a = integral.green_eval(k, xs, ys)
        b = integral.green_eval(k, ys, xs)
        assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# quadrature and basis


def test_quadrature_exactness():
    for order in (2, 8, 16):
        q = integral.QuadratureRule(order)
        assert q.weights.sum() == pytest.approx(2.0, rel=1e-14)
        assert np.all(q.weights > 0)
        # odd power integrates to zero at the exactness edge
        assert abs(np.sum(q.weights * q.nodes ** (2 * order - 1))) <= 1e-12
        # even power just inside the exactness range
        val = np.sum(q.weights * q.nodes ** (2 * order - 2))
        assert val == pytest.approx(2.0 / (2 * order - 1), rel=1e-12)
    with pytest.raises(ConfigError):
        integral.QuadratureRule(1)


def test_hat_matrix_rows_sum_to_one():
    mesh = integral.MeshBasis(17)
    xs = np.linspace(-1, 1, 101)
    A = mesh.hat_matrix(xs)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-14)
    # Kronecker property at the nodes
    A_nodes = mesh.hat_matrix(mesh.nodes)
    assert np.allclose(A_nodes, np.eye(17), atol=1e-14)


# ---------------------------------------------------------------------------
# assembly


def _interior_problem(lam=5.0, mu=11.0, c=2.0, m=1.0):
    return HelmholtzProblem(
        lam=lam, mu=mu, c=c,
        omega_fn=lambda x: np.sin(m * np.asarray(x) ** 2),
        f_fn=lambda x: (lam ** 2 - mu ** 2) * np.sin(mu * np.asarray(x)),
        bc=DirichletBC(-1.0, 1.0),
    )


def test_assemble_zero_perturbation_gives_zero_B():
    p = HelmholtzProblem(lam=5.0, f_fn=lambda x: np.sin(3 * np.asarray(x)),
                         bc=DirichletBC(-1, 1))
    k = integral.GreenKernel("interior_dirichlet", 5.0)
    sys = integral.assemble_system(k, p, integral.MeshBasis(33),
                                   np.linspace(-1, 1, 65),
                                   integral.QuadratureRule(8), cache_dir=None)
    assert np.all(sys.B == 0)
    assert sys.A.shape == (65, 33)


def test_assembled_psi_sum_matches_adaptive_quadrature():
    # sum_j psi_j(x_i) = integral G(x_i, xi) omega(xi) d xi by the hat
    # partition of unity; adaptive quadrature is the independent oracle
    p = _interior_problem()
    k = integral.GreenKernel("interior_dirichlet", p.lam)
    mesh = integral.MeshBasis(65)
    coll = np.array([-0.83, -0.31, 0.02, 0.47, 0.91])
    sys = integral.assemble_system(k, p, mesh, coll,
                                   integral.QuadratureRule(16), cache_dir=None)
    for i, x in enumerate(coll):
        integrand = lambda xi: float(
            np.real(integral.green_eval(k, x, xi)) * np.sin(xi ** 2)
        )
        want, _ = sciquad(integrand, -1, 1, points=[x], limit=200)
        assert sys.B[i].sum() == pytest.approx(want, abs=1e-10)


def test_exterior_f_G_matches_green_quadrature_oracle():
    lam = 10.0
    f = lambda x: np.where(np.abs(x) <= 1, (1 - np.asarray(x) ** 2), 0.0)
    p = HelmholtzProblem(lam=lam, f_fn=f, bc=RobinBC(2.0))
    k = integral.GreenKernel("exterior", lam)
    coll = np.linspace(-1, 1, 41)
    sys = integral.assemble_system(k, p, integral.MeshBasis(65), coll,
                                   integral.QuadratureRule(16), cache_dir=None)
    oracle = reference.green_quadrature_solution(f, lam, coll)
    assert np.abs(sys.f_G - oracle).max() <= 1e-10


def test_discrete_residual_of_fd_reference_converges():
    # || A u* + c B u* - f_G || with u* the FD reference at the nodes decays
    # at second order in the mesh width
    p = _interior_problem(lam=10.0, mu=20.0, c=5.0)
    k = integral.GreenKernel("interior_dirichlet", p.lam)
    coll = np.linspace(-1, 1, 400)
    quad = integral.QuadratureRule(16)
    _, u_ref, _ = reference.fd_reference(p, 8192)
    ref_nodes = np.linspace(-1, 1, 8193)
    norms = []
    for m in (65, 129, 257):
        mesh = integral.MeshBasis(m)
        sys = integral.assemble_system(k, p, mesh, coll, quad, cache_dir=None)
        u_star = np.interp(mesh.nodes, ref_nodes, u_ref.real)
        r = sys.A @ u_star + sys.c * (sys.B @ u_star) - sys.f_G
        norms.append(np.linalg.norm(r))
    assert 3.0 <= norms[0] / norms[1] <= 5.0, norms
    assert 3.0 <= norms[1] / norms[2] <= 5.0, norms


# ---------------------------------------------------------------------------
# loss


def test_integral_loss_zero_ansatz_is_source_norm():
    p = _interior_problem()
    k = integral.GreenKernel("interior_dirichlet", p.lam)
    mesh = integral.MeshBasis(33)
    sys = integral.assemble_system(k, p, mesh, np.linspace(-1, 1, 65),
                                   integral.QuadratureRule(8), cache_dir=None)
    a = ansatz.make_ansatz("real", [0.0], [1, 4, 1], seed=0)
    for t in a.terms:
        for w in t.net.weights:
            w[:] = 0.0
        for b in t.net.biases:
            b[:] = 0.0
    want = float(np.sum(np.abs(sys.f_G) ** 2))
    assert integral.integral_loss(a, sys, mesh) == pytest.approx(want, rel=1e-12)


def test_integral_loss_identity_pattern():
    # collocation == nodes makes A the identity, so the loss is exactly the
    # nodal interpolation error of f_G when c = 0
    p = HelmholtzProblem(lam=5.0, f_fn=lambda x: np.sin(2 * np.asarray(x)),
                         bc=DirichletBC(-1, 1))
    k = integral.GreenKernel("interior_dirichlet", 5.0)
    mesh = integral.MeshBasis(33)
    sys = integral.assemble_system(k, p, mesh, mesh.nodes,
                                   integral.QuadratureRule(8), cache_dir=None)
    assert np.allclose(sys.A, np.eye(33), atol=1e-14)
    a = ansatz.make_ansatz("real", [0.0, 2.0], [1, 6, 1], seed=1)
    (T,), _ = ansatz.eval_channels(a, mesh.nodes)
    want = float(np.sum(np.abs(T - sys.f_G) ** 2))
    assert integral.integral_loss(a, sys, mesh) == pytest.approx(want, rel=1e-12)


def test_solve_integral_c0_reproduces_source_term():
    # with c = 0 the fixed point is explicit: T must learn f_G itself
    lam = 3.0
    f = lambda x: np.where(np.abs(x) <= 1, 2.0 * (1 - np.asarray(x) ** 2), 0.0)
    p = HelmholtzProblem(lam=lam, f_fn=f, bc=RobinBC(2.0))
    k = integral.GreenKernel("exterior", lam)
    mesh = integral.MeshBasis(129)
    coll = np.linspace(-1, 1, 257)
    sys = integral.assemble_system(k, p, mesh, coll,
                                   integral.QuadratureRule(8), cache_dir=None)
    a = ansatz.make_ansatz("complex", [-lam, 0.0, lam], [1, 12, 12, 1],
                           init_scale=0.5, seed=0)
    cfg = nn.TrainConfig(epochs=800, batch_size=32, lr=0.003, seed=0,
                         init_scale=0.5)
    integral.solve_integral(p, k, a, sys, cfg, mesh)
    approx = ansatz.ansatz_eval(a, coll)
    rel = reference.rel_l2_error(approx, sys.f_G)
    assert rel <= 1e-2, rel


# ---------------------------------------------------------------------------
# cache


def test_assembly_cache_roundtrip(tmp_path):
    p = _interior_problem()
    k = integral.GreenKernel("interior_dirichlet", p.lam)
    mesh = integral.MeshBasis(17)
    coll = np.linspace(-1, 1, 33)
    quad = integral.QuadratureRule(8)
    s1 = integral.assemble_system(k, p, mesh, coll, quad, cache_dir=tmp_path)
    files = list(tmp_path.glob("assembly-*.npz"))
    assert len(files) == 1
    s2 = integral.assemble_system(k, p, mesh, coll, quad, cache_dir=tmp_path)
    assert np.array_equal(s1.B, s2.B) and np.array_equal(s1.f_G, s2.f_G)
    # different source -> different key, no false hit
    p2 = HelmholtzProblem(lam=p.lam, mu=p.mu, c=p.c, omega_fn=p.omega_fn,
                          f_fn=lambda x: np.cos(np.asarray(x)),
                          bc=DirichletBC(-1, 1))
    integral.assemble_system(k, p2, mesh, coll, quad, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("assembly-*.npz"))) == 2


def test_cache_env_var_relocates(tmp_path, monkeypatch):
    monkeypatch.setenv("PHASEWAVE_CACHE", str(tmp_path / "sub"))
    p = _interior_problem()
    k = integral.GreenKernel("interior_dirichlet", p.lam)
    integral.assemble_system(k, p, integral.MeshBasis(9), np.linspace(-1, 1, 17),
                             integral.QuadratureRule(4), cache_dir="auto")
    assert list((tmp_path / "sub").glob("assembly-*.npz"))
