import numpy as np
import pytest

from svilab.errors import ConfigError, StabilityError
from svilab.grid import DIRICHLET, NEUMANN, build_grid, norm_l2
from svilab.noise import CoeffSpec, TimeGrid, parse_coefficient, sample_paths
from svilab.pathsolver import (
    BoundaryLift,
    ForcingSpec,
    InitialData,
    ProblemSpec,
    SolveConfig,
    StepCoeffs,
    build_implicit_solver,
    direct_em_solve,
    recover_multiplier,
    solve_path,
    step_interior,
)
from svilab.transform import ReactionSpec

EMPTY = CoeffSpec(())


def coeffs1(text):
    return CoeffSpec((parse_coefficient(text, [1.0]),))


def zero_coeffs(g):
    return StepCoeffs(reaction=g.zeros(), g=None, source=g.zeros())


def march(grid, x, cfg, n_steps, source=None):
    solver = build_implicit_solver(grid, cfg.dt, cfg.theta)
    y = x.copy()
    src = source if source is not None else grid.zeros()
    for _ in range(n_steps):
        y, _, _ = step_interior(grid, y, StepCoeffs(grid.zeros(), None, src), cfg, solver)
    return y


def test_step_zero_fixed_point():
    g = build_grid(1, [1.0], 31, DIRICHLET)
    cfg = SolveConfig(dt=1e-3, T=1.0)
    y1, iters, resid = step_interior(g, g.zeros(), zero_coeffs(g), cfg)
    assert np.all(y1 == 0.0)
    assert resid <= cfg.newton_tol


def test_step_heat_eigen_decay_oracle():
    # oracle: sin(pi x) is an eigenvector of the discrete Laplacian with
    # lam_h = -4 sin^2(pi h / 2) / h^2, so one theta-step multiplies by
    # (1 + (1-theta) dt lam_h) / (1 - theta dt lam_h).
    for theta in (1.0, 0.5):
        g = build_grid(1, [1.0], 127, DIRICHLET)
        h = g.h[0]
        lam_h = -4.0 * np.sin(np.pi * h / 2.0) ** 2 / h**2
        dt = 2e-4
        cfg = SolveConfig(dt=dt, T=1.0, theta=theta)
        x = np.sin(np.pi * g.meshes()[0])
        y1, _, _ = step_interior(g, x, zero_coeffs(g), cfg)
        factor_h = (1.0 + (1.0 - theta) * dt * lam_h) / (1.0 - theta * dt * lam_h)
        assert np.allclose(y1, factor_h * x, atol=1e-12)
        # continuous-eigenvalue version agrees within spatial error
        factor_c = (1.0 - (1.0 - theta) * dt * np.pi**2) / (1.0 + theta * dt * np.pi**2)
        assert np.max(np.abs(y1 - factor_c * x)) <= 5.0 * dt * np.pi**4 * h**2


def steady_pinned_oracle(x, eps):
    # closed form of -y'' + y/eps = -1, y(0)=y(1)=0 (y < 0 everywhere):
    # y = -eps (1 - cosh((x-1/2)/sqrt(eps)) / cosh(1/(2 sqrt(eps))))
    s = np.sqrt(eps)
    return -eps * (1.0 - np.cosh((x - 0.5) / s) / np.cosh(0.5 / s))


def test_step_pinned_by_negative_forcing():
    g = build_grid(1, [1.0], 127, DIRICHLET)
    eps = 1e-3
    cfg = SolveConfig(dt=5e-3, T=1.0, eps=eps)
    y = march(g, g.zeros(), cfg, 400, source=np.full(g.n_nodes, -1.0))
    x = g.meshes()[0]
    expected = steady_pinned_oracle(x, eps)
    assert np.max(np.abs(y - expected)) <= 1e-4
    # interior plateau at -eps with multiplier -1
    mid = slice(g.n_nodes // 4, 3 * g.n_nodes // 4)
    assert np.allclose(y[mid], -eps, atol=1e-5)
    eta = np.minimum(y, 0.0) / eps
    assert np.allclose(eta[mid], -1.0, atol=1e-2)


def test_stability_guard_raises():
    g = build_grid(1, [1.0], 31, DIRICHLET)
    cfg = SolveConfig(dt=0.1, T=1.0)
    gfield = [np.full(g.n_nodes, 5.0)]  # dt*sup|g|/h = 0.1*5/(1/32) = 16
    with pytest.raises(StabilityError):
        step_interior(g, g.zeros(), StepCoeffs(g.zeros(), gfield, g.zeros()), cfg)


def test_solve_path_zero_data():
    g = build_grid(1, [1.0], 31, DIRICHLET)
    tg = TimeGrid(0.05, 50)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 0.0), cfg, paths)
    assert np.all(sol.y == 0.0)
    assert np.all(sol.X == 0.0)
    assert np.all(sol.eta == 0.0)


def test_solve_path_heat_decay_oracle():
    # separation of variables: y(t) = exp(-pi^2 t) sin(pi x)
    g = build_grid(1, [1.0], 255, DIRICHLET)
    tg = TimeGrid(0.1, 1000)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, theta=1.0)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, paths)
    x = g.meshes()[0]
    exact = np.exp(-np.pi**2 * 0.1) * np.sin(np.pi * x)
    assert np.max(np.abs(sol.y[-1] - exact)) <= 5e-3
    assert np.array_equal(sol.X, sol.y)  # mu = 0 throughout


def test_solve_path_factorized_noise_oracle():
    # m=1, mu_1 = c constant: y is deterministic with reaction c^2/2 and the
    # discrete recurrence on the sine eigenvector is exact; X = e^{c beta} y.
    c = 0.8
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.2, 200)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, theta=1.0)
    paths = sample_paths(TimeGrid(0.2, 1600), 1, seed=21)
    cs = coeffs1(f"const({c}) * const(1.0)")
    sol = solve_path(g, tg, cs, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, paths)
    h = g.h[0]
    lam_h = -4.0 * np.sin(np.pi * h / 2.0) ** 2 / h**2
    dt = tg.dt
    rho = (1.0 - dt * 0.5 * c * c) / (1.0 - dt * lam_h)
    x = np.sin(np.pi * g.meshes()[0])
    beta_T = paths.coarsen(8).values[0, -1]
    expected_X = np.exp(c * beta_T) * rho**tg.N * x
    assert np.max(np.abs(sol.X[-1] - expected_X)) <= 1e-10
    assert sol.diagnostics.refine_level == 0


def test_recover_multiplier_matches_and_sign():
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.2, 100)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, eps=1e-3)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec("const", -1.0),
                     InitialData("sine", 0.0), cfg, paths)
    eta = recover_multiplier(sol)
    assert np.array_equal(eta, sol.eta)
    assert np.all(eta <= 0.0)
    # penalized complementarity is exact: eta * max(y, 0) = 0 at every node
    assert np.all(eta * np.maximum(sol.y, 0.0) == 0.0)
    # pinned steady state: interior multiplier ~ -1 per the ODE oracle
    interior = slice(g.n_nodes // 4, 3 * g.n_nodes // 4)
    assert np.allclose(eta[-1][interior], -1.0, atol=1e-2)
    # positive trajectory leaves eta identically zero
    sol_pos = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                         InitialData("sine", 1.0), cfg, paths)
    assert np.all(sol_pos.eta == 0.0)


def test_positivity_preservation():
    # theta=1, f >= 0, x >= 0, no reaction/transport: M-matrix keeps y >= 0
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.1, 100)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, theta=1.0)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec("sine", 2.0),
                     InitialData("cone", 1.0), cfg, paths)
    assert np.min(sol.y) >= -1e-12


def test_penalty_dissipativity():
    # f = 0, F = 0, g = 0: the L2 norm is nonincreasing step to step
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.1, 100)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("cutoff", 1.0), cfg, paths)
    norms = [norm_l2(g, sol.y[k]) for k in range(tg.N + 1)]
    assert all(b <= a + 1e-13 for a, b in zip(norms, norms[1:]))


def test_newton_iteration_bound():
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.2, 100)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, eps=1e-4)
    paths = sample_paths(TimeGrid(0.2, 800), 1, seed=3)
    cs = coeffs1("const(0.5) * sin(1)")
    sol = solve_path(g, tg, cs, ReactionSpec("linear", 0.5), ForcingSpec("const", -2.0),
                     InitialData("sine", 0.5), cfg, paths)
    assert np.max(sol.diagnostics.newton_iters) <= g.n_nodes
    assert np.max(sol.diagnostics.residuals) <= cfg.newton_tol


def test_direct_em_matches_transform_when_deterministic():
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.1, 200)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    paths = sample_paths(tg, 0, seed=0)
    args = (g, tg, EMPTY, ReactionSpec("linear", 0.7), ForcingSpec("sine", 0.5),
            InitialData("sine", 1.0), cfg, paths)
    a = solve_path(*args)
    b = direct_em_solve(*args)
    assert np.max(np.abs(a.X[-1] - b.X[-1])) <= 1e-6
    assert np.all(direct_em_solve(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                                  InitialData("sine", 0.0), cfg, paths).X == 0.0)


def test_direct_em_self_convergence_in_dt():
    # positive regime, shared increments: the X gap shrinks when dt halves
    g = build_grid(1, [1.0], 31, DIRICHLET)
    cs = coeffs1("const(0.5) * sin(1)")
    master = sample_paths(TimeGrid(0.25, 2000), 1, seed=11)
    gaps = []
    for n_steps in (250, 500):
        tg = TimeGrid(0.25, n_steps)
        cfg = SolveConfig(dt=tg.dt, T=tg.T)
        args = (g, tg, cs, ReactionSpec(), ForcingSpec(), InitialData("sine", 1.0), cfg, master)
        tr = solve_path(*args)
        em = direct_em_solve(*args)
        gaps.append(norm_l2(g, em.X[-1] - tr.X[-1]))
    assert gaps[1] < gaps[0]


def test_solve_path_retries_on_stiff_transport():
    # large coefficient gradient forces the guard to refine dt
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.2, 40)  # dt = 5e-3, h ~ 1/64: sup|g| > 3 triggers
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    cs = coeffs1("const(1.5) * sin(2)")
    paths = sample_paths(TimeGrid(0.2, 40 * 8), 1, seed=5)
    sol = solve_path(g, tg, cs, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, paths)
    assert sol.diagnostics.refine_level >= 1
    assert sol.diagnostics.stability_margin <= 1.0
    assert sol.y.shape == (tg.N + 1, g.n_nodes)
    # with no headroom at all, the same problem is reported as a failure
    with pytest.raises(StabilityError):
        solve_path(g, tg, cs, ReactionSpec(), ForcingSpec(),
                   InitialData("sine", 1.0), cfg, paths.coarsen(8))


def test_solve_path_rejects_bad_input():
    g = build_grid(1, [1.0], 31, NEUMANN)
    tg = TimeGrid(0.1, 10)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    paths = sample_paths(tg, 0, seed=0)
    with pytest.raises(ConfigError):
        solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                   InitialData("sine", 1.0), cfg, paths)
    gd = build_grid(1, [1.0], 31, DIRICHLET)
    with pytest.raises(ConfigError):
        solve_path(gd, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                   InitialData("sine", 1.0), cfg, sample_paths(TimeGrid(0.1, 15), 0, seed=0))
    with pytest.raises(ConfigError):
        solve_path(gd, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                   np.full(gd.n_nodes, -1.0), cfg, paths)


def test_solve_path_2d_smoke():
    g = build_grid(2, [1.0, 1.0], 15, DIRICHLET)
    tg = TimeGrid(0.02, 20)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    paths = sample_paths(TimeGrid(0.02, 160), 1, seed=7)
    cs = CoeffSpec((parse_coefficient("const(0.5) * sin(1) * cos(1)", [1.0, 1.0]),))
    sol = solve_path(g, tg, cs, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, paths)
    assert sol.y.shape == (21, 225)
    assert np.isfinite(sol.y).all()
    # 2D heat decay sanity: both modes decay at ~2 pi^2
    X, Y = g.meshes()
    base = np.sin(np.pi * X) * np.sin(np.pi * Y)
    det = solve_path(g, tg, CoeffSpec(()), ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, sample_paths(tg, 0, seed=0))
    exact = np.exp(-2.0 * np.pi**2 * tg.T) * base
    assert np.max(np.abs(det.y[-1] - exact)) <= 5e-3


def test_boundary_lift_linear_profile():
    # steady check: with y(0,t) = r*t at the left ghost and f = 0, the
    # solution tends to the linear interpolant r*t*(1 - x) plus O(dt) lag
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.5, 2000)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, eps=1e-6)
    paths = sample_paths(tg, 0, seed=0)
    rate = 0.4
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 0.0), cfg, paths, boundary_lift=BoundaryLift(rate))
    x = g.meshes()[0]
    # quasi-steady oracle: y = r t (1-x) + v(x) with v'' = r(1-x), v(0)=v(1)=0
    v = rate * (x**2 / 2.0 - x**3 / 6.0 - x / 3.0)
    expect = rate * tg.T * (1.0 - x) + v
    assert np.max(np.abs(sol.y[-1] - expect)) <= 0.01 * rate * tg.T


def test_problem_spec_roundtrip():
    import pickle

    spec = ProblemSpec(coefficients=(parse_coefficient("const(0.5) * sin(1)", [1.0]),),
                       n=31, n_steps=50, T=0.05, seed=9)
    spec2 = pickle.loads(pickle.dumps(spec))
    a = spec.solve(3)
    b = spec2.solve(3)
    assert np.array_equal(a.y, b.y)
