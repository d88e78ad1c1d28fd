import numpy as np
import pytest

from svilab.analysis import (
    RateFit,
    cauchy_rate_study,
    complementarity_report,
    energy_check,
    ensemble_run,
    fit_rate,
    path_functionals,
)
from svilab.grid import DIRICHLET, build_grid
from svilab.noise import CoeffSpec, TimeGrid, parse_coefficient, sample_paths
from svilab.pathsolver import (
    ForcingSpec,
    InitialData,
    ProblemSpec,
    SolveConfig,
    solve_path,
)
from svilab.transform import ReactionSpec

EMPTY = CoeffSpec(())


def pinned_solution(eps=1e-3, n=63, nt=300, T=0.3):
    g = build_grid(1, [1.0], n, DIRICHLET)
    tg = TimeGrid(T, nt)
    cfg = SolveConfig(dt=tg.dt, T=T, eps=eps)
    paths = sample_paths(tg, 0, seed=0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec("const", -1.0),
                     InitialData("sine", 0.0), cfg, paths)
    return g, tg, sol


def test_complementarity_zero_solution():
    g = build_grid(1, [1.0], 15, DIRICHLET)
    tg = TimeGrid(0.1, 10)
    Z = np.zeros((11, g.n_nodes))
    rep = complementarity_report(Z, Z, g, tg)
    assert rep.min_X == 0.0 and rep.max_eta == 0.0 and rep.pairing == 0.0


def test_complementarity_positive_run_pairs_exactly():
    g = build_grid(1, [1.0], 63, DIRICHLET)
    tg = TimeGrid(0.1, 100)
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 1.0), cfg, sample_paths(tg, 0, seed=0))
    rep = complementarity_report(sol.X, sol.eta_X, g, tg)
    assert rep.pairing == 0.0  # beta_eps vanishes wherever y > 0
    assert rep.max_eta == 0.0
    assert rep.min_X >= 0.0


def test_complementarity_pinned_eps_sweep():
    # min X ~ -eps, |pairing| ~ C eps across the sweep
    ratios_min, ratios_pair, ratios_viol = [], [], []
    for eps in (1e-2, 1e-3, 1e-4):
        g, tg, sol = pinned_solution(eps=eps)
        rep = complementarity_report(sol.X, sol.eta_X, g, tg)
        assert rep.max_eta <= 1e-12
        ratios_min.append(-rep.min_X / eps)
        ratios_pair.append(abs(rep.pairing) / eps)
        # violation mass int int min(y,0)^2 tracks eps^2
        viol = sum(
            tg.dt * np.sum(g.weights * np.minimum(sol.y[n], 0.0) ** 2)
            for n in range(tg.N)
        )
        ratios_viol.append(viol / eps**2)
    # stable linear scaling: the fitted C from the coarsest eps covers all
    for ratios in (ratios_min, ratios_pair, ratios_viol):
        C = max(ratios)
        assert C < np.inf and C <= 3.0 * max(ratios[0], 1e-12)


def test_energy_check_zero_run():
    g, tg, _ = pinned_solution()
    cfg = SolveConfig(dt=tg.dt, T=tg.T)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(),
                     InitialData("sine", 0.0), cfg, sample_paths(tg, 0, seed=0))
    rep = energy_check(sol, InitialData("sine", 0.0))
    assert rep.energy_ratio == 0.0
    assert rep.passed


def test_energy_check_heat_identity():
    # pure diffusion: discrete energy identity gives ratio <= 1 + 10 dt
    g = build_grid(1, [1.0], 127, DIRICHLET)
    tg = TimeGrid(0.1, 500)
    cfg = SolveConfig(dt=tg.dt, T=tg.T, theta=1.0)
    x = InitialData("sine", 1.0)
    sol = solve_path(g, tg, EMPTY, ReactionSpec(), ForcingSpec(), x, cfg,
                     sample_paths(tg, 0, seed=0))
    rep = energy_check(sol, x)
    assert rep.energy_ratio <= 1.0 + 10.0 * tg.dt
    assert rep.multiplier_ratio <= 10.0
    assert rep.passed


def test_energy_check_noisy_paths():
    spec = ProblemSpec(
        n=63, T=0.25, n_steps=250,
        coefficients=(parse_coefficient("const(0.5) * sin(1)", [1.0]),),
        seed=101, initial=InitialData("sine", 1.0),
    )
    for pid in range(5):
        sol = spec.solve(pid)
        rep = energy_check(sol, spec.initial)
        assert rep.passed


def test_fit_rate_and_validation():
    eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    errors = 3.0 * eps**0.75
    fit = fit_rate(eps, errors)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.fit_residual == pytest.approx(0.0, abs=1e-12)
    degenerate = fit_rate(eps, np.zeros(4))
    assert degenerate.degenerate
    with pytest.raises(ValueError):
        RateFit(np.array([1e-3, 1e-2]), np.array([1.0, 2.0]), 1.0, 0.0, 0.0)


def test_cauchy_rate_pinned_deterministic():
    # the pinned contact set gives e(eps) ~ eps: slope near 1, passes 0.45
    spec = ProblemSpec(
        n=63, T=0.3, n_steps=300, coefficients=(), seed=0,
        forcing=ForcingSpec("const", -1.0), initial=InitialData("sine", 0.0),
    )
    fit = cauchy_rate_study(spec, [1e-1, 1e-1 / 4, 1e-1 / 16, 1e-1 / 64])
    assert not fit.degenerate
    assert fit.slope >= 0.45
    assert fit.slope == pytest.approx(1.0, abs=0.15)


def test_cauchy_rate_obstacle_inactive_degenerate():
    spec = ProblemSpec(
        n=31, T=0.05, n_steps=50, coefficients=(), seed=0,
        initial=InitialData("sine", 1.0),
    )
    fit = cauchy_rate_study(spec, [1e-1, 1e-2, 1e-3, 1e-4])
    assert fit.degenerate


def test_ensemble_deterministic_problem_zero_variance():
    spec = ProblemSpec(n=31, T=0.05, n_steps=50, coefficients=(), seed=0,
                       initial=InitialData("sine", 1.0))
    stats = ensemble_run(spec, n_paths=8)
    assert stats.n_failures == 0
    for name, fs in stats.stats.items():
        assert fs.variance == pytest.approx(0.0, abs=1e-25), name
    assert stats.passed


def test_ensemble_statistics_and_reduction_order():
    spec = ProblemSpec(
        n=31, T=0.1, n_steps=100,
        coefficients=(parse_coefficient("const(0.6) * sin(1)", [1.0]),),
        seed=77, initial=InitialData("sine", 1.0),
    )
    a = ensemble_run(spec, n_paths=12, workers=1)
    b = ensemble_run(spec, n_paths=12, workers=2)
    for name in a.stats:
        assert a.stats[name].mean == b.stats[name].mean, name
    assert a.stats["delta_sq"].mean > 0
    assert "sup_y_l2_sq" in a.empirical_C
    assert a.stats["sup_y_l2_sq"].ci_half_width == pytest.approx(
        1.96 * np.sqrt(a.stats["sup_y_l2_sq"].variance / 12)
    )


def test_ensemble_ci_scaling():
    # quadrupling the path count halves the CI half-width within 25%
    spec = ProblemSpec(
        n=15, T=0.1, n_steps=50,
        coefficients=(parse_coefficient("const(1.0) * const(1.0)", [1.0]),),
        seed=5, initial=InitialData("sine", 1.0),
    )
    small = ensemble_run(spec, n_paths=64)
    large = ensemble_run(spec, n_paths=256)
    hw_s = small.stats["delta_sq"].ci_half_width
    hw_l = large.stats["delta_sq"].ci_half_width
    assert 2.0 * 0.75 <= hw_s / hw_l <= 2.0 * 1.25


def test_ensemble_input_validation():
    spec = ProblemSpec(n=15, T=0.05, n_steps=10)
    with pytest.raises(ValueError):
        ensemble_run(spec, n_paths=1)
    with pytest.raises(ValueError):
        ensemble_run(spec, n_paths=4, functionals=["nope"])


def test_path_functionals_keys():
    g, tg, sol = pinned_solution(nt=50, T=0.05)
    vals = path_functionals(sol, InitialData("sine", 0.0))
    assert set(vals) == {
        "sup_y_l2_sq", "int_h1_sq", "int_beta_sq", "int_lap_sq", "delta_sq",
        "int_dydt_l2", "int_dydt_l2_sq", "energy_ratio", "multiplier_ratio",
    }
    assert vals["int_beta_sq"] > 0
