"""The boundary-constrained variant: Neumann-type grid with the unilateral
condition  dy/dnu + (dmu/dnu) y + beta(y) = 0  on the boundary.

Boundary nodes are unknowns.  The penalized flux enters through the ghost
value of the reflected Laplacian: at a boundary node the second difference
along an outward axis picks up -(2/h) * [ (dmu/dnu) y + beta_eps(y) ].
With the half-cell quadrature weights this is exactly the discrete form

    <A_eps(t) y, phi> = int grad y . grad phi + (F_eff(t,y) + g.grad y) phi
                        + sum_bnd w_bnd (beta_eps(y) + dmu/dnu y) phi,

corner nodes applying both axis ghosts (their boundary weight is the
trapezoid weight (hx + hy)/2, and dmu/dnu averages the two one-sided axis
stencils).  The boundary beta_eps sits inside the same semismooth Newton
loop as the interior obstacle solver, restricted to boundary nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as gridmod
from . import noise as noisemod
from . import transform
from .errors import ConfigError, NumericalFailure, StabilityError
from .grid import Grid
from .noise import BrownianPathSet, CoeffSpec, TimeGrid
from .pathsolver import (
    Diagnostics,
    ForcingSpec,
    ImplicitSolver,
    InitialData,
    PathSolution,
    SolveConfig,
    _pick_refinement,
    _transport,
    build_implicit_solver,
    newton_penalized_solve,
    stability_margin,
)
from .penalty import beta_eps, j_eps
from .transform import ReactionSpec


@dataclass
class BoundaryData:
    """Boundary node bookkeeping for a Neumann grid.

    geom_factor holds sum over outward axes of 2/h (zero off the boundary);
    bweights the boundary quadrature weights.  geom_factor * node_weight
    equals bweights, which is what makes the ghost-value route and the
    variational form agree to machine precision.
    """

    grid: Grid
    indices: np.ndarray
    geom_factor: np.ndarray
    bweights: np.ndarray

    def normal_derivative(self, field: np.ndarray) -> np.ndarray:
        """dmu/dnu at boundary nodes by second-order one-sided stencils,
        averaged over the outward axes at corners; zero off the boundary."""
        g = self.grid
        U = g.reshape(field)
        acc = np.zeros(g.shape)
        cnt = np.zeros(g.shape)
        for axis in range(g.dim):
            h = g.h[axis]

            def take(i):
                sel = [slice(None)] * g.dim
                sel[axis] = i
                return U[tuple(sel)]

            def put(i, values):
                sel = [slice(None)] * g.dim
                sel[axis] = i
                acc[tuple(sel)] += values
                cnt[tuple(sel)] += 1.0

            # left side: outward normal is -e_axis
            put(0, (3.0 * take(0) - 4.0 * take(1) + take(2)) / (2.0 * h))
            put(-1, (3.0 * take(-1) - 4.0 * take(-2) + take(-3)) / (2.0 * h))
        out = np.zeros(g.shape)
        np.divide(acc, cnt, out=out, where=cnt > 0)
        return out.reshape(-1)


def build_boundary_data(grid: Grid) -> BoundaryData:
    if grid.bc_kind != gridmod.NEUMANN:
        raise ConfigError("Signorini problems need a Neumann grid (boundary nodes included)")
    geom = np.zeros(grid.shape)
    for axis in range(grid.dim):
        sel = [slice(None)] * grid.dim
        for side in (0, -1):
            sel[axis] = side
            geom[tuple(sel)] += 2.0 / grid.h[axis]
        sel[axis] = slice(None)
    geom = geom.reshape(-1)
    return BoundaryData(
        grid=grid,
        indices=np.flatnonzero(grid.boundary_mask),
        geom_factor=geom,
        bweights=gridmod.boundary_weights(grid),
    )


@dataclass
class SignoriniCoeffs:
    """Coefficient fields of the transformed equation at one time."""

    t: float
    rs: ReactionSpec
    mu: np.ndarray
    mu_tilde: np.ndarray
    grad_mu: list[np.ndarray]
    lap_mu: np.ndarray
    g: list[np.ndarray] | None
    dmu_dnu: np.ndarray
    source: np.ndarray

    def reaction(self, y: np.ndarray, mu_cap: float = transform.MU_CAP_DEFAULT) -> np.ndarray:
        return transform.effective_reaction(
            self.rs, self.mu, self.mu_tilde, self.grad_mu, self.lap_mu, self.t, y,
            mu_cap=mu_cap,
        )


def zero_coeffs(grid: Grid, t: float = 0.0, rs: ReactionSpec | None = None,
                source: np.ndarray | None = None) -> SignoriniCoeffs:
    z = grid.zeros()
    return SignoriniCoeffs(
        t=t,
        rs=rs or ReactionSpec(),
        mu=z,
        mu_tilde=z,
        grad_mu=[grid.zeros() for _ in range(grid.dim)],
        lap_mu=z,
        g=None,
        dmu_dnu=z,
        source=source if source is not None else z,
    )


def assemble_coeffs(grid: Grid, cs: CoeffSpec, rs: ReactionSpec, forcing: ForcingSpec,
                    paths: BrownianPathSet, t: float, bd: BoundaryData,
                    mu_cap: float) -> SignoriniCoeffs:
    mu = noisemod.eval_mu(cs, paths, t, grid)
    peak = float(np.max(np.abs(mu))) if mu.size else 0.0
    if peak > mu_cap:
        raise NumericalFailure(f"|mu| reached {peak:.3g} at t={t:.4g}, beyond the cap {mu_cap}")
    if cs.m > 0:
        mt = noisemod.eval_mu_tilde(cs, paths, t, grid)
        grad_mu, lap_mu, g = noisemod.eval_mu_derivs(cs, paths, t, grid)
    else:
        mt = grid.zeros()
        grad_mu, lap_mu, g = [grid.zeros() for _ in range(grid.dim)], grid.zeros(), None
    f = forcing.value(t, grid) if forcing.kind != "zero" else grid.zeros()
    if forcing.kind != "zero" and not forcing.transformed:
        f = transform.effective_source(mu, f, mu_cap=mu_cap)
    return SignoriniCoeffs(
        t=t, rs=rs, mu=mu, mu_tilde=mt, grad_mu=grad_mu, lap_mu=lap_mu, g=g,
        dmu_dnu=bd.normal_derivative(mu), source=f,
    )


def apply_operator(grid: Grid, coeffs: SignoriniCoeffs, bd: BoundaryData, y: np.ndarray,
                   eps: float) -> np.ndarray:
    """Strong form of A_eps(t) y: -lap_BC y + F_eff(t, y) + g . grad y, the
    penalized boundary flux folded into the Laplacian's ghost values."""
    lap = gridmod.apply_laplacian(grid, y)
    flux = np.zeros_like(y)
    mask = grid.boundary_mask
    flux[mask] = coeffs.dmu_dnu[mask] * y[mask] + beta_eps(y[mask], eps)
    lap = lap - bd.geom_factor * flux
    return -lap + coeffs.reaction(y) + _transport(grid, coeffs.g, y)


def assemble_form_value(grid: Grid, coeffs: SignoriniCoeffs, bd: BoundaryData,
                        y: np.ndarray, phi: np.ndarray, eps: float) -> float:
    """<A_eps(t) y, phi> by quadrature; agrees with inner(apply_operator, phi)
    to machine precision."""
    if y.shape != phi.shape or y.shape != (grid.n_nodes,):
        raise ValueError("field size mismatch in form assembly")
    value = gridmod.stiffness_inner(grid, y, phi)
    bulk = coeffs.reaction(y) + _transport(grid, coeffs.g, y)
    value += gridmod.inner(grid, bulk, phi)
    mask = grid.boundary_mask
    tr = beta_eps(y[mask], eps) + coeffs.dmu_dnu[mask] * y[mask]
    value += float(np.sum(bd.bweights[mask] * tr * phi[mask]))
    return value


def step_signorini(grid: Grid, y_n: np.ndarray, coeffs: SignoriniCoeffs, bd: BoundaryData,
                   cfg: SolveConfig, coeffs_new: SignoriniCoeffs | None = None,
                   solver: ImplicitSolver | None = None):
    """One theta-step; the boundary condition is enforced at the new time
    level (dmu/dnu from coeffs_new when given, else from coeffs)."""
    margin = stability_margin(grid, coeffs.g, cfg.dt)
    if margin > 1.0 + 1e-9:
        raise StabilityError(
            f"time step violates the transport restriction: dt*sup|g|/h = {margin:.3f} > 1"
        )
    if solver is None:
        solver = build_implicit_solver(grid, cfg.dt, cfg.theta)
    dmu_new = (coeffs_new or coeffs).dmu_dnu
    mask = grid.boundary_mask

    if cfg.theta < 1.0:
        lap_bc = gridmod.apply_laplacian(grid, y_n)
        flux = np.zeros_like(y_n)
        flux[mask] = coeffs.dmu_dnu[mask] * y_n[mask] + beta_eps(y_n[mask], cfg.eps)
        lap_bc = lap_bc - bd.geom_factor * flux
        explicit = (1.0 - cfg.theta) * lap_bc
    else:
        explicit = 0.0
    rhs = y_n + cfg.dt * (
        explicit - coeffs.reaction(y_n, cfg.mu_cap) - _transport(grid, coeffs.g, y_n)
        + coeffs.source
    )
    robin_diag = np.where(mask, cfg.dt * cfg.theta * bd.geom_factor * dmu_new, 0.0)
    dt_scale = np.where(mask, cfg.dt * cfg.theta * bd.geom_factor, 0.0)
    y, iters, resid = newton_penalized_solve(solver, rhs, dt_scale, cfg.eps, y_n,
                                             cfg.newton_tol, cfg.newton_max,
                                             linear_diag=robin_diag)
    return y, iters, resid


def solve_signorini_path(
    grid: Grid,
    tg: TimeGrid,
    cs: CoeffSpec,
    rs: ReactionSpec,
    forcing: ForcingSpec,
    x: InitialData | np.ndarray,
    cfg: SolveConfig,
    paths: BrownianPathSet,
) -> PathSolution:
    """March the boundary-penalized problem along one Brownian path."""
    if grid.bc_kind != gridmod.NEUMANN:
        raise ConfigError("solve_signorini_path needs a Neumann grid")
    if cs.m != paths.m:
        raise ConfigError(f"coefficient count {cs.m} != path component count {paths.m}")
    if paths.tg.N % tg.N != 0 or abs(paths.tg.T - tg.T) > 1e-12 * max(1.0, tg.T):
        raise ConfigError("path set must be sampled on the run grid or a refinement of it")
    x_field = x.evaluate(grid) if isinstance(x, InitialData) else np.asarray(x, dtype=float)
    if np.min(x_field) < 0:
        raise ConfigError("initial data must be nonnegative")

    bd = build_boundary_data(grid)
    level, run_paths = _pick_refinement(grid, tg, cs, cfg, paths)
    stride = 2**level
    run_tg = run_paths.tg
    dt = run_tg.dt
    run_cfg = SolveConfig(dt, cfg.T, cfg.theta, cfg.eps, cfg.newton_tol,
                          cfg.newton_max, cfg.mu_cap, cfg.max_halvings)
    solver = build_implicit_solver(grid, dt, cfg.theta)

    n_store = tg.N + 1
    y_traj = np.zeros((n_store, grid.n_nodes))
    mu_traj = np.zeros((n_store, grid.n_nodes))
    cum_source = np.zeros(n_store)
    iters = np.zeros(run_tg.N, dtype=int)
    resids = np.zeros(run_tg.N)
    worst_margin = 0.0
    source_sq = 0.0

    y = x_field.copy()
    coeffs = assemble_coeffs(grid, cs, rs, forcing, run_paths, 0.0, bd, cfg.mu_cap)
    for n in range(run_tg.N + 1):
        if n % stride == 0:
            k = n // stride
            y_traj[k] = y
            mu_traj[k] = coeffs.mu
            cum_source[k] = source_sq
        if n == run_tg.N:
            break
        coeffs_next = assemble_coeffs(grid, cs, rs, forcing, run_paths, (n + 1) * dt, bd,
                                      cfg.mu_cap)
        source_sq += dt * gridmod.inner(grid, coeffs.source, coeffs.source)
        worst_margin = max(worst_margin, stability_margin(grid, coeffs.g, dt))
        y, it, resid = step_signorini(grid, y, coeffs, bd, run_cfg, coeffs_next, solver)
        iters[n] = it
        resids[n] = resid
        coeffs = coeffs_next

    diag = Diagnostics(
        newton_iters=iters,
        residuals=resids,
        stability_margin=worst_margin,
        delta=noisemod.path_sup(run_paths),
        refine_level=level,
        mu_sup=float(np.max(np.abs(mu_traj))) if mu_traj.size else 0.0,
        cum_source_sq=cum_source,
        eps=cfg.eps,
    )
    eta = beta_eps(y_traj, cfg.eps)
    return PathSolution(grid=grid, tg=tg, y=y_traj, eta=eta, mu=mu_traj, diagnostics=diag)


def recover_boundary_multiplier(sol: PathSolution) -> np.ndarray:
    """beta_eps(y) restricted to the boundary nodes: shape (N+1, n_boundary)."""
    mask = sol.grid.boundary_mask
    return beta_eps(sol.y[:, mask], sol.diagnostics.eps)


def boundary_potential_check(sol: PathSolution, x, slack: float = 10.0,
                             abs_tol: float = 1e-12):
    """Discrete analogue of the boundary potential bound: for every t,
    int j_eps(y(t)) + int_0^t sum_bnd beta_eps^2 <= slack * (int j_eps(x)
    + int |f~|^2) + abs_tol.  Returns (worst_ratio_or_0, passed)."""
    g, tg = sol.grid, sol.tg
    eps = sol.diagnostics.eps
    x_field = x.evaluate(g) if isinstance(x, InitialData) else np.asarray(x, dtype=float)
    bw = gridmod.boundary_weights(g)
    mask = g.boundary_mask
    j_t = np.array([gridmod.inner(g, j_eps(sol.y[n], eps), np.ones(g.n_nodes))
                    for n in range(tg.N + 1)])
    b_sq = np.array([float(np.sum(bw[mask] * beta_eps(sol.y[n][mask], eps) ** 2))
                     for n in range(tg.N + 1)])
    cum_b = np.concatenate([[0.0], np.cumsum(b_sq[:-1]) * tg.dt])
    lhs = j_t + cum_b
    rhs = slack * (float(np.sum(gridmod.inner(g, j_eps(x_field, eps), np.ones(g.n_nodes))))
                   + sol.diagnostics.cum_source_sq) + abs_tol
    ok = bool(np.all(lhs <= rhs))
    ratios = lhs / np.maximum(rhs, 1e-300)
    return float(ratios.max()), ok


def mass(grid: Grid, y: np.ndarray) -> float:
    return gridmod.inner(grid, y, np.ones(grid.n_nodes))


# ---------------------------------------------------------------------------
# empirical operator bounds


@dataclass
class FormConstantsReport:
    """Fitted constants of the operator bounds on random samples.

    c2/c3: Garding pair, <A y, y> >= c2 |grad y|^2 - c3 |y|^2 (c2 the largest
    value valid with the fitted c3 at target c2 = 1/2).  c1: boundedness
    |<A y, phi>| <= c1 ||y||_V ||phi||_V.  c4: quasi-monotonicity defect.
    violations counts samples breaking the theory-side pair (1/2, c3_theory).
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c3_theory: float
    n_samples: int
    violations: int


def _random_fields(grid: Grid, rng: np.random.Generator, n: int) -> np.ndarray:
    xs = grid.meshes()
    fields = np.empty((n, grid.n_nodes))
    for i in range(n):
        f = np.zeros(grid.n_nodes)
        for mode in range(4):
            amp = rng.normal(scale=1.0 / (1 + mode))
            term = np.ones(grid.n_nodes)
            for x, L in zip(xs, grid.lengths):
                term = term * np.cos(mode * np.pi * x / L)
            f += amp * term
        f += 0.1 * rng.normal(size=grid.n_nodes)
        fields[i] = f
    return fields


def probe_form_constants(grid: Grid, coeffs: SignoriniCoeffs, bd: BoundaryData, eps: float,
                         n_samples: int = 128, seed: int = 0,
                         c2_target: float = 0.5) -> FormConstantsReport:
    if n_samples < 100:
        raise ValueError(f"probe needs n_samples >= 100, got {n_samples}")
    rng = np.random.default_rng(seed)
    fields = _random_fields(grid, rng, n_samples)
    ones = np.ones(grid.n_nodes)

    # theory-side c3 via the trace-interpolation mechanism, with slack 2
    sup_reac = coeffs.rs.alpha + float(np.max(np.abs(coeffs.mu_tilde)))
    sup_reac += float(np.max(sum(c * c for c in coeffs.grad_mu) + np.abs(coeffs.lap_mu)))
    sup_g = max((float(np.max(np.abs(c))) for c in (coeffs.g or [])), default=0.0)
    sup_dmu = float(np.max(np.abs(coeffs.dmu_dnu)))
    dim, min_l = grid.dim, min(grid.lengths)
    c3_theory = 2.0 * (sup_reac + sup_g**2 + sup_dmu * 2.0 * dim / min_l
                       + 16.0 * dim**2 * sup_dmu**2 + 4.0 * dim * sup_dmu)

    a_vals = np.empty(n_samples)
    s_vals = np.empty(n_samples)
    h_vals = np.empty(n_samples)
    for i, y in enumerate(fields):
        a_vals[i] = assemble_form_value(grid, coeffs, bd, y, y, eps)
        s_vals[i] = gridmod.stiffness_inner(grid, y, y)
        h_vals[i] = gridmod.inner(grid, y, y)
    violations = int(np.sum(a_vals < c2_target * s_vals - c3_theory * h_vals - 1e-9))
    c3_hat = float(max(0.0, np.max((c2_target * s_vals - a_vals) / np.maximum(h_vals, 1e-300))))
    with np.errstate(divide="ignore"):
        ratios = (a_vals + c3_hat * h_vals) / np.where(s_vals > 1e-12, s_vals, np.inf)
    c2_hat = float(min(1.0, np.min(ratios)))

    # boundedness on pairs
    c1 = 0.0
    for i in range(0, n_samples - 1, 2):
        y, phi = fields[i], fields[i + 1]
        val = assemble_form_value(grid, coeffs, bd, y, phi, eps)
        ny = np.sqrt(gridmod.stiffness_inner(grid, y, y) + gridmod.inner(grid, y, y))
        nphi = np.sqrt(gridmod.stiffness_inner(grid, phi, phi) + gridmod.inner(grid, phi, phi))
        c1 = max(c1, abs(val) / max(ny * nphi, 1e-300))

    # quasi-monotonicity on pairs
    c4 = 0.0
    for i in range(0, n_samples - 1, 2):
        y, ybar = fields[i], fields[i + 1]
        d = y - ybar
        val = (assemble_form_value(grid, coeffs, bd, y, d, eps)
               - assemble_form_value(grid, coeffs, bd, ybar, d, eps))
        hd = gridmod.inner(grid, d, d)
        if hd > 1e-14:
            c4 = max(c4, -val / hd)

    return FormConstantsReport(c1=c1, c2=c2_hat, c3=c3_hat, c4=c4, c3_theory=c3_theory,
                               n_samples=n_samples, violations=violations)


def coercivity_probe(grid: Grid, coeffs: SignoriniCoeffs, bd: BoundaryData, eps: float,
                     n_samples: int = 128, seed: int = 0) -> tuple[float, float]:
    """Fitted (C2, C3) of the Garding bound over random samples."""
    rep = probe_form_constants(grid, coeffs, bd, eps, n_samples, seed)
    return rep.c2, rep.c3
