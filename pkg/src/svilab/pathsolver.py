"""Path-wise time integration of the penalized transformed equation, plus a
direct Euler-Maruyama integrator on the original equation for cross-checks.

One step of the theta-scheme solves

    (I - dt theta Lap) y1 + dt beta_eps(y1)
        = y0 + dt [ (1-theta) Lap y0 - F_eff(t, y0) - g . grad y0 + f~ ],

with the Laplacian and the penalty implicit and everything else explicit.
The diagonal monotone penalty is resolved by a semismooth Newton / active
set iteration (nodes with y < 0 get dt/eps added to the diagonal), which
terminates finitely on this piecewise-linear system: tridiagonal solves in
1D, conjugate gradients on the 5-point matrix in 2D.

The explicit transport term carries the stability restriction
dt * sup|g| / h <= 1.  Because g is a function of the Brownian path alone,
the guard is evaluated before marching; violating paths are rerun at
halved dt (up to max_halvings) using a finer restriction of the same path
realization, then reported as failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import cg as sparse_cg

from . import grid as gridmod
from . import noise as noisemod
from . import penalty, transform
from .errors import ConfigError, NewtonError, NumericalFailure, StabilityError
from .grid import Grid
from .noise import BrownianPathSet, CoeffSpec, TimeGrid
from .transform import ReactionSpec


@dataclass(frozen=True)
class SolveConfig:
    """Numerical parameters of one path-wise solve."""

    dt: float
    T: float
    theta: float = 1.0
    eps: float = 1e-3
    newton_tol: float = 1e-10
    newton_max: int = 100
    mu_cap: float = 30.0
    max_halvings: int = 3

    def __post_init__(self):
        errors = []
        if self.dt <= 0:
            errors.append(f"dt must be > 0, got {self.dt}")
        if self.T <= 0:
            errors.append(f"T must be > 0, got {self.T}")
        if not 0.5 <= self.theta <= 1.0:
            errors.append(f"theta must lie in [0.5, 1], got {self.theta}")
        if self.eps <= 0:
            errors.append(f"eps must be > 0, got {self.eps}")
        if self.newton_tol <= 0:
            errors.append(f"newton_tol must be > 0, got {self.newton_tol}")
        if errors:
            raise ConfigError(errors)

    def with_eps(self, eps: float) -> "SolveConfig":
        return SolveConfig(self.dt, self.T, self.theta, eps, self.newton_tol,
                           self.newton_max, self.mu_cap, self.max_halvings)


@dataclass(frozen=True)
class InitialData:
    """Nonnegative initial datum from a closed catalog.

    kinds: 'sine' (product of first sine modes), 'cone' (truncated cone of
    given radius), 'cutoff' (constant plateau times a linear cutoff).
    """

    kind: str = "sine"
    amplitude: float = 0.0
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("sine", "cone", "cutoff"):
            raise ConfigError(f"initial data kind must be sine|cone|cutoff, got {self.kind!r}")
        if self.amplitude < 0:
            raise ConfigError(f"initial amplitude must be >= 0, got {self.amplitude}")

    def evaluate(self, grid: Grid) -> np.ndarray:
        xs = grid.meshes()
        if self.kind == "sine":
            out = np.full(grid.n_nodes, self.amplitude)
            for x, L in zip(xs, grid.lengths):
                out = out * np.sin(np.pi * x / L)
            return np.maximum(out, 0.0)
        center = self.center or tuple(L / 2.0 for L in grid.lengths)
        radius = self.radius if self.radius is not None else min(grid.lengths) / 4.0
        dist = np.zeros(grid.n_nodes)
        for x, c in zip(xs, center):
            dist += (x - c) ** 2
        dist = np.sqrt(dist)
        if self.kind == "cone":
            return self.amplitude * np.maximum(0.0, 1.0 - dist / radius)
        return self.amplitude * np.clip(2.0 * (1.0 - dist / radius), 0.0, 1.0)


@dataclass(frozen=True)
class ForcingSpec:
    """Deterministic space-time forcing from a closed catalog.

    kinds: 'zero', 'const', 'sine' (product of first sine modes), 'edge'
    (amplitude on the strip within `width` of the boundary), 'field'
    (explicit values).  `transformed` marks a source already living in the
    transformed variables, which then bypasses the e^{-mu} scaling (used by
    the Stefan reduction).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 0.1
    transformed: bool = False
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "const", "sine", "edge", "field"):
            raise ConfigError(
                f"forcing kind must be zero|const|sine|edge|field, got {self.kind!r}"
            )
        if self.kind == "field" and self.values is None:
            raise ConfigError("forcing kind 'field' needs explicit values")

    def value(self, t: float, grid: Grid) -> np.ndarray:
        if self.kind == "zero":
            return grid.zeros()
        if self.kind == "const":
            return np.full(grid.n_nodes, self.amplitude)
        if self.kind == "field":
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != (grid.n_nodes,):
                raise ValueError("forcing field does not match the grid")
            return vals.copy()
        xs = grid.meshes()
        if self.kind == "sine":
            out = np.full(grid.n_nodes, self.amplitude)
            for x, L in zip(xs, grid.lengths):
                out = out * np.sin(np.pi * x / L)
            return out
        # edge: boundary strip of the given width
        dist = np.full(grid.n_nodes, np.inf)
        for x, L in zip(xs, grid.lengths):
            dist = np.minimum(dist, np.minimum(x, L - x))
        return np.where(dist < self.width, self.amplitude, 0.0)


@dataclass(frozen=True)
class BoundaryLift:
    """Time-linear Dirichlet value y(0, t) = rate * t at the left end (1D).

    Realized as the exact ghost-value correction at the boundary-adjacent
    node; only the Stefan similarity benchmark uses it.
    """

    rate: float


@dataclass
class StepCoeffs:
    """Assembled explicit data for one step at the left time node."""

    reaction: np.ndarray
    g: list[np.ndarray] | None
    source: np.ndarray


@dataclass
class Diagnostics:
    """Per-run numerical record (on the run-level time grid)."""

    newton_iters: np.ndarray
    residuals: np.ndarray
    stability_margin: float
    delta: float
    refine_level: int
    mu_sup: float
    cum_source_sq: np.ndarray  # left-endpoint quadrature of |f~|_2^2 at stored nodes
    eps: float


@dataclass
class PathSolution:
    """Trajectories of the transformed state y, the multiplier, and X."""

    grid: Grid
    tg: TimeGrid
    y: np.ndarray      # (N+1, n_nodes)
    eta: np.ndarray    # beta_eps(y), pointwise
    mu: np.ndarray     # mu(t_n, xi)
    diagnostics: Diagnostics

    @property
    def X(self) -> np.ndarray:
        return np.exp(self.mu) * self.y

    @property
    def eta_X(self) -> np.ndarray:
        """Multiplier in original variables, e^mu beta_eps(y)."""
        return np.exp(self.mu) * self.eta


def recover_multiplier(sol: PathSolution) -> np.ndarray:
    """Pointwise beta_eps of the stored trajectory (equals sol.eta)."""
    return penalty.beta_eps(sol.y, sol.diagnostics.eps)


# ---------------------------------------------------------------------------
# linear algebra: (A + diag(d)) x = b with A = I - dt*theta*L fixed


class ImplicitSolver:
    def __init__(self, A: sparse.csr_matrix, dim: int):
        self.A = A.tocsr()
        self.dim = dim
        self.n = A.shape[0]
        if dim == 1:
            self._main = self.A.diagonal().copy()
            self._lower = self.A.diagonal(-1).copy()
            self._upper = self.A.diagonal(1).copy()

    def apply(self, y: np.ndarray) -> np.ndarray:
        return self.A @ y

    def solve(self, extra_diag: np.ndarray, b: np.ndarray, x0=None) -> np.ndarray:
        if self.dim == 1:
            ab = np.zeros((3, self.n))
            ab[0, 1:] = self._upper
            ab[1] = self._main + extra_diag
            ab[2, :-1] = self._lower
            return solve_banded((1, 1), ab, b)
        M = self.A.copy()
        M.setdiag(M.diagonal() + extra_diag)
        x, info = sparse_cg(M, b, x0=x0, rtol=1e-12, atol=0.0, maxiter=20 * self.n)
        if info != 0:
            raise NumericalFailure(f"conjugate gradients failed to converge (info={info})")
        return x


def build_implicit_solver(grid: Grid, dt: float, theta: float,
                          extra_linear_diag: np.ndarray | None = None) -> ImplicitSolver:
    L = gridmod.laplacian_csr(grid)
    A = sparse.identity(grid.n_nodes, format="csr") - (dt * theta) * L
    if extra_linear_diag is not None:
        A = A + sparse.diags(extra_linear_diag)
    return ImplicitSolver(A.tocsr(), grid.dim)


def newton_penalized_solve(
    solver: ImplicitSolver,
    rhs: np.ndarray,
    dt_scale: np.ndarray,
    eps: float,
    y_init: np.ndarray,
    newton_tol: float,
    newton_max: int,
    linear_diag: np.ndarray | None = None,
):
    """Solve  (A + diag(linear_diag)) y + dt_scale * beta_eps(y) = rhs  by
    active-set Newton.

    dt_scale is the per-node nonnegative coefficient in front of the
    penalty (dt for the interior obstacle; the boundary geometric factor
    for Signorini, zero elsewhere).  Finite termination: the system is
    piecewise linear with a monotone diagonal nonlinearity.
    """
    penalized = dt_scale > 0.0
    active = (y_init < 0.0) & penalized
    y = y_init
    base_diag = linear_diag if linear_diag is not None else 0.0
    for it in range(1, newton_max + 1):
        extra = base_diag + np.where(active, dt_scale / eps, 0.0)
        y = solver.solve(extra, rhs, x0=y)
        new_active = (y < 0.0) & penalized
        resid = solver.apply(y) + base_diag * y + dt_scale * penalty.beta_eps(y, eps) - rhs
        resid_inf = float(np.max(np.abs(resid))) if resid.size else 0.0
        if np.array_equal(new_active, active) and resid_inf <= newton_tol:
            return y, it, resid_inf
        active = new_active
    raise NewtonError(
        f"semismooth Newton did not converge in {newton_max} iterations "
        f"(last residual {resid_inf:.3e})"
    )


# ---------------------------------------------------------------------------
# single step and full march


def _transport(grid: Grid, g: list[np.ndarray] | None, y: np.ndarray) -> np.ndarray:
    if g is None:
        return np.zeros_like(y)
    grads = gridmod.apply_gradient(grid, y)
    out = np.zeros_like(y)
    for ga, dya in zip(g, grads):
        out += ga * dya
    return out


def stability_margin(grid: Grid, g: list[np.ndarray] | None, dt: float) -> float:
    """max over axes of dt * sup|g_a| / h_a; must stay <= 1."""
    if g is None:
        return 0.0
    return max(
        dt * float(np.max(np.abs(ga))) / grid.h[axis] if ga.size else 0.0
        for axis, ga in enumerate(g)
    )


def step_interior(grid: Grid, y_n: np.ndarray, coeffs: StepCoeffs, cfg: SolveConfig,
                  solver: ImplicitSolver | None = None):
    """One theta-step of the penalized interior obstacle problem.

    Returns (y_next, newton_iterations, residual).  Raises StabilityError
    when the explicit transport violates dt * sup|g| / h <= 1.
    """
    if y_n.shape != (grid.n_nodes,):
        raise ValueError("state size mismatch")
    margin = stability_margin(grid, coeffs.g, cfg.dt)
    if margin > 1.0 + 1e-9:
        raise StabilityError(
            f"time step violates the transport restriction: dt*sup|g|/h = {margin:.3f} > 1; "
            f"reduce dt below {cfg.dt / margin:.3e}"
        )
    if solver is None:
        solver = build_implicit_solver(grid, cfg.dt, cfg.theta)
    explicit = (1.0 - cfg.theta) * gridmod.apply_laplacian(grid, y_n) if cfg.theta < 1.0 else 0.0
    rhs = y_n + cfg.dt * (explicit - coeffs.reaction - _transport(grid, coeffs.g, y_n)
                          + coeffs.source)
    dt_scale = np.full(grid.n_nodes, cfg.dt)
    y, iters, resid = newton_penalized_solve(
        solver, rhs, dt_scale, cfg.eps, y_n, cfg.newton_tol, cfg.newton_max
    )
    return y, iters, resid


def _coarsen_to(paths: BrownianPathSet, tg: TimeGrid) -> BrownianPathSet:
    if paths.tg.N % tg.N != 0 or abs(paths.tg.T - tg.T) > 1e-12 * max(1.0, tg.T):
        raise ConfigError(
            f"path set (N={paths.tg.N}, T={paths.tg.T}) is not a refinement of the "
            f"run grid (N={tg.N}, T={tg.T})"
        )
    return paths.coarsen(paths.tg.N // tg.N)


def _transport_sup_bound(cs: CoeffSpec, grid: Grid, paths: BrownianPathSet) -> np.ndarray:
    """Per-axis upper bound of sup_xi |g_a(t_n, xi)| over the path's nodes."""
    if cs.m == 0:
        return np.zeros(grid.dim)
    grad_sup = np.zeros((cs.m, grid.dim))
    for k, c in enumerate(cs.coefficients):
        for axis, comp in enumerate(c.space_grad(grid)):
            grad_sup[k, axis] = np.max(np.abs(comp))
    bounds = np.zeros(grid.dim)
    times = paths.tg.nodes
    for axis in range(grid.dim):
        per_node = np.zeros(times.shape)
        for k, c in enumerate(cs.coefficients):
            a_vals = np.array([abs(c.time.value(t)) for t in times])
            per_node += np.abs(paths.values[k]) * a_vals * grad_sup[k, axis]
        bounds[axis] = 2.0 * per_node.max()
    return bounds


def _pick_refinement(grid: Grid, tg: TimeGrid, cs: CoeffSpec, cfg: SolveConfig,
                     paths: BrownianPathSet) -> tuple[int, BrownianPathSet]:
    """Smallest halving level satisfying the transport guard, or raise."""
    best_margin = np.inf
    for level in range(cfg.max_halvings + 1):
        factor = 2**level
        if (tg.N * factor) > paths.tg.N or paths.tg.N % (tg.N * factor) != 0:
            break
        run_tg = tg.refined(factor)
        run_paths = _coarsen_to(paths, run_tg)
        bounds = _transport_sup_bound(cs, grid, run_paths)
        margin = max(
            (run_tg.dt * b / grid.h[axis] for axis, b in enumerate(bounds)), default=0.0
        )
        best_margin = min(best_margin, margin)
        if margin <= 1.0:
            return level, run_paths
    raise StabilityError(
        f"transport guard dt*sup|g|/h <= 1 unreachable within the retry budget "
        f"(best margin {best_margin:.3f}); supply a finer path set or smaller dt"
    )


def solve_path(
    grid: Grid,
    tg: TimeGrid,
    cs: CoeffSpec,
    rs: ReactionSpec,
    forcing: ForcingSpec,
    x: InitialData | np.ndarray,
    cfg: SolveConfig,
    paths: BrownianPathSet,
    boundary_lift: BoundaryLift | None = None,
) -> PathSolution:
    """March the penalized transformed equation along one Brownian path.

    `paths` must be sampled on `tg` or a refinement of it; retries at
    halved dt restrict the same realization.  The returned trajectories
    live on the nodes of `tg` regardless of the internal refinement.
    """
    if grid.bc_kind != gridmod.DIRICHLET:
        raise ConfigError("solve_path needs a Dirichlet grid")
    if cs.m != paths.m:
        raise ConfigError(f"coefficient count {cs.m} != path component count {paths.m}")
    if boundary_lift is not None and grid.dim != 1:
        raise ConfigError("boundary lift is only supported in 1D")
    if paths.tg.N % tg.N != 0 or abs(paths.tg.T - tg.T) > 1e-12 * max(1.0, tg.T):
        raise ConfigError(
            f"path set (N={paths.tg.N}, T={paths.tg.T}) must be sampled on the run grid "
            f"(N={tg.N}, T={tg.T}) or a refinement of it"
        )

    x_field = x.evaluate(grid) if isinstance(x, InitialData) else np.asarray(x, dtype=float)
    if x_field.shape != (grid.n_nodes,):
        raise ConfigError("initial data does not match the grid")
    if np.min(x_field) < 0:
        raise ConfigError("initial data must be nonnegative")

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
    mu_sup = 0.0
    source_sq = 0.0

    y = x_field.copy()
    f_const = None
    if forcing.kind != "zero":
        f_const = forcing.value(0.0, grid)

    for n in range(run_tg.N + 1):
        t_n = n * dt
        mu_n = noisemod.eval_mu(cs, run_paths, t_n, grid)
        peak = float(np.max(np.abs(mu_n))) if mu_n.size else 0.0
        if peak > cfg.mu_cap:
            raise NumericalFailure(
                f"|mu| reached {peak:.3g} at t={t_n:.4g}, beyond the cap {cfg.mu_cap}"
            )
        mu_sup = max(mu_sup, peak)
        if n % stride == 0:
            k = n // stride
            y_traj[k] = y
            mu_traj[k] = mu_n
            cum_source[k] = source_sq
        if n == run_tg.N:
            break

        if cs.m > 0:
            mt = noisemod.eval_mu_tilde(cs, run_paths, t_n, grid)
            grad_mu, lap_mu, g = noisemod.eval_mu_derivs(cs, run_paths, t_n, grid)
        else:
            mt = grid.zeros()
            grad_mu, lap_mu, g = [grid.zeros() for _ in range(grid.dim)], grid.zeros(), None
        reaction = transform.effective_reaction(rs, mu_n, mt, grad_mu, lap_mu, t_n, y,
                                                mu_cap=cfg.mu_cap)
        if f_const is None:
            f_tilde = grid.zeros()
        elif forcing.transformed:
            f_tilde = f_const
        else:
            f_tilde = transform.effective_source(mu_n, f_const, mu_cap=cfg.mu_cap)
        source_sq += dt * gridmod.inner(grid, f_tilde, f_tilde)

        source = f_tilde
        if boundary_lift is not None:
            lift = grid.zeros()
            t_next = (n + 1) * dt
            g_val = cfg.theta * boundary_lift.rate * t_next \
                + (1.0 - cfg.theta) * boundary_lift.rate * t_n
            lift[0] = g_val / grid.h[0] ** 2
            source = source + lift

        coeffs = StepCoeffs(reaction=reaction, g=g, source=source)
        worst_margin = max(worst_margin, stability_margin(grid, g, dt))
        y, it, resid = step_interior(grid, y, coeffs, run_cfg, solver=solver)
        iters[n] = it
        resids[n] = resid

    diag = Diagnostics(
        newton_iters=iters,
        residuals=resids,
        stability_margin=worst_margin,
        delta=noisemod.path_sup(run_paths),
        refine_level=level,
        mu_sup=mu_sup,
        cum_source_sq=cum_source,
        eps=cfg.eps,
    )
    eta = penalty.beta_eps(y_traj, cfg.eps)
    return PathSolution(grid=grid, tg=tg, y=y_traj, eta=eta, mu=mu_traj, diagnostics=diag)


def direct_em_solve(
    grid: Grid,
    tg: TimeGrid,
    cs: CoeffSpec,
    rs: ReactionSpec,
    forcing: ForcingSpec,
    x: InitialData | np.ndarray,
    cfg: SolveConfig,
    paths: BrownianPathSet,
) -> PathSolution:
    """Euler-Maruyama on the original equation: implicit Laplacian, explicit
    reaction and penalty, noise X_n * sum_k mu_k(t_n) dbeta_k(n) at the left
    endpoint.  Shares the Brownian increments of solve_path when handed the
    same path set."""
    if grid.bc_kind != gridmod.DIRICHLET:
        raise ConfigError("direct_em_solve needs a Dirichlet grid")
    if cs.m != paths.m:
        raise ConfigError(f"coefficient count {cs.m} != path component count {paths.m}")
    x_field = x.evaluate(grid) if isinstance(x, InitialData) else np.asarray(x, dtype=float)
    if np.min(x_field) < 0:
        raise ConfigError("initial data must be nonnegative")

    run_paths = _coarsen_to(paths, tg)
    dt = tg.dt
    solver = build_implicit_solver(grid, dt, cfg.theta)
    no_penalty = np.zeros(grid.n_nodes)

    X_traj = np.zeros((tg.N + 1, grid.n_nodes))
    mu_traj = np.zeros((tg.N + 1, grid.n_nodes))
    X = x_field.copy()
    f_const = forcing.value(0.0, grid) if forcing.kind != "zero" else None
    if forcing.transformed:
        raise ConfigError("direct_em_solve integrates the original equation; "
                          "forcing must live in the original variables")

    mu_fields = [c.space_value(grid) for c in cs.coefficients]
    for n in range(tg.N + 1):
        t_n = n * dt
        X_traj[n] = X
        mu_traj[n] = noisemod.eval_mu(cs, run_paths, t_n, grid)
        if n == tg.N:
            break
        explicit = (1.0 - cfg.theta) * gridmod.apply_laplacian(grid, X) if cfg.theta < 1.0 else 0.0
        drift = explicit - rs.value(t_n, X) - penalty.beta_eps(X, cfg.eps)
        if f_const is not None:
            drift = drift + f_const
        noise_term = np.zeros(grid.n_nodes)
        for k, b in enumerate(mu_fields):
            noise_term += run_paths.increments[k, n] * cs.coefficients[k].time.value(t_n) * b
        rhs = X + dt * drift + X * noise_term
        X, _, _ = newton_penalized_solve(solver, rhs, no_penalty, cfg.eps, X,
                                         max(cfg.newton_tol, 1e-12), cfg.newton_max)

    mu_cap_guard = float(np.max(np.abs(mu_traj))) if mu_traj.size else 0.0
    if mu_cap_guard > cfg.mu_cap:
        raise NumericalFailure(f"|mu| reached {mu_cap_guard:.3g}, beyond the cap {cfg.mu_cap}")
    y_traj = np.exp(-mu_traj) * X_traj
    diag = Diagnostics(
        newton_iters=np.ones(tg.N, dtype=int),
        residuals=np.zeros(tg.N),
        stability_margin=0.0,
        delta=noisemod.path_sup(run_paths),
        refine_level=0,
        mu_sup=mu_cap_guard,
        cum_source_sq=np.zeros(tg.N + 1),
        eps=cfg.eps,
    )
    eta = penalty.beta_eps(y_traj, cfg.eps)
    return PathSolution(grid=grid, tg=tg, y=y_traj, eta=eta, mu=mu_traj, diagnostics=diag)


# ---------------------------------------------------------------------------
# picklable problem description for ensembles and studies


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed to reproduce one path-wise solve, picklable so
    ensembles can be distributed across worker processes."""

    dim: int = 1
    lengths: tuple[float, ...] = (1.0,)
    n: int = 63
    bc_kind: str = gridmod.DIRICHLET
    T: float = 0.25
    n_steps: int = 250
    theta: float = 1.0
    coefficients: tuple = ()
    seed: int = 0
    reaction: ReactionSpec = dc_field(default_factory=ReactionSpec)
    forcing: ForcingSpec = dc_field(default_factory=ForcingSpec)
    initial: InitialData = dc_field(default_factory=InitialData)
    eps: float = 1e-3
    newton_tol: float = 1e-10
    newton_max: int = 200
    mu_cap: float = 30.0
    headroom: int = 8

    def build(self):
        g = gridmod.build_grid(self.dim, list(self.lengths), self.n, self.bc_kind)
        tg = TimeGrid(self.T, self.n_steps)
        cs = CoeffSpec(tuple(self.coefficients))
        cfg = SolveConfig(tg.dt, self.T, self.theta, self.eps, self.newton_tol,
                          self.newton_max, self.mu_cap)
        return g, tg, cs, cfg

    def sample(self, path_id: int) -> BrownianPathSet:
        tg = TimeGrid(self.T, self.n_steps * self.headroom)
        return noisemod.sample_paths(tg, len(self.coefficients), self.seed, path_id)

    def solve(self, path_id: int) -> PathSolution:
        g, tg, cs, cfg = self.build()
        paths = self.sample(path_id)
        if self.bc_kind == gridmod.NEUMANN:
            from .signorini import solve_signorini_path

            return solve_signorini_path(g, tg, cs, self.reaction, self.forcing,
                                        self.initial, cfg, paths)
        return solve_path(g, tg, cs, self.reaction, self.forcing, self.initial, cfg, paths)
