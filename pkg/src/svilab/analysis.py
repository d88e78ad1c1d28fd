"""Numerical verification of everything the theory asserts: complementarity
of the recovered pair, path-wise energy bounds, the penalization Cauchy
rate, and Monte Carlo ensembles of path functionals.

Space-time norms use left-endpoint time quadrature, matching the explicit
side of the scheme; all reports are deterministic functions of the
trajectories.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import grid as gridmod
from .errors import NumericalFailure
from .grid import Grid
from .noise import TimeGrid
from .pathsolver import InitialData, PathSolution, ProblemSpec, solve_path
from .penalty import beta_eps

ENERGY_SLACK_DEFAULT = 10.0

FUNCTIONAL_NAMES = (
    "sup_y_l2_sq",
    "int_h1_sq",
    "int_beta_sq",
    "int_lap_sq",
    "delta_sq",
    "int_dydt_l2",
    "int_dydt_l2_sq",
    "energy_ratio",
    "multiplier_ratio",
)


# ---------------------------------------------------------------------------
# complementarity


@dataclass
class ComplementarityReport:
    """Pointwise complementarity of (X, eta) with the eta <= 0 convention.

    pairing is the space-time integral of X * (-eta); eta_flipped is -eta's
    extreme so either sign convention can be read off.
    """

    min_X: float
    max_eta: float
    pairing: float
    min_X_per_t: np.ndarray
    max_eta_per_t: np.ndarray
    pairing_per_t: np.ndarray
    t_of_min_X: float
    eta_flipped_min: float

    def passes(self, tol_X: float, tol_eta: float, tol_pair: float) -> bool:
        return (
            self.min_X >= -tol_X
            and self.max_eta <= tol_eta
            and abs(self.pairing) <= tol_pair
        )


def complementarity_report(traj_X: np.ndarray, traj_eta: np.ndarray,
                           grid: Grid, tg: TimeGrid) -> ComplementarityReport:
    if traj_X.shape != traj_eta.shape or traj_X.shape[0] != tg.N + 1:
        raise ValueError("trajectories are not aligned")
    min_per_t = traj_X.min(axis=1)
    max_eta_per_t = traj_eta.max(axis=1)
    pair_fields = traj_X * (-traj_eta)
    pairing_per_t = pair_fields @ grid.weights
    pairing = float(np.sum(pairing_per_t[:-1]) * tg.dt)
    n_min = int(np.argmin(min_per_t))
    return ComplementarityReport(
        min_X=float(min_per_t.min()),
        max_eta=float(max_eta_per_t.max()),
        pairing=pairing,
        min_X_per_t=min_per_t,
        max_eta_per_t=max_eta_per_t,
        pairing_per_t=pairing_per_t,
        t_of_min_X=float(tg.nodes[n_min]),
        eta_flipped_min=float((-traj_eta).min()),
    )


# ---------------------------------------------------------------------------
# energy estimates


@dataclass
class EnergyReport:
    """Discrete analogues of the a-priori bounds on one path.

    energy_ratio: max over time of [ |y(t)|_2^2 + int_0^t ||y||_{H1_0}^2 ]
    over [ |x|_2^2 + int_0^t |f~|_2^2 + delta^2 ].  multiplier_ratio bounds
    int (|beta_eps(y)|_2^2 + |lap y|_2^2) by the same data augmented with
    the initial datum's H1 norm (the constant in the estimate absorbs x).
    """

    energy_ratio: float
    multiplier_ratio: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.energy_ratio <= self.slack and self.multiplier_ratio <= self.slack


def _ratio(num: np.ndarray, den: np.ndarray) -> float:
    out = 0.0
    for a, b in zip(num, den):
        if a <= 1e-300:
            continue
        if b <= 0.0:
            return np.inf
        out = max(out, a / b)
    return out


def energy_check(sol: PathSolution, x, f=None, delta: float | None = None,
                 slack: float = ENERGY_SLACK_DEFAULT) -> EnergyReport:
    g = sol.grid
    tg = sol.tg
    x_field = x.evaluate(g) if isinstance(x, InitialData) else np.asarray(x, dtype=float)
    if delta is None:
        delta = sol.diagnostics.delta
    dt = tg.dt
    n_nodes = tg.N + 1

    y_sq = np.array([gridmod.inner(g, sol.y[n], sol.y[n]) for n in range(n_nodes)])
    h1_sq = np.array([gridmod.seminorm_h1(g, sol.y[n]) ** 2 for n in range(n_nodes)])
    cum_h1 = np.concatenate([[0.0], np.cumsum(h1_sq[:-1]) * dt])

    source_sq = sol.diagnostics.cum_source_sq
    if f is not None and not np.any(source_sq):
        # fallback for externally built trajectories: rebuild e^{-mu} f
        vals = np.zeros(n_nodes)
        acc = 0.0
        for n in range(n_nodes):
            vals[n] = acc
            if n < tg.N:
                f_n = f.value(tg.nodes[n], g)
                if not f.transformed:
                    f_n = np.exp(-sol.mu[n]) * f_n
                acc += dt * gridmod.inner(g, f_n, f_n)
        source_sq = vals

    x_sq = gridmod.inner(g, x_field, x_field)
    lhs = y_sq + cum_h1
    rhs = x_sq + source_sq + delta**2
    energy_ratio = _ratio(lhs, np.broadcast_to(np.atleast_1d(rhs), lhs.shape))

    eta_sq = np.array([gridmod.inner(g, sol.eta[n], sol.eta[n]) for n in range(n_nodes)])
    lap_sq = np.array(
        [gridmod.inner(g, lap := gridmod.apply_laplacian(g, sol.y[n]), lap)
         for n in range(n_nodes)]
    )
    cum_mult = np.concatenate([[0.0], np.cumsum((eta_sq + lap_sq)[:-1]) * dt])
    x_h1 = gridmod.seminorm_h1(g, x_field) ** 2
    rhs_mult = source_sq + tg.nodes * delta**2 + x_sq + x_h1
    multiplier_ratio = _ratio(cum_mult, rhs_mult)

    return EnergyReport(energy_ratio=energy_ratio, multiplier_ratio=multiplier_ratio,
                        slack=slack)


# ---------------------------------------------------------------------------
# penalization Cauchy rate


@dataclass
class RateFit:
    """Log-log fit of errors against a swept parameter."""

    eps: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    fit_residual: float
    degenerate: bool = False

    def __post_init__(self):
        if not np.all(np.diff(self.eps) < 0):
            raise ValueError("eps values must be strictly decreasing")
        if not self.degenerate and np.any(self.errors <= 0):
            raise ValueError("errors must be positive for a rate fit")


def fit_rate(eps: np.ndarray, errors: np.ndarray) -> RateFit:
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.all(errors <= 1e-14):
        return RateFit(eps, errors, np.nan, np.nan, 0.0, degenerate=True)
    le, lv = np.log(eps), np.log(errors)
    slope, intercept = np.polyfit(le, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * le + intercept)) ** 2)))
    return RateFit(eps, errors, float(slope), float(intercept), resid)


def cauchy_rate_study(spec: ProblemSpec, eps_list, path_id: int = 0) -> RateFit:
    """Errors against the reference solve at eps_min/4 on one shared path.

    All member solves share the Brownian realization and the time step; the
    sup-in-time L2 distance to the reference is fitted log-log in eps.
    """
    eps_arr = np.array(sorted(set(float(e) for e in eps_list), reverse=True))
    if len(eps_arr) < 4:
        raise ValueError(f"need at least 4 eps values, got {len(eps_arr)}")
    g, tg, cs, cfg = spec.build()
    paths = spec.sample(path_id)

    def run(eps):
        return solve_path(g, tg, cs, spec.reaction, spec.forcing, spec.initial,
                          cfg.with_eps(eps), paths)

    ref = run(eps_arr[-1] / 4.0)
    errors = np.empty(len(eps_arr))
    for i, eps in enumerate(eps_arr):
        sol = run(eps)
        diffs = sol.y - ref.y
        errors[i] = max(
            np.sqrt(gridmod.inner(g, d, d)) for d in diffs
        )
    return fit_rate(eps_arr, errors)


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class FunctionalStats:
    mean: float
    variance: float
    ci_half_width: float


@dataclass
class EnsembleStats:
    """Per-functional Monte Carlo statistics over path_id = 0..n_paths-1."""

    n_paths: int
    n_failures: int
    stats: dict[str, FunctionalStats]
    empirical_C: dict[str, float] = field(default_factory=dict)

    @property
    def failure_fraction(self) -> float:
        total = self.n_paths + self.n_failures
        return self.n_failures / total if total else 0.0

    @property
    def passed(self) -> bool:
        return self.n_paths >= 1 and self.failure_fraction <= 0.10


def path_functionals(sol: PathSolution, x, slack: float = ENERGY_SLACK_DEFAULT) -> dict:
    """The monitored functionals of one trajectory (left-endpoint quadrature)."""
    g, tg = sol.grid, sol.tg
    dt = tg.dt
    y_sq = np.array([gridmod.inner(g, sol.y[n], sol.y[n]) for n in range(tg.N + 1)])
    h1_sq = np.array([gridmod.seminorm_h1(g, sol.y[n]) ** 2 for n in range(tg.N)])
    eta_sq = np.array([gridmod.inner(g, sol.eta[n], sol.eta[n]) for n in range(tg.N)])
    lap_sq = np.array(
        [gridmod.inner(g, lap := gridmod.apply_laplacian(g, sol.y[n]), lap)
         for n in range(tg.N)]
    )
    dydt = np.diff(sol.y, axis=0) / dt
    dydt_l2 = np.array([np.sqrt(gridmod.inner(g, z, z)) for z in dydt])
    report = energy_check(sol, x, slack=slack)
    return {
        "sup_y_l2_sq": float(y_sq.max()),
        "int_h1_sq": float(h1_sq.sum() * dt),
        "int_beta_sq": float(eta_sq.sum() * dt),
        "int_lap_sq": float(lap_sq.sum() * dt),
        "delta_sq": sol.diagnostics.delta ** 2,
        "int_dydt_l2": float(dydt_l2.sum() * dt),
        "int_dydt_l2_sq": float((dydt_l2**2).sum() * dt),
        "energy_ratio": report.energy_ratio,
        "multiplier_ratio": report.multiplier_ratio,
    }


def _ensemble_worker(args):
    spec, path_id = args
    try:
        sol = spec.solve(path_id)
    except NumericalFailure as exc:
        return path_id, None, str(exc)
    return path_id, path_functionals(sol, spec.initial), None


def ensemble_run(spec: ProblemSpec, n_paths: int, base_seed: int | None = None,
                 functionals=None, workers: int = 1) -> EnsembleStats:
    """Monte Carlo over paths; failures are excluded and counted, and more
    than 10% of them marks the whole run as failed (stats still reported).
    Reduction is keyed by path_id, so the worker count never changes the
    result."""
    if n_paths < 2:
        raise ValueError(f"ensemble needs n_paths >= 2, got {n_paths}")
    if base_seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=int(base_seed))
    names = tuple(functionals) if functionals else FUNCTIONAL_NAMES
    unknown = set(names) - set(FUNCTIONAL_NAMES)
    if unknown:
        raise ValueError(f"unknown functionals {sorted(unknown)}; "
                         f"catalog: {FUNCTIONAL_NAMES}")

    jobs = [(spec, pid) for pid in range(n_paths)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_ensemble_worker, jobs, chunksize=8))
    else:
        results = [_ensemble_worker(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    rows = [vals for _, vals, err in results if vals is not None]
    n_fail = sum(1 for _, vals, _ in results if vals is None)
    n_ok = len(rows)
    stats = {}
    for name in names:
        if n_ok == 0:
            stats[name] = FunctionalStats(np.nan, np.nan, np.nan)
            continue
        data = np.array([r[name] for r in rows])
        mean = float(data.mean())
        var = float(data.var(ddof=1)) if n_ok > 1 else 0.0
        stats[name] = FunctionalStats(mean, var, 1.96 * np.sqrt(var / n_ok))

    # empirical constant of the moment bound: mean / (|x|^2 + int |f|^2),
    # with the deterministic catalog forcing (time-constant)
    empirical = {}
    if n_ok:
        g, tg, _, _ = spec.build()
        x_field = spec.initial.evaluate(g)
        f_field = spec.forcing.value(0.0, g)
        denom = gridmod.inner(g, x_field, x_field) + tg.T * gridmod.inner(g, f_field, f_field)
        if denom > 0:
            for name in names:
                if name.startswith(("sup_", "int_")):
                    empirical[name] = stats[name].mean / denom
    return EnsembleStats(n_paths=n_ok, n_failures=n_fail, stats=stats,
                         empirical_C=empirical)
