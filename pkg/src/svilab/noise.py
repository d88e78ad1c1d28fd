"""Brownian driving system and the noise coefficient catalog.

Paths are sampled from counter-based Philox streams keyed on
(seed, path_id, k), so distinct Brownian components and distinct paths are
independent and any subset can be regenerated reproducibly, in parallel.

Each coefficient is a separable product mu_k(t, xi) = a_k(t) * b_k(xi)
(one spatial factor per axis in 2D) drawn from a closed catalog with
analytic time derivative, gradient, and Laplacian, so the transformed
equation's coefficients are exact in space.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import Grid

__all__ = [
    "TimeGrid",
    "BrownianPathSet",
    "TimeFactor",
    "SpaceFactor",
    "Coefficient",
    "CoeffSpec",
    "sample_paths",
    "eval_mu",
    "eval_mu_tilde",
    "eval_mu_derivs",
    "path_sup",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into N steps."""

    T: float
    N: int

    def __post_init__(self):
        if self.T <= 0 or self.N < 1:
            raise ConfigError(f"time grid needs T > 0 and N >= 1, got T={self.T}, N={self.N}")

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N + 1)

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.T, self.N * factor)


@dataclass(frozen=True)
class BrownianPathSet:
    """Sampled values beta_k(t_n) and increments for one realization.

    values has shape (m, N+1) with values[:, 0] = 0; increments holds the
    exact differences values[:, n+1] - values[:, n].
    """

    tg: TimeGrid
    m: int
    seed: int
    path_id: int
    values: np.ndarray
    increments: np.ndarray

    def coarsen(self, factor: int) -> "BrownianPathSet":
        """Restrict the same realization to a time grid coarser by `factor`.

        Values are strided (exact), increments re-derived as differences,
        so the coarse set is the identical path evaluated on fewer nodes.
        """
        if factor == 1:
            return self
        if self.tg.N % factor != 0:
            raise ValueError(f"cannot coarsen N={self.tg.N} by factor {factor}")
        vals = np.ascontiguousarray(self.values[:, ::factor])
        return BrownianPathSet(
            tg=TimeGrid(self.tg.T, self.tg.N // factor),
            m=self.m,
            seed=self.seed,
            path_id=self.path_id,
            values=vals,
            increments=np.diff(vals, axis=1),
        )


def sample_paths(tg: TimeGrid, m: int, seed: int, path_id: int = 0) -> BrownianPathSet:
    """Sample m independent Brownian paths on the nodes of tg.

    Identical arguments give bitwise-identical output.  Component k of path
    path_id comes from the Philox stream keyed (seed, path_id, k).
    """
    if m < 0:
        raise ConfigError(f"m must be >= 0, got {m}")
    values = np.zeros((m, tg.N + 1))
    root = np.sqrt(tg.dt)
    for k in range(m):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(path_id, k))
        rng = np.random.Generator(np.random.Philox(ss))
        inc = root * rng.standard_normal(tg.N)
        values[k, 1:] = np.cumsum(inc)
    return BrownianPathSet(
        tg=tg,
        m=m,
        seed=seed,
        path_id=path_id,
        values=values,
        increments=np.diff(values, axis=1),
    )


def path_sup(paths: BrownianPathSet) -> float:
    """sup over components and grid times of |beta_k(t_n)| (delta of the run)."""
    if paths.m == 0:
        return 0.0
    return float(np.max(np.abs(paths.values)))


# ---------------------------------------------------------------------------
# coefficient catalog


@dataclass(frozen=True)
class TimeFactor:
    """a(t) from the closed catalog: const(c) | linear(c0, c1) | cos(c, omega)."""

    kind: str
    params: tuple[float, ...]

    def value(self, t: float) -> float:
        if self.kind == "const":
            return self.params[0]
        if self.kind == "linear":
            c0, c1 = self.params
            return c0 + c1 * t
        c, om = self.params
        return c * np.cos(om * t)

    def dt_value(self, t: float) -> float:
        if self.kind == "const":
            return 0.0
        if self.kind == "linear":
            return self.params[1]
        c, om = self.params
        return -c * om * np.sin(om * t)


@dataclass(frozen=True)
class SpaceFactor:
    """b(xi) on one axis: const(c) | poly(c0,c1,c2) | sin(mode) | cos(mode).

    Modes are sin(m*pi*xi/L) and cos(m*pi*xi/L) for the axis length L.
    """

    kind: str
    params: tuple[float, ...]
    length: float = 1.0

    def _freq(self) -> float:
        return self.params[0] * np.pi / self.length

    def value(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.full_like(x, self.params[0])
        if self.kind == "poly":
            c0, c1, c2 = self.params
            return c0 + c1 * x + c2 * x * x
        w = self._freq()
        return np.sin(w * x) if self.kind == "sin" else np.cos(w * x)

    def d1(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.zeros_like(x)
        if self.kind == "poly":
            _, c1, c2 = self.params
            return c1 + 2.0 * c2 * x
        w = self._freq()
        return w * np.cos(w * x) if self.kind == "sin" else -w * np.sin(w * x)

    def d2(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.zeros_like(x)
        if self.kind == "poly":
            return np.full_like(x, 2.0 * self.params[2])
        w = self._freq()
        base = np.sin(w * x) if self.kind == "sin" else np.cos(w * x)
        return -w * w * base


@dataclass(frozen=True)
class Coefficient:
    """One mu_k = a(t) * prod_axes b_axis(xi_axis); C^2 by construction."""

    time: TimeFactor
    space: tuple[SpaceFactor, ...]

    def space_value(self, grid: Grid) -> np.ndarray:
        xs = grid.meshes()
        out = np.ones(grid.n_nodes)
        for b, x in zip(self.space, xs):
            out = out * b.value(x)
        return out

    def space_grad(self, grid: Grid) -> list[np.ndarray]:
        xs = grid.meshes()
        vals = [b.value(x) for b, x in zip(self.space, xs)]
        comps = []
        for axis in range(grid.dim):
            g = self.space[axis].d1(xs[axis])
            for other in range(grid.dim):
                if other != axis:
                    g = g * vals[other]
            comps.append(g)
        return comps

    def space_lap(self, grid: Grid) -> np.ndarray:
        xs = grid.meshes()
        vals = [b.value(x) for b, x in zip(self.space, xs)]
        out = np.zeros(grid.n_nodes)
        for axis in range(grid.dim):
            term = self.space[axis].d2(xs[axis])
            for other in range(grid.dim):
                if other != axis:
                    term = term * vals[other]
            out += term
        return out


@dataclass(frozen=True)
class CoeffSpec:
    """The m noise coefficients; entry k matches Brownian component k."""

    coefficients: tuple[Coefficient, ...]

    @property
    def m(self) -> int:
        return len(self.coefficients)


_FACTOR_RE = re.compile(r"^\s*([a-z]+)\s*\(([^)]*)\)\s*$")

_TIME_ARITY = {"const": 1, "linear": 2, "cos": 2}
_SPACE_ARITY = {"const": 1, "poly": 3, "sin": 1, "cos": 1}


def _parse_factor(text: str, arity: dict, label: str):
    m = _FACTOR_RE.match(text)
    if not m:
        raise ConfigError(f"{label}: cannot parse factor {text!r} (expected kind(args))")
    kind, argstr = m.group(1), m.group(2)
    if kind not in arity:
        raise ConfigError(f"{label}: unknown factor kind {kind!r} (catalog: {sorted(arity)})")
    try:
        params = tuple(float(a) for a in argstr.split(",")) if argstr.strip() else ()
    except ValueError:
        raise ConfigError(f"{label}: non-numeric arguments in {text!r}")
    if len(params) != arity[kind]:
        raise ConfigError(f"{label}: {kind} takes {arity[kind]} argument(s), got {len(params)}")
    return kind, params


def parse_coefficient(text: str, lengths, label: str = "mu") -> Coefficient:
    """Parse 'time_factor * space_factor [* space_factor]' for dim axes.

    Example (1D): 'const(0.5) * sin(1)'; (2D): 'cos(1.0,2.0) * sin(1) * cos(2)'.
    """
    parts = [p for p in text.split("*")]
    dim = len(lengths)
    if len(parts) != 1 + dim:
        raise ConfigError(
            f"{label}: expected 1 time factor and {dim} space factor(s), got {len(parts)} factors"
        )
    tk, tp = _parse_factor(parts[0], _TIME_ARITY, label)
    space = []
    for axis, part in enumerate(parts[1:]):
        sk, sp = _parse_factor(part, _SPACE_ARITY, label)
        space.append(SpaceFactor(sk, sp, float(lengths[axis])))
    return Coefficient(TimeFactor(tk, tp), tuple(space))


# ---------------------------------------------------------------------------
# field evaluation


def _check_m(cs: CoeffSpec, paths: BrownianPathSet):
    if cs.m != paths.m:
        raise ValueError(f"coefficient count {cs.m} does not match path count {paths.m}")


def _time_index(paths: BrownianPathSet, t_n: float) -> int:
    n = int(round(t_n / paths.tg.dt))
    if not (0 <= n <= paths.tg.N) or abs(n * paths.tg.dt - t_n) > 1e-9 * max(1.0, paths.tg.T):
        raise ValueError(f"t={t_n} is not a node of the path time grid")
    return n


def eval_mu(cs: CoeffSpec, paths: BrownianPathSet, t_n: float, grid: Grid) -> np.ndarray:
    """mu(t_n, xi) = sum_k mu_k(t_n, xi) beta_k(t_n)."""
    _check_m(cs, paths)
    n = _time_index(paths, t_n)
    out = grid.zeros()
    for k, c in enumerate(cs.coefficients):
        out += paths.values[k, n] * c.time.value(t_n) * c.space_value(grid)
    return out


def eval_mu_tilde(cs: CoeffSpec, paths: BrownianPathSet, t_n: float, grid: Grid) -> np.ndarray:
    """mu~(t_n, xi) = sum_k (d_t mu_k * beta_k(t_n) + mu_k^2 / 2)."""
    _check_m(cs, paths)
    n = _time_index(paths, t_n)
    out = grid.zeros()
    for k, c in enumerate(cs.coefficients):
        b = c.space_value(grid)
        mu_k = c.time.value(t_n) * b
        out += paths.values[k, n] * c.time.dt_value(t_n) * b + 0.5 * mu_k * mu_k
    return out


def eval_mu_derivs(cs: CoeffSpec, paths: BrownianPathSet, t_n: float, grid: Grid):
    """Analytic (grad mu, lap mu, g = -2 grad mu) at t_n."""
    _check_m(cs, paths)
    n = _time_index(paths, t_n)
    grad = [grid.zeros() for _ in range(grid.dim)]
    lap = grid.zeros()
    for k, c in enumerate(cs.coefficients):
        scale = paths.values[k, n] * c.time.value(t_n)
        if scale == 0.0:
            continue
        for axis, comp in enumerate(c.space_grad(grid)):
            grad[axis] += scale * comp
        lap += scale * c.space_lap(grid)
    g = [-2.0 * comp for comp in grad]
    return grad, lap, g
