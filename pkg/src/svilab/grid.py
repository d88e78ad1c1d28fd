"""Uniform tensor grids on an interval or rectangle, with the discrete
operators used everywhere else: second-order Laplacian and gradient,
weighted quadrature norms, and boundary traces.

Two boundary flavours are supported.  Dirichlet grids hold interior nodes
only and the Laplacian uses ghost value 0.  Neumann grids include boundary
nodes, the Laplacian reflects across the boundary, and quadrature weights
are halved at boundary nodes so that the weighted Laplacian is exactly
symmetric and the discrete divergence theorem holds (mass conservation to
machine precision for the pure reflected operator).

Fields are flat float arrays of length ``grid.n_nodes`` in C order of the
per-axis index.  Vector fields are lists with one field per axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


@dataclass(frozen=True)
class Grid:
    """Spatial discretization of the domain with boundary metadata.

    Attributes:
        dim: 1 or 2.
        lengths: domain extent per axis.
        n: unknown count per axis (interior nodes for Dirichlet, all nodes
           for Neumann).
        bc_kind: DIRICHLET or NEUMANN.
        h: spacing per axis.
        coords: strictly increasing node positions per axis.
        weights: quadrature weight per node (flat, product of axis weights).
        boundary_mask: flat flag, True on boundary nodes (all False for
            Dirichlet grids, whose unknowns are interior).
    """

    dim: int
    lengths: tuple[float, ...]
    n: int
    bc_kind: str
    h: np.ndarray = field(repr=False)
    coords: tuple[np.ndarray, ...] = field(repr=False)
    weights: np.ndarray = field(repr=False)
    boundary_mask: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def n_nodes(self) -> int:
        return self.n**self.dim

    @property
    def h_min(self) -> float:
        return float(self.h.min())

    def reshape(self, u: np.ndarray) -> np.ndarray:
        if u.shape != (self.n_nodes,):
            raise ValueError(f"field has shape {u.shape}, grid expects ({self.n_nodes},)")
        return u.reshape(self.shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_nodes)

    def meshes(self) -> list[np.ndarray]:
        """Node coordinates per axis, each flattened to field layout."""
        grids = np.meshgrid(*self.coords, indexing="ij")
        return [g.reshape(-1) for g in grids]

    def axis_weights(self, axis: int) -> np.ndarray:
        w = np.full(self.n, self.h[axis])
        if self.bc_kind == NEUMANN:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w


def build_grid(dim: int, lengths, n: int, bc_kind: str = DIRICHLET) -> Grid:
    """Build a uniform tensor grid.

    Dirichlet axes: n interior nodes, h = L/(n+1), nodes at h..n*h.
    Neumann axes: n nodes including both boundary points, h = L/(n-1).
    """
    errors = []
    if dim not in (1, 2):
        errors.append(f"dim must be 1 or 2, got {dim}")
    lengths = tuple(float(L) for L in np.atleast_1d(lengths))
    if dim in (1, 2) and len(lengths) != dim:
        errors.append(f"expected {dim} length(s), got {len(lengths)}")
    if any(L <= 0 for L in lengths):
        errors.append(f"lengths must be positive, got {lengths}")
    if n < 3:
        errors.append(f"n must be >= 3, got {n}")
    if bc_kind not in (DIRICHLET, NEUMANN):
        errors.append(f"bc_kind must be '{DIRICHLET}' or '{NEUMANN}', got {bc_kind!r}")
    if errors:
        raise ConfigError(errors)

    if bc_kind == DIRICHLET:
        h = np.array([L / (n + 1) for L in lengths])
        coords = tuple(np.linspace(hx, L - hx, n) for hx, L in zip(h, lengths))
    else:
        h = np.array([L / (n - 1) for L in lengths])
        coords = tuple(np.linspace(0.0, L, n) for L in lengths)

    axis_w = []
    for axis in range(dim):
        w = np.full(n, h[axis])
        if bc_kind == NEUMANN:
            w[0] *= 0.5
            w[-1] *= 0.5
        axis_w.append(w)
    weights = axis_w[0]
    for w in axis_w[1:]:
        weights = np.multiply.outer(weights, w)
    weights = weights.reshape(-1)

    mask = np.zeros((n,) * dim, dtype=bool)
    if bc_kind == NEUMANN:
        for axis in range(dim):
            idx = [slice(None)] * dim
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = n - 1
            mask[tuple(idx)] = True

    return Grid(
        dim=dim,
        lengths=lengths,
        n=n,
        bc_kind=bc_kind,
        h=h,
        coords=coords,
        weights=weights,
        boundary_mask=mask.reshape(-1),
    )


def _pad(grid: Grid, U: np.ndarray) -> np.ndarray:
    if grid.bc_kind == DIRICHLET:
        return np.pad(U, 1, mode="constant")
    # reflect across the boundary node: ghost mirrors the first interior node
    return np.pad(U, 1, mode="reflect")


def apply_laplacian(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Second-order centered Laplacian with the grid's ghost convention."""
    U = grid.reshape(u)
    P = _pad(grid, U)
    out = np.zeros_like(U)
    core = (slice(1, -1),) * grid.dim
    for axis in range(grid.dim):
        lo = list(core)
        hi = list(core)
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        out += (P[tuple(lo)] - 2.0 * U + P[tuple(hi)]) / grid.h[axis] ** 2
    return out.reshape(-1)


def apply_gradient(grid: Grid, u: np.ndarray) -> list[np.ndarray]:
    """Centered gradient, second-order one-sided at the outermost nodes."""
    U = grid.reshape(u)
    comps = []
    for axis in range(grid.dim):
        g = np.zeros_like(U)
        h = grid.h[axis]
        sl = lambda a, b=None: tuple(
            slice(a, b) if ax == axis else slice(None) for ax in range(grid.dim)
        )
        g[sl(1, -1)] = (U[sl(2, None)] - U[sl(0, -2)]) / (2.0 * h)
        g[sl(0, 1)] = (-3.0 * U[sl(0, 1)] + 4.0 * U[sl(1, 2)] - U[sl(2, 3)]) / (2.0 * h)
        g[sl(-1, None)] = (3.0 * U[sl(-1, None)] - 4.0 * U[sl(-2, -1)] + U[sl(-3, -2)]) / (2.0 * h)
        comps.append(g.reshape(-1))
    return comps


def inner(grid: Grid, u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape or u.shape != (grid.n_nodes,):
        raise ValueError("field size mismatch in inner product")
    return float(np.sum(grid.weights * u * v))


def norm_l2(grid: Grid, u: np.ndarray) -> float:
    return float(np.sqrt(inner(grid, u, u)))


def stiffness_inner(grid: Grid, u: np.ndarray, v: np.ndarray) -> float:
    """Edge-difference quadrature of the Dirichlet form, integral of
    grad u . grad v.

    Consistent with the Laplacian: stiffness_inner(u, v) equals
    -inner(lap u, v) exactly, for either boundary kind.  Dirichlet grids
    include the edges to the zero ghost values.
    """
    if u.shape != v.shape or u.shape != (grid.n_nodes,):
        raise ValueError("field size mismatch in stiffness form")
    U = grid.reshape(u)
    V = grid.reshape(v)
    total = 0.0
    for axis in range(grid.dim):
        if grid.bc_kind == DIRICHLET:
            pad = [(1, 1) if ax == axis else (0, 0) for ax in range(grid.dim)]
            Ua, Va = np.pad(U, pad), np.pad(V, pad)
        else:
            Ua, Va = U, V
        du = np.diff(Ua, axis=axis) / grid.h[axis]
        dv = np.diff(Va, axis=axis) / grid.h[axis]
        # transverse trapezoid weights, edge length h along the axis
        w = grid.h[axis] * np.ones(du.shape)
        for ax in range(grid.dim):
            if ax == axis:
                continue
            tw = grid.axis_weights(ax)
            shape = [1] * grid.dim
            shape[ax] = grid.n
            w = w * tw.reshape(shape)
        total += float(np.sum(w * du * dv))
    return total


def seminorm_h1(grid: Grid, u: np.ndarray) -> float:
    """Discrete H1 seminorm, the square root of the Dirichlet form."""
    return float(np.sqrt(max(stiffness_inner(grid, u, u), 0.0)))


def boundary_weights(grid: Grid) -> np.ndarray:
    """Boundary quadrature weight per node (flat; zero off the boundary).

    1D boundary points carry weight 1 (counting measure); 2D edges carry
    trapezoid weights along the edge, corners get (hx + hy)/2.
    """
    w = np.zeros(grid.shape)
    if grid.bc_kind == DIRICHLET:
        return w.reshape(-1)
    for axis in range(grid.dim):
        transverse = np.ones((grid.n,) * (grid.dim - 1)) if grid.dim > 1 else 1.0
        if grid.dim == 2:
            other = 1 - axis
            transverse = grid.axis_weights(other)
        for side in (0, -1):
            idx = [slice(None)] * grid.dim
            idx[axis] = side
            w[tuple(idx)] += transverse
    return w.reshape(-1)


def boundary_norm_l2(grid: Grid, u: np.ndarray) -> float:
    """L2 norm of the boundary trace; zero on Dirichlet grids."""
    if u.shape != (grid.n_nodes,):
        raise ValueError("field size mismatch in boundary norm")
    bw = boundary_weights(grid)
    return float(np.sqrt(np.sum(bw * u * u)))


def laplacian_csr(grid: Grid):
    """Sparse matrix of apply_laplacian (reflected ghosts for Neumann)."""
    from scipy import sparse

    n = grid.n
    blocks = []
    for axis in range(grid.dim):
        main = np.full(n, -2.0)
        off_lo = np.ones(n - 1)
        off_hi = np.ones(n - 1)
        if grid.bc_kind == NEUMANN:
            off_hi[0] = 2.0  # ghost reflection doubles the inward neighbour
            off_lo[-1] = 2.0
        T = sparse.diags([off_lo, main, off_hi], [-1, 0, 1]) / grid.h[axis] ** 2
        blocks.append(T)
    if grid.dim == 1:
        return blocks[0].tocsr()
    from scipy.sparse import identity, kron

    eye = identity(n)
    return (kron(blocks[0], eye) + kron(eye, blocks[1])).tocsr()
