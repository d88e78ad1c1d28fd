"""The obstacle graph, its resolvent, and the penalization.

The graph is the maximal monotone map with value 0 on the positive axis,
the whole negative half-line at 0, and empty below.  Its resolvent is the
projection onto [0, inf) and the penalization is

    beta_eps(r) = (r - max(r, 0)) / eps = min(r, 0) / eps,

with convex potential j_eps(r) = min(r, 0)^2 / (2 eps).  All functions
accept scalars or arrays.
"""

from __future__ import annotations

import numpy as np


def resolvent(r, eps: float):
    """Projection (1 + eps*graph)^{-1} r = max(r, 0)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return np.maximum(r, 0.0)


def beta_eps(r, eps: float):
    """Penalized graph: min(r, 0)/eps; zero for r >= 0."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return np.minimum(r, 0.0) / eps


def j_eps(r, eps: float):
    """Potential of beta_eps: min(r, 0)^2 / (2 eps)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return np.minimum(r, 0.0) ** 2 / (2.0 * eps)


def graph_contains(r: float, eta: float, tol_r: float = 0.0, tol_eta: float = 0.0) -> bool:
    """Membership test for the graph: (r > 0, eta = 0) or (r = 0, eta <= 0).

    The graph is empty for r < 0.  Optional tolerances loosen the test for
    numerically recovered pairs.
    """
    if r > tol_r:
        return abs(eta) <= tol_eta
    if r >= -tol_r:
        return eta <= tol_eta
    return False
