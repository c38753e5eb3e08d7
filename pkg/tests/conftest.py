"""Shared test helpers: a brute-force vertex-enumeration LP oracle."""

from itertools import combinations

import numpy as np


def vertex_enumeration_max(objective, constraints, rhs):
    """Exhaustive optimum of max c@x s.t. Ax <= b, x >= 0.

    Enumerates every basic point (intersection of n active constraints from
    the inequality rows and the nonnegativity bounds), keeps the feasible
    ones, and returns (best value, argmax), or None when no feasible vertex
    exists.  Only usable for a handful of variables; intended as an
    independent oracle for the simplex implementation.
    """
    a = np.asarray(constraints, dtype=float)
    b = np.asarray(rhs, dtype=float)
    c = np.asarray(objective, dtype=float)
    m, n = a.shape
    stacked = np.vstack([a, -np.eye(n)])
    bounds = np.concatenate([b, np.zeros(n)])
    best = None
    for rows in combinations(range(m + n), n):
        sub = stacked[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, bounds[list(rows)])
        if np.all(stacked @ x <= bounds + 1e-9):
            val = float(c @ x)
            if best is None or val > best[0]:
                best = (val, x)
    return best
