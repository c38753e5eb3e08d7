"""Dense linear-program solver for the package's factor-revealing programs.

The programs solved here are small and dense: maximize a linear objective
subject to inequality constraints and nonnegative variables, at most a few
thousand of each.  The built-in solver is a two-phase dense simplex (Dantzig
pricing with a Bland's-rule fallback against cycling, rows equilibrated to
unit max-norm first) so answers are exact vertices — the price atoms we
extract from solutions come out sparse.

``solve`` is the adapter seam: ``backend="auto"`` keeps small problems on the
built-in simplex and routes large ones to SciPy's HiGHS when available, which
is dramatically faster at production grid sizes.  Either
backend can be forced by name.  Results are deterministic for identical
input under a fixed backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from scipy.optimize import linprog as _scipy_linprog
except ImportError:  # pragma: no cover - scipy is a declared dependency
    _scipy_linprog = None

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# Above this many rows or columns, "auto" prefers the HiGHS backend.
AUTO_SIZE_LIMIT = 600

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_FEAS_TOL = 1e-8


@dataclass(frozen=True)
class LpModel:
    """maximize objective @ x  subject to  constraints @ x <= rhs,  x >= 0."""

    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        obj = np.asarray(self.objective, dtype=float)
        a = np.asarray(self.constraints, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", a)
        object.__setattr__(self, "rhs", b)
        if a.ndim != 2 or obj.ndim != 1 or b.ndim != 1:
            raise ValueError("constraints must be 2-d, objective and rhs 1-d")
        if a.shape != (b.size, obj.size):
            raise ValueError(
                f"inconsistent dimensions: A is {a.shape}, expected "
                f"({b.size}, {obj.size})"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(obj)) and np.all(np.isfinite(b))):
            raise ValueError("all model coefficients must be finite")


@dataclass(frozen=True)
class LpSolution:
    status: str
    objective_value: float
    primal: np.ndarray


def solve(model: LpModel, backend: str = "auto") -> LpSolution:
    """Solve the model; see module docstring for backend semantics."""
    if backend == "auto":
        big = max(model.rhs.size, model.objective.size) > AUTO_SIZE_LIMIT
        backend = "scipy" if (big and _scipy_linprog is not None) else "simplex"
    if backend == "scipy":
        if _scipy_linprog is None:
            raise RuntimeError("scipy backend requested but scipy is not installed")
        return _solve_scipy(model)
    if backend == "simplex":
        return _solve_simplex(model)
    raise ValueError(f"unknown backend {backend!r}")


def _solve_scipy(model: LpModel) -> LpSolution:
    a_ub = model.constraints
    if a_ub.size > 250_000:
        # The ratio rows are block-triangular; handing HiGHS a sparse matrix
        # roughly halves the solve time at production grid sizes.
        from scipy.sparse import csr_matrix

        a_ub = csr_matrix(a_ub)
    res = _scipy_linprog(
        c=-model.objective,
        A_ub=a_ub,
        b_ub=model.rhs,
        bounds=(0.0, None),
        method="highs",
    )
    if res.status == 0:
        return LpSolution(OPTIMAL, float(-res.fun), np.asarray(res.x, dtype=float))
    if res.status == 2:
        return LpSolution(INFEASIBLE, float("nan"), np.zeros(model.objective.size))
    if res.status == 3:
        return LpSolution(UNBOUNDED, float("inf"), np.zeros(model.objective.size))
    raise RuntimeError(f"HiGHS failed: status {res.status} ({res.message})")


def _equilibrate(model: LpModel) -> tuple[np.ndarray, np.ndarray]:
    """Scale each row of [A | b] to unit max-norm; leaves x unchanged.

    The bridge-survival coefficients span many orders of magnitude at small
    conversion rates; without scaling the pivot tolerances misfire.
    """
    a = model.constraints.copy()
    b = model.rhs.astype(float).copy()
    norms = np.maximum(np.abs(a).max(axis=1, initial=0.0), np.abs(b))
    norms[norms == 0.0] = 1.0
    return a / norms[:, None], b / norms


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: np.ndarray, ncols: int) -> str:
    """Iterate to optimality on the cost row (last row, minimization form).

    Dantzig pricing, switching to Bland's rule after a stall so degenerate
    instances (every ratio row has zero right-hand side) cannot cycle.
    """
    m = tableau.shape[0] - 1
    dantzig_limit = 20 * (m + ncols)
    iter_cap = 200 * (m + ncols) + 10_000
    for it in range(iter_cap):
        cost = tableau[-1, :ncols]
        if it < dantzig_limit:
            col = int(np.argmin(cost))
            if cost[col] >= -_COST_TOL:
                return OPTIMAL
        else:
            negatives = np.nonzero(cost < -_COST_TOL)[0]
            if negatives.size == 0:
                return OPTIMAL
            col = int(negatives[0])  # Bland: smallest eligible index
        column = tableau[:m, col]
        positive = column > _PIVOT_TOL
        if not np.any(positive):
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[:m, -1][positive] / column[positive]
        best = ratios.min()
        # Tie-break on the lowest basis index (Bland-compatible, deterministic).
        candidates = np.nonzero(ratios <= best + 1e-12)[0]
        row = int(candidates[np.argmin(basis[candidates])])
        _pivot(tableau, basis, row, col)
    raise RuntimeError("simplex iteration limit exceeded")


def _solve_simplex(model: LpModel) -> LpSolution:
    a, b = _equilibrate(model)
    m, n = a.shape
    flip = b < 0.0
    a[flip] *= -1.0
    b[flip] *= -1.0
    slack = np.eye(m)
    slack[flip] *= -1.0

    art_rows = np.nonzero(flip)[0]
    n_art = art_rows.size
    ncols = n + m + n_art
    tableau = np.zeros((m + 1, ncols + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = slack
    for k, r in enumerate(art_rows):
        tableau[r, n + m + k] = 1.0
    tableau[:m, -1] = b
    basis = np.array(
        [n + m + list(art_rows).index(i) if flip[i] else n + i for i in range(m)]
    )

    if n_art:
        # Phase 1: minimize the artificial sum, priced out through its rows.
        tableau[-1, n + m :ncols] = 1.0
        for r in art_rows:
            tableau[-1] -= tableau[r]
        status = _run_simplex(tableau, basis, ncols)
        if status != OPTIMAL or tableau[-1, -1] < -_FEAS_TOL:
            return LpSolution(INFEASIBLE, float("nan"), np.zeros(n))
        # Drive any artificial still in the basis out (degenerate rows).
        for r in range(m):
            if basis[r] >= n + m:
                eligible = np.nonzero(np.abs(tableau[r, : n + m]) > _PIVOT_TOL)[0]
                if eligible.size:
                    _pivot(tableau, basis, r, int(eligible[0]))
        tableau[:, n + m : ncols] = 0.0
        ncols = n + m

    # Phase 2 cost row: minimize -objective, priced through the current basis.
    tableau[-1, :] = 0.0
    tableau[-1, :n] = -model.objective
    for r in range(m):
        if basis[r] < n:
            tableau[-1] -= tableau[-1, basis[r]] * tableau[r]
    status = _run_simplex(tableau, basis, ncols)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, float("inf"), np.zeros(n))

    x = np.zeros(n + m)
    for r in range(m):
        if basis[r] < n + m:
            x[basis[r]] = tableau[r, -1]
    primal = x[:n]
    return LpSolution(OPTIMAL, float(model.objective @ primal), primal)
