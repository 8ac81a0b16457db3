"""Two-phase bounded-variable primal simplex on a dense tableau.

Solves  min c'x  s.t.  A x = b,  l <= x <= u  for small dense problems
(a few hundred variables at most). Returns primal values, equality-row
duals and reduced costs so callers can read marginal prices off the
energy-balance rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinearProgram",
    "LpSolution",
    "SolverOptions",
    "SolverStatus",
    "solve",
]

# nonbasic variable rests at one of its bounds; a doubly-infinite variable
# rests at zero until it enters the basis
_AT_LOWER = 0
_AT_UPPER = 1
_AT_ZERO = 2
_BASIC = 3

_REFACTOR_EVERY = 100


class SolverStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LinearProgram:
    """Dense standard-form LP: min objective'x, eq_matrix x = eq_rhs, lower <= x <= upper."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_labels: tuple[str, ...] = ()

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float).reshape(-1)
        rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        mat = np.asarray(self.eq_matrix, dtype=float)
        if mat.size == 0:
            mat = np.zeros((rhs.shape[0], obj.shape[0]))
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "eq_matrix", mat)
        object.__setattr__(self, "eq_rhs", rhs)
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        self._validate()

    def _validate(self):
        n = self.objective.shape[0]
        m = self.eq_rhs.shape[0]
        if self.eq_matrix.shape != (m, n):
            raise ValueError(
                f"eq_matrix shape {self.eq_matrix.shape} does not match "
                f"{m} rows x {n} variables"
            )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match the variable count")
        if np.any(np.isnan(self.objective)) or np.any(np.isnan(self.eq_matrix)) or np.any(np.isnan(self.eq_rhs)):
            raise ValueError("NaN coefficient in LP data")
        if not np.all(np.isfinite(self.eq_matrix)) or not np.all(np.isfinite(self.eq_rhs)) or not np.all(np.isfinite(self.objective)):
            raise ValueError("non-finite coefficient in LP data")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("NaN bound in LP data")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.eq_rhs.shape[0]


@dataclass
class SolverOptions:
    """Solver knobs; tolerances default to 1e-9 scaled by the data magnitude."""

    feas_tol: float | None = None
    opt_tol: float | None = None
    max_iters: int | None = None
    # warm start: basis column indices plus the set of nonbasic columns
    # resting at their upper bound, as returned in a previous LpSolution
    warm_basis: np.ndarray | None = None
    warm_at_upper: np.ndarray | None = None


@dataclass
class LpSolution:
    status: SolverStatus
    primal: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    objective_value: float
    iterations: int
    # basis information for warm starting a re-solve
    basis: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    at_upper: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _resolve_tols(lp: LinearProgram, opts: SolverOptions) -> tuple[float, float, int]:
    feas = opts.feas_tol
    if feas is None:
        feas = 1e-9 * (1.0 + (np.max(np.abs(lp.eq_rhs)) if lp.num_rows else 0.0))
    opt = opts.opt_tol
    if opt is None:
        opt = 1e-9 * (1.0 + (np.max(np.abs(lp.objective)) if lp.num_vars else 0.0))
    max_iters = opts.max_iters
    if max_iters is None:
        max_iters = 50 * (lp.num_rows + lp.num_vars)
    return feas, opt, max_iters


class _Tableau:
    """Working state for one solve. Owns all storage; never shared."""

    def __init__(self, A, b, lower, upper, status, basis, feas_tol):
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.status = status  # per-variable _AT_LOWER/_AT_UPPER/_AT_ZERO/_BASIC
        self.basis = basis  # column index per row
        self.feas_tol = feas_tol
        self.iterations = 0
        self.degenerate_run = 0
        self.m, self.n_total = A.shape
        self._refactor()

    def _nonbasic_values(self) -> np.ndarray:
        x = np.where(self.status == _AT_UPPER, self.upper, self.lower)
        x[self.status == _AT_ZERO] = 0.0
        x[self.status == _BASIC] = 0.0
        return x

    def _refactor(self):
        if self.m:
            B = self.A[:, self.basis]
            self.binv = np.linalg.inv(B)
        else:
            self.binv = np.zeros((0, 0))
        self.x = self._nonbasic_values()
        if self.m:
            resid = self.b - self.A @ self.x
            self.x[self.basis] = self.binv @ resid

    def basic_feasible(self) -> bool:
        xb = self.x[self.basis]
        return bool(
            np.all(xb >= self.lower[self.basis] - self.feas_tol)
            and np.all(xb <= self.upper[self.basis] + self.feas_tol)
        )

    def duals(self, c: np.ndarray) -> np.ndarray:
        if not self.m:
            return np.zeros(0)
        return c[self.basis] @ self.binv

    def run(self, c: np.ndarray, opt_tol: float, max_iters: int) -> SolverStatus:
        """Price-and-pivot until optimal; returns OPTIMAL/UNBOUNDED/ITERATION_LIMIT."""
        bland_after = 3 * self.n_total
        while True:
            y = self.duals(c)
            rc = c - (y @ self.A if self.m else 0.0)
            improving = (
                ((self.status == _AT_LOWER) & (rc < -opt_tol))
                | ((self.status == _AT_UPPER) & (rc > opt_tol))
                | ((self.status == _AT_ZERO) & (np.abs(rc) > opt_tol))
            )
            candidates = np.flatnonzero(improving)
            if candidates.size == 0:
                return SolverStatus.OPTIMAL
            if self.iterations >= max_iters:
                return SolverStatus.ITERATION_LIMIT
            if self.degenerate_run >= bland_after:
                q = int(candidates[0])  # Bland's rule
            else:
                q = int(candidates[np.argmax(np.abs(rc[candidates]))])
            direction = 1.0 if rc[q] < 0 else -1.0

            d = self.binv @ self.A[:, q] if self.m else np.zeros(0)
            step = direction * d  # basic values move by -theta*step

            # ratio test over basic variables; lowest variable index wins ties
            theta = np.inf
            leave_row = -1
            leave_to_upper = False
            if self.m:
                xb = self.x[self.basis]
                with np.errstate(divide="ignore", invalid="ignore"):
                    dec = step > self.feas_tol  # basic decreases toward lower
                    inc = step < -self.feas_tol  # basic increases toward upper
                    lo_ratio = np.where(dec, (xb - self.lower[self.basis]) / np.where(dec, step, 1.0), np.inf)
                    hi_ratio = np.where(inc, (xb - self.upper[self.basis]) / np.where(inc, step, 1.0), np.inf)
                ratios = np.minimum(lo_ratio, hi_ratio)
                ratios[~np.isfinite(ratios)] = np.inf
                ratios = np.maximum(ratios, 0.0)
                if np.any(ratios < np.inf):
                    best = np.min(ratios)
                    tied = np.flatnonzero(ratios <= best + self.feas_tol)
                    leave_row = int(tied[np.argmin(self.basis[tied])])
                    theta = float(ratios[leave_row])
                    leave_to_upper = bool(hi_ratio[leave_row] <= lo_ratio[leave_row])

            # entering variable can also stop at its own opposite bound
            span = self.upper[q] - self.lower[q]
            bound_flip = np.isfinite(span) and span < theta
            if bound_flip:
                theta = float(span)
            elif not np.isfinite(theta):
                return SolverStatus.UNBOUNDED

            self.iterations += 1
            self.degenerate_run = self.degenerate_run + 1 if theta <= self.feas_tol else 0

            self.x[q] += direction * theta
            if self.m:
                self.x[self.basis] -= theta * step
            if bound_flip:
                self.status[q] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.x[q] = self.upper[q] if direction > 0 else self.lower[q]
                continue

            leaving = int(self.basis[leave_row])
            self.status[leaving] = _AT_UPPER if leave_to_upper else _AT_LOWER
            self.x[leaving] = self.upper[leaving] if leave_to_upper else self.lower[leaving]
            self.status[q] = _BASIC
            self.basis[leave_row] = q
            # eta update of the basis inverse
            piv = d[leave_row]
            self.binv[leave_row] /= piv
            other = np.arange(self.m) != leave_row
            self.binv[other] -= np.outer(d[other], self.binv[leave_row])
            if self.iterations % _REFACTOR_EVERY == 0:
                self._refactor()


def solve(lp: LinearProgram, opts: SolverOptions | None = None) -> LpSolution:
    """Solve the LP. Deterministic for fixed input: all ties break on the
    lowest variable index and Dantzig pricing switches to Bland's rule after
    3*cols consecutive degenerate pivots."""
    opts = opts or SolverOptions()
    feas_tol, opt_tol, max_iters = _resolve_tols(lp, opts)
    n, m = lp.num_vars, lp.num_rows

    lower = np.concatenate([lp.lower, np.zeros(m)])
    upper = np.concatenate([lp.upper, np.full(m, np.inf)])
    status = np.empty(n + m, dtype=int)
    finite_lo = np.isfinite(lp.lower)
    finite_hi = np.isfinite(lp.upper)
    status[:n] = np.where(finite_lo, _AT_LOWER, np.where(finite_hi, _AT_UPPER, _AT_ZERO))
    status[n:] = _BASIC

    tab = None
    if opts.warm_basis is not None and m:
        basis = np.asarray(opts.warm_basis, dtype=int).copy()
        if basis.shape == (m,) and np.all((basis >= 0) & (basis < n)) and len(set(basis.tolist())) == m:
            wstat = np.where(finite_lo, _AT_LOWER, np.where(finite_hi, _AT_UPPER, _AT_ZERO))
            if opts.warm_at_upper is not None:
                up = np.asarray(opts.warm_at_upper, dtype=int)
                wstat[up[(up >= 0) & (up < n)]] = _AT_UPPER
            wstat[basis] = _BASIC
            try:
                cand = _Tableau(lp.eq_matrix.copy(), lp.eq_rhs, lp.lower.copy(), lp.upper.copy(), wstat, basis, feas_tol)
            except np.linalg.LinAlgError:
                cand = None
            if cand is not None and cand.basic_feasible():
                tab = cand

    if tab is None:
        # phase 1: one artificial per row, signed so it starts feasible
        x0 = np.where(status[:n] == _AT_UPPER, lp.upper, np.where(status[:n] == _AT_LOWER, lp.lower, 0.0))
        resid = lp.eq_rhs - lp.eq_matrix @ x0 if m else np.zeros(0)
        art = np.diag(np.where(resid >= 0, 1.0, -1.0)) if m else np.zeros((0, 0))
        A = np.hstack([lp.eq_matrix, art])
        basis = np.arange(n, n + m)
        tab = _Tableau(A, lp.eq_rhs, lower, upper, status, basis, feas_tol)
        if m:
            c1 = np.concatenate([np.zeros(n), np.ones(m)])
            st = tab.run(c1, opt_tol, max_iters)
            if st is SolverStatus.ITERATION_LIMIT:
                return _finish(lp, tab, SolverStatus.ITERATION_LIMIT, n)
            phase1_obj = float(np.sum(tab.x[n:]))
            if phase1_obj > feas_tol:
                return _finish(lp, tab, SolverStatus.INFEASIBLE, n)
            # pin artificials at zero for phase 2
            tab.lower[n:] = 0.0
            tab.upper[n:] = 0.0

    c2 = np.concatenate([lp.objective, np.zeros(tab.n_total - n)])
    st = tab.run(c2, opt_tol, max_iters)
    return _finish(lp, tab, st, n)


def _finish(lp: LinearProgram, tab: _Tableau, st: SolverStatus, n: int) -> LpSolution:
    c2 = np.concatenate([lp.objective, np.zeros(tab.n_total - n)])
    y = tab.duals(c2)
    rc = lp.objective - (y @ lp.eq_matrix if tab.m else 0.0)
    primal = tab.x[:n].copy()
    obj = float(lp.objective @ primal) if st is SolverStatus.OPTIMAL else np.nan
    in_basis = tab.status[:n] == _BASIC
    return LpSolution(
        status=st,
        primal=primal,
        duals=np.asarray(y, dtype=float).copy(),
        reduced_costs=rc,
        objective_value=obj,
        iterations=tab.iterations,
        basis=tab.basis.copy() if np.all(tab.basis < n) else np.flatnonzero(in_basis),
        at_upper=np.flatnonzero(tab.status[:n] == _AT_UPPER),
    )
