"""Dense bounded-variable primal simplex for small linear programs.

Minimizes c.x subject to row.x <= rhs (inequalities), row.x = rhs
(equalities) and per-variable bounds, any of which may be infinite.  The
solver is a two-phase tableau simplex over the standard equality form with
slack columns; variables may be nonbasic at either bound or free at zero.
Pivot selection is largest reduced cost with lowest-index tie-breaking and a
Bland's-rule fallback under prolonged degeneracy, so identical inputs always
take the identical pivot path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

try:  # pragma: no cover - exercised implicitly everywhere
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITERATION_LIMIT = 3

STATUS_NAMES = {
    OPTIMAL: "optimal",
    INFEASIBLE: "infeasible",
    UNBOUNDED: "unbounded",
    ITERATION_LIMIT: "iteration_limit",
}

FEAS_TOL = 1e-9
COST_TOL = 1e-9
PIVOT_TOL = 1e-10


@dataclass
class LinearProgram:
    """min objective.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi."""

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    bounds: np.ndarray  # (n, 2) array of [lo, hi], +-inf allowed

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        self.a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n)
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(-1, 2)
        if self.a_ub.shape[0] != self.b_ub.size or self.a_eq.shape[0] != self.b_eq.size:
            raise InputError("constraint matrix/rhs sizes disagree")
        if self.bounds.shape != (n, 2):
            raise InputError("bounds must provide (lo, hi) per variable")
        if np.any(self.bounds[:, 0] > self.bounds[:, 1] + 1e-12):
            raise InputError("lower bound exceeds upper bound")

    @property
    def n_vars(self):
        return self.objective.size


def linear_program(objective, ineq=(), eq=(), bounds=None):
    """Convenience constructor from (row, rhs) pairs."""
    objective = np.asarray(objective, dtype=float)
    n = objective.size
    a_ub = np.array([r for r, _ in ineq], dtype=float).reshape(-1, n)
    b_ub = np.array([v for _, v in ineq], dtype=float)
    a_eq = np.array([r for r, _ in eq], dtype=float).reshape(-1, n)
    b_eq = np.array([v for _, v in eq], dtype=float)
    if bounds is None:
        bounds = [(-np.inf, np.inf)] * n
    barr = np.array(
        [
            (-np.inf if lo is None else lo, np.inf if hi is None else hi)
            for lo, hi in bounds
        ],
        dtype=float,
    )
    return LinearProgram(objective, a_ub, b_ub, a_eq, b_eq, barr)


@dataclass
class LPSolution:
    status: int
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = np.nan
    iterations: int = 0

    @property
    def status_name(self):
        return STATUS_NAMES[self.status]


@njit(cache=True)
def _nonbasic_value(j, where, lo, hi):
    if where[j] == 1:
        return hi[j]
    if lo[j] > -np.inf:
        return lo[j]
    return 0.0


@njit(cache=True)
def _simplex_phase(tab, xb, zrow, basis, where, lo, hi, max_iter):
    """Run primal simplex pivots in place.  Returns (status, iterations)."""
    m, ncols = tab.shape
    iters = 0
    degen = 0
    bland = False
    while iters < max_iter:
        # Entering variable.
        best = -1
        best_score = COST_TOL
        direction = 0
        for j in range(ncols):
            if where[j] == -1 or lo[j] == hi[j]:
                continue
            zj = zrow[j]
            if where[j] == 0:
                if zj < -COST_TOL:
                    score = -zj
                    d = 1
                elif lo[j] == -np.inf and hi[j] == np.inf and zj > COST_TOL:
                    score = zj
                    d = -1
                else:
                    continue
            else:  # at upper bound
                if zj > COST_TOL:
                    score = zj
                    d = -1
                else:
                    continue
            if bland:
                best = j
                direction = d
                break
            if score > best_score:
                best_score = score
                best = j
                direction = d
        if best == -1:
            return OPTIMAL, iters

        e = best
        iters += 1

        # Ratio test: how far x_e can move in `direction` before a basic
        # variable hits a bound.  Ties resolved by lowest variable index.
        t_row = np.inf
        leave_row = -1
        leave_to_upper = False
        for i in range(m):
            coeff = tab[i, e] * direction
            bi = basis[i]
            if coeff > PIVOT_TOL and lo[bi] > -np.inf:
                t = (xb[i] - lo[bi]) / coeff
                to_upper = False
            elif coeff < -PIVOT_TOL and hi[bi] < np.inf:
                t = (hi[bi] - xb[i]) / (-coeff)
                to_upper = True
            else:
                continue
            if t < 0.0:
                t = 0.0
            if t < t_row:
                t_row = t
                leave_row = i
                leave_to_upper = to_upper
            elif t == t_row and leave_row >= 0 and bi < basis[leave_row]:
                leave_row = i
                leave_to_upper = to_upper

        span = hi[e] - lo[e]
        do_flip = span <= t_row
        t_limit = span if do_flip else t_row
        if t_limit == np.inf:
            return UNBOUNDED, iters

        # Degeneracy watchdog: fall back to Bland's rule, which cannot cycle.
        if t_limit <= 1e-12:
            degen += 1
            if degen > 40:
                bland = True
        else:
            degen = 0
            bland = False

        step = t_limit * direction
        if do_flip:
            # Bound flip: entering variable moves to its opposite bound.
            for i in range(m):
                xb[i] -= tab[i, e] * step
            where[e] = 1 - where[e]
            continue

        r = leave_row
        leaving = basis[r]
        piv = tab[r, e]
        new_val = _nonbasic_value(e, where, lo, hi) + step
        for i in range(m):
            if i != r:
                xb[i] -= tab[i, e] * step
        xb[r] = new_val
        # Pivot row scaling and elimination.
        inv = 1.0 / piv
        for j in range(ncols):
            tab[r, j] *= inv
        for i in range(m):
            if i != r:
                f = tab[i, e]
                if f != 0.0:
                    for j in range(ncols):
                        tab[i, j] -= f * tab[r, j]
        zf = zrow[e]
        if zf != 0.0:
            for j in range(ncols):
                zrow[j] -= zf * tab[r, j]
        basis[r] = e
        where[e] = -1
        where[leaving] = 1 if leave_to_upper else 0
    return ITERATION_LIMIT, iters


@njit(cache=True)
def _solve_standard(a, b, c, lo, hi, slack_of_row, max_iter):
    """Two-phase simplex on equality-standard form.

    a : (m, n) equality matrix (slack columns already present)
    slack_of_row : per-row slack column index, -1 for equality rows
    Returns (status, x, iterations).
    """
    m, n = a.shape
    where = np.zeros(n, dtype=np.int64)
    for j in range(n):
        if lo[j] == -np.inf and hi[j] < np.inf:
            where[j] = 1

    # Residuals at the all-nonbasic point.
    x0 = np.empty(n)
    for j in range(n):
        x0[j] = _nonbasic_value(j, where, lo, hi)
    resid = b - a @ x0

    # Choose an initial basis: row slacks where the residual is admissible,
    # fresh artificial columns elsewhere.
    need_art = np.zeros(m, dtype=np.int64)
    n_art = 0
    for i in range(m):
        sc = slack_of_row[i]
        if sc >= 0 and resid[i] >= -FEAS_TOL and hi[sc] == np.inf:
            need_art[i] = -1
        else:
            need_art[i] = n_art
            n_art += 1

    ncols = n + n_art
    tab = np.zeros((m, ncols))
    tab[:, :n] = a
    lo2 = np.empty(ncols)
    hi2 = np.empty(ncols)
    lo2[:n] = lo
    hi2[:n] = hi
    where2 = np.empty(ncols, dtype=np.int64)
    where2[:n] = where
    basis = np.empty(m, dtype=np.int64)
    xb = np.empty(m)
    phase1 = np.zeros(ncols)
    for i in range(m):
        k = need_art[i]
        if k == -1:
            sc = slack_of_row[i]
            basis[i] = sc
            xb[i] = resid[i] if resid[i] > 0.0 else 0.0
            where2[sc] = -1
        else:
            col = n + k
            sgn = 1.0 if resid[i] >= 0.0 else -1.0
            if sgn < 0.0:
                # Normalize the row so the artificial basis column is +1.
                for j in range(n):
                    tab[i, j] = -tab[i, j]
            tab[i, col] = 1.0
            lo2[col] = 0.0
            hi2[col] = np.inf
            where2[col] = -1
            basis[i] = col
            xb[i] = resid[i] * sgn
            phase1[col] = 1.0

    iters_total = 0
    if n_art > 0:
        zrow = phase1.copy()
        for i in range(m):
            f = zrow[basis[i]]
            if f != 0.0:
                for j in range(ncols):
                    zrow[j] -= f * tab[i, j]
        status, it1 = _simplex_phase(tab, xb, zrow, basis, where2, lo2, hi2, max_iter)
        iters_total += it1
        if status == ITERATION_LIMIT:
            return ITERATION_LIMIT, x0, iters_total
        # Phase-1 objective = sum of artificial values.
        art_sum = 0.0
        for i in range(m):
            if basis[i] >= n:
                art_sum += xb[i]
        scale = 1.0 + np.abs(b).max() if m > 0 else 1.0
        if art_sum > FEAS_TOL * scale:
            return INFEASIBLE, x0, iters_total
        # Pin artificials at zero for phase 2.
        for k in range(n_art):
            lo2[n + k] = 0.0
            hi2[n + k] = 0.0

    zrow = np.zeros(ncols)
    zrow[:n] = c
    for i in range(m):
        f = zrow[basis[i]]
        if f != 0.0:
            for j in range(ncols):
                zrow[j] -= f * tab[i, j]
    status, it2 = _simplex_phase(tab, xb, zrow, basis, where2, lo2, hi2, max_iter)
    iters_total += it2
    if status == ITERATION_LIMIT or status == UNBOUNDED:
        return status, x0, iters_total

    x = np.empty(n)
    for j in range(n):
        x[j] = _nonbasic_value(j, where2, lo2, hi2)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = xb[i]
    return OPTIMAL, x, iters_total


def standardize(lp):
    """Append slack columns for inequality rows; equality rows unchanged.

    Returns (a, b, c, lo, hi, slack_of_row) describing min c.x s.t. a x = b.
    """
    n = lp.n_vars
    m_ub = lp.a_ub.shape[0]
    m_eq = lp.a_eq.shape[0]
    m = m_ub + m_eq
    a = np.zeros((m, n + m_ub))
    a[:m_ub, :n] = lp.a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    a[m_ub:, :n] = lp.a_eq
    b = np.concatenate([lp.b_ub, lp.b_eq])
    c = np.concatenate([lp.objective, np.zeros(m_ub)])
    lo = np.concatenate([lp.bounds[:, 0], np.zeros(m_ub)])
    hi = np.concatenate([lp.bounds[:, 1], np.full(m_ub, np.inf)])
    slack_of_row = np.concatenate(
        [np.arange(n, n + m_ub), np.full(m_eq, -1)]
    ).astype(np.int64)
    return a, b, c, lo, hi, slack_of_row


def solve_lp(lp, max_iter=None):
    """Solve a LinearProgram; returns an LPSolution with an optimal basic point."""
    a, b, c, lo, hi, slack_of_row = standardize(lp)
    if max_iter is None:
        max_iter = 200 + 40 * (a.shape[0] + a.shape[1])
    status, x, iters = _solve_standard(a, b, c, lo, hi, slack_of_row, max_iter)
    if status != OPTIMAL:
        return LPSolution(status=status, iterations=iters)
    xv = x[: lp.n_vars].copy()
    obj = float(lp.objective @ xv)
    return LPSolution(status=OPTIMAL, x=xv, objective_value=obj, iterations=iters)
