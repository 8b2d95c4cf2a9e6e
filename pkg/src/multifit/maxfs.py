"""Maximum feasible subsystem solving via a big-M mixed-integer program.

Given constraint rows ``a_i`` and an inlier bound ``s``, finds parameters
theta maximizing the number of rows with ``|a_i . theta| <= s`` under the
gauge ``c . theta = 1``.  Each datum gets one binary deactivation variable
shared by all of its rows, so a multi-row datum is an inlier only when every
row satisfies the bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import lp as _lp
from . import milp as _milp
from .errors import BigMWarning, DegenerateModelError, InputError
from .models import ModelParams, fit_rows_gauge, row_matrix


@dataclass
class MaxFSConfig:
    big_m: float = 10000.0
    binary_cap: int = 200
    node_limit: int = 200_000
    refit: bool = True
    # Optional per-row big-M override (array aligned with the rows).
    per_row_big_m: np.ndarray | None = None

    def __post_init__(self):
        if self.big_m <= 0:
            raise InputError("big_m must be positive")


@dataclass
class MaxFSResult:
    params: ModelParams
    params_milp: ModelParams
    inlier_mask: np.ndarray  # per datum, order of first appearance
    owner_ids: np.ndarray
    inlier_count: int
    objective: int
    optimal: bool
    nodes_explored: int = 0


def _owner_index(owners):
    """Datum ids in order of first appearance plus per-row datum indices."""
    order = []
    seen = {}
    idx = np.empty(owners.size, dtype=int)
    for k, o in enumerate(owners):
        if o not in seen:
            seen[o] = len(order)
            order.append(o)
        idx[k] = seen[o]
    return np.array(order, dtype=int), idx


def build_maxfs(rows, gauge, s, cfg=None):
    """Assemble the big-M deactivation MILP for the given rows and bound s.

    Variables are (theta, y): theta free under the gauge equality, one binary
    y per datum.  Each row contributes two inequalities
    ``+-a . theta - M y <= s``; minimizing sum(y) maximizes the inlier count.
    """
    cfg = cfg or MaxFSConfig()
    if s <= 0:
        raise InputError("inlier bound s must be positive")
    a, owners = row_matrix(rows)
    gauge = np.asarray(gauge, dtype=float)
    p = a.shape[1]
    if gauge.shape != (p,):
        raise InputError("gauge length does not match row width")
    owner_ids, datum_of_row = _owner_index(owners)
    k = owner_ids.size
    if k > cfg.binary_cap:
        raise InputError(f"{k} binaries exceeds the configured cap {cfg.binary_cap}")

    m_per_row = np.full(a.shape[0], cfg.big_m, dtype=float)
    if cfg.per_row_big_m is not None:
        m_per_row = np.asarray(cfg.per_row_big_m, dtype=float).reshape(a.shape[0])

    n_vars = p + k
    n_rows = a.shape[0]
    a_ub = np.zeros((2 * n_rows, n_vars))
    b_ub = np.full(2 * n_rows, float(s))
    a_ub[0::2, :p] = a
    a_ub[1::2, :p] = -a
    for r in range(n_rows):
        col = p + datum_of_row[r]
        a_ub[2 * r, col] = -m_per_row[r]
        a_ub[2 * r + 1, col] = -m_per_row[r]

    a_eq = np.zeros((1, n_vars))
    a_eq[0, :p] = gauge
    b_eq = np.array([1.0])

    objective = np.concatenate([np.zeros(p), np.ones(k)])
    bounds = np.vstack(
        [
            np.tile([-np.inf, np.inf], (p, 1)),
            np.tile([0.0, 1.0], (k, 1)),
        ]
    )
    lp = _lp.LinearProgram(objective, a_ub, b_ub, a_eq, b_eq, bounds)
    problem = _milp.MILPProblem(lp=lp, binary_vars=tuple(range(p, p + k)))
    return problem, owner_ids


def solve_maxfs(rows, gauge, s, cfg=None):
    """Globally maximal consensus set for bound s (exact branch and bound).

    The reported ``params`` are re-fit by gauge-constrained least squares on
    the winning inlier rows (``cfg.refit``); the raw MILP vertex is kept in
    ``params_milp`` and defines the inlier mask.
    """
    cfg = cfg or MaxFSConfig()
    problem, owner_ids = build_maxfs(rows, gauge, s, cfg)
    a, owners = row_matrix(rows)
    p = a.shape[1]
    sol = _milp.solve_milp(problem, node_limit=cfg.node_limit, binary_cap=cfg.binary_cap)
    if sol.status == _milp.INFEASIBLE or sol.x.size == 0:
        raise InputError("MaxFS program infeasible; the gauge may be inconsistent")

    theta = sol.x[:p]
    y = sol.x[p:]
    gauge = np.asarray(gauge, dtype=float)
    if abs(float(gauge @ theta) - 1.0) > 1e-8:
        raise RuntimeError("gauge constraint violated by the MILP solution")

    mask = y < 0.5
    _, datum_of_row = _owner_index(owners)
    row_in = mask[datum_of_row]
    resid = np.abs(a @ theta)
    if np.any(resid[row_in] > s + 1e-6):
        raise RuntimeError("inlier row violates the bound; solver tolerance breach")
    big_m_room = cfg.big_m if cfg.per_row_big_m is None else np.min(cfg.per_row_big_m)
    if np.any(resid[~row_in] > s + 0.99 * big_m_room):
        warnings.warn(
            "an excluded row sits within 1% of its big-M slack; increase big_m",
            BigMWarning,
        )

    params_milp = ModelParams(theta=theta.copy())
    params = params_milp
    if cfg.refit and int(mask.sum()) > 0:
        try:
            params = fit_rows_gauge(a[row_in], gauge)
        except DegenerateModelError:
            params = params_milp

    return MaxFSResult(
        params=params,
        params_milp=params_milp,
        inlier_mask=mask,
        owner_ids=owner_ids,
        inlier_count=int(mask.sum()),
        objective=int(round(float(np.sum(y)))),
        optimal=sol.proven_optimal,
        nodes_explored=sol.nodes_explored,
    )
