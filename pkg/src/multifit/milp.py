"""Exact mixed-integer linear programming by branch and bound.

Best-first search on the LP relaxation: nodes are keyed by (bound, node id)
so exploration order is deterministic; the branching variable is the most
fractional binary (ties to the lowest index) and the floor child is created
first.  Incumbents come from integral relaxations and from a cheap rounding
heuristic; when the objective provably takes integer values on all feasible
integral points, fractional node bounds are rounded up, which tightens
pruning without affecting exactness.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from . import lp as _lp

INT_TOL = 1e-6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class MILPProblem:
    """A LinearProgram plus the set of binary variable indices."""

    lp: _lp.LinearProgram
    binary_vars: tuple

    def __post_init__(self):
        self.binary_vars = tuple(sorted(set(int(j) for j in self.binary_vars)))
        n = self.lp.n_vars
        for j in self.binary_vars:
            if not 0 <= j < n:
                raise InputError(f"binary index {j} out of range")
            lo, hi = self.lp.bounds[j]
            if lo < -1e-12 or hi > 1.0 + 1e-12:
                raise InputError(f"binary variable {j} must have bounds within [0, 1]")


@dataclass
class MILPSolution:
    status: str
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = np.nan
    nodes_explored: int = 0
    proven_optimal: bool = False


def _objective_is_integral(problem):
    """True when every feasible integral point has an integer objective:
    zero cost on continuous variables, integer cost on binaries."""
    c = problem.lp.objective
    binset = set(problem.binary_vars)
    for j in range(c.size):
        cj = c[j]
        if j in binset:
            if abs(cj - round(cj)) > 1e-12:
                return False
        elif cj != 0.0:
            return False
    return True


def _feasible(problem, x, tol=1e-7):
    lp = problem.lp
    if lp.a_ub.shape[0] and np.any(lp.a_ub @ x > lp.b_ub + tol):
        return False
    if lp.a_eq.shape[0] and np.any(np.abs(lp.a_eq @ x - lp.b_eq) > tol):
        return False
    if np.any(x < lp.bounds[:, 0] - tol) or np.any(x > lp.bounds[:, 1] + tol):
        return False
    return True


def _rounding_candidates(problem, x, binaries):
    """Integral candidates derived from a fractional relaxation point."""
    ceilnz = x.copy()
    nearest = x.copy()
    for j in binaries:
        ceilnz[j] = 1.0 if x[j] > INT_TOL else 0.0
        nearest[j] = round(x[j])
    return (ceilnz, nearest)


def solve_milp(problem, node_limit=1_000_000, binary_cap=200):
    """Exact optimum of a MILP by best-first branch and bound.

    Returns an MILPSolution; status is ``iteration_limit`` with the best
    incumbent when the node budget is exhausted before the proof completes.
    """
    binaries = np.array(problem.binary_vars, dtype=int)
    if binaries.size > binary_cap:
        raise InputError(f"{binaries.size} binaries exceeds the cap {binary_cap}")

    base = problem.lp
    a_std, b_std, c_std, lo0, hi0, slack_of_row = _lp.standardize(base)
    max_iter = 200 + 40 * (a_std.shape[0] + a_std.shape[1])
    integral_obj = _objective_is_integral(problem)

    def node_bound(obj):
        # Integral objectives let fractional LP bounds round up.
        if integral_obj:
            return float(np.ceil(obj - 1e-6))
        return obj

    def solve_node(lo, hi):
        status, x, _ = _lp._solve_standard(a_std, b_std, c_std, lo, hi, slack_of_row, max_iter)
        if status != _lp.OPTIMAL:
            return status, None, np.inf
        xv = x[: base.n_vars]
        return status, xv, float(base.objective @ xv)

    best_x = None
    best_obj = np.inf
    nodes_explored = 0
    next_id = 0

    def consider_incumbent(xcand, obj=None):
        nonlocal best_x, best_obj
        if obj is None:
            obj = float(base.objective @ xcand)
        if obj < best_obj - 1e-9:
            best_obj = obj
            best_x = xcand.copy()
            return True
        return False

    status, x0, obj0 = solve_node(lo0, hi0)
    if status == _lp.INFEASIBLE:
        return MILPSolution(status=INFEASIBLE, nodes_explored=1)
    if status == _lp.UNBOUNDED:
        raise InputError("MILP relaxation is unbounded")
    if status == _lp.ITERATION_LIMIT:
        return MILPSolution(status=ITERATION_LIMIT, nodes_explored=1)

    heap = []
    heapq.heappush(heap, (node_bound(obj0), next_id, x0, obj0, lo0, hi0))
    next_id += 1

    exhausted = False
    while heap:
        bound, _, x, obj, lo, hi = heapq.heappop(heap)
        nodes_explored += 1
        if bound >= best_obj - 1e-9:
            continue
        if nodes_explored > node_limit:
            exhausted = True
            break

        frac = np.abs(x[binaries] - np.round(x[binaries])) if binaries.size else np.zeros(0)
        if binaries.size == 0 or np.all(frac <= INT_TOL):
            xi = x.copy()
            xi[binaries] = np.round(xi[binaries])
            consider_incumbent(xi)
            continue

        for cand in _rounding_candidates(problem, x, binaries):
            if _feasible(problem, cand):
                consider_incumbent(cand)

        # Most fractional binary; ties broken by lowest index (argmin keeps
        # the first minimum and `binaries` is sorted).
        frac_part = x[binaries] - np.floor(x[binaries])
        branch_var = int(binaries[np.argmin(np.abs(frac_part - 0.5))])

        for child_val in (0.0, 1.0):  # floor branch first
            clo = lo.copy()
            chi = hi.copy()
            clo[branch_var] = child_val
            chi[branch_var] = child_val
            cstatus, cx, cobj = solve_node(clo, chi)
            cid = next_id
            next_id += 1
            if cstatus == _lp.INFEASIBLE:
                continue
            if cstatus != _lp.OPTIMAL:
                raise RuntimeError(
                    f"node LP ended with status {cstatus}; cannot certify optimality"
                )
            cbound = node_bound(cobj)
            if cbound >= best_obj - 1e-9:
                # Might still be an integral point equal to the incumbent path.
                cfrac = np.abs(cx[binaries] - np.round(cx[binaries]))
                if np.all(cfrac <= INT_TOL):
                    xi = cx.copy()
                    xi[binaries] = np.round(xi[binaries])
                    consider_incumbent(xi)
                continue
            heapq.heappush(heap, (cbound, cid, cx, cobj, clo, chi))

    if best_x is None:
        if exhausted:
            return MILPSolution(status=ITERATION_LIMIT, nodes_explored=nodes_explored)
        return MILPSolution(status=INFEASIBLE, nodes_explored=nodes_explored)

    status = ITERATION_LIMIT if exhausted else OPTIMAL
    return MILPSolution(
        status=status,
        x=best_x,
        objective_value=float(base.objective @ best_x),
        nodes_explored=nodes_explored,
        proven_optimal=not exhausted,
    )
