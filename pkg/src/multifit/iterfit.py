"""Alternating consensus maximization and inlier-scale estimation.

The inlier bound and the model parameters form a chicken-and-egg pair: the
bound determines the maximal consensus set, and the consensus determines the
scale estimate.  Starting from a deliberately small bound s0, each round
solves MaxFS at the current bound; while the consensus stays at or below a
threshold the bound grows additively, otherwise the scale estimator supplies
the next bound from the residuals of the whole input.  The loop stops when
the bound converges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import maxfs as _maxfs
from .errors import InputError, InsufficientInliersError, ScaleBreakdownError, ZeroScaleError
from .models import row_matrix
from .scale import ikose

SCALE_FLOOR = 1e-12


@dataclass
class IseConfig:
    s0: float = 0.01
    epsilon: float | None = None  # bound bump when too few inliers; default s0
    inlier_threshold: int = 10
    k: int = 10
    rel_tol: float = 1e-3
    max_outer_iter: int = 50

    def __post_init__(self):
        if self.s0 <= 0:
            raise InputError("s0 must be positive")
        if self.epsilon is None:
            self.epsilon = self.s0
        if self.k < 1:
            raise InputError("K must be at least 1")


@dataclass
class TraceEntry:
    iteration: int
    s: float
    inlier_count: int
    optimal: bool


@dataclass
class IseResult:
    params: object
    scale: float
    inlier_count: int
    trace: list = field(default_factory=list)
    converged: bool = False
    all_optimal: bool = True

    @property
    def inlier_mask(self):
        return self._inlier_mask

    def trace_array(self):
        return np.array([(t.iteration, t.s, t.inlier_count) for t in self.trace])


def _count_datum_inliers(a, datum_of_row, theta, s, tol=1e-6):
    """Data whose every row satisfies |a . theta| <= s + tol."""
    resid = np.abs(a @ theta)
    bad = resid > s + tol
    n = int(datum_of_row.max()) + 1 if datum_of_row.size else 0
    datum_bad = np.zeros(n, dtype=bool)
    np.logical_or.at(datum_bad, datum_of_row, bad)
    return ~datum_bad


def imaxfs_ise(rows, gauge, cfg=None, maxfs_cfg=None):
    """Iterate MaxFS at the current bound with scale-estimator feedback.

    Returns the last pre-update state (params, bound, inlier count) once the
    bound converges, per-iteration trace included.  Raises
    InsufficientInliersError when the consensus never exceeds the threshold
    within the iteration budget; estimator breakdown propagates with the
    trace attached.
    """
    cfg = cfg or IseConfig()
    maxfs_cfg = maxfs_cfg or _maxfs.MaxFSConfig()
    a, owners = row_matrix(rows)
    _, datum_of_row = _maxfs._owner_index(owners)

    s_t = float(cfg.s0)
    trace = []
    exceeded_once = False
    converged = False
    all_optimal = True
    result = None
    params = None
    inlier_mask = None

    for t in range(cfg.max_outer_iter):
        result = _maxfs.solve_maxfs(rows, gauge, s_t, maxfs_cfg)
        all_optimal = all_optimal and result.optimal
        theta = result.params.theta
        inlier_mask = _count_datum_inliers(a, datum_of_row, theta, s_t)
        i_t = int(inlier_mask.sum())
        trace.append(TraceEntry(iteration=t, s=s_t, inlier_count=i_t, optimal=result.optimal))
        params = result.params

        if i_t > cfg.inlier_threshold:
            exceeded_once = True
            try:
                est = ikose(np.abs(a @ theta), cfg.k)
                s_next = est.scale
            except ZeroScaleError:
                s_next = SCALE_FLOOR
            except ScaleBreakdownError as err:
                err.trace = trace
                raise
        else:
            s_next = s_t + cfg.epsilon

        if abs(s_next - s_t) <= cfg.rel_tol * max(s_t, SCALE_FLOOR):
            converged = True
            break
        s_t = s_next

    if not exceeded_once:
        raise InsufficientInliersError(
            f"consensus never exceeded the threshold {cfg.inlier_threshold}",
            trace=trace,
        )

    last = trace[-1]
    out = IseResult(
        params=params,
        scale=last.s,
        inlier_count=last.inlier_count,
        trace=trace,
        converged=converged,
        all_optimal=all_optimal,
    )
    out._inlier_mask = inlier_mask
    return out
