"""Geometric model plug-ins: 2D lines, planar homographies, affine fundamental matrices.

Each model maps a datum (a point or a point correspondence) to one or more
linear constraint rows ``a`` such that a noise-free datum satisfies
``a . theta = 0``.  The scale ambiguity of ``theta`` is fixed by a gauge
constraint ``c . theta = 1`` instead of unit norm, so every residual is an
ordinary dot product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModelError, InputError

LINE2D = "line2d"
HOMOGRAPHY = "homography"
AFFINE_FUNDAMENTAL = "affine_fundamental"

KINDS = (LINE2D, HOMOGRAPHY, AFFINE_FUNDAMENTAL)

_SPEC = {
    LINE2D: dict(param_count=3, rows_per_datum=1, min_data=2, coord_len=2),
    HOMOGRAPHY: dict(param_count=9, rows_per_datum=2, min_data=4, coord_len=4),
    AFFINE_FUNDAMENTAL: dict(param_count=5, rows_per_datum=1, min_data=4, coord_len=4),
}


@dataclass(frozen=True)
class Datum:
    """One observation: a 2D point or a correspondence (x, y, x', y')."""

    id: int
    coords: np.ndarray
    score: float = 1.0

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if not np.all(np.isfinite(coords)):
            raise InputError(f"datum {self.id}: non-finite coordinates")
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"datum {self.id}: score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class ModelClass:
    """Static description of one model family plus its gauge vector."""

    kind: str
    param_count: int
    rows_per_datum: int
    min_data: int
    coord_len: int
    gauge: np.ndarray

    @property
    def c(self):
        return self.gauge


def model_class(kind, gauge=None):
    """Build a ModelClass; the gauge defaults to the last basis vector (theta_p = 1)."""
    if kind not in _SPEC:
        raise InputError(f"unknown model kind {kind!r}")
    spec = _SPEC[kind]
    p = spec["param_count"]
    if gauge is None:
        gauge = np.zeros(p)
        gauge[-1] = 1.0
    else:
        gauge = np.asarray(gauge, dtype=float)
        if gauge.shape != (p,):
            raise InputError(f"gauge must have length {p} for {kind}")
        if not np.any(gauge):
            raise InputError("gauge vector must be nonzero")
    return ModelClass(kind=kind, gauge=gauge, **spec)


@dataclass(frozen=True)
class ConstraintRow:
    """One row a of the homogeneous system A theta = 0, tagged with its datum."""

    a: np.ndarray
    owner: int


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector theta of one hypothesis."""

    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))


def _datum_rows(model, datum):
    x = datum.coords
    if x.shape != (model.coord_len,):
        raise InputError(
            f"datum {datum.id}: expected {model.coord_len} coordinates for "
            f"{model.kind}, got {x.shape}"
        )
    if model.kind == LINE2D:
        return [np.array([x[0], x[1], 1.0])]
    if model.kind == AFFINE_FUNDAMENTAL:
        return [np.array([x[0], x[1], x[2], x[3], 1.0])]
    # Homography: the two independent rows of x' x (H X) = 0 with X = (x, y, 1),
    # theta = vec(H) in row-major order.
    u, v, up, vp = x
    r1 = np.array([0.0, 0.0, 0.0, -u, -v, -1.0, vp * u, vp * v, vp])
    r2 = np.array([u, v, 1.0, 0.0, 0.0, 0.0, -up * u, -up * v, -up])
    return [r1, r2]


def build_rows(model, data):
    """Constraint rows for a list of data, rows_per_datum rows per datum."""
    rows = []
    for datum in data:
        for a in _datum_rows(model, datum):
            rows.append(ConstraintRow(a=a, owner=datum.id))
    return rows


def row_matrix(rows):
    """Stack constraint rows into a dense matrix plus the owner-id array."""
    if not rows:
        raise InputError("no constraint rows")
    a = np.vstack([r.a for r in rows])
    owners = np.array([r.owner for r in rows], dtype=int)
    return a, owners


def algebraic_residual(row, params):
    """|a . theta| for one constraint row."""
    a = row.a if isinstance(row, ConstraintRow) else np.asarray(row, dtype=float)
    theta = params.theta if isinstance(params, ModelParams) else np.asarray(params, dtype=float)
    if a.shape != theta.shape:
        raise InputError(f"row length {a.shape} does not match theta {theta.shape}")
    return abs(float(a @ theta))


def datum_algebraic_residual(model, params, datum):
    """Datum-level algebraic residual: max over the datum's constraint rows."""
    theta = params.theta if isinstance(params, ModelParams) else np.asarray(params, dtype=float)
    return max(abs(float(a @ theta)) for a in _datum_rows(model, datum))


def datum_residual_matrix(model, data):
    """N x p matrix R such that per-datum residuals are max(|R_block theta|).

    Returns (stacked rows, datum index per row) for vectorized evaluation.
    """
    rows = []
    idx = []
    for i, datum in enumerate(data):
        for a in _datum_rows(model, datum):
            rows.append(a)
            idx.append(i)
    return np.vstack(rows), np.array(idx, dtype=int)


def all_datum_residuals(model, params, data):
    """Vector of datum-level algebraic residuals for a dataset."""
    theta = params.theta if isinstance(params, ModelParams) else np.asarray(params, dtype=float)
    a, idx = datum_residual_matrix(model, data)
    r = np.abs(a @ theta)
    out = np.zeros(len(data))
    np.maximum.at(out, idx, r)
    return out


def _line_distance(theta, x):
    norm = float(np.hypot(theta[0], theta[1]))
    if norm < 1e-14:
        raise DegenerateModelError("line with zero direction (a = b = 0)")
    return abs(float(theta[0] * x[0] + theta[1] * x[1] + theta[2])) / norm


def _homography_transfer(theta, x):
    h = theta.reshape(3, 3)
    det = np.linalg.det(h)
    if abs(det) < 1e-14 * max(1.0, float(np.abs(h).max()) ** 3):
        raise DegenerateModelError("homography is singular")
    p = np.array([x[0], x[1], 1.0])
    q = np.array([x[2], x[3], 1.0])
    fwd = h @ p
    bwd = np.linalg.solve(h, q)
    if abs(fwd[2]) < 1e-14 or abs(bwd[2]) < 1e-14:
        raise DegenerateModelError("point maps to the line at infinity")
    err_f = np.hypot(fwd[0] / fwd[2] - x[2], fwd[1] / fwd[2] - x[3])
    err_b = np.hypot(bwd[0] / bwd[2] - x[0], bwd[1] / bwd[2] - x[1])
    return 0.5 * (err_f + err_b)


def _affine_sampson(theta, x):
    # F = [[0,0,t3],[0,0,t4],[t1,t2,t5]]; the Sampson denominator is constant.
    grad = float(np.linalg.norm(theta[:4]))
    if grad < 1e-14:
        raise DegenerateModelError("affine fundamental matrix with zero gradient")
    alg = abs(float(theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2] + theta[3] * x[3] + theta[4]))
    return alg / grad


def geometric_residual(model, params, datum):
    """Geometric error of one datum: point-line distance, symmetric transfer
    error, or Sampson distance depending on the model kind."""
    theta = params.theta if isinstance(params, ModelParams) else np.asarray(params, dtype=float)
    if theta.shape != (model.param_count,):
        raise InputError("theta length does not match the model")
    x = datum.coords
    if model.kind == LINE2D:
        return _line_distance(theta, x)
    if model.kind == HOMOGRAPHY:
        return _homography_transfer(theta, x)
    return _affine_sampson(theta, x)


def fit_rows_gauge(a, gauge):
    """Least squares under the gauge: min ||A theta||^2 s.t. c . theta = 1.

    Parameterizes theta = theta0 + Z w with c.theta0 = 1 and Z a basis of the
    gauge null space, then solves the reduced problem by lstsq.  Raises
    DegenerateModelError when the reduced system is rank-deficient (theta not
    unique).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    c = np.asarray(gauge, dtype=float)
    p = c.size
    if a.shape[1] != p:
        raise InputError("row width does not match the gauge length")
    theta0 = c / float(c @ c)
    # Null-space basis of c^T via QR of [c | I].
    q, _ = np.linalg.qr(np.column_stack([c, np.eye(p)]))
    z = q[:, 1:p]
    rhs = -(a @ theta0)
    m = a @ z
    w, _, rank, _ = np.linalg.lstsq(m, rhs, rcond=None)
    if rank < p - 1:
        raise DegenerateModelError("rank-deficient system: theta is not unique")
    theta = theta0 + z @ w
    return ModelParams(theta=theta)


def solve_dlt(model, data, gauge=None, rows=None):
    """Gauge-constrained least-squares fit of the model to data (or to rows)."""
    c = model.gauge if gauge is None else np.asarray(gauge, dtype=float)
    if rows is None:
        rows = build_rows(model, data)
    a, _ = row_matrix(rows)
    return fit_rows_gauge(a, c)
