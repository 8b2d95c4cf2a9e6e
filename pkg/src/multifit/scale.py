"""Robust inlier-scale estimation from sorted absolute residuals.

The estimator takes the K-th smallest absolute residual and divides by the
standard-normal quantile matching its expected rank among the inliers, then
iterates the implied inlier count to a fixed point.  Residuals within 2.5
estimated standard deviations count as inliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ScaleBreakdownError, ZeroScaleError

# Residuals within this many estimated sigmas count as inliers.
NORMALIZED_RESIDUAL_CUTOFF = 2.5

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _std_normal_cdf(z):
    return 0.5 * math.erfc(-z / _SQRT2)


def _acklam_initial(p):
    # Rational approximation for the normal quantile (|error| < 1.2e-9),
    # refined below by Newton steps to full double precision.
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def std_normal_quantile(p):
    """Inverse of the standard normal CDF, accurate to well below 1e-9."""
    if not 0.0 < p < 1.0:
        raise InputError(f"quantile argument must lie in (0, 1), got {p}")
    z = _acklam_initial(p)
    # Two Newton refinements against the erfc-based CDF.
    for _ in range(2):
        err = _std_normal_cdf(z) - p
        pdf = math.exp(-0.5 * z * z) / _SQRT_2PI
        if pdf <= 0.0:
            break
        z -= err / pdf
    return z


@dataclass
class IkoseResult:
    scale: float
    nu: int
    kappa: float
    iterations: int
    converged: bool


def ikose(abs_residuals, k, max_iter=100, nu_init=None):
    """Fixed-point scale estimate from the K-th sorted absolute residual.

    Starting from nu = len(residuals) (or ``nu_init``), alternates
    ``scale = r_(K) / Phi^-1((1 + K/nu)/2)`` with the recount
    ``nu = #{r_i / scale < 2.5}`` until nu stops changing.

    Raises ScaleBreakdownError when nu <= K at any iterate (the quantile
    argument leaves its domain) and ZeroScaleError when the K-th residual is
    exactly zero.
    """
    r = np.asarray(abs_residuals, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise InputError("residuals must be a nonempty 1-D array")
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise InputError("residuals must be finite and nonnegative")
    k = int(k)
    if k < 1:
        raise InputError("K must be at least 1")
    if r.size < k:
        raise InputError(f"need at least K={k} residuals, got {r.size}")

    r_sorted = np.sort(r)
    r_k = float(r_sorted[k - 1])
    if r_k == 0.0:
        raise ZeroScaleError("K-th residual is zero (exact data)")

    nu = int(r.size if nu_init is None else nu_init)
    scale = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if nu <= k:
            raise ScaleBreakdownError(
                f"inlier count nu={nu} does not exceed K={k}", nu=nu, k=k
            )
        kappa = k / nu
        scale = r_k / std_normal_quantile(0.5 * (1.0 + kappa))
        nu_next = int(np.count_nonzero(r < NORMALIZED_RESIDUAL_CUTOFF * scale))
        if nu_next == nu:
            converged = True
            break
        nu = nu_next

    if nu <= k:
        raise ScaleBreakdownError(
            f"inlier count nu={nu} does not exceed K={k}", nu=nu, k=k
        )
    return IkoseResult(
        scale=float(scale),
        nu=nu,
        kappa=k / nu,
        iterations=iterations,
        converged=converged,
    )
