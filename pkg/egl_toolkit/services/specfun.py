"""
Special functions used by the EGL formulas.

Lambert W on its negative branch (quantiles), the upper incomplete gamma
function (moment series) and the generalized exponential integral (Renyi
entropy), plus the adaptive quadrature helper the other services share.
"""

import logging
import math
import sys
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.integrate import quad

from egl_toolkit.core.config import settings
from egl_toolkit.core.exceptions import DomainError, NonConvergence

logger = logging.getLogger(__name__)

_EPS = sys.float_info.epsilon
_FPMIN = sys.float_info.min / _EPS

BRANCH_POINT = -math.exp(-1.0)
_BRANCH_ROUNDING = 4.0 * _EPS * math.exp(-1.0)
_LAMBERT_RESIDUAL_TOL = 1e-14
# seeds switch from the branch-point series to the logarithmic expansion here
_SEED_SWITCH = -0.25
# below this log(-x) the log-domain Newton iteration replaces Halley on x itself
_LOG_DIRECT_SWITCH = -30.0


def _lambert_seed(x: np.ndarray) -> np.ndarray:
    """Initial W_{-1} guesses: branch-point series near -1/e, log expansion near 0-."""
    seed = np.empty_like(x)

    near_branch = x < _SEED_SWITCH
    p = -np.sqrt(np.maximum(2.0 * (math.e * x[near_branch] + 1.0), 0.0))
    seed[near_branch] = -1.0 + p - p * p / 3.0 + (11.0 / 72.0) * p ** 3

    near_zero = ~near_branch
    l1 = np.log(-x[near_zero])
    l2 = np.log(-l1)
    seed[near_zero] = l1 - l2 + l2 / l1
    return np.minimum(seed, -1.0)


def lambert_w_neg1(x, max_iter: Optional[int] = None):
    """
    Negative real branch W_{-1} of the Lambert W function.

    Solves w * exp(w) = x with w <= -1 for x in (-1/e, 0) by Halley
    iteration. Accepts scalars or arrays; the branch point itself (within
    rounding) maps to -1.
    """
    max_iter = max_iter or settings.lambert_max_iter
    values = np.asarray(x, dtype=float)
    scalar = values.ndim == 0
    xs = np.atleast_1d(values).astype(float)

    at_branch = np.abs(xs - BRANCH_POINT) <= _BRANCH_ROUNDING
    invalid = ~at_branch & ~((xs > BRANCH_POINT) & (xs < 0.0))
    if np.any(invalid):
        bad = xs[invalid][0]
        raise DomainError(f"lambert_w_neg1 requires -1/e < x < 0, got {bad!r}")

    w = np.full_like(xs, -1.0)
    active = ~at_branch
    if np.any(active):
        w[active] = _lambert_seed(xs[active])

    for _ in range(max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        wa = w[idx]
        xa = xs[idx]

        ew = np.exp(wa)
        residual = wa * ew - xa
        wp1 = wa + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            step = residual / (ew * wp1 - (wa + 2.0) * residual / (2.0 * wp1))
        step = np.where(wp1 == 0.0, 0.0, step)

        settled = np.abs(residual) <= _LAMBERT_RESIDUAL_TOL * np.abs(xa)
        updated = np.where(settled, wa, wa - step)
        w[idx] = updated

        done = settled | (np.abs(step) <= _EPS * (1.0 + np.abs(updated))) | (wp1 == 0.0)
        active[idx[done]] = False

    if np.any(active):
        raise NonConvergence(
            f"lambert_w_neg1 did not converge for {int(active.sum())} argument(s)",
            iterations=max_iter,
        )

    w = np.minimum(w, -1.0)
    return float(w[0]) if scalar else w


def lambert_w_neg1_log(log_neg_x, max_iter: Optional[int] = None):
    """
    W_{-1}(x) from L = log(-x), for arguments too close to 0- to form.

    Solves w + log(-w) = L by Newton iteration from the asymptotic seed
    L - log(-L) + log(-L) / L. Arguments with L above _LOG_DIRECT_SWITCH
    are handed to lambert_w_neg1 directly.
    """
    max_iter = max_iter or settings.lambert_max_iter
    values = np.asarray(log_neg_x, dtype=float)
    scalar = values.ndim == 0
    logs = np.atleast_1d(values).astype(float)
    invalid = np.isnan(logs) | np.isneginf(logs) | (logs > -1.0 + _BRANCH_ROUNDING)
    if np.any(invalid):
        bad = logs[invalid][0]
        raise DomainError(f"lambert_w_neg1_log requires -inf < log(-x) <= -1, got {bad!r}")

    w = np.empty_like(logs)
    direct = logs > _LOG_DIRECT_SWITCH
    if np.any(direct):
        w[direct] = lambert_w_neg1(-np.exp(logs[direct]), max_iter=max_iter)

    deep = ~direct
    if np.any(deep):
        target = logs[deep]
        l2 = np.log(-target)
        wd = target - l2 + l2 / target
        for _ in range(max_iter):
            residual = wd + np.log(-wd) - target
            step = residual * wd / (wd + 1.0)
            wd = wd - step
            if np.all(np.abs(step) <= _EPS * np.abs(wd)):
                break
        else:
            raise NonConvergence("lambert_w_neg1_log did not converge", iterations=max_iter)
        w[deep] = wd

    return float(w[0]) if scalar else w


def _log_lower_series(s: float, x: float, max_iter: int) -> float:
    """log of the lower incomplete gamma function by its power series."""
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return -x + s * math.log(x) + math.log(total)
    raise NonConvergence(f"incomplete gamma series for s={s}, x={x}", iterations=max_iter)


def _log_upper_continued_fraction(s: float, x: float, max_iter: int) -> float:
    """log of the upper incomplete gamma function by modified Lentz continued fraction."""
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return -x + s * math.log(x) + math.log(h)
    raise NonConvergence(f"incomplete gamma continued fraction for s={s}, x={x}", iterations=max_iter)


def log_upper_inc_gamma(s: float, x: float, max_iter: Optional[int] = None) -> float:
    """log of the upper incomplete gamma function log Gamma(s, x)."""
    if not (math.isfinite(s) and s > 0):
        raise DomainError(f"upper_inc_gamma requires s > 0, got s={s!r}")
    if not (x >= 0 and not math.isnan(x)):
        raise DomainError(f"upper_inc_gamma requires x >= 0, got x={x!r}")
    max_iter = max_iter or settings.gamma_max_iter

    log_complete = math.lgamma(s)
    if x == 0.0:
        return log_complete
    if math.isinf(x):
        return -math.inf
    if x < s + 1.0:
        log_lower = _log_lower_series(s, x, max_iter)
        return log_complete + math.log1p(-math.exp(log_lower - log_complete))
    return _log_upper_continued_fraction(s, x, max_iter)


def upper_inc_gamma(s: float, x: float, max_iter: Optional[int] = None) -> float:
    """
    Upper incomplete gamma function Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt.

    Power series for x < s + 1, continued fraction otherwise.
    """
    if x == 0.0 and s > 0:
        return math.gamma(s)
    return math.exp(log_upper_inc_gamma(s, x, max_iter))


def integrate(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    breakpoints: Iterable[float] = (),
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    limit: Optional[int] = None,
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature over [lower, upper].

    ``upper`` may be infinite. The range is split at ``breakpoints`` and each
    piece integrated separately; a piece whose error estimate misses the
    tolerance by more than two orders of magnitude raises NonConvergence.
    """
    abs_tol = settings.quad_abs_tol if abs_tol is None else abs_tol
    rel_tol = settings.quad_rel_tol if rel_tol is None else rel_tol
    limit = limit or settings.quad_limit

    inner = sorted({float(b) for b in breakpoints if lower < b < upper and math.isfinite(b)})
    edges = [lower, *inner, upper]

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, error, info, *warning = quad(
            func, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1
        )
        if warning and error > 100.0 * max(abs_tol, rel_tol * abs(value)):
            raise NonConvergence(
                f"quadrature on [{a}, {b}] stopped with error estimate {error:.3e}: {warning[0]}",
                iterations=int(info.get("last", limit)),
            )
        if warning:
            logger.debug(f"quadrature on [{a}, {b}] accepted with error estimate {error:.3e}")
        total += value
    return total


def _scaled_exp_integral(nu: float, z: float) -> float:
    """
    J(nu, z) = int_0^inf exp(-s) (1 + s/z)^(-nu) ds, so that E_nu(z) = exp(-z) J / z.

    Obtained from the defining integral by s = z (t - 1).
    """
    def integrand(s: float) -> float:
        return math.exp(-s - nu * math.log1p(s / z))

    # the integrand peaks at s = -nu - z when nu < -z
    peak = max(-nu - z, 0.0)
    spread = 1.0 + math.sqrt(max(-nu, 0.0))
    breakpoints = [1.0, peak, peak + 5.0 * spread, peak + 20.0 * spread, peak + 45.0 * spread]
    return integrate(integrand, 0.0, math.inf, breakpoints=breakpoints, abs_tol=0.0, rel_tol=1e-12)


def log_exp_integral(nu: float, z: float) -> float:
    """log of the generalized exponential integral E_nu(z)."""
    if not (math.isfinite(z) and z > 0):
        raise DomainError(f"exp_integral requires z > 0, got z={z!r}")
    if not math.isfinite(nu):
        raise DomainError(f"exp_integral requires a finite order, got nu={nu!r}")
    return -z - math.log(z) + math.log(_scaled_exp_integral(nu, z))


def exp_integral(nu: float, z: float) -> float:
    """
    Generalized exponential integral E_nu(z) = int_1^inf exp(-z t) t^(-nu) dt.

    Any real order nu; evaluated by adaptive quadrature of the defining integral.
    """
    return math.exp(log_exp_integral(nu, z))
