"""
Maximum-likelihood estimation service.

Every family is fitted by Nelder-Mead in log-parameter space, started from the
best points of a log-spaced grid. EGL fits are certified by the closed-form
score; covariances come from the observed (or expected) information matrix.
"""

import itertools
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import logsumexp
from scipy.stats import norm

from egl_toolkit.core.exceptions import DomainError, InvalidData, NonConvergence, SingularMatrix
from egl_toolkit.models.dataset import Dataset
from egl_toolkit.models.distribution import FAMILY_PARAMETERS, EglParams, Family, ModelSpec
from egl_toolkit.models.fitting import (
    BoundaryLimit,
    ConfidenceInterval,
    FitOptions,
    FitResult,
    InformationMode,
    LimitModel,
)
from egl_toolkit.services.competitors import build_from_values
from egl_toolkit.services.egl_core import EGLDistribution

logger = logging.getLogger(__name__)

DataLike = Union[Dataset, Sequence[float], np.ndarray]
ParamsLike = Union[EglParams, Sequence[float]]

# objective value for parameter vectors outside the support
PENALTY = 1e300
DIFF_STEP = 1e-5


def observations(data: DataLike) -> np.ndarray:
    """Validated observation array: nonempty, finite and strictly positive."""
    if isinstance(data, Dataset):
        return data.array
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise InvalidData("no observations")
    bad = np.flatnonzero(~np.isfinite(x) | (x <= 0))
    if bad.size:
        idx = int(bad[0])
        raise InvalidData(f"observation {idx + 1} must be strictly positive and finite, got {x[idx]}")
    return x


def _egl_triple(p: ParamsLike) -> Tuple[float, float, float]:
    if isinstance(p, EglParams):
        return p.as_tuple()
    lam, theta, alpha = (float(v) for v in p)
    return lam, theta, alpha


def _valid(values: Sequence[float]) -> bool:
    return all(math.isfinite(v) and v > 0 for v in values)


# ----------------------------------------------------------------------
# EGL likelihood
# ----------------------------------------------------------------------

def loglik_egl(p: ParamsLike, data: DataLike) -> float:
    """
    l_n = n log(alpha lambda theta^2 / (1 + theta)) + (2 alpha - 1) sum log q_i
          + theta sum (1 - q_i^alpha),  q_i = 1 + lambda x_i.

    Returns -inf for parameters outside the support.
    """
    lam, theta, alpha = _egl_triple(p)
    if not _valid((lam, theta, alpha)):
        return -math.inf
    x = observations(data)
    n = x.size
    log_q = np.log1p(lam * x)
    value = (
        n * (math.log(alpha) + math.log(lam) + 2.0 * math.log(theta) - math.log1p(theta))
        + (2.0 * alpha - 1.0) * float(np.sum(log_q))
        - theta * float(np.sum(np.expm1(alpha * log_q)))
    )
    return value if math.isfinite(value) else -math.inf


def score_egl(p: ParamsLike, data: DataLike) -> np.ndarray:
    """Gradient of loglik_egl in (lambda, theta, alpha) order."""
    lam, theta, alpha = _egl_triple(p)
    if not _valid((lam, theta, alpha)):
        return np.full(3, np.nan)
    x = observations(data)
    n = x.size
    q = 1.0 + lam * x
    log_q = np.log1p(lam * x)
    q_alpha = np.exp(alpha * log_q)

    d_lam = n / lam + (2.0 * alpha - 1.0) * np.sum(x / q) - theta * alpha * np.sum(x * q_alpha / q)
    d_theta = 2.0 * n / theta - n / (1.0 + theta) - np.sum(np.expm1(alpha * log_q))
    d_alpha = n / alpha + 2.0 * np.sum(log_q) - theta * np.sum(q_alpha * log_q)
    return np.array([d_lam, d_theta, d_alpha], dtype=float)


def family_loglik_values(family: Family, params: Sequence[float], x: np.ndarray) -> float:
    """Log-likelihood of raw parameters, -inf outside the support."""
    if not _valid(params):
        return -math.inf
    if family is Family.EGL:
        return loglik_egl(params, x)
    try:
        return build_from_values(family, params).loglik(x)
    except ValueError:
        return -math.inf


# ----------------------------------------------------------------------
# Finite differences
# ----------------------------------------------------------------------

def _steps(x: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(np.abs(x), 1e-8)


def numerical_gradient(func: Callable[[np.ndarray], float], x: Sequence[float], rel: float = DIFF_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = _steps(x, rel)
    grad = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy()
        up[i] += h[i]
        down = x.copy()
        down[i] -= h[i]
        grad[i] = (func(up) - func(down)) / (2.0 * h[i])
    return grad


def numerical_hessian(func: Callable[[np.ndarray], float], x: Sequence[float], rel: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with per-coordinate relative steps."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = _steps(x, rel)
    f0 = func(x)
    hessian = np.zeros((n, n))

    for i in range(n):
        for j in range(i, n):
            if i == j:
                x_plus = x.copy()
                x_plus[i] += h[i]
                x_minus = x.copy()
                x_minus[i] -= h[i]
                hessian[i, i] = (func(x_plus) - 2.0 * f0 + func(x_minus)) / (h[i] ** 2)
            else:
                corners = []
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    shifted = x.copy()
                    shifted[i] += si * h[i]
                    shifted[j] += sj * h[j]
                    corners.append(func(shifted))
                value = (corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * h[i] * h[j])
                hessian[i, j] = hessian[j, i] = value

    return hessian


# ----------------------------------------------------------------------
# Information and covariance
# ----------------------------------------------------------------------

def observed_information(family: Family, params: Sequence[float], data: DataLike) -> np.ndarray:
    """Negative Hessian of the log-likelihood at params."""
    family = Family(family)
    x = observations(data)
    if family is Family.EGL:
        # Jacobian of the closed-form score
        p = np.asarray(params, dtype=float)
        h = _steps(p, DIFF_STEP)
        jac = np.zeros((3, 3))
        for j in range(3):
            up = p.copy()
            up[j] += h[j]
            down = p.copy()
            down[j] -= h[j]
            jac[:, j] = (score_egl(up, x) - score_egl(down, x)) / (2.0 * h[j])
        return -0.5 * (jac + jac.T)
    return -numerical_hessian(lambda v: family_loglik_values(family, v, x), params)


def expected_information(p: ParamsLike, n: int) -> np.ndarray:
    """
    n times the expected per-observation information, in (lambda, theta, alpha)
    order, with the expectations taken by quadrature against the EGL density.
    """
    lam, theta, alpha = _egl_triple(p)
    dist = EGLDistribution.from_values(lam, theta, alpha)

    def q(x: float) -> float:
        return 1.0 + lam * x

    def d_lam_lam(x: float) -> float:
        return (
            -1.0 / lam ** 2
            - (2.0 * alpha - 1.0) * x * x / q(x) ** 2
            - theta * alpha * (alpha - 1.0) * x * x * q(x) ** (alpha - 2.0)
        )

    def d_lam_theta(x: float) -> float:
        return -alpha * x * q(x) ** (alpha - 1.0)

    def d_lam_alpha(x: float) -> float:
        return 2.0 * x / q(x) - theta * x * q(x) ** (alpha - 1.0) * (1.0 + alpha * math.log1p(lam * x))

    def d_theta_alpha(x: float) -> float:
        return -q(x) ** alpha * math.log1p(lam * x)

    def d_alpha_alpha(x: float) -> float:
        return -1.0 / alpha ** 2 - theta * q(x) ** alpha * math.log1p(lam * x) ** 2

    e_ll = dist.expect(d_lam_lam)
    e_lt = dist.expect(d_lam_theta)
    e_la = dist.expect(d_lam_alpha)
    e_tt = 1.0 / (1.0 + theta) ** 2 - 2.0 / theta ** 2
    e_ta = dist.expect(d_theta_alpha)
    e_aa = dist.expect(d_alpha_alpha)

    hessian = np.array([
        [e_ll, e_lt, e_la],
        [e_lt, e_tt, e_ta],
        [e_la, e_ta, e_aa],
    ])
    return -n * hessian


def fisher_information(
    p: ParamsLike,
    mode: InformationMode = InformationMode.OBSERVED,
    data: Optional[DataLike] = None,
    n: Optional[int] = None,
) -> np.ndarray:
    """
    Information matrix of EGL in (lambda, theta, alpha) order.

    OBSERVED needs the data; EXPECTED needs a sample size (taken from the data
    when given).
    """
    mode = InformationMode(mode)
    if mode is InformationMode.OBSERVED:
        if data is None:
            raise InvalidData("observed information requires data")
        return observed_information(Family.EGL, _egl_triple(p), data)
    if n is None:
        if data is None:
            raise InvalidData("expected information requires a sample size or data")
        n = observations(data).size
    return expected_information(p, n)


def covariance_from_information(information: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive-definite information matrix."""
    info = np.asarray(information, dtype=float)
    info = 0.5 * (info + info.T)
    if not np.all(np.isfinite(info)):
        raise SingularMatrix("information matrix has non-finite entries")
    try:
        np.linalg.cholesky(info)
        covariance = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"information matrix is not positive definite: {exc}") from exc
    return 0.5 * (covariance + covariance.T)


def confidence_intervals(fit: FitResult, level: Optional[float] = None) -> List[ConfidenceInterval]:
    """Wald intervals estimate +/- z sqrt(covariance_jj)."""
    level = fit.level if level is None else level
    if not 0 < level < 1:
        raise InvalidData(f"confidence level must lie in (0, 1), got {level}")
    if fit.covariance is None:
        raise SingularMatrix("no covariance available for confidence intervals")

    z = float(norm.ppf(1.0 - (1.0 - level) / 2.0))
    covariance = np.asarray(fit.covariance, dtype=float)
    intervals = []
    for j, (name, estimate) in enumerate(fit.model.named_params().items()):
        half_width = z * math.sqrt(max(covariance[j, j], 0.0))
        intervals.append(ConfidenceInterval(
            name=name,
            estimate=estimate,
            lower=estimate - half_width,
            upper=estimate + half_width,
            level=level,
        ))
    return intervals


# ----------------------------------------------------------------------
# Boundary limits
# ----------------------------------------------------------------------

# grid resolution of the one-dimensional profile scans
PROFILE_POINTS = 161


def _profile_theta(s: float) -> float:
    """Positive root of s t^2 + (s - 1) t - 2 = 0, the theta maximizing the likelihood at fixed p."""
    root = math.sqrt((s - 1.0) ** 2 + 8.0 * s)
    if s < 1.0:
        return (1.0 - s + root) / (2.0 * s)
    return 4.0 / (s - 1.0 + root)


def _neg_profile(value: float) -> float:
    return -value if math.isfinite(value) else PENALTY


def _profile_minimum(neg_profile: Callable[[float], float], low: float, high: float) -> Tuple[float, float]:
    """Grid scan of a one-dimensional profile refined by bounded Brent search."""
    grid = np.linspace(low, high, PROFILE_POINTS)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        values = np.array([neg_profile(float(t)) for t in grid])
        i = int(np.argmin(values))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, PROFILE_POINTS - 1)]
        res = minimize_scalar(neg_profile, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if res.fun <= values[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(values[i])


def _power_gamma_limit(x: np.ndarray) -> BoundaryLimit:
    """alpha c^2 x^(2 alpha - 1) exp(-c x^alpha), c profiled as 2n / sum x^alpha."""
    n = x.size
    log_x = np.log(x)
    sum_log_x = float(np.sum(log_x))

    def log_c(log_alpha: float) -> float:
        return math.log(2.0 * n) - float(logsumexp(math.exp(log_alpha) * log_x))

    def neg_profile(log_alpha: float) -> float:
        alpha = math.exp(log_alpha)
        value = n * (log_alpha + 2.0 * log_c(log_alpha) - 2.0) + (2.0 * alpha - 1.0) * sum_log_x
        return _neg_profile(value)

    log_alpha, neg_loglik = _profile_minimum(neg_profile, math.log(1e-3), math.log(1e2))
    return BoundaryLimit(
        model=LimitModel.POWER_GAMMA,
        params=(math.exp(log_alpha), math.exp(log_c(log_alpha))),
        neg_loglik=neg_loglik,
    )


def _lomax_limit(x: np.ndarray) -> BoundaryLimit:
    """c lambda (1 + lambda x)^(-1 - c), c profiled as n / sum log(1 + lambda x)."""
    n = x.size
    scale = float(np.median(x))

    def c_hat(log_lam: float) -> float:
        return n / float(np.sum(np.log1p(math.exp(log_lam) * x)))

    def neg_profile(log_lam: float) -> float:
        total = float(np.sum(np.log1p(math.exp(log_lam) * x)))
        value = n * (math.log(n / total) + log_lam - 1.0) - total
        return _neg_profile(value)

    log_scale = math.log(scale)
    log_lam, neg_loglik = _profile_minimum(neg_profile, math.log(1e-6) - log_scale, math.log(1e6) - log_scale)
    return BoundaryLimit(
        model=LimitModel.LOMAX,
        params=(math.exp(log_lam), c_hat(log_lam)),
        neg_loglik=neg_loglik,
    )


def _gompertz_limit(x: np.ndarray) -> BoundaryLimit:
    """b theta^2 / (1 + theta) exp(2 b x + theta (1 - exp(b x))), theta profiled from the quadratic."""
    n = x.size
    sum_x = float(np.sum(x))
    top = float(np.max(x))

    def theta_hat(log_b: float) -> float:
        return _profile_theta(float(np.sum(np.expm1(math.exp(log_b) * x))) / n)

    def neg_profile(log_b: float) -> float:
        b = math.exp(log_b)
        theta = theta_hat(log_b)
        value = (
            n * (log_b + 2.0 * math.log(theta) - math.log1p(theta))
            + 2.0 * b * sum_x
            - theta * float(np.sum(np.expm1(b * x)))
        )
        return _neg_profile(value)

    log_top = math.log(top)
    log_b, neg_loglik = _profile_minimum(neg_profile, math.log(1e-6) - log_top, math.log(50.0) - log_top)
    return BoundaryLimit(
        model=LimitModel.GOMPERTZ,
        params=(math.exp(log_b), theta_hat(log_b)),
        neg_loglik=neg_loglik,
    )


def boundary_limits(data: DataLike) -> List[BoundaryLimit]:
    """
    Profile maxima of the EGL likelihood along its three boundary limits,
    best (lowest -LL) first.

    The EGL likelihood need not attain its supremum inside the parameter
    space; when it does not, one of these two-parameter laws is the limit.
    """
    x = observations(data)
    limits = [_power_gamma_limit(x), _lomax_limit(x), _gompertz_limit(x)]
    limits.sort(key=lambda limit: limit.neg_loglik)
    logger.debug(f"Boundary limits: {[(lim.model.value, round(lim.neg_loglik, 6)) for lim in limits]}")
    return limits


# ----------------------------------------------------------------------
# Fitting
# ----------------------------------------------------------------------

class Candidate(NamedTuple):
    """Outcome of one optimizer start."""
    log_params: np.ndarray
    neg_loglik: float
    score: np.ndarray
    score_norm: float
    stationary: bool
    iterations: int
    runs: int


class EstimationService:
    """Multi-start Nelder-Mead maximum likelihood for every family."""

    def _objective(self, family: Family, x: np.ndarray) -> Callable[[np.ndarray], float]:
        def neg_loglik(log_params: np.ndarray) -> float:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                params = np.exp(log_params)
                value = family_loglik_values(family, params, x)
            return -value if math.isfinite(value) else PENALTY
        return neg_loglik

    def _ranked_starts(self, objective: Callable, dim: int, options: FitOptions) -> List[np.ndarray]:
        """Grid points ordered by objective value, at most max_starts of them."""
        axis = np.log(np.geomspace(options.grid_low, options.grid_high, options.grid_points))
        scored = []
        for point in itertools.product(axis, repeat=dim):
            start = np.asarray(point)
            scored.append((objective(start), tuple(point), start))
        scored.sort(key=lambda item: (item[0], item[1]))
        return [start for _, _, start in scored[:options.max_starts]]

    def _simplex(self, objective: Callable, x0: np.ndarray, options: FitOptions, bounds: List[Tuple[float, float]]):
        return minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxiter": options.max_iter,
                "xatol": options.xatol,
                "fatol": options.fatol,
            },
        )

    def _score(self, family: Family, params: np.ndarray, x: np.ndarray) -> np.ndarray:
        if family is Family.EGL:
            return score_egl(params, x)
        return numerical_gradient(lambda v: family_loglik_values(family, v, x), params)

    def _is_local_maximum(self, family: Family, params: np.ndarray, x: np.ndarray) -> bool:
        info = observed_information(family, params, x)
        if not np.all(np.isfinite(info)):
            return False
        try:
            np.linalg.cholesky(info)
        except np.linalg.LinAlgError:
            return False
        return True

    def _run_start(
        self,
        family: Family,
        objective: Callable,
        x0: np.ndarray,
        x: np.ndarray,
        options: FitOptions,
        bounds: List[Tuple[float, float]],
    ) -> Candidate:
        """
        One simplex run, restarted in place up to polish_restarts times while
        the EGL score is above tolerance.
        """
        res = self._simplex(objective, x0, options, bounds)
        iterations, runs = int(res.nit), 1
        best_x, best_fun, success = np.asarray(res.x), float(res.fun), bool(res.success)
        if best_fun >= PENALTY:
            return Candidate(best_x, best_fun, np.full(len(x0), np.nan), math.inf, False, iterations, runs)

        score = self._score(family, np.exp(best_x), x)
        score_norm = float(np.linalg.norm(score))
        if family is not Family.EGL:
            return Candidate(best_x, best_fun, score, score_norm, success, iterations, runs)

        tolerance = options.score_tol_per_obs * x.size
        while score_norm > tolerance and runs <= options.polish_restarts:
            res = self._simplex(objective, best_x, options, bounds)
            iterations += int(res.nit)
            runs += 1
            if res.fun <= best_fun:
                best_x, best_fun = np.asarray(res.x), float(res.fun)
            score = self._score(family, np.exp(best_x), x)
            score_norm = float(np.linalg.norm(score))

        stationary = score_norm <= tolerance and self._is_local_maximum(family, np.exp(best_x), x)
        return Candidate(best_x, best_fun, score, score_norm, stationary, iterations, runs)

    def fit(
        self,
        family: Union[Family, str],
        data: DataLike,
        options: Optional[FitOptions] = None,
    ) -> FitResult:
        """
        Maximize the log-likelihood of ``family`` on ``data``.

        The simplex works inside the box [param_floor, param_ceiling] per
        parameter. Only stationary candidates (score within tolerance and
        positive-definite observed information for EGL, simplex success for the
        other families) are eligible when any exists; the search moves past
        the best_grid_starts grid points, up to max_starts, until one does.
        EGL fits carry the best boundary limit whenever it beats the reported
        maximum or no interior maximum was found.

        Raises InvalidData for unusable observations and NonConvergence when no
        start reaches a finite likelihood.
        """
        family = Family.parse(family) if isinstance(family, str) else Family(family)
        options = options or FitOptions()
        x = observations(data)
        n = x.size
        dim = len(FAMILY_PARAMETERS[family])
        objective = self._objective(family, x)
        log_floor, log_ceiling = math.log(options.param_floor), math.log(options.param_ceiling)
        bounds = [(log_floor, log_ceiling)] * dim

        logger.info(f"Fitting {family.value} to {n} observations (seed={options.seed})")
        rng = np.random.default_rng(options.seed)
        starts = self._ranked_starts(objective, dim, options)

        candidates: List[Candidate] = []
        iterations = 0
        restarts_used = 0
        for i, start in enumerate(starts):
            if i >= options.best_grid_starts and any(c.stationary for c in candidates):
                break
            x0 = np.clip(start + rng.normal(0.0, options.start_jitter, size=dim), log_floor, log_ceiling)
            candidate = self._run_start(family, objective, x0, x, options, bounds)
            iterations += candidate.iterations
            restarts_used += candidate.runs
            logger.debug(
                f"{family.value} start {np.exp(x0).round(4).tolist()}: -LL={candidate.neg_loglik:.6f}, "
                f"score={candidate.score_norm:.3e}, stationary={candidate.stationary}"
            )
            if candidate.neg_loglik < PENALTY:
                candidates.append(candidate)

        if not candidates:
            raise NonConvergence(f"no start reached a finite likelihood for {family.value}", iterations=iterations)

        eligible = [c for c in candidates if c.stationary] or candidates
        best = min(eligible, key=lambda c: (c.neg_loglik, tuple(np.exp(c.log_params))))
        converged = best.stationary
        score, score_norm = best.score, best.score_norm
        tolerance = options.score_tol_per_obs * n

        params = tuple(float(v) for v in np.exp(best.log_params))
        model = ModelSpec(family=family, params=params)
        message = "" if converged else f"score norm {score_norm:.3e} above tolerance {tolerance:.3e}"

        boundary = None
        if family is Family.EGL:
            limit = boundary_limits(x)[0]
            if not converged or limit.neg_loglik < best.neg_loglik:
                boundary = limit
                logger.warning(
                    f"EGL likelihood approaches the {limit.model.value} limit "
                    f"{limit.named_params()} with -LL={limit.neg_loglik:.6f}"
                )
                if not converged:
                    message = (
                        f"no interior maximum; the likelihood tends to the {limit.model.value} limit "
                        f"(-LL={limit.neg_loglik:.6f})"
                    )
        if not converged:
            logger.warning(f"{family.value} fit did not converge: {message}")

        covariance = None
        try:
            if family is Family.EGL:
                info = fisher_information(params, options.information, data=x)
            else:
                info = observed_information(family, params, x)
            covariance = covariance_from_information(info).tolist()
        except (SingularMatrix, NonConvergence, DomainError) as exc:
            logger.warning(f"{family.value}: no covariance estimate ({exc.detail})")
            message = message or exc.detail

        result = FitResult(
            model=model,
            neg_loglik=best.neg_loglik,
            score=tuple(float(v) for v in score),
            score_norm=score_norm,
            covariance=covariance,
            information=options.information if family is Family.EGL else InformationMode.OBSERVED,
            level=options.level,
            converged=converged,
            n_restarts_used=restarts_used,
            iterations=iterations,
            n=n,
            seed=options.seed,
            message=message,
            boundary=boundary,
        )
        if covariance is not None:
            result = result.model_copy(update={"conf_intervals": confidence_intervals(result)})

        logger.info(f"Fitted {family.value}: params={params}, -LL={best.neg_loglik:.6f}, converged={converged}")
        return result


# Create global estimation service instance
estimation_service = EstimationService()


def fit(family: Union[Family, str], data: DataLike, options: Optional[FitOptions] = None) -> FitResult:
    return estimation_service.fit(family, data, options)
