"""
Goodness-of-fit and model-selection service.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from egl_toolkit.core.exceptions import EGLError, InvalidData
from egl_toolkit.models.dataset import Dataset
from egl_toolkit.models.distribution import FAMILY_PARAMETERS, Family, ModelSpec
from egl_toolkit.models.fitting import FitOptions, FitResult, GofReport
from egl_toolkit.services.competitors import family_cdf, family_loglik
from egl_toolkit.services.estimation import DataLike, estimation_service, observations

logger = logging.getLogger(__name__)


class EmpiricalCDF:
    """Right-continuous step function F_n(x) = #{x_i <= x} / n."""

    def __init__(self, values: Sequence[float]):
        data = np.sort(np.asarray(values, dtype=float).ravel())
        if data.size == 0:
            raise InvalidData("empirical distribution needs at least one observation")
        self.sorted_values = data
        self.n = int(data.size)

    def __call__(self, x):
        values = np.asarray(x, dtype=float)
        out = np.searchsorted(self.sorted_values, values, side="right") / self.n
        return float(out) if values.ndim == 0 else out


def ecdf(data: DataLike) -> EmpiricalCDF:
    values = data.array if isinstance(data, Dataset) else data
    return EmpiricalCDF(values)


def ks_distance(cdf_values: Sequence[float]) -> float:
    """
    sup |F_n - F| given F at each observation, as
    max over sorted points of max(i/n - F_(i), F_(i) - (i-1)/n).
    """
    f = np.sort(np.asarray(cdf_values, dtype=float).ravel())
    n = f.size
    if n == 0:
        raise InvalidData("K-S statistic needs at least one observation")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(max(d_plus, d_minus), 1.0))


def ks_statistic(model: ModelSpec, data: DataLike) -> float:
    x = observations(data)
    return ks_distance(np.atleast_1d(family_cdf(model, x)))


def information_criteria(neg_loglik: float, q: int, n: int) -> Tuple[float, float]:
    """(AIC, BIC) = (2 NLL + 2q, 2 NLL + q log n)."""
    return 2.0 * neg_loglik + 2.0 * q, 2.0 * neg_loglik + q * math.log(n)


def build_report(
    model: ModelSpec,
    data: DataLike,
    neg_loglik: Optional[float] = None,
    converged: bool = True,
) -> GofReport:
    x = observations(data)
    if neg_loglik is None:
        neg_loglik = -family_loglik(model, x)
    aic, bic = information_criteria(neg_loglik, model.n_params, x.size)
    return GofReport(
        family=model.family,
        model=model,
        neg_loglik=neg_loglik,
        aic=aic,
        bic=bic,
        ks=ks_statistic(model, x),
        n=x.size,
        q=model.n_params,
        converged=converged,
    )


def report_from_fit(fit: FitResult, data: DataLike) -> GofReport:
    return build_report(fit.model, data, neg_loglik=fit.neg_loglik, converged=fit.converged)


def rank_reports(reports: Iterable[GofReport]) -> List[GofReport]:
    """Successful fits by ascending AIC, then failures; ties broken by family name."""
    def key(report: GofReport):
        if report.failed or report.aic is None:
            return (1, math.inf, report.family.value)
        return (0, report.aic, report.family.value)

    return sorted(reports, key=key)


class ModelComparisonService:
    """Fits several families to one dataset and ranks them."""

    def compare(
        self,
        families: Sequence[Union[Family, str]],
        data: DataLike,
        options: Optional[FitOptions] = None,
    ) -> List[GofReport]:
        if not families:
            raise InvalidData("at least one family is required for a comparison")
        options = options or FitOptions()
        parsed = [Family.parse(f) if isinstance(f, str) else Family(f) for f in families]
        x = observations(data)

        # one independent stream per family, derived from the master seed
        children = np.random.SeedSequence(options.seed).spawn(len(parsed))
        reports = []
        for family, child in zip(parsed, children):
            family_seed = int(child.generate_state(1)[0])
            family_options = options.model_copy(update={"seed": family_seed})
            try:
                fit = estimation_service.fit(family, x, family_options)
                reports.append(report_from_fit(fit, x))
            except EGLError as exc:
                logger.warning(f"{family.value} failed during comparison: {exc.detail}")
                reports.append(GofReport(
                    family=family,
                    n=x.size,
                    q=len(FAMILY_PARAMETERS[family]),
                    converged=False,
                    error=f"{exc.kind}: {exc.detail}",
                ))

        ranked = rank_reports(reports)
        logger.info("Ranking by AIC: " + ", ".join(r.family.value for r in ranked))
        return ranked


# Create global comparison service instance
comparison_service = ModelComparisonService()


def compare(
    families: Sequence[Union[Family, str]],
    data: DataLike,
    options: Optional[FitOptions] = None,
) -> List[GofReport]:
    return comparison_service.compare(families, data, options)
