"""Bootstrap coefficient estimation for single zero-estimator corrections.

Any estimator of tau^2 can in principle be improved by subtracting
``c * g_n`` for the pairwise-product zero-estimator g_n, but the optimal c
depends on the covariance between the estimator and g_n, which has no closed
form for estimators defined only algorithmically.  The empirical estimator
approximates that covariance from bootstrap resamples:

1. compute the initial estimate and g_n on the full data;
2. for b = 1..B, resample n rows with replacement and recompute both;
3. ``c = Cov-hat(initial*, g_n*) / Var(g_n)`` with Var(g_n) = Var(g_i)/n
   known analytically from the covariate model;
4. return ``initial - c * g_n`` (both full-data values).

Per-resample RNG streams derive from ``(seed, resample index)``, so the
result is bitwise identical whether resamples run serially or in parallel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InitialEstimatorFailure
from .estimators import (
    EstimateReport,
    build_single_zero,
    dicker_tau2,
    naive_tau2,
    sigma2_from,
    t_c_hat_star,
    t_full,
)
from .model import CovariateModel, LabeledDataset, build_w, sample_variance_y
from .selection import t_gamma

__all__ = ["BootstrapConfig", "empirical_estimator", "resolve_initial"]

InitialEstimator = Callable[[LabeledDataset, CovariateModel], float]


def _naive(ds: LabeledDataset, model: CovariateModel) -> float:
    return naive_tau2(build_w(ds))


def _dicker(ds: LabeledDataset, model: CovariateModel) -> float:
    return dicker_tau2(ds)


def _single(ds: LabeledDataset, model: CovariateModel) -> float:
    w = build_w(ds)
    return t_c_hat_star(w, build_single_zero(ds, model))


def _selection(ds: LabeledDataset, model: CovariateModel) -> float:
    return t_gamma(ds, model).tau2


def _full(ds: LabeledDataset, model: CovariateModel) -> float:
    return t_full(ds, build_w(ds), model)


_INITIALS: dict[str, InitialEstimator] = {
    "naive": _naive,
    "dicker": _dicker,
    "single": _single,
    "selection": _selection,
    "full": _full,
}


def resolve_initial(initial: Union[str, InitialEstimator]) -> InitialEstimator:
    """Map an estimator identifier to a function; callables pass through."""
    if callable(initial):
        return initial
    try:
        return _INITIALS[initial]
    except KeyError:
        raise ValueError(
            f"unknown initial estimator {initial!r}; expected one of "
            f"{sorted(_INITIALS)} or a callable"
        ) from None


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampling plan: number of resamples, seed, and the initial estimator."""

    n_boot: int = 200
    seed: int = 0
    initial_estimator: Union[str, InitialEstimator] = "naive"

    def __post_init__(self):
        if self.n_boot < 2:
            raise ValueError("empirical covariance needs n_boot >= 2")


def empirical_estimator(
    ds: LabeledDataset,
    model: CovariateModel,
    cfg: BootstrapConfig,
    *,
    workers: int = 1,
) -> EstimateReport:
    """Run the bootstrap-coefficient correction around an initial estimator.

    Returns a report with ``aux`` recording the fitted coefficient, the
    bootstrap count, and the initial estimator's id.  Resamples may run on
    ``workers`` threads; the combination is by resample index, so the result
    does not depend on execution order.
    """
    initial = resolve_initial(cfg.initial_estimator)
    initial_id = cfg.initial_estimator if isinstance(cfg.initial_estimator, str) else "custom"
    single = build_single_zero(ds, model)
    tau2_init = initial(ds, model)
    n = ds.n

    def one_resample(b: int) -> tuple[float, float]:
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, b)))
        idx = rng.integers(0, n, size=n)
        resampled = LabeledDataset(ds.x[idx], ds.y[idx], whitened=ds.whitened)
        try:
            tau2_b = initial(resampled, model)
        except Exception as exc:  # noqa: BLE001 - attributed and re-raised
            raise InitialEstimatorFailure(b, exc) from exc
        g_n_b = float(np.mean(single.g_per_obs[idx]))
        return tau2_b, g_n_b

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one_resample, range(cfg.n_boot)))
    else:
        pairs = [one_resample(b) for b in range(cfg.n_boot)]

    tau_stars = np.array([t for t, _ in pairs])
    g_stars = np.array([g for _, g in pairs])
    cov = float(np.cov(tau_stars, g_stars, ddof=1)[0, 1])
    var_g_n = single.var_g / n
    c_tilde = cov / var_g_n

    tau2 = tau2_init - c_tilde * single.g_n
    sigma_y2 = sample_variance_y(ds.y)
    return EstimateReport(
        tau2=tau2,
        sigma2=sigma2_from(tau2, sigma_y2),
        estimator_id="empirical",
        aux={"c_tilde": c_tilde, "n_boot": cfg.n_boot, "initial": initial_id},
    )
