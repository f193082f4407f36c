"""Covariate selection via the largest gap in ordered squared-coefficient estimates.

The selection estimator corrects the naive estimator only over a small set
B_gamma of columns chosen from the data: sort the per-column estimates
``beta_j^2-hat``, find the largest consecutive gap, and keep the columns
strictly above the order statistic at the gap.  Because a data-dependent B
can bias the correction (a post-selected "zero"-estimator no longer has mean
zero), an optional sample split performs selection and correction on disjoint
row blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewColumns, TooFewObservations
from .estimators import EstimateReport, naive_tau2, psi_hat, sigma2_from
from .kernels import ordered_sum
from .model import CovariateModel, LabeledDataset, build_w, sample_variance_y

__all__ = [
    "SelectionResult",
    "beta_squared_estimates",
    "gap_select",
    "t_gamma",
]

# Library default bound on |B_gamma|; keeps the O(|B|^2 n) correction bounded.
DEFAULT_CAP = 50


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the gap rule.

    ``selected`` holds original (0-based) column indices whose estimate is
    strictly above ``threshold_value``, the order statistic at the largest
    gap.  ``gaps`` has length p-1; entry k is the difference between order
    statistics k+2 and k+1 (1-based).
    """

    selected: tuple
    threshold_value: float
    gaps: np.ndarray
    split_used: bool = False

    def __post_init__(self):
        self.gaps.setflags(write=False)


def beta_squared_estimates(w) -> np.ndarray:
    """Per-column unbiased estimates of beta_j^2, possibly negative.

    ``((column sum)^2 - column square sum) / (n (n - 1))`` per column; their
    sum is the naive tau^2 estimate.
    """
    if w.n < 2:
        raise TooFewObservations("beta_squared_estimates needs n >= 2")
    return (w.column_sums * w.column_sums - w.column_square_sums) / (w.n * (w.n - 1))


def gap_select(beta2) -> SelectionResult:
    """Apply the largest-gap rule to a vector of squared-coefficient estimates.

    Ties in the argmax over gaps break toward the smallest order-statistic
    position.  The strict inequality excludes the order statistic sitting at
    the gap itself, so an all-equal input selects nothing.  Negative
    estimates participate in the sort as-is.
    """
    b2 = np.asarray(beta2, dtype=np.float64).ravel()
    p = b2.shape[0]
    if p < 2:
        raise TooFewColumns("gap selection needs p >= 2")
    sorted_vals = np.sort(b2, kind="stable")
    gaps = np.diff(sorted_vals)
    k_star = int(np.argmax(gaps))  # first max: smallest position wins ties
    threshold = float(sorted_vals[k_star + 1])
    selected = tuple(int(j) for j in np.flatnonzero(b2 > threshold))
    return SelectionResult(selected=selected, threshold_value=threshold, gaps=gaps)


def t_gamma(
    ds: LabeledDataset,
    model: CovariateModel,
    *,
    split: bool = False,
    split_fraction: float = 0.5,
    cap: int | None = DEFAULT_CAP,
) -> EstimateReport:
    """Selection estimator: naive minus the correction over the gap-selected set.

    With ``split=False`` (the default) selection and correction both use the
    full data.  With ``split=True`` the rows are partitioned: the leading
    ``split_fraction`` block selects B_gamma and the remaining block computes
    both the naive estimate and the correction terms, which removes
    post-selection bias (rows are i.i.d., so a leading block is statistically
    equivalent to a random subset).

    ``cap`` bounds |B_gamma| (effective bound ``min(p, cap)``), keeping the
    strongest estimates; pass ``cap=None`` to disable.
    """
    n = ds.n
    if split:
        if n < 6:
            raise TooFewObservations("split selection needs n >= 6")
        if not 0.0 < split_fraction < 1.0:
            raise ValueError("split_fraction must be in (0, 1)")
        n_select = min(max(int(round(split_fraction * n)), 2), n - 3)
        select_ds = LabeledDataset(ds.x[:n_select], ds.y[:n_select], whitened=ds.whitened)
        est_ds = LabeledDataset(ds.x[n_select:], ds.y[n_select:], whitened=ds.whitened)
    else:
        if n < 3:
            raise TooFewObservations("t_gamma needs n >= 3")
        n_select = n
        select_ds = ds
        est_ds = ds

    select_w = build_w(select_ds)
    beta2 = beta_squared_estimates(select_w)
    result = gap_select(beta2)
    selected = list(result.selected)
    if cap is not None and len(selected) > min(ds.p, cap):
        keep = min(ds.p, cap)
        selected = sorted(selected, key=lambda j: -beta2[j])[:keep]
        selected = sorted(selected)

    est_w = select_w if est_ds is select_ds else build_w(est_ds)
    naive = naive_tau2(est_w)
    if selected:
        terms = [
            psi_hat(est_ds, est_w, j, j_prime, model)
            for j in selected
            for j_prime in selected
        ]
        tau2 = naive - 2.0 * ordered_sum(terms)
    else:
        tau2 = naive

    sigma_y2 = sample_variance_y(est_ds.y)
    return EstimateReport(
        tau2=tau2,
        sigma2=sigma2_from(tau2, sigma_y2),
        estimator_id="selection",
        aux={
            "selected": tuple(selected),
            "threshold": result.threshold_value,
            "split": split,
            "n_select_rows": n_select if split else n,
        },
    )
