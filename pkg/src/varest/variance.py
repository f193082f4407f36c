"""Variance of the estimators: exact/leading-order theory and feasible estimates.

Theory side (used as test oracles and for reporting):

* ``var_naive_theory`` is the exact finite-n variance of the naive estimator
  in terms of the second-moment matrix ``A = E(W W')``, which
  ``moment_matrix_a`` builds analytically for independent whitened columns
  (off-diagonal ``2 b_j b_j'``, diagonal ``sigma_Y^2 + b_j^2 (E X^4 - 1)``).
* ``var_t_oracle_theory`` / ``var_t_b_theory`` / ``var_t_cstar_theory`` /
  ``var_t_full_theory`` apply the corresponding reduction (or estimation
  cost) terms.  The T_B and T_full formulas are leading order: O(n^-2)
  remainders are dropped and reports should label them approximate.

Feasible side:

* ``var_hat_naive_gaussian`` / ``var_hat_t_gamma`` plug sample moments into
  the Gaussian closed form.
* ``var_tilde_naive`` / ``var_tilde_t_gamma`` / ``var_tilde_t_chat`` are the
  distribution-free versions: each unknown in the exact formula is replaced
  by its own distinct-index U-statistic built from the Gram matrix of W.

Negative variance estimates are possible and reported raw; callers that
surface them attach a warning instead of clamping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateZeroEstimator,
    TooFewObservations,
    UnsupportedDependenceStructure,
)
from .estimators import SingleZeroStat, _chat_numerator, naive_tau2
from .kernels import GramMatrix, chain_sum_distinct, offdiag_square_sum, ordered_sum
from .model import CoefficientVector, CovariateModel, WMatrix

__all__ = [
    "MomentMatrixA",
    "VARIANCE_METHOD_IDS",
    "asymptotic_psi",
    "moment_matrix_a",
    "var_hat_naive_gaussian",
    "var_hat_t_gamma",
    "var_naive_theory",
    "var_t_b_theory",
    "var_t_cstar_theory",
    "var_t_full_theory",
    "var_t_oracle_theory",
    "var_tilde_naive",
    "var_tilde_t_chat",
    "var_tilde_t_gamma",
]

VARIANCE_METHOD_IDS = ("theory", "gaussian-plugin", "tilde")


@dataclass(frozen=True)
class MomentMatrixA:
    """The second-moment matrix ``A[j, j'] = E(W_j W_j')`` of a W row."""

    a: np.ndarray
    derivation: str  # "analytic-independent-columns" or "provided"

    def __post_init__(self):
        self.a.setflags(write=False)

    def beta_quad(self, beta: np.ndarray) -> float:
        """Quadratic form ``beta' A beta``."""
        return float(beta @ self.a @ beta)

    @property
    def frobenius_sq(self) -> float:
        return float(np.sum(self.a * self.a))


def moment_matrix_a(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
) -> MomentMatrixA:
    """Analytic A for independent whitened columns.

    ``sigma_Y^2 = ||beta||^2 + sigma^2``; off-diagonal entries are
    ``2 b_j b_j'`` and the diagonal is ``sigma_Y^2 + b_j^2 (E X_j^4 - 1)``.
    """
    if not model.independent_columns:
        raise UnsupportedDependenceStructure(
            "analytic moment matrix requires independent columns"
        )
    b = beta.beta
    sigma_y2 = beta.tau2 + sigma2
    a = 2.0 * np.outer(b, b)
    np.fill_diagonal(a, sigma_y2 + b * b * (model.fourth_moments - 1.0))
    return MomentMatrixA(a=a, derivation="analytic-independent-columns")


def _eq5(n: int, beta_quad_centered: float, frob_centered: float) -> float:
    """Exact variance of the naive estimator given centered A components."""
    lead = 4.0 * (n - 2) / (n * (n - 1))
    tail = 2.0 / (n * (n - 1))
    return lead * beta_quad_centered + tail * frob_centered


def var_naive_theory(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
    n: int,
) -> float:
    """Exact finite-n variance of the naive estimator.

    ``(4(n-2)/(n(n-1))) [b'Ab - ||b||^4] + (2/(n(n-1))) [||A||_F^2 - ||b||^4]``.
    """
    a = moment_matrix_a(beta, sigma2, model)
    tau4 = beta.tau2 ** 2
    return _eq5(n, a.beta_quad(beta.beta) - tau4, a.frobenius_sq - tau4)


def asymptotic_psi(tau2: float, sigma2: float, p: int, n: int) -> float:
    """Asymptotic variance scale: ``n Var(naive) -> psi`` as n, p grow.

    ``psi = 2 [ (1 + p/n) (sigma^2 + tau^2)^2 - sigma^4 + 3 tau^4 ]``.
    """
    sy2 = sigma2 + tau2
    return 2.0 * ((1.0 + p / n) * sy2 * sy2 - sigma2 * sigma2 + 3.0 * tau2 * tau2)


def _reduction_term(beta4, fourth_moments, mass_sq: float, n: int) -> float:
    """The generic correction gain ``(4/n)[sum b^4 (EX^4 - 1) + 2 sum_{j != j'} b^2 b'^2]``."""
    quartic = ordered_sum(beta4 * (fourth_moments - 1.0))
    cross = mass_sq - ordered_sum(beta4)
    return 4.0 / n * (quartic + 2.0 * cross)


def var_t_oracle_theory(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
    n: int,
) -> float:
    """Exact variance of the oracle-corrected estimator (independent columns)."""
    b2 = beta.beta * beta.beta
    reduction = _reduction_term(b2 * b2, model.fourth_moments, beta.tau2 ** 2, n)
    return var_naive_theory(beta, sigma2, model, n) - reduction


def var_t_b_theory(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
    n: int,
    b_set,
) -> float:
    """Leading-order variance of T_B for a fixed set B (O(n^-2) dropped)."""
    indices = sorted(set(int(j) for j in b_set))
    if not indices:
        return var_naive_theory(beta, sigma2, model, n)
    idx = np.asarray(indices, dtype=np.intp)
    b2 = beta.beta[idx] ** 2
    mass_sq = ordered_sum(b2) ** 2
    reduction = _reduction_term(b2 * b2, model.fourth_moments[idx], mass_sq, n)
    return var_naive_theory(beta, sigma2, model, n) - reduction


def var_t_cstar_theory(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
    n: int,
) -> float:
    """Variance of the oracle single-correction estimator T_{c*}.

    Subtracts ``[2 ((sum b_j)^2 - tau^2)]^2 / (n Var(g_i))`` with
    ``Var(g_i) = p (p - 1) / 2``.
    """
    p = beta.p
    if p < 2:
        raise DegenerateZeroEstimator("T_c* needs p >= 2")
    if not model.independent_columns:
        raise UnsupportedDependenceStructure("T_c* theory needs independent columns")
    total = ordered_sum(beta.beta)
    numerator = (2.0 * (total * total - beta.tau2)) ** 2
    var_g = p * (p - 1) / 2.0
    return var_naive_theory(beta, sigma2, model, n) - numerator / (n * var_g)


def var_t_full_theory(
    beta: CoefficientVector,
    sigma2: float,
    model: CovariateModel,
    n: int,
    p: int,
) -> float:
    """Leading-order variance of the fully-corrected estimator.

    ``Var(T_oracle) + 8 p^2 sigma_Y^4 / n^3``; the estimation-cost term is
    what makes full correction counterproductive when p is of order n.
    """
    sigma_y2 = beta.tau2 + sigma2
    cost = 8.0 * p * p * sigma_y2 * sigma_y2 / n ** 3
    return var_t_oracle_theory(beta, sigma2, model, n) + cost


def var_hat_naive_gaussian(tau2_hat: float, sigma_y2_hat: float, n: int, p: int) -> float:
    """Gaussian plug-in variance estimate for the naive estimator.

    ``(4/n)[ ((n-2)/(n-1)) (sy2 t2 + t2^2)
             + (1/(2(n-1))) (p sy2^2 + 4 sy2 t2 + 3 t2^2) ]``
    evaluated as written; a negative tau^2-hat is plugged in raw.
    """
    t2 = tau2_hat
    t4 = t2 * t2
    sy2 = sigma_y2_hat
    sy4 = sy2 * sy2
    lead = (n - 2) / (n - 1) * (sy2 * t2 + t4)
    tail = (p * sy4 + 4.0 * sy2 * t2 + 3.0 * t4) / (2.0 * (n - 1))
    return 4.0 / n * (lead + tail)


def var_hat_t_gamma(var_hat_naive: float, beta2, b_gamma, n: int) -> float:
    """Gaussian plug-in variance estimate for the selection estimator.

    Subtracts ``(8/n) (sum_{j in B_gamma} beta_j^2-hat)^2``; may be negative
    (reported raw, flagged by callers).
    """
    indices = sorted(set(int(j) for j in b_gamma))
    if not indices:
        return var_hat_naive
    b2 = np.asarray(beta2, dtype=np.float64)
    tau2_b = ordered_sum(b2[np.asarray(indices, dtype=np.intp)])
    return var_hat_naive - 8.0 / n * tau2_b * tau2_b


def var_tilde_naive(w: WMatrix, g: GramMatrix, n: int) -> float:
    """Distribution-free variance estimate of the naive estimator.

    The exact formula with each component replaced by a U-statistic:
    ``b'Ab`` by the distinct-triple chain sum over the Gram matrix,
    ``||A||_F^2`` by the off-diagonal square sum, and ``||b||^4`` by the
    squared naive estimate.
    """
    if n < 3:
        raise TooFewObservations("var_tilde_naive needs n >= 3")
    beta_quad_hat = chain_sum_distinct(g) / (n * (n - 1) * (n - 2))
    frob_hat = offdiag_square_sum(g) / (n * (n - 1))
    beta4_hat = naive_tau2(w) ** 2
    return _eq5(n, beta_quad_hat - beta4_hat, frob_hat - beta4_hat)


def var_tilde_t_gamma(
    var_tilde: float,
    beta2,
    b_gamma,
    model: CovariateModel,
    n: int,
) -> float:
    """Distribution-free variance estimate of the selection estimator.

    Subtracts the reduction term with estimated coefficients and the model's
    known fourth moments over the selected set.
    """
    indices = sorted(set(int(j) for j in b_gamma))
    if not indices:
        return var_tilde
    idx = np.asarray(indices, dtype=np.intp)
    b2 = np.asarray(beta2, dtype=np.float64)[idx]
    mass_sq = ordered_sum(b2) ** 2
    return var_tilde - _reduction_term(b2 * b2, model.fourth_moments[idx], mass_sq, n)


def var_tilde_t_chat(
    var_tilde: float,
    w: WMatrix,
    single: SingleZeroStat,
    n: int,
) -> float:
    """Distribution-free variance estimate of the single-correction estimator.

    Subtracts ``[(2/(n(n-1))) sum_{i1 != i2} sum_j W S]^2 / (n Var(g_i))``,
    reusing the pair sums of the c*-hat numerator.  The n in the denominator
    matches the oracle reduction (the bracket estimates 2 sum_j b_j theta_j,
    a per-observation quantity, while the correction applies to the mean of
    n zero-estimators).
    """
    if single.n < 2 or w.p < 2:
        raise DegenerateZeroEstimator("single-correction variance needs p >= 2")
    bracket = _chat_numerator(w, single)
    return var_tilde - bracket * bracket / (n * single.var_g)
