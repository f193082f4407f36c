"""Monte Carlo driver: run a scenario across replications and summarize.

``run_scenario`` maps (scenario, estimator list) to one record per
(replication, estimator).  Replications are independent — each derives its
data purely from ``(seed, rep_index)`` — so they can run on worker processes;
records are keyed and sorted by replication index, making parallel and serial
runs produce identical record sets.

``summarize`` turns records into benchmark-table rows: mean, bias
(``true - mean``), SE (sample standard deviation), RMSE (root mean squared
error, divisor m), and a delta-method standard deviation for the RMSE,
``sd(e^2) / (2 * RMSE * sqrt(m))``.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientRecords, VarestError
from .estimators import (
    EstimateReport,
    build_single_zero,
    dicker_tau2,
    naive_tau2,
    sigma2_from,
    t_c_hat_star,
    t_full,
    t_oracle,
)
from .kernels import gram, ordered_sum
from .model import CovariateModel, LabeledDataset, build_w, sample_variance_y
from .selection import beta_squared_estimates, t_gamma
from .simgen import ScenarioConfig, build_beta, covariate_model_for, generate_dataset
from .variance import (
    var_hat_naive_gaussian,
    var_hat_t_gamma,
    var_tilde_naive,
    var_tilde_t_chat,
    var_tilde_t_gamma,
)
from .zeroboost import BootstrapConfig, empirical_estimator

__all__ = [
    "HarnessOptions",
    "RepRecord",
    "SummaryStats",
    "estimate",
    "read_records_csv",
    "run_scenario",
    "summarize",
    "worker_count",
    "write_records_csv",
    "write_summary_csv",
]

RECORDS_HEADER = ("rep", "estimator", "tau2_hat", "sigma2_hat", "var_hat", "wall_ms")
SUMMARY_HEADER = ("estimator", "mean", "bias", "se", "rmse", "rmse_sd")


@dataclass(frozen=True)
class RepRecord:
    """One estimator's result on one replication."""

    rep_index: int
    estimator_id: str
    tau2_hat: float
    sigma2_hat: float
    variance_estimate: float | None = None
    wall_time: float = 0.0  # seconds
    aux: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SummaryStats:
    """Benchmark-table row for one estimator across replications."""

    estimator_id: str
    mean: float
    bias: float
    se: float
    rmse: float
    rmse_sd: float


@dataclass(frozen=True)
class HarnessOptions:
    """Estimator options threaded through a scenario run."""

    select_split: bool = False
    select_split_fraction: float = 0.5
    select_cap: int | None = None  # None: uncapped (benchmark reproduction)
    boot: int = 200
    initial: str = "naive"
    variance_method: str | None = None  # None | "gaussian-plugin" | "tilde"
    workers: int = 1


def worker_count(requested: int | None = None) -> int:
    """Effective worker count, capped by the VAREST_THREADS environment variable."""
    cap = os.environ.get("VAREST_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    want = requested if requested is not None else 1
    return max(1, min(want, limit))


def estimate(
    ds: LabeledDataset,
    model: CovariateModel,
    estimator_id: str,
    *,
    beta=None,
    options: HarnessOptions = HarnessOptions(),
    boot_seed: int = 0,
) -> EstimateReport:
    """Run one estimator by id and wrap the result in a report.

    ``oracle`` needs the true coefficient vector (simulation reference);
    ``empirical`` derives its bootstrap seed from ``boot_seed``.
    """
    sigma_y2 = sample_variance_y(ds.y)

    if estimator_id == "selection":
        return t_gamma(
            ds,
            model,
            split=options.select_split,
            split_fraction=options.select_split_fraction,
            cap=options.select_cap,
        )
    if estimator_id == "empirical":
        cfg = BootstrapConfig(n_boot=options.boot, seed=boot_seed,
                              initial_estimator=options.initial)
        return empirical_estimator(ds, model, cfg)

    w = build_w(ds)
    aux: dict = {}
    if estimator_id == "naive":
        tau2 = naive_tau2(w)
    elif estimator_id == "dicker":
        tau2 = dicker_tau2(ds)
    elif estimator_id == "full":
        tau2 = t_full(ds, w, model)
    elif estimator_id == "single":
        single = build_single_zero(ds, model)
        tau2 = t_c_hat_star(w, single)
    elif estimator_id == "oracle":
        if beta is None:
            raise VarestError("the oracle estimator needs the true beta")
        tau2 = t_oracle(ds, w, beta, model)
    else:
        raise VarestError(f"unknown estimator id {estimator_id!r}")

    return EstimateReport(
        tau2=tau2,
        sigma2=sigma2_from(tau2, sigma_y2),
        estimator_id=estimator_id,
        aux=aux,
    )


def _attach_variance(
    report: EstimateReport,
    ds: LabeledDataset,
    model: CovariateModel,
    method: str | None,
) -> EstimateReport:
    """Attach the requested variance estimate where one is defined."""
    if method is None:
        return report
    eid = report.estimator_id
    w = build_w(ds)
    value: float | None = None
    aux = dict(report.aux)
    if method == "gaussian-plugin":
        if not model.gaussian:
            aux["variance_warning"] = "gaussian-plugin requested for a non-gaussian model"
        base = var_hat_naive_gaussian(naive_tau2(w), sample_variance_y(ds.y), ds.n, ds.p)
        if eid in ("naive", "dicker"):
            value = base
        elif eid == "selection":
            value = var_hat_t_gamma(
                base, beta_squared_estimates(w), aux.get("selected", ()), ds.n
            )
    elif method == "tilde":
        base = var_tilde_naive(w, gram(w), ds.n)
        if eid in ("naive", "dicker"):
            value = base
        elif eid == "selection":
            value = var_tilde_t_gamma(
                base, beta_squared_estimates(w), aux.get("selected", ()), model, ds.n
            )
        elif eid == "single":
            value = var_tilde_t_chat(base, w, build_single_zero(ds, model), ds.n)
    else:
        raise VarestError(f"unknown variance method {method!r}")
    if value is not None and value < 0.0:
        aux["variance_warning"] = "negative variance estimate (reported raw)"
    return replace(report, variance_estimate=value, aux=aux)


def _run_rep(args) -> list[RepRecord]:
    cfg, estimator_ids, options, rep = args
    beta = build_beta(cfg)
    model = covariate_model_for(cfg)
    ds = generate_dataset(cfg, beta, rep)
    records = []
    for eid in estimator_ids:
        start = time.perf_counter()
        try:
            report = estimate(
                ds, model, eid,
                beta=beta,
                options=options,
                boot_seed=_boot_seed(cfg.seed, rep),
            )
            report = _attach_variance(report, ds, model, options.variance_method)
            wall = time.perf_counter() - start
            records.append(RepRecord(
                rep_index=rep,
                estimator_id=eid,
                tau2_hat=report.tau2,
                sigma2_hat=report.sigma2,
                variance_estimate=report.variance_estimate,
                wall_time=wall,
                aux=report.aux,
            ))
        except VarestError as exc:
            wall = time.perf_counter() - start
            records.append(RepRecord(
                rep_index=rep,
                estimator_id=eid,
                tau2_hat=float("nan"),
                sigma2_hat=float("nan"),
                variance_estimate=None,
                wall_time=wall,
                aux={"error": f"{type(exc).__name__}: {exc}"},
            ))
    return records


def _boot_seed(seed: int, rep: int) -> int:
    # A distinct, deterministic stream per replication for the bootstrap.
    return int(np.random.SeedSequence((seed, rep, 0x626F6F74)).generate_state(1)[0])


def run_scenario(
    cfg: ScenarioConfig,
    estimator_ids,
    options: HarnessOptions = HarnessOptions(),
) -> list[RepRecord]:
    """Run every requested estimator on every replication of a scenario.

    Per-replication estimator failures are recorded (NaN estimates with the
    error in ``aux``), not raised.  Output order is (rep, estimator) and is
    identical for serial and parallel execution.
    """
    estimator_ids = list(estimator_ids)
    jobs = [(cfg, estimator_ids, options, rep) for rep in range(cfg.reps)]
    workers = worker_count(options.workers)
    if workers > 1 and cfg.reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_rep, jobs, chunksize=max(1, cfg.reps // (4 * workers))))
    else:
        chunks = [_run_rep(job) for job in jobs]
    return [record for chunk in chunks for record in chunk]


def summarize(records, true_tau2: float) -> list[SummaryStats]:
    """Benchmark-style summary per estimator.

    ``bias = true - mean`` (so an overestimate reports a negative bias),
    ``se`` uses the n-1 divisor, ``rmse`` the mean of squared errors, and
    ``rmse_sd`` the first-order delta method for the square root of a mean.
    Records are grouped by estimator; input order does not matter.
    """
    by_estimator: dict[str, list[float]] = {}
    order: list[str] = []
    for rec in records:
        if rec.estimator_id not in by_estimator:
            by_estimator[rec.estimator_id] = []
            order.append(rec.estimator_id)
        by_estimator[rec.estimator_id].append(rec.tau2_hat)

    out = []
    for eid in sorted(order):
        values = np.asarray(by_estimator[eid], dtype=np.float64)
        m = values.shape[0]
        if m < 2:
            raise InsufficientRecords(f"estimator {eid!r} has {m} record(s); need >= 2")
        mean = ordered_sum(values) / m
        bias = true_tau2 - mean
        dev = values - mean
        se = float(np.sqrt(ordered_sum(dev * dev) / (m - 1)))
        err_sq = (values - true_tau2) ** 2
        rmse = float(np.sqrt(ordered_sum(err_sq) / m))
        if rmse > 0.0:
            sq_dev = err_sq - ordered_sum(err_sq) / m
            sd_err_sq = float(np.sqrt(ordered_sum(sq_dev * sq_dev) / (m - 1)))
            rmse_sd = sd_err_sq / (2.0 * rmse * np.sqrt(m))
        else:
            rmse_sd = 0.0
        out.append(SummaryStats(
            estimator_id=eid, mean=mean, bias=bias, se=se, rmse=rmse, rmse_sd=rmse_sd,
        ))
    return out


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".6g")


def write_records_csv(path, records) -> None:
    """Write records as ``rep,estimator,tau2_hat,sigma2_hat,var_hat,wall_ms``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDS_HEADER)
        for rec in records:
            writer.writerow([
                rec.rep_index,
                rec.estimator_id,
                _fmt(rec.tau2_hat),
                _fmt(rec.sigma2_hat),
                _fmt(rec.variance_estimate),
                format(rec.wall_time * 1e3, ".3f"),
            ])


def read_records_csv(path) -> list[RepRecord]:
    """Parse a records CSV back into records (aux is not round-tripped)."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RECORDS_HEADER:
            raise VarestError(f"bad records header in {path}: {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RECORDS_HEADER):
                raise VarestError(f"{path}:{lineno}: expected {len(RECORDS_HEADER)} fields")
            try:
                records.append(RepRecord(
                    rep_index=int(row[0]),
                    estimator_id=row[1],
                    tau2_hat=float(row[2]),
                    sigma2_hat=float(row[3]),
                    variance_estimate=float(row[4]) if row[4] else None,
                    wall_time=float(row[5]) / 1e3,
                ))
            except ValueError as exc:
                raise VarestError(f"{path}:{lineno}: {exc}") from exc
    return records


def write_summary_csv(path, summaries) -> None:
    """Write summaries as ``estimator,mean,bias,se,rmse,rmse_sd``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for s in summaries:
            writer.writerow([
                s.estimator_id, _fmt(s.mean), _fmt(s.bias),
                _fmt(s.se), _fmt(s.rmse), _fmt(s.rmse_sd),
            ])
