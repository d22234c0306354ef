"""Session-log analysis: summaries per condition, regressions, ANOVA.

The pipeline mirrors how the logs are produced: each step's response
records carry cumulative per-class tallies, so a step's final recognized
count is the last tally per class. Recognition scores are normalized per
scene (each scene's scores divided by the best score any condition
achieved on that scene), recognition time is the latency of the first
response after stimulus onset, and timed-out steps contribute the timeout
cap to the time statistics.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import AnalysisError, SingularFitError
from .experiment import Condition, SessionLog

logger = logging.getLogger(__name__)


def angular_resolution(phosphenes: int, fov_deg: float) -> float:
    """Linear phosphene density across the FOV diameter, in phosphenes/radian.

    The nominal count is laid out as a square array, so the density along
    one axis is sqrt(N) phosphenes per FOV diameter.
    """
    if phosphenes <= 0 or fov_deg <= 0:
        raise AnalysisError("phosphene count and FOV must be positive")
    return math.sqrt(phosphenes) / math.radians(fov_deg)


# ---------------------------------------------------------------------------
# step aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepResult:
    """One plan step reduced to its outcome."""

    source: str
    step: int
    scene: str
    condition: Condition
    counts: dict
    first_response_s: float  # None when the step produced no responses
    elapsed_s: float
    outcome: str  # "done" | "timeout"

    @property
    def recognized_total(self) -> int:
        return sum(self.counts.values())


def steps_from_records(records, source: str = "memory"):
    """Reduce raw log records to one StepResult per completed step.

    Steps missing a terminal record (truncated logs) are dropped with a
    warning; they have no elapsed time to analyze.
    """
    results = []
    onset = None
    current = None
    counts: dict = {}
    first_response = None
    for rec in records:
        if rec["event_type"] == "fixation":
            if current is not None:
                logger.warning("%s: step %d has no terminal record; dropped", source, current[0])
            current = (rec["step"], rec["scene"], Condition(rec["fov_deg"], rec["phosphenes"]))
            onset = rec["timestamp_s"]
            counts = {}
            first_response = None
            continue
        if current is None or rec["step"] != current[0]:
            logger.warning("%s: orphan %s record at step %s; dropped", source, rec["event_type"], rec["step"])
            continue
        if rec["event_type"] == "response":
            if first_response is None:
                first_response = rec["timestamp_s"] - onset
            counts[rec["object_class"]] = rec["count"]  # cumulative, so last wins
        else:  # done / timeout
            results.append(
                StepResult(
                    source=source,
                    step=current[0],
                    scene=current[1],
                    condition=current[2],
                    counts=counts,
                    first_response_s=first_response,
                    elapsed_s=rec["timestamp_s"] - onset,
                    outcome=rec["event_type"],
                )
            )
            current = None
    if current is not None:
        logger.warning("%s: step %d has no terminal record; dropped", source, current[0])
    return results


def read_session_logs(paths):
    """Load and aggregate one or more JSONL session logs."""
    results = []
    for path in paths:
        log = SessionLog.read(path)
        results.extend(steps_from_records(log.records, source=str(path)))
    if not results:
        raise AnalysisError("no completed steps found in the given logs")
    return results


def normalize_recognition(results):
    """Per-scene normalized recognition scores, parallel to ``results``.

    Each step's recognized-object total is divided by the highest total any
    observation achieved on the same scene, so 1.0 marks the best condition
    for that scene. A scene nobody scored on yields all zeros.
    """
    best: dict = {}
    for r in results:
        best[r.scene] = max(best.get(r.scene, 0), r.recognized_total)
    return [r.recognized_total / best[r.scene] if best[r.scene] > 0 else 0.0 for r in results]


@dataclass(frozen=True)
class ConditionSummary:
    condition: Condition
    angular_resolution: float
    recognition_mean: float
    recognition_std: float
    time_mean_s: float  # None when no step yielded a time sample
    time_std_s: float
    timeouts: int
    n: int


def _mean_std(samples):
    if not samples:
        return None, None
    arr = np.asarray(samples, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def summarize_conditions(results, timeout_s: float = 60.0):
    """Aggregate step results into one row per condition.

    Recognition statistics use the per-scene normalized scores. Time
    statistics use the first-response latency; a timed-out step counts as
    ``timeout_s``, and a step finished without any response contributes no
    time sample.
    """
    if not results:
        raise AnalysisError("no step results to summarize")
    scores = normalize_recognition(results)
    by_condition: dict = {}
    for r, score in zip(results, scores):
        by_condition.setdefault(r.condition, []).append((r, score))
    rows = []
    for cond in sorted(by_condition, key=lambda c: (c.phosphenes, c.fov_deg)):
        pairs = by_condition[cond]
        rec_mean, rec_std = _mean_std([s for _, s in pairs])
        times = []
        for r, _ in pairs:
            if r.first_response_s is not None:
                times.append(r.first_response_s)
            elif r.outcome == "timeout":
                times.append(timeout_s)
        time_mean, time_std = _mean_std(times)
        rows.append(
            ConditionSummary(
                condition=cond,
                angular_resolution=angular_resolution(cond.phosphenes, cond.fov_deg),
                recognition_mean=rec_mean,
                recognition_std=rec_std,
                time_mean_s=time_mean,
                time_std_s=time_std,
                timeouts=sum(r.outcome == "timeout" for r, _ in pairs),
                n=len(pairs),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# log-linear regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogLinearFit:
    """y = intercept + slope * ln(x), with ordinary-least-squares statistics."""

    intercept: float
    slope: float
    r_squared: float = None  # type: ignore[assignment]
    f_value: float = None  # type: ignore[assignment]
    n: int = None  # type: ignore[assignment]
    p_value: float = None  # type: ignore[assignment]

    def predict(self, x):
        return self.intercept + self.slope * np.log(x)


def f_statistic(r_squared: float, n: int) -> float:
    """Simple-regression identity F = (n-2) R^2 / (1 - R^2)."""
    if not 0.0 <= r_squared <= 1.0:
        raise AnalysisError(f"r_squared must be in [0, 1], got {r_squared}")
    if n <= 2:
        raise AnalysisError("F needs n > 2")
    if r_squared == 1.0:
        return math.inf
    return (n - 2) * r_squared / (1.0 - r_squared)


def fit_log_regression(x, y) -> LogLinearFit:
    """Least-squares fit of y on ln(x).

    Raises SingularFitError for fewer than 3 points or constant x. A
    constant y is reported as r_squared 0 (the fit explains nothing).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("x and y must be 1-D arrays of equal length")
    if x.size < 3:
        raise SingularFitError("regression needs at least 3 points")
    if np.any(x <= 0):
        raise AnalysisError("x values must be positive for a log fit")
    lx = np.log(x)
    if np.ptp(lx) == 0.0:
        raise SingularFitError("x values are all equal; slope is undefined")
    design = np.column_stack([np.ones_like(lx), lx])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r_squared = 0.0
    else:
        r_squared = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    n = int(x.size)
    f_value = f_statistic(r_squared, n)
    p_value = 0.0 if math.isinf(f_value) else float(stats.f.sf(f_value, 1, n - 2))
    return LogLinearFit(
        intercept=float(beta[0]),
        slope=float(beta[1]),
        r_squared=r_squared,
        f_value=f_value,
        n=n,
        p_value=p_value,
    )


def p_band(p: float) -> str:
    """Conventional significance stars for a p-value."""
    if not 0.0 <= p <= 1.0:
        raise AnalysisError(f"p must be in [0, 1], got {p}")
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "ns"


# ---------------------------------------------------------------------------
# two-way ANOVA
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnovaRow:
    name: str
    ss: float
    df: int
    f_value: float = None  # type: ignore[assignment]
    p_value: float = None  # type: ignore[assignment]


@dataclass(frozen=True)
class AnovaTable:
    factor_a: AnovaRow
    factor_b: AnovaRow
    interaction: AnovaRow
    residual: AnovaRow

    @property
    def rows(self):
        return (self.factor_a, self.factor_b, self.interaction, self.residual)

    @property
    def total_ss(self) -> float:
        return sum(row.ss for row in self.rows)


def _rss(design, y) -> float:
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    return float(resid @ resid)


def two_way_anova(values, factor_a, factor_b, names=("factor_a", "factor_b")) -> AnovaTable:
    """Two-way ANOVA with interaction (sequential type-I sums of squares).

    Sums of squares come from residual differences of nested least-squares
    models, which equals the classical mean decomposition on balanced
    designs and stays well defined on unbalanced ones. Every factor-level
    cell must contain at least one observation and the residual must keep
    at least one degree of freedom.
    """
    y = np.asarray(values, dtype=np.float64)
    a = np.asarray(factor_a)
    b = np.asarray(factor_b)
    if not (y.ndim == 1 and y.shape == a.shape == b.shape):
        raise AnalysisError("values and factor labels must be 1-D and the same length")
    if y.size == 0:
        raise AnalysisError("no observations")
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    if len(ua) < 2 or len(ub) < 2:
        raise AnalysisError("each factor needs at least 2 levels")
    cell = ia * len(ub) + ib
    occupied = np.bincount(cell, minlength=len(ua) * len(ub))
    if np.any(occupied == 0):
        raise AnalysisError("every factor combination needs at least one observation")
    n = y.size
    df_a, df_b = len(ua) - 1, len(ub) - 1
    df_i = df_a * df_b
    df_res = n - len(ua) * len(ub)
    if df_res < 1:
        raise AnalysisError("no residual degrees of freedom; add replicates")

    one_hot_a = np.eye(len(ua))[ia]
    one_hot_b = np.eye(len(ub))[ib]
    one_hot_cell = np.eye(len(ua) * len(ub))[cell]
    ones = np.ones((n, 1))
    rss_mean = _rss(ones, y)
    rss_a = _rss(one_hot_a, y)
    rss_ab = _rss(np.column_stack([one_hot_a, one_hot_b]), y)
    rss_cells = _rss(one_hot_cell, y)
    # nested models guarantee non-negative differences up to rounding;
    # snap least-squares dust to zero so exactly-null effects report F = 0
    tiny = 1e-12 * float(y @ y)

    def clean(ss):
        return 0.0 if ss <= tiny else ss

    ss_a = clean(max(rss_mean - rss_a, 0.0))
    ss_b = clean(max(rss_a - rss_ab, 0.0))
    ss_i = clean(max(rss_ab - rss_cells, 0.0))
    ss_res = clean(rss_cells)
    ms_res = ss_res / df_res

    def row(name, ss, df):
        if ss == 0.0:
            f = 0.0
        elif ms_res == 0.0:
            f = math.inf
        else:
            f = (ss / df) / ms_res
        p = 0.0 if math.isinf(f) else float(stats.f.sf(f, df, df_res))
        return AnovaRow(name=name, ss=ss, df=df, f_value=f, p_value=p)

    return AnovaTable(
        factor_a=row(names[0], ss_a, df_a),
        factor_b=row(names[1], ss_b, df_b),
        interaction=row(f"{names[0]}:{names[1]}", ss_i, df_i),
        residual=AnovaRow(name="residual", ss=ss_res, df=df_res),
    )


# ---------------------------------------------------------------------------
# report writers
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    "fov_deg",
    "phosphenes",
    "angular_resolution",
    "recognition_mean",
    "recognition_std",
    "time_mean_s",
    "time_std_s",
    "timeouts",
    "n",
)


def write_summary_csv(summaries, path) -> None:
    """Write per-condition summary rows as CSV (one row per condition)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow(
                [
                    f"{s.condition.fov_deg:g}",
                    s.condition.phosphenes,
                    f"{s.angular_resolution:.3f}",
                    f"{s.recognition_mean:.4f}",
                    f"{s.recognition_std:.4f}",
                    "" if s.time_mean_s is None else f"{s.time_mean_s:.3f}",
                    "" if s.time_std_s is None else f"{s.time_std_s:.3f}",
                    s.timeouts,
                    s.n,
                ]
            )


def write_regression_report(fit: LogLinearFit, path, label: str) -> None:
    """Write one fitted curve as JSON; an infinite F is stored as null."""
    doc = {
        "label": label,
        "model": "y = intercept + slope * ln(x)",
        "intercept": fit.intercept,
        "slope": fit.slope,
        "r_squared": fit.r_squared,
        "f_value": None if fit.f_value is None or math.isinf(fit.f_value) else fit.f_value,
        "n": fit.n,
        "p_value": fit.p_value,
        "p_band": None if fit.p_value is None else p_band(fit.p_value),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
