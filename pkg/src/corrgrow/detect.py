"""Hypothesis tests for correlation between two grown trees.

Null: the pair was grown independently.  Alternative: the pair shared its
history up to some time t_star.  Three statistics are supported:

* ``MaxDegreeJoint`` — min(max degree of each tree) / sqrt(n); the joint
  upper tail is inflated under correlation (PA trees).
* ``HProduct`` — product of the balancedness statistics H(T1) H(T2);
  correlation raises its mean (UA trees).
* ``AntiCentralityGap`` — |psi(centroid)/n difference|; correlated pairs
  have an atypically SMALL gap, so this test rejects in the lower tail.

Thresholds are empirical quantiles under simulated independent pairs;
rejection always uses strict inequality, so a statistic exactly at the
threshold is kept in the acceptance region (ties have probability zero
for continuous statistics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import batch
from .errors import SizeMismatch
from .rng import RngSpec
from .stats import H_statistic, f_min_anticentrality, max_degree
from .tree_core import CorrelatedPair, GrowingTree, GrowthRule, SeedSpec, make_seed

_TAGS = ("MaxDegreeJoint", "HProduct", "AntiCentralityGap")


@dataclass(frozen=True)
class TestStatistic:
    """One of the three detection statistics.  ``u`` optionally stores a
    preset exceedance threshold for the joint max-degree event."""

    tag: str
    u: float | None = None

    def __post_init__(self) -> None:
        if self.tag not in _TAGS:
            raise ValueError(f"unknown statistic {self.tag!r}; choose from {_TAGS}")

    @property
    def rejects_lower_tail(self) -> bool:
        return self.tag == "AntiCentralityGap"


MAX_DEGREE_JOINT = TestStatistic("MaxDegreeJoint")
H_PRODUCT = TestStatistic("HProduct")
ANTICENTRALITY_GAP = TestStatistic("AntiCentralityGap")


@dataclass(frozen=True)
class DetectionOutcome:
    statistic_value: float
    threshold: float
    reject_h0: bool


@dataclass(frozen=True)
class PowerReport:
    alpha_target: float
    empirical_size: float
    empirical_power: float
    trials: int
    ci_halfwidth: float


POWER_CSV_HEADER = "statistic,n,t_star,alpha,size,power,ci,trials,master_seed,schema_version"
POWER_CSV_SCHEMA = 1


def power_csv_row(
    report: PowerReport, statistic: TestStatistic, n: int, t_star: int, master_seed: int
) -> str:
    return ",".join(
        [
            statistic.tag,
            str(n),
            str(t_star),
            _fmt(report.alpha_target),
            _fmt(report.empirical_size),
            _fmt(report.empirical_power),
            _fmt(report.ci_halfwidth),
            str(report.trials),
            str(master_seed),
            str(POWER_CSV_SCHEMA),
        ]
    )


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def eval_statistic(
    s: TestStatistic, pair: CorrelatedPair | tuple[GrowingTree, GrowingTree]
) -> float:
    if isinstance(pair, CorrelatedPair):
        t1, t2 = pair.t1, pair.t2
    else:
        t1, t2 = pair
    if t1.n != t2.n:
        raise SizeMismatch(f"trees have {t1.n} and {t2.n} vertices")
    if t1.n < 2:
        raise SizeMismatch("need at least two vertices")
    if s.tag == "MaxDegreeJoint":
        return min(max_degree(t1), max_degree(t2)) / math.sqrt(t1.n)
    if s.tag == "HProduct":
        return H_statistic(t1) * H_statistic(t2)
    return abs(f_min_anticentrality(t1) - f_min_anticentrality(t2))


def statistic_samples(
    s: TestStatistic,
    seed: SeedSpec,
    rule: GrowthRule,
    n: int,
    t_star: int,
    trials: int,
    rng: RngSpec,
    threads: int | None = None,
) -> np.ndarray:
    """Statistic values over ``trials`` pairs, one per trial stream.
    Pass ``t_star == seed size`` for the independent null."""
    seed = make_seed(seed)

    def worker(lo: int, hi: int) -> np.ndarray:
        specs = batch.trial_specs(rng, lo, hi)
        p1, p2 = batch.correlated_parents_batch(seed, rule, n, t_star, specs)
        return _values_from_parents(s, seed, p1, p2)

    chunk = batch.default_chunk(n)
    parts = batch.map_trials(worker, trials, chunk, threads)
    return np.concatenate(parts)


def _values_from_parents(
    s: TestStatistic, seed, p1: np.ndarray, p2: np.ndarray
) -> np.ndarray:
    n = p1.shape[1]
    if s.tag == "MaxDegreeJoint":
        d1 = batch.max_degree_batch(p1)
        d2 = batch.max_degree_batch(p2)
        return np.minimum(d1, d2) / math.sqrt(n)
    if s.tag == "HProduct":
        h1 = batch.h_statistic_batch(batch.subtree_sizes_batch(p1, seed))
        h2 = batch.h_statistic_batch(batch.subtree_sizes_batch(p2, seed))
        return h1 * h2
    _, psi1, _ = batch.centroid_scan_batch(p1, seed)
    _, psi2, _ = batch.centroid_scan_batch(p2, seed)
    return np.abs(psi1.astype(np.float64) - psi2) / n


def calibrate_threshold(
    s: TestStatistic,
    seed: SeedSpec,
    rule: GrowthRule,
    n: int,
    alpha: float,
    trials: int,
    rng: RngSpec,
    threads: int | None = None,
) -> float:
    """Empirical alpha-quantile of the statistic under the independent
    null (lower tail for the gap statistic, upper tail otherwise)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    seed = make_seed(seed)
    values = statistic_samples(s, seed, rule, n, seed.size, trials, rng, threads)
    q = alpha if s.rejects_lower_tail else 1.0 - alpha
    return float(np.quantile(values, q))


def run_test(
    s: TestStatistic,
    threshold: float,
    pair: CorrelatedPair | tuple[GrowingTree, GrowingTree],
) -> DetectionOutcome:
    value = eval_statistic(s, pair)
    if s.rejects_lower_tail:
        reject = value < threshold
    else:
        reject = value > threshold
    return DetectionOutcome(value, threshold, bool(reject))


def rejection_rate(values: np.ndarray, s: TestStatistic, threshold: float) -> float:
    if s.rejects_lower_tail:
        return float(np.mean(values < threshold))
    return float(np.mean(values > threshold))


def estimate_power(
    s: TestStatistic,
    seed: SeedSpec,
    rule: GrowthRule,
    n: int,
    t_star: int,
    alpha: float,
    trials_cal: int,
    trials_power: int,
    rng: RngSpec,
    threads: int | None = None,
) -> PowerReport:
    """Calibrate under the null, then measure the rejection rate on fresh
    null pairs (size) and on correlated pairs (power).  Calibration, size,
    and power samples use disjoint stream families."""
    seed = make_seed(seed)
    threshold = calibrate_threshold(s, seed, rule, n, alpha, trials_cal, rng.substream(0), threads)
    null_vals = statistic_samples(s, seed, rule, n, seed.size, trials_power, rng.substream(1), threads)
    alt_vals = statistic_samples(s, seed, rule, n, t_star, trials_power, rng.substream(2), threads)
    size = rejection_rate(null_vals, s, threshold)
    power = rejection_rate(alt_vals, s, threshold)
    ci = 1.96 * math.sqrt(power * (1.0 - power) / trials_power)
    return PowerReport(alpha, size, power, trials_power, ci)


def empirical_tv(x: np.ndarray, y: np.ndarray, bins: int = 64) -> float:
    """Histogram estimate of the total-variation distance between two
    sampled distributions (exploratory output, not a test)."""
    lo = min(float(np.min(x)), float(np.min(y)))
    hi = max(float(np.max(x)), float(np.max(y)))
    if hi <= lo:
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    px, _ = np.histogram(x, bins=edges)
    py, _ = np.histogram(y, bins=edges)
    return 0.5 * float(np.abs(px / len(x) - py / len(y)).sum())
