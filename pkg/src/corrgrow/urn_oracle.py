"""Independent distributional oracles used by the test and verification
suites: two-color urns, Beta/Dirichlet/beta-binomial laws, the limiting
anti-centrality representation, and closed-form moment formulas.

All probability-mass and moment formulas evaluate in log space with
log-gamma, so they stay finite well beyond the factorial overflow point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import betainc

from .errors import OutOfSupport
from .rng import RngSpec
from .tree_core import GrowthRule


class Replacement(Enum):
    CLASSIC = "classic"  # add 1 ball of the drawn color
    DIAG2 = "diag2"      # add 2 balls of the drawn color


@dataclass(frozen=True)
class UrnState:
    a: int
    b: int
    replacement: Replacement = Replacement.CLASSIC

    def __post_init__(self) -> None:
        if self.a < 1 or self.b < 1:
            raise ValueError("urn needs at least one ball of each color")


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("beta parameters must be positive")

    def cdf(self) -> Callable[[np.ndarray], np.ndarray]:
        a, b = self.alpha, self.beta
        return lambda x: betainc(a, b, np.clip(x, 0.0, 1.0))


def polya_run(init: UrnState, steps: int, rng: RngSpec) -> np.ndarray:
    """Exact urn simulation; returns the trajectory of color-a proportions,
    length steps+1 with the initial proportion first."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    add = 1 if init.replacement is Replacement.CLASSIC else 2
    u = rng.generator().random(steps)
    traj = np.empty(steps + 1, dtype=np.float64)
    a, b = init.a, init.b
    traj[0] = a / (a + b)
    for i in range(steps):
        if u[i] * (a + b) < a:
            a += add
        else:
            b += add
        traj[i + 1] = a / (a + b)
    return traj


def polya_final_batch(init: UrnState, steps: int, runs: int, rng: RngSpec) -> np.ndarray:
    """Final proportions of many independent urn runs (run i consumes the
    same draws as ``polya_run(init, steps, rng.substream(i))``)."""
    add = 1 if init.replacement is Replacement.CLASSIC else 2
    u = np.empty((runs, steps), dtype=np.float64)
    for i in range(runs):
        u[i] = rng.substream(i).generator().random(steps)
    a = np.full(runs, float(init.a))
    total = float(init.a + init.b)
    for i in range(steps):
        drew_a = u[:, i] * total < a
        a += np.where(drew_a, add, 0)
        total += add
    return a / total


def beta_sample(p: BetaParams, rng: RngSpec, size: int | None = None):
    """Beta draw(s) via the gamma-ratio construction."""
    g = rng.generator()
    x = g.gamma(p.alpha, size=size)
    y = g.gamma(p.beta, size=size)
    return x / (x + y)


def dirichlet3_sample(a1: float, a2: float, a3: float, rng: RngSpec, size: int | None = None):
    """Dirichlet(a1, a2, a3) draw(s) on the 2-simplex (gamma-ratio)."""
    if min(a1, a2, a3) <= 0:
        raise ValueError("dirichlet parameters must be positive")
    g = rng.generator()
    x = np.stack([g.gamma(a1, size=size), g.gamma(a2, size=size), g.gamma(a3, size=size)])
    return x / x.sum(axis=0)


def beta_binomial_pmf(alpha: int, beta: int, n: int, k: int) -> float:
    """P(B = alpha + k) where B counts the first color of a classic urn
    started at (alpha, beta) after n draws:

        (k+a-1)! (n-k+b-1)! (a+b-1)! / ((n+a+b-1)! (a-1)! (b-1)!) * C(n,k)
    """
    if alpha < 1 or beta < 1:
        raise ValueError("alpha and beta must be integers >= 1")
    if not 0 <= k <= n:
        raise OutOfSupport(f"k={k} outside 0..{n}")
    lg = math.lgamma
    log_p = (
        lg(k + alpha) + lg(n - k + beta) + lg(alpha + beta)
        - lg(n + alpha + beta) - lg(alpha) - lg(beta)
        + lg(n + 1) - lg(k + 1) - lg(n - k + 1)
    )
    return math.exp(log_p)


def sample_beta_binomial(
    alpha: float, beta: float, n: int, rng: RngSpec, size: int | None = None
):
    """Color-a count after n classic-urn draws from (alpha, beta), sampled
    by compounding: p ~ Beta(alpha, beta), then Binomial(n, p).  Returned
    value includes the initial alpha balls."""
    g = rng.generator()
    x = g.gamma(alpha, size=size)
    y = g.gamma(beta, size=size)
    return alpha + g.binomial(n, x / (x + y))


def limit_anticentrality_sample(
    rule: GrowthRule, tau_v: int, L: int, rng: RngSpec, size: int | None = None
):
    """Sample the limiting normalized anti-centrality of a vertex with
    timestamp ``tau_v``, truncated at depth ``L``.

    The pendent-subtree fractions around the vertex are
    psi_l = phi_l * prod_{i<l} (1 - phi_i) with independent

        phi_0 ~ Beta(tau-1, 1)       [UA]   or  Beta(tau-3/2, 1/2)   [PA]
        phi_k ~ Beta(1, 1), k >= 1   [UA]   or  Beta(1/2, (k+1)/2)   [PA]

    and the limit is max_l psi_l.  Returns ``(value, residual)`` where
    ``residual = 1 - sum_{l<=L} psi_l`` bounds the truncation error.
    """
    if tau_v < 2:
        raise ValueError("timestamp must be >= 2")
    if L < 1:
        raise ValueError("truncation depth must be >= 1")
    m = 1 if size is None else int(size)
    g = rng.generator()
    if rule is GrowthRule.UA:
        a = np.full(L + 1, 1.0)
        b = np.ones(L + 1)
        a[0] = tau_v - 1.0
    else:
        a = np.full(L + 1, 0.5)
        a[0] = tau_v - 1.5
        b = (np.arange(L + 1) + 1.0) / 2.0
        b[0] = 0.5
    x = g.gamma(np.broadcast_to(a, (m, L + 1)))
    y = g.gamma(np.broadcast_to(b, (m, L + 1)))
    phi = x / (x + y)
    keep = np.cumprod(1.0 - phi, axis=1)
    psi = phi.copy()
    psi[:, 1:] *= keep[:, :-1]
    value = psi.max(axis=1)
    residual = keep[:, -1]
    if size is None:
        return float(value[0]), float(residual[0])
    return value, residual


def expected_H_diff(t_star: int, n: int) -> float:
    """Exact difference of expected balancedness between uniform growth
    from the star on t_star vertices and from the near-star (the star on
    t_star - 1 vertices with one extra edge on a leaf), both grown to n:

        -(t-3)(n+1){4(t-1)n^2 - (t^2-15t+26)n + (-t^2+19t-30)}
        / (t(t+1)(t+2)(t+3) n^3)
    """
    if t_star < 3:
        raise ValueError("needs t_star >= 3")
    if n < t_star:
        raise ValueError("n must be at least t_star")
    t = float(t_star)
    nf = float(n)
    num = -(t - 3.0) * (nf + 1.0) * (
        4.0 * (t - 1.0) * nf * nf - (t * t - 15.0 * t + 26.0) * nf + (-t * t + 19.0 * t - 30.0)
    )
    den = t * (t + 1.0) * (t + 2.0) * (t + 3.0) * nf ** 3
    return num / den


def expected_H_diff_limit(t_star: int) -> float:
    """Large-n limit of :func:`expected_H_diff`:
    -4(t-1)(t-3) / (t(t+1)(t+2)(t+3))."""
    if t_star < 3:
        raise ValueError("needs t_star >= 3")
    t = float(t_star)
    return -4.0 * (t - 1.0) * (t - 3.0) / (t * (t + 1.0) * (t + 2.0) * (t + 3.0))


def fourth_moment_beta_diff(alpha: float, t: float) -> float:
    """E[(psi1 - psi2)^4] for i.i.d. psi_i ~ Beta(alpha, t - alpha):

        12 a (a+1) (t-a) (t-a+1) / (t^2 (t+1)^2 (t+2) (t+3))
    """
    if not (0.5 <= alpha < t and t - alpha >= 0.5):
        raise ValueError("need 1/2 <= alpha < t and t - alpha >= 1/2")
    a = float(alpha)
    t = float(t)
    return (
        12.0 * a * (a + 1.0) * (t - a) * (t - a + 1.0)
        / (t * t * (t + 1.0) ** 2 * (t + 2.0) * (t + 3.0))
    )


def dirichlet_sq_cov(alpha1: float, alpha2: float, t: float) -> float:
    """Cov((psi1-psi2)^2, (phi1-phi2)^2) for i.i.d. Dirichlet vectors
    (psi_i, phi_i, 1-psi_i-phi_i) ~ Dir(a1, a2, t-a1-a2):

        4 a1 a2 {-2t^3 + (2 a1 a2 + 5 a1 + 5 a2 - 3)t^2
                 + (-5 a1 a2 + 6 a1 + 6 a2)t - 6 a1 a2}
        / (t^4 (t+1)^2 (t+2) (t+3))
    """
    if alpha1 < 0.5 or alpha2 < 0.5 or alpha1 + alpha2 >= t:
        raise ValueError("need a1, a2 >= 1/2 and a1 + a2 < t")
    a1, a2, t = float(alpha1), float(alpha2), float(t)
    num = 4.0 * a1 * a2 * (
        -2.0 * t ** 3
        + (2.0 * a1 * a2 + 5.0 * a1 + 5.0 * a2 - 3.0) * t * t
        + (-5.0 * a1 * a2 + 6.0 * a1 + 6.0 * a2) * t
        - 6.0 * a1 * a2
    )
    return num / (t ** 4 * (t + 1.0) ** 2 * (t + 2.0) * (t + 3.0))


def mori_tail_constant(a: float, b: float) -> float:
    """c(a, b) = Gamma(2a-2) / (2^(b-1) Gamma(a-1/2) Gamma(b)), the
    seed-dependent constant of the maximum-degree tail in PA trees."""
    if a < 2 or b < 1:
        raise ValueError("need a >= 2 and b >= 1")
    lg = math.lgamma
    return math.exp(lg(2 * a - 2) - (b - 1) * math.log(2.0) - lg(a - 0.5) - lg(b))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov goodness of fit (asymptotic p-values, no small-sample
# correction; suites use sample sizes >= 1e3).
# ---------------------------------------------------------------------------

def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution,
    Q(lam) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)."""
    if lam <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 101):
        term = math.exp(-2.0 * (k * lam) ** 2)
        total += sign * term
        if term < 1e-16 * max(total, 1e-300):
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """One-sample KS: sup distance between the empirical CDF and ``cdf``,
    with asymptotic p-value Q(sqrt(n) * D)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    d = float(max(hi.max(), lo.max()))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def ks_two_sample(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Two-sample KS with asymptotic p-value Q(sqrt(n1 n2 / (n1+n2)) * D)."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    n1, n2 = x.size, y.size
    if n1 == 0 or n2 == 0:
        raise ValueError("empty sample")
    allv = np.concatenate([x, y])
    c1 = np.searchsorted(x, allv, side="right") / n1
    c2 = np.searchsorted(y, allv, side="right") / n2
    d = float(np.abs(c1 - c2).max())
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return d, kolmogorov_sf(en * d)
