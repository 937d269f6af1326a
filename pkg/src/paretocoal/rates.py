"""Closed-form limit objects: merger rates, transition matrices, c_N laws.

Covers the continuous-time multiple-merger rates lambda_(i,j) for the
beta(2-alpha, alpha-beta) family (including the alpha = 1 logarithmic case
and the Kingman binary-merger limit), the discrete-time simultaneous-merger
transition matrix for alpha in (0,1), the Stirling-number boundary case at
alpha = 0, and the leading-order coalescence probability in every regime.

All gamma/beta evaluations run in log space; tables are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import log_beta, log_binomial, log_gamma


@dataclass(frozen=True)
class Params:
    """Tail exponent alpha >= 0 and size-bias exponent beta.

    beta < alpha is required below alpha = 2 (the rate normalizer involves
    Gamma(alpha - beta)); above 2 the limit no longer depends on beta.
    """

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha >= 0 required")
        if self.alpha < 2.0 and not self.beta < self.alpha:
            raise ValueError("beta < alpha required for alpha < 2")

    @property
    def regime(self) -> str:
        a = self.alpha
        if a < 1.0:
            return "xi"
        if a == 1.0:
            return "bs"
        if a < 2.0:
            return "beta"
        if a == 2.0:
            return "critical"
        return "kingman"


def _require_lambda_regime(params: Params) -> None:
    if params.regime not in ("bs", "beta"):
        raise ValueError(
            f"lambda rates are defined for alpha in [1, 2), got regime "
            f"{params.regime!r}"
        )


def lambda_rate(params: Params, i: int, j: int) -> float:
    """Rate of an i-to-j merger for the beta(2-alpha, alpha-beta) measure.

    lambda_(i,j) = C(i, j-1) B(i-j+1-alpha, alpha-beta+j-1) / B(2-alpha, alpha-beta).
    """
    _require_lambda_regime(params)
    if i < 2 or not 1 <= j < i:
        raise ValueError("need i >= 2 and 1 <= j < i")
    a, b = params.alpha, params.beta
    log_r = (
        log_binomial(i, j - 1)
        + log_beta(i - j + 1 - a, a - b + j - 1)
        - log_beta(2 - a, a - b)
    )
    return float(math.exp(log_r))


def lambda_row(params: Params, i: int) -> np.ndarray:
    """All rates lambda_(i, 1..i-1) as one vectorized log-space evaluation."""
    _require_lambda_regime(params)
    if i < 2:
        raise ValueError("i >= 2 required")
    a, b = params.alpha, params.beta
    j = np.arange(1, i, dtype=float)
    log_r = (
        log_binomial(float(i), j - 1)
        + log_beta(i - j + 1 - a, a - b + j - 1)
        - log_beta(2 - a, a - b)
    )
    return np.exp(log_r)


def kingman_rate(i: int, j: int) -> float:
    """Binary-merger rates: C(i, 2) for j = i-1, zero otherwise."""
    if i < 2 or not 1 <= j < i:
        raise ValueError("need i >= 2 and 1 <= j < i")
    return float(i * (i - 1) // 2) if j == i - 1 else 0.0


def _kingman_row(i: int) -> np.ndarray:
    row = np.zeros(i - 1)
    row[-1] = i * (i - 1) / 2.0
    return row


def rate_row(params: Params, i: int) -> np.ndarray:
    """Dispatch on regime: multiple-merger row or Kingman row."""
    if params.regime in ("bs", "beta"):
        return lambda_row(params, i)
    if params.regime in ("critical", "kingman"):
        return _kingman_row(i)
    raise ValueError("no continuous-time rates in the xi regime")


def total_rate(params: Params, i: int) -> float:
    """lambda_i, the total rate of leaving state i."""
    return float(rate_row(params, i).sum())


def block_loss_rate(params: Params, i: int) -> float:
    """r(i) = sum_j (i - j) lambda_(i,j), the mean block-loss speed."""
    row = rate_row(params, i)
    j = np.arange(1, i)
    return float(((i - j) * row).sum())


def mean_first_collision_size(params: Params, i: int) -> float:
    """Expected number of blocks taking part in the first collision.

    Uses the identity r(i) = lambda_i (E(U_i) - 1).
    """
    row = rate_row(params, i)
    j = np.arange(1, i)
    lam = row.sum()
    return float(1.0 + ((i - j) * row).sum() / lam)


def lambda_rate_moment_form(params: Params, i: int, j: int) -> float:
    """lambda_(i,j) rebuilt from the one-merger moments q_l = lambda_(l,1).

    Expanding the (1-u)^(j-1) factor of the rate integral binomially gives
    lambda_(i,j) = C(i, j-1) sum_{l=0}^{j-1} (-1)^l C(j-1, l) q_(i-j+1+l);
    an independent algebraic route used to cross-check lambda_rate. The
    alternating sum cancels, so expect absolute (not relative) accuracy.
    """
    _require_lambda_regime(params)
    if i < 2 or not 1 <= j < i:
        raise ValueError("need i >= 2 and 1 <= j < i")
    a, b = params.alpha, params.beta
    denom = log_beta(2 - a, a - b)

    def q(m: int) -> float:
        return math.exp(log_beta(m - a, a - b) - denom)

    total = math.fsum(
        (-1.0) ** l * math.comb(j - 1, l) * q(i - j + 1 + l) for l in range(j)
    )
    return math.comb(i, j - 1) * total


def comes_down_diagnostic(params: Params, M: int) -> np.ndarray:
    """Partial sums of 1/r(i) for i = 2..M.

    Bounded partial sums signal that the process started from infinitely
    many blocks reaches a finite count immediately; unbounded growth (as in
    the alpha = 1 case) signals it does not.
    """
    if M < 2:
        raise ValueError("M >= 2 required")
    inv = np.empty(M - 1)
    if params.regime in ("critical", "kingman"):
        i = np.arange(2, M + 1, dtype=float)
        inv = 2.0 / (i * (i - 1.0))
    else:
        for k, i in enumerate(range(2, M + 1)):
            row = rate_row(params, i)
            j = np.arange(1, i)
            inv[k] = 1.0 / float(((i - j) * row).sum())
    return np.cumsum(inv)


@dataclass(frozen=True)
class RateTable:
    """Triangular table of rates (j < i) or transition probabilities (j <= i).

    rows[i] holds the entries for block count i; probability rows are
    validated to sum to one at construction.
    """

    i_max: int
    kind: str
    _rows: dict[int, np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("rates", "probabilities"):
            raise ValueError("kind must be 'rates' or 'probabilities'")
        if self.kind == "probabilities":
            for i, row in self._rows.items():
                if i >= 2 and abs(row.sum() - 1.0) > 1e-10:
                    raise ValueError(f"row {i} sums to {row.sum()!r}, not 1")

    def row(self, i: int) -> np.ndarray:
        if i not in self._rows:
            raise ValueError(f"block count {i} outside table (i_max={self.i_max})")
        return self._rows[i]

    def entry(self, i: int, j: int) -> float:
        row = self.row(i)
        if not 1 <= j <= len(row):
            raise ValueError(f"no entry ({i}, {j}) in a {self.kind} table")
        return float(row[j - 1])

    def total(self, i: int) -> float:
        return float(self.row(i).sum())

    def to_csv(self) -> str:
        lines = ["i,j,value"]
        for i in sorted(self._rows):
            for j, v in enumerate(self.row(i), start=1):
                lines.append(f"{i},{j},{float(v):.12g}")
        return "\n".join(lines) + "\n"


def build_rate_table(params: Params, i_max: int) -> RateTable:
    """Materialized continuous-time rate table for i = 2..i_max."""
    if i_max < 2:
        raise ValueError("i_max >= 2 required")
    rows = {i: rate_row(params, i) for i in range(2, i_max + 1)}
    return RateTable(i_max=i_max, kind="rates", _rows=rows)


class LazyRateRows:
    """Rate rows computed on first use; duck-compatible with RateTable.

    Simulation from a large initial block count touches only the states a
    trajectory visits, so materializing the full triangle would be wasted
    work and memory.
    """

    kind = "rates"

    def __init__(self, params: Params, i_max: int):
        if i_max < 2:
            raise ValueError("i_max >= 2 required")
        self.params = params
        self.i_max = i_max
        self._cache: dict[int, np.ndarray] = {}

    def row(self, i: int) -> np.ndarray:
        if i < 2 or i > self.i_max:
            raise ValueError(f"block count {i} outside table (i_max={self.i_max})")
        row = self._cache.get(i)
        if row is None:
            row = rate_row(self.params, i)
            self._cache[i] = row
        return row


# ---------------------------------------------------------------------------
# Discrete-time simultaneous-merger matrix, alpha in (0, 1)

_I_MAX_HARD_CAP = 30  # composition enumeration is 2^(i-1) per row


def _require_xi(params: Params) -> None:
    if not 0.0 < params.alpha < 1.0:
        raise ValueError("xi-regime operations require 0 < alpha < 1")


def _xi_log_prefactor(params: Params, i: int, j: int) -> float:
    a, b = params.alpha, params.beta
    return (
        (j - 1) * math.log(a)
        + log_gamma(1 - b)
        - log_gamma(1 - b / a)
        + log_gamma(j - b / a)
        - log_gamma(i - b)
    )


def xi_merger_prob(params: Params, composition: tuple[int, ...]) -> float:
    """Probability of the specific (i_1,..,i_j)-merger, parts >= 1."""
    _require_xi(params)
    if len(composition) == 0 or any(p < 1 for p in composition):
        raise ValueError("composition parts must be >= 1")
    a = params.alpha
    i = sum(composition)
    j = len(composition)
    log_phi = _xi_log_prefactor(params, i, j) + sum(
        log_gamma(p - a) - log_gamma(1 - a) for p in composition
    )
    return float(math.exp(log_phi))


def _compositions(i: int, j: int):
    # Compositions of i into j positive parts via cut points.
    for cuts in itertools.combinations(range(1, i), j - 1):
        bounds = (0,) + cuts + (i,)
        yield tuple(bounds[k + 1] - bounds[k] for k in range(j))


def xi_transition_entry(params: Params, i: int, j: int) -> float:
    """P_(i,j): enumerate compositions of i into j parts and sum products."""
    _require_xi(params)
    if not 1 <= j <= i:
        raise ValueError("need 1 <= j <= i")
    a = params.alpha
    log_g1 = log_gamma(1 - a)
    # g[m] = Gamma(m - alpha) / (Gamma(1 - alpha) m!), all positive and of
    # moderate size for i <= 30, so plain products are safe here.
    g = [0.0] + [
        math.exp(log_gamma(m - a) - log_g1 - math.lgamma(m + 1))
        for m in range(1, i + 1)
    ]
    total = math.fsum(
        math.prod(g[p] for p in comp) for comp in _compositions(i, j)
    )
    log_pref = (
        _xi_log_prefactor(params, i, j)
        + math.lgamma(i + 1)
        - math.lgamma(j + 1)
    )
    return float(math.exp(log_pref) * total)


def xi_transition_matrix(params: Params, i_max: int) -> RateTable:
    """Exact transition matrix of the discrete simultaneous-merger chain."""
    _require_xi(params)
    if not 1 <= i_max <= _I_MAX_HARD_CAP:
        raise ValueError(f"i_max must be in 1..{_I_MAX_HARD_CAP}")
    rows = {1: np.array([1.0])}
    for i in range(2, i_max + 1):
        rows[i] = np.array(
            [xi_transition_entry(params, i, j) for j in range(1, i + 1)]
        )
    return RateTable(i_max=i_max, kind="probabilities", _rows=rows)


def xi_reassembled_entry(params: Params, i: int, j: int) -> float:
    """P_(i,j) rebuilt from per-composition merger probabilities.

    (1/j!) sum over compositions of multinomial(i; parts) * phi_j(parts);
    independent of xi_transition_entry's factorization, used as a
    consistency check.
    """
    total = 0.0
    log_i_fact = math.lgamma(i + 1)
    for comp in _compositions(i, j):
        log_multi = log_i_fact - sum(math.lgamma(p + 1) for p in comp)
        total += math.exp(log_multi) * xi_merger_prob(params, comp)
    return total / math.factorial(j)


def stirling_triangle(i_max: int) -> list[list[int]]:
    """Unsigned Stirling numbers of the first kind, s[i][j], exact integers."""
    s = [[0] * (i_max + 1) for _ in range(i_max + 1)]
    s[0][0] = 1
    for i in range(1, i_max + 1):
        for j in range(1, i + 1):
            s[i][j] = s[i - 1][j - 1] + (i - 1) * s[i - 1][j]
    return s


def stirling_case_matrix(beta: float, i_max: int) -> RateTable:
    """Transition matrix at the alpha = 0 boundary, beta < 0.

    P_(i,j) = (-beta)^j Gamma(-beta) / Gamma(i - beta) * s_(i,j) with
    unsigned first-kind Stirling numbers s.
    """
    if beta >= 0:
        raise ValueError("the alpha = 0 case requires beta < 0")
    if not 1 <= i_max <= _I_MAX_HARD_CAP:
        raise ValueError(f"i_max must be in 1..{_I_MAX_HARD_CAP}")
    s = stirling_triangle(i_max)
    rows = {}
    for i in range(1, i_max + 1):
        log_base = log_gamma(-beta) - log_gamma(i - beta)
        row = np.array(
            [
                math.exp(
                    log_base
                    + j * math.log(-beta)
                    + math.log(s[i][j])
                )
                if s[i][j]
                else 0.0
                for j in range(1, i + 1)
            ]
        )
        rows[i] = row
    return RateTable(i_max=i_max, kind="probabilities", _rows=rows)


# ---------------------------------------------------------------------------
# Leading-order coalescence probability per regime


def c_N_asymptotic(params: Params, N: int) -> tuple[float, str]:
    """Leading-order c_N and the regime tag it was computed under.

    xi:       (1-alpha)/(1-beta), an N-free constant;
    bs:       1/log N;
    beta:     alpha mu^-alpha B(2-alpha, alpha-beta) N^-(alpha-1);
    critical: log N / (2N);
    kingman:  (rho/mu^2)/N with mu = alpha/(alpha-1), rho = alpha/(alpha-2).
    """
    if N < 3:
        raise ValueError("N >= 3 required")
    a, b = params.alpha, params.beta
    regime = params.regime
    if regime == "xi":
        return (1.0 - a) / (1.0 - b), regime
    if regime == "bs":
        return 1.0 / math.log(N), regime
    if regime == "beta":
        mu = a / (a - 1.0)
        val = a * mu ** (-a) * math.exp(log_beta(2 - a, a - b)) * N ** (-(a - 1.0))
        return val, regime
    if regime == "critical":
        return 0.5 * math.log(N) / N, regime
    mu = a / (a - 1.0)
    rho = a / (a - 2.0)
    return (rho / (mu * mu)) / N, regime
