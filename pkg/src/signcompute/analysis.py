"""Closed-form performance of the protocol.

Expected contention length S(L) is computed exactly in rational arithmetic;
averaged rates are binomial mixtures evaluated in floating point, with the
incomplete-beta terms done at extended precision.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import special

from .signature_code import signature_length

_DPS = 50


# ---------------------------------------------------------------------------
# expected number of slots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotCountTable:
    K: int
    values: tuple[Fraction, ...]

    @property
    def L_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, L: int) -> Fraction:
        return self.values[L]


@functools.lru_cache(maxsize=64)
def slot_count_table(K: int, L_max: int) -> SlotCountTable:
    """Exact S(L) for L = 0..L_max.

    S(0) = 1 (the empty group's slot is still observed), S(L) = L for
    1 <= L <= K, and for L > K

        S(L) = 1 + 2^-L sum_j C(L, j) [S(j) + S(L - j)],

    solved for S(L), which appears on the right through j = 0 and j = L.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    S = [Fraction(1)]
    for L in range(1, L_max + 1):
        if L <= K:
            S.append(Fraction(L))
            continue
        w = Fraction(1, 2 ** (L - 1))
        rest = sum(math.comb(L, j) * S[j] for j in range(1, L))
        S.append((1 + w * (S[0] + rest)) / (1 - w))
    return SlotCountTable(K, tuple(S))


def expected_slots(L: int, K: int, table: SlotCountTable | None = None) -> Fraction:
    if L < 0:
        raise ValueError("L must be >= 0")
    if table is None or table.K != K or table.L_max < L:
        table = slot_count_table(K, L)
    return table[L]


def alpha_star(K: int) -> Fraction:
    return 1 + Fraction(1, K)


def beta_star(K: int) -> Fraction:
    return 1 + Fraction(1, (K + 1) * (2**K - 1)) + Fraction(2, K + 1) + Fraction(1, K)


@dataclass(frozen=True)
class BoundRow:
    L: int
    S: Fraction
    lower: Fraction
    upper: Fraction

    @property
    def ok(self) -> bool:
        return self.lower <= self.S <= self.upper

    @property
    def margins(self) -> tuple[Fraction, Fraction]:
        return self.S - self.lower, self.upper - self.S


@dataclass(frozen=True)
class BoundsReport:
    K: int
    rows: tuple[BoundRow, ...]

    @property
    def violations(self) -> list[BoundRow]:
        return [r for r in self.rows if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_bounds(table: SlotCountTable, K: int | None = None, L_max: int | None = None) -> BoundsReport:
    """Compare the exact table with alpha*L - 1 <= S(L) <= beta*L - 1 for K < L <= L_max."""
    K = table.K if K is None else K
    if K != table.K:
        raise ValueError("table was computed for a different K")
    L_max = table.L_max if L_max is None else L_max
    if L_max > table.L_max:
        table = slot_count_table(K, L_max)
    a, b = alpha_star(K), beta_star(K)
    rows = tuple(BoundRow(L, table[L], a * L - 1, b * L - 1) for L in range(K + 1, L_max + 1))
    return BoundsReport(K, rows)


def slot_count_distribution(L: int, K: int, n_max: int | None = None) -> np.ndarray:
    """Distribution of the random number of slots used for L users.

    Entry n is P(slots = n), truncated at ``n_max`` (the missing tail mass is
    1 - sum). Used for E[L / slots], which differs from L / S(L) once L > K.
    """
    n_max = n_max or 8 * L + 256
    dists: dict[int, np.ndarray] = {}

    def get(j: int) -> np.ndarray:
        if j in dists:
            return dists[j]
        f = np.zeros(n_max + 1)
        if j <= K:
            f[max(j, 1)] = 1.0
        else:
            g = np.zeros(n_max + 1)
            for i in range(1, j):
                w = math.comb(j, i) / 2.0**j
                g += w * np.convolve(get(i), get(j - i))[: n_max + 1]
            stay = 2.0 / 2.0**j
            for n in range(1, n_max + 1):
                f[n] = g[n - 1] + (stay * f[n - 2] if n >= 2 else 0.0)
        dists[j] = f
        return f

    return get(L)


def expected_resolution_ratio(L: int, K: int) -> float:
    """E[L / slots] for a contention period of L users."""
    if L <= K:
        return 1.0
    f = slot_count_distribution(L, K)
    n = np.arange(len(f))
    return float(np.sum(f[1:] * L / n[1:]))


# ---------------------------------------------------------------------------
# activity distribution and incomplete beta
# ---------------------------------------------------------------------------


def q_dist(M: int, p: float, L: int) -> float:
    """P(L users active) = C(M, L) p^L (1-p)^(M-L), evaluated in the log domain."""
    if not 0 <= L <= M:
        return 0.0
    if p == 0:
        return 1.0 if L == 0 else 0.0
    if p == 1:
        return 1.0 if L == M else 0.0
    return math.exp(math.log(math.comb(M, L)) + L * math.log(p) + (M - L) * math.log1p(-p))


def q_hat(M: int, p: float, L: int) -> float:
    """Activity distribution conditioned on at least one active user."""
    if L == 0:
        return 0.0
    return q_dist(M, p, L) / -math.expm1(M * math.log1p(-p))


@dataclass(frozen=True)
class BinomialSupport:
    L_max: int
    tail: float  # P(L > L_max)
    probs: tuple[float, ...]  # q(0..L_max)


@functools.lru_cache(maxsize=256)
def binomial_support(M: int, p: float, tol: float = 1e-12) -> BinomialSupport:
    """Smallest L_max with P(L > L_max) < tol."""
    probs = [q_dist(M, p, L) for L in range(M + 1)]
    tails = [0.0] * (M + 1)
    acc = 0.0
    for L in range(M, 0, -1):
        acc += probs[L]
        tails[L - 1] = acc
    L_max = next(L for L in range(M + 1) if tails[L] < tol)
    return BinomialSupport(L_max, tails[L_max], tuple(probs[: L_max + 1]))


def _is_int(v) -> bool:
    return float(v).is_integer()


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Integer a, b use the binomial tail identity
    I_x(a, b) = P(Binomial(a + b - 1, x) >= a) summed at 50 digits; other
    arguments fall back to scipy's continued-fraction evaluation.
    """
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x == 0:
        return 0.0
    if x == 1:
        return 1.0
    if _is_int(a) and _is_int(b):
        return float(_binomial_tail(mpmath.mpf(x), int(a), int(b)))
    return float(special.betainc(a, b, x))


def _binomial_tail(x, a: int, b: int):
    with mpmath.workdps(_DPS):
        n = a + b - 1
        return mpmath.fsum(mpmath.binomial(n, j) * x**j * (1 - x) ** (n - j) for j in range(a, n + 1))


def prob_at_most(M: int, p: float, K: int) -> float:
    """P(L <= K) = I_{1-p}(M - K, K + 1)."""
    if K >= M:
        return 1.0
    return reg_inc_beta(1 - p, M - K, K + 1)


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


def avg_res_rate_bound(M: int, p: float, K: int) -> float:
    """Lower bound on the average resolution rate (clamped at 0).

    (beta I_{1-p}(M-K, K+1) + I_p(K+1, M-K) - q0 beta) / ((1 - q0) beta)
    """
    if not 0 < p < 1 or K < 1:
        raise ValueError("need 0 < p < 1 and K >= 1")
    if K >= M:
        return 1.0
    with mpmath.workdps(_DPS):
        pm = mpmath.mpf(p)
        b = mpmath.mpf(beta_star(K).numerator) / beta_star(K).denominator
        q0 = (1 - pm) ** M
        low = _binomial_tail(1 - pm, M - K, K + 1)
        high = _binomial_tail(pm, K + 1, M - K)
        value = (b * low + high - q0 * b) / ((1 - q0) * b)
    return max(float(value), 0.0)


def exact_res_rate(M: int, p: float, K: int, tol: float = 1e-12) -> float:
    """Average of L / S(L) over the conditional activity distribution."""
    sup = binomial_support(M, p, tol)
    table = slot_count_table(K, max(sup.L_max, 1))
    q0 = sup.probs[0]
    terms = [sup.probs[L] * L / float(table[L]) for L in range(1, sup.L_max + 1)]
    return math.fsum(terms) / (1 - q0)


def res_rate_proxy(M: int, p: float, K: int, tol: float = 1e-12) -> float:
    """Mixture with S(L) replaced by L for L <= K and beta*L - 1 above."""
    sup = binomial_support(M, p, tol)
    b = float(beta_star(K))
    terms = [sup.probs[L] * (1.0 if L <= K else L / (b * L - 1)) for L in range(1, sup.L_max + 1)]
    return math.fsum(terms) / (1 - sup.probs[0])


def expected_empirical_res_rate(M: int, p: float, K: int, tol: float = 1e-12) -> float:
    """Conditional average of E[L / slots], the per-period resolution ratio."""
    sup = binomial_support(M, p, tol)
    terms = [sup.probs[L] * expected_resolution_ratio(L, K) for L in range(1, sup.L_max + 1)]
    return math.fsum(terms) / (1 - sup.probs[0])


def r_plnc(P: float) -> float:
    """Computation rate 1/2 log2+(P)."""
    if P <= 0:
        raise ValueError("P must be positive")
    return 0.5 * math.log2(P) if P >= 1 else 0.0


def signature_overhead_bits(M: int, K: int) -> float:
    """(K + 2) log2 M, the bit budget a signature never exceeds."""
    return (K + 2) * math.log2(M)


@dataclass(frozen=True)
class NetRateBounds:
    lower: float  # S(L) = L for L <= K, beta*L - 1 above
    lower_uncorrected: float  # L / (beta*L - 1) for every L >= 1
    upper: float
    lower_limit: float  # D -> infinity limits
    uncorrected_limit: float
    truncation: float  # bound on the mass dropped from the binomial sums
    L_max: int


def net_rate_bounds(M: int, p: float, K: int, P: float, D: float, conditional: bool = False, tol: float = 1e-12) -> NetRateBounds:
    """Lower and upper bounds on the average net rate in bits per channel use.

    ``lower`` combines R_net(L) >= R_res(L) R_plnc D / ((K+2) log2 M + D) with
    S(L) = L for L <= K and S(L) <= beta*L - 1 above. ``lower_uncorrected`` applies
    L / (beta*L - 1) to every L; for small L that ratio exceeds 1 = L / S(L),
    so it is not a bound and can cross ``upper``.

    Binomial weights q(L) are unconditioned by default; pass
    ``conditional=True`` to divide by P(L > 0).
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    sup = binomial_support(M, p, tol)
    b = float(beta_star(K))
    rate = r_plnc(P)
    payload_share = D / (signature_overhead_bits(M, K) + D)
    Ls = range(1, sup.L_max + 1)
    uncorrected = math.fsum(sup.probs[L] * L / (b * L - 1) for L in Ls)
    valid = math.fsum(sup.probs[L] * (1.0 if L <= K else L / (b * L - 1)) for L in Ls)
    upper = math.fsum(sup.probs[L] * 0.5 * math.log2(1 + L * P) for L in Ls)
    scale = 1 / (1 - sup.probs[0]) if conditional else 1.0
    nxt = sup.L_max + 1
    trunc = sup.tail * max(nxt / (b * nxt - 1) * rate, 0.5 * math.log2(1 + M * P))
    return NetRateBounds(
        lower=scale * valid * rate * payload_share,
        lower_uncorrected=scale * uncorrected * rate * payload_share,
        upper=scale * upper,
        lower_limit=scale * valid * rate,
        uncorrected_limit=scale * uncorrected * rate,
        truncation=scale * trunc,
        L_max=sup.L_max,
    )


@dataclass(frozen=True)
class RateReport:
    M: int
    p: float
    K: int
    P: float
    D: int
    q: int
    N_w: float
    N: float
    R_plnc: float
    R_res: tuple[float, ...]  # index L - 1
    R_net: tuple[float, ...]
    R_res_avg: float
    R_res_bound: float
    R_net_lower: float
    R_net_upper: float


def rate_report(M: int, p: float, K: int, P: float, D: int, q: int = 2, tol: float = 1e-12) -> RateReport:
    """Per-L and averaged rates; N = (N_w + D) / R_plnc channel uses per slot."""
    rate = r_plnc(P)
    if rate <= 0:
        raise ValueError("P must exceed 1 for a positive computation rate")
    N_w = signature_length(M, K, q) * math.log2(q)
    N = (N_w + D) / rate
    sup = binomial_support(M, p, tol)
    table = slot_count_table(K, max(sup.L_max, 1))
    r_res = tuple(L / float(table[L]) for L in range(1, sup.L_max + 1))
    r_net = tuple(r * D / N for r in r_res)
    bounds = net_rate_bounds(M, p, K, P, D, tol=tol)
    return RateReport(
        M, p, K, P, D, q, N_w, N, rate, r_res, r_net,
        R_res_avg=exact_res_rate(M, p, K, tol),
        R_res_bound=avg_res_rate_bound(M, p, K),
        R_net_lower=bounds.lower,
        R_net_upper=bounds.upper,
    )
