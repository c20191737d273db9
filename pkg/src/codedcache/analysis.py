"""Closed-form latency analysis.

Everything here is exact rational arithmetic; callers convert to float only
when reporting.  The closed forms cover the no-redundancy regime (z = 0);
redundant-storage latencies come from simulated plans instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Callable, Sequence

from .combinatorics import binom
from .delivery import count_messages
from .placement import SystemConfig


@dataclass(frozen=True)
class LatencyReport:
    """Per-server delivery rates in file units, with both totals."""

    per_server_rate: tuple[Fraction, ...]
    successive_T: Fraction
    parallel_T: Fraction

    def __post_init__(self):
        P = len(self.per_server_rate)
        assert self.parallel_T <= self.successive_T <= P * self.parallel_T or (
            self.successive_T == 0 and self.parallel_T == 0
        )


def report_from_counts(counts: Sequence[int], denominator: int) -> LatencyReport:
    """Rates from per-server message counts; denominator is the number of
    messages worth one file, (rho - z) * C(K, t)."""
    rates = tuple(Fraction(c, denominator) for c in counts)
    return LatencyReport(
        per_server_rate=rates,
        successive_T=sum(rates, Fraction(0)),
        parallel_T=max(rates) if rates else Fraction(0),
    )


def _check_degrees(q: Sequence[int], K: int, rho: int) -> None:
    if any(not 0 <= qp <= K for qp in q):
        raise ValueError("each degree must lie in [0, K]")
    if sum(q) != K * rho:
        raise ValueError(f"degrees must sum to K*rho = {K * rho}, got {sum(q)}")


def latency_successive(q: Sequence[int], K: int, t: int, rho: int) -> Fraction:
    """Total delivery time when servers take turns, for degree vector q."""
    if not 0 <= t <= K:
        raise ValueError(f"t must lie in [0, K], got {t}")
    _check_degrees(q, K, rho)
    total = sum(count_messages(qp, K, t) for qp in q)
    return Fraction(total, rho * binom(K, t))


def latency_parallel(q: Sequence[int], K: int, t: int, rho: int) -> Fraction:
    """Delivery time when servers transmit simultaneously: the busiest
    server's message count sets the clock."""
    if not 0 <= t <= K:
        raise ValueError(f"t must lie in [0, K], got {t}")
    _check_degrees(q, K, rho)
    worst = max(count_messages(qp, K, t) for qp in q)
    return Fraction(worst, rho * binom(K, t))


def latency_report(q: Sequence[int], K: int, t: int, rho: int) -> LatencyReport:
    _check_degrees(q, K, rho)
    counts = [count_messages(qp, K, t) for qp in q]
    return report_from_counts(counts, rho * binom(K, t))


def expected_latency_successive_t(P: int, K: int, rho: int, t: int) -> Fraction:
    """Average successive delivery time over uniformly random topologies,
    for an explicit integer cache parameter t (z = 0 scheme)."""
    if not 0 <= t <= K:
        raise ValueError(f"t must lie in [0, K], got {t}")
    if not 1 <= rho <= P:
        raise ValueError(f"rho must lie in [1, P], got {rho}")
    denom = binom(P, rho) ** K
    tail = sum(
        Fraction(
            binom(K, qv) * binom(P - 1, rho - 1) ** qv * binom(P - 1, rho) ** (K - qv),
            denom,
        )
        * binom(K - qv, t + 1)
        for qv in range(K + 1)
    )
    return Fraction(P, rho) * Fraction(K - t, t + 1) - Fraction(P, rho * binom(K, t)) * tail


def expected_latency_successive(config: SystemConfig) -> Fraction:
    """Average successive delivery time over uniformly random topologies."""
    t = config.t
    if config.z != 0:
        raise ValueError("the closed form requires M_S = N/rho (z = 0)")
    return expected_latency_successive_t(config.P, config.K, config.rho, t)


def min_storage_latency(config: SystemConfig) -> Fraction:
    """Uncoded-delivery time at the smallest feasible server storage."""
    target = (Fraction(config.N) - config.M_U) / config.rho
    if config.M_S != target:
        raise ValueError(
            f"minimum-storage baseline needs M_S = (N - M_U)/rho = {target}, got {config.M_S}"
        )
    return config.K * (1 - Fraction(config.M_U, config.N))


def min_storage_latency_parallel(q: Sequence[int], config: SystemConfig) -> Fraction:
    """Minimum-storage baseline under simultaneous transmission: the busiest
    server unicasts q_p chunks of (1 - M_U/N)/rho file units each."""
    _check_degrees(q, config.K, config.rho)
    per_chunk = (1 - Fraction(config.M_U, config.N)) / config.rho
    return max(q) * per_chunk


def lemma1_holds(n1: int, n2: int, r: int) -> bool:
    """Moving one unit from the larger of two binomial arguments toward the
    smaller never increases the sum of the coefficients."""
    if r < 1 or n1 < r or n2 < n1 + 2:
        raise ValueError(f"need 1 <= r <= n1 and n2 >= n1 + 2, got ({n1}, {n2}, {r})")
    return binom(n1, r) + binom(n2, r) >= binom(n1 + 1, r) + binom(n2 - 1, r)


@dataclass(frozen=True)
class MemoryShare:
    """Convex split of a non-integer cache parameter across its integer
    neighbours: run the t_lo scheme on an alpha fraction of every file and
    the t_hi scheme on the rest."""

    t_lo: int
    t_hi: int
    alpha: Fraction

    def __post_init__(self):
        assert 0 <= self.alpha <= 1
        assert self.t_lo <= self.t_hi


def memory_share(config: SystemConfig) -> MemoryShare:
    t_frac = config.t_exact
    if not 0 <= config.M_U <= config.N:
        raise ValueError("M_U must lie in [0, N]")
    lo = floor(t_frac)
    if t_frac == lo:
        return MemoryShare(t_lo=lo, t_hi=lo, alpha=Fraction(1))
    return MemoryShare(t_lo=lo, t_hi=lo + 1, alpha=(lo + 1) - t_frac)


def share_latency(share: MemoryShare, fn: Callable[[int], Fraction]) -> Fraction:
    """Combined latency alpha*fn(t_lo) + (1-alpha)*fn(t_hi)."""
    if share.t_lo == share.t_hi:
        return fn(share.t_lo)
    return share.alpha * fn(share.t_lo) + (1 - share.alpha) * fn(share.t_hi)


def best_topology_latency(K: int, t: int) -> Fraction:
    """Floor over all topologies for successive delivery: all users on the
    same rho servers."""
    return Fraction(K - t, t + 1)


@dataclass(frozen=True)
class TopologyExtremes:
    best_q: tuple[int, ...]
    best_T: Fraction
    worst_q: tuple[int, ...]
    worst_T: Fraction


def topology_extremes(config: SystemConfig, mode: str) -> TopologyExtremes:
    """Degree vectors attaining the extreme delivery times, with values.

    Successive: concentrating all users on rho servers is best and the
    balanced vector is worst; simultaneous transmission swaps the roles
    (a server connected to everyone is the bottleneck).
    """
    t = config.t
    if config.z != 0:
        raise ValueError("closed-form extremes require z = 0")
    P, K, rho = config.P, config.K, config.rho
    concentrated = tuple([K] * rho + [0] * (P - rho))
    base, extra = divmod(K * rho, P)
    balanced = tuple([base + 1] * extra + [base] * (P - extra))
    if mode == "successive":
        return TopologyExtremes(
            best_q=concentrated,
            best_T=latency_successive(concentrated, K, t, rho),
            worst_q=balanced,
            worst_T=latency_successive(balanced, K, t, rho),
        )
    if mode == "parallel":
        return TopologyExtremes(
            best_q=balanced,
            best_T=latency_parallel(balanced, K, t, rho),
            worst_q=concentrated,
            worst_T=latency_parallel(concentrated, K, t, rho),
        )
    raise ValueError(f"unknown mode {mode!r}")
