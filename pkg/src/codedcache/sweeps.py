"""Experiment drivers: point evaluation, Monte Carlo sweeps, end-to-end
verification, fixed-topology replay.

A sweep point with fractional cache or storage parameters is evaluated as a
convex mixture of integer-parameter schemes: each file is split by weight,
every sub-scheme runs on its slice, and per-server times add.  Simulated and
enumerated averages use exact rational arithmetic internally; floats appear
only in rendered CSV cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Sequence

from .analysis import (
    MemoryShare,
    best_topology_latency,
    expected_latency_successive_t,
    latency_successive,
    memory_share,
    share_latency,
)
from .combinatorics import binom
from .delivery import (
    DecodeFailureError,
    count_messages,
    decode_user,
    plan_parallel_greedy,
    plan_successive,
    structural_counts_parallel,
    structural_counts_successive,
    worst_case_demands,
)
from .galois import GeneratorMatrix
from .placement import SystemConfig, place, storage_audit
from .rng import SplitMix64
from .topology import (
    Topology,
    degree_vector,
    enumerate_topologies,
    sample_topology,
)

MODES = ("successive", "parallel")

CSV_COLUMNS = (
    "P", "K", "N", "rho", "M_U", "M_S", "mode", "method",
    "T_best", "T_worst", "T_avg", "stderr", "trials", "seed", "infeasible",
)


@dataclass(frozen=True)
class PointDecomposition:
    """How one (M_U, M_S) operating point splits into integer-parameter
    sub-schemes.  Weights are file fractions; baseline_weight goes to the
    uncoded minimum-storage scheme, the rest to coded schemes at the listed
    redundancy levels.  All components share the same cache split."""

    feasible: bool
    baseline_weight: Fraction
    coded: tuple[tuple[Fraction, int], ...]  # (weight, z) pairs
    share: MemoryShare | None

    @property
    def pure_uncoded(self) -> bool:
        return self.feasible and not self.coded

    @property
    def max_z(self) -> int:
        return max((z for _, z in self.coded), default=0)


def decompose_point(config: SystemConfig) -> PointDecomposition:
    if not config.feasible:
        return PointDecomposition(False, Fraction(0), (), None)
    N, rho = config.N, config.rho
    share = memory_share(config)
    ms = min(config.M_S, Fraction(N))  # storage beyond the library is idle
    if ms * rho >= N:
        z_frac = rho - Fraction(N) / ms
        z_lo = floor(z_frac)
        if z_frac == z_lo:
            coded = ((Fraction(1), z_lo),)
        else:
            z_hi = z_lo + 1
            lo_ms = Fraction(N, rho - z_lo)
            hi_ms = Fraction(N, rho - z_hi)
            beta = (hi_ms - ms) / (hi_ms - lo_ms)
            coded = ((beta, z_lo), (1 - beta, z_hi))
        return PointDecomposition(True, Fraction(0), coded, share)
    # between minimum storage and N/rho: blend the uncoded baseline with
    # the z=0 coded scheme; feasibility guarantees M_U > 0 here
    a = (N - rho * ms) / config.M_U
    coded = ((1 - a, 0),) if a < 1 else ()
    return PointDecomposition(True, a, coded, share)


def affordable_decompositions(config: SystemConfig) -> list[PointDecomposition]:
    """Every placement the storage budget can fund, by rising redundancy.

    Storage above N/rho opens a choice: each lower integer redundancy
    level also fits the budget, with the leftover space idle.  The last
    entry is the full-budget decomposition; points without headroom (the
    baseline blends below N/rho) have exactly one entry.
    """
    full = decompose_point(config)
    if not full.feasible:
        raise ValueError("operating point is infeasible")
    if full.baseline_weight or not full.coded:
        return [full]
    z_cap = min(z for _, z in full.coded)
    out = [
        PointDecomposition(True, Fraction(0), ((Fraction(1), z),), full.share)
        for z in range(z_cap + 1)
    ]
    if len(full.coded) > 1:
        out.append(full)
    return out


def _mode_decompositions(config: SystemConfig, mode: str) -> list[PointDecomposition]:
    # successive transmission always deploys the full budget: extra
    # redundancy shrinks covers, so the total only improves.  In parallel
    # mode more redundancy concentrates load on covering servers, so the
    # cell keeps every affordable level in play and deploys the one whose
    # measured busiest-server average is lowest.
    if mode == "parallel":
        return affordable_decompositions(config)
    return [decompose_point(config)]


def _best_candidate(accs: list[_Welford]) -> _Welford:
    # lowest mean wins; ties go to the later entry (more redundancy)
    best = accs[0]
    for acc in accs[1:]:
        if acc.mean <= best.mean:
            best = acc
    return best


def _share_terms(share: MemoryShare) -> list[tuple[Fraction, int]]:
    if share.t_lo == share.t_hi:
        return [(Fraction(1), share.t_lo)]
    return [(share.alpha, share.t_lo), (1 - share.alpha, share.t_hi)]


def per_server_times(
    topology: Topology,
    config: SystemConfig,
    decomp: PointDecomposition,
    mode: str,
) -> tuple[Fraction, ...]:
    """Exact transmission time of each server, in file units, for the full
    mixture at this operating point on this topology."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not decomp.feasible:
        raise ValueError("operating point is infeasible")
    K, N, rho = config.K, config.N, config.rho
    times = [Fraction(0)] * config.P
    if decomp.baseline_weight:
        per_chunk = decomp.baseline_weight * (1 - Fraction(config.M_U, N)) / rho
        for p, qp in enumerate(degree_vector(topology)):
            times[p] += qp * per_chunk
    counter = (
        structural_counts_parallel if mode == "parallel"
        else structural_counts_successive
    )
    for w, z in decomp.coded:
        if not w:
            continue
        for tw, t in _share_terms(decomp.share):
            if not tw or t == K:
                continue
            counts = counter(topology, t, z)
            denom = (rho - z) * binom(K, t)
            for p in range(config.P):
                times[p] += w * tw * Fraction(counts[p], denom)
    return tuple(times)


def point_latency(topology: Topology, config: SystemConfig, mode: str) -> Fraction:
    """Delivery time of the mixture on one topology: total server time when
    servers alternate, busiest server when they transmit together."""
    times = per_server_times(topology, config, decompose_point(config), mode)
    return max(times) if mode == "parallel" else sum(times, Fraction(0))


@dataclass(frozen=True)
class FormulaValues:
    T_best: Fraction | None
    T_worst: Fraction | None
    T_avg: Fraction | None


def formula_point(config: SystemConfig, mode: str) -> FormulaValues:
    """Closed-form extremes and average where they exist.

    Coverage: any point whose coded components all sit at z = 0 (the
    redundant-storage regime has no closed forms).  The average is only
    known for successive transmission.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    decomp = decompose_point(config)
    if not decomp.feasible:
        raise ValueError("operating point is infeasible")
    if decomp.max_z > 0:
        return FormulaValues(None, None, None)
    P, K, N, rho = config.P, config.K, config.N, config.rho
    a = decomp.baseline_weight
    coded_w = 1 - a
    share = decomp.share
    base_total = a * K * (1 - Fraction(config.M_U, N))
    if mode == "successive":
        base_deg, extra = divmod(K * rho, P)
        balanced = tuple([base_deg + 1] * extra + [base_deg] * (P - extra))
        best = base_total + coded_w * share_latency(
            share, lambda t: best_topology_latency(K, t)
        )
        worst = base_total + coded_w * share_latency(
            share, lambda t: latency_successive(balanced, K, t, rho)
        )
        avg = base_total + coded_w * share_latency(
            share, lambda t: expected_latency_successive_t(P, K, rho, t)
        )
        return FormulaValues(best, worst, avg)

    def busiest(d: int) -> Fraction:
        val = a * d * (1 - Fraction(config.M_U, N)) / rho
        val += coded_w * share_latency(
            share, lambda t: Fraction(count_messages(d, K, t), rho * binom(K, t))
        )
        return val

    return FormulaValues(busiest(math.ceil(K * rho / P)), busiest(K), None)


@dataclass
class _Welford:
    n: int = 0
    total: Fraction = field(default_factory=lambda: Fraction(0))
    total_sq: Fraction = field(default_factory=lambda: Fraction(0))
    lo: Fraction | None = None
    hi: Fraction | None = None

    def add(self, x: Fraction) -> None:
        self.n += 1
        self.total += x
        self.total_sq += x * x
        self.lo = x if self.lo is None or x < self.lo else self.lo
        self.hi = x if self.hi is None or x > self.hi else self.hi

    @property
    def mean(self) -> Fraction:
        return self.total / self.n

    @property
    def stderr(self) -> float | None:
        if self.n < 2:
            return None
        var = (self.total_sq - self.total * self.total / self.n) / (self.n - 1)
        return math.sqrt(float(var / self.n))


@dataclass(frozen=True)
class CellStats:
    T_best: Fraction
    T_worst: Fraction
    T_avg: Fraction
    stderr: float | None
    trials: int


def simulate_cell(
    config: SystemConfig, modes: Sequence[str], trials: int, cell_seed: int
) -> dict[str, CellStats]:
    """Seeded per-mode latency statistics over shared sampled topologies.

    A parallel cell evaluates every affordable placement on the same
    sample and reports the one with the lowest average busiest-server
    time, so granting more storage never raises the reported average.
    """
    cands = {m: _mode_decompositions(config, m) for m in modes}
    accs = {m: [_Welford() for _ in cands[m]] for m in modes}
    for i in range(trials):
        topo = sample_topology(config, cell_seed + i)
        for m in modes:
            for acc, decomp in zip(accs[m], cands[m]):
                times = per_server_times(topo, config, decomp, m)
                val = max(times) if m == "parallel" else sum(times, Fraction(0))
                acc.add(val)
    out = {}
    for m in modes:
        a = _best_candidate(accs[m])
        out[m] = CellStats(a.lo, a.hi, a.mean, a.stderr, a.n)
    return out


def enumerate_cell(
    config: SystemConfig, modes: Sequence[str], bound: int = 10_000_000
) -> dict[str, CellStats]:
    """Exact per-mode latency statistics over all topologies, with the
    same placement choice rule as simulate_cell (here against the exact
    average, since the enumeration covers the whole distribution)."""
    cands = {m: _mode_decompositions(config, m) for m in modes}
    accs = {m: [_Welford() for _ in cands[m]] for m in modes}
    for topo in enumerate_topologies(config, bound=bound):
        for m in modes:
            for acc, decomp in zip(accs[m], cands[m]):
                times = per_server_times(topo, config, decomp, m)
                val = max(times) if m == "parallel" else sum(times, Fraction(0))
                acc.add(val)
    out = {}
    for m in modes:
        a = _best_candidate(accs[m])
        out[m] = CellStats(a.lo, a.hi, a.mean, None, a.n)
    return out


@dataclass(frozen=True)
class SweepSpec:
    P: int
    K: int
    N: int
    rho_values: tuple[int, ...]
    M_U_values: tuple[Fraction, ...]
    M_S_values: tuple[Fraction, ...]
    mode: str = "both"  # successive | parallel | both
    method: str = "both"  # formula | simulate | both
    trials: int = 100
    seed: int = 0
    enumerate_all: bool = False
    bound: int = 10_000_000

    @staticmethod
    def from_dict(data: dict) -> "SweepSpec":
        from .placement import as_fraction

        required = {"P", "K", "N", "rho", "M_U", "M_S"}
        missing = required - data.keys()
        if missing:
            raise ValueError(f"sweep spec missing fields: {sorted(missing)}")
        known = required | {
            "mode", "method", "trials", "seed", "enumerate", "bound",
        }
        unknown = data.keys() - known
        if unknown:
            raise ValueError(f"sweep spec has unknown fields: {sorted(unknown)}")

        def as_list(v):
            return list(v) if isinstance(v, (list, tuple)) else [v]

        spec = SweepSpec(
            P=int(data["P"]),
            K=int(data["K"]),
            N=int(data["N"]),
            rho_values=tuple(int(r) for r in as_list(data["rho"])),
            M_U_values=tuple(as_fraction(v) for v in as_list(data["M_U"])),
            M_S_values=tuple(as_fraction(v) for v in as_list(data["M_S"])),
            mode=data.get("mode", "both"),
            method=data.get("method", "both"),
            trials=int(data.get("trials", 100)),
            seed=int(data.get("seed", 0)),
            enumerate_all=bool(data.get("enumerate", False)),
            bound=int(data.get("bound", 10_000_000)),
        )
        if spec.mode not in MODES + ("both",):
            raise ValueError(f"unknown mode {spec.mode!r}")
        if spec.method not in ("formula", "simulate", "both"):
            raise ValueError(f"unknown method {spec.method!r}")
        if spec.trials < 1:
            raise ValueError("trials must be positive")
        return spec

    @property
    def modes(self) -> tuple[str, ...]:
        return MODES if self.mode == "both" else (self.mode,)

    @property
    def methods(self) -> tuple[str, ...]:
        sim = "enumerate" if self.enumerate_all else "simulate"
        if self.method == "formula":
            return ("formula",)
        if self.method == "simulate":
            return (sim,)
        return ("formula", sim)


@dataclass(frozen=True)
class SweepRow:
    P: int
    K: int
    N: int
    rho: int
    M_U: Fraction
    M_S: Fraction
    mode: str
    method: str
    T_best: float | None
    T_worst: float | None
    T_avg: float | None
    stderr: float | None
    trials: int | None
    seed: int | None
    infeasible: bool

    def render(self) -> str:
        def num(x):
            return "" if x is None else repr(float(x))

        cells = (
            str(self.P), str(self.K), str(self.N), str(self.rho),
            str(self.M_U), str(self.M_S), self.mode, self.method,
            num(self.T_best), num(self.T_worst), num(self.T_avg),
            num(self.stderr),
            "" if self.trials is None else str(self.trials),
            "" if self.seed is None else str(self.seed),
            "1" if self.infeasible else "0",
        )
        return ",".join(cells)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    csv: str


def run_sweep(spec: SweepSpec) -> SweepResult:
    rows: list[SweepRow] = []
    cell_index = 0
    for rho in spec.rho_values:
        for M_S in spec.M_S_values:
            for M_U in spec.M_U_values:
                cell_seed = spec.seed + cell_index * spec.trials
                cell_index += 1
                common = dict(P=spec.P, K=spec.K, N=spec.N, rho=rho, M_U=M_U, M_S=M_S)
                try:
                    config = SystemConfig(**common)
                    feasible = config.feasible
                except ValueError:
                    feasible = False
                if not feasible:
                    for mode in spec.modes:
                        for method in spec.methods:
                            rows.append(SweepRow(
                                **common, mode=mode, method=method,
                                T_best=None, T_worst=None, T_avg=None,
                                stderr=None, trials=None, seed=None,
                                infeasible=True,
                            ))
                    continue
                sampled: dict[str, CellStats] | None = None
                if "simulate" in spec.methods:
                    sampled = simulate_cell(config, spec.modes, spec.trials, cell_seed)
                elif "enumerate" in spec.methods:
                    sampled = enumerate_cell(config, spec.modes, bound=spec.bound)
                for mode in spec.modes:
                    for method in spec.methods:
                        if method == "formula":
                            vals = formula_point(config, mode)
                            rows.append(SweepRow(
                                **common, mode=mode, method=method,
                                T_best=_opt_float(vals.T_best),
                                T_worst=_opt_float(vals.T_worst),
                                T_avg=_opt_float(vals.T_avg),
                                stderr=None, trials=None, seed=None,
                                infeasible=False,
                            ))
                        else:
                            st = sampled[mode]
                            rows.append(SweepRow(
                                **common, mode=mode, method=method,
                                T_best=float(st.T_best),
                                T_worst=float(st.T_worst),
                                T_avg=float(st.T_avg),
                                stderr=st.stderr,
                                trials=st.trials,
                                seed=cell_seed if method == "simulate" else None,
                                infeasible=False,
                            ))
    csv = "\n".join([",".join(CSV_COLUMNS)] + [r.render() for r in rows]) + "\n"
    return SweepResult(rows=tuple(rows), csv=csv)


def _opt_float(x: Fraction | None) -> float | None:
    return None if x is None else float(x)


@dataclass
class VerifyResult:
    passed: bool
    cases: int
    decode_checks: int
    decode_ok: int
    count_identity_ok: bool
    audit_ok: bool
    cover_floor_ok: bool
    failures: list[str]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "cases": self.cases,
            "decode_checks": self.decode_checks,
            "decode_ok": self.decode_ok,
            "count_identity_ok": self.count_identity_ok,
            "audit_ok": self.audit_ok,
            "cover_floor_ok": self.cover_floor_ok,
            "failures": self.failures,
        }


def _tampered(gen: GeneratorMatrix) -> GeneratorMatrix:
    if gen.n == gen.k:
        raise ValueError("matrix has no parity rows to corrupt")
    rows = [list(r) for r in gen.rows]
    rows[gen.k][0] ^= 0xA5
    return GeneratorMatrix(gen.n, gen.k, tuple(tuple(r) for r in rows))


def run_verify(
    config: SystemConfig,
    seed: int = 0,
    trials: int = 20,
    enumerate_all: bool = False,
    bound: int = 10_000_000,
    corrupt_generator: bool = False,
    file_bytes: int = 96,
    max_failures: int = 5,
) -> VerifyResult:
    """Full pipeline check: place a random library, then for each trial
    topology build both plans and decode every user, comparing bit-exactly.
    Also checks the z = 0 message-count identity, storage accounting, and
    that the parallel planner never covers a target set with fewer servers
    than the successive minimum cover when storage is redundant."""
    config.require_feasible()
    t, z = config.t, config.z  # raises on non-integer parameters
    if config.F is not None:
        file_bytes = config.F // 8
    master = SplitMix64(seed)
    library = [master.randbytes(file_bytes) for _ in range(config.N)]
    state = place(library, config)
    audit_ok = storage_audit(state).ok
    if corrupt_generator:
        state.generator = _tampered(state.generator)

    if enumerate_all:
        cases = [
            (topo, worst_case_demands(config.K, config.N))
            for topo in enumerate_topologies(config, bound=bound)
        ]
    else:
        cases = []
        for i in range(trials):
            topo = sample_topology(config, seed + 1 + i)
            demands = tuple(
                1 + master.randbelow(config.N) for _ in range(config.K)
            )
            cases.append((topo, demands))

    failures: list[str] = []
    decode_checks = decode_ok = 0
    count_identity_ok = True
    cover_floor_ok = True

    def note(msg: str) -> None:
        if len(failures) < max_failures:
            failures.append(msg)

    for topo, demands in cases:
        plans = {
            "successive": plan_successive(topo, demands, state),
            "parallel": plan_parallel_greedy(topo, demands, state),
        }
        if z == 0:
            q = degree_vector(topo)
            for name, plan in plans.items():
                counts = [0] * config.P
                for m in plan.messages:
                    counts[m.server - 1] += 1
                expected = [count_messages(qp, config.K, t) for qp in q]
                if counts != expected:
                    count_identity_ok = False
                    note(
                        f"count identity failed ({name}): Z={topo.servers_of_user} "
                        f"got={counts} want={expected}"
                    )
        if z > 0:
            succ_asn = plans["successive"].assignment
            par_asn = plans["parallel"].assignment
            if set(par_asn) != set(succ_asn) or any(
                len(par_asn[H]) < len(succ_asn[H]) for H in succ_asn
            ):
                cover_floor_ok = False
                note(
                    f"parallel cover below the successive minimum: "
                    f"Z={topo.servers_of_user}"
                )
        for name, plan in plans.items():
            for user in range(1, config.K + 1):
                decode_checks += 1
                want = library[demands[user - 1] - 1]
                try:
                    got = decode_user(user, plan, topo, state, demands)
                except (DecodeFailureError, ArithmeticError, ValueError) as e:
                    note(
                        f"decode failure ({name}): user={user} "
                        f"Z={topo.servers_of_user} d={demands}: {e}"
                    )
                    continue
                if got == want:
                    decode_ok += 1
                else:
                    note(
                        f"decode mismatch ({name}): user={user} "
                        f"Z={topo.servers_of_user} d={demands}"
                    )
    passed = (
        decode_ok == decode_checks
        and count_identity_ok
        and audit_ok
        and cover_floor_ok
    )
    return VerifyResult(
        passed=passed,
        cases=len(cases),
        decode_checks=decode_checks,
        decode_ok=decode_ok,
        count_identity_ok=count_identity_ok,
        audit_ok=audit_ok,
        cover_floor_ok=cover_floor_ok,
        failures=failures,
    )


@dataclass(frozen=True)
class ReplayReport:
    q: tuple[int, ...]
    counts_successive: tuple[int, ...]
    counts_parallel: tuple[int, ...]
    message_fraction: Fraction  # one message's share of a file
    T_successive: Fraction
    T_parallel: Fraction

    def to_dict(self) -> dict:
        return {
            "q": list(self.q),
            "counts_successive": list(self.counts_successive),
            "counts_parallel": list(self.counts_parallel),
            "message_fraction": str(self.message_fraction),
            "T_successive": float(self.T_successive),
            "T_successive_exact": str(self.T_successive),
            "T_parallel": float(self.T_parallel),
            "T_parallel_exact": str(self.T_parallel),
        }


def run_replay(topology: Topology, config: SystemConfig) -> ReplayReport:
    """Structural latency report for one fixed topology."""
    config.require_feasible()
    t, z = config.t, config.z
    if topology.P != config.P or topology.K != config.K:
        raise ValueError("topology shape does not match the config")
    counts_s = structural_counts_successive(topology, t, z)
    counts_p = structural_counts_parallel(topology, t, z)
    denom = (config.rho - z) * binom(config.K, t)
    return ReplayReport(
        q=degree_vector(topology),
        counts_successive=counts_s,
        counts_parallel=counts_p,
        message_fraction=Fraction(1, denom),
        T_successive=Fraction(sum(counts_s), denom),
        T_parallel=Fraction(max(counts_p), denom),
    )
