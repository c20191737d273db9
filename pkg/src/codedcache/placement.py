"""System parameters, file segmentation, and cache/storage placement.

Placement is topology-independent.  Each file is cut into one segment per
t-subset of users (colex order); each segment is striped into rho - z equal
sub-segments and expanded into one coded chunk per server with a systematic
MDS code.  User k caches, uncoded, every segment whose subset contains k.
A separate minimum-storage placement caches a common prefix of every file
at the users and stripes only the tails across the servers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import galois
from .combinatorics import binom, subsets_colex


class FeasibilityError(ValueError):
    """User cache plus reachable server storage cannot hold the library."""


class NonIntegerParameterError(ValueError):
    """A derived scheme parameter that must be an integer is not one."""


def as_fraction(value) -> Fraction:
    """Exact conversion: ints pass through, strings may be '5/4' or '1.25',
    floats go through their shortest decimal repr (so 1.25 -> 5/4)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not valid capacities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact fraction")


@dataclass(frozen=True)
class SystemConfig:
    """Parameters of one delivery network.

    P servers, K cache-equipped users, N library files.  M_U and M_S are
    user-cache and per-server storage capacity in units of one file; rho is
    how many servers each user reaches during delivery.  F, when given, is
    the file length in bits (a byte multiple) and is checked against the
    actual library handed to place().
    """

    P: int
    K: int
    N: int
    rho: int
    M_U: Fraction
    M_S: Fraction
    F: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "M_U", as_fraction(self.M_U))
        object.__setattr__(self, "M_S", as_fraction(self.M_S))
        if self.P < 1 or self.K < 1 or self.N < 1:
            raise ValueError("P, K and N must be positive")
        if not 1 <= self.rho <= self.P:
            raise ValueError("rho must lie in [1, P]")
        if not 0 <= self.M_U <= self.N:
            raise ValueError("M_U must lie in [0, N]")
        if self.M_S < 0:
            raise ValueError("M_S must be non-negative")
        if self.F is not None and (self.F <= 0 or self.F % 8):
            raise ValueError("F must be a positive multiple of 8 bits")

    @property
    def t_exact(self) -> Fraction:
        """Cache replication factor K * M_U / N (may be fractional)."""
        return Fraction(self.K) * self.M_U / self.N

    @property
    def t(self) -> int:
        t = self.t_exact
        if t.denominator != 1:
            raise NonIntegerParameterError(
                f"K*M_U/N = {t} is not an integer; use memory sharing"
            )
        return int(t)

    @property
    def z_exact(self) -> Fraction:
        """Server redundancy level defined through M_S = N / (rho - z)."""
        if self.M_S == 0:
            raise NonIntegerParameterError("z is undefined for M_S = 0")
        return self.rho - Fraction(self.N) / self.M_S

    @property
    def z(self) -> int:
        z = self.z_exact
        if z.denominator != 1:
            raise NonIntegerParameterError(
                f"rho - N/M_S = {z} is not an integer; use memory sharing"
            )
        zi = int(z)
        if not 0 <= zi <= self.rho - 1:
            raise ValueError(
                f"M_S = {self.M_S} is outside the coded range [N/rho, N]"
            )
        return zi

    @property
    def feasible(self) -> bool:
        return self.M_U + self.rho * self.M_S >= self.N

    def require_feasible(self) -> None:
        if not self.feasible:
            raise FeasibilityError(
                f"M_U + rho*M_S = {self.M_U + self.rho * self.M_S} < N = {self.N}"
            )

    def to_dict(self) -> dict:
        return {
            "P": self.P,
            "K": self.K,
            "N": self.N,
            "rho": self.rho,
            "M_U": str(self.M_U),
            "M_S": str(self.M_S),
            "F": self.F,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        known = {"P", "K", "N", "rho", "M_U", "M_S", "F"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        missing = {"P", "K", "N", "rho", "M_U", "M_S"} - set(data)
        if missing:
            raise ValueError(f"missing config fields: {sorted(missing)}")
        return cls(
            P=data["P"], K=data["K"], N=data["N"], rho=data["rho"],
            M_U=as_fraction(data["M_U"]), M_S=as_fraction(data["M_S"]),
            F=data.get("F"),
        )


def partition_file(data: bytes, K: int, t: int) -> dict[tuple[int, ...], bytes]:
    """Split a file into C(K, t) equal segments keyed by t-subsets of users.

    The file is zero-padded up to a multiple of the segment count; keys come
    out in colex order, and concatenating the values (then trimming) gives
    the file back.
    """
    if not 0 <= t <= K:
        raise ValueError(f"t = {t} outside [0, K]")
    if not data:
        raise ValueError("cannot partition an empty file")
    subsets = subsets_colex(K, t)
    count = len(subsets)
    padded_len = math.ceil(len(data) / count) * count
    padded = data.ljust(padded_len, b"\x00")
    seg = padded_len // count
    return {A: padded[i * seg:(i + 1) * seg] for i, A in enumerate(subsets)}


@dataclass
class PlacementState:
    """Everything created at placement time.

    server_store[p][(j, A)] is server p's coded chunk of segment A of file j;
    user_cache[k][(j, A)] is the uncoded segment, present iff k is in A.
    """

    config: SystemConfig
    generator: galois.GeneratorMatrix
    subsets: tuple[tuple[int, ...], ...]
    true_size: int
    padded_size: int
    seg_bytes: int
    sub_bytes: int
    server_store: dict[int, dict[tuple, bytes]]
    user_cache: dict[int, dict[tuple, bytes]]


def split_subsegments(segment: bytes, k: int) -> list[bytes]:
    if len(segment) % k:
        raise ValueError("segment length not divisible by the stripe count")
    step = len(segment) // k
    return [segment[i * step:(i + 1) * step] for i in range(k)]


def place(library: list[bytes], config: SystemConfig) -> PlacementState:
    """Run placement for integer t and z; independent of any topology."""
    config.require_feasible()
    t = config.t
    z = config.z
    if len(library) != config.N:
        raise ValueError(f"library holds {len(library)} files; config.N = {config.N}")
    sizes = {len(f) for f in library}
    if len(sizes) != 1 or 0 in sizes:
        raise ValueError("library files must be non-empty and equal-sized")
    size = sizes.pop()
    if config.F is not None and config.F != size * 8:
        raise ValueError(f"files are {size * 8} bits but config.F = {config.F}")

    k_code = config.rho - z
    subsets = subsets_colex(config.K, t)
    unit = len(subsets) * k_code
    padded_size = math.ceil(size / unit) * unit
    seg_bytes = padded_size // len(subsets)
    sub_bytes = seg_bytes // k_code
    mat = galois.build_generator(config.P, k_code)

    server_store: dict[int, dict[tuple, bytes]] = {p: {} for p in range(1, config.P + 1)}
    user_cache: dict[int, dict[tuple, bytes]] = {k: {} for k in range(1, config.K + 1)}
    for j, data in enumerate(library, start=1):
        padded = data.ljust(padded_size, b"\x00")
        for i, A in enumerate(subsets):
            segment = padded[i * seg_bytes:(i + 1) * seg_bytes]
            chunks = galois.mds_encode(split_subsegments(segment, k_code), mat)
            for chunk in chunks:
                server_store[chunk.code_index][(j, A)] = chunk.payload
            for k in A:
                user_cache[k][(j, A)] = segment
    return PlacementState(
        config=config, generator=mat, subsets=subsets,
        true_size=size, padded_size=padded_size,
        seg_bytes=seg_bytes, sub_bytes=sub_bytes,
        server_store=server_store, user_cache=user_cache,
    )


@dataclass
class StorageAudit:
    per_server_bits: dict[int, int]
    per_user_bits: dict[int, int]
    expected_server_bits: int
    expected_user_bits: int
    flags: list[str]

    @property
    def ok(self) -> bool:
        return not self.flags


def storage_audit(state: PlacementState) -> StorageAudit:
    """Exact bit counts per node, flagging any deviation from capacity."""
    cfg = state.config
    t = cfg.t
    per_server = {
        p: sum(len(v) for v in store.values()) * 8
        for p, store in state.server_store.items()
    }
    per_user = {
        k: sum(len(v) for v in cache.values()) * 8
        for k, cache in state.user_cache.items()
    }
    expected_server = cfg.N * len(state.subsets) * state.sub_bytes * 8
    expected_user = cfg.N * binom(cfg.K - 1, t - 1) * state.seg_bytes * 8
    flags = []
    for p, bits in sorted(per_server.items()):
        if bits != expected_server:
            flags.append(f"server {p}: {bits} bits, expected {expected_server}")
    for k, bits in sorted(per_user.items()):
        if bits != expected_user:
            flags.append(f"user {k}: {bits} bits, expected {expected_user}")
    return StorageAudit(per_server, per_user, expected_server, expected_user, flags)


@dataclass
class MinStoragePlacement:
    """Baseline at the smallest feasible server storage.

    Every user caches the same M_U/N prefix of every file; the tails are
    striped (P, rho) across the servers, so delivery is pure unicast.
    """

    config: SystemConfig
    generator: galois.GeneratorMatrix
    true_size: int
    padded_size: int
    cached_bytes: int
    chunk_bytes: int
    prefixes: dict[int, bytes]
    server_store: dict[int, dict[int, bytes]]


def place_min_storage(library: list[bytes], config: SystemConfig) -> MinStoragePlacement:
    config.require_feasible()
    if len(library) != config.N:
        raise ValueError(f"library holds {len(library)} files; config.N = {config.N}")
    sizes = {len(f) for f in library}
    if len(sizes) != 1 or 0 in sizes:
        raise ValueError("library files must be non-empty and equal-sized")
    size = sizes.pop()
    cache_frac = config.M_U / config.N
    unit = cache_frac.denominator * config.rho
    padded_size = math.ceil(size / unit) * unit
    cached = int(padded_size * cache_frac)
    tail = padded_size - cached
    chunk_bytes = tail // config.rho
    mat = galois.build_generator(config.P, config.rho)
    prefixes = {}
    server_store: dict[int, dict[int, bytes]] = {p: {} for p in range(1, config.P + 1)}
    for j, data in enumerate(library, start=1):
        padded = data.ljust(padded_size, b"\x00")
        prefixes[j] = padded[:cached]
        if tail:
            parts = split_subsegments(padded[cached:], config.rho)
            for chunk in galois.mds_encode(parts, mat):
                server_store[chunk.code_index][j] = chunk.payload
    return MinStoragePlacement(
        config=config, generator=mat, true_size=size, padded_size=padded_size,
        cached_bytes=cached, chunk_bytes=chunk_bytes,
        prefixes=prefixes, server_store=server_store,
    )
