"""Random and exhaustive server-connectivity topologies.

A topology fixes, for each user, the rho-subset of servers it can hear
during delivery.  Sampling draws each user's subset independently and
uniformly by unranking a uniform index in the shared colex subset order;
enumeration walks all C(P, rho)^K assignments lexicographically by
per-user subset index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .combinatorics import binom, subsets_colex, subset_unrank_colex
from .placement import SystemConfig
from .rng import SplitMix64


class EnumerationTooLargeError(ValueError):
    """The full topology space exceeds the caller's bound."""


@dataclass(frozen=True)
class Topology:
    """servers_of_user[j-1] is the ascending tuple of servers user j hears."""

    P: int
    servers_of_user: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for Z in self.servers_of_user:
            if len(set(Z)) != len(Z) or any(not 1 <= p <= self.P for p in Z):
                raise ValueError(f"invalid server subset {Z}")
            if tuple(sorted(Z)) != Z:
                raise ValueError(f"server subset {Z} must be ascending")

    @property
    def K(self) -> int:
        return len(self.servers_of_user)

    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """P x K 0/1 matrix; entry [p-1][k-1] is 1 iff user k hears server p."""
        rows = []
        for p in range(1, self.P + 1):
            rows.append(tuple(1 if p in Z else 0 for Z in self.servers_of_user))
        return tuple(rows)

    def users_of_server(self, p: int) -> tuple[int, ...]:
        return tuple(
            k for k, Z in enumerate(self.servers_of_user, start=1) if p in Z
        )

    def to_json(self) -> str:
        return json.dumps({"Z": [list(Z) for Z in self.servers_of_user]})


def degree_vector(topology: Topology) -> tuple[int, ...]:
    """q_p = number of users connected to server p."""
    counts = [0] * topology.P
    for Z in topology.servers_of_user:
        for p in Z:
            counts[p - 1] += 1
    return tuple(counts)


def topology_from_json(data, config: SystemConfig) -> Topology:
    """Build a Topology from {"Z": [[server indices], ...]} (str or dict)."""
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or "Z" not in data:
        raise ValueError('topology JSON must be an object with a "Z" key')
    Z = data["Z"]
    if len(Z) != config.K:
        raise ValueError(f"topology lists {len(Z)} users; config.K = {config.K}")
    subsets = []
    for j, entry in enumerate(Z, start=1):
        srvs = tuple(sorted(entry))
        if len(srvs) != config.rho:
            raise ValueError(
                f"user {j} connects to {len(srvs)} servers; config.rho = {config.rho}"
            )
        subsets.append(srvs)
    return Topology(P=config.P, servers_of_user=tuple(subsets))


def sample_topology(config: SystemConfig, seed: int) -> Topology:
    """One uniform topology draw; same (config, seed) gives the same result."""
    rng = SplitMix64(seed)
    total = binom(config.P, config.rho)
    subsets = tuple(
        subset_unrank_colex(config.P, config.rho, rng.randbelow(total))
        for _ in range(config.K)
    )
    return Topology(P=config.P, servers_of_user=subsets)


def topology_count(config: SystemConfig) -> int:
    return binom(config.P, config.rho) ** config.K


def enumerate_topologies(
    config: SystemConfig, bound: int = 10_000_000
) -> Iterator[Topology]:
    """All topologies, ordered lexicographically by per-user subset index."""
    total = topology_count(config)
    if total > bound:
        raise EnumerationTooLargeError(
            f"{total} topologies exceed the bound {bound}"
        )
    choices = subsets_colex(config.P, config.rho)

    def walk(prefix: tuple[tuple[int, ...], ...]) -> Iterator[Topology]:
        if len(prefix) == config.K:
            yield Topology(P=config.P, servers_of_user=prefix)
            return
        for Z in choices:
            yield from walk(prefix + (Z,))

    return walk(())


def prob_degree(config: SystemConfig, q: int) -> Fraction:
    """Exact probability that a fixed server serves q users.

    Each user independently hears a given server with probability rho/P, so
    the degree is binomial; evaluated with integer subset counts.
    """
    if not 0 <= q <= config.K:
        return Fraction(0)
    hit = binom(config.P - 1, config.rho - 1)
    miss = binom(config.P - 1, config.rho)
    total = binom(config.P, config.rho)
    return Fraction(
        binom(config.K, q) * hit**q * miss ** (config.K - q), total**config.K
    )
