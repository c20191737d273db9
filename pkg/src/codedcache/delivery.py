"""Delivery planning and decoding.

For every (t+1)-subset of users H, each transmitting server sends one XOR
of coded chunks, one per user it serves in H.  With no storage redundancy
(z = 0) every server connected to H transmits and each user collects rho
chunks per missing segment.  With redundancy (z > 0) a cover of H
transmits: a server set giving every user of H at least rho - z connected
servers, so each user still collects exactly the rho - z chunks it needs.
The successive planner always takes a minimum cover (fewest transmissions
in total); the parallel planner may widen a cover beyond the minimum when
spreading the subset over more servers lowers the busiest server's count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import galois
from .combinatorics import binom, subsets_colex
from .placement import MinStoragePlacement, PlacementState, split_subsegments
from .topology import Topology, degree_vector


class CoverageError(ValueError):
    """Some user cannot reach enough servers to be served."""


class DecodeFailureError(RuntimeError):
    """A user could not gather enough chunks for some segment."""


def worst_case_demands(K: int, N: int) -> tuple[int, ...]:
    """K distinct file requests (users 1..K ask for files 1..K)."""
    if N < K:
        raise ValueError(f"distinct demands need N >= K, got N={N} K={K}")
    return tuple(range(1, K + 1))


def count_messages(q_p: int, K: int, t: int) -> int:
    """Messages a server with q_p connected users sends when z = 0."""
    return binom(K, t + 1) - binom(K - q_p, t + 1)


@dataclass(frozen=True)
class MulticastMessage:
    server: int
    target_set: frozenset[int]
    payload: bytes
    length_bits: int


@dataclass
class DeliveryPlan:
    mode: str  # "successive" or "parallel"
    t: int
    z: int
    message_length_bits: int
    messages: list[MulticastMessage]
    per_server_bits: tuple[int, ...]
    # z > 0 only: chosen cover per target set, in enumeration order
    assignment: dict[frozenset[int], tuple[int, ...]] | None


def _connection_masks(incidence) -> tuple[list[int], list[int]]:
    # per-user server bitmask and per-server degree, from a P x K 0/1 matrix
    P = len(incidence)
    K = len(incidence[0]) if P else 0
    conn = [0] * K
    degs = [0] * P
    for i in range(P):
        row = incidence[i]
        if len(row) != K:
            raise ValueError("incidence rows differ in width")
        for j in range(K):
            if row[j]:
                conn[j] |= 1 << i
                degs[i] += 1
    return conn, degs


def minimum_cover(H, incidence, needed: int, greedy: bool = False) -> tuple[int, ...]:
    """Smallest server set giving every user of H >= needed connections.

    Exact search by increasing cardinality; among minimum-cardinality covers
    the one with the smallest total server degree wins, then the
    lexicographically smallest.  The greedy flag switches to a fast
    heuristic (most deficient users served first) for large P; its result
    may exceed the true minimum.
    """
    if needed < 1:
        raise ValueError("needed must be at least 1")
    users = sorted(set(H))
    if not users:
        raise ValueError("H must be non-empty")
    conn, degs = _connection_masks(incidence)
    P = len(incidence)
    for u in users:
        if not 1 <= u <= len(conn):
            raise ValueError(f"user {u} outside the incidence matrix")
        if conn[u - 1].bit_count() < needed:
            raise CoverageError(
                f"user {u} reaches only {conn[u - 1].bit_count()} servers; needs {needed}"
            )
    masks = [conn[u - 1] for u in users]

    if greedy:
        deficit = {u: needed for u in users}
        chosen: list[int] = []
        available = set(range(P))
        while any(deficit.values()):
            best = None
            for i in sorted(available):
                gain = sum(
                    1 for u, m in zip(users, masks) if deficit[u] > 0 and m >> i & 1
                )
                if gain and (best is None or gain > best[0]):
                    best = (gain, i)
            if best is None:
                raise CoverageError("greedy cover cannot serve all users")
            _, i = best
            available.discard(i)
            chosen.append(i)
            for u, m in zip(users, masks):
                if deficit[u] > 0 and m >> i & 1:
                    deficit[u] -= 1
        return tuple(sorted(i + 1 for i in chosen))

    for size in range(needed, P + 1):
        best = None
        for combo in itertools.combinations(range(P), size):
            smask = 0
            for i in combo:
                smask |= 1 << i
            if all((smask & m).bit_count() >= needed for m in masks):
                key = (sum(degs[i] for i in combo), combo)
                if best is None or key < best:
                    best = key
        if best is not None:
            return tuple(i + 1 for i in best[1])
    raise CoverageError("no cover exists")  # unreachable after the per-user check


def minimum_covers_all(H, incidence, needed: int) -> tuple[int, list[tuple[int, ...]]]:
    """All covers of minimum cardinality, lexicographically ordered."""
    if needed < 1:
        raise ValueError("needed must be at least 1")
    users = sorted(set(H))
    conn, _ = _connection_masks(incidence)
    P = len(incidence)
    for u in users:
        if conn[u - 1].bit_count() < needed:
            raise CoverageError(
                f"user {u} reaches only {conn[u - 1].bit_count()} servers; needs {needed}"
            )
    masks = [conn[u - 1] for u in users]
    for size in range(needed, P + 1):
        found = []
        for combo in itertools.combinations(range(P), size):
            smask = 0
            for i in combo:
                smask |= 1 << i
            if all((smask & m).bit_count() >= needed for m in masks):
                found.append(tuple(i + 1 for i in combo))
        if found:
            return size, found
    raise CoverageError("no cover exists")


def assigned_servers(
    user: int, cover: tuple[int, ...], topology: Topology, needed: int
) -> tuple[int, ...]:
    """The needed lowest-index servers of the cover that the user hears."""
    reachable = sorted(set(topology.servers_of_user[user - 1]) & set(cover))
    if len(reachable) < needed:
        raise CoverageError(
            f"user {user} hears only {len(reachable)} cover servers; needs {needed}"
        )
    return tuple(reachable[:needed])


def cover_schedule_successive(
    topology: Topology, t: int, z: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(H, cover) pairs in enumeration order, one minimum cover per H."""
    if z < 1:
        raise ValueError("cover schedules apply to z >= 1 only")
    K = topology.K
    needed = _needed(topology, z)
    inc = topology.incidence()
    return [
        (H, minimum_cover(H, inc, needed)) for H in subsets_colex(K, t + 1)
    ]


def _effective_cover(H, conn_sets, needed: int, smask: int) -> tuple[int, ...] | None:
    # servers that actually transmit when each user of H takes its `needed`
    # lowest-index reachable servers inside the candidate set; None if some
    # user falls short
    union = 0
    for m in conn_sets:
        avail = m & smask
        if avail.bit_count() < needed:
            return None
        taken = 0
        for _ in range(needed):
            low = avail & -avail
            taken |= low
            avail ^= low
        union |= taken
    return tuple(i + 1 for i in range(union.bit_length()) if union >> i & 1)


def parallel_cover_candidates(
    H, topology: Topology, needed: int
) -> list[tuple[int, ...]]:
    """Distinct transmitting-server sets reachable for one target set.

    Candidates may be larger than the minimum cover: pulling in extra
    servers lets users split off a loaded one.  Each candidate is already
    reduced to the servers the lowest-index assignment rule keeps busy, so
    every listed server sends a message.  Past 14 relevant servers the
    subset enumeration is cut to minimum-cardinality covers only.
    """
    conn, _ = _connection_masks(topology.incidence())
    users = sorted(set(H))
    for u in users:
        if conn[u - 1].bit_count() < needed:
            raise CoverageError(
                f"user {u} reaches only {conn[u - 1].bit_count()} servers; needs {needed}"
            )
    conn_sets = [conn[u - 1] for u in users]
    relevant = 0
    for m in conn_sets:
        relevant |= m
    idx = [i for i in range(relevant.bit_length()) if relevant >> i & 1]
    if len(idx) > 14:
        _, covers = minimum_covers_all(H, topology.incidence(), needed)
        return covers
    seen: dict[tuple[int, ...], None] = {}
    for size in range(needed, len(idx) + 1):
        for combo in itertools.combinations(idx, size):
            smask = 0
            for i in combo:
                smask |= 1 << i
            eff = _effective_cover(H, conn_sets, needed, smask)
            if eff is not None and eff not in seen:
                seen[eff] = None
    return list(seen)


def cover_schedule_parallel(
    topology: Topology, t: int, z: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Load-balancing schedule: every H gets a feasible transmitting set,
    not necessarily a minimum cover, chosen to keep the busiest server's
    message count low.

    A first greedy pass (enumeration order) picks, per H, the candidate
    minimizing the resulting peak count, then the set size, then the set
    itself.  Improvement sweeps follow: one H at a time is re-placed, a
    switch being accepted only when it strictly lowers the global key
    (sorted load profile, total transmissions, chosen sets), so the pass
    terminates and no single re-placement can improve the result.
    """
    if z < 1:
        raise ValueError("cover schedules apply to z >= 1 only")
    K = topology.K
    needed = _needed(topology, z)
    subsets = list(subsets_colex(K, t + 1))
    options = [parallel_cover_candidates(H, topology, needed) for H in subsets]
    loads = [0] * topology.P

    def placed(cover):
        for p in cover:
            loads[p - 1] += 1

    def removed(cover):
        for p in cover:
            loads[p - 1] -= 1

    def pick(cands):
        best = None
        for cover in cands:
            peak = max(loads)
            for p in cover:
                peak = max(peak, loads[p - 1] + 1)
            key = (peak, len(cover), cover)
            if best is None or key < best:
                best = key
        return best[2]

    chosen: list[tuple[int, ...]] = []
    for cands in options:
        cover = pick(cands)
        placed(cover)
        chosen.append(cover)

    def profile():
        return (
            tuple(sorted(loads, reverse=True)),
            sum(loads),
            tuple(chosen),
        )

    for _ in range(40):
        changed = False
        for i, cands in enumerate(options):
            current = profile()
            removed(chosen[i])
            cover = pick(cands)
            if cover != chosen[i]:
                old = chosen[i]
                chosen[i] = cover
                placed(cover)
                if profile() < current:
                    changed = True
                else:
                    removed(cover)
                    chosen[i] = old
                    placed(old)
            else:
                placed(cover)
        if not changed:
            break
    return list(zip(subsets, chosen))


def _needed(topology: Topology, z: int) -> int:
    rho = len(topology.servers_of_user[0])
    needed = rho - z
    if needed < 1:
        raise ValueError(f"z = {z} leaves no chunks to deliver (rho = {rho})")
    return needed


def build_messages_full(
    server: int,
    topology: Topology,
    demands: tuple[int, ...],
    placement: PlacementState,
) -> list[MulticastMessage]:
    """All messages one server sends when z = 0: one XOR per (t+1)-subset
    of users that it intersects."""
    cfg = placement.config
    if cfg.z != 0:
        raise ValueError("build_messages_full applies to z = 0 only")
    t = cfg.t
    connected = set(topology.users_of_server(server))
    out = []
    for H in subsets_colex(cfg.K, t + 1):
        hit = [k for k in H if k in connected]
        if not hit:
            continue
        payload = bytes(placement.sub_bytes)
        for k in hit:
            rest = tuple(u for u in H if u != k)
            payload = galois.xor_bytes(
                payload, placement.server_store[server][(demands[k - 1], rest)]
            )
        out.append(
            MulticastMessage(
                server=server, target_set=frozenset(H),
                payload=payload, length_bits=placement.sub_bytes * 8,
            )
        )
    return out


def _messages_for_cover(
    H, cover, topology, demands, placement
) -> list[MulticastMessage]:
    cfg = placement.config
    needed = cfg.rho - cfg.z
    assign = {k: assigned_servers(k, cover, topology, needed) for k in H}
    out = []
    for p in cover:
        served = [k for k in H if p in assign[k]]
        if not served:
            continue  # schedules only emit covers whose servers all serve someone
        payload = bytes(placement.sub_bytes)
        for k in served:
            rest = tuple(u for u in H if u != k)
            payload = galois.xor_bytes(
                payload, placement.server_store[p][(demands[k - 1], rest)]
            )
        out.append(
            MulticastMessage(
                server=p, target_set=frozenset(H),
                payload=payload, length_bits=placement.sub_bytes * 8,
            )
        )
    return out


def _finish_plan(mode, placement, messages, assignment) -> DeliveryPlan:
    cfg = placement.config
    bits = [0] * cfg.P
    for m in messages:
        bits[m.server - 1] += m.length_bits
    return DeliveryPlan(
        mode=mode, t=cfg.t, z=cfg.z,
        message_length_bits=placement.sub_bytes * 8,
        messages=messages, per_server_bits=tuple(bits), assignment=assignment,
    )


def plan_successive(
    topology: Topology, demands: tuple[int, ...], placement: PlacementState
) -> DeliveryPlan:
    cfg = placement.config
    _check_instance(topology, demands, cfg)
    if cfg.t == cfg.K:
        return _finish_plan("successive", placement, [], None if cfg.z == 0 else {})
    if cfg.z == 0:
        messages = []
        for p in range(1, cfg.P + 1):
            messages.extend(build_messages_full(p, topology, demands, placement))
        return _finish_plan("successive", placement, messages, None)
    schedule = cover_schedule_successive(topology, cfg.t, cfg.z)
    messages = []
    assignment = {}
    for H, cover in schedule:
        assignment[frozenset(H)] = cover
        messages.extend(_messages_for_cover(H, cover, topology, demands, placement))
    return _finish_plan("successive", placement, messages, assignment)


def plan_parallel_greedy(
    topology: Topology, demands: tuple[int, ...], placement: PlacementState
) -> DeliveryPlan:
    cfg = placement.config
    _check_instance(topology, demands, cfg)
    if cfg.t == cfg.K:
        return _finish_plan("parallel", placement, [], None if cfg.z == 0 else {})
    if cfg.z == 0:
        # no choice to make: the message multiset coincides with the
        # successive plan, only the transmission schedule differs
        messages = []
        for p in range(1, cfg.P + 1):
            messages.extend(build_messages_full(p, topology, demands, placement))
        return _finish_plan("parallel", placement, messages, None)
    schedule = cover_schedule_parallel(topology, cfg.t, cfg.z)
    messages = []
    assignment = {}
    for H, cover in schedule:
        assignment[frozenset(H)] = cover
        messages.extend(_messages_for_cover(H, cover, topology, demands, placement))
    return _finish_plan("parallel", placement, messages, assignment)


def _check_instance(topology, demands, cfg) -> None:
    if topology.P != cfg.P or topology.K != cfg.K:
        raise ValueError("topology shape does not match the config")
    for Z in topology.servers_of_user:
        if len(Z) != cfg.rho:
            raise ValueError("topology connectivity does not match config.rho")
    if len(demands) != cfg.K:
        raise ValueError(f"expected {cfg.K} demands, got {len(demands)}")
    if any(not 1 <= d <= cfg.N for d in demands):
        raise ValueError("demands must index library files 1..N")


def decode_user(
    user: int,
    plan: DeliveryPlan,
    topology: Topology,
    placement: PlacementState,
    demands: tuple[int, ...],
) -> bytes:
    """Reassemble the user's requested file, bit-exact, from its cache plus
    the plan's messages; raises DecodeFailureError if chunks are missing."""
    cfg = placement.config
    d = demands[user - 1]
    needed = cfg.rho - cfg.z
    cache = placement.user_cache[user]
    index = {(m.server, m.target_set): m for m in plan.messages}

    pieces = []
    for A in placement.subsets:
        if user in A:
            pieces.append(cache[(d, A)])
            continue
        H = tuple(sorted(A + (user,)))
        fro = frozenset(H)
        if cfg.z == 0:
            srvs = topology.servers_of_user[user - 1]
        else:
            if plan.assignment is None or fro not in plan.assignment:
                raise DecodeFailureError(f"no cover recorded for target set {H}")
            srvs = assigned_servers(user, plan.assignment[fro], topology, needed)
        shares = []
        for p in srvs:
            msg = index.get((p, fro))
            if msg is None:
                raise DecodeFailureError(
                    f"user {user}: message from server {p} for {H} is missing"
                )
            payload = msg.payload
            peers = _peers_in_message(user, p, H, plan, topology, needed)
            for peer in peers:
                seg = cache[(demands[peer - 1], tuple(u for u in H if u != peer))]
                chunk = galois.encode_row(
                    placement.generator, p, split_subsegments(seg, needed)
                )
                payload = galois.xor_bytes(payload, chunk)
            shares.append(galois.CodedChunk(p, payload))
        try:
            parts = galois.mds_decode(shares, placement.generator)
        except galois.InsufficientSharesError as e:
            raise DecodeFailureError(str(e)) from e
        pieces.append(b"".join(parts))
    return b"".join(pieces)[: placement.true_size]


def _peers_in_message(user, server, H, plan, topology, needed):
    # which other users' chunks are XORed into this server's message for H
    if plan.z == 0:
        connected = set(topology.users_of_server(server))
        return [k for k in H if k != user and k in connected]
    cover = plan.assignment[frozenset(H)]
    return [
        k for k in H
        if k != user and server in assigned_servers(k, cover, topology, needed)
    ]


def structural_counts_successive(topology: Topology, t: int, z: int) -> tuple[int, ...]:
    """Per-server message counts of the successive plan, without payloads."""
    if t == topology.K:
        return (0,) * topology.P
    if z == 0:
        return tuple(count_messages(qp, topology.K, t) for qp in degree_vector(topology))
    counts = [0] * topology.P
    for _, cover in cover_schedule_successive(topology, t, z):
        for p in cover:
            counts[p - 1] += 1
    return tuple(counts)


def structural_counts_parallel(topology: Topology, t: int, z: int) -> tuple[int, ...]:
    """Per-server message counts of the greedy load-balanced plan."""
    if t == topology.K:
        return (0,) * topology.P
    if z == 0:
        return structural_counts_successive(topology, t, 0)
    counts = [0] * topology.P
    for _, cover in cover_schedule_parallel(topology, t, z):
        for p in cover:
            counts[p - 1] += 1
    return tuple(counts)


@dataclass
class MinStorageDeliveryPlan:
    messages: list[MulticastMessage]
    per_server_bits: tuple[int, ...]
    chunk_bits: int


def plan_min_storage(
    topology: Topology, demands: tuple[int, ...], placement: MinStoragePlacement
) -> MinStorageDeliveryPlan:
    """Unicast baseline: every connected server sends the user its coded
    chunk of the requested file's tail."""
    cfg = placement.config
    _check_instance(topology, demands, cfg)
    messages = []
    bits = [0] * cfg.P
    if placement.chunk_bytes:
        for p in range(1, cfg.P + 1):
            for k in topology.users_of_server(p):
                payload = placement.server_store[p][demands[k - 1]]
                messages.append(
                    MulticastMessage(
                        server=p, target_set=frozenset((k,)),
                        payload=payload, length_bits=len(payload) * 8,
                    )
                )
                bits[p - 1] += len(payload) * 8
    return MinStorageDeliveryPlan(
        messages=messages, per_server_bits=tuple(bits),
        chunk_bits=placement.chunk_bytes * 8,
    )


def decode_user_min_storage(
    user: int,
    plan: MinStorageDeliveryPlan,
    topology: Topology,
    placement: MinStoragePlacement,
    demands: tuple[int, ...],
) -> bytes:
    cfg = placement.config
    d = demands[user - 1]
    prefix = placement.prefixes[d]
    if not placement.chunk_bytes:
        return prefix[: placement.true_size]
    index = {(m.server, m.target_set): m for m in plan.messages}
    shares = []
    for p in topology.servers_of_user[user - 1]:
        msg = index.get((p, frozenset((user,))))
        if msg is None:
            raise DecodeFailureError(
                f"user {user}: chunk from server {p} is missing"
            )
        shares.append(galois.CodedChunk(p, msg.payload))
    try:
        parts = galois.mds_decode(shares, placement.generator)
    except galois.InsufficientSharesError as e:
        raise DecodeFailureError(str(e)) from e
    return (prefix + b"".join(parts))[: placement.true_size]
