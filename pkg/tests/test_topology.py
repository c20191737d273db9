from collections import Counter
from fractions import Fraction

import pytest

from codedcache.combinatorics import binom, subsets_colex
from codedcache.placement import SystemConfig
from codedcache.topology import (
    EnumerationTooLargeError,
    Topology,
    degree_vector,
    enumerate_topologies,
    prob_degree,
    sample_topology,
    topology_count,
    topology_from_json,
)

CFG = SystemConfig(P=3, K=4, N=4, rho=2, M_U=1, M_S=2)


def test_topology_validation():
    t = Topology(P=3, servers_of_user=((1, 2), (2, 3), (1, 3), (1, 2)))
    assert t.K == 4
    with pytest.raises(ValueError):
        Topology(P=3, servers_of_user=((2, 1),))  # not ascending
    with pytest.raises(ValueError):
        Topology(P=3, servers_of_user=((1, 4),))  # out of range
    with pytest.raises(ValueError):
        Topology(P=3, servers_of_user=((1, 1),))  # repeated


def test_incidence_and_degrees():
    t = Topology(P=3, servers_of_user=((1, 2), (1, 2), (2, 3), (2, 3)))
    assert t.incidence() == ((1, 1, 0, 0), (1, 1, 1, 1), (0, 0, 1, 1))
    assert degree_vector(t) == (2, 4, 2)
    assert t.users_of_server(2) == (1, 2, 3, 4)
    assert sum(degree_vector(t)) == t.K * 2


def test_known_degree_vectors():
    fig_b = Topology(P=3, servers_of_user=((1, 2),) * 4)
    assert degree_vector(fig_b) == (4, 4, 0)
    all_on = Topology(P=2, servers_of_user=((1, 2),) * 3)
    assert degree_vector(all_on) == (3, 3)


def test_enumeration_count_and_order():
    topos = list(enumerate_topologies(CFG))
    assert len(topos) == 81
    assert topology_count(CFG) == 81
    assert len({t.servers_of_user for t in topos}) == 81
    # lexicographic in per-user subset index
    choices = subsets_colex(3, 2)
    indices = [
        tuple(choices.index(Z) for Z in t.servers_of_user) for t in topos
    ]
    assert indices == sorted(indices)
    assert topos[0].servers_of_user == ((1, 2),) * 4


def test_enumeration_small_cases():
    one = SystemConfig(P=3, K=2, N=2, rho=3, M_U=1, M_S=1)
    assert len(list(enumerate_topologies(one))) == 1
    four = SystemConfig(P=2, K=2, N=2, rho=1, M_U=1, M_S=1)
    assert len(list(enumerate_topologies(four))) == 4


def test_enumeration_bound():
    cfg = SystemConfig(P=7, K=5, N=5, rho=4, M_U=1, M_S="5/4")
    with pytest.raises(EnumerationTooLargeError):
        list(enumerate_topologies(cfg, bound=100))


def test_sampling_deterministic_and_valid():
    a = sample_topology(CFG, 42)
    b = sample_topology(CFG, 42)
    c = sample_topology(CFG, 43)
    assert a.servers_of_user == b.servers_of_user
    assert a.servers_of_user != c.servers_of_user or True  # different seed may rarely agree
    for Z in a.servers_of_user:
        assert len(Z) == 2 and all(1 <= p <= 3 for p in Z)


def test_sampling_marginals_uniform():
    # per-user subset frequencies within 4 sigma over 10^5 draws
    draws = 100_000
    counts = Counter()
    for i in range(draws):
        topo = sample_topology(CFG, i)
        counts[topo.servers_of_user[0]] += 1
    expect = draws / 3
    sigma = (draws * (1 / 3) * (2 / 3)) ** 0.5
    for subset in subsets_colex(3, 2):
        assert abs(counts[subset] - expect) < 4 * sigma


def test_prob_degree_exact_against_enumeration():
    histogram = Counter()
    for topo in enumerate_topologies(CFG):
        histogram[degree_vector(topo)[0]] += 1
    assert histogram == {0: 1, 1: 8, 2: 24, 3: 32, 4: 16}
    for q in range(5):
        assert prob_degree(CFG, q) == Fraction(histogram[q], 81)
    assert prob_degree(CFG, 2) == Fraction(24, 81)
    assert sum(prob_degree(CFG, q) for q in range(5)) == 1


def test_prob_degree_edge_cases():
    full = SystemConfig(P=4, K=3, N=3, rho=4, M_U=1, M_S=1)
    assert prob_degree(full, 3) == 1
    assert prob_degree(full, 2) == 0
    # matches the closed form C(K,q) (rho/P)^q (1-rho/P)^(K-q)
    for q in range(5):
        want = (
            binom(4, q)
            * Fraction(2, 3) ** q
            * Fraction(1, 3) ** (4 - q)
        )
        assert prob_degree(CFG, q) == want


def test_topology_json_roundtrip():
    import json

    topo = Topology(P=3, servers_of_user=((1, 2), (2, 3), (1, 3), (1, 2)))
    data = topo.to_json()
    assert json.loads(data) == {"Z": [[1, 2], [2, 3], [1, 3], [1, 2]]}
    again = topology_from_json(data, CFG)
    assert again.servers_of_user == topo.servers_of_user
    from_text = topology_from_json('{"Z": [[1,2],[2,3],[1,3],[1,2]]}', CFG)
    assert from_text.servers_of_user == topo.servers_of_user


def test_topology_json_validation():
    with pytest.raises(ValueError):
        topology_from_json({"Z": [[1, 2]]}, CFG)  # wrong K
    with pytest.raises(ValueError):
        topology_from_json({"Z": [[1], [1], [1], [1]]}, CFG)  # wrong rho
    with pytest.raises(ValueError):
        topology_from_json({"bad": []}, CFG)
