"""Cache-aided content delivery simulator: MDS-coded server storage, coded
multicast delivery over random user-server topologies, and exact latency
analysis for successive and simultaneous transmission."""

from .analysis import (
    LatencyReport,
    MemoryShare,
    TopologyExtremes,
    best_topology_latency,
    expected_latency_successive,
    latency_parallel,
    latency_successive,
    lemma1_holds,
    memory_share,
    min_storage_latency,
    share_latency,
    topology_extremes,
)
from .delivery import (
    CoverageError,
    DecodeFailureError,
    DeliveryPlan,
    MulticastMessage,
    count_messages,
    decode_user,
    decode_user_min_storage,
    minimum_cover,
    plan_min_storage,
    plan_parallel_greedy,
    plan_successive,
    worst_case_demands,
)
from .galois import (
    CodedChunk,
    GeneratorMatrix,
    build_generator,
    gf_inv,
    gf_mul,
    mds_decode,
    mds_encode,
)
from .placement import (
    FeasibilityError,
    NonIntegerParameterError,
    PlacementState,
    SystemConfig,
    partition_file,
    place,
    place_min_storage,
    storage_audit,
)
from .sweeps import (
    SweepSpec,
    decompose_point,
    point_latency,
    run_replay,
    run_sweep,
    run_verify,
)
from .topology import (
    Topology,
    degree_vector,
    enumerate_topologies,
    prob_degree,
    sample_topology,
    topology_from_json,
)

__version__ = "0.1.0"
