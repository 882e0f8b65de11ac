"""Shared fixtures: tiny scenes, random DAGs and synthetic beam tables."""

import numpy as np

from irsnet.geometry import IrsDescriptor, LoSGraph, Scene
from irsnet.training import BrtRow, BsBrt, BsBrtRow, IrsBrt


def toy_chain_scene() -> Scene:
    """BS -> IRS1 -> IRS2 -> user with the direct links blocked."""
    return Scene(
        bs_position=(0.0, 0.0, 2.0),
        bs_antenna_count=2,
        bs_array_axis=(0.0, 1.0, 0.0),
        bs_antenna_spacing=0.0299792458,
        irs_list=[
            IrsDescriptor(position=(3.0, 2.0, 2.0), pointing=(0.0, -1.0, 0.0), m1=2, m2=2,
                          element_spacing=0.0149896229),
            IrsDescriptor(position=(6.0, -2.0, 2.0), pointing=(0.0, 1.0, 0.0), m1=2, m2=2,
                          element_spacing=0.0149896229),
        ],
        user_positions=[(9.0, 2.0, 1.5)],
        blocked_pairs=[(0, 2), (0, 3)],
    )


def single_hop_scene() -> Scene:
    """BS -> IRS1 -> user, direct link blocked; smallest useful scene."""
    return Scene(
        bs_position=(0.0, 0.0, 2.0),
        bs_antenna_count=2,
        bs_array_axis=(0.0, 1.0, 0.0),
        bs_antenna_spacing=0.0299792458,
        irs_list=[
            IrsDescriptor(position=(3.0, 2.0, 2.0), pointing=(0.0, -1.0, 0.0), m1=2, m2=2,
                          element_spacing=0.0149896229),
        ],
        user_positions=[(6.0, 0.0, 1.5)],
        blocked_pairs=[(0, 2)],
    )


def random_dag(rng: np.random.Generator, irs_count: int, edge_prob: float = 0.5) -> LoSGraph:
    """A random graph with the same structural guarantees as a real scene:
    surfaces are ordered by BS distance, edges only run outward, the BS is a
    pure source and the user a pure sink."""
    user = irs_count + 1
    edges = set()
    for i in range(irs_count + 1):
        for j in range(i + 1, irs_count + 1):
            if rng.random() < edge_prob:
                edges.add((i, j))
    for j in range(irs_count + 1):
        if rng.random() < edge_prob:
            edges.add((j, user))
    distances = (0.0,) + tuple(float(k) for k in range(1, irs_count + 2))
    return LoSGraph(irs_count=irs_count, user_index=0, edges=frozenset(edges),
                    bs_distances=distances)


def synthetic_tables(rng: np.random.Generator, graph: LoSGraph):
    """Random positive trained gains for every triple the graph supports,
    plus per-link average gains; beam indices are arbitrary but valid."""
    user = graph.user_node
    bs_rows = {}
    for j in graph.bs_successors:
        if j != user:
            bs_rows[j] = BsBrtRow(beam_index=int(rng.integers(1, 5)), gain=float(rng.uniform(0.1, 2.0)))
    irs_brts = {}
    for j in range(1, graph.irs_count + 1):
        rows = {}
        for i in graph.predecessors(j):
            for r in graph.successors(j):
                rows[(i, r)] = BrtRow(
                    h_index=int(rng.integers(1, 5)),
                    v_index=int(rng.integers(1, 5)),
                    gain=float(rng.uniform(0.05, 5.0)),
                )
        irs_brts[j] = IrsBrt(owner=j, rows=rows)
    q_gains = {edge: float(rng.uniform(0.2, 3.0)) for edge in graph.edges}
    return BsBrt(rows=bs_rows), irs_brts, q_gains


def brute_force_best(graph: LoSGraph, irs_brts: dict, q_gains: dict, paths):
    """Reference optimum: direct per-path product evaluation, ties resolved
    by (gain, fewer hops, lexicographic sequence)."""
    import math

    user = graph.user_node
    best = None
    for path in paths:
        seq = path.irs_sequence
        chain = (0,) + seq + (user,)
        gain = 1.0
        for l in range(1, len(chain) - 1):
            gain *= irs_brts[chain[l]].rows[(chain[l - 1], chain[l + 1])].gain
        for a, b in zip(seq, seq[1:]):
            gain /= q_gains[(a, b)]
        log_gain = math.log(gain) if gain > 0 else -math.inf
        key = (-log_gain, len(seq), seq)
        if best is None or key < best[0]:
            best = (key, seq, gain)
    return best
