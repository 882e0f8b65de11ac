"""Path enumeration, table-based gain prediction and the routing DP."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irsnet.channels import ChannelConfig, cascaded_gain, synthesize_channels
from irsnet.codebooks import build_codebooks
from irsnet.geometry import LoSGraph, build_los_graph
from irsnet.routing import (
    ReflectionPath,
    enumerate_paths,
    estimate_path_gain,
    optimal_route,
)
from irsnet.training import BrtRow, BsBrt, BsBrtRow, IrsBrt, MissingEntryError, run_distributed_training

from support import brute_force_best, random_dag, synthetic_tables, toy_chain_scene


def _graph(irs_count, edges):
    distances = (0.0,) + tuple(float(k) for k in range(1, irs_count + 2))
    return LoSGraph(irs_count=irs_count, user_index=0, edges=frozenset(edges), bs_distances=distances)


def _tables(bs_rows, triple_rows):
    bs = BsBrt(rows={j: BsBrtRow(beam_index=1, gain=g) for j, g in bs_rows.items()})
    irs = {}
    for (i, j, r), g in triple_rows.items():
        irs.setdefault(j, IrsBrt(owner=j, rows={}))
        irs[j].rows[(i, r)] = BrtRow(h_index=1, v_index=1, gain=g)
    return bs, irs


def test_two_hop_estimate_hand_calculation():
    """gain = (first triple) * (second triple) / (shared link average)."""
    graph = _graph(2, {(0, 1), (1, 2), (2, 3)})
    bs, irs = _tables({1: 0.5}, {(0, 1, 2): 6.0, (1, 2, 3): 10.0})
    est = estimate_path_gain(bs, irs, {(1, 2): 4.0}, [1, 2], graph.user_node)
    assert est == pytest.approx(15.0, rel=2e-9)


def test_single_hop_estimate_is_the_row_gain():
    graph = _graph(1, {(0, 1), (1, 2)})
    bs, irs = _tables({1: 0.5}, {(0, 1, 2): 3.75})
    assert estimate_path_gain(bs, irs, {}, [1], graph.user_node) == pytest.approx(3.75, rel=2e-9)


def test_estimate_requires_all_entries():
    graph = _graph(2, {(0, 1), (1, 2), (2, 3)})
    bs, irs = _tables({1: 0.5}, {(0, 1, 2): 6.0, (1, 2, 3): 10.0})
    with pytest.raises(MissingEntryError):
        estimate_path_gain(bs, irs, {}, [1, 2], graph.user_node)  # no link average
    with pytest.raises(MissingEntryError):
        estimate_path_gain(BsBrt(rows={}), irs, {(1, 2): 4.0}, [1, 2], graph.user_node)
    bs2, irs2 = _tables({1: 0.5}, {(0, 1, 2): 6.0})
    with pytest.raises(MissingEntryError):
        estimate_path_gain(bs2, irs2, {(1, 2): 4.0}, [1, 2], graph.user_node)


def test_enumerate_paths_lexicographic_and_capped():
    graph = _graph(3, {(0, 1), (0, 2), (1, 2), (1, 4), (2, 3), (2, 4), (3, 4)})
    assert [p.irs_sequence for p in enumerate_paths(graph)] == [
        (1,), (1, 2), (1, 2, 3), (2,), (2, 3)]
    assert [p.irs_sequence for p in enumerate_paths(graph, max_hops=2)] == [
        (1,), (1, 2), (2,), (2, 3)]
    assert [p.irs_sequence for p in enumerate_paths(graph, max_hops=1)] == [(1,), (2,)]


def test_direct_link_is_not_a_path():
    graph = _graph(1, {(0, 1), (0, 2), (1, 2)})
    assert [p.irs_sequence for p in enumerate_paths(graph)] == [(1,)]


def test_reflection_path_validation():
    with pytest.raises(ValueError):
        ReflectionPath(())
    with pytest.raises(ValueError):
        ReflectionPath((1, 1))
    assert ReflectionPath((2, 1)).hop_count == 2
    assert ReflectionPath((3,)).nodes(user_node=5) == (0, 3, 5)


def test_route_ties_prefer_fewer_hops_then_lexicographic():
    graph = _graph(3, {(0, 1), (0, 2), (1, 4), (2, 3), (3, 4)})
    bs, irs = _tables(
        {1: 1.0, 2: 1.0},
        {(0, 1, 4): 2.0, (0, 2, 3): 4.0, (2, 3, 4): 1.0},
    )
    route = optimal_route(graph, bs, irs, {(2, 3): 2.0})
    assert route.path.irs_sequence == (1,)  # 2.0 == 4*1/2 but one hop beats two
    assert route.estimated_gain == pytest.approx(2.0, rel=2e-9)

    graph = _graph(2, {(0, 1), (0, 2), (1, 3), (2, 3)})
    bs, irs = _tables({1: 1.0, 2: 1.0}, {(0, 1, 3): 2.0, (0, 2, 3): 2.0})
    route = optimal_route(graph, bs, irs, {})
    assert route.path.irs_sequence == (1,)  # lexicographic among equal one-hop routes


def test_route_none_when_unreachable_or_dead():
    graph = _graph(2, {(0, 1), (1, 2)})  # nothing reaches node 3
    bs, irs = _tables({1: 1.0}, {(0, 1, 2): 1.0})
    assert optimal_route(graph, bs, irs, {(1, 2): 1.0}) is None

    graph = _graph(1, {(0, 1), (1, 2)})
    bs, irs = _tables({1: 1.0}, {(0, 1, 2): 0.0})  # trained gain of zero
    assert optimal_route(graph, bs, irs, {}) is None


def test_route_respects_max_hops():
    graph = _graph(2, {(0, 1), (1, 2), (2, 3), (1, 3)})
    bs, irs = _tables(
        {1: 1.0},
        {(0, 1, 2): 50.0, (1, 2, 3): 1.0, (0, 1, 3): 0.5},
    )
    q = {(1, 2): 1.0}
    assert optimal_route(graph, bs, irs, q).path.irs_sequence == (1, 2)
    assert optimal_route(graph, bs, irs, q, max_hops=1).path.irs_sequence == (1,)


def test_route_assignment_collects_trained_beams():
    graph = _graph(2, {(0, 1), (1, 2), (2, 3)})
    bs = BsBrt(rows={1: BsBrtRow(beam_index=7, gain=1.0)})
    irs = {
        1: IrsBrt(owner=1, rows={(0, 2): BrtRow(h_index=3, v_index=4, gain=2.0)}),
        2: IrsBrt(owner=2, rows={(1, 3): BrtRow(h_index=5, v_index=6, gain=2.0)}),
    }
    route = optimal_route(graph, bs, irs, {(1, 2): 1.0})
    assert route.beam_assignment.bs_beam_index == 7
    assert route.beam_assignment.irs_beams == {1: (3, 4), 2: (5, 6)}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_dp_matches_exhaustive_enumeration(seed, irs_count):
    rng = np.random.default_rng(seed)
    graph = random_dag(rng, irs_count)
    bs, irs, q = synthetic_tables(rng, graph)
    paths = enumerate_paths(graph)
    feasible = [p for p in paths if p.irs_sequence[0] in bs.rows]
    route = optimal_route(graph, bs, irs, q)
    if not feasible:
        assert route is None
        return
    best = brute_force_best(graph, irs, q, feasible)
    assert route is not None
    assert route.path.irs_sequence == best[1]
    assert math.log(route.estimated_gain) == pytest.approx(math.log(best[2]), abs=1e-9)


def test_prediction_telescopes_exactly_on_unfaded_channels():
    """Pure geometric channels: the trained-table prediction must equal the
    replayed end-to-end gain to machine precision."""
    scene = toy_chain_scene()
    graph = build_los_graph(scene)
    channels = synthesize_channels(scene, graph, ChannelConfig(los_only=True))
    codebooks = build_codebooks(scene, bs_size=2, irs_h_size=2, irs_v_size=2)
    result = run_distributed_training(channels, codebooks)
    route = optimal_route(graph, result.bs_brt, result.irs_brts, channels.q_gains)
    assert route.path.irs_sequence == (1, 2)
    achieved = cascaded_gain(channels, route.path, route.beam_assignment, codebooks)
    assert route.estimated_gain == pytest.approx(achieved, rel=1e-6)
