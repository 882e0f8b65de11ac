"""Beam routing over the LoS graph using trained table entries only.

The end-to-end power of a candidate path is predicted from per-triple
trained gains: multiply the stored gains of consecutive triples and divide
out the average gain of each interior controller-to-controller link, which
each appears in two neighbouring triples.  On purely geometric (unfaded)
links the prediction telescopes into the exact beamformed path power; with
scatter it is the protocol's best available estimate.

The best path is found by dynamic programming over states
(previous node, current surface) in hop order, which is exact because the
predicted log-gain decomposes into per-transition weights that depend only
on that state pair.
"""

import math
from dataclasses import dataclass

from .channels import BeamAssignment
from .geometry import LoSGraph
from .training import BsBrt, MissingEntryError


@dataclass(frozen=True)
class ReflectionPath:
    """An ordered sequence of surface ids between the BS and the user."""

    irs_sequence: tuple

    def __post_init__(self):
        seq = tuple(int(a) for a in self.irs_sequence)
        if not seq:
            raise ValueError("a reflection path needs at least one surface")
        if len(set(seq)) != len(seq):
            raise ValueError("a reflection path cannot revisit a surface")
        object.__setattr__(self, "irs_sequence", seq)

    @property
    def hop_count(self) -> int:
        """Number of reflecting surfaces (the path has hop_count + 1 links)."""
        return len(self.irs_sequence)

    def nodes(self, user_node: int) -> tuple:
        return (0,) + self.irs_sequence + (user_node,)


@dataclass(frozen=True)
class RouteResult:
    path: ReflectionPath
    estimated_gain: float
    beam_assignment: BeamAssignment


def _sequence(path) -> tuple:
    if isinstance(path, ReflectionPath):
        return path.irs_sequence
    return ReflectionPath(tuple(path)).irs_sequence


def _triple_gain(irs_brts: dict, i: int, j: int, r: int) -> float:
    brt = irs_brts.get(j)
    row = brt.rows.get((i, r)) if brt is not None else None
    if row is None:
        raise MissingEntryError(f"surface {j} has no trained row for triple ({i}, {j}, {r})")
    return row.gain


def _log_or_neg_inf(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def estimate_path_gain(bs_brt: BsBrt, irs_brts: dict, q_gains: dict, path, user_node: int) -> float:
    """Predicted end-to-end power gain of a path from trained tables alone.

    Every interior hop divides by the average gain of the link shared by
    two neighbouring triples; the computation runs in log domain so long
    paths cannot underflow intermediate products.
    """
    seq = _sequence(path)
    if seq[0] not in bs_brt.rows:
        raise MissingEntryError(f"BS table has no row for surface {seq[0]}")
    chain = (0,) + seq + (user_node,)
    log_gain = 0.0
    for l in range(1, len(chain) - 1):
        log_gain += _log_or_neg_inf(_triple_gain(irs_brts, chain[l - 1], chain[l], chain[l + 1]))
    for a, b in zip(seq, seq[1:]):
        if (a, b) not in q_gains:
            raise MissingEntryError(f"no average link gain for ({a}, {b})")
        log_gain -= math.log(q_gains[(a, b)])
    return math.exp(log_gain)


def assignment_from_brts(path, bs_brt: BsBrt, irs_brts: dict, user_node: int) -> BeamAssignment:
    """Collect the trained beam indices a path would replay."""
    seq = _sequence(path)
    bs_row = bs_brt.rows.get(seq[0])
    if bs_row is None:
        raise MissingEntryError(f"BS table has no row for surface {seq[0]}")
    chain = (0,) + seq + (user_node,)
    irs_beams = {}
    for l in range(1, len(chain) - 1):
        j = chain[l]
        brt = irs_brts.get(j)
        row = brt.rows.get((chain[l - 1], chain[l + 1])) if brt is not None else None
        if row is None:
            raise MissingEntryError(
                f"surface {j} has no trained row for triple ({chain[l - 1]}, {j}, {chain[l + 1]})"
            )
        irs_beams[j] = (row.h_index, row.v_index)
    return BeamAssignment(bs_beam_index=bs_row.beam_index, irs_beams=irs_beams)


def enumerate_paths(graph: LoSGraph, max_hops: int | None = None) -> list:
    """All loop-free BS->user paths with 1..max_hops surfaces, in
    lexicographic order of their surface sequences."""
    if max_hops is None:
        max_hops = graph.irs_count
    if max_hops < 1:
        raise ValueError("max_hops must be at least 1")
    user = graph.user_node
    found = []

    def extend(prefix: tuple, node: int) -> None:
        for nxt in graph.successors(node):
            if nxt == user:
                if prefix:
                    found.append(prefix)
            elif len(prefix) < max_hops and nxt not in prefix:
                extend(prefix + (nxt,), nxt)

    extend((), 0)
    return [ReflectionPath(seq) for seq in sorted(found)]


def optimal_route(
    graph: LoSGraph,
    bs_brt: BsBrt,
    irs_brts: dict,
    q_gains: dict,
    max_hops: int | None = None,
) -> RouteResult | None:
    """Highest-predicted-gain path by DP over (previous, current) states.

    Ties on predicted gain prefer fewer hops, then the lexicographically
    smallest surface sequence.  Returns None when the user is unreachable.
    """
    if max_hops is None:
        max_hops = graph.irs_count
    if max_hops < 1:
        raise ValueError("max_hops must be at least 1")
    user = graph.user_node
    # state: (previous node, current surface) -> (log score, path so far)
    layer = {}
    for a1 in graph.bs_successors:
        if a1 != user:
            layer[(0, a1)] = (0.0, (a1,))
    best_score = -math.inf
    best_path = None
    for depth in range(1, max_hops + 1):
        next_layer = {}
        for (i, j) in sorted(layer):
            score, seq = layer[(i, j)]
            if graph.has_edge(j, user):
                cand = score + _log_or_neg_inf(_triple_gain(irs_brts, i, j, user))
                if cand > best_score and cand > -math.inf:
                    best_score, best_path = cand, seq
                elif cand == best_score and best_path is not None and seq < best_path:
                    # same predicted gain at the same or later depth: the
                    # earlier (shorter) path already won, so only same-depth
                    # lexicographic ties can land here
                    if len(seq) == len(best_path):
                        best_path = seq
            if depth == max_hops:
                continue
            for r in graph.successors(j):
                if r == user or r in seq:
                    continue
                gain = _triple_gain(irs_brts, i, j, r)
                if (j, r) not in q_gains:
                    raise MissingEntryError(f"no average link gain for ({j}, {r})")
                cand = score + _log_or_neg_inf(gain) - math.log(q_gains[(j, r)])
                state = (j, r)
                incumbent = next_layer.get(state)
                if (
                    incumbent is None
                    or cand > incumbent[0]
                    or (cand == incumbent[0] and seq + (r,) < incumbent[1])
                ):
                    next_layer[state] = (cand, seq + (r,))
        layer = next_layer
        if not layer:
            break
    if best_path is None:
        return None
    path = ReflectionPath(best_path)
    beams = assignment_from_brts(path, bs_brt, irs_brts, user)
    return RouteResult(path=path, estimated_gain=math.exp(best_score), beam_assignment=beams)
