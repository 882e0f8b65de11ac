"""Reference beam-search strategies evaluated on the true channels.

These searches measure the actual end-to-end power of candidate beam
combinations, so they upper-bound what table-driven training can deliver
(globally for the exhaustive sweep, locally for coordinate ascent).  Both
honour the same lowest-index tie-breaking as the training code.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .channels import BeamAssignment, ChannelSet, _validate_path, cascaded_gain
from .codebooks import CodebookSet
from .geometry import LoSGraph
from .routing import ReflectionPath, enumerate_paths
from .training import MeasurementCounter

DEFAULT_EXHAUSTIVE_CAP = 10_000_000


class BudgetExceededError(RuntimeError):
    """The requested exhaustive sweep would exceed the configured budget."""


@dataclass(frozen=True)
class SearchResult:
    path: ReflectionPath
    beams: BeamAssignment
    achieved_gain: float
    measurements_used: int
    iterations: int = 0
    objective_trace: tuple = ()


def _hop_matrices(channels: ChannelSet, seq):
    """(entry matrix, inter-hop matrices, exit row) for a validated path."""
    first = channels.bs_to_irs[seq[0]]
    links = [channels.irs_to_irs[(a, b)] for a, b in zip(seq, seq[1:])]
    exit_row = channels.irs_to_user[seq[-1]]
    return first, links, exit_row


def _panel_sweep(channels: ChannelSet, j: int, codebooks: CodebookSet, through: np.ndarray):
    """Power of every (h, v) beam of surface j given the combined
    entry*exit coefficients ``through`` (elementwise product, length M_j)."""
    irs = channels.scene.irs(j)
    h_cb, v_cb = codebooks.for_irs(j)
    coupling = through.reshape(irs.m1, irs.m2)
    amps = h_cb.entries @ coupling @ v_cb.entries.T  # (D1, D2)
    return np.abs(amps) ** 2


def _argmax_pair(gains: np.ndarray) -> tuple[int, int, float]:
    """First-occurrence argmax over a (D1, D2) power table, 1-based."""
    flat = int(np.argmax(gains))
    d2 = gains.shape[1]
    return flat // d2 + 1, flat % d2 + 1, float(gains.flat[flat])


def exhaustive_beam_search(
    channels: ChannelSet,
    path,
    codebooks: CodebookSet,
    counter: MeasurementCounter | None = None,
    cap: int = DEFAULT_EXHAUSTIVE_CAP,
) -> SearchResult:
    """True optimum over every BS x per-surface beam combination of one path.

    The combination count is D_B * prod_j(D1_j * D2_j); anything above
    ``cap`` raises :class:`BudgetExceededError` up front instead of melting
    the machine.
    """
    seq = _validate_path(channels, path)
    d_b = codebooks.bs.size
    combos = d_b
    for a in seq:
        h_cb, v_cb = codebooks.for_irs(a)
        combos *= h_cb.size * v_cb.size
    if combos > cap:
        raise BudgetExceededError(
            f"exhaustive sweep needs {combos} evaluations, above the cap of {cap}"
        )
    if counter is not None:
        counter.exhaustive_measurements += combos

    first, links, exit_row = _hop_matrices(channels, seq)
    best_gain = -np.inf
    best_bs = 1
    best_beams: dict = {}

    def descend(level: int, vec: np.ndarray, chosen: dict, bs_index: int) -> None:
        nonlocal best_gain, best_bs, best_beams
        a = seq[level]
        if level == len(seq) - 1:
            gains = _panel_sweep(channels, a, codebooks, exit_row * vec)
            h, v, gain = _argmax_pair(gains)
            if gain > best_gain:
                best_gain = gain
                best_bs = bs_index
                best_beams = {**chosen, a: (h, v)}
            return
        h_cb, v_cb = codebooks.for_irs(a)
        for h, v in product(range(1, h_cb.size + 1), range(1, v_cb.size + 1)):
            theta = codebooks.compose(a, h, v)
            descend(level + 1, links[level] @ (theta * vec), {**chosen, a: (h, v)}, bs_index)

    for k in range(1, d_b + 1):
        descend(0, first @ codebooks.bs.entry(k), {}, k)

    beams = BeamAssignment(bs_beam_index=best_bs, irs_beams=best_beams)
    achieved = cascaded_gain(channels, seq, beams, codebooks)
    return SearchResult(
        path=ReflectionPath(tuple(seq)),
        beams=beams,
        achieved_gain=achieved,
        measurements_used=combos,
        iterations=0,
    )


def sequential_beam_search(
    channels: ChannelSet,
    path,
    codebooks: CodebookSet,
    counter: MeasurementCounter | None = None,
    max_rounds: int = 10,
) -> SearchResult:
    """Round-robin coordinate ascent over the beams of one path.

    All beams start at index 1.  Each round sweeps the BS codebook first,
    then every surface in hop order; each sweep keeps the argmax (ties to
    the lowest index), so the objective never decreases.  The search stops
    after a full round without index changes, or after ``max_rounds``.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    seq = _validate_path(channels, path)
    first, links, exit_row = _hop_matrices(channels, seq)
    d_b = codebooks.bs.size
    sweep_cost = d_b + sum(
        codebooks.for_irs(a)[0].size * codebooks.for_irs(a)[1].size for a in seq
    )

    bs_index = 1
    beams = {a: (1, 1) for a in seq}
    thetas = {a: codebooks.compose(a, 1, 1) for a in seq}

    def prefixes() -> list:
        vecs = [first @ codebooks.bs.entry(bs_index)]
        for level, (a, b) in enumerate(zip(seq, seq[1:])):
            vecs.append(links[level] @ (thetas[a] * vecs[level]))
        return vecs

    def suffixes() -> list:
        rows = [None] * len(seq)
        rows[-1] = exit_row
        for level in range(len(seq) - 2, -1, -1):
            b = seq[level + 1]
            rows[level] = (rows[level + 1] * thetas[b]) @ links[level]
        return rows

    trace = []
    measurements = 0
    rounds = 0
    while True:
        rounds += 1
        changed = False

        eff = (suffixes()[0] * thetas[seq[0]]) @ first  # effective 1 x N row
        rss = np.abs(codebooks.bs.entries @ eff) ** 2
        best = int(np.argmax(rss))
        measurements += d_b
        if best + 1 != bs_index:
            bs_index = best + 1
            changed = True
        trace.append(float(rss[best]))

        for level, a in enumerate(seq):
            through = suffixes()[level] * prefixes()[level]
            gains = _panel_sweep(channels, a, codebooks, through)
            h, v, gain = _argmax_pair(gains)
            h_cb, v_cb = codebooks.for_irs(a)
            measurements += h_cb.size * v_cb.size
            if (h, v) != beams[a]:
                beams[a] = (h, v)
                thetas[a] = codebooks.compose(a, h, v)
                changed = True
            trace.append(gain)

        if not changed or rounds >= max_rounds:
            break

    if counter is not None:
        counter.sequential_measurements += measurements
    assignment = BeamAssignment(bs_beam_index=bs_index, irs_beams=dict(beams))
    achieved = cascaded_gain(channels, seq, assignment, codebooks)
    return SearchResult(
        path=ReflectionPath(tuple(seq)),
        beams=assignment,
        achieved_gain=achieved,
        measurements_used=measurements,
        iterations=rounds,
        objective_trace=tuple(trace),
    )


def best_route_by_search(
    channels: ChannelSet,
    graph: LoSGraph,
    codebooks: CodebookSet,
    search: str,
    max_hops: int | None = None,
    counter: MeasurementCounter | None = None,
    cap: int = DEFAULT_EXHAUSTIVE_CAP,
    max_rounds: int = 10,
) -> SearchResult | None:
    """Run one baseline over every feasible path and keep the best result.

    Ties on achieved gain keep the lexicographically first path.  Returns
    None when no path reaches the user.
    """
    paths = enumerate_paths(graph, max_hops)
    best = None
    for path in paths:
        if search == "exhaustive":
            result = exhaustive_beam_search(channels, path, codebooks, counter, cap)
        elif search == "sequential":
            result = sequential_beam_search(channels, path, codebooks, counter, max_rounds)
        else:
            raise ValueError(f"unknown search strategy {search!r}")
        if best is None or result.achieved_gain > best.achieved_gain:
            best = result
    return best
