"""Distributed codebook-based beam training.

The protocol has three stages, each writing rows into beam-routing tables
(BRTs):

1. *Active* training: the BS sweeps its codebook once; every directly
   connected node records the best transmit beam and its received power.
2. *Offline passive* training: for every surface j and every (predecessor i,
   successor r) pair around it -- excluding the user -- the controller at i
   transmits while j sweeps reflection beams, horizontal axis first with the
   vertical beam parked, then vertical with the horizontal winner frozen.
   One extra calibration slot per triple measures the direct i->r leak with
   the surface off so it can be subtracted.
3. *Online* passive training: the same procedure for triples whose receiver
   is the user, run once the user's location (and hence its links) is known.

All measurements are power-only and, by default, noise-free, which makes
every stored gain exactly reproducible by replaying its beam indices.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .channels import ChannelSet, _complex_scatter, _STREAM_NOISE
from .codebooks import Codebook, CodebookSet
from .geometry import LoSGraph


class MissingEntryError(LookupError):
    """A routing computation referenced a table row that was never trained."""


@dataclass
class MeasurementCounter:
    """Tally of protocol cost, in beam transmissions / RSS measurements."""

    bs_training_transmissions: int = 0
    passive_offline_measurements: int = 0
    passive_online_measurements: int = 0
    sequential_measurements: int = 0
    exhaustive_measurements: int = 0

    def training_total(self) -> int:
        return (
            self.bs_training_transmissions
            + self.passive_offline_measurements
            + self.passive_online_measurements
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class BsBrtRow:
    beam_index: int  # 1-based into the BS codebook
    gain: float


@dataclass
class BsBrt:
    """BS-side table: next node -> (best transmit beam, received power)."""

    rows: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BrtRow:
    h_index: int  # 1-based horizontal beam
    v_index: int  # 1-based vertical beam
    gain: float   # direct-leak-free cascaded power for this triple


@dataclass
class IrsBrt:
    """Per-surface table: (previous node, next node) -> best reflection beam."""

    owner: int
    rows: dict = field(default_factory=dict)


def measure_cascade_rss(
    channels: ChannelSet,
    tx: int,
    irs: int,
    rx: int,
    irs_beam: np.ndarray,
    tx_beam: np.ndarray | None = None,
    cancel_direct: bool = False,
    noise_rng: np.random.Generator | None = None,
    snapshots: int = 1,
) -> float:
    """Received power at ``rx`` when ``tx`` sends via reflecting surface ``irs``.

    ``tx = 0`` transmits the given BS beam; a surface controller transmits
    from its reference element.  With ``cancel_direct`` the direct tx->rx
    leak is removed (the separately counted surface-off calibration makes it
    known exactly in the noise-free model; with noise enabled the cascade
    measurement itself is still perturbed).  Powers are normalised to unit
    transmit power.
    """
    graph = channels.graph
    scene = channels.scene
    if not scene.is_irs(irs):
        raise ValueError(f"node {irs} is not a reflecting surface")
    if not graph.has_edge(tx, irs):
        raise ValueError(f"no usable link ({tx}, {irs})")
    if not graph.has_edge(irs, rx):
        raise ValueError(f"no usable link ({irs}, {rx})")
    irs_beam = np.asarray(irs_beam, dtype=complex)
    if irs_beam.shape != (scene.irs(irs).element_count,):
        raise ValueError(f"reflection beam length does not match IRS {irs}")

    if tx == 0:
        if tx_beam is None:
            raise ValueError("transmissions from the BS need a beam")
        tx_beam = np.asarray(tx_beam, dtype=complex)
        if tx_beam.shape != (scene.bs_antenna_count,):
            raise ValueError("BS beam length does not match the antenna count")
        incoming = channels.bs_to_irs[irs] @ tx_beam
        if rx == graph.user_node:
            direct = complex(channels.bs_to_user @ tx_beam)
        else:
            direct = complex(channels.bs_to_irs[rx][0, :] @ tx_beam)
    else:
        if tx_beam is not None:
            raise ValueError("controller transmissions are single-element; drop the beam")
        incoming = channels.irs_to_irs[(tx, irs)][:, 0]
        direct = channels.direct_scalars[(tx, rx)]

    if rx == graph.user_node:
        outgoing = channels.irs_to_user[irs]
    else:
        outgoing = channels.irs_to_irs[(irs, rx)][0, :]

    amp = complex(outgoing @ (irs_beam * incoming))
    if not cancel_direct:
        amp = amp + direct

    noise_power = channels.config.noise_power
    if noise_rng is None or noise_power == 0.0:
        return abs(amp) ** 2
    if snapshots < 1:
        raise ValueError("need at least one snapshot")
    noise = np.sqrt(noise_power) * _complex_scatter(noise_rng, snapshots)
    return float(np.mean(np.abs(amp + noise) ** 2))


def active_beam_training(
    channels: ChannelSet,
    bs_codebook: Codebook,
    graph: LoSGraph,
    counter: MeasurementCounter | None = None,
    noise_rng: np.random.Generator | None = None,
) -> BsBrt:
    """One BS codebook sweep, observed by every directly connected node.

    The sweep costs exactly ``bs_codebook.size`` transmissions no matter how
    many listeners there are; each listener keeps its own argmax (ties go to
    the lowest beam index).
    """
    listeners = graph.bs_successors
    if listeners and counter is not None:
        counter.bs_training_transmissions += bs_codebook.size
    rows = {}
    noise_power = channels.config.noise_power
    for j in listeners:
        if j == graph.user_node:
            row = channels.bs_to_user
        else:
            row = channels.bs_to_irs[j][0, :]
        amps = bs_codebook.entries @ row
        if noise_rng is not None and noise_power > 0.0:
            amps = amps + np.sqrt(noise_power) * _complex_scatter(noise_rng, amps.shape)
        rss = np.abs(amps) ** 2
        best = int(np.argmax(rss))
        rows[j] = BsBrtRow(beam_index=best + 1, gain=float(rss[best]))
    return BsBrt(rows=rows)


def decoupled_hv_search(
    rss_fn,
    h_codebook: Codebook,
    v_codebook: Codebook,
    counter: MeasurementCounter | None = None,
    online: bool = False,
) -> tuple[int, int, float]:
    """Axis-decoupled beam sweep.

    Sweeps the horizontal codebook with the vertical beam parked at index 1,
    freezes the horizontal winner, then sweeps the vertical codebook --
    ``h_codebook.size + v_codebook.size`` calls to ``rss_fn(h, v)`` in total
    (1-based indices, ties to the lowest index).  Returns the winning pair
    and the power measured for it.
    """
    best_h, best_gain = 1, -np.inf
    for h in range(1, h_codebook.size + 1):
        gain = rss_fn(h, 1)
        if gain > best_gain:
            best_h, best_gain = h, gain
    best_v, best_gain = 1, -np.inf
    for v in range(1, v_codebook.size + 1):
        gain = rss_fn(best_h, v)
        if gain > best_gain:
            best_v, best_gain = v, gain
    if counter is not None:
        n = h_codebook.size + v_codebook.size
        if online:
            counter.passive_online_measurements += n
        else:
            counter.passive_offline_measurements += n
    return best_h, best_v, float(best_gain)


def _bs_beam_for(codebooks: CodebookSet, bs_brt: BsBrt, j: int) -> np.ndarray:
    row = bs_brt.rows.get(j)
    if row is None:
        raise MissingEntryError(f"BS table has no row for surface {j}; run active training first")
    return codebooks.bs.entry(row.beam_index)


def _train_triple(
    channels: ChannelSet,
    codebooks: CodebookSet,
    bs_brt: BsBrt,
    i: int,
    j: int,
    r: int,
    counter: MeasurementCounter | None,
    online: bool,
    noise_rng,
) -> BrtRow:
    # One surface-off slot calibrates the direct i->r leak for subtraction.
    if counter is not None:
        if online:
            counter.passive_online_measurements += 1
        else:
            counter.passive_offline_measurements += 1
    tx_beam = _bs_beam_for(codebooks, bs_brt, j) if i == 0 else None

    def rss(h: int, v: int) -> float:
        return measure_cascade_rss(
            channels,
            i,
            j,
            r,
            codebooks.compose(j, h, v),
            tx_beam=tx_beam,
            cancel_direct=True,
            noise_rng=noise_rng,
        )

    h_cb, v_cb = codebooks.for_irs(j)
    best_h, best_v, gain = decoupled_hv_search(rss, h_cb, v_cb, counter, online=online)
    return BrtRow(h_index=best_h, v_index=best_v, gain=gain)


def passive_beam_training_offline(
    channels: ChannelSet,
    graph: LoSGraph,
    codebooks: CodebookSet,
    bs_brt: BsBrt,
    counter: MeasurementCounter | None = None,
    noise_rng: np.random.Generator | None = None,
) -> dict:
    """Train every user-independent triple; returns {surface id: IrsBrt}.

    Surfaces with no predecessors or no non-user successors simply end up
    with empty tables.
    """
    user = graph.user_node
    result = {}
    for j in range(1, graph.irs_count + 1):
        rows = {}
        successors = [r for r in graph.successors(j) if r != user]
        for i in graph.predecessors(j):
            for r in successors:
                rows[(i, r)] = _train_triple(
                    channels, codebooks, bs_brt, i, j, r, counter, online=False, noise_rng=noise_rng
                )
        result[j] = IrsBrt(owner=j, rows=rows)
    return result


def passive_beam_training_online(
    channels: ChannelSet,
    graph: LoSGraph,
    codebooks: CodebookSet,
    bs_brt: BsBrt,
    user: int,
    counter: MeasurementCounter | None = None,
    noise_rng: np.random.Generator | None = None,
) -> dict:
    """Train the user-terminated triples once the user's links are known.

    Returns {surface id: {(predecessor, user): BrtRow}} for the surfaces
    that can reach the user; merge into the offline tables with
    :func:`merge_brt_rows`.
    """
    if user != graph.user_node:
        raise ValueError(f"node {user} is not the user of this graph")
    result = {}
    for j in graph.predecessors(user):
        if j == 0:  # the direct link involves no reflection training
            continue
        rows = {}
        for i in graph.predecessors(j):
            rows[(i, user)] = _train_triple(
                channels, codebooks, bs_brt, i, j, user, counter, online=True, noise_rng=noise_rng
            )
        result[j] = rows
    return result


def merge_brt_rows(irs_brts: dict, online_rows: dict) -> dict:
    """Fold online user rows into the per-surface tables (in place)."""
    for j, rows in online_rows.items():
        if j not in irs_brts:
            irs_brts[j] = IrsBrt(owner=j, rows={})
        irs_brts[j].rows.update(rows)
    return irs_brts


@dataclass
class TrainingResult:
    bs_brt: BsBrt
    irs_brts: dict
    counter: MeasurementCounter


def run_distributed_training(
    channels: ChannelSet,
    codebooks: CodebookSet,
    counter: MeasurementCounter | None = None,
    noise_rng: np.random.Generator | None = None,
) -> TrainingResult:
    """Active sweep, offline triples, then online triples, tables merged."""
    if counter is None:
        counter = MeasurementCounter()
    graph = channels.graph
    bs_brt = active_beam_training(channels, codebooks.bs, graph, counter, noise_rng)
    irs_brts = passive_beam_training_offline(channels, graph, codebooks, bs_brt, counter, noise_rng)
    online = passive_beam_training_online(
        channels, graph, codebooks, bs_brt, graph.user_node, counter, noise_rng
    )
    merge_brt_rows(irs_brts, online)
    return TrainingResult(bs_brt=bs_brt, irs_brts=irs_brts, counter=counter)


def training_noise_rng(channels: ChannelSet) -> np.random.Generator:
    """Deterministic noise stream tied to the channel set's seed/realization."""
    cfg = channels.config
    return np.random.default_rng([cfg.rng_seed, _STREAM_NOISE, channels.realization])


# ---------------------------------------------------------------------------
# table import/export
# ---------------------------------------------------------------------------


def dump_brts(bs_brt: BsBrt, irs_brts: dict) -> str:
    """Render all tables as plain text (node ids, beam indices, linear gains).

    Floats use ``repr`` so a round-trip through :func:`load_brts` is exact.
    """
    lines = ["[bs]", "next beam gain"]
    for j in sorted(bs_brt.rows):
        row = bs_brt.rows[j]
        lines.append(f"{j} {row.beam_index} {row.gain!r}")
    for j in sorted(irs_brts):
        brt = irs_brts[j]
        lines.append("")
        lines.append(f"[irs {j}]")
        lines.append("prev next h v gain")
        for (i, r) in sorted(brt.rows):
            row = brt.rows[(i, r)]
            lines.append(f"{i} {r} {row.h_index} {row.v_index} {row.gain!r}")
    return "\n".join(lines) + "\n"


def load_brts(text: str) -> tuple[BsBrt, dict]:
    """Parse the output of :func:`dump_brts`."""
    bs_rows: dict = {}
    irs_brts: dict = {}
    section = None
    expect_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            if line == "[bs]":
                section = ("bs",)
            elif line.startswith("[irs ") and line.endswith("]"):
                owner = int(line[5:-1])
                irs_brts[owner] = IrsBrt(owner=owner, rows={})
                section = ("irs", owner)
            else:
                raise ValueError(f"line {lineno}: unknown section {line!r}")
            expect_header = True
            continue
        if section is None:
            raise ValueError(f"line {lineno}: data before any section header")
        if expect_header:
            expected = "next beam gain" if section[0] == "bs" else "prev next h v gain"
            if line != expected:
                raise ValueError(f"line {lineno}: expected column header {expected!r}")
            expect_header = False
            continue
        parts = line.split()
        if section[0] == "bs":
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: BS rows have 3 columns")
            bs_rows[int(parts[0])] = BsBrtRow(beam_index=int(parts[1]), gain=float(parts[2]))
        else:
            if len(parts) != 5:
                raise ValueError(f"line {lineno}: surface rows have 5 columns")
            key = (int(parts[0]), int(parts[1]))
            irs_brts[section[1]].rows[key] = BrtRow(
                h_index=int(parts[2]), v_index=int(parts[3]), gain=float(parts[4])
            )
    return BsBrt(rows=bs_rows), irs_brts
