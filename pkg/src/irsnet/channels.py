"""Narrowband channel synthesis and end-to-end channel evaluation.

Every link between two nodes gets one complex matrix per realization:
links that appear in the LoS graph are Rician (a deterministic geometric
component plus scaled complex-Gaussian scatter), all other node pairs are
pure Rayleigh scatter with a steeper distance exponent.  Large-scale gains
follow a reference-distance power law anchored at the free-space gain.

All draws are keyed by (seed, realization, link), so regenerating a set --
or a single link -- is reproducible bit for bit and independent of
iteration order.
"""

from dataclasses import dataclass, field

import numpy as np

from .codebooks import CodebookSet
from .geometry import LoSGraph, Scene

SPEED_OF_LIGHT = 299_792_458.0

# rng stream tags, to keep independent purposes on disjoint seeds
_STREAM_SYNTH = 0
_STREAM_LINK_PROBE = 1
_STREAM_NOISE = 2


def linear_to_db(x) -> float:
    return 10.0 * np.log10(x)


def db_to_linear(x) -> float:
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


class MissingChannelError(LookupError):
    """A requested link matrix is not part of the synthesized set."""


@dataclass
class ChannelConfig:
    """Propagation and randomness parameters.

    ``los_only`` zeroes all scattered components: graph edges keep just
    their deterministic part and every other pair becomes an all-zero
    matrix.  ``noise_floor_dbm`` (relative to unit transmit power, i.e.
    0 dBm = 1e-3) optionally adds receiver noise to power measurements when
    the measuring function is also given an RNG.
    """

    carrier_frequency: float = 5e9
    rician_factor_db: float = 10.0
    los_pathloss_exponent: float = 2.0
    nlos_pathloss_exponent: float = 3.5
    reference_distance: float = 1.0
    los_gain_threshold: float = 1e-12
    rng_seed: int = 0
    los_only: bool = False
    noise_floor_dbm: float | None = None

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier frequency must be positive")
        if not self.reference_distance > 0:
            raise ValueError("reference distance must be positive")
        if self.los_pathloss_exponent < 0 or self.nlos_pathloss_exponent < 0:
            raise ValueError("pathloss exponents must be non-negative")
        if int(self.rng_seed) < 0:
            raise ValueError("rng seed must be non-negative")
        self.rng_seed = int(self.rng_seed)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def rician_factor_linear(self) -> float:
        return float(db_to_linear(self.rician_factor_db))

    @property
    def noise_power(self) -> float:
        """Linear noise power corresponding to the configured floor (0 if off)."""
        if self.noise_floor_dbm is None:
            return 0.0
        return 10.0 ** ((self.noise_floor_dbm - 30.0) / 10.0)


def path_gain(distance: float, exponent: float, config: ChannelConfig) -> float:
    """Average power gain of a link: free-space gain at the reference
    distance times (d / d_ref) ** -exponent."""
    if not distance > 0:
        raise ValueError("distance must be positive")
    beta0 = (config.wavelength / (4.0 * np.pi * config.reference_distance)) ** 2
    return float(beta0 * (distance / config.reference_distance) ** (-exponent))


def _node_offsets(scene: Scene, node: int) -> np.ndarray:
    """Element offsets (count, 3) of a node's array; single point for the user."""
    if node == 0:
        n = np.arange(scene.bs_antenna_count, dtype=float)[:, None]
        return n * scene.bs_antenna_spacing * scene.bs_array_axis
    if scene.is_irs(node):
        return scene.irs(node).element_offsets()
    if node == scene.user_node:
        return np.zeros((1, 3))
    raise ValueError(f"unknown node id {node}")


def steering_vectors(scene: Scene, i: int, j: int, wavelength: float, user_index: int = 0):
    """Unit-modulus array responses for the i -> j direction.

    Returns ``(departure, arrival)``: the response of node i's array toward
    node j and of node j's array back toward i.  The reference element of
    each array always gets phase zero, which is what lets single-element
    controller measurements compose exactly with full-array links.
    """
    p_i = scene.node_position(i, user_index)
    p_j = scene.node_position(j, user_index)
    direction = p_j - p_i
    dist = np.linalg.norm(direction)
    if dist < 1e-12:
        raise ValueError(f"nodes {i} and {j} coincide")
    direction = direction / dist
    k = 2.0 * np.pi / wavelength
    departure = np.exp(1j * k * (_node_offsets(scene, i) @ direction))
    arrival = np.exp(1j * k * (_node_offsets(scene, j) @ (-direction)))
    return departure, arrival


@dataclass(frozen=True)
class BeamAssignment:
    """Trained/selected beam choice for one reflection path.

    ``bs_beam_index`` is 1-based into the BS codebook; ``irs_beams`` maps an
    IRS node id to its 1-based (horizontal, vertical) pair.
    """

    bs_beam_index: int
    irs_beams: dict

    def __post_init__(self):
        if self.bs_beam_index < 1:
            raise ValueError("beam indices are 1-based")
        for j, (h, v) in self.irs_beams.items():
            if h < 1 or v < 1:
                raise ValueError(f"beam indices for IRS {j} are 1-based")


@dataclass
class ChannelSet:
    """All link matrices for one scene, user location and fading realization.

    Matrix layouts (receive elements x transmit elements):

    * ``bs_to_irs[j]``   -- (M_j, N) for every surface j
    * ``irs_to_irs[i,j]`` -- (M_j, M_i), one direction per pair, pointing
      away from the BS (the only direction a routed beam can use)
    * ``irs_to_user[j]`` -- length-M_j row (the user has one antenna)
    * ``bs_to_user``     -- length-N row
    * ``direct_scalars[i,j]`` -- reference-element to reference-element
      coefficient of the stored pair, used for calibration and link probing
    * ``q_gains[i,j]``   -- analytic average power gain for every graph edge
    """

    scene: Scene
    graph: LoSGraph
    config: ChannelConfig
    realization: int
    bs_to_irs: dict
    irs_to_irs: dict
    irs_to_user: dict
    bs_to_user: np.ndarray
    direct_scalars: dict
    q_gains: dict
    link_meta: dict = field(repr=False, default_factory=dict)

    @property
    def user_node(self) -> int:
        return self.graph.user_node

    def pair_matrix(self, i: int, j: int) -> np.ndarray:
        """Stored matrix for the pair (i, j) in its stored orientation."""
        if i == 0 and j == self.user_node:
            return self.bs_to_user.reshape(1, -1)
        if i == 0:
            if j in self.bs_to_irs:
                return self.bs_to_irs[j]
        elif j == self.user_node:
            if i in self.irs_to_user:
                return self.irs_to_user[i].reshape(1, -1)
        elif (i, j) in self.irs_to_irs:
            return self.irs_to_irs[(i, j)]
        raise MissingChannelError(f"no stored channel for link ({i}, {j})")


def _pair_order(scene: Scene, i: int, j: int, user_index: int) -> tuple[int, int]:
    """Storage orientation of an IRS pair: away from the BS, index as tie-break."""
    di = scene.distance(0, i, user_index)
    dj = scene.distance(0, j, user_index)
    if (di, i) <= (dj, j):
        return i, j
    return j, i


def _all_pairs(scene: Scene, user_index: int):
    """Deterministic list of every stored link (i, j) with its matrix shape."""
    user = scene.user_node
    pairs = []
    for j in range(1, scene.irs_count + 1):
        pairs.append((0, j))
    for i in range(1, scene.irs_count + 1):
        for j in range(i + 1, scene.irs_count + 1):
            pairs.append(_pair_order(scene, i, j, user_index))
    for j in range(1, scene.irs_count + 1):
        pairs.append((j, user))
    pairs.append((0, user))
    return pairs


def _complex_scatter(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize_channels(
    scene: Scene,
    graph: LoSGraph,
    config: ChannelConfig,
    realization: int = 0,
) -> ChannelSet:
    """Draw one fading realization of every link in the scene.

    The deterministic geometric components depend only on the scene; the
    scattered parts are redrawn per ``realization`` from per-link RNG
    streams seeded with (rng_seed, realization, i, j).
    """
    if realization < 0:
        raise ValueError("realization index must be non-negative")
    if graph.irs_count != scene.irs_count:
        raise ValueError("graph does not belong to this scene")
    user = scene.user_node
    user_index = graph.user_index
    k_lin = config.rician_factor_linear
    los_w = np.sqrt(k_lin / (k_lin + 1.0))
    nlos_w = np.sqrt(1.0 / (k_lin + 1.0))

    bs_to_irs: dict = {}
    irs_to_irs: dict = {}
    irs_to_user: dict = {}
    bs_to_user = None
    direct_scalars: dict = {}
    q_gains: dict = {}
    link_meta: dict = {}

    for (i, j) in _all_pairs(scene, user_index):
        is_los = graph.has_edge(i, j)
        dist = scene.distance(i, j, user_index)
        exponent = config.los_pathloss_exponent if is_los else config.nlos_pathloss_exponent
        gain = path_gain(dist, exponent, config)
        amp = np.sqrt(gain)
        rx = 1 if j == user else scene.irs(j).element_count
        tx = scene.bs_antenna_count if i == 0 else scene.irs(i).element_count

        if is_los:
            departure, arrival = steering_vectors(scene, i, j, config.wavelength, user_index)
            los_part = np.outer(arrival, np.conj(departure))
            if config.los_only:
                matrix = amp * los_part
            else:
                rng = np.random.default_rng([config.rng_seed, _STREAM_SYNTH, realization, i, j])
                matrix = amp * (los_w * los_part + nlos_w * _complex_scatter(rng, (rx, tx)))
        else:
            if config.los_only:
                matrix = np.zeros((rx, tx), dtype=complex)
            else:
                rng = np.random.default_rng([config.rng_seed, _STREAM_SYNTH, realization, i, j])
                matrix = amp * _complex_scatter(rng, (rx, tx))

        if i == 0 and j == user:
            bs_to_user = matrix[0]
        elif i == 0:
            bs_to_irs[j] = matrix
        elif j == user:
            irs_to_user[i] = matrix[0]
        else:
            irs_to_irs[(i, j)] = matrix
        direct_scalars[(i, j)] = complex(matrix[0, 0])
        link_meta[(i, j)] = (gain, is_los)

    for (i, j) in sorted(graph.edges):
        dist = scene.distance(i, j, user_index)
        q_gains[(i, j)] = path_gain(dist, config.los_pathloss_exponent, config)

    return ChannelSet(
        scene=scene,
        graph=graph,
        config=config,
        realization=realization,
        bs_to_irs=bs_to_irs,
        irs_to_irs=irs_to_irs,
        irs_to_user=irs_to_user,
        bs_to_user=bs_to_user,
        direct_scalars=direct_scalars,
        q_gains=q_gains,
        link_meta=link_meta,
    )


def _validate_path(channels: ChannelSet, path) -> list[int]:
    seq = [int(a) for a in getattr(path, "irs_sequence", path)]
    if not seq:
        raise ValueError("a reflection path needs at least one IRS")
    if len(set(seq)) != len(seq):
        raise ValueError("a reflection path cannot revisit a surface")
    graph = channels.graph
    for a in seq:
        if not channels.scene.is_irs(a):
            raise ValueError(f"path node {a} is not a reflecting surface")
    chain = [0] + seq + [graph.user_node]
    for a, b in zip(chain, chain[1:]):
        if not graph.has_edge(a, b):
            raise ValueError(f"path uses missing link ({a}, {b})")
    return seq


def _beam_vectors(channels: ChannelSet, seq, beams: BeamAssignment, codebooks: CodebookSet):
    w = codebooks.bs.entry(beams.bs_beam_index)
    if w.shape[0] != channels.scene.bs_antenna_count:
        raise ValueError("BS codebook length does not match the antenna count")
    thetas = {}
    for a in seq:
        if a not in beams.irs_beams:
            raise ValueError(f"no beam assigned for IRS {a}")
        h, v = beams.irs_beams[a]
        theta = codebooks.compose(a, h, v)
        if theta.shape[0] != channels.scene.irs(a).element_count:
            raise ValueError(f"composed beam length does not match IRS {a}")
        thetas[a] = theta
    return w, thetas


def cascaded_channel(channels: ChannelSet, path, beams: BeamAssignment, codebooks: CodebookSet) -> complex:
    """End-to-end coefficient of the beamformed multi-hop path alone.

    Only the links of the path itself contribute; scattering via skipped
    surfaces is ignored (see :func:`overall_channel` for the full picture).
    """
    seq = _validate_path(channels, path)
    w, thetas = _beam_vectors(channels, seq, beams, codebooks)
    vec = channels.bs_to_irs[seq[0]] @ w
    for a, b in zip(seq, seq[1:]):
        vec = channels.irs_to_irs[(a, b)] @ (thetas[a] * vec)
    return complex(channels.irs_to_user[seq[-1]] @ (thetas[seq[-1]] * vec))


def overall_channel(channels: ChannelSet, path, beams: BeamAssignment, codebooks: CodebookSet) -> complex:
    """End-to-end coefficient including every forward sub-path.

    The active surfaces are those on the path; the signal may also skip any
    subset of them, travelling over the stored (generally scattered) link
    matrices between the remaining nodes, plus the direct BS-user link.
    Keeping the order fixed, that is a sum over 2^L ordered sub-chains; the
    full-chain term reproduces :func:`cascaded_channel` exactly.
    """
    seq = _validate_path(channels, path)
    w, thetas = _beam_vectors(channels, seq, beams, codebooks)
    user = channels.user_node
    total = 0.0 + 0.0j
    for mask in range(2 ** len(seq)):
        kept = [a for bit, a in enumerate(seq) if mask >> bit & 1]
        if not kept:
            total += channels.bs_to_user @ w
            continue
        vec = channels.pair_matrix(0, kept[0]) @ w
        for a, b in zip(kept, kept[1:]):
            vec = channels.pair_matrix(a, b) @ (thetas[a] * vec)
        total += complex(channels.pair_matrix(kept[-1], user)[0] @ (thetas[kept[-1]] * vec))
    return complex(total)


def cascaded_gain(channels: ChannelSet, path, beams: BeamAssignment, codebooks: CodebookSet) -> float:
    """Power gain of the beamformed path: |cascaded coefficient|^2."""
    return abs(cascaded_channel(channels, path, beams, codebooks)) ** 2


def overall_gain(channels: ChannelSet, path, beams: BeamAssignment, codebooks: CodebookSet) -> float:
    return abs(overall_channel(channels, path, beams, codebooks)) ** 2


def measure_link_gain(channels: ChannelSet, i: int, j: int, snapshots: int) -> float:
    """Average |reference-to-reference coefficient|^2 over fresh fading draws.

    The large-scale gain and the deterministic component are held fixed;
    only the scattered part is redrawn, so with many snapshots the estimate
    converges to the analytic average gain of the link.
    """
    if snapshots < 1:
        raise ValueError("need at least one snapshot")
    if (i, j) not in channels.link_meta:
        raise MissingChannelError(f"no stored channel for link ({i}, {j})")
    gain, is_los = channels.link_meta[(i, j)]
    cfg = channels.config
    amp = np.sqrt(gain)
    rng = np.random.default_rng([cfg.rng_seed, _STREAM_LINK_PROBE, i, j])
    scatter = _complex_scatter(rng, snapshots)
    if is_los:
        if cfg.los_only:
            samples = amp * np.ones(snapshots, dtype=complex)
        else:
            k_lin = cfg.rician_factor_linear
            # reference elements carry phase zero, so the LoS coefficient is 1
            samples = amp * (np.sqrt(k_lin / (k_lin + 1.0)) + np.sqrt(1.0 / (k_lin + 1.0)) * scatter)
    else:
        samples = np.zeros(snapshots, dtype=complex) if cfg.los_only else amp * scatter
    return float(np.mean(np.abs(samples) ** 2))


def declare_los(channels: ChannelSet, i: int, j: int, snapshots: int = 1000) -> bool:
    """Threshold test used to tell strong (LoS-grade) links from scatter."""
    return measure_link_gain(channels, i, j, snapshots) > channels.config.los_gain_threshold
