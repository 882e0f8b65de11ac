"""Built-in scenarios.

``indoor-5`` is a 6.8 m x 4.8 m room with five wall-mounted surfaces placed
in a zig-zag down the room and a BS near one end.  Obstructions block the BS
from everything but the two nearest surfaces and block the direct BS-user
line, so coverage relies on multi-hop reflection.  The room is kept small on
purpose: hop distances of a few metres keep the reflected cascades well
above the residual scattered power, so the strongest cascaded link is also
the dominant term of the full channel.  Two user locations are defined:
location 0 deep in the room (reached via surfaces 4 and 5, routes of 2..5
hops) and location 1 halfway down (reached via surfaces 2 and 3, routes of
1..3 hops).  The expected connectivity is frozen below and
regression-tested, since all routing behaviour hangs off it.

``toy-chain`` (one forced 2-hop route) and ``toy-parallel`` (three routes of
1..2 hops) use 2x2 panels and size-2 codebooks so that even exhaustive
search is instant; they exist for correctness and dominance checks.
"""

from .channels import SPEED_OF_LIGHT, ChannelConfig
from .experiment import ExperimentConfig
from .geometry import IrsDescriptor, Scene

_WAVELENGTH_5GHZ = SPEED_OF_LIGHT / 5e9

# frozen expected connectivity of the indoor scenario (node 6 is the user)
INDOOR_EDGES_LOC0 = frozenset(
    {(0, 1), (0, 2), (1, 2), (1, 4), (2, 3), (2, 5), (3, 4), (4, 5), (4, 6), (5, 6)}
)
INDOOR_EDGES_LOC1 = frozenset(
    {(0, 1), (0, 2), (1, 2), (1, 4), (2, 3), (2, 5), (2, 6), (3, 4), (3, 6), (4, 5)}
)
TOY_CHAIN_EDGES = frozenset({(0, 1), (1, 2), (2, 3)})
TOY_PARALLEL_EDGES = frozenset({(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (3, 4)})

PRESET_NAMES = ("indoor-5", "toy-chain", "toy-parallel")


def _indoor_scene(m0: int = 20) -> Scene:
    quarter = _WAVELENGTH_5GHZ / 4.0
    return Scene(
        bs_position=[0.2, 2.4, 3.0],
        bs_antenna_count=16,
        bs_array_axis=[0.0, 1.0, 0.0],
        bs_antenna_spacing=_WAVELENGTH_5GHZ / 2.0,
        irs_list=[
            IrsDescriptor([1.2, 0.05, 2.5], [0.0, 1.0, 0.0], m0, m0, quarter),
            IrsDescriptor([2.0, 4.75, 2.5], [0.0, -1.0, 0.0], m0, m0, quarter),
            IrsDescriptor([3.2, 0.05, 2.5], [0.0, 1.0, 0.0], m0, m0, quarter),
            IrsDescriptor([4.4, 4.75, 2.5], [0.0, -1.0, 0.0], m0, m0, quarter),
            IrsDescriptor([5.6, 0.05, 2.5], [0.0, 1.0, 0.0], m0, m0, quarter),
        ],
        user_positions=[[6.8, 2.4, 1.5], [3.2, 2.4, 1.5]],
        blocked_pairs=frozenset({(0, 3), (0, 4), (0, 5), (0, 6)}),
        blocked_user_links={0: [1, 2, 3], 1: [1, 4, 5]},
    )


def _toy_chain_scene() -> Scene:
    quarter = _WAVELENGTH_5GHZ / 4.0
    return Scene(
        bs_position=[0.0, 0.0, 2.0],
        bs_antenna_count=2,
        bs_array_axis=[0.0, 1.0, 0.0],
        bs_antenna_spacing=_WAVELENGTH_5GHZ / 2.0,
        irs_list=[
            IrsDescriptor([3.0, 2.0, 2.0], [0.0, -1.0, 0.0], 2, 2, quarter),
            IrsDescriptor([6.0, -2.0, 2.0], [0.0, 1.0, 0.0], 2, 2, quarter),
        ],
        user_positions=[[9.0, 2.0, 1.5]],
        blocked_pairs=frozenset({(0, 2), (0, 3)}),
    )


def _toy_parallel_scene() -> Scene:
    quarter = _WAVELENGTH_5GHZ / 4.0
    return Scene(
        bs_position=[0.0, 0.0, 2.0],
        bs_antenna_count=2,
        bs_array_axis=[0.0, 1.0, 0.0],
        bs_antenna_spacing=_WAVELENGTH_5GHZ / 2.0,
        irs_list=[
            IrsDescriptor([4.0, 3.0, 2.0], [0.0, -1.0, 0.0], 2, 2, quarter),
            IrsDescriptor([4.0, -3.0, 2.0], [0.0, 1.0, 0.0], 2, 2, quarter),
            IrsDescriptor([6.0, -4.0, 2.0], [0.0, 1.0, 0.0], 2, 2, quarter),
        ],
        user_positions=[[8.0, 0.0, 1.5]],
        blocked_pairs=frozenset({(0, 3), (0, 4)}),
    )


def preset_scenario(name: str) -> tuple[Scene, ExperimentConfig]:
    """A ready-to-run (scene, configuration) pair by preset name."""
    channel = ChannelConfig(carrier_frequency=5e9, rician_factor_db=10.0)
    if name == "indoor-5":
        scene = _indoor_scene()
        config = ExperimentConfig(
            scene=scene,
            channel=channel,
            bs_codebook_size=16,
            irs_h_codebook_size=32,
            irs_v_codebook_size=32,
            realizations=100,
            sweep_variable="m0",
            sweep_values=(20,),
            schemes=("distributed", "sequential"),
        )
    elif name == "toy-chain":
        scene = _toy_chain_scene()
        config = ExperimentConfig(
            scene=scene,
            channel=channel,
            bs_codebook_size=2,
            irs_h_codebook_size=2,
            irs_v_codebook_size=2,
            realizations=20,
            sweep_variable="m0",
            sweep_values=(2,),
            schemes=("distributed", "sequential", "exhaustive"),
        )
    elif name == "toy-parallel":
        scene = _toy_parallel_scene()
        config = ExperimentConfig(
            scene=scene,
            channel=channel,
            bs_codebook_size=2,
            irs_h_codebook_size=2,
            irs_v_codebook_size=2,
            realizations=20,
            sweep_variable="m0",
            sweep_values=(2,),
            schemes=("distributed", "sequential", "exhaustive"),
        )
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return scene, config
