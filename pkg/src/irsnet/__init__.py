"""Link-level simulator and beam optimizer for multi-surface reflective relaying.

The pipeline, bottom to top: :mod:`irsnet.geometry` builds scenes and the
line-of-sight reachability graph, :mod:`irsnet.channels` draws fading
realizations over it, :mod:`irsnet.training` runs the codebook-based
training protocol and fills the beam tables, :mod:`irsnet.routing` picks
the best reflection path from those tables, :mod:`irsnet.baselines`
provides exhaustive and coordinate-ascent references, and
:mod:`irsnet.experiment` wraps everything into seeded Monte-Carlo sweeps.
"""

from .baselines import (
    BudgetExceededError,
    SearchResult,
    best_route_by_search,
    exhaustive_beam_search,
    sequential_beam_search,
)
from .channels import (
    BeamAssignment,
    ChannelConfig,
    ChannelSet,
    MissingChannelError,
    cascaded_channel,
    cascaded_gain,
    db_to_linear,
    declare_los,
    linear_to_db,
    measure_link_gain,
    overall_channel,
    overall_gain,
    synthesize_channels,
)
from .codebooks import Codebook, CodebookSet, build_codebooks, compose_3d_beam, dft_codebook
from .experiment import (
    ExperimentConfig,
    ResultRow,
    SummaryRow,
    load_experiment_config,
    rows_to_csv,
    run_experiment,
    summarize,
    with_panel_size,
    write_csv,
)
from .geometry import (
    IrsDescriptor,
    LoSGraph,
    Scene,
    SceneFormatError,
    build_los_graph,
    effective_reflection,
    half_space_visible,
    load_scene,
    save_scene,
)
from .presets import PRESET_NAMES, preset_scenario
from .routing import (
    ReflectionPath,
    RouteResult,
    assignment_from_brts,
    enumerate_paths,
    estimate_path_gain,
    optimal_route,
)
from .training import (
    BrtRow,
    BsBrt,
    BsBrtRow,
    IrsBrt,
    MeasurementCounter,
    MissingEntryError,
    TrainingResult,
    active_beam_training,
    decoupled_hv_search,
    dump_brts,
    load_brts,
    measure_cascade_rss,
    passive_beam_training_offline,
    passive_beam_training_online,
    run_distributed_training,
)

__version__ = "0.1.0"

__all__ = [
    "BeamAssignment",
    "BrtRow",
    "BsBrt",
    "BsBrtRow",
    "BudgetExceededError",
    "ChannelConfig",
    "ChannelSet",
    "Codebook",
    "CodebookSet",
    "ExperimentConfig",
    "IrsBrt",
    "IrsDescriptor",
    "LoSGraph",
    "MeasurementCounter",
    "MissingChannelError",
    "MissingEntryError",
    "PRESET_NAMES",
    "ReflectionPath",
    "ResultRow",
    "RouteResult",
    "Scene",
    "SceneFormatError",
    "SearchResult",
    "SummaryRow",
    "TrainingResult",
    "active_beam_training",
    "assignment_from_brts",
    "best_route_by_search",
    "build_codebooks",
    "build_los_graph",
    "cascaded_channel",
    "cascaded_gain",
    "compose_3d_beam",
    "db_to_linear",
    "declare_los",
    "decoupled_hv_search",
    "dft_codebook",
    "dump_brts",
    "effective_reflection",
    "enumerate_paths",
    "estimate_path_gain",
    "exhaustive_beam_search",
    "half_space_visible",
    "linear_to_db",
    "load_brts",
    "load_experiment_config",
    "load_scene",
    "measure_cascade_rss",
    "measure_link_gain",
    "optimal_route",
    "overall_channel",
    "overall_gain",
    "passive_beam_training_offline",
    "passive_beam_training_online",
    "preset_scenario",
    "rows_to_csv",
    "run_distributed_training",
    "run_experiment",
    "save_scene",
    "sequential_beam_search",
    "summarize",
    "with_panel_size",
    "synthesize_channels",
    "write_csv",
]
