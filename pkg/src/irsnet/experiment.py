"""Monte-Carlo experiment harness.

One experiment sweeps a single variable (panel size ``m0``, Rician factor
``rician_k`` or ``user_location``) and, for every (value, realization) pair,
redraws all scattered channel components, retrains the tables from scratch
and runs the configured schemes on the very same channel set:

* ``distributed`` -- codebook training + table-driven routing; the chosen
  path's beams are then replayed on the true channels.
* ``sequential``  -- per-path coordinate ascent on the true channels, best
  path kept.
* ``exhaustive``  -- per-path full sweep on the true channels (budget
  permitting), best path kept.

Results land in deterministic CSV rows: rerunning the same configuration
reproduces the output byte for byte.
"""

import logging
from dataclasses import dataclass, field, replace

import yaml

from .baselines import DEFAULT_EXHAUSTIVE_CAP, best_route_by_search
from .channels import (
    ChannelConfig,
    linear_to_db,
    measure_link_gain,
    cascaded_gain,
    overall_gain,
    synthesize_channels,
)
from .codebooks import build_codebooks
from .geometry import IrsDescriptor, Scene, build_los_graph, load_scene
from .routing import optimal_route
from .training import MeasurementCounter, run_distributed_training

log = logging.getLogger("irsnet")

SWEEP_VARIABLES = ("m0", "rician_k", "user_location")
SCHEMES = ("distributed", "sequential", "exhaustive")

CSV_COLUMNS = (
    "sweep_variable",
    "sweep_value",
    "scheme",
    "realization",
    "feasible",
    "path",
    "cascaded_gain_db",
    "overall_gain_db",
    "estimated_gain_db",
    "measurements",
)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    scene: Scene
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    bs_codebook_size: int = 16
    irs_h_codebook_size: int = 32
    irs_v_codebook_size: int = 32
    realizations: int = 100
    sweep_variable: str = "m0"
    sweep_values: tuple = ()
    schemes: tuple = ("distributed", "sequential")
    max_hops: int | None = None
    user_index: int = 0
    master_seed: int = 0
    use_measured_q: bool = False
    q_snapshots: int = 10_000
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP
    sequential_max_rounds: int = 10
    output_path: str | None = None

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("at least one realization is required")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        self.sweep_values = tuple(self.sweep_values)
        if not self.sweep_values:
            raise ValueError("sweep_values must not be empty")
        if len(set(self.sweep_values)) != len(self.sweep_values):
            raise ValueError("sweep_values must be distinct")
        self.schemes = tuple(self.schemes)
        if not self.schemes or len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes must be a non-empty list without duplicates")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
        if not (0 <= self.user_index < len(self.scene.user_positions)):
            raise ValueError("user_index is outside the scene's user locations")
        if self.sweep_variable == "m0":
            if any(int(v) < 1 for v in self.sweep_values):
                raise ValueError("panel sizes must be positive")
            self.sweep_values = tuple(int(v) for v in self.sweep_values)
        if self.sweep_variable == "user_location":
            for v in self.sweep_values:
                if not (0 <= int(v) < len(self.scene.user_positions)):
                    raise ValueError(f"user location {v} does not exist in the scene")
            self.sweep_values = tuple(int(v) for v in self.sweep_values)
        if self.master_seed < 0:
            raise ValueError("master seed must be non-negative")
        if self.q_snapshots < 1:
            raise ValueError("q_snapshots must be positive")


@dataclass(frozen=True)
class ResultRow:
    sweep_variable: str
    sweep_value: object
    scheme: str
    realization: int
    feasible: bool
    path: tuple
    cascaded_gain_db: float | None
    overall_gain_db: float | None
    estimated_gain_db: float | None
    measurements: int


def with_panel_size(scene: Scene, m0: int) -> Scene:
    """The same scene with every surface rebuilt as an m0 x m0 panel."""
    irs_list = [
        IrsDescriptor(
            position=irs.position,
            pointing=irs.pointing,
            m1=m0,
            m2=m0,
            element_spacing=irs.element_spacing,
        )
        for irs in scene.irs_list
    ]
    return Scene(
        bs_position=scene.bs_position,
        bs_antenna_count=scene.bs_antenna_count,
        bs_array_axis=scene.bs_array_axis,
        bs_antenna_spacing=scene.bs_antenna_spacing,
        irs_list=irs_list,
        user_positions=scene.user_positions,
        blocked_pairs=scene.blocked_pairs,
        blocked_user_links=scene.blocked_user_links,
    )


def _db_or_none(gain: float) -> float | None:
    return float(linear_to_db(gain)) if gain > 0 else None


def run_experiment(config: ExperimentConfig) -> list:
    """Execute the full sweep; rows come back in (value, realization, scheme)
    order exactly as configured."""
    rows = []
    for value in config.sweep_values:
        scene = config.scene
        channel = replace(config.channel, rng_seed=config.master_seed)
        user_index = config.user_index
        if config.sweep_variable == "m0":
            scene = with_panel_size(scene, value)
        elif config.sweep_variable == "rician_k":
            channel = replace(channel, rician_factor_db=float(value))
        else:
            user_index = int(value)

        graph = build_los_graph(scene, user_index)
        codebooks = build_codebooks(
            scene, config.bs_codebook_size, config.irs_h_codebook_size, config.irs_v_codebook_size
        )
        log.info(
            "sweep %s=%s: %d edges, %d realizations",
            config.sweep_variable,
            value,
            len(graph.edges),
            config.realizations,
        )

        for realization in range(config.realizations):
            channels = synthesize_channels(scene, graph, channel, realization)
            if config.use_measured_q:
                q_gains = {
                    edge: measure_link_gain(channels, edge[0], edge[1], config.q_snapshots)
                    for edge in sorted(graph.edges)
                }
            else:
                q_gains = channels.q_gains

            for scheme in config.schemes:
                counter = MeasurementCounter()
                if scheme == "distributed":
                    training = run_distributed_training(channels, codebooks, counter)
                    route = optimal_route(
                        graph, training.bs_brt, training.irs_brts, q_gains, config.max_hops
                    )
                    measurements = counter.training_total()
                    if route is None:
                        rows.append(_infeasible_row(config, value, scheme, realization, measurements))
                        continue
                    path = route.path
                    beams = route.beam_assignment
                    estimated = _db_or_none(route.estimated_gain)
                else:
                    result = best_route_by_search(
                        channels,
                        graph,
                        codebooks,
                        scheme,
                        max_hops=config.max_hops,
                        counter=counter,
                        cap=config.exhaustive_cap,
                        max_rounds=config.sequential_max_rounds,
                    )
                    measurements = (
                        counter.exhaustive_measurements
                        if scheme == "exhaustive"
                        else counter.sequential_measurements
                    )
                    if result is None:
                        rows.append(_infeasible_row(config, value, scheme, realization, measurements))
                        continue
                    path = result.path
                    beams = result.beams
                    estimated = None

                rows.append(
                    ResultRow(
                        sweep_variable=config.sweep_variable,
                        sweep_value=value,
                        scheme=scheme,
                        realization=realization,
                        feasible=True,
                        path=path.irs_sequence,
                        cascaded_gain_db=_db_or_none(cascaded_gain(channels, path, beams, codebooks)),
                        overall_gain_db=_db_or_none(overall_gain(channels, path, beams, codebooks)),
                        estimated_gain_db=estimated,
                        measurements=measurements,
                    )
                )
    return rows


def _infeasible_row(config, value, scheme, realization, measurements) -> ResultRow:
    return ResultRow(
        sweep_variable=config.sweep_variable,
        sweep_value=value,
        scheme=scheme,
        realization=realization,
        feasible=False,
        path=(),
        cascaded_gain_db=None,
        overall_gain_db=None,
        estimated_gain_db=None,
        measurements=measurements,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise TypeError("sweep values cannot be booleans")
    if isinstance(value, int):
        return str(value)
    return f"{float(value):g}"


def _format_db(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def rows_to_csv(rows) -> str:
    """Deterministic text rendering: fixed column order, gains at 4 decimals."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                (
                    row.sweep_variable,
                    _format_value(row.sweep_value),
                    row.scheme,
                    str(row.realization),
                    "1" if row.feasible else "0",
                    "-".join(str(a) for a in row.path),
                    _format_db(row.cascaded_gain_db),
                    _format_db(row.overall_gain_db),
                    _format_db(row.estimated_gain_db),
                    str(row.measurements),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv(rows))


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    sweep_variable: str
    sweep_value: object
    scheme: str
    rows_total: int
    infeasible_rate: float
    mean_cascaded_db: float | None
    median_cascaded_db: float | None
    mean_overall_db: float | None
    mean_measurements: float


def _mean_db(dbs: list) -> float | None:
    """dB of the mean linear gain (not the mean of dB values)."""
    if not dbs:
        return None
    linear = [10.0 ** (db / 10.0) for db in dbs]
    return float(linear_to_db(sum(linear) / len(linear)))


def _median_db(dbs: list) -> float | None:
    if not dbs:
        return None
    ordered = sorted(dbs)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def summarize(rows) -> list:
    """Aggregate rows per (sweep value, scheme), in first-appearance order."""
    if not rows:
        raise ValueError("nothing to summarize")
    groups: dict = {}
    order = []
    for row in rows:
        key = (row.sweep_value, row.scheme)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    summary = []
    for key in order:
        bucket = groups[key]
        feasible = [r for r in bucket if r.feasible]
        summary.append(
            SummaryRow(
                sweep_variable=bucket[0].sweep_variable,
                sweep_value=key[0],
                scheme=key[1],
                rows_total=len(bucket),
                infeasible_rate=1.0 - len(feasible) / len(bucket),
                mean_cascaded_db=_mean_db([r.cascaded_gain_db for r in feasible if r.cascaded_gain_db is not None]),
                median_cascaded_db=_median_db([r.cascaded_gain_db for r in feasible if r.cascaded_gain_db is not None]),
                mean_overall_db=_mean_db([r.overall_gain_db for r in feasible if r.overall_gain_db is not None]),
                mean_measurements=sum(r.measurements for r in bucket) / len(bucket),
            )
        )
    return summary


def format_summary(summary) -> str:
    header = f"{'value':>10} {'scheme':>12} {'n':>5} {'infeas':>7} {'mean dB':>10} {'median dB':>10} {'meas':>12}"
    lines = [header]
    for s in summary:
        mean = "-" if s.mean_cascaded_db is None else f"{s.mean_cascaded_db:.2f}"
        median = "-" if s.median_cascaded_db is None else f"{s.median_cascaded_db:.2f}"
        lines.append(
            f"{s.sweep_value!s:>10} {s.scheme:>12} {s.rows_total:>5} {s.infeasible_rate:>7.2f} "
            f"{mean:>10} {median:>10} {s.mean_measurements:>12.1f}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "preset",
    "scene",
    "channel",
    "codebooks",
    "realizations",
    "sweep",
    "schemes",
    "max_hops",
    "user_index",
    "seed",
    "use_measured_q",
    "q_snapshots",
    "exhaustive_cap",
    "sequential_max_rounds",
    "output",
}
_CHANNEL_KEYS = {
    "carrier_frequency",
    "rician_factor_db",
    "los_pathloss_exponent",
    "nlos_pathloss_exponent",
    "reference_distance",
    "los_gain_threshold",
    "los_only",
    "noise_floor_dbm",
}


def experiment_config_from_dict(data: dict) -> ExperimentConfig:
    """Build a configuration from a parsed experiment file.

    Either ``preset`` (a name) or ``scene`` (a scene-file path) must be
    given; all other keys override the preset's or built-in defaults.
    Unknown keys are rejected.
    """
    if not isinstance(data, dict):
        raise ValueError("experiment configuration must be a mapping")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown configuration key(s) {sorted(unknown)}")
    if ("preset" in data) == ("scene" in data):
        raise ValueError("give exactly one of 'preset' or 'scene'")
    if "preset" in data:
        from .presets import preset_scenario

        scene, config = preset_scenario(data["preset"])
    else:
        scene = load_scene(data["scene"])
        config = ExperimentConfig(scene=scene, sweep_values=(scene.irs_list[0].m1 if scene.irs_list else 1,))

    channel_overrides = data.get("channel", {}) or {}
    if not isinstance(channel_overrides, dict):
        raise ValueError("'channel' must be a mapping")
    unknown = set(channel_overrides) - _CHANNEL_KEYS
    if unknown:
        raise ValueError(f"unknown channel key(s) {sorted(unknown)}")
    channel = replace(config.channel, **channel_overrides)

    codebooks = data.get("codebooks", {}) or {}
    if not isinstance(codebooks, dict) or set(codebooks) - {"bs", "irs_horizontal", "irs_vertical"}:
        raise ValueError("'codebooks' must map {bs, irs_horizontal, irs_vertical} to sizes")

    sweep = data.get("sweep")
    sweep_variable, sweep_values = config.sweep_variable, config.sweep_values
    if sweep is not None:
        if not isinstance(sweep, dict) or set(sweep) != {"variable", "values"}:
            raise ValueError("'sweep' must be {variable: ..., values: [...]}")
        sweep_variable = sweep["variable"]
        sweep_values = tuple(sweep["values"])

    return ExperimentConfig(
        scene=scene,
        channel=channel,
        bs_codebook_size=int(codebooks.get("bs", config.bs_codebook_size)),
        irs_h_codebook_size=int(codebooks.get("irs_horizontal", config.irs_h_codebook_size)),
        irs_v_codebook_size=int(codebooks.get("irs_vertical", config.irs_v_codebook_size)),
        realizations=int(data.get("realizations", config.realizations)),
        sweep_variable=sweep_variable,
        sweep_values=sweep_values,
        schemes=tuple(data.get("schemes", config.schemes)),
        max_hops=data.get("max_hops", config.max_hops),
        user_index=int(data.get("user_index", config.user_index)),
        master_seed=int(data.get("seed", config.master_seed)),
        use_measured_q=bool(data.get("use_measured_q", config.use_measured_q)),
        q_snapshots=int(data.get("q_snapshots", config.q_snapshots)),
        exhaustive_cap=int(data.get("exhaustive_cap", config.exhaustive_cap)),
        sequential_max_rounds=int(data.get("sequential_max_rounds", config.sequential_max_rounds)),
        output_path=data.get("output", config.output_path),
    )


def load_experiment_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return experiment_config_from_dict(yaml.safe_load(fh))
