"""Deployment geometry and line-of-sight connectivity for reflecting-surface networks.

A scene holds one base station (node 0), J wall-mounted reflecting surfaces
(nodes 1..J) and a list of candidate user locations (the selected one is
node J+1).  From a scene we derive a directed acyclic graph whose edges are
the links that can actually carry a reflected beam: the straight-line path
must be unobstructed, the surfaces involved must face each other, and --
except for hops into the user -- the link must make forward progress away
from the base station.
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

_UP = np.array([0.0, 0.0, 1.0])


class SceneFormatError(ValueError):
    """Raised when a scene description file cannot be interpreted."""


@dataclass
class IrsDescriptor:
    """One reflecting surface.

    Parameters
    ----------
    position:
        3D coordinates (metres) of the reference element.  The surface
        controller sits at this point and transmits/receives through the
        reference element during training.
    pointing:
        Unit outward normal of the reflecting face.  Only nodes strictly in
        the open half-space on this side can be served.
    m1, m2:
        Element counts along the horizontal and vertical axes of the panel.
    element_spacing:
        Inter-element pitch in metres (same along both axes).
    """

    position: np.ndarray
    pointing: np.ndarray
    m1: int
    m2: int
    element_spacing: float

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.pointing = np.asarray(self.pointing, dtype=float)
        if self.position.shape != (3,) or not np.all(np.isfinite(self.position)):
            raise ValueError("IRS position must be a finite 3-vector")
        if self.pointing.shape != (3,):
            raise ValueError("IRS pointing must be a 3-vector")
        if abs(float(np.linalg.norm(self.pointing)) - 1.0) > 1e-9:
            raise ValueError("IRS pointing must be a unit vector")
        if int(self.m1) < 1 or int(self.m2) < 1:
            raise ValueError("element counts must be >= 1")
        self.m1 = int(self.m1)
        self.m2 = int(self.m2)
        if not self.element_spacing > 0:
            raise ValueError("element spacing must be positive")

    @property
    def element_count(self) -> int:
        return self.m1 * self.m2

    def local_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal (horizontal, vertical) axes spanning the panel plane.

        The horizontal axis is chosen parallel to the ground when possible;
        for a panel facing straight up or down an arbitrary but fixed
        fallback is used.
        """
        ref = _UP if abs(float(self.pointing @ _UP)) < 1.0 - 1e-9 else np.array([1.0, 0.0, 0.0])
        u_h = np.cross(ref, self.pointing)
        u_h = u_h / np.linalg.norm(u_h)
        u_v = np.cross(self.pointing, u_h)
        return u_h, u_v

    def element_offsets(self) -> np.ndarray:
        """(M, 3) offsets of every element from the reference element.

        Elements are flattened row-major with the horizontal index varying
        slower: element (i1, i2) lands at flat index i1 * m2 + i2.
        """
        u_h, u_v = self.local_axes()
        i1 = np.arange(self.m1, dtype=float)[:, None, None]
        i2 = np.arange(self.m2, dtype=float)[None, :, None]
        offsets = i1 * self.element_spacing * u_h + i2 * self.element_spacing * u_v
        return offsets.reshape(self.m1 * self.m2, 3)


def _normalize_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass
class Scene:
    """Static deployment: base station, reflecting surfaces, user locations.

    ``blocked_pairs`` lists unordered node-id pairs whose straight-line path
    is obstructed (everything else is assumed clear).  The user slot J+1 may
    appear in those pairs; obstructions that depend on where the user stands
    go in ``blocked_user_links`` instead, keyed by user-location index and
    listing the node ids that location cannot see.
    """

    bs_position: np.ndarray
    bs_antenna_count: int
    bs_array_axis: np.ndarray
    bs_antenna_spacing: float
    irs_list: list[IrsDescriptor]
    user_positions: list[np.ndarray]
    blocked_pairs: frozenset = frozenset()
    blocked_user_links: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bs_position = np.asarray(self.bs_position, dtype=float)
        self.bs_array_axis = np.asarray(self.bs_array_axis, dtype=float)
        if self.bs_position.shape != (3,):
            raise ValueError("BS position must be a 3-vector")
        if abs(float(np.linalg.norm(self.bs_array_axis)) - 1.0) > 1e-9:
            raise ValueError("BS array axis must be a unit vector")
        if int(self.bs_antenna_count) < 1:
            raise ValueError("BS antenna count must be >= 1")
        self.bs_antenna_count = int(self.bs_antenna_count)
        if not self.bs_antenna_spacing > 0:
            raise ValueError("BS antenna spacing must be positive")
        if not self.user_positions:
            raise ValueError("at least one user location is required")
        self.user_positions = [np.asarray(u, dtype=float) for u in self.user_positions]
        for u in self.user_positions:
            if u.shape != (3,):
                raise ValueError("user positions must be 3-vectors")

        user = self.user_node
        pairs = set()
        for i, j in self.blocked_pairs:
            i, j = int(i), int(j)
            if i == j or not (0 <= i <= user and 0 <= j <= user):
                raise ValueError(f"invalid blocked pair ({i}, {j})")
            pairs.add(_normalize_pair(i, j))
        self.blocked_pairs = frozenset(pairs)
        cleaned = {}
        for ui, nodes in self.blocked_user_links.items():
            ui = int(ui)
            if not (0 <= ui < len(self.user_positions)):
                raise ValueError(f"blocked_user_links refers to unknown user location {ui}")
            nodes = frozenset(int(n) for n in nodes)
            for n in nodes:
                if not (0 <= n <= self.irs_count):
                    raise ValueError(f"blocked_user_links refers to unknown node {n}")
            cleaned[ui] = nodes
        self.blocked_user_links = cleaned

        # Coincident nodes would make directions (and steering) undefined.
        anchors = [self.bs_position] + [irs.position for irs in self.irs_list]
        for ui, u in enumerate(self.user_positions):
            for p in anchors:
                if np.linalg.norm(u - p) < 1e-9:
                    raise ValueError(f"user location {ui} coincides with another node")
        for a in range(len(anchors)):
            for b in range(a + 1, len(anchors)):
                if np.linalg.norm(anchors[a] - anchors[b]) < 1e-9:
                    raise ValueError("two nodes share the same position")

    @property
    def irs_count(self) -> int:
        return len(self.irs_list)

    @property
    def user_node(self) -> int:
        """Node id of the user slot (always J+1)."""
        return self.irs_count + 1

    def is_irs(self, node: int) -> bool:
        return 1 <= node <= self.irs_count

    def irs(self, node: int) -> IrsDescriptor:
        if not self.is_irs(node):
            raise ValueError(f"node {node} is not a reflecting surface")
        return self.irs_list[node - 1]

    def node_position(self, node: int, user_index: int = 0) -> np.ndarray:
        if node == 0:
            return self.bs_position
        if self.is_irs(node):
            return self.irs_list[node - 1].position
        if node == self.user_node:
            if not (0 <= user_index < len(self.user_positions)):
                raise ValueError(f"unknown user location index {user_index}")
            return self.user_positions[user_index]
        raise ValueError(f"unknown node id {node}")

    def distance(self, i: int, j: int, user_index: int = 0) -> float:
        return float(np.linalg.norm(self.node_position(i, user_index) - self.node_position(j, user_index)))

    def has_los(self, i: int, j: int, user_index: int = 0) -> bool:
        """True when the straight-line path between two nodes is unobstructed."""
        if i == j:
            raise ValueError("LoS between a node and itself is undefined")
        # validate ids
        self.node_position(i, user_index)
        self.node_position(j, user_index)
        if _normalize_pair(i, j) in self.blocked_pairs:
            return False
        user = self.user_node
        if user in (i, j):
            other = i if j == user else j
            if other in self.blocked_user_links.get(user_index, frozenset()):
                return False
        return True


def half_space_visible(scene: Scene, irs_index: int, other: int, user_index: int = 0) -> bool:
    """Whether ``other`` lies strictly in front of the reflecting face of an IRS.

    Points exactly in the panel plane (zero dot product) do not count: a
    grazing ray cannot be reflected.
    """
    irs = scene.irs(irs_index)
    if other == irs_index:
        raise ValueError("an IRS cannot face itself")
    direction = scene.node_position(other, user_index) - irs.position
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        raise ValueError("coincident nodes have no facing direction")
    return float(irs.pointing @ direction) / norm > 0.0


def effective_reflection(scene: Scene, i: int, j: int, user_index: int = 0) -> bool:
    """Whether a reflected link between nodes i and j is geometrically possible.

    Two surfaces must each lie in the other's open front half-space; for a
    BS-surface or user-surface pair only the surface's half-space matters.
    Raises ValueError if neither node is a surface (there is nothing to
    reflect off).
    """
    if i == j:
        raise ValueError("a reflection link needs two distinct nodes")
    i_is_irs = scene.is_irs(i)
    j_is_irs = scene.is_irs(j)
    if i_is_irs and j_is_irs:
        return half_space_visible(scene, i, j, user_index) and half_space_visible(scene, j, i, user_index)
    if i_is_irs:
        return half_space_visible(scene, i, j, user_index)
    if j_is_irs:
        return half_space_visible(scene, j, i, user_index)
    raise ValueError(f"neither node {i} nor {j} is a reflecting surface")


@dataclass(frozen=True)
class LoSGraph:
    """Directed graph of usable links for one selected user location.

    Vertices are node ids 0..J+1.  Edges always point away from the base
    station (strictly increasing BS distance) except for edges into the user,
    which are exempt from the distance test.
    """

    irs_count: int
    user_index: int
    edges: frozenset
    bs_distances: tuple

    @property
    def user_node(self) -> int:
        return self.irs_count + 1

    @property
    def vertex_count(self) -> int:
        return self.irs_count + 2

    def successors(self, node: int) -> tuple:
        return tuple(sorted(j for (i, j) in self.edges if i == node))

    def predecessors(self, node: int) -> tuple:
        return tuple(sorted(i for (i, j) in self.edges if j == node))

    @property
    def bs_successors(self) -> tuple:
        """Nodes reachable directly from the base station."""
        return self.successors(0)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges


def build_los_graph(scene: Scene, user_index: int = 0) -> LoSGraph:
    """Derive the directed link graph for one user location.

    An edge (i, j) requires: unobstructed straight line, a geometrically
    effective reflection (except for the direct BS-user link, which only
    needs to be unobstructed), and d(0, j) > d(0, i) unless j is the user.
    The construction alone guarantees acyclicity: every edge increases the
    distance from the base station or terminates at the user sink.
    """
    user = scene.user_node
    dist = [0.0] + [scene.distance(0, j, user_index) for j in range(1, user)]
    edges = set()
    for i in range(0, user):  # the user is a pure sink
        for j in range(1, user + 1):  # the BS is a pure source
            if i == j:
                continue
            if i == 0 and j == user:
                usable = scene.has_los(0, user, user_index)
            else:
                usable = scene.has_los(i, j, user_index) and effective_reflection(scene, i, j, user_index)
            if not usable:
                continue
            if j != user and not dist[j] > dist[i]:
                continue
            edges.add((i, j))
    d_user = scene.distance(0, user, user_index)
    return LoSGraph(
        irs_count=scene.irs_count,
        user_index=user_index,
        edges=frozenset(edges),
        bs_distances=tuple(dist) + (d_user,),
    )


# ---------------------------------------------------------------------------
# scene description files
# ---------------------------------------------------------------------------

_TOP_KEYS = {"bs", "irs", "users", "blocked", "blocked_user_links"}
_BS_KEYS = {"position", "antennas", "array_axis", "antenna_spacing"}
_IRS_KEYS = {"position", "pointing", "m1", "m2", "spacing"}


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise SceneFormatError(f"unknown key(s) {sorted(unknown)} in {where}")


def scene_from_dict(data: dict) -> Scene:
    """Build a Scene from a parsed description; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise SceneFormatError("scene description must be a mapping")
    _reject_unknown(data, _TOP_KEYS, "scene")
    for key in ("bs", "irs", "users"):
        if key not in data:
            raise SceneFormatError(f"scene description is missing '{key}'")
    bs = data["bs"]
    if not isinstance(bs, dict):
        raise SceneFormatError("'bs' must be a mapping")
    _reject_unknown(bs, _BS_KEYS, "bs")
    for key in _BS_KEYS:
        if key not in bs:
            raise SceneFormatError(f"'bs' is missing '{key}'")
    irs_entries = data["irs"]
    if not isinstance(irs_entries, list):
        raise SceneFormatError("'irs' must be a list")
    irs_list = []
    for n, entry in enumerate(irs_entries):
        if not isinstance(entry, dict):
            raise SceneFormatError(f"irs[{n}] must be a mapping")
        _reject_unknown(entry, _IRS_KEYS, f"irs[{n}]")
        for key in _IRS_KEYS:
            if key not in entry:
                raise SceneFormatError(f"irs[{n}] is missing '{key}'")
        irs_list.append(
            IrsDescriptor(
                position=entry["position"],
                pointing=entry["pointing"],
                m1=entry["m1"],
                m2=entry["m2"],
                element_spacing=entry["spacing"],
            )
        )
    users = data["users"]
    if not isinstance(users, list) or not users:
        raise SceneFormatError("'users' must be a non-empty list of positions")
    blocked = data.get("blocked", []) or []
    if not isinstance(blocked, list):
        raise SceneFormatError("'blocked' must be a list of node-id pairs")
    pairs = set()
    for item in blocked:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise SceneFormatError(f"blocked entry {item!r} is not a pair")
        pairs.add((int(item[0]), int(item[1])))
    per_user = data.get("blocked_user_links", {}) or {}
    if not isinstance(per_user, dict):
        raise SceneFormatError("'blocked_user_links' must map location index -> node list")
    try:
        return Scene(
            bs_position=bs["position"],
            bs_antenna_count=bs["antennas"],
            bs_array_axis=bs["array_axis"],
            bs_antenna_spacing=bs["antenna_spacing"],
            irs_list=irs_list,
            user_positions=users,
            blocked_pairs=frozenset(pairs),
            blocked_user_links={int(k): list(v) for k, v in per_user.items()},
        )
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc


def scene_to_dict(scene: Scene) -> dict:
    """Inverse of :func:`scene_from_dict` (round-trips through YAML)."""
    out = {
        "bs": {
            "position": [float(x) for x in scene.bs_position],
            "antennas": scene.bs_antenna_count,
            "array_axis": [float(x) for x in scene.bs_array_axis],
            "antenna_spacing": float(scene.bs_antenna_spacing),
        },
        "irs": [
            {
                "position": [float(x) for x in irs.position],
                "pointing": [float(x) for x in irs.pointing],
                "m1": irs.m1,
                "m2": irs.m2,
                "spacing": float(irs.element_spacing),
            }
            for irs in scene.irs_list
        ],
        "users": [[float(x) for x in u] for u in scene.user_positions],
    }
    if scene.blocked_pairs:
        out["blocked"] = [list(p) for p in sorted(scene.blocked_pairs)]
    if scene.blocked_user_links:
        out["blocked_user_links"] = {k: sorted(v) for k, v in sorted(scene.blocked_user_links.items())}
    return out


def load_scene(path) -> Scene:
    """Read a YAML scene description from ``path``."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return scene_from_dict(data)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scene_to_dict(scene), fh, sort_keys=False)
