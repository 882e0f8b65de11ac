"""Phase-only beam codebooks.

Beams are plain phase ramps: no amplitude taper and no 1/sqrt(N)
normalisation, so the constant array-size factor shows up identically in
every measured and synthesised power.  Surface beams are stored per axis and
combined with a Kronecker product matching the row-major element layout of
:meth:`irsnet.geometry.IrsDescriptor.element_offsets`.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Scene


@dataclass(frozen=True)
class Codebook:
    """A finite set of phase-only beams, one per row of ``entries``."""

    entries: np.ndarray  # (size, entry_length) complex

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValueError("a codebook needs a (size, length) matrix of beams")
        if np.max(np.abs(np.abs(entries) - 1.0)) > 1e-12:
            raise ValueError("codebook entries must be unit-modulus (phase-only)")
        seen = set()
        for row in entries:
            key = row.tobytes()
            if key in seen:
                raise ValueError("codebook entries must be pairwise distinct")
            seen.add(key)
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def entry_length(self) -> int:
        return self.entries.shape[1]

    def entry(self, index: int) -> np.ndarray:
        """Beam number ``index`` (1-based, matching training-table indices)."""
        if not 1 <= index <= self.size:
            raise ValueError(f"beam index {index} outside 1..{self.size}")
        return self.entries[index - 1]


def dft_codebook(length: int, size: int) -> Codebook:
    """``size`` phase ramps over ``length`` elements: entry k, element m is
    exp(1j * 2 pi * k * m / size) for k, m counted from zero.  With
    size == length this is the usual DFT matrix."""
    if length < 1 or size < 1:
        raise ValueError("length and size must be >= 1")
    k = np.arange(size)[:, None]
    m = np.arange(length)[None, :]
    return Codebook(np.exp(2j * np.pi * k * m / size))


def compose_3d_beam(horizontal: np.ndarray, vertical: np.ndarray) -> np.ndarray:
    """Full-panel beam from per-axis beams.

    Element (i1, i2) of the panel receives phase h[i1] * v[i2]; the flat
    order (horizontal index varying slower) matches the element layout used
    for steering vectors.
    """
    horizontal = np.asarray(horizontal, dtype=complex)
    vertical = np.asarray(vertical, dtype=complex)
    if horizontal.ndim != 1 or vertical.ndim != 1:
        raise ValueError("per-axis beams must be 1-D")
    return np.kron(horizontal, vertical)


@dataclass(frozen=True)
class CodebookSet:
    """Beam codebooks for one scene: a BS codebook plus per-surface axis books."""

    bs: Codebook
    irs_horizontal: dict
    irs_vertical: dict

    def for_irs(self, j: int) -> tuple[Codebook, Codebook]:
        if j not in self.irs_horizontal:
            raise ValueError(f"no codebooks for IRS {j}")
        return self.irs_horizontal[j], self.irs_vertical[j]

    def compose(self, j: int, h_index: int, v_index: int) -> np.ndarray:
        """Panel beam for IRS ``j`` from 1-based per-axis indices."""
        h_cb, v_cb = self.for_irs(j)
        return compose_3d_beam(h_cb.entry(h_index), v_cb.entry(v_index))


def build_codebooks(scene: Scene, bs_size: int, irs_h_size: int, irs_v_size: int) -> CodebookSet:
    """DFT codebooks sized for a scene.

    Surfaces sharing the same element counts share the same codebook objects.
    """
    bs = dft_codebook(scene.bs_antenna_count, bs_size)
    cache: dict[tuple[int, int], Codebook] = {}
    horizontal = {}
    vertical = {}
    for j in range(1, scene.irs_count + 1):
        irs = scene.irs(j)
        for axis_len, size, target in ((irs.m1, irs_h_size, horizontal), (irs.m2, irs_v_size, vertical)):
            key = (axis_len, size)
            if key not in cache:
                cache[key] = dft_codebook(axis_len, size)
            target[j] = cache[key]
    return CodebookSet(bs=bs, irs_horizontal=horizontal, irs_vertical=vertical)
