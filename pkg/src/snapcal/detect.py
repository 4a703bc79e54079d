"""Discontinuity and kink detection on finite-volume snapshots.

Discontinuities are faces whose jump exceeds ``C * dx``; adjoining flagged
faces are grouped and each group reports the mean of its face positions.
Kinks are found by running the same procedure on the central-difference
derivative, after removing every face within ``N_D * dx`` of a flagged
discontinuity face.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Grid, Snapshot, central_difference_derivative

DISCONTINUITY = 0
KINK = 1


class DetectionMode(str, enum.Enum):
    DISCONTINUITIES_ONLY = "discontinuities"
    KINKS_AND_DISCONTINUITIES = "kinks+discontinuities"


class Flagger(str, enum.Enum):
    ALL_FACES = "all-faces"
    MRA = "mra"


@dataclass(frozen=True)
class DetectorConfig:
    C: float = 50.0
    N_D: int = 3
    mode: DetectionMode = DetectionMode.KINKS_AND_DISCONTINUITIES
    flagger: Flagger = Flagger.ALL_FACES
    # relative threshold of the MRA flagger: J > mra_C * max(J)
    mra_C: float = 0.1

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValueError("C must be positive")
        if int(self.N_D) != self.N_D or self.N_D < 1:
            raise ValueError("N_D must be a positive integer")
        if not 0 < self.mra_C < 1:
            raise ValueError("mra_C must lie in (0, 1)")
        object.__setattr__(self, "mode", DetectionMode(self.mode))
        object.__setattr__(self, "flagger", Flagger(self.flagger))


@dataclass(frozen=True)
class FeatureSet:
    """Sorted feature locations with both domain end points included.

    ``identifiers`` has one entry per interior feature: 0 for a
    discontinuity, 1 for a kink.
    """

    locations: np.ndarray
    identifiers: np.ndarray

    def __post_init__(self) -> None:
        loc = np.asarray(self.locations, dtype=float)
        ids = np.asarray(self.identifiers, dtype=np.int8).reshape(-1)
        if loc.ndim != 1 or loc.size < 2:
            raise ValueError("a feature set needs at least the two boundary points")
        if not np.all(np.diff(loc) > 0):
            raise ValueError(f"feature locations must be strictly increasing: {loc}")
        if ids.size != loc.size - 2:
            raise ValueError("need exactly one identifier per interior feature")
        if not np.all((ids == DISCONTINUITY) | (ids == KINK)):
            raise ValueError("identifiers must be 0 (discontinuity) or 1 (kink)")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "identifiers", ids)

    @classmethod
    def from_interior(cls, x_min: float, x_max: float, interior: Sequence[float], identifiers: Sequence[int]) -> "FeatureSet":
        return cls(np.concatenate(([x_min], np.asarray(interior, dtype=float), [x_max])), identifiers)

    @property
    def p(self) -> int:
        return self.locations.size - 2

    @property
    def interior(self) -> np.ndarray:
        return self.locations[1:-1]

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.locations)

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())


def face_jumps(s: Snapshot | np.ndarray) -> np.ndarray:
    """|u_e - u_{e-1}| for the interior faces e = 2..M (array index e - 2)."""
    u = s.values if isinstance(s, Snapshot) else np.asarray(s, dtype=float)
    if u.size < 2:
        raise ValueError("need at least two cells")
    return np.abs(np.diff(u))


def flag_faces(jumps: np.ndarray, C: float, dx: float) -> np.ndarray:
    """1-based indices of interior faces whose jump exceeds ``C * dx``."""
    if not (C > 0 and dx > 0):
        raise ValueError("C and dx must be positive")
    return np.flatnonzero(np.asarray(jumps) > C * dx) + 2


def group_faces(B: Sequence[int]) -> list[np.ndarray]:
    """Split sorted face indices into maximal runs of consecutive integers."""
    B = np.asarray(B, dtype=np.int64)
    if B.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(B) != 1) + 1
    return np.split(B, breaks)


def discontinuity_locations(groups: Sequence[np.ndarray], grid: Grid) -> np.ndarray:
    """Mean face position of each group, sorted."""
    if not groups:
        return np.empty(0)
    locs = [grid.x_min + (np.mean(g) - 1.0) * grid.dx for g in groups]
    return np.sort(np.array(locs))


def mra_flag(s: Snapshot | np.ndarray, C: float) -> np.ndarray:
    """Cells (1-based) flagged by alternate-face wavelet thresholding.

    Only the faces in the middle of the coarse cells, between fine cells
    2i - 1 and 2i, are inspected; pair i is flagged when its jump exceeds
    ``C`` times the largest such jump, and both children are returned.
    """
    u = s.values if isinstance(s, Snapshot) else np.asarray(s, dtype=float)
    M = u.size
    if M < 2 or M & (M - 1):
        raise ValueError(f"MRA flagging needs a power-of-two cell count, got {M}")
    J = np.abs(u[0::2] - u[1::2])
    D = J.max()
    if D == 0.0:
        return np.empty(0, dtype=np.int64)
    pairs = np.flatnonzero(J > C * D) + 1
    return np.sort(np.concatenate((2 * pairs - 1, 2 * pairs)))


def flagged_faces(u: np.ndarray, grid: Grid, cfg: DetectorConfig) -> np.ndarray:
    if cfg.flagger is Flagger.MRA:
        cells = mra_flag(u, cfg.mra_C)
        # the inspected face of pair (2i-1, 2i) is face 2i
        return cells[1::2]
    return flag_faces(face_jumps(u), cfg.C, grid.dx)


def detect_kinks(s: Snapshot, disc_faces: Sequence[int], grid: Grid, cfg: DetectorConfig) -> np.ndarray:
    """Kink locations from jumps of the central-difference derivative."""
    if grid.M < 5:
        raise ValueError("kink detection needs at least 5 cells")
    du = central_difference_derivative(s, grid).values
    jumps = face_jumps(du)
    faces = np.arange(2, grid.M + 1)
    disc_faces = np.asarray(disc_faces, dtype=np.int64)
    if disc_faces.size:
        # faces within N_D cells of a flagged face are not eligible
        near = np.abs(faces[:, None] - disc_faces[None, :]).min(axis=1) <= cfg.N_D
        jumps = np.where(near, 0.0, jumps)
    B = flag_faces(jumps, cfg.C, grid.dx)
    return discontinuity_locations(group_faces(B), grid)


def detect_features(s: Snapshot, grid: Grid, cfg: DetectorConfig = DetectorConfig()) -> FeatureSet:
    if s.values.size != grid.M:
        raise ValueError("snapshot length does not match grid")
    B = flagged_faces(s.values, grid, cfg)
    disc = discontinuity_locations(group_faces(B), grid)
    pts = [(z, DISCONTINUITY) for z in disc]
    if cfg.mode is DetectionMode.KINKS_AND_DISCONTINUITIES:
        for z in detect_kinks(s, B, grid, cfg):
            if disc.size == 0 or np.abs(disc - z).min() > 0.5 * grid.dx:
                pts.append((z, KINK))
    pts.sort()
    loc = np.array([z for z, _ in pts])
    if loc.size and (loc[0] <= grid.x_min or loc[-1] >= grid.x_max):
        raise RuntimeError(f"detected feature outside the open domain at t={s.t}: {loc}")
    return FeatureSet.from_interior(grid.x_min, grid.x_max, loc, [g for _, g in pts])
