"""Feature matching, adaptive reference selection and calibrated snapshots."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .detect import FeatureSet
from .grid import DEFAULT_QUAD_ORDER, Grid, Snapshot, SnapshotMatrix, gauss_legendre_nodes


class GapCheck(str, enum.Enum):
    """Which side of the gap-ratio condition is enforced.

    ``TWO_SIDED`` requires ``1/K1 <= gap_ref / gap_cur <= K1`` for every
    consecutive gap.  ``SHRINK_ONLY`` keeps only the upper bound, so features
    may separate freely but may not approach each other by more than a
    factor ``K1``. Experiment runs use this setting by default.
    """

    TWO_SIDED = "two-sided"
    SHRINK_ONLY = "shrink-only"


@dataclass(frozen=True)
class MatchPolicy:
    K1: float = 5.0
    K2: float = 3.0
    gap_check: GapCheck = GapCheck.TWO_SIDED

    def __post_init__(self) -> None:
        if not self.K1 > 1:
            raise ValueError("K1 must exceed 1")
        if not self.K2 >= 2:
            raise ValueError("K2 must be at least 2")
        object.__setattr__(self, "gap_check", GapCheck(self.gap_check))


@dataclass(frozen=True)
class MatchResult:
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def check_match(ref: FeatureSet, cur: FeatureSet, policy: MatchPolicy = MatchPolicy()) -> MatchResult:
    """Equal feature counts (C1), equal identifiers (C2), bounded gap ratios (C3)."""
    if ref.p != cur.p:
        return MatchResult(False, "C1")
    if not np.array_equal(ref.identifiers, cur.identifiers):
        return MatchResult(False, "C2")
    ratio = ref.gaps / cur.gaps
    if np.any(ratio > policy.K1):
        return MatchResult(False, "C3")
    if policy.gap_check is GapCheck.TWO_SIDED and np.any(ratio < 1.0 / policy.K1):
        return MatchResult(False, "C3")
    return MatchResult(True, "ok")


@dataclass(frozen=True)
class TimePartition:
    """Reference indices (0-based) of consecutive time subsets.

    Subset ``i`` holds columns ``ref_indices[i] .. ref_indices[i+1] - 1``; the
    first reference is always column 0.  ``reasons[i]`` records why column
    ``ref_indices[i]`` became a reference.
    """

    ref_indices: tuple[int, ...]
    K: int
    reasons: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        refs = tuple(int(r) for r in self.ref_indices)
        if not refs or refs[0] != 0:
            raise ValueError("the first reference must be column 0")
        if any(b <= a for a, b in zip(refs, refs[1:])) or refs[-1] >= self.K:
            raise ValueError("reference indices must be increasing and below K")
        object.__setattr__(self, "ref_indices", refs)
        if not self.reasons:
            object.__setattr__(self, "reasons", ("initial",) + ("",) * (len(refs) - 1))

    @property
    def N(self) -> int:
        return len(self.ref_indices)

    @property
    def bounds(self) -> list[tuple[int, int]]:
        ends = self.ref_indices[1:] + (self.K,)
        return list(zip(self.ref_indices, ends))

    @property
    def sizes(self) -> list[int]:
        return [b - a for a, b in self.bounds]

    def subset(self, i: int) -> range:
        a, b = self.bounds[i]
        return range(a, b)

    def reference_of(self, k: int) -> int:
        i = int(np.searchsorted(self.ref_indices, k, side="right")) - 1
        return self.ref_indices[i]


def select_references(feature_sets: Sequence[FeatureSet], policy: MatchPolicy, dx: float) -> TimePartition:
    """Sequential scan choosing a new reference whenever matching fails.

    Besides the matching conditions, both the reference and the current
    snapshot need every consecutive feature gap (boundary points included)
    to exceed ``K2 * dx``.  A snapshot that fails becomes the next reference.
    """
    K = len(feature_sets)
    if K == 0:
        raise ValueError("need at least one feature set")
    floor = policy.K2 * dx
    refs = [0]
    reasons = ["initial"]
    for k in range(1, K):
        ref = feature_sets[refs[-1]]
        cur = feature_sets[k]
        m = check_match(ref, cur, policy)
        if not m:
            reason = m.reason
        elif not ref.min_gap > floor:
            reason = "K2-reference"
        elif not cur.min_gap > floor:
            reason = "K2-current"
        else:
            continue
        refs.append(k)
        reasons.append(reason)
    return TimePartition(tuple(refs), K, tuple(reasons))


@dataclass(frozen=True)
class SpatialTransform:
    """Monotone piecewise-linear map sending ``nodes`` onto ``node_values``."""

    nodes: np.ndarray
    node_values: np.ndarray

    def __post_init__(self) -> None:
        n = np.asarray(self.nodes, dtype=float)
        v = np.asarray(self.node_values, dtype=float)
        if n.shape != v.shape or n.ndim != 1 or n.size < 2:
            raise ValueError("nodes and node_values must be 1-D arrays of equal length >= 2")
        if not np.all(np.diff(n) > 0):
            raise ValueError("transform nodes must be strictly increasing")
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "node_values", v)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.node_values) / np.diff(self.nodes)

    def __call__(self, x):
        return eval_transform(self, x)

    def inverse(self) -> "SpatialTransform":
        return SpatialTransform(self.node_values, self.nodes)


def build_transform(ref: FeatureSet, target: FeatureSet) -> SpatialTransform:
    if ref.locations.size != target.locations.size:
        raise ValueError(
            f"cannot match {ref.p} reference features to {target.p} target features"
        )
    return SpatialTransform(ref.locations, target.locations)


def _interp(x, xs: np.ndarray, ys: np.ndarray):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < xs[0]) or np.any(xa > xs[-1]):
        raise ValueError(f"argument outside [{xs[0]}, {xs[-1]}]")
    out = np.interp(xa, xs, ys)
    return float(out) if np.ndim(x) == 0 else out


def eval_transform(phi: SpatialTransform, x):
    return _interp(x, phi.nodes, phi.node_values)


def inverse_eval(phi: SpatialTransform, y):
    return _interp(y, phi.node_values, phi.nodes)


def validate_transform(phi: SpatialTransform, policy: MatchPolicy = MatchPolicy()) -> bool:
    """Homeomorphism plus the derivative bounds guaranteed by ``policy``.

    A two-sided policy needs every slope in ``[1/K1, K1]``; a shrink-only
    policy only bounds the inverse map, i.e. slopes ``>= 1/K1``.
    """
    v = phi.node_values
    if not np.all(np.diff(v) > 0):
        return False
    if v[0] != phi.nodes[0] or v[-1] != phi.nodes[-1]:
        return False
    s = phi.slopes
    if np.any(s < 1.0 / policy.K1):
        return False
    if policy.gap_check is GapCheck.TWO_SIDED and np.any(s > policy.K1):
        return False
    return True


def calibrate_snapshot(
    s: Snapshot,
    phi: SpatialTransform,
    grid: Grid,
    quad_order: int = DEFAULT_QUAD_ORDER,
    exact: bool = False,
) -> Snapshot:
    """Cell averages of ``x -> u_M(phi(x))`` with ``u_M`` piecewise constant.

    By default each cell is integrated with Gauss-Legendre quadrature.  With
    ``exact=True`` the integrand is split at every face and every preimage of
    a face, which integrates the piecewise-constant composition exactly.
    """
    u = s.values
    if exact:
        return Snapshot(s.t, _calibrate_exact(u, phi, grid), s.component)
    nodes, weights = gauss_legendre_nodes(grid, quad_order)
    y = eval_transform(phi, nodes)
    return Snapshot(s.t, u[grid.cell_index(y)] @ weights, s.component)


def _calibrate_exact(u: np.ndarray, phi: SpatialTransform, grid: Grid) -> np.ndarray:
    faces = grid.faces
    pts = np.unique(np.concatenate((faces, inverse_eval(phi, faces), phi.nodes)))
    mid = 0.5 * (pts[:-1] + pts[1:])
    length = np.diff(pts)
    vals = u[grid.cell_index(eval_transform(phi, mid))]
    return np.bincount(grid.cell_index(mid), weights=vals * length, minlength=grid.M) / grid.dx


class TransformError(RuntimeError):
    pass


@dataclass(frozen=True)
class CalibrationResult:
    partition: TimePartition
    sub_matrices: list[SnapshotMatrix]
    calibrated_sub_matrices: list[SnapshotMatrix]
    transforms: list[SpatialTransform]


def split_and_calibrate(
    S: SnapshotMatrix,
    feature_sets: Sequence[FeatureSet],
    policy: MatchPolicy,
    grid: Grid | None = None,
    quad_order: int = DEFAULT_QUAD_ORDER,
    exact: bool = False,
) -> CalibrationResult:
    """Partition the columns of ``S`` and calibrate each against its reference."""
    grid = grid or S.grid
    if len(feature_sets) != S.K:
        raise ValueError(f"{len(feature_sets)} feature sets for {S.K} columns")
    partition = select_references(feature_sets, policy, grid.dx)
    transforms: list[SpatialTransform] = []
    calibrated = np.empty_like(S.data)
    for k in range(S.K):
        ref = feature_sets[partition.reference_of(k)]
        phi = build_transform(ref, feature_sets[k])
        if not validate_transform(phi, policy):
            raise TransformError(f"transform for column {k + 1} violates the derivative bounds: slopes {phi.slopes}")
        transforms.append(phi)
        calibrated[:, k] = calibrate_snapshot(S.column(k), phi, grid, quad_order, exact).values
    subs, cals = [], []
    for a, b in partition.bounds:
        subs.append(SnapshotMatrix(grid, S.times[a:b], S.data[:, a:b], S.component))
        cals.append(SnapshotMatrix(grid, S.times[a:b], calibrated[:, a:b], S.component))
    return CalibrationResult(partition, subs, cals, transforms)
