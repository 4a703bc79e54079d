"""Singular-value tails, POD modes and feature-location error metrics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .detect import DetectorConfig, FeatureSet, detect_features
from .exact import TestCase, exact_feature_trajectories, get_case
from .grid import SnapshotMatrix, build_grid, project


def _as_array(A) -> np.ndarray:
    A = A.data if isinstance(A, SnapshotMatrix) else np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("need a nonempty 2-D matrix")
    return A


def singular_values(A) -> np.ndarray:
    """All singular values, non-increasing, length ``min(rows, cols)``."""
    try:
        return np.linalg.svd(_as_array(A), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"singular value decomposition failed: {exc}") from exc


def xi(sigma: np.ndarray, m: int) -> float:
    """Root of the squared singular values beyond the first ``m``."""
    sigma = np.asarray(sigma, dtype=float)
    if not 0 <= m <= sigma.size:
        raise ValueError(f"m={m} outside [0, {sigma.size}]")
    return float(np.sqrt(np.sum(sigma[m:][::-1] ** 2)))


def xi_curve(sigma: np.ndarray, m_max: int | None = None) -> np.ndarray:
    """Xi_m for m = 0..m_max (default: all)."""
    sigma = np.asarray(sigma, dtype=float)
    m_max = sigma.size if m_max is None else min(m_max, sigma.size)
    tail = np.sqrt(np.cumsum((sigma ** 2)[::-1])[::-1])
    return np.append(tail, 0.0)[: m_max + 1]


def pod_modes(A, m: int) -> np.ndarray:
    """The ``m`` leading left singular vectors as columns."""
    A = _as_array(A)
    if not 0 <= m <= min(A.shape):
        raise ValueError(f"m={m} exceeds the rank bound {min(A.shape)}")
    if m == 0:
        return np.zeros((A.shape[0], 0))
    U, _, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, :m]


def projection_residual(A, basis: np.ndarray) -> float:
    """Frobenius norm of ``A - U U^T A`` for an orthonormal basis ``U``."""
    A = _as_array(A)
    basis = np.asarray(basis, dtype=float).reshape(A.shape[0], -1)
    R = A - basis @ (basis.T @ A)
    return float(np.linalg.norm(R))


# ---------------------------------------------------------------------------
# Feature-location error against ground truth

@dataclass(frozen=True)
class FeatureErrorReport:
    M: int
    dx: float
    E: float
    matched_times: int
    total_times: int

    @property
    def ok(self) -> bool:
        return self.matched_times > 0


def match_features(detected: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Greedy nearest-location pairing; returns |detected - truth| per pair."""
    detected = list(np.asarray(detected, dtype=float))
    truth = list(np.asarray(truth, dtype=float))
    errs = []
    while detected and truth:
        d = np.abs(np.subtract.outer(detected, truth))
        i, j = np.unravel_index(np.argmin(d), d.shape)
        errs.append(d[i, j])
        detected.pop(i)
        truth.pop(j)
    return np.array(errs)


def feature_error(detected: Sequence[FeatureSet], truth: Sequence[FeatureSet]) -> tuple[float, int]:
    """Max location error over times where interior counts agree.

    Returns ``(E, number_of_times_used)``; ``E`` is nan when no time qualifies.
    """
    E = 0.0
    used = 0
    for d, z in zip(detected, truth):
        if d.p != z.p:
            continue
        used += 1
        if d.p:
            E = max(E, float(match_features(d.interior, z.interior).max()))
    return (E if used else float("nan")), used


def feature_error_sweep(
    case,
    M_list: Sequence[int],
    C_over_M: float = 2.5e-2,
    K: int = 1000,
    quad_order: int = 10,
    component: int = 0,
    cfg: DetectorConfig = DetectorConfig(),
    endpoint: bool = False,
) -> list[FeatureErrorReport]:
    """Feature-location error of the detector for each grid size in ``M_list``.

    The threshold is rescaled as ``C = C_over_M * M`` so that ``C * dx`` stays
    fixed across grids.  Times are ``K`` uniform samples of the case's time
    interval, with ``T`` included only when ``endpoint`` is true.
    """
    if not len(M_list):
        raise ValueError("M_list must not be empty")
    case = get_case(case) if not isinstance(case, TestCase) else case
    f = case.solution(component)
    times = np.linspace(0.0, case.T, K, endpoint=endpoint)
    truth = [exact_feature_trajectories(case, float(t), component) for t in times]
    reports = []
    for M in M_list:
        grid = build_grid(*case.omega, int(M))
        c = replace(cfg, C=C_over_M * int(M))
        det = [
            detect_features(project(lambda x, t=t: f(x, t), grid, quad_order, float(t), component), grid, c)
            for t in times
        ]
        E, used = feature_error(det, truth)
        reports.append(FeatureErrorReport(int(M), grid.dx, E, used, K))
    return reports
