"""End-to-end experiments: snapshots, detection, partitioning, calibration, spectra."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .calibration import CalibrationResult, GapCheck, MatchPolicy, TimePartition, split_and_calibrate
from .detect import DetectionMode, DetectorConfig, FeatureSet, Flagger, detect_features
from .exact import TestCase, get_case
from .grid import Grid, SnapshotMatrix, build_grid, project, write_matrix_csv
from .spectral import feature_error_sweep, singular_values, xi_curve

log = logging.getLogger(__name__)

SUMMARY_M = (1, 3, 10, 13, 30, 50)


class ExperimentError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class ExperimentConfig:
    case: str = "burgers"
    M: int = 2000
    K: int = 1000
    K1: float = 5.0
    K2: float = 3.0
    C: float = 50.0
    N_D: int = 3
    quad_order: int = 10
    mode: str = DetectionMode.KINKS_AND_DISCONTINUITIES.value
    flagger: str = Flagger.ALL_FACES.value
    gap_check: str = GapCheck.SHRINK_ONLY.value
    endpoint: bool = False
    exact_integration: bool = False
    write_matrices: bool = False
    output: str = "results"
    components: list[int] | None = None

    def __post_init__(self) -> None:
        try:
            self.testcase
            self.detector
            self.policy
        except ValueError as exc:
            raise ExperimentError("config", str(exc)) from None
        if self.K < 1:
            raise ExperimentError("config", "K must be at least 1")
        if self.quad_order < 1:
            raise ExperimentError("config", "quad_order must be at least 1")
        for q in self.components or []:
            if not 0 <= q < self.testcase.Q:
                raise ExperimentError("config", f"{self.case} has no component {q}")

    @property
    def testcase(self) -> TestCase:
        return get_case(self.case)

    @property
    def detector(self) -> DetectorConfig:
        return DetectorConfig(C=self.C, N_D=self.N_D, mode=self.mode, flagger=self.flagger)

    @property
    def policy(self) -> MatchPolicy:
        return MatchPolicy(K1=self.K1, K2=self.K2, gap_check=self.gap_check)

    def grid(self) -> Grid:
        return build_grid(*self.testcase.omega, self.M)

    def times(self) -> np.ndarray:
        """``K`` uniform times starting at 0.

        By default the spacing is ``T / K`` and ``T`` itself is not sampled;
        ``endpoint=True`` spaces ``K`` points over the closed interval.
        """
        if self.K == 1:
            return np.zeros(1)
        return np.linspace(0.0, self.testcase.T, self.K, endpoint=self.endpoint)

    def component_ids(self) -> list[int]:
        return list(self.components) if self.components else list(range(self.testcase.Q))

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in names:
                raise ExperimentError("config", f"unknown key {key!r}")
            kwargs[key] = _coerce(names[key], raw)
        return cls(**kwargs)


def _coerce(f: dataclasses.Field, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    kind = str(f.type)
    raw = raw.strip()
    if kind.startswith("int"):
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        return raw.lower() in ("1", "true", "yes", "on")
    if kind.startswith("list"):
        return [int(v) for v in raw.replace(",", " ").split()] or None
    return raw


def load_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ExperimentError("config", f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


# ---------------------------------------------------------------------------

@dataclass
class ComponentRun:
    component: int
    name: str
    S: SnapshotMatrix
    features: list[FeatureSet]
    calibration: CalibrationResult
    sigma_raw: list[np.ndarray] = field(default_factory=list)
    sigma_calib: list[np.ndarray] = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.calibration.partition.N

    def xi_raw(self, i: int) -> np.ndarray:
        return xi_curve(self.sigma_raw[i])

    def xi_calib(self, i: int) -> np.ndarray:
        return xi_curve(self.sigma_calib[i])

    def largest_subsets(self, n: int) -> list[int]:
        sizes = self.calibration.partition.sizes
        return sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))[:n]


def snapshot_matrix(case: TestCase, component: int, grid: Grid, times: np.ndarray, quad_order: int) -> SnapshotMatrix:
    f = case.solution(component)
    data = np.empty((grid.M, times.size))
    for k, t in enumerate(times):
        data[:, k] = project(lambda x: f(x, float(t)), grid, quad_order, float(t), component).values
    return SnapshotMatrix(grid, times, data, component)


def run_component(cfg: ExperimentConfig, component: int) -> ComponentRun:
    case = cfg.testcase
    grid = cfg.grid()
    name = case.components[component]
    try:
        S = snapshot_matrix(case, component, grid, cfg.times(), cfg.quad_order)
    except ValueError as exc:
        raise ExperimentError("snapshots", f"{name}: {exc}") from exc
    try:
        det = cfg.detector
        features = [detect_features(S.column(k), grid, det) for k in range(S.K)]
    except (ValueError, RuntimeError) as exc:
        raise ExperimentError("detection", f"{name}: {exc}") from exc
    try:
        cal = split_and_calibrate(S, features, cfg.policy, grid, cfg.quad_order, cfg.exact_integration)
    except (ValueError, RuntimeError) as exc:
        raise ExperimentError("calibration", f"{name}: {exc}") from exc
    run = ComponentRun(component, name, S, features, cal)
    try:
        for raw, calib in zip(cal.sub_matrices, cal.calibrated_sub_matrices):
            run.sigma_raw.append(singular_values(raw))
            run.sigma_calib.append(singular_values(calib))
    except RuntimeError as exc:
        raise ExperimentError("spectra", f"{name}: {exc}") from exc
    log.info("%s/%s: N=%d, subset sizes %s", cfg.case, name, run.N, cal.partition.sizes)
    return run


def run_pipeline(cfg: ExperimentConfig) -> list[ComponentRun]:
    return [run_component(cfg, q) for q in cfg.component_ids()]


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> list[ComponentRun]:
    """Run every requested component and write the report bundle."""
    runs = run_pipeline(cfg)
    if write:
        try:
            write_bundle(cfg, runs)
        except OSError as exc:
            raise ExperimentError("output", str(exc)) from exc
    return runs


# ---------------------------------------------------------------------------
# Report bundle

def _r(v: float) -> float:
    return float(v)


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def partition_record(part: TimePartition, times: np.ndarray, component: int, name: str) -> dict[str, Any]:
    subsets = []
    for i, ((a, b), reason) in enumerate(zip(part.bounds, part.reasons), start=1):
        subsets.append({
            "sub_matrix_id": i,
            "ref_index": a + 1,
            "ref_time": _r(times[a]),
            "last_time": _r(times[b - 1]),
            "subset_size": b - a,
            "reason": reason,
        })
    gaps = [[_r(times[b - 1]), _r(times[b])] for a, b in part.bounds[:-1]]
    return {"component": component, "name": name, "N": part.N, "subsets": subsets, "gap_intervals": gaps}


def summary_record(run: ComponentRun) -> dict[str, Any]:
    part = run.calibration.partition
    per_subset = []
    for i in range(part.N):
        xr, xc = run.xi_raw(i), run.xi_calib(i)
        ms = sorted({min(m, xr.size - 1) for m in SUMMARY_M})
        per_subset.append({
            "sub_matrix_id": i + 1,
            "size": part.sizes[i],
            "xi0_raw": _r(xr[0]),
            "xi0_calibrated": _r(xc[0]),
            "xi_raw": {str(m): _r(xr[m]) for m in ms},
            "xi_calibrated": {str(m): _r(xc[m]) for m in ms},
        })
    return {
        "component": run.component,
        "name": run.name,
        "N": part.N,
        "subset_sizes": part.sizes,
        "ref_times": [_r(run.S.times[a]) for a in part.ref_indices],
        "subsets": per_subset,
    }


def write_bundle(cfg: ExperimentConfig, runs: Sequence[ComponentRun]) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)

    feat_rows, tf_rows, sig_rows, xi_rows = [], [], [], []
    for run in runs:
        for k, fs in enumerate(run.features):
            for z, g in zip(fs.interior, fs.identifiers):
                feat_rows.append((run.component, float(run.S.times[k]), float(z), int(g)))
        part = run.calibration.partition
        for i, (a, b) in enumerate(part.bounds, start=1):
            for k in range(a, b):
                phi = run.calibration.transforms[k]
                for j, (n, v) in enumerate(zip(phi.nodes, phi.node_values)):
                    tf_rows.append((run.component, k + 1, float(run.S.times[k]), i, j, float(n), float(v)))
            sr, sc = run.sigma_raw[i - 1], run.sigma_calib[i - 1]
            for n, (a_, b_) in enumerate(zip(sr, sc), start=1):
                sig_rows.append((run.component, i, n, float(a_), float(b_)))
            xr, xc = run.xi_raw(i - 1), run.xi_calib(i - 1)
            for m, (a_, b_) in enumerate(zip(xr, xc)):
                xi_rows.append((run.component, i, m, float(a_), float(b_)))
        if cfg.write_matrices:
            for i, (S_i, C_i) in enumerate(zip(run.calibration.sub_matrices, run.calibration.calibrated_sub_matrices), start=1):
                write_matrix_csv(out / f"S_{run.name}_{i}.csv", S_i)
                write_matrix_csv(out / f"S_calib_{run.name}_{i}.csv", C_i)
    feat_rows.sort(key=lambda r: (r[0], r[1], r[2]))

    (out / "features.csv").write_text(_csv_text(("component", "t", "location", "identifier"), feat_rows))
    (out / "transforms.csv").write_text(
        _csv_text(("component", "column", "t", "sub_matrix_id", "node_index", "node", "node_value"), tf_rows))
    (out / "sigma.csv").write_text(
        _csv_text(("component", "sub_matrix_id", "i", "sigma_raw", "sigma_calibrated"), sig_rows))
    (out / "xi.csv").write_text(_csv_text(("component", "sub_matrix_id", "m", "xi_raw", "xi_calibrated"), xi_rows))
    partitions = {
        run.name: partition_record(run.calibration.partition, run.S.times, run.component, run.name)
        for run in runs
    }
    (out / "partitions.json").write_text(_json_text(partitions))
    summary = {
        "config": dataclasses.asdict(cfg),
        "components": {run.name: summary_record(run) for run in runs},
    }
    (out / "summary.json").write_text(_json_text(summary))
    return out


# ---------------------------------------------------------------------------
# Sweeps and ablations

def run_sweep(cfg: ExperimentConfig, M_list: Sequence[int], C_over_M: float = 2.5e-2, write: bool = True):
    if not len(M_list):
        raise ExperimentError("config", "M_list must not be empty")
    comp = cfg.component_ids()[0]
    try:
        reports = feature_error_sweep(
            cfg.testcase, M_list, C_over_M, cfg.K, cfg.quad_order, comp, cfg.detector, cfg.endpoint
        )
    except ValueError as exc:
        raise ExperimentError("sweep", str(exc)) from exc
    if write:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        rows = [(r.M, r.dx, r.E, r.matched_times, r.total_times) for r in reports]
        (out / "feature_error.csv").write_text(_csv_text(("M", "dx", "E", "matched_times", "total_times"), rows))
    return reports


@dataclass(frozen=True)
class AblationRow:
    sub_matrix_id: int
    m: int
    xi_kinks: float
    xi_discontinuities: float

    @property
    def ratio(self) -> float:
        if self.xi_discontinuities == 0.0:
            return 0.0 if self.xi_kinks == 0.0 else float("inf")
        return self.xi_kinks / self.xi_discontinuities


@dataclass
class ModeComparison:
    rows: list[AblationRow]
    kinks: CalibrationResult
    discontinuities: CalibrationResult


def compare_modes_matrix(S: SnapshotMatrix, cfg: ExperimentConfig, m_max: int = 20) -> ModeComparison:
    """Ablation table for an explicit snapshot matrix.

    ``S`` is calibrated twice, once per detection mode.  For each subset of
    the kink+discontinuity partition the discontinuity-only calibrated
    columns covering the same times are gathered, and both Xi curves are
    compared at m = 1..m_max (clipped to the subset rank).
    """
    grid = S.grid
    results = {}
    for mode in (DetectionMode.KINKS_AND_DISCONTINUITIES, DetectionMode.DISCONTINUITIES_ONLY):
        det = dataclasses.replace(cfg.detector, mode=mode)
        try:
            feats = [detect_features(S.column(k), grid, det) for k in range(S.K)]
        except (ValueError, RuntimeError) as exc:
            raise ExperimentError("detection", f"{mode.value}: {exc}") from exc
        try:
            results[mode] = split_and_calibrate(S, feats, cfg.policy, grid, cfg.quad_order, cfg.exact_integration)
        except (ValueError, RuntimeError) as exc:
            raise ExperimentError("calibration", f"{mode.value}: {exc}") from exc
    kd = results[DetectionMode.KINKS_AND_DISCONTINUITIES]
    d = results[DetectionMode.DISCONTINUITIES_ONLY]
    d_cal = np.hstack([C.data for C in d.calibrated_sub_matrices])
    rows = []
    for i, (a, b) in enumerate(kd.partition.bounds):
        xk = xi_curve(singular_values(kd.calibrated_sub_matrices[i]))
        xd = xi_curve(singular_values(d_cal[:, a:b]))
        for m in range(1, m_max + 1):
            rows.append(AblationRow(i + 1, m, float(xk[min(m, xk.size - 1)]), float(xd[min(m, xd.size - 1)])))
    return ModeComparison(rows, kd, d)


def compare_modes(cfg: ExperimentConfig, m_max: int = 20, write: bool = True) -> list[AblationRow]:
    """Kink+discontinuity calibration against discontinuity-only calibration.

    Uses the first requested component of the configured case and writes
    ``ablation.csv`` and ``ablation_partitions.json``.
    """
    comp = cfg.component_ids()[0]
    try:
        S = snapshot_matrix(cfg.testcase, comp, cfg.grid(), cfg.times(), cfg.quad_order)
    except ValueError as exc:
        raise ExperimentError("snapshots", str(exc)) from exc
    cmp_ = compare_modes_matrix(S, cfg, m_max)
    if write:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        text = _csv_text(
            ("sub_matrix_id", "m", "xi_kinks_and_discontinuities", "xi_discontinuities_only", "ratio"),
            [(r.sub_matrix_id, r.m, r.xi_kinks, r.xi_discontinuities, r.ratio) for r in cmp_.rows],
        )
        (out / "ablation.csv").write_text(text)
        name = cfg.testcase.components[comp]
        (out / "ablation_partitions.json").write_text(_json_text({
            "kinks_and_discontinuities": partition_record(cmp_.kinks.partition, S.times, comp, name),
            "discontinuities_only": partition_record(cmp_.discontinuities.partition, S.times, comp, name),
        }))
    return cmp_.rows
