"""Corpus ingestion and preprocessing.

Interchange corpus format: one ``<shape>.csv`` per shape with header
``demo,t,y,z`` and rows sorted by (demo, t). A separate label map CSV
(``shape,concept``) assigns each shape to its relational concept; only
shapes listed in the map are loaded, so a reduced map selects a subset
of the corpus.

Preprocessing pipeline (fixed order): moving-average smoothing, uniform
arc-length resampling, isotropic fit into the workspace rectangle,
per-point inverse kinematics, first-difference encoding. Channel
normalization into the network range is a separate step because it
needs corpus-wide statistics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ArmConfig, PreprocessConfig, WorkspaceRect
from .errors import ConfigError, CorpusError, CorpusParseError, DegenerateInputError
from .kinematics import ArmModel, trajectory_ik
from .serialization import read_container, write_container

NETWORK_LO = 0.1
NETWORK_HI = 0.9

CACHE_FORMAT = "processed-corpus"
CACHE_VERSION = 1


@dataclass(frozen=True)
class Trajectory:
    shape_name: str
    demo_index: int
    points: np.ndarray  # (N, 2) raw (y, z)

    @property
    def demo_id(self) -> str:
        return f"{self.shape_name}/{self.demo_index}"


@dataclass(frozen=True)
class ProcessedDemo:
    shape_name: str
    demo_index: int
    concept_label: str  # ground truth, read only by the teacher and the evaluator
    initial_info: np.ndarray  # (6,) absolute start: y0, z0, q0[4]
    deltas: np.ndarray  # (num_steps, 6) physical units: dy, dz, dq[4]

    @property
    def demo_id(self) -> str:
        return f"{self.shape_name}/{self.demo_index}"

    @property
    def num_steps(self) -> int:
        return self.deltas.shape[0]

    @property
    def sensory_deltas(self) -> np.ndarray:
        return self.deltas[:, :2]

    @property
    def motor_deltas(self) -> np.ndarray:
        return self.deltas[:, 2:]


@dataclass(frozen=True)
class NormalizationStats:
    """Corpus-wide per-channel ranges for deltas and initial configurations."""

    delta_lo: np.ndarray  # (6,)
    delta_hi: np.ndarray  # (6,)
    init_lo: np.ndarray  # (6,)
    init_hi: np.ndarray  # (6,)

    def _affine(self, x, lo, hi):
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        out = NETWORK_LO + (NETWORK_HI - NETWORK_LO) * (x - lo) / safe
        return np.where(span > 0, out, 0.5 * (NETWORK_LO + NETWORK_HI))

    def _inverse(self, n, lo, hi):
        span = hi - lo
        out = lo + (n - NETWORK_LO) * span / (NETWORK_HI - NETWORK_LO)
        return np.where(span > 0, out, lo)

    def normalize_deltas(self, deltas: np.ndarray) -> np.ndarray:
        return self._affine(deltas, self.delta_lo, self.delta_hi)

    def denormalize_deltas(self, rows: np.ndarray) -> np.ndarray:
        return self._inverse(rows, self.delta_lo, self.delta_hi)

    def normalize_init(self, init: np.ndarray) -> np.ndarray:
        return self._affine(init, self.init_lo, self.init_hi)

    def denormalize_init(self, row: np.ndarray) -> np.ndarray:
        return self._inverse(row, self.init_lo, self.init_hi)


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train: list[str]
    test: list[str]


def load_label_map(path) -> dict[str, str]:
    """Read the shape -> concept CSV."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"label map not found: {path}")
    mapping: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["shape", "concept"]:
            raise ConfigError(f"{path}: expected header 'shape,concept'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or not row[0].strip() or not row[1].strip():
                raise ConfigError(f"{path}:{line_no}: malformed label row {row}")
            shape = row[0].strip()
            if shape in mapping:
                raise ConfigError(f"{path}:{line_no}: duplicate shape {shape}")
            mapping[shape] = row[1].strip()
    if not mapping:
        raise ConfigError(f"{path}: empty label map")
    return mapping


def load_corpus(path, label_map: dict[str, str]) -> list[Trajectory]:
    """Load every demonstration of every shape named in the label map."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    trajectories: list[Trajectory] = []
    for shape in sorted(label_map):
        fpath = root / f"{shape}.csv"
        if not fpath.exists():
            raise CorpusError(f"missing corpus file for shape '{shape}': {fpath}")
        trajectories.extend(_read_shape_file(fpath, shape))
    return trajectories


def _read_shape_file(fpath: Path, shape: str) -> list[Trajectory]:
    demos: dict[int, list[tuple[float, float]]] = {}
    prev_key = None
    with open(fpath, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["demo", "t", "y", "z"]:
            raise CorpusParseError(fpath, 1, "expected header 'demo,t,y,z'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise CorpusParseError(fpath, line_no, f"expected 4 fields, got {len(row)}")
            try:
                demo = int(row[0])
                t = float(row[1])
                y = float(row[2])
                z = float(row[3])
            except ValueError as exc:
                raise CorpusParseError(fpath, line_no, f"non-numeric field: {exc}") from exc
            if not (np.isfinite(t) and np.isfinite(y) and np.isfinite(z)):
                raise CorpusParseError(fpath, line_no, "non-finite value")
            key = (demo, t)
            if prev_key is not None and key < prev_key:
                raise CorpusParseError(fpath, line_no, "rows not sorted by (demo, t)")
            prev_key = key
            demos.setdefault(demo, []).append((y, z))
    if not demos:
        raise CorpusError(f"{fpath}: no demonstrations")
    out = []
    for demo in sorted(demos):
        pts = np.asarray(demos[demo], dtype=float)
        if len(pts) < 2:
            raise CorpusError(f"{fpath}: demo {demo} has fewer than 2 points")
        out.append(Trajectory(shape_name=shape, demo_index=demo, points=pts))
    return out


def write_shape_csv(fpath, demos: list[np.ndarray]):
    """Write trajectories in the interchange format (used by corpus generators)."""
    with open(fpath, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["demo", "t", "y", "z"])
        for demo_idx, pts in enumerate(demos):
            for t, (y, z) in enumerate(pts):
                writer.writerow([demo_idx, t, repr(float(y)), repr(float(z))])


def smooth_path(points: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with shrinking windows at the edges."""
    if window <= 1:
        return points.astype(float, copy=True)
    n = len(points)
    half_lo = (window - 1) // 2
    half_hi = window // 2
    csum = np.vstack([np.zeros((1, points.shape[1])), np.cumsum(points, axis=0)])
    idx = np.arange(n)
    lo = np.maximum(idx - half_lo, 0)
    hi = np.minimum(idx + half_hi + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)[:, None]


def resample_arclength(points: np.ndarray, num_points: int) -> np.ndarray:
    """Uniform arc-length resampling; zero-length segments are dropped first."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 0.0])
    pts = points[keep]
    if len(pts) < 2:
        raise DegenerateInputError("trajectory has no spatial extent")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, s[-1], num_points)
    return np.column_stack([np.interp(targets, s, pts[:, 0]), np.interp(targets, s, pts[:, 1])])


def fit_to_workspace(points: np.ndarray, rect: WorkspaceRect) -> np.ndarray:
    """Isotropic scale + translate so the bounding box sits centered in the rect."""
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    extent = hi - lo
    scales = []
    if extent[0] > 0:
        scales.append(rect.width / extent[0])
    if extent[1] > 0:
        scales.append(rect.height / extent[1])
    if not scales:
        raise DegenerateInputError("path bounding box is a point")
    scale = min(scales)
    center = 0.5 * (lo + hi)
    return (points - center) * scale + np.asarray(rect.center)


def preprocess(
    traj: Trajectory,
    cfg: PreprocessConfig,
    arm_cfg: ArmConfig,
    rect: WorkspaceRect,
    concept_label: str,
) -> ProcessedDemo:
    """Run the geometric pipeline on one raw trajectory."""
    smoothed = smooth_path(traj.points, cfg.smooth_window)
    resampled = resample_arclength(smoothed, cfg.resample_len)
    fitted = fit_to_workspace(resampled, rect)
    arm = ArmModel(arm_cfg)
    joints = trajectory_ik(arm, fitted)
    initial_info = np.concatenate([fitted[0], joints[0]])
    deltas = np.hstack([np.diff(fitted, axis=0), np.diff(joints, axis=0)])
    if not np.all(np.isfinite(deltas)):
        raise DegenerateInputError(f"{traj.demo_id}: non-finite values after preprocessing")
    return ProcessedDemo(
        shape_name=traj.shape_name,
        demo_index=traj.demo_index,
        concept_label=concept_label,
        initial_info=initial_info,
        deltas=deltas,
    )


def preprocess_corpus(
    trajectories: list[Trajectory],
    label_map: dict[str, str],
    cfg: PreprocessConfig,
    arm_cfg: ArmConfig,
    rect: WorkspaceRect,
) -> tuple[list[ProcessedDemo], NormalizationStats]:
    demos = [
        preprocess(t, cfg, arm_cfg, rect, label_map[t.shape_name]) for t in trajectories
    ]
    return demos, compute_normalization(demos)


def compute_normalization(demos: list[ProcessedDemo]) -> NormalizationStats:
    if not demos:
        raise ConfigError("cannot compute normalization of an empty corpus")
    all_deltas = np.vstack([d.deltas for d in demos])
    all_inits = np.vstack([d.initial_info for d in demos])
    return NormalizationStats(
        delta_lo=all_deltas.min(axis=0),
        delta_hi=all_deltas.max(axis=0),
        init_lo=all_inits.min(axis=0),
        init_hi=all_inits.max(axis=0),
    )


def network_sequence(demo: ProcessedDemo, stats: NormalizationStats) -> np.ndarray:
    """Sequence matrix fed to the network: normalized start row plus delta rows.

    Row 0 is the normalized absolute start configuration; rows 1..num_steps are
    the normalized channel deltas. A matrix of R rows yields R-1 prediction
    targets, so the whole delta sequence is reproducible from row 0 alone.
    """
    top = stats.normalize_init(demo.initial_info)[None, :]
    body = stats.normalize_deltas(demo.deltas)
    return np.vstack([top, body])


def reconstruct_path(initial_info: np.ndarray, deltas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative-sum reconstruction of absolute positions and joint angles."""
    start_pos = initial_info[:2]
    start_q = initial_info[2:]
    pos = np.vstack([start_pos, start_pos + np.cumsum(deltas[:, :2], axis=0)])
    q = np.vstack([start_q, start_q + np.cumsum(deltas[:, 2:], axis=0)])
    return pos, q


def make_folds(corpus, seed) -> list[FoldSplit]:
    """Per shape, shuffle demos with the seeded generator and split into 5 parts."""
    by_shape: dict[str, list] = {}
    for item in corpus:
        by_shape.setdefault(item.shape_name, []).append(item.demo_id)
    rng = np.random.default_rng(seed)
    partitions: dict[str, list[list[str]]] = {}
    for shape in sorted(by_shape):
        ids = sorted(by_shape[shape], key=lambda d: int(d.rsplit("/", 1)[1]))
        if len(ids) < 5:
            raise ConfigError(f"shape {shape} has {len(ids)} demos; five-fold split needs >= 5")
        perm = [ids[i] for i in rng.permutation(len(ids))]
        partitions[shape] = [list(part) for part in np.array_split(perm, 5)]
    folds = []
    for k in range(5):
        train = sorted(d for shape in partitions for d in partitions[shape][k])
        test = sorted(
            d for shape in partitions for j in range(5) if j != k for d in partitions[shape][j]
        )
        folds.append(FoldSplit(fold_index=k, train=train, test=test))
    return folds


def dump_folds(folds: list[FoldSplit]) -> str:
    payload = [
        {"fold_index": f.fold_index, "train": f.train, "test": f.test} for f in folds
    ]
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def save_processed_corpus(path, demos: list[ProcessedDemo], stats: NormalizationStats,
                          cfg: PreprocessConfig):
    """Cache the processed corpus; all demos share one resample length."""
    steps = {d.num_steps for d in demos}
    if len(steps) != 1:
        raise ConfigError("cache requires a uniform number of steps per demo")
    meta = {
        "preprocess": {"smooth_window": cfg.smooth_window, "resample_len": cfg.resample_len},
        "demos": [
            {"shape": d.shape_name, "demo_index": d.demo_index, "concept": d.concept_label}
            for d in demos
        ],
    }
    arrays = [
        ("deltas", np.stack([d.deltas for d in demos])),
        ("initial_info", np.stack([d.initial_info for d in demos])),
        ("delta_lo", stats.delta_lo), ("delta_hi", stats.delta_hi),
        ("init_lo", stats.init_lo), ("init_hi", stats.init_hi),
    ]
    write_container(path, CACHE_FORMAT, CACHE_VERSION, meta, arrays)


def load_processed_corpus(path) -> tuple[list[ProcessedDemo], NormalizationStats, PreprocessConfig]:
    meta, arrays = read_container(path, CACHE_FORMAT, CACHE_VERSION)
    demos = [
        ProcessedDemo(
            shape_name=rec["shape"],
            demo_index=rec["demo_index"],
            concept_label=rec["concept"],
            initial_info=arrays["initial_info"][i],
            deltas=arrays["deltas"][i],
        )
        for i, rec in enumerate(meta["demos"])
    ]
    stats = NormalizationStats(
        delta_lo=arrays["delta_lo"], delta_hi=arrays["delta_hi"],
        init_lo=arrays["init_lo"], init_hi=arrays["init_hi"],
    )
    pp = PreprocessConfig(**meta["preprocess"])
    return demos, stats, pp
