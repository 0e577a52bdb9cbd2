"""Run configuration: dataclasses plus INI-file loading/saving.

A run is fully described by one flat INI file (section per subsystem).
The CLI copies the resolved config into every output directory so runs
stay reproducible.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class PreprocessConfig:
    smooth_window: int = 5
    resample_len: int = 50

    def validate(self):
        if self.smooth_window < 1:
            raise ConfigError("smooth_window must be >= 1")
        if self.resample_len < 3:
            raise ConfigError("resample_len must be >= 3")


@dataclass(frozen=True)
class NetConfig:
    io_dim: int = 6
    pb_dim: int = 4
    context_dim: int = 25
    hidden_dim: int = 60
    learn_rate_w: float = 2.0
    learn_rate_pb: float = 5.0
    momentum: float = 0.9
    feedback_blend: float = 0.6
    blend_ramp_epochs: int = 1500
    max_epochs: int = 8000
    target_mse: float = 1e-3
    recog_iters: int = 300
    recog_blend: float = 0.4
    train_restarts: int = 2
    rng_seed: int = 0

    def validate(self):
        for name in ("io_dim", "pb_dim", "context_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.learn_rate_w < 0 or self.learn_rate_pb < 0:
            raise ConfigError("learning rates must be nonnegative")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        if not 0.0 <= self.feedback_blend <= 1.0:
            raise ConfigError("feedback_blend must be in [0, 1]")
        if not 0.0 <= self.recog_blend <= 1.0:
            raise ConfigError("recog_blend must be in [0, 1]")
        if self.blend_ramp_epochs < 0:
            raise ConfigError("blend_ramp_epochs must be nonnegative")
        if self.target_mse <= 0:
            raise ConfigError("target_mse must be positive")
        if self.max_epochs < 0 or self.recog_iters < 0:
            raise ConfigError("max_epochs and recog_iters must be nonnegative")
        if self.train_restarts < 0:
            raise ConfigError("train_restarts must be nonnegative")


@dataclass(frozen=True)
class EngineParams:
    k_cutoff: float = 0.5
    num_threshold: int = 3
    similarity_threshold: float = 0.1

    def validate(self):
        if self.k_cutoff <= 0 or self.num_threshold <= 0 or self.similarity_threshold <= 0:
            raise ConfigError("engine parameters must be positive")


@dataclass(frozen=True)
class WorkspaceRect:
    y_min: float = 0.25
    y_max: float = 0.65
    z_min: float = -0.20
    z_max: float = 0.20

    @property
    def width(self) -> float:
        return self.y_max - self.y_min

    @property
    def height(self) -> float:
        return self.z_max - self.z_min

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.y_min + self.y_max), 0.5 * (self.z_min + self.z_max))

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def validate(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("workspace rectangle must have positive extent")


@dataclass(frozen=True)
class ArmConfig:
    link_lengths: tuple[float, float, float, float] = (0.30, 0.26, 0.22, 0.16)
    base_y: float = 0.0
    base_z: float = 0.0
    joint_limits: tuple[tuple[float, float], ...] = (
        (-math.pi, math.pi),
        (-math.pi, math.pi),
        (-math.pi, math.pi),
        (-math.pi, math.pi),
    )

    def validate(self, rect: WorkspaceRect):
        if len(self.link_lengths) != 4 or any(l <= 0 for l in self.link_lengths):
            raise ConfigError("arm needs 4 positive link lengths")
        # full reachability: farthest workspace corner inside the reach disk
        reach = sum(self.link_lengths)
        corners = [
            (rect.y_min, rect.z_min), (rect.y_min, rect.z_max),
            (rect.y_max, rect.z_min), (rect.y_max, rect.z_max),
        ]
        far = max(math.hypot(y - self.base_y, z - self.base_z) for y, z in corners)
        if far >= reach:
            raise ConfigError(
                f"workspace corner at distance {far:.3f} exceeds arm reach {reach:.3f}"
            )
        if max(self.link_lengths) > sum(self.link_lengths) - max(self.link_lengths):
            raise ConfigError("longest link exceeds the sum of the others; inner disk unreachable")


@dataclass(frozen=True)
class RunConfig:
    corpus_dir: str = "data/lasa"
    label_map: str = "data/concepts.csv"
    out_dir: str = "out"
    seed: int = 7
    workers: int = 1
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    net: NetConfig = field(default_factory=NetConfig)
    engine: EngineParams = field(default_factory=EngineParams)
    workspace: WorkspaceRect = field(default_factory=WorkspaceRect)
    arm: ArmConfig = field(default_factory=ArmConfig)

    def validate(self):
        self.preprocess.validate()
        self.net.validate()
        self.engine.validate()
        self.workspace.validate()
        self.arm.validate(self.workspace)
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _coerce(value: str, target_type):
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def _read_section(parser, name, cls):
    kwargs = {}
    if parser.has_section(name):
        known = {f.name: f.type for f in fields(cls)}
        for key, raw in parser.items(name):
            if key not in known:
                raise ConfigError(f"unknown key [{name}] {key}")
            default = getattr(cls(), key)
            kwargs[key] = _coerce(raw, type(default))
    return cls(**kwargs)


def load_config(path) -> RunConfig:
    """Parse an INI run config; unknown sections or keys are rejected."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    allowed = {"run", "preprocess", "network", "engine", "workspace", "arm"}
    unknown = set(parser.sections()) - allowed
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    run_kwargs = {}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key in ("corpus_dir", "label_map", "out_dir"):
                run_kwargs[key] = raw
            elif key in ("seed", "workers"):
                run_kwargs[key] = int(raw)
            else:
                raise ConfigError(f"unknown key [run] {key}")

    arm_kwargs = {}
    if parser.has_section("arm"):
        for key, raw in parser.items("arm"):
            if key == "link_lengths":
                arm_kwargs[key] = tuple(float(v) for v in raw.split(","))
            elif key in ("base_y", "base_z"):
                arm_kwargs[key] = float(raw)
            elif key == "joint_limits":
                vals = [float(v) for v in raw.split(",")]
                if len(vals) != 8:
                    raise ConfigError("joint_limits needs 8 comma-separated values")
                arm_kwargs[key] = tuple((vals[i], vals[i + 1]) for i in range(0, 8, 2))
            else:
                raise ConfigError(f"unknown key [arm] {key}")

    cfg = RunConfig(
        **run_kwargs,
        preprocess=_read_section(parser, "preprocess", PreprocessConfig),
        net=_read_section(parser, "network", NetConfig),
        engine=_read_section(parser, "engine", EngineParams),
        workspace=_read_section(parser, "workspace", WorkspaceRect),
        arm=ArmConfig(**arm_kwargs),
    )
    cfg.validate()
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Render a RunConfig back to INI text (used for the per-run config copy)."""
    parser = configparser.ConfigParser()
    parser["run"] = {
        "corpus_dir": cfg.corpus_dir,
        "label_map": cfg.label_map,
        "out_dir": cfg.out_dir,
        "seed": repr(cfg.seed),
        "workers": repr(cfg.workers),
    }
    parser["preprocess"] = {f.name: repr(getattr(cfg.preprocess, f.name))
                            for f in fields(PreprocessConfig)}
    parser["network"] = {f.name: repr(getattr(cfg.net, f.name)) for f in fields(NetConfig)}
    parser["engine"] = {f.name: repr(getattr(cfg.engine, f.name)) for f in fields(EngineParams)}
    parser["workspace"] = {f.name: repr(getattr(cfg.workspace, f.name))
                           for f in fields(WorkspaceRect)}
    parser["arm"] = {
        "link_lengths": ",".join(repr(l) for l in cfg.arm.link_lengths),
        "base_y": repr(cfg.arm.base_y),
        "base_z": repr(cfg.arm.base_z),
        "joint_limits": ",".join(repr(v) for lim in cfg.arm.joint_limits for v in lim),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
