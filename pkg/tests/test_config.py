"""Config loading, validation and INI round-trips."""

import dataclasses

import pytest

from conceptlearn.config import (
    ArmConfig,
    EngineParams,
    NetConfig,
    PreprocessConfig,
    RunConfig,
    WorkspaceRect,
    dump_config,
    load_config,
)
from conceptlearn.errors import ConfigError


def test_defaults_validate():
    RunConfig().validate()


def test_roundtrip_through_ini(tmp_path):
    cfg = RunConfig(
        seed=123,
        out_dir="out/x",
        net=NetConfig(hidden_dim=20, target_mse=5e-4, feedback_blend=0.7),
        engine=EngineParams(k_cutoff=0.7, num_threshold=4),
    )
    p = tmp_path / "run.ini"
    p.write_text(dump_config(cfg))
    assert load_config(p) == cfg


def test_partial_file_uses_defaults(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[run]\nseed = 9\n\n[network]\nhidden_dim = 33\n")
    cfg = load_config(p)
    assert cfg.seed == 9
    assert cfg.net.hidden_dim == 33
    assert cfg.net.momentum == NetConfig().momentum
    assert cfg.engine == EngineParams()


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


def test_unknown_section_rejected(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[runn]\nseed = 1\n")
    with pytest.raises(ConfigError, match="unknown config sections"):
        load_config(p)


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[network]\nhidden_units = 60\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(p)


def test_malformed_ini(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("not an ini file at all\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(p)


@pytest.mark.parametrize(
    "field,value",
    [
        ("momentum", 1.0),
        ("momentum", -0.1),
        ("feedback_blend", 1.5),
        ("blend_ramp_epochs", -1),
        ("target_mse", 0.0),
        ("learn_rate_w", -2.0),
        ("hidden_dim", 0),
    ],
)
def test_net_validation(field, value):
    cfg = dataclasses.replace(NetConfig(), **{field: value})
    with pytest.raises(ConfigError):
        cfg.validate()


def test_engine_validation():
    with pytest.raises(ConfigError):
        EngineParams(similarity_threshold=0.0).validate()


def test_workspace_validation():
    with pytest.raises(ConfigError):
        WorkspaceRect(y_min=1.0, y_max=0.5).validate()


def test_arm_reach_check():
    # a 20 cm arm cannot cover the default 40 cm wide workspace
    tiny = ArmConfig(link_lengths=(0.05, 0.05, 0.05, 0.05))
    with pytest.raises(ConfigError, match="reach"):
        tiny.validate(WorkspaceRect())


def test_arm_inner_disk_check():
    lopsided = ArmConfig(link_lengths=(2.0, 0.1, 0.1, 0.1))
    with pytest.raises(ConfigError):
        lopsided.validate(WorkspaceRect())


def test_workspace_geometry():
    rect = WorkspaceRect(y_min=0.0, y_max=4.0, z_min=0.0, z_max=3.0)
    assert rect.width == 4.0
    assert rect.height == 3.0
    assert rect.center == (2.0, 1.5)
    assert rect.diagonal == pytest.approx(5.0)


def test_workers_validation():
    with pytest.raises(ConfigError):
        RunConfig(workers=0).validate()


def test_arm_ini_roundtrip(tmp_path):
    cfg = RunConfig(
        arm=ArmConfig(
            link_lengths=(0.35, 0.25, 0.2, 0.15),
            base_y=0.01,
            joint_limits=tuple((-2.0, 2.0) for _ in range(4)),
        )
    )
    p = tmp_path / "run.ini"
    p.write_text(dump_config(cfg))
    assert load_config(p).arm == cfg.arm
