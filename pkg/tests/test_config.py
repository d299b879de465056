import json
import logging

import pytest

from src.core.config import RunConfig, apply_overrides, config_digest, load_config, parse_override
from src.core.consts import CONFIGS_DIR
from src.core.errors import ConfigError
from src.core.logs import LOG_LEVEL_ENV, log_level_from_env, setup_logging


def write_config(tmp_path, payload) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_default_config_loads():
    config = load_config()
    assert config.prompts.n_prompts == 10
    assert config.orchestrator.fusion == "dual"


@pytest.mark.parametrize("name", ["default.json", "smoke.json"])
def test_shipped_configs_validate(name):
    config = load_config(CONFIGS_DIR / name)
    assert config.env.image_size % config.encoder.patch_size == 0


def test_parse_override_values():
    assert parse_override("ppo.clip=0.1") == (["ppo", "clip"], 0.1)
    assert parse_override("orchestrator.fusion=average") == (["orchestrator", "fusion"], "average")
    assert parse_override('ablation.seeds=[0, 1]') == (["ablation", "seeds"], [0, 1])
    assert parse_override("a=b=c") == (["a"], "b=c")


@pytest.mark.parametrize("item", ["no_equals", "=3", "..=1"])
def test_parse_override_rejects(item):
    with pytest.raises(ConfigError):
        parse_override(item)


def test_apply_overrides_nested():
    data = {"ppo": {"clip": 0.2}}
    apply_overrides(data, ["ppo.clip=0.3", "loss.sigma=0"])
    assert data == {"ppo": {"clip": 0.3}, "loss": {"sigma": 0}}


def test_apply_overrides_into_scalar():
    with pytest.raises(ConfigError):
        apply_overrides({"seed": 1}, ["seed.value=2"])


def test_load_config_overrides_seed_and_out(tmp_path):
    path = write_config(tmp_path, {"seed": 1, "ppo": {"clip": 0.2}})
    config = load_config(path, ["ppo.clip=0.25"], seed=9, out_dir=str(tmp_path / "out"))
    assert config.seed == 9
    assert config.ppo.clip == 0.25
    assert config.out_path == tmp_path / "out"


def test_unknown_key_is_config_error(tmp_path):
    path = write_config(tmp_path, {})
    with pytest.raises(ConfigError):
        load_config(path, ["ppo.cliip=0.1"])


def test_out_of_range_is_config_error(tmp_path):
    path = write_config(tmp_path, {"prompts": {"n_prompts": 13}})
    with pytest.raises(ConfigError):
        load_config(path)


def test_patch_divisibility(tmp_path):
    path = write_config(tmp_path, {"env": {"image_size": 20}, "encoder": {"patch_size": 8}})
    with pytest.raises(ConfigError, match="divisible"):
        load_config(path)


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(tmp_path / "nope.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(broken)


def test_digest_ignores_out_dir():
    a = RunConfig(out_dir="a")
    b = RunConfig(out_dir="b")
    assert config_digest(a) == config_digest(b)
    assert config_digest(a) != config_digest(RunConfig(out_dir="a", seed=1))
    assert len(config_digest(a)) == 64


def test_log_level_env(monkeypatch):
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
    assert log_level_from_env() == logging.INFO
    monkeypatch.setenv(LOG_LEVEL_ENV, "DEBUG")
    assert log_level_from_env() == logging.DEBUG
    monkeypatch.setenv(LOG_LEVEL_ENV, "loud")
    with pytest.raises(ConfigError):
        log_level_from_env()


def test_setup_logging_writes_command_file(tmp_path):
    path = setup_logging(tmp_path, "collect", level=logging.INFO)
    logging.info("hello from the test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert path == tmp_path / "logs" / "collect.logs"
    assert "hello from the test" in path.read_text(encoding="utf-8")
    logging.basicConfig(force=True, level=logging.WARNING)
