"""Configuration loading, validation, and backend construction."""

import pytest

from wayfinder.backends import EastBackend, RemoteBackend, StubBackend, VqaBackend
from wayfinder.backends.remote import API_KEY_ENV_VAR
from wayfinder.errors import ConfigError
from wayfinder.gateway.config import GatewayConfig, config_from_dict, load_config, make_backend
from wayfinder.interpreter import SignClass

GOOD_SCRIPT = '{"1": {"text_regions": [], "vqa_answers": []}}'


def test_defaults_are_sane():
    cfg = config_from_dict({})
    assert cfg.backend == "stub"
    assert cfg.units == "feet"
    assert cfg.dedup_window_ms == 5000.0
    assert cfg.min_utterance_gap_ms == 2000.0
    assert cfg.session_timeout_ms == 15000.0
    assert cfg.reconnect_window_ms == 60000.0


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown keys.*bakend"):
        config_from_dict({"bakend": "stub"})


def test_unknown_table_key_rejected():
    with pytest.raises(ConfigError, match=r"\[stub\].*unknown"):
        config_from_dict({"stub": {"script": "x", "extra": 1}})


def test_bad_units_rejected():
    with pytest.raises(ConfigError, match="units"):
        config_from_dict({"units": "furlongs"})


def test_timeout_must_cover_two_heartbeats():
    with pytest.raises(ConfigError, match="twice"):
        config_from_dict({"heartbeat_interval_ms": 9000, "session_timeout_ms": 15000})


def test_nonpositive_interval_rejected():
    with pytest.raises(ConfigError, match="positive"):
        config_from_dict({"dedup_window_ms": 0})


def test_calibration_table_parsed():
    cfg = config_from_dict(
        {
            "calibration": {
                "focal_length_px": 600,
                "real_heights_m": {"EXIT_DOOR": 0.19, "STAIRS": 0.15},
            }
        }
    )
    assert cfg.calibration.focal_length_px == 600.0
    assert cfg.calibration.real_heights_m[SignClass.STAIRS] == 0.15


def test_calibration_unknown_class_rejected():
    with pytest.raises(ConfigError, match="unknown sign class"):
        config_from_dict({"calibration": {"real_heights_m": {"EXIT_SIGN": 0.2}}})


def test_env_var_overrides_file_api_key(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV_VAR, "from-env")
    cfg = config_from_dict(
        {"backend": "remote", "remote": {"url": "http://x", "api_key": "from-file"}}
    )
    assert cfg.remote_api_key == "from-env"


def test_file_api_key_used_when_env_is_unset(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV_VAR, raising=False)
    cfg = config_from_dict(
        {"backend": "remote", "remote": {"url": "http://x", "api_key": "from-file"}}
    )
    assert cfg.remote_api_key == "from-file"


def test_load_config_from_toml(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(GOOD_SCRIPT)
    path = tmp_path / "gw.toml"
    path.write_text(
        f"""
units = "meters"
backend = "stub"

[stub]
script = "{script}"

[vqa]
questions = ["Is this an exit sign?"]
"""
    )
    cfg = load_config(path)
    assert cfg.units == "meters"
    assert cfg.stub_script == str(script)
    assert cfg.vqa_questions == ("Is this an exit sign?",)


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="config"):
        load_config("/nonexistent/gw.toml")


def test_load_config_malformed_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("backend = [unclosed")
    with pytest.raises(ConfigError):
        load_config(path)


class TestMakeBackend:
    def test_stub_needs_script(self):
        with pytest.raises(ConfigError, match="script"):
            make_backend(GatewayConfig(backend="stub"))

    def test_stub_happy_path(self, tmp_path):
        script = tmp_path / "s.json"
        script.write_text(GOOD_SCRIPT)
        backend = make_backend(GatewayConfig(backend="stub", stub_script=str(script)))
        assert isinstance(backend, StubBackend)

    def test_east_needs_exactly_one_source(self, tmp_path):
        with pytest.raises(ConfigError, match="exactly one"):
            make_backend(GatewayConfig(backend="east"))
        with pytest.raises(ConfigError, match="exactly one"):
            make_backend(
                GatewayConfig(
                    backend="east",
                    east_sidecar_url="http://x",
                    east_fixture_dir=str(tmp_path),
                )
            )
        backend = make_backend(
            GatewayConfig(backend="east", east_fixture_dir=str(tmp_path))
        )
        assert isinstance(backend, EastBackend)

    def test_vqa_needs_url(self):
        with pytest.raises(ConfigError, match="sidecar_url"):
            make_backend(GatewayConfig(backend="vqa"))
        assert isinstance(
            make_backend(GatewayConfig(backend="vqa", vqa_sidecar_url="http://x")),
            VqaBackend,
        )

    def test_remote_needs_url_and_key(self, monkeypatch):
        monkeypatch.delenv(API_KEY_ENV_VAR, raising=False)
        with pytest.raises(ConfigError, match="url"):
            make_backend(GatewayConfig(backend="remote"))
        # the error must tell the operator which env var to set
        with pytest.raises(ConfigError, match=API_KEY_ENV_VAR):
            make_backend(GatewayConfig(backend="remote", remote_url="http://x"))
        backend = make_backend(
            GatewayConfig(backend="remote", remote_url="http://x", remote_api_key="k")
        )
        assert isinstance(backend, RemoteBackend)
