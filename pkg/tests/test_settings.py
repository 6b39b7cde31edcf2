import logging

import numpy as np
import pytest

import src.config as config
from src.cli.schemas import RunConfig, parse_overrides, parse_sizes
from src.config import BASE_DIR, get_settings, settings_override, thread_cap
from src.config.manager import SettingsManager
from src.config.settings import Settings
from src.core.errors import SpecSourceError
from src.core.lattice_model import build_coupling, build_separable, eta_chain_coefficients
from src.core.spec_loader import SpecLoader
from src.utils.logger import get_logger, set_level
from tests.helpers import DATA_DIR


@pytest.fixture
def fresh_settings_cache():
    config._load_settings.cache_clear()
    yield
    config._load_settings.cache_clear()


def test_yaml_matches_model_defaults():
    manager = SettingsManager(BASE_DIR / "config" / "settings.yaml")
    assert manager.settings() == Settings()
    assert manager.raw["tolerances"]["positivity"] == 1e-12
    assert manager.raw["scaling"]["szego_order"] == 200


def test_missing_settings_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        SettingsManager(tmp_path / "absent.yaml")


def test_invalid_settings_files(tmp_path):
    broken = tmp_path / "broken.yaml"
    broken.write_text("tolerances: [unclosed\n", encoding="utf-8")
    with pytest.raises(ValueError):
        SettingsManager(broken)

    wrong = tmp_path / "wrong.yaml"
    wrong.write_text("kernel:\n  backend: lanczos\n", encoding="utf-8")
    with pytest.raises(ValueError):
        SettingsManager(wrong).settings()


def test_environment_selects_settings_file(tmp_path, monkeypatch, fresh_settings_cache):
    path = tmp_path / "dense.yaml"
    path.write_text("kernel:\n  backend: dense\nlimits:\n  dense_cap: 512\n", encoding="utf-8")
    monkeypatch.setenv("HARM_ENT_SETTINGS", str(path))
    settings = get_settings()
    assert settings.kernel.backend == "dense"
    assert settings.limits.dense_cap == 512
    assert settings.tolerances == Settings().tolerances


def test_with_overrides():
    base = Settings()
    changed = base.with_overrides({"mu_floor": "1e-8", "limits.dense_cap": 100})
    assert changed.tolerances.mu_floor == 1e-8
    assert changed.limits.dense_cap == 100
    assert base.tolerances.mu_floor == 1e-9
    with pytest.raises(KeyError):
        base.with_overrides({"no_such_tolerance": 1})
    with pytest.raises(KeyError):
        base.with_overrides({"limits.no_such_limit": 1})


def test_settings_override_is_scoped():
    before = get_settings()
    custom = Settings().with_overrides({"positivity": 1e-6})
    with settings_override(custom):
        assert get_settings() is custom
        with settings_override(Settings()):
            assert get_settings().tolerances.positivity == 1e-12
        assert get_settings() is custom
    assert get_settings() is before


def test_thread_cap(monkeypatch):
    monkeypatch.delenv("HARM_ENT_THREADS", raising=False)
    assert thread_cap() == 1
    monkeypatch.setenv("HARM_ENT_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("HARM_ENT_THREADS", "many")
    assert thread_cap() == 1


def test_parse_sizes():
    assert parse_sizes("2:8:2") == [2, 4, 6, 8]
    assert parse_sizes("3:5") == [3, 4, 5]
    for text in ("a:b", "5", "5:3", "0:4", "1:4:0", "1:2:3:4"):
        with pytest.raises(SpecSourceError):
            parse_sizes(text)


def test_parse_overrides():
    assert parse_overrides(["mu_floor=1e-8", " limits.dense_cap = 10 "]) == {
        "mu_floor": "1e-8",
        "limits.dense_cap": "10",
    }
    assert parse_overrides(None) == {}
    with pytest.raises(SpecSourceError):
        parse_overrides(["=3"])


def test_run_config_validation(tmp_path):
    with pytest.raises(SpecSourceError):
        RunConfig.build(command="report", eta=-1.0, n=64)
    with pytest.raises(SpecSourceError):
        RunConfig.build(command="report", eta=1.2, n=3)
    with pytest.raises(SpecSourceError):
        RunConfig.build(command="report", eta=1.2, n=64, spec_path=tmp_path / "x.json")


def test_config_hash_ignores_output_location(tmp_path):
    first = RunConfig.build(command="report", eta=1.2, n=64, out_dir=tmp_path / "a")
    second = RunConfig.build(command="report", eta=1.2, n=64, out_dir=tmp_path / "b")
    other = RunConfig.build(command="report", eta=1.6, n=64)
    assert first.config_hash() == second.config_hash()
    assert first.config_hash() != other.config_hash()
    assert len(first.config_hash()) == 12


def test_config_hash_covers_eta_list():
    single = RunConfig.build(command="fig1", etas=[1.2], n=64)
    pair = RunConfig.build(command="fig1", etas=[1.2, 1.6], n=64)
    assert single.config_hash() != pair.config_hash()
    with pytest.raises(SpecSourceError):
        RunConfig.build(command="fig1", etas=[-0.5], n=64)


def test_run_config_spec_sources():
    from_eta = RunConfig.build(command="report", eta=1.2, n=33)
    from_file = RunConfig.build(command="report", spec_path=DATA_DIR / "eta_chain_1.2.json")
    assert from_eta.spec().extents == (33,)
    assert from_file.spec().extents == (128,)
    assert from_file.spec_builder()(33).extents == (33,)
    assert np.allclose(from_file.spec_builder()(33).eigenvalues, from_eta.spec().eigenvalues)
    assert from_eta.size_list("4:6") == [4, 5, 6]
    with pytest.raises(SpecSourceError):
        RunConfig.build(command="widom").spec_builder()


def test_spec_loader_reads_bundled_documents():
    loader = SpecLoader()
    spec = loader.load(DATA_DIR / "eta_chain_1.2.json")
    reference = build_coupling(1, 128, eta_chain_coefficients(1.2))
    assert np.allclose(spec.eigenvalues, reference.eigenvalues)
    assert loader.load(DATA_DIR / "uncoupled.json", 16).n_sites == 16


def test_spec_loader_round_trip(tmp_path):
    chain = build_coupling(1, 12, eta_chain_coefficients(1.6))
    torus = build_separable([chain, chain], "sum")
    path = tmp_path / "torus.json"
    SpecLoader.save(torus, path)
    loader = SpecLoader()
    assert loader.load(path).fingerprint() == torus.fingerprint()
    assert loader.load(path, 20).extents == (20, 20)


def test_spec_loader_errors(tmp_path):
    loader = SpecLoader()
    with pytest.raises(FileNotFoundError):
        loader.load(tmp_path / "absent.json")

    bad_json = tmp_path / "bad.json"
    bad_json.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(SpecSourceError):
        loader.load(bad_json)

    bad_shape = tmp_path / "shape.json"
    bad_shape.write_text('{"dimension": 2, "extents": [8], "coefficients": []}', encoding="utf-8")
    with pytest.raises(SpecSourceError):
        loader.load(bad_shape)


def test_logger_is_configured_once():
    logger = get_logger("src.tests.probe")
    assert get_logger("src.tests.probe") is logger
    assert len(logger.handlers) == 1
    assert logger.propagate is False
    previous = logger.level
    try:
        set_level("debug")
        assert logger.level == logging.DEBUG
    finally:
        set_level(logging.getLevelName(previous))


def test_cli_falls_back_to_configured_log_level(tmp_path, monkeypatch, fresh_settings_cache):
    from typer.testing import CliRunner

    from src.cli.commands import app

    path = tmp_path / "quiet.yaml"
    path.write_text("logging:\n  level: WARNING\n", encoding="utf-8")
    monkeypatch.setenv("HARM_ENT_SETTINGS", str(path))
    monkeypatch.delenv("HARM_ENT_LOG_LEVEL", raising=False)
    try:
        result = CliRunner().invoke(app, ["classify", "--eta", "1.2", "--n", "64"])
        assert result.exit_code == 0, result.stderr
        assert logging.getLogger("src.cli.commands").level == logging.WARNING
    finally:
        set_level("INFO")
