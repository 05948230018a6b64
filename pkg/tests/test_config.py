"""Configuration and vocabulary-layout tests."""

import os

import pytest

from silkmesh import CodecConfig, Vocabulary, load_config, validate_config_dict
from silkmesh.config import CONFIG_ENV_VAR, between_pattern_count


def test_default_vocabulary_layout():
    v = Vocabulary.from_config(CodecConfig())
    assert v.C == 0 and v.U == 1 and v.E == 2
    assert v.block_base == 3 and v.block_count == 4096
    assert v.offset_base == 4099 and v.offset_count == 512
    assert v.self_base == 4611 and v.self_count == 456
    assert v.between_base == 5067 and v.between_count == 5200
    assert v.total == 10267


def test_pattern_count_table():
    # frozen against independent enumeration of admissible window patterns:
    # w + 1 single-run choices plus C(w + 1, 3) two-run choices
    import math

    assert [between_pattern_count(w) for w in range(1, 7)] == [2, 4, 8, 15, 26, 42]
    for w in range(1, 10):
        assert between_pattern_count(w) == w + 1 + math.comb(w + 1, 3)
    assert between_pattern_count(5) == 26


def test_self_table_size_formula():
    v = Vocabulary.from_config(CodecConfig())
    assert v.self_count == 2**8 + 200
    assert v.between_count == 200 * 26


def test_classify_covers_all_ranges():
    v = Vocabulary()
    assert v.classify(0) == "control"
    assert v.classify(3) == "block"
    assert v.classify(4098) == "block"
    assert v.classify(4099) == "offset"
    assert v.classify(4610) == "offset"
    assert v.classify(4611) == "self-window"
    assert v.classify(4611 + 255) == "self-window"
    assert v.classify(4611 + 256) == "self-extra"
    assert v.classify(5066) == "self-extra"
    assert v.classify(5067) == "between"
    assert v.classify(10266) == "between"
    assert v.classify(10267) == "invalid"
    assert v.classify(-1) == "invalid"


def test_config_validation():
    with pytest.raises(ValueError):
        CodecConfig(resolution=100)  # not a multiple of 8
    with pytest.raises(ValueError):
        CodecConfig(window=0)
    with pytest.raises(ValueError):
        validate_config_dict({"no_such_key": 1})
    cfg = validate_config_dict({"window": 4, "max_layer_width": 50})
    assert cfg.window == 4 and cfg.max_layer_width == 50


def test_with_overrides_skips_none():
    cfg = CodecConfig()
    assert cfg.with_overrides(window=None) == cfg
    assert cfg.with_overrides(window=4).window == 4


def test_load_config_from_env(tmp_path, monkeypatch):
    path = tmp_path / "codec.toml"
    path.write_text("[codec]\nwindow = 6\nmax_tokens = 5000\n")
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    cfg = load_config()
    assert cfg.window == 6 and cfg.max_tokens == 5000
    monkeypatch.delenv(CONFIG_ENV_VAR)
    assert load_config() == CodecConfig()


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("windw = 6\n")
    with pytest.raises(ValueError):
        load_config(str(path))
