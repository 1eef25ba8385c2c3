from pathlib import Path

import pytest

from rfbm_lab.config import ConfigError, ProbeConfig, load_config, parse_config


def test_config_unknown_key_raises(tmp_path: Path) -> None:
    cfg = tmp_path / "rfbm_lab.yaml"
    cfg.write_text(
        """
version: 1
unknown_key: true
grid:
  n: 64
""".strip()
        + "\n",
        encoding="utf-8",
    )

    with pytest.raises(ConfigError, match="unknown_key"):
        load_config(cfg)


def test_nested_unknown_key_names_its_section() -> None:
    with pytest.raises(ConfigError, match="mc has unknown keys: workers"):
        parse_config({"mc": {"workers": 4}})


def test_builtin_defaults_match_repository_preset() -> None:
    assert load_config() == load_config(Path("rfbm_lab.yaml"))


def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")


def test_invalid_yaml_is_a_config_error(tmp_path: Path) -> None:
    cfg = tmp_path / "broken.yaml"
    cfg.write_text("grid: [n: 1\n", encoding="utf-8")

    with pytest.raises(ConfigError, match="Invalid config document"):
        load_config(cfg)


@pytest.mark.parametrize(
    ("raw", "match"),
    [
        ({"version": 2}, "unsupported config version"),
        ({"grid": {"n": 1}}, "grid.n must be >= 2"),
        ({"grid": {"n": 8.5}}, "grid.n must be an integer"),
        ({"grid": {"horizon": 0}}, "grid.horizon must be > 0"),
        ({"mc": {"threads": 33}}, "between 1 and 32"),
        ({"mc": {"seed": -1}}, "mc.seed must be >= 0"),
        ({"mc": {"n_paths": True}}, "mc.n_paths must be an integer"),
        ({"function": {"kind": "fractal"}}, "function.kind must be one of"),
        ({"function": {"kind": "constant", "h0": 1.2}}, "function:"),
        ({"function": {"kind": "sinusoidal-time", "amplitude": 0.6}}, "function:"),
        ({"probe": {"interval": [1.0, 0.0]}}, "lo <= hi"),
        ({"probe": {"interval": [0.0]}}, "two-element list"),
        ({"probe": {"x": 0.0}}, "probe.x must be > 0"),
        ({"probe": {"decades": 0}}, "probe.decades must be >= 1"),
        ({"output": {"format": "xml"}}, "output.format"),
        ({"output": {"timings": "yes"}}, "output.timings must be a boolean"),
        ({"grid": []}, "grid must be a mapping"),
    ],
)
def test_invalid_values_are_rejected(raw: dict, match: str) -> None:
    with pytest.raises(ConfigError, match=match):
        parse_config(raw)


def test_interval_nulls_are_infinite_ends() -> None:
    config = parse_config({"probe": {"interval": [None, 0.5]}})

    assert config.probe.interval == (None, 0.5)
    assert config.probe.interval_bounds == (float("-inf"), 0.5)
    assert ProbeConfig().interval_bounds == (0.0, float("inf"))


def test_to_dict_round_trips() -> None:
    config = parse_config(
        {
            "function": {"kind": "example61", "h_min": 0.4, "h_max": 0.6},
            "grid": {"n": 64, "horizon": 0.5},
            "mc": {"n_paths": 100, "seed": 9, "threads": 2},
            "probe": {"interval": [-1.0, None]},
            "output": {"format": "csv", "timings": True},
        }
    )

    assert parse_config(config.to_dict()) == config
    assert config.to_dict()["probe"]["interval"] == [-1.0, None]


def test_function_spec_builds_each_family() -> None:
    for kind in ("constant", "sinusoidal-time", "linear-time", "example61", "tanh-spatial"):
        spec = parse_config({"function": {"kind": kind}}).function
        assert spec.response().h_min <= spec.response().h_max
        assert 0.0 < float(spec.hurst()(0.5)) < 1.0
    assert parse_config({"function": {"kind": "tanh-spatial"}}).function.response().l_h > 0.0
