import pytest

from protcogen.config import Config, ConfigError, config_from_dict, load_config
from protcogen.flowmatch import Exponential, Linear


def test_defaults_match_constants():
    c = load_config()
    s = c.sampler
    assert (s.steps, s.activation, s.rot_schedule, s.trans_std, s.binding_offset) == (100, 0.8, Exponential(10.0), 10.0, 1.0)
    d = s.decode
    assert (d.T_max, d.lam, d.argmax_threshold, d.blend_threshold, d.blend_weights) == (30, 30, 0.85, 0.8, (0.8, 0.2))
    p = c.curation
    assert (p.min_chain_len, p.max_total_len, p.swissprot_plddt, p.afdb_plddt) == (30, 2048, 85, 95)
    assert (c.crop.max_residues, c.crop.cutoff) == (384, 8.0)
    assert (c.losses.fape.clamp, c.losses.fape.length_scale, c.losses.consistency.coefficient) == (10, 10, 0.00054)
    assert c.histogram_bins == 72
    assert config_from_dict({}) == Config()


def test_yaml_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(
        "sampler:\n  steps: 20\n  activation: 1.0\n  rotation_schedule: {kind: linear}\n"
        "  decode: {lambda: 5}\ncrop: {max_residues: 100}\nhistogram: {bins: 36}\n"
        "curation: {excluded_ids: [1abc]}\n"
    )
    c = load_config(path)
    assert c.sampler.steps == 20 and c.sampler.activation == 1.0
    assert c.sampler.rot_schedule == Linear()
    assert c.sampler.decode.lam == 5.0
    assert c.crop.max_residues == 100 and c.histogram_bins == 36
    assert c.curation.excluded_ids == frozenset({"1abc"})


@pytest.mark.parametrize(
    "data",
    [
        {"sampler": {"stepz": 3}},
        {"bogus": {}},
        {"sampler": {"steps": 1}},
        {"sampler": {"activation": 2}},
        {"sampler": {"rotation_schedule": {"kind": "cubic"}}},
        {"sampler": {"rotation_schedule": {"kind": "exponential", "c": -1}}},
        {"sampler": {"decode": {"blend_weights": [0.5, 0.6]}}},
        {"crop": {"max_residues": 0}},
        {"losses": {"fm_time": 1.0}},
        {"histogram": {"bins": 1}},
        {"crop": "nope"},
        ["not", "a", "mapping"],
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("sampler: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)
