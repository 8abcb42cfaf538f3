"""YAML configuration with every tunable constant and its default.

Example (all keys optional; shown values are the defaults)::

    sampler:
      steps: 100
      activation: 0.8
      rotation_schedule: {kind: exponential, c: 10.0}
      trans_std: 10.0
      seq_time_exponent: 1.0
      binding_offset: 1.0
      binding_window: [0.33, 0.66]
      decode:
        T_max: 30.0
        lambda: 30.0
        argmax_threshold: 0.85
        blend_threshold: 0.8
        blend_weights: [0.8, 0.2]
    curation:
      min_chain_len: 30
      max_total_len: 2048
      swissprot_plddt: 85.0
      afdb_plddt: 95.0
      require_cluster_id: true
      excluded_ids: []
    crop:
      max_residues: 384
      cutoff: 8.0
    losses:
      fape_clamp: 10.0
      fape_length_scale: 10.0
      consistency_coefficient: 0.00054
      consistency_delta_t: 0.01
      fm_time: 0.5
    histogram:
      bins: 72

Unknown sections or keys raise :class:`ConfigError`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import InvalidArgumentError
from .flowmatch import Exponential, Linear
from .losses import ConsistencyConfig, FapeConfig
from .proteinio.curation import CropSpec, CurationPolicy
from .sampler import SamplerConfig
from .seqflow import DecodeConfig


class ConfigError(InvalidArgumentError):
    pass


@dataclass(frozen=True)
class LossSettings:
    fape: FapeConfig = FapeConfig()
    consistency: ConsistencyConfig = ConsistencyConfig()
    fm_time: float = 0.5


@dataclass(frozen=True)
class Config:
    sampler: SamplerConfig = SamplerConfig()
    curation: CurationPolicy = CurationPolicy()
    crop: CropSpec = CropSpec()
    losses: LossSettings = LossSettings()
    histogram_bins: int = 72
    raw: dict = field(default_factory=dict, compare=False)


_SAMPLER_KEYS = {"steps", "activation", "rotation_schedule", "trans_std", "seq_time_exponent",
                 "binding_offset", "binding_window", "decode", "seed"}
_DECODE_KEYS = {"T_max", "lambda", "argmax_threshold", "blend_threshold", "blend_weights"}
_CURATION_KEYS = {"min_chain_len", "max_total_len", "swissprot_plddt", "afdb_plddt",
                  "require_cluster_id", "excluded_ids"}
_CROP_KEYS = {"max_residues", "cutoff"}
_LOSS_KEYS = {"fape_clamp", "fape_length_scale", "consistency_coefficient", "consistency_delta_t", "fm_time"}
_HIST_KEYS = {"bins"}
_SECTIONS = {"sampler", "curation", "crop", "losses", "histogram"}


def _section(data, name, allowed):
    sec = data.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(unknown))}")
    return sec


def _schedule(spec):
    if spec is None:
        return Exponential(10.0)
    if not isinstance(spec, dict) or set(spec) - {"kind", "c"}:
        raise ConfigError("rotation_schedule must be {kind: linear|exponential, c: float}")
    kind = str(spec.get("kind", "exponential")).lower()
    if kind == "linear":
        return Linear()
    if kind == "exponential":
        return Exponential(float(spec.get("c", 10.0)))
    raise ConfigError(f"unknown rotation schedule {kind!r}")


def config_from_dict(data):
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    try:
        s = _section(data, "sampler", _SAMPLER_KEYS)
        d = _section(s, "decode", _DECODE_KEYS)
        decode = DecodeConfig(
            T_max=float(d.get("T_max", 30.0)),
            lam=float(d.get("lambda", 30.0)),
            argmax_threshold=float(d.get("argmax_threshold", 0.85)),
            blend_threshold=float(d.get("blend_threshold", 0.8)),
            blend_weights=tuple(d.get("blend_weights", (0.8, 0.2))),
        )
        sampler = SamplerConfig(
            steps=int(s.get("steps", 100)),
            activation=float(s.get("activation", 0.8)),
            rot_schedule=_schedule(s.get("rotation_schedule")),
            decode=decode,
            trans_std=float(s.get("trans_std", 10.0)),
            seed=int(s.get("seed", 0)),
            seq_time_exponent=float(s.get("seq_time_exponent", 1.0)),
            binding_offset=float(s.get("binding_offset", 1.0)),
            binding_window=tuple(float(x) for x in s.get("binding_window", (0.33, 0.66))),
        )
        c = _section(data, "curation", _CURATION_KEYS)
        curation = CurationPolicy(
            min_chain_len=int(c.get("min_chain_len", 30)),
            max_total_len=int(c.get("max_total_len", 2048)),
            swissprot_plddt=float(c.get("swissprot_plddt", 85.0)),
            afdb_plddt=float(c.get("afdb_plddt", 95.0)),
            require_cluster_id=bool(c.get("require_cluster_id", True)),
            excluded_ids=frozenset(str(x) for x in c.get("excluded_ids", ())),
        )
        cr = _section(data, "crop", _CROP_KEYS)
        crop = CropSpec(int(cr.get("max_residues", 384)), float(cr.get("cutoff", 8.0)))
        lo = _section(data, "losses", _LOSS_KEYS)
        losses = LossSettings(
            FapeConfig(float(lo.get("fape_clamp", 10.0)), float(lo.get("fape_length_scale", 10.0))),
            ConsistencyConfig(
                coefficient=float(lo.get("consistency_coefficient", 0.00054)),
                delta_t=float(lo.get("consistency_delta_t", 0.01)),
            ),
            float(lo.get("fm_time", 0.5)),
        )
        if not 0.0 <= losses.fm_time < 1.0:
            raise ConfigError("losses.fm_time must lie in [0, 1)")
        h = _section(data, "histogram", _HIST_KEYS)
        bins = int(h.get("bins", 72))
        if bins < 2:
            raise ConfigError("histogram.bins must be >= 2")
    except ConfigError:
        raise
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return Config(sampler, curation, crop, losses, bins, raw=data)


def load_config(path=None):
    """Read a YAML (or JSON) config file; ``None`` gives all defaults."""
    if path is None:
        return Config()
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return config_from_dict(data)
