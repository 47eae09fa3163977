"""Run configuration: defaults, JSON loading, strict validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

from .losses import LossWeights

AUGMENTATION_MODES = ("latent", "image")


@dataclass
class TrainConfig:
    """Everything a training run needs; every field has a default.

    The JSON form groups loss weights under "loss" and the augmentation mode
    under "augmentation": {"mode": ...}. Unknown keys anywhere are rejected.
    """

    data: str = ""
    data_style: str = ""
    out_dir: str = "runs/default"
    resolution: int = 64
    batch_size: int = 8
    steps: int = 1000
    lr_generator: float = 1e-4
    lr_discriminator: float = 4e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    feature_channels: int = 64
    content_channels: int = 64
    style_dim: int = 8
    mlp_hidden: int = 128
    seed: int = 0
    checkpoint_interval: int = 250
    augmentation_mode: str = "latent"
    keep_discriminator: bool = False
    loss: LossWeights = field(default_factory=LossWeights)

    def validate(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 (content encoder uses "
                             "batch normalization)")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.resolution < 4 or self.resolution % 4:
            raise ValueError("resolution must be a positive multiple of 4")
        if self.augmentation_mode not in AUGMENTATION_MODES:
            raise ValueError(f"augmentation mode must be one of "
                             f"{AUGMENTATION_MODES}, got {self.augmentation_mode!r}")
        for name in ("lr_generator", "lr_discriminator"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")
        for name in ("feature_channels", "content_channels", "style_dim", "mlp_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        self.loss.validate()
        return self

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "loss":
                out["loss"] = {w.name: getattr(self.loss, w.name)
                               for w in fields(self.loss)}
            elif f.name == "augmentation_mode":
                out["augmentation"] = {"mode": self.augmentation_mode}
            else:
                out[f.name] = getattr(self, f.name)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        kwargs = {}
        if "loss" in data:
            loss_data = dict(data.pop("loss"))
            valid = {w.name for w in fields(LossWeights)}
            unknown = set(loss_data) - valid
            if unknown:
                raise ValueError(f"unknown config keys under loss: {sorted(unknown)}")
            kwargs["loss"] = LossWeights(**loss_data)
        if "augmentation" in data:
            aug = dict(data.pop("augmentation"))
            unknown = set(aug) - {"mode"}
            if unknown:
                raise ValueError(
                    f"unknown config keys under augmentation: {sorted(unknown)}")
            if "mode" in aug:
                kwargs["augmentation_mode"] = aug["mode"]
        plain = {f.name for f in fields(cls)} - {"loss", "augmentation_mode"}
        unknown = set(data) - plain
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs.update(data)
        return cls(**kwargs)


def load_config(path) -> TrainConfig:
    """Parse, strictly validate, and return the config stored in a JSON file."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config root must be a JSON object")
    return TrainConfig.from_dict(data).validate()
