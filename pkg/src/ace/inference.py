"""Zero-shot translation, content visualization, and evaluation helpers."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from . import checkpoint as ckpt
from .config import TrainConfig
from .losses import content_consistency
from .training import _load_module, batch_stats_only, build_models


def load_models(path):
    """Rebuild generator and discriminator from a checkpoint, in eval mode.

    Returns (gen, disc, config, step).
    """
    tensors, meta = ckpt.load_checkpoint(path)
    config = TrainConfig.from_dict(meta["config"]).validate()
    gen, disc = build_models(config)
    _load_module("gen", gen, tensors)
    _load_module("disc", disc, tensors)
    gen.eval()
    disc.eval()
    return gen, disc, config, meta["step"]


def translate(gen, x_content, x_style):
    """Decode the content of one batch under the style of another."""
    with torch.no_grad():
        return gen.translate(x_content, x_style)


def reconstruct(gen, x):
    """Reconstruction is translation with the image as its own style source."""
    return translate(gen, x, x)


@dataclass
class Heatmap:
    """Min-max normalized content-channel map and its blend over the input."""

    values: torch.Tensor   # (H, W) in [0, 1]
    overlay: torch.Tensor  # (3, H, W) in [0, 1]


def visualize_content(gen, x, alpha=0.5):
    """Overlay the most spatially varied content-code channel on the input.

    Channels with zero spatial variance are skipped; if every channel is
    constant the map is all zeros.
    """
    with torch.no_grad():
        code = gen.content_code(x[None])[0]  # (C, h, w)
        var = code.var(dim=(1, 2), unbiased=False)
        order = torch.argsort(var, descending=True)
        chan = int(order[0])
        m = code[chan]
        lo, hi = m.min(), m.max()
        if hi > lo:
            heat = (m - lo) / (hi - lo)
        else:
            heat = torch.zeros_like(m)
        heat = F.interpolate(heat[None, None], size=x.shape[-2:], mode="bilinear",
                             align_corners=False)[0, 0]
        base = (x + 1.0) * 0.5
        overlay = (1.0 - alpha) * base + alpha * heat
    return Heatmap(values=heat, overlay=overlay)


def mean_reconstruction_l1(gen, images, batch_size=32):
    """Mean absolute pixel error of the reconstruction path over images."""
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, images.shape[0], batch_size):
            x = images[start:start + batch_size]
            x_recon = gen.translate(x, x)
            total += float((x - x_recon).abs().mean()) * x.shape[0]
            count += x.shape[0]
    return total / count


def content_code_std(gen, images):
    """Collapse detector: mean per-channel std of unit-normalized raw codes.

    Codes are l2-normalized over the channel axis at each location; the std
    is taken per channel across every (sample, location) pair.
    """
    with torch.no_grad():
        c = gen.content(gen.features(images))
        n = F.normalize(c, dim=1, eps=1e-8)
        flat = n.permute(1, 0, 2, 3).reshape(n.shape[1], -1)
        return float(flat.std(dim=1, unbiased=False).mean())


def translation_content_consistency(gen, content_images, style_images,
                                    batch_size=8):
    """Mean content-consistency of translations over held-out batches.

    Computed with batch statistics and no running-estimate updates, exactly
    as the training objective sees it, so values stay comparable between
    models whose normalization statistics were calibrated on different
    domains.
    """
    was_training = gen.training
    gen.train()
    total, count = 0.0, 0
    try:
        with torch.no_grad(), batch_stats_only(gen):
            for start in range(0, content_images.shape[0], batch_size):
                xc = content_images[start:start + batch_size]
                xs = style_images[start:start + batch_size]
                out = gen.translate(xc, xs)
                value = content_consistency(gen.content_code(xc),
                                            gen.content_code(out))
                total += float(value) * xc.shape[0]
                count += xc.shape[0]
    finally:
        gen.train(was_training)
    return total / count
