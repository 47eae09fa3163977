"""Style-statistics augmentation: positive pairs via random AdaIN parameters."""

from dataclasses import dataclass

import torch

from .decoder import adain


@dataclass
class NoiseDraw:
    """One standard-normal (gamma, beta) draw per channel."""

    gamma: torch.Tensor
    beta: torch.Tensor


def sample_noise(channels, rng, batch=None):
    """Draw independent N(0,1) gamma and beta vectors, advancing rng.

    With batch=N the draw is one independent pair per sample, shaped (N, C).
    """
    if channels < 1:
        raise ValueError(f"channels must be >= 1, got {channels}")
    shape = (channels,) if batch is None else (batch, channels)
    gamma = torch.randn(shape, generator=rng)
    beta = torch.randn(shape, generator=rng)
    return NoiseDraw(gamma, beta)


def augment_latent(z, rng):
    """Perturb the per-channel statistics of z with a fresh draw per sample."""
    draw = sample_noise(z.shape[1], rng, batch=z.shape[0])
    return adain(z, draw.gamma, draw.beta)


def augment_image(x, model, rng):
    """Full-path variant: decode the content code under random AdaIN parameters."""
    c = model.predictor(model.content(model.features(x)))
    params = []
    for ch in model.decoder.adain_channels:
        draw = sample_noise(ch, rng, batch=x.shape[0])
        params.append((draw.gamma, draw.beta))
    return model.decoder(c, params)
