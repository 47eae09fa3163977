"""Training objectives: contrastive, consistency, reconstruction, adversarial."""

import math
from dataclasses import dataclass, fields

import torch
import torch.nn.functional as F

COSINE_EPS = 1e-8


@dataclass
class LossWeights:
    """Nonnegative weights for the combined generator objective."""

    contrast: float = 1.0
    content_consist: float = 1.0
    style_consist: float = 1.0
    recon: float = 10.0
    gan: float = 1.0

    def validate(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"loss weight {f.name} must be finite and >= 0, "
                                 f"got {value}")
        return self


def _negative_cosine(p, target):
    """Mean negative cosine over the channel axis; target is gradient-blocked."""
    return -F.cosine_similarity(p, target.detach(), dim=1, eps=COSINE_EPS).mean()


def contrastive_loss(c1, c2, predictor, symmetrize=True):
    """Siamese loss between two content-code views of the same content.

    Each view is passed through the predictor and compared, per spatial
    location, against the stop-gradient of the other raw view. The
    symmetrized form averages both directions.
    """
    if c1.shape != c2.shape:
        raise ValueError(f"content code shapes differ: {tuple(c1.shape)} vs "
                         f"{tuple(c2.shape)}")
    loss = _negative_cosine(predictor(c1), c2)
    if not symmetrize:
        return loss
    return 0.5 * loss + 0.5 * _negative_cosine(predictor(c2), c1)


def content_consistency(c_orig, c_recon):
    """Mean absolute difference between content codes."""
    if c_orig.shape != c_recon.shape:
        raise ValueError(f"content code shapes differ: {tuple(c_orig.shape)} vs "
                         f"{tuple(c_recon.shape)}")
    return (c_orig - c_recon).abs().mean()


def style_consistency(s_orig, s_recon):
    """Mean absolute difference between style codes."""
    if s_orig.shape != s_recon.shape:
        raise ValueError(f"style code shapes differ: {tuple(s_orig.shape)} vs "
                         f"{tuple(s_recon.shape)}")
    return (s_orig - s_recon).abs().mean()


def reconstruction_loss(x, x_recon):
    """Mean absolute pixel difference."""
    if x.shape != x_recon.shape:
        raise ValueError(f"image shapes differ: {tuple(x.shape)} vs "
                         f"{tuple(x_recon.shape)}")
    return (x - x_recon).abs().mean()


def gan_loss_discriminator(score_real, score_fake):
    """Least-squares discriminator loss: reals toward 1, fakes toward 0."""
    return ((score_real - 1.0) ** 2).mean() + (score_fake ** 2).mean()


def gan_loss_generator(score_fake):
    """Least-squares generator loss: fakes toward 1."""
    return ((score_fake - 1.0) ** 2).mean()


def total_loss(terms, weights):
    """Weighted sum of named loss terms; zero-weight terms are skipped."""
    valid = {f.name for f in fields(weights)}
    total = torch.zeros(())
    for name, value in terms.items():
        if name not in valid:
            raise ValueError(f"unknown loss term: {name}")
        w = getattr(weights, name)
        if w != 0.0:
            total = total + w * value
    return total
