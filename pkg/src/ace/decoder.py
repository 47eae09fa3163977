"""Decoder that rebuilds images from content codes under AdaIN style control."""

import torch
import torch.nn as nn

ADAIN_SIGMA_EPS = 1e-5


def adain(z, gamma, beta, eps=ADAIN_SIGMA_EPS):
    """Renormalize each channel of z to mean beta and scale gamma.

    Statistics are per instance and per channel, taken over spatial positions
    with the population (biased) variance. sigma is guarded with
    max(sigma, eps) so constant channels stay finite. gamma and beta may be
    shaped (C,) or (N, C).
    """
    channels = z.shape[1]
    if gamma.shape[-1] != channels or beta.shape[-1] != channels:
        raise ValueError(
            f"gamma/beta length ({gamma.shape[-1]}, {beta.shape[-1]}) does not "
            f"match channel count {channels}")
    mu = z.mean(dim=(2, 3), keepdim=True)
    sigma = z.var(dim=(2, 3), unbiased=False, keepdim=True).sqrt().clamp_min(eps)
    g = gamma.reshape(-1, channels, 1, 1)
    b = beta.reshape(-1, channels, 1, 1)
    return g * (z - mu) / sigma + b


class StyleMLP(nn.Module):
    """Maps a style code to one (gamma, beta) pair per decoder AdaIN layer."""

    def __init__(self, style_dim, layer_channels, hidden=128):
        super().__init__()
        self.layer_channels = list(layer_channels)
        self.trunk = nn.Sequential(nn.Linear(style_dim, hidden), nn.ReLU(inplace=True))
        self.heads = nn.ModuleList(
            [nn.Linear(hidden, 2 * c) for c in self.layer_channels])
        for head, c in zip(self.heads, self.layer_channels):
            # start near the identity transform: gamma 1, beta 0
            nn.init.zeros_(head.bias)
            head.bias.data[:c] = 1.0

    def forward(self, s):
        h = self.trunk(s)
        params = []
        for head, c in zip(self.heads, self.layer_channels):
            out = head(h)
            params.append((out[..., :c], out[..., c:]))
        return params


class AdaINResBlock(nn.Module):
    """Residual block whose two convs are each followed by an AdaIN layer."""

    def __init__(self, channels):
        super().__init__()
        self.channels = channels
        self.conv1 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1)

    def forward(self, x, params1, params2):
        h = torch.relu(adain(self.conv1(x), *params1))
        h = adain(self.conv2(h), *params2)
        return x + h


class Decoder(nn.Module):
    """AdaIN residual blocks, then two nearest-neighbor 2x upsample stages.

    AdaIN is the only renormalization in the decoder; there are no layers
    with tracked running statistics.
    """

    def __init__(self, channels=64, n_blocks=4):
        super().__init__()
        self.blocks = nn.ModuleList([AdaINResBlock(channels) for _ in range(n_blocks)])
        self.up = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(channels, channels // 2, 5, 1, 2),
            nn.ReLU(inplace=True),
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(channels // 2, channels // 4, 5, 1, 2),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels // 4, 3, 7, 1, 3),
            nn.Tanh(),
        )

    @property
    def adain_channels(self):
        """Channel count of every AdaIN layer, in application order."""
        return [b.channels for b in self.blocks for _ in range(2)]

    def forward(self, c, params):
        expected = self.adain_channels
        if len(params) != len(expected):
            raise ValueError(
                f"expected {len(expected)} AdaIN parameter pairs, got {len(params)}")
        for (gamma, beta), ch in zip(params, expected):
            if gamma.shape[-1] != ch or beta.shape[-1] != ch:
                raise ValueError("AdaIN parameter width does not match decoder layout")
        h = c
        it = iter(params)
        for block in self.blocks:
            h = block(h, next(it), next(it))
        return self.up(h)
