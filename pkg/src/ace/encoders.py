"""Encoder networks: shared feature trunk, content and style branches."""

import torch
import torch.nn as nn


class FeatureEncoder(nn.Module):
    """Shared conv trunk with two stride-2 stages (total stride 4)."""

    total_stride = 4

    def __init__(self, channels=64):
        super().__init__()
        self.channels = channels
        self.net = nn.Sequential(
            nn.Conv2d(3, channels // 2, 7, 1, 3),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels // 2, channels, 4, 2, 1),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, 4, 2, 1),
            nn.ReLU(inplace=True),
        )

    def forward(self, x):
        h, w = x.shape[-2], x.shape[-1]
        if h % self.total_stride or w % self.total_stride:
            raise ValueError(
                f"input size {h}x{w} is not a multiple of the encoder stride "
                f"{self.total_stride}")
        return self.net(x)


class ResidualBlock(nn.Module):
    """Stride-1 residual block, BatchNorm on the residual path."""

    def __init__(self, channels):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(channels, channels, 3, 1, 1),
            nn.BatchNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, 3, 1, 1),
            nn.BatchNorm2d(channels),
        )

    def forward(self, x):
        return x + self.block(x)


class ContentEncoder(nn.Module):
    """Maps shared features to a spatial content code, preserving resolution."""

    def __init__(self, in_channels=64, channels=64, n_blocks=4):
        super().__init__()
        self.channels = channels
        self.entry = (nn.Identity() if in_channels == channels
                      else nn.Conv2d(in_channels, channels, 1))
        self.blocks = nn.Sequential(*[ResidualBlock(channels) for _ in range(n_blocks)])

    def forward(self, z):
        return self.blocks(self.entry(z))


class Predictor(nn.Module):
    """Bottleneck channel mixer applied independently at each spatial location.

    Two 1x1 conv layers with hidden width channels // 4; BatchNorm sits on
    the hidden layer only, never on the output.
    """

    def __init__(self, channels):
        super().__init__()
        hidden = max(channels // 4, 1)
        self.net = nn.Sequential(
            nn.Conv2d(channels, hidden, 1),
            nn.BatchNorm2d(hidden),
            nn.ReLU(inplace=True),
            nn.Conv2d(hidden, channels, 1),
        )

    def forward(self, c):
        return self.net(c)


class StyleEncoder(nn.Module):
    """Single conv layer, global average pooling, then a fully connected head."""

    def __init__(self, in_channels=64, style_dim=8):
        super().__init__()
        self.style_dim = style_dim
        self.conv = nn.Conv2d(in_channels, in_channels, 3, 1, 1)
        self.fc = nn.Linear(in_channels, style_dim)

    def forward(self, z):
        h = torch.relu(self.conv(z))
        h = h.mean(dim=(2, 3))
        return self.fc(h)


def combine_style(individual, domain):
    """Sum a per-sample style code with the shared learnable domain code."""
    if individual.shape[-1] != domain.shape[-1]:
        raise ValueError(
            f"style dimension mismatch: {individual.shape[-1]} vs {domain.shape[-1]}")
    return individual + domain
