"""Patch realism scorer whose convolutions are spectrally normalized."""

import torch
import torch.nn as nn
import torch.nn.functional as F

SPECTRAL_EPS = 1e-12


def spectral_normalize(weight, u, eps=SPECTRAL_EPS):
    """One power-iteration step; returns (weight / sigma_hat, updated u).

    Conv kernels are flattened to (out_channels, rest) before normalization.
    v and the updated u are constants in the graph, so gradients reach only
    the weight itself. A zero weight gives sigma_hat ~ 0, guarded by eps.
    """
    w = weight.reshape(weight.shape[0], -1)
    with torch.no_grad():
        v = F.normalize(w.t().mv(u), dim=0, eps=eps)
        u_new = F.normalize(w.mv(v), dim=0, eps=eps)
    sigma = torch.sum(u_new * w.mv(v))
    return weight / sigma.clamp_min(eps), u_new


class SpectralConv2d(nn.Module):
    """Conv layer whose weight is divided by its estimated top singular value.

    The left singular vector estimate u persists across steps and advances by
    one power-iteration step per forward when update_state is true (defaults
    to self.training).
    """

    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0):
        super().__init__()
        ref = nn.Conv2d(in_channels, out_channels, kernel_size, stride, padding)
        self.weight = nn.Parameter(ref.weight.detach().clone())
        self.bias = nn.Parameter(ref.bias.detach().clone())
        self.stride = stride
        self.padding = padding
        self.register_buffer("u", F.normalize(torch.randn(out_channels), dim=0))

    def forward(self, x, update_state=None):
        if update_state is None:
            update_state = self.training
        w_sn, u_new = spectral_normalize(self.weight, self.u)
        if update_state:
            with torch.no_grad():
                self.u.copy_(u_new)
        return F.conv2d(x, w_sn, self.bias, self.stride, self.padding)


class PatchDiscriminator(nn.Module):
    """Three stride-2 conv stages and a stride-1 head; emits a score grid.

    Scores are unbounded reals, one per receptive-field patch (a 64x64 input
    yields an 8x8 grid).
    """

    def __init__(self, base_channels=64):
        super().__init__()
        c = base_channels
        self.convs = nn.ModuleList([
            SpectralConv2d(3, c, 4, 2, 1),
            SpectralConv2d(c, c * 2, 4, 2, 1),
            SpectralConv2d(c * 2, c * 4, 4, 2, 1),
        ])
        self.head = SpectralConv2d(c * 4, 1, 3, 1, 1)

    def forward(self, x, update_state=None):
        h = x
        for conv in self.convs:
            h = F.leaky_relu(conv(h, update_state), 0.2)
        return self.head(h, update_state)
