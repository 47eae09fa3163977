"""Generator assembly: encoders, style pathway, and the AdaIN decoder."""

import torch
import torch.nn as nn

from .decoder import Decoder, StyleMLP
from .encoders import ContentEncoder, FeatureEncoder, Predictor, StyleEncoder, combine_style


class Generator(nn.Module):
    """Autoencoding translator built from a shared trunk and two branches.

    The content code consumed downstream is always the predictor output;
    raw (pre-predictor) codes appear only inside the contrastive objective.
    """

    def __init__(self, feature_channels=64, content_channels=64, style_dim=8,
                 mlp_hidden=128):
        super().__init__()
        self.features = FeatureEncoder(feature_channels)
        self.content = ContentEncoder(feature_channels, content_channels)
        self.predictor = Predictor(content_channels)
        self.style = StyleEncoder(feature_channels, style_dim)
        self.domain_style = nn.Parameter(torch.zeros(style_dim))
        self.decoder = Decoder(content_channels)
        self.style_mlp = StyleMLP(style_dim, self.decoder.adain_channels, mlp_hidden)

    def content_code(self, x):
        """Predicted content code of an image."""
        return self.predictor(self.content(self.features(x)))

    def style_params(self, z):
        """AdaIN parameters from the per-sample code summed with the domain code."""
        s = combine_style(self.style(z), self.domain_style)
        return self.style_mlp(s)

    def translate(self, x_content, x_style):
        """Decode the content of one image under the style of another."""
        c = self.content_code(x_content)
        params = self.style_params(self.features(x_style))
        return self.decoder(c, params)

    def reconstruct(self, x, stop_content_grad=False):
        """Autoencode x; optionally block gradients into the content pathway."""
        z = self.features(x)
        c = self.predictor(self.content(z))
        if stop_content_grad:
            c = c.detach()
        return self.decoder(c, self.style_params(z))
