import pytest
import torch

from ace.encoders import (ContentEncoder, FeatureEncoder, Predictor, StyleEncoder,
                          combine_style)
from ace.model import Generator


def test_feature_encoder_stride_contract():
    enc = FeatureEncoder(channels=8)
    for n in (32, 64, 128):
        z = enc(torch.randn(2, 3, n, n))
        assert z.shape == (2, 8, n // 4, n // 4)


def test_feature_encoder_rejects_non_multiple():
    enc = FeatureEncoder(channels=8)
    with pytest.raises(ValueError):
        enc(torch.randn(1, 3, 62, 62))


def test_feature_encoder_deterministic():
    enc = FeatureEncoder(channels=8).eval()
    x = torch.randn(1, 3, 32, 32)
    assert torch.equal(enc(x), enc(x))


def test_content_encoder_preserves_shape():
    enc = ContentEncoder(in_channels=8, channels=8)
    z = torch.randn(2, 8, 16, 16)
    assert enc(z).shape == (2, 8, 16, 16)


def test_content_encoder_finite_on_zero_input():
    enc = ContentEncoder(in_channels=8, channels=8)
    out = enc(torch.zeros(2, 8, 16, 16))
    assert torch.isfinite(out).all()


def test_content_encoder_eval_deterministic():
    enc = ContentEncoder(in_channels=8, channels=8).eval()
    z = torch.randn(2, 8, 16, 16)
    assert torch.equal(enc(z), enc(z))


def test_content_encoder_projects_differing_widths():
    enc = ContentEncoder(in_channels=8, channels=12)
    assert enc(torch.randn(2, 8, 8, 8)).shape == (2, 12, 8, 8)


def test_predictor_shape_and_bottleneck():
    pred = Predictor(channels=16)
    c = torch.randn(2, 16, 8, 8)
    assert pred(c).shape == c.shape
    convs = [m for m in pred.net if isinstance(m, torch.nn.Conv2d)]
    assert convs[0].out_channels == 4  # channels // 4
    bns = [m for m in pred.net if isinstance(m, torch.nn.BatchNorm2d)]
    assert len(bns) == 1  # hidden layer only, never the output
    assert not isinstance(list(pred.net)[-1], torch.nn.BatchNorm2d)


def test_predictor_constant_input_gives_constant_output():
    pred = Predictor(channels=8).eval()
    c = torch.ones(1, 8, 6, 6) * 0.3
    out = pred(c)
    flat = out.reshape(1, 8, -1)
    assert torch.allclose(flat, flat[..., :1].expand_as(flat), atol=1e-6)


def test_predictor_spatial_permutation_equivariance():
    pred = Predictor(channels=8).eval()
    c = torch.randn(2, 8, 4, 4)
    perm = torch.randperm(16, generator=torch.Generator().manual_seed(9))
    c_perm = c.reshape(2, 8, 16)[..., perm].reshape(2, 8, 4, 4)
    out_perm = pred(c_perm).reshape(2, 8, 16)
    expected = pred(c).reshape(2, 8, 16)[..., perm]
    assert torch.allclose(out_perm, expected, atol=1e-6)


def test_style_encoder_output_dim_and_pooling():
    enc = StyleEncoder(in_channels=8, style_dim=4)
    assert enc(torch.randn(2, 8, 16, 16)).shape == (2, 4)
    assert enc(torch.randn(2, 8, 8, 8)).shape == (2, 4)  # resolution independent
    assert torch.isfinite(enc(torch.zeros(1, 8, 16, 16))).all()


def test_combine_style_arithmetic():
    a = torch.tensor([1.0, 2.0])
    assert torch.equal(combine_style(a, torch.tensor([0.0, 0.0])), a)
    assert torch.equal(combine_style(a, torch.tensor([3.0, -1.0])),
                       torch.tensor([4.0, 1.0]))
    b = torch.tensor([3.0, -1.0])
    assert torch.equal(combine_style(a, b), combine_style(b, a))


def test_combine_style_dimension_mismatch():
    with pytest.raises(ValueError):
        combine_style(torch.ones(2, 3), torch.ones(4))


def test_domain_code_contribution_is_shared():
    domain = torch.randn(4)
    out = combine_style(torch.zeros(2, 4), domain)
    assert torch.equal(out[0], out[1])       # identical contribution per sample
    assert torch.equal(out[0], domain)
    s = torch.randn(2, 4)
    assert torch.allclose(combine_style(s, domain) - s, domain.expand(2, 4),
                          atol=1e-6)


def test_generator_resolution_roundtrip():
    gen = Generator(feature_channels=8, content_channels=8, style_dim=4,
                    mlp_hidden=16).eval()
    for n in (32, 64, 128):
        x = torch.randn(2, 3, n, n).clamp(-1, 1)
        assert gen.reconstruct(x).shape == (2, 3, n, n)


def test_generator_content_code_spatial_side():
    gen = Generator(feature_channels=8, content_channels=8, style_dim=4,
                    mlp_hidden=16).eval()
    for n in (32, 64):
        c = gen.content_code(torch.randn(1, 3, n, n))
        assert c.shape[-2:] == (n // 4, n // 4)
