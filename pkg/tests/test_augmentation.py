import math

import pytest
import torch

import ace.augmentation as aug
from ace.augmentation import NoiseDraw, augment_image, augment_latent, sample_noise
from ace.model import Generator


def test_sample_noise_seeded_reproducible():
    d1 = sample_noise(16, torch.Generator().manual_seed(12))
    d2 = sample_noise(16, torch.Generator().manual_seed(12))
    assert torch.equal(d1.gamma, d2.gamma) and torch.equal(d1.beta, d2.beta)


def test_sample_noise_consecutive_draws_differ():
    rng = torch.Generator().manual_seed(13)
    d1 = sample_noise(16, rng)
    d2 = sample_noise(16, rng)
    assert not torch.equal(d1.gamma, d2.gamma)


def test_sample_noise_rejects_bad_channel_count():
    with pytest.raises(ValueError):
        sample_noise(0, torch.Generator())


def test_sample_noise_batched_shape():
    d = sample_noise(8, torch.Generator().manual_seed(14), batch=5)
    assert d.gamma.shape == (5, 8) and d.beta.shape == (5, 8)


def test_sample_noise_statistics():
    # law of large numbers over 1e5 scalar draws
    d = sample_noise(100_000, torch.Generator().manual_seed(15))
    for v in (d.gamma, d.beta):
        assert abs(float(v.mean())) < 0.02
        assert abs(float(v.std()) - 1.0) < 0.02


def test_augment_latent_preserves_shape():
    z = torch.randn(3, 8, 16, 16)
    out = augment_latent(z, torch.Generator().manual_seed(16))
    assert out.shape == z.shape


def test_augment_latent_identity_draw_returns_input(monkeypatch):
    z = torch.randn(2, 4, 8, 8, generator=torch.Generator().manual_seed(17))
    sigma = z.var(dim=(2, 3), unbiased=False).sqrt()
    mu = z.mean(dim=(2, 3))
    monkeypatch.setattr(aug, "sample_noise",
                        lambda channels, rng, batch=None: NoiseDraw(sigma, mu))
    out = augment_latent(z, torch.Generator())
    assert torch.allclose(out, z, atol=1e-5)


def test_augment_latent_hand_case(monkeypatch):
    z = torch.tensor([[[[1.0, 3.0], [5.0, 7.0]]]])
    monkeypatch.setattr(aug, "sample_noise",
                        lambda channels, rng, batch=None: NoiseDraw(
                            torch.tensor([[1.0]]), torch.tensor([[0.0]])))
    out = augment_latent(z, torch.Generator())
    expected = torch.tensor([[[[-1.34164, -0.44721], [0.44721, 1.34164]]]])
    assert torch.allclose(out, expected, atol=1e-5)


def test_augment_latent_rank_preserved_for_positive_gamma():
    z = torch.randn(2, 4, 8, 8, generator=torch.Generator().manual_seed(30))
    rng = torch.Generator().manual_seed(18)
    probe = torch.Generator().manual_seed(18)  # replays the same noise stream
    for _ in range(20):
        draw = sample_noise(4, probe, batch=2)
        out = augment_latent(z, rng)
        for n in range(2):
            for ch in range(4):
                orig = z[n, ch].flatten().argsort()
                new = out[n, ch].flatten().argsort()
                if draw.gamma[n, ch] > 0:
                    assert torch.equal(orig, new)
                else:
                    assert torch.equal(orig.flip(0), new)


def test_augment_latent_statistical_contract():
    # over many draws: mean of per-channel means ~ 0, mean of per-channel
    # stds ~ E|gamma| = sqrt(2/pi)
    rng = torch.Generator().manual_seed(19)
    z = torch.randn(50, 4, 8, 8, generator=rng)
    means, stds = [], []
    for _ in range(50):  # 50 x 50 x 4 = 1e4 channel draws
        out = augment_latent(z, rng)
        means.append(out.mean(dim=(2, 3)))
        stds.append(out.var(dim=(2, 3), unbiased=False).sqrt())
    mean_of_means = float(torch.cat(means).mean())
    mean_of_stds = float(torch.cat(stds).mean())
    assert abs(mean_of_means) < 0.05
    assert abs(mean_of_stds - math.sqrt(2.0 / math.pi)) < 0.05


def _tiny_gen():
    torch.manual_seed(20)
    return Generator(feature_channels=8, content_channels=8, style_dim=4,
                     mlp_hidden=16).eval()


def test_augment_image_shape_and_determinism():
    gen = _tiny_gen()
    x = torch.randn(2, 3, 32, 32).clamp(-1, 1)
    out1 = augment_image(x, gen, torch.Generator().manual_seed(21))
    out2 = augment_image(x, gen, torch.Generator().manual_seed(21))
    assert out1.shape == x.shape
    assert torch.equal(out1, out2)


def test_augment_image_varies_with_rng():
    gen = _tiny_gen()
    x = torch.randn(2, 3, 32, 32).clamp(-1, 1)
    out1 = augment_image(x, gen, torch.Generator().manual_seed(22))
    out2 = augment_image(x, gen, torch.Generator().manual_seed(23))
    assert not torch.equal(out1, out2)
