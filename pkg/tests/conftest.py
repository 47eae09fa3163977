import pytest
import torch

from ace.config import TrainConfig
from ace.data import generate_synthetic_domains
from ace.losses import LossWeights


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


def tiny_config(**overrides):
    """Small, fast config for pipeline tests (res 32, 8-channel nets)."""
    base = dict(resolution=32, batch_size=2, steps=2, feature_channels=8,
                content_channels=8, style_dim=4, mlp_hidden=16, seed=3,
                checkpoint_interval=100, loss=LossWeights())
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="session")
def tiny_data(tmp_path_factory):
    """Two tiny paired domains at 32x32 for pipeline and CLI tests."""
    root = tmp_path_factory.mktemp("tinydata")
    dir_a, dir_b = generate_synthetic_domains(root, n_per_domain=10, seed=11,
                                              resolution=32)
    return dir_a, dir_b
