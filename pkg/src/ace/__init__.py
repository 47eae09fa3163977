"""Content/style disentangling autoencoder for zero-shot image translation."""

__version__ = "0.1.0"

from .config import TrainConfig
from .model import Generator
from .discriminator import PatchDiscriminator

__all__ = ["TrainConfig", "Generator", "PatchDiscriminator", "__version__"]
