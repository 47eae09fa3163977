"""Dataset ingestion and the paired two-domain synthetic shape generator."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, ImageDraw

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}


def normalize(pixels: np.ndarray) -> np.ndarray:
    """Map uint8 pixel values into [-1, 1] (0 -> -1.0, 255 -> 1.0 exactly)."""
    return pixels.astype(np.float32) / 127.5 - 1.0


def denormalize(values) -> np.ndarray:
    """Map [-1, 1] floats back to uint8; exact inverse of normalize on 0..255."""
    arr = (np.asarray(values, dtype=np.float32) + 1.0) * 127.5
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


@dataclass
class DomainDataset:
    """Decoded images of one domain, ready for seeded deterministic iteration."""

    images: torch.Tensor  # (N, 3, H, W) in [-1, 1]
    paths: list[Path]
    resolution: int

    def __len__(self):
        return self.images.shape[0]

    def batch_for_step(self, batch_size: int, seed: int, step: int) -> torch.Tensor:
        """Batch for a 0-based global step.

        Iteration order is a pure function of (sorted file list, seed, epoch):
        each epoch reshuffles with a generator seeded from (seed, epoch), and
        the trailing partial batch of an epoch is dropped.
        """
        per_epoch = len(self) // batch_size
        if per_epoch < 1:
            raise ValueError(f"dataset of {len(self)} images is smaller than one "
                             f"batch of {batch_size}")
        epoch, slot = divmod(step, per_epoch)
        g = torch.Generator().manual_seed(seed * 1_000_003 + epoch)
        perm = torch.randperm(len(self), generator=g)
        idx = perm[slot * batch_size:(slot + 1) * batch_size]
        return self.images[idx]


def _decode(path: Path, resolution: int):
    try:
        with Image.open(path) as im:
            im = im.convert("RGB")
    except Exception:
        return None
    w, h = im.size
    side = min(w, h)
    left, top = (w - side) // 2, (h - side) // 2
    im = im.crop((left, top, left + side, top + side))
    if side != resolution:
        im = im.resize((resolution, resolution), Image.BILINEAR)
    return normalize(np.asarray(im, dtype=np.uint8))


def load_domain_dataset(path, resolution: int, workers: int | None = None) -> DomainDataset:
    """Load every PNG/JPEG under path, center-cropped to square and resized.

    Undecodable files are skipped with a warning; it is an error if nothing
    decodes. Decode parallelism defaults to the ACE_NUM_WORKERS env var.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir()
                   if p.suffix.lower() in IMAGE_EXTENSIONS)
    if not files:
        raise ValueError(f"{directory}: no decodable images")
    if workers is None:
        workers = int(os.environ.get("ACE_NUM_WORKERS", "0") or 0)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            decoded = list(pool.map(lambda p: _decode(p, resolution), files))
    else:
        decoded = [_decode(p, resolution) for p in files]
    arrays, kept = [], []
    for p, arr in zip(files, decoded):
        if arr is None:
            warnings.warn(f"skipping undecodable image {p}")
            continue
        arrays.append(arr)
        kept.append(p)
    if not arrays:
        raise ValueError(f"{directory}: no decodable images")
    data = torch.from_numpy(np.stack(arrays)).permute(0, 3, 1, 2).contiguous()
    return DomainDataset(data, kept, resolution)


# Two palettes far apart in mean RGB: warm domain A, cool domain B. Shape
# geometry is shared index-for-index across domains; only colors and the
# background texture differ.
_DOMAINS = {
    "a": {
        "shapes": [(220, 60, 50), (245, 160, 40), (250, 220, 90), (180, 50, 110)],
        "bg": ((250, 205, 120), (205, 110, 55)),
        "stripes": False,
    },
    "b": {
        "shapes": [(45, 90, 205), (40, 200, 190), (150, 95, 225), (25, 140, 120)],
        "bg": ((35, 65, 160), (85, 175, 210)),
        "stripes": True,
    },
}


def _sample_geometry(seed: int, index: int, resolution: int) -> dict:
    rng = np.random.default_rng([seed, index])
    shapes = []
    for _ in range(int(rng.integers(1, 4))):
        shapes.append({
            "kind": int(rng.integers(0, 3)),
            "cx": float(rng.uniform(0.15, 0.85) * resolution),
            "cy": float(rng.uniform(0.15, 0.85) * resolution),
            "radius": float(rng.uniform(0.10, 0.22) * resolution),
            "slot": int(rng.integers(0, 4)),
            "angle": float(rng.uniform(0.0, 2.0 * math.pi)),
        })
    return {"shapes": shapes, "phase": float(rng.uniform(0.0, 1.0))}


def _render(geometry: dict, domain: str, resolution: int) -> Image.Image:
    spec = _DOMAINS[domain]
    t = np.arange(resolution, dtype=np.float32) / resolution
    if spec["stripes"]:
        wave = ((t * 6.0 + geometry["phase"]) % 1.0 < 0.5).astype(np.float32)
    else:
        wave = 0.5 + 0.5 * np.sin(2.0 * math.pi * (t + geometry["phase"]))
    c0 = np.asarray(spec["bg"][0], dtype=np.float32)
    c1 = np.asarray(spec["bg"][1], dtype=np.float32)
    ramp = c0 + (c1 - c0) * wave[:, None]  # (res, 3)
    if spec["stripes"]:
        bg = np.repeat(ramp[None, :, :], resolution, axis=0)  # varies along x
    else:
        bg = np.repeat(ramp[:, None, :], resolution, axis=1)  # varies along y
    img = Image.fromarray(np.clip(np.rint(bg), 0, 255).astype(np.uint8))
    draw = ImageDraw.Draw(img)
    for shape in geometry["shapes"]:
        color = spec["shapes"][shape["slot"]]
        cx, cy, r = shape["cx"], shape["cy"], shape["radius"]
        if shape["kind"] == 0:
            draw.ellipse((cx - r, cy - r, cx + r, cy + r), fill=color)
        elif shape["kind"] == 1:
            draw.rectangle((cx - r, cy - r, cx + r, cy + r), fill=color)
        else:
            points = [(cx + r * math.cos(shape["angle"] + k * 2.0 * math.pi / 3.0),
                       cy + r * math.sin(shape["angle"] + k * 2.0 * math.pi / 3.0))
                      for k in range(3)]
            draw.polygon(points, fill=color)
    return img


def generate_synthetic_domains(out_dir, n_per_domain: int, seed: int,
                               resolution: int = 64) -> tuple[Path, Path]:
    """Write two paired shape domains that differ only in palette and texture."""
    if n_per_domain < 1:
        raise ValueError(f"n_per_domain must be >= 1, got {n_per_domain}")
    out = Path(out_dir)
    dirs = (out / "domain_a", out / "domain_b")
    for d in dirs:
        d.mkdir(parents=True, exist_ok=True)
    for i in range(n_per_domain):
        geometry = _sample_geometry(seed, i, resolution)
        for d, domain in zip(dirs, ("a", "b")):
            _render(geometry, domain, resolution).save(d / f"img_{i:04d}.png")
    return dirs


def domain_mean_rgb(directory, resolution: int = 64) -> np.ndarray:
    """Mean RGB of a domain directory in [-1, 1] units; the generator's own
    statistics check for palette separation."""
    dataset = load_domain_dataset(directory, resolution)
    return dataset.images.mean(dim=(0, 2, 3)).numpy()
