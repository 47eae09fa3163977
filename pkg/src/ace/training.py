"""Pretraining and fine-tuning loops, stop-gradient bookkeeping, persistence.

The content pathway (residual blocks plus predictor) learns only from the
contrastive term: the reconstruction path consumes a detached content code,
and re-encoding for the consistency losses runs with those parameters
frozen, so their gradients come exclusively from the contrastive objective.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar

import torch

from . import checkpoint as ckpt
from .augmentation import augment_image, augment_latent
from .config import TrainConfig
from .data import load_domain_dataset
from .discriminator import PatchDiscriminator
from .encoders import combine_style
from .losses import (contrastive_loss, content_consistency, gan_loss_discriminator,
                     gan_loss_generator, reconstruction_loss, style_consistency,
                     total_loss)
from .model import Generator


class DivergedError(RuntimeError):
    """A loss term stopped being finite, so the step was aborted."""

    def __init__(self, term, value):
        super().__init__(f"loss term {term!r} diverged (value {value})")
        self.term = term


@dataclass
class StepMetrics:
    """Per-term scalar losses for one training step."""

    step: int
    terms: dict
    total: float
    disc: float

    _KEYS: ClassVar[dict] = {"contrast": "loss_contrast", "recon": "loss_recon",
                             "content_consist": "loss_ccons",
                             "style_consist": "loss_scons", "gan": "loss_gan_g"}

    def record(self) -> dict:
        rec = {"step": self.step, "loss_total": self.total}
        for term, value in self.terms.items():
            rec[self._KEYS[term]] = value
        rec["loss_gan_d"] = self.disc
        return rec


@contextlib.contextmanager
def frozen(*modules):
    """Temporarily drop requires_grad so a forward adds no parameter grads.

    Gradients still flow through the frozen modules to their inputs.
    """
    params = [p for m in modules for p in m.parameters()]
    states = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad_(False)
    try:
        yield
    finally:
        for p, state in zip(params, states):
            p.requires_grad_(state)


@contextlib.contextmanager
def batch_stats_only(*modules):
    """BatchNorm uses batch statistics without touching running estimates.

    Keeps running statistics calibrated to canonical real-image encodings:
    forwards over augmented features or generated images would otherwise
    skew them and break evaluation-mode behavior.
    """
    bns = [m for mod in modules for m in mod.modules()
           if isinstance(m, torch.nn.modules.batchnorm._BatchNorm)]
    states = [bn.track_running_stats for bn in bns]
    for bn in bns:
        bn.track_running_stats = False
    try:
        yield
    finally:
        for bn, state in zip(bns, states):
            bn.track_running_stats = state


def _check_finite(term, value):
    if not bool(torch.isfinite(value.detach())):
        raise DivergedError(term, float(value.detach()))


def _discriminator_update(disc, opt_d, real, fake):
    """Least-squares update on (real, detached fake); one spectral-state
    advance per training step happens here, on the real-batch forward."""
    opt_d.zero_grad()
    score_real = disc(real, update_state=True)
    score_fake = disc(fake.detach(), update_state=False)
    loss = gan_loss_discriminator(score_real, score_fake)
    _check_finite("gan_d", loss)
    loss.backward()
    opt_d.step()
    return float(loss.detach())


def _generator_update(step, terms, disc_loss, opt_g, weights):
    for name, value in terms.items():
        _check_finite(name, value)
    total = total_loss(terms, weights)
    opt_g.zero_grad()
    if total.requires_grad:
        total.backward()
    opt_g.step()
    return StepMetrics(step=step,
                       terms={k: float(v.detach()) for k, v in terms.items()},
                       total=float(total.detach()), disc=disc_loss)


def pretrain_step(step, batch, gen, disc, opt_g, opt_d, weights, rng,
                  aug_mode="latent"):
    """One combined update on a single-domain batch.

    Order: shared features; two style-perturbed views for the contrastive
    term; reconstruction from the gradient-blocked content code; consistency
    against the re-encoded reconstruction; discriminator update; generator
    update on the weighted sum including the adversarial term.
    """
    z = gen.features(batch)

    with batch_stats_only(gen.content, gen.predictor):
        if aug_mode == "latent":
            c1 = gen.content(augment_latent(z, rng))
            c2 = gen.content(augment_latent(z, rng))
        elif aug_mode == "image":
            with torch.no_grad():
                x1 = augment_image(batch, gen, rng)
                x2 = augment_image(batch, gen, rng)
            c1 = gen.content(gen.features(x1))
            c2 = gen.content(gen.features(x2))
        else:
            raise ValueError(f"unknown augmentation mode: {aug_mode!r}")
        loss_contrast = contrastive_loss(c1, c2, gen.predictor)

    c = gen.predictor(gen.content(z)).detach()
    s = gen.style(z)
    x_recon = gen.decoder(c, gen.style_mlp(combine_style(s, gen.domain_style)))
    loss_recon = reconstruction_loss(batch, x_recon)

    with frozen(gen.content, gen.predictor), \
            batch_stats_only(gen.content, gen.predictor):
        z_recon = gen.features(x_recon)
        c_recon = gen.predictor(gen.content(z_recon))
    loss_ccons = content_consistency(c, c_recon)
    loss_scons = style_consistency(s, gen.style(z_recon))

    disc_loss = _discriminator_update(disc, opt_d, real=batch, fake=x_recon)
    with frozen(disc):
        loss_gan = gan_loss_generator(disc(x_recon, update_state=False))

    terms = {"contrast": loss_contrast, "recon": loss_recon,
             "content_consist": loss_ccons, "style_consist": loss_scons,
             "gan": loss_gan}
    return _generator_update(step, terms, disc_loss, opt_g, weights)


def finetune_step(step, content_batch, style_batch, gen, disc, opt_g, opt_d,
                  weights):
    """One translation update: content from the source batch, style from the
    target batch.

    No contrastive or reconstruction terms; the discriminator sees only
    target-domain images as reals; the content pathway stays gradient-blocked.
    """
    z_c = gen.features(content_batch)
    z_s = gen.features(style_batch)
    c = gen.predictor(gen.content(z_c)).detach()
    s = gen.style(z_s)
    x_t = gen.decoder(c, gen.style_mlp(combine_style(s, gen.domain_style)))

    with frozen(gen.content, gen.predictor), \
            batch_stats_only(gen.content, gen.predictor):
        z_t = gen.features(x_t)
        c_t = gen.predictor(gen.content(z_t))
    loss_ccons = content_consistency(c, c_t)
    loss_scons = style_consistency(s, gen.style(z_t))

    disc_loss = _discriminator_update(disc, opt_d, real=style_batch, fake=x_t)
    with frozen(disc):
        loss_gan = gan_loss_generator(disc(x_t, update_state=False))

    terms = {"content_consist": loss_ccons, "style_consist": loss_scons,
             "gan": loss_gan}
    return _generator_update(step, terms, disc_loss, opt_g, weights)


def build_models(config: TrainConfig):
    gen = Generator(config.feature_channels, config.content_channels,
                    config.style_dim, config.mlp_hidden)
    disc = PatchDiscriminator()
    return gen, disc


def build_optimizers(config: TrainConfig, gen, disc):
    betas = (config.adam_beta1, config.adam_beta2)
    opt_g = torch.optim.Adam(gen.parameters(), lr=config.lr_generator, betas=betas)
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.lr_discriminator,
                             betas=betas)
    return opt_g, opt_d


def _module_tensors(prefix, module):
    out = {}
    for name, p in module.named_parameters():
        out[f"{prefix}/param/{name}"] = p
    for name, b in module.named_buffers():
        out[f"{prefix}/buffer/{name}"] = b
    return out


def _optimizer_tensors(prefix, opt, module):
    out = {}
    params = opt.param_groups[0]["params"]
    names = [name for name, _ in module.named_parameters()]
    for name, p in zip(names, params):
        state = opt.state.get(p)
        if not state:
            continue
        out[f"{prefix}/{name}/step"] = state["step"]
        out[f"{prefix}/{name}/exp_avg"] = state["exp_avg"]
        out[f"{prefix}/{name}/exp_avg_sq"] = state["exp_avg_sq"]
    return out


def _load_module(prefix, module, tensors):
    with torch.no_grad():
        for name, p in module.named_parameters():
            p.copy_(tensors[f"{prefix}/param/{name}"])
        for name, b in module.named_buffers():
            b.copy_(tensors[f"{prefix}/buffer/{name}"])


def _load_optimizer(prefix, opt, module, tensors):
    params = opt.param_groups[0]["params"]
    names = [name for name, _ in module.named_parameters()]
    for name, p in zip(names, params):
        key = f"{prefix}/{name}/exp_avg"
        if key not in tensors:
            continue
        opt.state[p] = {"step": tensors[f"{prefix}/{name}/step"].clone(),
                        "exp_avg": tensors[key].clone(),
                        "exp_avg_sq": tensors[f"{prefix}/{name}/exp_avg_sq"].clone()}


def save_run_checkpoint(path, gen, disc, opt_g, opt_d, aug_rng, step, mode,
                        config: TrainConfig):
    """Persist every named tensor of the run plus optimizer and rng state."""
    tensors = {}
    tensors.update(_module_tensors("gen", gen))
    tensors.update(_module_tensors("disc", disc))
    tensors.update(_optimizer_tensors("opt_g", opt_g, gen))
    tensors.update(_optimizer_tensors("opt_d", opt_d, disc))
    tensors["rng/augment"] = aug_rng.get_state()
    meta = {"step": step, "mode": mode, "config": config.to_dict()}
    ckpt.save_checkpoint(path, tensors, meta)


def load_run_checkpoint(path):
    """Rebuild models, optimizers, and rng from a run checkpoint.

    Returns (gen, disc, opt_g, opt_d, aug_rng, step, mode, config).
    """
    tensors, meta = ckpt.load_checkpoint(path)
    config = TrainConfig.from_dict(meta["config"]).validate()
    gen, disc = build_models(config)
    opt_g, opt_d = build_optimizers(config, gen, disc)
    _load_module("gen", gen, tensors)
    _load_module("disc", disc, tensors)
    _load_optimizer("opt_g", opt_g, gen, tensors)
    _load_optimizer("opt_d", opt_d, disc, tensors)
    aug_rng = torch.Generator()
    aug_rng.set_state(tensors["rng/augment"])
    return gen, disc, opt_g, opt_d, aug_rng, meta["step"], meta["mode"], config


_MODEL_FIELDS = ("resolution", "feature_channels", "content_channels",
                 "style_dim", "mlp_hidden")


def _check_model_compat(config, saved_config, path):
    for name in _MODEL_FIELDS:
        ours, theirs = getattr(config, name), getattr(saved_config, name)
        if ours != theirs:
            raise ValueError(f"config {name}={ours} does not match checkpoint "
                             f"{path} ({name}={theirs})")


def run_training(config: TrainConfig, mode: str, resume=None, init_from=None):
    """Train per config and return the final checkpoint path.

    resume continues an interrupted run of the same mode with full state.
    init_from starts fine-tuning from pretrained weights: fresh optimizers,
    step count reset, discriminator reinitialized unless keep_discriminator.
    """
    config.validate()
    if mode not in ("pretrain", "finetune"):
        raise ValueError(f"unknown training mode: {mode!r}")
    if resume is not None and init_from is not None:
        raise ValueError("resume and init_from are mutually exclusive")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    dataset = load_domain_dataset(config.data, config.resolution)
    style_dataset = None
    if mode == "finetune":
        if not config.data_style:
            raise ValueError("finetune mode needs data_style (target domain)")
        style_dataset = load_domain_dataset(config.data_style, config.resolution)

    if resume is not None:
        gen, disc, opt_g, opt_d, aug_rng, start_step, saved_mode, saved_config = \
            load_run_checkpoint(resume)
        if saved_mode != mode:
            raise ValueError(f"checkpoint {resume} was saved in {saved_mode!r} "
                             f"mode, cannot resume in {mode!r}")
        _check_model_compat(config, saved_config, resume)
    else:
        torch.manual_seed(config.seed)
        gen, disc = build_models(config)
        opt_g, opt_d = build_optimizers(config, gen, disc)
        aug_rng = torch.Generator().manual_seed(config.seed + 1)
        start_step = 0
        if init_from is not None:
            tensors, meta = ckpt.load_checkpoint(init_from)
            _check_model_compat(config, TrainConfig.from_dict(meta["config"]),
                                init_from)
            _load_module("gen", gen, tensors)
            if config.keep_discriminator:
                _load_module("disc", disc, tensors)

    gen.train()
    disc.train()
    metrics_path = out / "metrics.ndjson"
    final_path = out / "final.ace"
    with open(metrics_path, "a" if resume is not None else "w",
              encoding="utf-8") as log:
        for step in range(start_step + 1, config.steps + 1):
            batch = dataset.batch_for_step(config.batch_size, config.seed, step - 1)
            if mode == "pretrain":
                metrics = pretrain_step(step, batch, gen, disc, opt_g, opt_d,
                                        config.loss, aug_rng,
                                        config.augmentation_mode)
            else:
                style_batch = style_dataset.batch_for_step(
                    config.batch_size, config.seed + 7, step - 1)
                metrics = finetune_step(step, batch, style_batch, gen, disc,
                                        opt_g, opt_d, config.loss)
            log.write(json.dumps(metrics.record(), sort_keys=True) + "\n")
            log.flush()
            if step % config.checkpoint_interval == 0:
                save_run_checkpoint(out / f"step_{step:06d}.ace", gen, disc,
                                    opt_g, opt_d, aug_rng, step, mode, config)
    save_run_checkpoint(final_path, gen, disc, opt_g, opt_d, aug_rng,
                        config.steps, mode, config)
    return final_path
