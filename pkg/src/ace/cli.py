"""Command-line surface: training, translation, visualization, data generation."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .config import TrainConfig, load_config
from .data import denormalize, generate_synthetic_domains, load_domain_dataset, normalize


def _load_image(path):
    import torch
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"image not found: {p}")
    with Image.open(p) as im:
        im = im.convert("RGB")
    w, h = im.size
    side = min(w, h)
    left, top = (w - side) // 2, (h - side) // 2
    im = im.crop((left, top, left + side, top + side))
    arr = normalize(np.asarray(im, dtype=np.uint8))
    return torch.from_numpy(arr).permute(2, 0, 1).contiguous()


def _save_image(tensor, path):
    arr = denormalize(tensor.permute(1, 2, 0).numpy())
    Image.fromarray(arr).save(path)


def _build_config(args, require_data=True) -> TrainConfig:
    config = load_config(args.config) if args.config else TrainConfig()
    overrides = {"data": args.data, "data_style": getattr(args, "data_style", None),
                 "out_dir": args.out, "steps": args.steps, "batch_size": args.batch,
                 "resolution": args.res, "seed": args.seed,
                 "augmentation_mode": getattr(args, "aug_mode", None)}
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, value)
    if require_data and not config.data:
        raise ValueError("no dataset given: pass --data or set it in --config")
    return config.validate()


def _add_common(p):
    p.add_argument("--data", help="image directory")
    p.add_argument("--out", help="output directory")
    p.add_argument("--steps", type=int, help="training steps")
    p.add_argument("--batch", type=int, help="batch size (default 8)")
    p.add_argument("--res", type=int, help="image resolution (default 64)")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--aug-mode", choices=("latent", "image"),
                   help="augmentation mode")


def cmd_pretrain(args):
    from .training import run_training
    config = _build_config(args)
    path = run_training(config, "pretrain", resume=args.ckpt)
    print(path)
    return 0


def cmd_finetune(args):
    from .training import run_training
    config = _build_config(args)
    if not config.data_style:
        raise ValueError("finetune needs --data-style (target domain directory)")
    path = run_training(config, "finetune", init_from=args.ckpt)
    print(path)
    return 0


def cmd_translate(args):
    from .inference import load_models, translate
    gen, _, _, _ = load_models(args.ckpt)
    x_content = _load_image(args.content)
    x_style = _load_image(args.style)
    out = translate(gen, x_content[None], x_style[None])[0]
    _save_image(out, args.out)
    return 0


def cmd_visualize(args):
    from .inference import load_models, visualize_content
    gen, _, _, _ = load_models(args.ckpt)
    x = _load_image(args.image)
    heatmap = visualize_content(gen, x)
    overlay = heatmap.overlay * 2.0 - 1.0  # back to [-1, 1] for saving
    _save_image(overlay, args.out)
    return 0


def cmd_gen_data(args):
    dir_a, dir_b = generate_synthetic_domains(args.out, args.n, args.seed,
                                              args.res)
    print(dir_a)
    print(dir_b)
    return 0


def cmd_eval_recon(args):
    from .inference import load_models, mean_reconstruction_l1
    gen, _, config, _ = load_models(args.ckpt)
    dataset = load_domain_dataset(args.data, config.resolution)
    print(f"{mean_reconstruction_l1(gen, dataset.images):.6f}")
    return 0


def _parser():
    p = argparse.ArgumentParser(
        prog="ace",
        description="Content/style autoencoder: pretrain on one image domain, "
                    "then translate between unseen domains.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pretrain", help="pretrain on a single domain")
    _add_common(sp)
    sp.add_argument("--ckpt", help="checkpoint to resume from")
    sp.set_defaults(func=cmd_pretrain)

    sf = sub.add_parser("finetune", help="fine-tune translation to a target domain")
    _add_common(sf)
    sf.add_argument("--data-style", dest="data_style",
                    help="target (style) domain directory")
    sf.add_argument("--ckpt", required=True, help="pretrained checkpoint")
    sf.set_defaults(func=cmd_finetune)

    st = sub.add_parser("translate", help="translate one image with another's style")
    st.add_argument("--ckpt", required=True)
    st.add_argument("--content", required=True, help="content image")
    st.add_argument("--style", required=True, help="style image")
    st.add_argument("--out", required=True, help="output PNG")
    st.set_defaults(func=cmd_translate)

    sv = sub.add_parser("visualize", help="overlay the dominant content channel")
    sv.add_argument("--ckpt", required=True)
    sv.add_argument("--image", required=True)
    sv.add_argument("--out", required=True, help="output PNG")
    sv.set_defaults(func=cmd_visualize)

    sg = sub.add_parser("gen-data", help="generate the paired synthetic domains")
    sg.add_argument("--out", required=True, help="output directory")
    sg.add_argument("--n", type=int, default=500, help="images per domain")
    sg.add_argument("--seed", type=int, default=7)
    sg.add_argument("--res", type=int, default=64)
    sg.set_defaults(func=cmd_gen_data)

    se = sub.add_parser("eval-recon", help="mean reconstruction L1 over a directory")
    se.add_argument("--ckpt", required=True)
    se.add_argument("--data", required=True)
    se.set_defaults(func=cmd_eval_recon)

    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
