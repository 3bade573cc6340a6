"""
Command-line driver: ``qmae {train,eval,reconstruct,dump-circuit}``.

Every command writes ``run.cfg`` (``key = value`` per option) into ``--out``;
passing it back through ``--config`` reproduces the run.

Exit codes: 0 success, 2 usage/config, 3 data/format, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .ansatz import build_encoder
from .dataio import load_idx_dataset, write_pgm
from .errors import ConfigError, FormatError, NumericalError
from .masking import preset
from .metrics import NearestCentroid, evaluate, evaluation_masks
from .model import (
    QAE,
    QMAE,
    ModelConfig,
    load_checkpoint,
    masked_input,
    reconstruct,
    save_checkpoint,
)
from .optim import train

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _digits(text):
    if text in (None, "", "all"):
        return None
    return [int(d) for d in str(text).split(",")]


def _indices(text):
    return [int(i) for i in str(text).split(",") if i != ""]


def _add_model_args(p, data=True):
    if data:
        p.add_argument("--images", help="IDX image file")
        p.add_argument("--labels", help="IDX label file")
        p.add_argument("--digits", default="0,1,2", help="comma list of classes, or 'all'")
        p.add_argument("--offset", type=int, default=0, help="skip this many selected samples")
        p.add_argument("--limit", type=int, help="number of samples to use")
    p.add_argument("--image-size", type=int, choices=(8, 16), default=8)
    p.add_argument("--latent", type=int, help="latent qubits k (default n-1)")
    p.add_argument("--variant", choices=(QMAE, QAE))
    p.add_argument("--mask", type=float, choices=(12.5, 25.0, 50.0), default=25.0,
                   help="mask percentage")
    p.add_argument("--expectation", choices=("analytic", "shots"), default="analytic")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="run.cfg file supplying defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmae", description=__doc__.splitlines()[1])
    parser.add_argument("--dump-circuit", action="store_true",
                        help="shorthand for the dump-circuit command with default geometry")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _add_model_args(p)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.01)

    p = sub.add_parser("eval", help="score reconstructions of a test split")
    _add_model_args(p)
    p.add_argument("--checkpoint", required=False)
    p.add_argument("--centroid-images", help="IDX images for the proxy classifier")
    p.add_argument("--centroid-labels", help="IDX labels for the proxy classifier")

    p = sub.add_parser("reconstruct", help="write original/masked/reconstructed PGM panels")
    _add_model_args(p)
    p.add_argument("--checkpoint", required=False)
    p.add_argument("--indices", default="0", help="comma list of sample indices")

    p = sub.add_parser("dump-circuit", help="print the encoder gate list")
    _add_model_args(p, data=False)
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def read_run_cfg(path) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}: malformed line {line!r}")
        values[key.strip()] = val.strip()
    return values


def write_run_cfg(path, parser, args) -> None:
    lines = [f"command = {args.command}"]
    for action in _subparser(parser, args.command)._actions:
        if action.dest in ("help", "config", "command"):
            continue
        val = getattr(args, action.dest)
        lines.append(f"{action.dest.replace('_', '-')} = {'' if val is None else val}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_circuit and args.command is None:
        args = parser.parse_args(["dump-circuit"])
    if args.command is None:
        parser.error("a command is required")
    if getattr(args, "config", None):
        values = read_run_cfg(args.config)
        if values.pop("command", args.command) != args.command:
            parser.error(f"{args.config} was written by a different command")
        sp = _subparser(parser, args.command)
        known = {a.dest for a in sp._actions}
        defaults = {}
        for key, val in values.items():
            dest = key.replace("-", "_")
            if dest not in known:
                parser.error(f"{args.config}: unknown option {key!r}")
            if val != "":
                defaults[dest] = val
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return parser, args


def model_config(args, variant=None) -> ModelConfig:
    n = 6 if args.image_size == 8 else 8
    k = args.latent if args.latent is not None else n - 1
    grid, n_masked = preset(args.image_size, args.mask)
    return ModelConfig(
        n_data=n,
        n_latent=k,
        grid=grid,
        n_masked=n_masked,
        variant=variant or args.variant or QMAE,
        shots=args.shots if args.expectation == "shots" else None,
        shot_seed=args.seed,
    )


def banner(cfg: ModelConfig) -> str:
    return (
        f"{cfg.variant}: {cfg.grid.image_h}x{cfg.grid.image_w} images, "
        f"{cfg.grid.patch_h}x{cfg.grid.patch_w} patches ({cfg.n_masked} masked), "
        f"n={cfg.n_data} k={cfg.n_latent} t={cfg.n_trash}, {cfg.n_total} qubits, "
        f"{cfg.n_params} parameters ({cfg.n_theta} circuit + {cfg.n_token} token)"
    )


def _dataset(args, default_limit):
    if not args.images or not args.labels:
        raise ConfigError("--images and --labels are required")
    limit = args.limit if args.limit is not None else default_limit
    return load_idx_dataset(args.images, args.labels, size=args.image_size,
                            digits=_digits(args.digits), limit=limit, offset=args.offset)


def _load(args):
    if not args.checkpoint:
        raise ConfigError("--checkpoint is required")
    meta, params = load_checkpoint(args.checkpoint)
    cfg = model_config(args, variant=args.variant or (QAE if meta["frozen"] else QMAE))
    want = {"n": cfg.n_data, "k": cfg.n_latent, "ph": cfg.grid.patch_h, "pw": cfg.grid.patch_w}
    got = {key: meta[key] for key in want}
    if got != want:
        raise ConfigError(f"checkpoint geometry {got} does not match run geometry {want}")
    return cfg, params


def cmd_train(args, out: Path) -> None:
    cfg = model_config(args)
    print(banner(cfg))
    data = _dataset(args, 200)

    def progress(epoch, mean):
        print(f"epoch {epoch}: mean loss {mean:.6f}")

    params, log = train(cfg, data, epochs=args.epochs, seed=args.seed, lr=args.lr,
                        progress=progress)
    if not all(np.isfinite(params.flat())):
        raise NumericalError("training produced non-finite parameters")
    save_checkpoint(out / "checkpoint.txt", cfg, params)
    log.write_csv(out / "loss.csv")
    log.write_epoch_csv(out / "epoch_loss.csv")
    final = log.epoch_means[-1] if log.epoch_means else float("nan")
    print(f"final mean loss {final:.6f}")


def cmd_eval(args, out: Path) -> None:
    cfg, params = _load(args)
    print(banner(cfg))
    test = _dataset(args, 100)
    classifier = None
    if args.centroid_images or args.centroid_labels:
        ref = load_idx_dataset(args.centroid_images, args.centroid_labels, size=args.image_size,
                               digits=_digits(args.digits))
        classifier = NearestCentroid(ref.images(), ref.labels)
    report = evaluate(cfg, params, test, seed=args.seed, classifier=classifier)
    report.write_csv(out / "report.csv")
    print(
        f"fidelity {report.mean_fidelity:.4f}  cosine {report.mean_cosine:.4f}  "
        f"ssim {report.mean_ssim:.4f}  accuracy {report.accuracy:.4f}"
    )


def cmd_reconstruct(args, out: Path) -> None:
    cfg, params = _load(args)
    data = _dataset(args, None)
    indices = _indices(args.indices)
    for i in indices:
        if not 0 <= i < len(data):
            raise IndexError(f"sample index {i} outside 0..{len(data) - 1}")
    masks = evaluation_masks(cfg, len(data), args.seed)
    for i in indices:
        image, spec = data[i].pixels, masks[i]
        masked = masked_input(cfg, params, image, spec)
        recon = reconstruct(cfg, params, image, spec)
        write_pgm(image, out / f"{i}_original.pgm")
        write_pgm(masked, out / f"{i}_masked.pgm")
        write_pgm(recon, out / f"{i}_recon.pgm")
        gap = np.ones((image.shape[0], 1))
        write_pgm(np.hstack([image, gap, masked, gap, recon]), out / f"{i}_triptych.pgm")
        print(f"wrote sample {i} (mask patches {list(spec.masked_patch_indices)})")


def cmd_dump_circuit(args, out: Path) -> None:
    cfg = model_config(args)
    print(banner(cfg))
    sys.stdout.write(build_encoder(cfg.n_data).dump())


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "reconstruct": cmd_reconstruct,
    "dump-circuit": cmd_dump_circuit,
}


def main(argv=None) -> int:
    parser, args = parse(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_run_cfg(out / "run.cfg", parser, args)
        COMMANDS[args.command](args, out)
    except (ConfigError, IndexError) as exc:
        print(f"qmae: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"qmae: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"qmae: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
