"""
Command-line entry, ``python -m dfssm <command>``.

Exit codes: 0 success, 2 usage or input error, 3 checkpoint/state mismatch,
4 numeric failure (diverged training or a failed gradient check).
"""
import argparse
import glob
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence, Tuple

import numpy as np
from ditk import logging
from hbutils.string import plural_word

from .config import ModelConfig, TrainConfig, PRESETS, get_preset, load_config, format_config
from .data import PairDataset, make_dataset, load_png, save_png, to_float, to_uint8
from .errors import UsageError, ConfigError, ImageFormatError, ImageIOError, DimensionError, NumericError, \
    CheckpointMismatchError, CheckpointFormatError
from .fft import spectrum_image, dominant_orientation
from .network import build_model, restore_model, config_path_for, derain, evaluate_pairs, params_report, \
    count_params, REFERENCE_PARAMS_M
from .suite import run_suite, summarize, SUITE_MODULES, DEFAULT_SEEDS, TOLERANCE
from .training import train_loop

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISMATCH = 3
EXIT_NUMERIC = 4


def _resolve_config(spec: Optional[str], checkpoint: Optional[str] = None) -> Tuple[ModelConfig, TrainConfig]:
    if spec is None and checkpoint is not None:
        sidecar = config_path_for(checkpoint)
        if os.path.exists(sidecar):
            spec = sidecar
    if spec is None:
        return ModelConfig().validate(), TrainConfig()
    if not os.path.exists(spec) and spec in PRESETS:
        return get_preset(spec).validate(), TrainConfig()
    return load_config(spec)


def _load_model(ckpt: str, config: Optional[str], seed: int):
    model_cfg, _ = _resolve_config(config, ckpt)
    logging.info(f'Resolved model config:\n{format_config(model_cfg)}')
    return restore_model(build_model(model_cfg, seed=seed), ckpt)


def cmd_make_data(args) -> int:
    make_dataset(
        out=args.out,
        count=args.count,
        seed=args.seed,
        theta=args.theta,
        length=args.length,
        rho=args.rho,
        intensity=args.intensity,
        clean_dir=args.clean_dir,
        size=args.size,
    )
    return EXIT_OK


def cmd_train(args) -> int:
    model_cfg, train_cfg = _resolve_config(args.config)
    updates = {}
    if args.iterations is not None:
        updates['iterations'] = args.iterations
    if args.seed is not None:
        updates['seed'] = args.seed
    train_cfg = replace(train_cfg, **updates).validate()
    logging.info(f'Resolved config:\n{format_config(model_cfg, train_cfg)}')

    pairs = PairDataset(args.data).load_all()
    model = build_model(model_cfg, seed=train_cfg.seed)
    result = train_loop(model, pairs, train_cfg, args.out)
    logging.info(f'Training finished, checkpoint at {result.checkpoint!r}, metrics at {result.metrics_path!r}.')
    return EXIT_OK


def _input_images(path: str) -> Sequence[str]:
    if os.path.isdir(path):
        files = sorted(glob.glob(os.path.join(path, '*.png')))
        if not files:
            raise UsageError(f'No PNG images found in {path!r}.')
        return files
    return [path]


def cmd_infer(args) -> int:
    model = _load_model(args.ckpt, args.config, args.seed)
    files = _input_images(args.input)
    single = not os.path.isdir(args.input) and args.out.lower().endswith('.png')
    for file in files:
        target = args.out if single else os.path.join(args.out, os.path.basename(file))
        save_png(derain(model, load_png(file)), target)
        logging.info(f'Derained {file!r} into {target!r}.')
    logging.info(f'{plural_word(len(files), "image")} derained.')
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load_model(args.ckpt, args.config, args.seed) if args.ckpt else None
    if model is None:
        logging.info('No checkpoint given, scoring the rainy inputs as they are.')
    dataset = PairDataset(args.data)
    df = evaluate_pairs(dataset, model, total=len(dataset))
    if args.table:
        df.to_parquet(args.table, engine='pyarrow', index=False)
        logging.info(f'Per-image scores written to {args.table!r}.')
    print(df.to_markdown(index=False))
    print(f'PSNR={float(df["psnr"].mean()):.4f} SSIM={float(df["ssim"].mean()):.6f}')
    return EXIT_OK


def cmd_spectrum(args) -> int:
    image = load_png(args.input).astype(np.float64) / 255.0
    if args.diff:
        other = load_png(args.diff).astype(np.float64) / 255.0
        if other.shape != image.shape:
            raise DimensionError(f'Cannot diff {args.input!r} {image.shape!r} against {args.diff!r} {other.shape!r}.')
        image = image - other
    plane = np.transpose(image, (2, 0, 1))
    rendered = spectrum_image(plane, shift=not args.no_shift).data[0, 0]
    save_png(to_uint8(np.repeat(rendered[None], 3, axis=0)), args.out)
    logging.info(f'Spectrum of {args.input!r} written to {args.out!r}, '
                 f'dominant orientation {dominant_orientation(plane):.1f} degrees.')
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = run_suite(args.module, seeds=args.seeds, tolerance=args.tolerance)
    summary = summarize(report)
    print(summary.to_markdown(index=False))
    failed = summary[~summary['passed']]
    if len(failed):
        logging.error(f'{plural_word(len(failed), "gradient check")} failed: {", ".join(failed["case"])}.')
        return EXIT_NUMERIC
    logging.info(f'All {plural_word(len(summary), "gradient check")} passed.')
    return EXIT_OK


def cmd_params(args) -> int:
    model_cfg, _ = _resolve_config(args.config)
    logging.info(f'Resolved model config:\n{format_config(model_cfg)}')
    model = build_model(model_cfg, seed=args.seed)
    report = params_report(model, args.height, args.width)
    print(report.to_markdown(index=False))
    total = count_params(model)
    line = f'params={total}'
    for name, reference in REFERENCE_PARAMS_M.items():
        if get_preset(name) == model_cfg:
            line += f' reference={reference}M'
    print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dfssm', description='Frequency-enhanced state space deraining.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('make-data', help='Generate a synthetic rain dataset.')
    p.add_argument('--clean-dir', default=None, help='Directory of clean PNGs, procedural scenes when omitted.')
    p.add_argument('--out', required=True, help='Output dataset directory.')
    p.add_argument('--count', type=int, default=8, help='Number of pairs.')
    p.add_argument('--theta', type=float, default=None, help='Streak angle in degrees, sampled per pair if omitted.')
    p.add_argument('--length', type=int, default=15, help='Streak length in pixels.')
    p.add_argument('--rho', type=float, default=0.01, help='Streak density.')
    p.add_argument('--intensity', type=float, default=0.6, help='Streak intensity.')
    p.add_argument('--size', type=int, default=64, help='Side of procedural scenes.')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser('train', help='Train a model.')
    p.add_argument('--config', default=None, help='Config file or preset name.')
    p.add_argument('--data', required=True, help='Dataset directory.')
    p.add_argument('--out', required=True, help='Directory for checkpoints and metrics.')
    p.add_argument('--iterations', type=int, default=None, help='Override the configured iteration count.')
    p.add_argument('--seed', type=int, default=None, help='Override the configured seed.')
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('infer', help='Derain images.')
    p.add_argument('--ckpt', required=True)
    p.add_argument('--in', dest='input', required=True, help='PNG file or directory.')
    p.add_argument('--out', required=True, help='Output directory, or PNG file for a single input.')
    p.add_argument('--config', default=None, help='Config file or preset, config.cfg beside --ckpt by default.')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser('eval', help='Score Y-channel PSNR and SSIM on a dataset.')
    p.add_argument('--ckpt', default=None, help='Checkpoint, the rainy inputs are scored when omitted.')
    p.add_argument('--data', required=True)
    p.add_argument('--config', default=None)
    p.add_argument('--table', default=None, help='Write per-image scores as parquet.')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('spectrum', help='Render a log-amplitude spectrum.')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--diff', default=None, help='Render the spectrum of the difference to this image.')
    p.add_argument('--no-shift', action='store_true', help='Keep the DC bin in the corner.')
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser('gradcheck', help='Run finite-difference gradient checks.')
    p.add_argument('--module', default='all', choices=('all', *SUITE_MODULES))
    p.add_argument('--seeds', type=int, nargs='+', default=list(DEFAULT_SEEDS))
    p.add_argument('--tolerance', type=float, default=TOLERANCE)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser('params', help='Report parameter counts and FLOPs.')
    p.add_argument('--config', default=None, help='Config file or preset name.')
    p.add_argument('--height', type=int, default=256)
    p.add_argument('--width', type=int, default=256)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_params)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.try_init_root(logging.INFO)
    logging.info(f'Running {args.command!r} with {vars(args)!r}.')
    try:
        return args.func(args)
    except (CheckpointMismatchError, CheckpointFormatError) as err:
        logging.error(f'State mismatch - {err}')
        print(f'error: {err}', file=sys.stderr)
        return EXIT_MISMATCH
    except NumericError as err:
        logging.error(f'Numeric failure - {err}')
        print(f'error: {err}', file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ConfigError, ImageFormatError, ImageIOError, DimensionError) as err:
        logging.error(f'Invalid input - {err}')
        print(f'error: {err}', file=sys.stderr)
        return EXIT_USAGE
