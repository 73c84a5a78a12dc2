"""Command-line front end.

Subcommands: simulate (one operating point), sweep (full grid with CSV
output), design-equalizer (emit a tap file), decode-trace (dump one
frame's candidate list), gen-code (emit the shipped alist matrices).

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

import numpy as np

from . import codes
from .equalize import PrTarget, apply, design_mmse, save_design
from .harness import (
    CSV_HEADER,
    ExperimentConfig,
    PointRunner,
    frame_rng,
    load_config,
    parse_config,
    run_point,
    run_sweep,
)
from .ldpc import encode, save_alist
from .rvcm import rvcm_decode
from .waveform import BipolarFrame, NoiseConfig, StepParams, simulate_readback, snr_to_sigma


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key=value config file")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar="V")


def _build_config(args) -> ExperimentConfig:
    pairs = {}
    if args.config:
        pairs.update(load_config(args.config))
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            pairs[f.name] = value
    return parse_config(pairs)


def _cmd_simulate(args) -> int:
    cfg = _build_config(args)
    print(CSV_HEADER)
    for decoder in cfg.decoders:
        rec = run_point(cfg, cfg.snr_db[0], cfg.mismatch_db[0], decoder)
        print(rec.csv_row())
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    records = run_sweep(cfg, csv_path=args.out)
    expected = len(cfg.snr_db) * len(cfg.mismatch_db) * len(cfg.decoders)
    print(f"{len(records)}/{expected} points -> {args.out}")
    return 0 if records else 2


def _cmd_design_equalizer(args) -> int:
    cfg = _build_config(args)
    params = StepParams(amplitude=cfg.amplitude, pw50=cfg.pw50)
    sigma_e, sigma_m = snr_to_sigma(cfg.snr_db[0], cfg.media_fraction)
    noise = NoiseConfig(sigma_e=sigma_e, sigma_m=sigma_m,
                        jitter_max=cfg.jitter_max, taylor_order=cfg.taylor_order)
    design = design_mmse(params, noise, PrTarget(coefficients=tuple(cfg.target)),
                         n_taps=cfg.n_taps, training_len=cfg.training_len,
                         seed=cfg.base_seed, span=cfg.span)
    save_design(design, args.out)
    print(f"{args.out}: {cfg.n_taps} taps, delay {design.delay}, "
          f"residual MSE {design.residual_mse:.3e}")
    return 0


def _cmd_decode_trace(args) -> int:
    cfg = _build_config(args)
    runner = PointRunner(cfg, cfg.snr_db[0], cfg.mismatch_db[0], "rvcm")
    rng = frame_rng(cfg.base_seed, cfg.snr_db[0], cfg.mismatch_db[0], args.frame)
    msg = rng.integers(0, 2, runner.H.k).astype(np.uint8)
    cw = encode(runner.H, msg)
    frame = BipolarFrame.from_code_bits(cw, user_bits=msg)
    if cfg.channel == "pr":
        rb = simulate_readback(frame, runner.params, runner.noise,
                               span=cfg.span, rng=rng)
        z = apply(runner.design, rb, extra=runner.n_pad)
    else:
        z = (2.0 * cw - 1.0) + runner.noise.sigma_e * rng.standard_normal(runner.H.n)
    _, cands = rvcm_decode(z, runner.H, runner.loop_cfg, runner.rvcm_cfg)
    lines = ["position,sign,is_codeword,metric,selected"]
    for e in cands.entries:
        lines.append(f"{e.position},{e.sign},{int(e.is_codeword)},"
                     f"{e.metric:.6e},{int(e.selected)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_gen_code(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    names = args.names or sorted(codes.SHIPPED)
    for name in names:
        if name not in codes.SHIPPED:
            raise ValueError(f"unknown code {name!r}; have {sorted(codes.SHIPPED)}")
        H = codes.SHIPPED[name]()
        path = os.path.join(args.out, f"{name}.alist")
        save_alist(H, path)
        print(f"{path}: ({H.n},{H.k}) m={H.m}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmrsim",
        description="Perpendicular recording channel simulator and decoding toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one operating point")
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep", help="run the full snr x mismatch x decoder grid")
    _add_config_flags(p)
    p.add_argument("--out", default="sweep.csv", help="output CSV path")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("design-equalizer", help="design taps and write a design file")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output design file")
    p.set_defaults(fn=_cmd_design_equalizer)

    p = sub.add_parser("decode-trace", help="dump one frame's RVCM candidate list")
    _add_config_flags(p)
    p.add_argument("--frame", type=int, default=0, help="frame index")
    p.add_argument("--out", help="output CSV (stdout if omitted)")
    p.set_defaults(fn=_cmd_decode_trace)

    p = sub.add_parser("gen-code", help="emit the shipped alist matrices")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("names", nargs="*", help="subset of code names")
    p.set_defaults(fn=_cmd_gen_code)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
