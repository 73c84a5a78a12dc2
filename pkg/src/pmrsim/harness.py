"""Monte Carlo experiment driver: channel -> equalizer -> decoder -> BER/FER.

Every frame is seeded from (base_seed, snr, mismatch, frame index), so
decoder variants at the same operating point consume identical noise
realizations (paired comparisons), reruns are bit-identical, and frames
can be distributed across processes without changing any count.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import codes
from .equalize import PrTarget, apply, design_mmse
from .ldpc import BpConfig, ParityCheckMatrix, encode, extract_message, load_alist
from .rvcm import RvcmConfig, rvcm_decode
from .trellis import DetectorConfig, build_trellis
from .turboeq import LoopConfig, run
from .waveform import (
    BipolarFrame,
    NoiseConfig,
    StepParams,
    simulate_readback,
    snr_to_sigma,
)

log = logging.getLogger(__name__)

CSV_HEADER = "snr_db,mismatch_db,decoder,i_max,frames,bit_errors,frame_errors,ber,fer,seconds"

_AWGN_TARGET = PrTarget(coefficients=(2.0,), label="mem0-awgn")


@dataclass
class ExperimentConfig:
    """Flat experiment description; every field maps to one config-file key."""

    code: str = "cyclic_127_84"
    channel: str = "pr"  # "pr" full pipeline | "awgn" memory-0 shortcut
    # waveform
    amplitude: float = 1.0
    pw50: float = 1.4
    span: int = 15
    media_fraction: float = 0.0
    jitter_max: float = 0.0
    taylor_order: int = 6
    # target / equalizer
    target: tuple = (4.0, 6.0, 4.0, 2.0)
    n_taps: int = 21
    training_len: int = 100_000
    # operating points
    snr_db: tuple = (14.0,)
    mismatch_db: tuple = (0.0,)
    decoders: tuple = ("bp",)
    # iterative loop
    outer_iters: int = 10
    bp_max_iters: int = 100
    bp_damping: float = 1.0
    # rvcm
    i_max: int | None = 10
    selection_source: str = "detector"
    include_baseline: bool = True
    early_exit: bool = True
    restart: str = "loop"
    # monte carlo
    max_frames: int = 1000
    max_frame_errors: int = 100
    chunk_frames: int = 100
    n_jobs: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.channel not in ("pr", "awgn"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if not self.snr_db:
            raise ValueError("snr_db list must be non-empty")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if not 0.0 <= self.media_fraction <= 1.0:
            raise ValueError("media_fraction must be in [0, 1]")
        if self.channel == "awgn" and self.media_fraction != 0.0:
            raise ValueError("media noise is undefined on the awgn shortcut channel")
        bad = [d for d in self.decoders if d not in ("bp", "rvcm")]
        if bad:
            raise ValueError(f"unknown decoder variants: {bad}")
        if self.chunk_frames < 1 or self.n_jobs < 1:
            raise ValueError("chunk_frames and n_jobs must be >= 1")


@dataclass
class BerRecord:
    """One (operating point, decoder) measurement."""

    snr_db: float
    mismatch_db: float
    decoder: str
    i_max: int
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    seconds: float

    def wilson_fer(self, z: float = 1.959963984540054) -> tuple[float, float]:
        """95% (by default) Wilson score interval for the FER."""
        n, k = self.frames, self.frame_errors
        if n == 0:
            return (0.0, 1.0)
        phat = k / n
        denom = 1.0 + z * z / n
        center = phat + z * z / (2 * n)
        half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
        return ((center - half) / denom, (center + half) / denom)

    def csv_row(self) -> str:
        return (f"{self.snr_db:g},{self.mismatch_db:g},{self.decoder},{self.i_max},"
                f"{self.frames},{self.bit_errors},{self.frame_errors},"
                f"{self.ber:.6e},{self.fer:.6e},{self.seconds:.3f}")


def resolve_code(spec: str) -> ParityCheckMatrix:
    """Code lookup: shipped name, "uncoded:N", or an alist file path."""
    if spec.startswith("uncoded:"):
        return codes.uncoded(int(spec.split(":", 1)[1]))
    if spec in codes.SHIPPED:
        from importlib import resources

        ref = resources.files("pmrsim").joinpath(f"data/{spec}.alist")
        if ref.is_file():
            with resources.as_file(ref) as path:
                H = load_alist(path, label=spec)
            return H
        return codes.SHIPPED[spec]()
    return load_alist(spec)


def _encode_db(value: float) -> int:
    # SeedSequence entropy must be a non-negative integer
    return int(round(value * 1000.0)) & 0xFFFFFFFF


def frame_rng(base_seed: int, snr_db: float, mismatch_db: float, index: int):
    seq = np.random.SeedSequence(
        (base_seed, _encode_db(snr_db), _encode_db(mismatch_db), index)
    )
    return np.random.default_rng(seq)


class PointRunner:
    """Frozen per-point pipeline: code, channel setup, and decoder configs."""

    def __init__(self, cfg: ExperimentConfig, snr_db: float, mismatch_db: float,
                 decoder: str):
        self.cfg = cfg
        self.snr_db = snr_db
        self.mismatch_db = mismatch_db
        self.decoder = decoder
        self.H = resolve_code(cfg.code)
        self.params = StepParams(amplitude=cfg.amplitude, pw50=cfg.pw50)
        sigma_e, sigma_m = snr_to_sigma(snr_db, cfg.media_fraction)
        self.noise = NoiseConfig(
            sigma_e=sigma_e, sigma_m=sigma_m, jitter_max=cfg.jitter_max,
            taylor_order=cfg.taylor_order,
        )
        bp = BpConfig(max_iters=cfg.bp_max_iters, damping=cfg.bp_damping)
        if cfg.channel == "pr":
            target = PrTarget(coefficients=tuple(cfg.target))
            self.trellis = build_trellis(target)
            design_seed = np.random.SeedSequence(
                (cfg.base_seed, 0xE9, _encode_db(snr_db))
            ).generate_state(1)[0]
            self.design = design_mmse(
                self.params, self.noise, target, n_taps=cfg.n_taps,
                training_len=cfg.training_len, seed=int(design_seed),
                span=cfg.span,
            )
            self.n_pad = self.trellis.memory
            assumed = self.design.residual_mse
        else:
            self.trellis = build_trellis(_AWGN_TARGET)
            self.design = None
            self.n_pad = 0
            assumed = sigma_e**2
        self.loop_cfg = LoopConfig(
            trellis=self.trellis,
            detector=DetectorConfig(assumed_sigma2=assumed, mismatch_db=mismatch_db),
            bp=bp,
            outer_iters=cfg.outer_iters,
        )
        self.rvcm_cfg = RvcmConfig(
            i_max=cfg.i_max,
            selection_source=cfg.selection_source,
            include_baseline=cfg.include_baseline,
            early_exit=cfg.early_exit,
            restart=cfg.restart,
        )

    def run_frame(self, index: int) -> tuple[int, bool]:
        """Simulate and decode frame `index`; returns (bit_errors, frame_error)."""
        cfg = self.cfg
        rng = frame_rng(cfg.base_seed, self.snr_db, self.mismatch_db, index)
        msg = rng.integers(0, 2, self.H.k).astype(np.uint8)
        cw = encode(self.H, msg)
        frame = BipolarFrame.from_code_bits(cw, user_bits=msg)
        if cfg.channel == "pr":
            rb = simulate_readback(frame, self.params, self.noise,
                                   span=cfg.span, rng=rng)
            z = apply(self.design, rb, extra=self.n_pad)
        else:
            z = (2.0 * cw - 1.0) + self.noise.sigma_e * rng.standard_normal(self.H.n)
        if self.decoder == "bp":
            hard = run(z, self.H, self.loop_cfg).decode.hard_bits
        else:
            best, _ = rvcm_decode(z, self.H, self.loop_cfg, self.rvcm_cfg)
            hard = best.hard_bits
        errors = int(np.count_nonzero(extract_message(self.H, hard) != msg))
        return errors, errors > 0

    def run_chunk(self, start: int, count: int) -> tuple[int, int, int]:
        bits = 0
        frames_bad = 0
        for index in range(start, start + count):
            e, bad = self.run_frame(index)
            bits += e
            frames_bad += bad
        return count, bits, frames_bad


_WORKER_RUNNER: PointRunner | None = None


def _worker_init(cfg, snr_db, mismatch_db, decoder):
    global _WORKER_RUNNER
    _WORKER_RUNNER = PointRunner(cfg, snr_db, mismatch_db, decoder)


def _worker_chunk(args):
    start, count = args
    return _WORKER_RUNNER.run_chunk(start, count)


def run_point(cfg: ExperimentConfig, snr_db: float, mismatch_db: float = 0.0,
              decoder: str | None = None) -> BerRecord:
    """Measure one operating point until max_frames or the error budget.

    The stop rule is evaluated at chunk boundaries so serial and parallel
    execution visit exactly the same frames.
    """
    decoder = decoder or cfg.decoders[0]
    t0 = time.perf_counter()
    try:
        runner = PointRunner(cfg, snr_db, mismatch_db, decoder)
        frames = bit_errors = frame_errors = 0
        chunks = []
        start = 0
        while start < cfg.max_frames:
            count = min(cfg.chunk_frames, cfg.max_frames - start)
            chunks.append((start, count))
            start += count

        if cfg.n_jobs > 1:
            import multiprocessing as mp

            with mp.Pool(cfg.n_jobs, initializer=_worker_init,
                         initargs=(cfg, snr_db, mismatch_db, decoder)) as pool:
                for done, bits, bad in pool.imap(_worker_chunk, chunks):
                    frames += done
                    bit_errors += bits
                    frame_errors += bad
                    if frame_errors >= cfg.max_frame_errors:
                        pool.terminate()
                        break
        else:
            for start, count in chunks:
                done, bits, bad = runner.run_chunk(start, count)
                frames += done
                bit_errors += bits
                frame_errors += bad
                if frame_errors >= cfg.max_frame_errors:
                    break
    except Exception as exc:
        raise RuntimeError(
            f"point snr={snr_db} mismatch={mismatch_db} decoder={decoder} "
            f"failed: {exc}"
        ) from exc

    seconds = time.perf_counter() - t0
    k = runner.H.k
    i_max = 0
    if decoder == "rvcm":
        i_max = runner.H.n if cfg.i_max is None else cfg.i_max
    return BerRecord(
        snr_db=snr_db,
        mismatch_db=mismatch_db,
        decoder=decoder,
        i_max=i_max,
        frames=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / (frames * k) if frames else float("nan"),
        fer=frame_errors / frames if frames else float("nan"),
        seconds=seconds,
    )


def run_sweep(cfg: ExperimentConfig, csv_path=None) -> list[BerRecord]:
    """Cartesian sweep over snr_db x mismatch_db x decoders.

    Records flush to csv_path incrementally, so an interrupted sweep leaves
    a valid CSV prefix.  Per-point failures are logged and skipped.
    """
    records = []
    out = None
    if csv_path is not None:
        out = open(csv_path, "w")
        out.write(CSV_HEADER + "\n")
        out.flush()
    try:
        for snr in cfg.snr_db:
            for mismatch in cfg.mismatch_db:
                for decoder in cfg.decoders:
                    try:
                        rec = run_point(cfg, snr, mismatch, decoder)
                    except RuntimeError as exc:
                        log.error("%s", exc)
                        print(f"error: {exc}", file=sys.stderr)
                        continue
                    records.append(rec)
                    if out is not None:
                        out.write(rec.csv_row() + "\n")
                        out.flush()
    finally:
        if out is not None:
            out.close()
    return records


# -- config files -------------------------------------------------------------

_LIST_FIELDS = {"snr_db", "mismatch_db", "decoders", "target"}
_INT_FIELDS = {"span", "taylor_order", "n_taps", "training_len", "outer_iters",
               "bp_max_iters", "max_frames", "max_frame_errors", "chunk_frames",
               "n_jobs", "base_seed"}
_FLOAT_FIELDS = {"amplitude", "pw50", "media_fraction", "jitter_max",
                 "bp_damping"}
_BOOL_FIELDS = {"include_baseline", "early_exit"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _LIST_FIELDS:
        items = [tok.strip() for tok in raw.split(",") if tok.strip()]
        if key == "decoders":
            return tuple(items)
        return tuple(float(tok) for tok in items)
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _BOOL_FIELDS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if key == "i_max":
        return None if raw.lower() == "all" else int(raw)
    return raw


def parse_config(pairs: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from string key=value pairs."""
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in pairs.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
    return ExperimentConfig(**kwargs)


def load_config(path) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    pairs = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, raw = body.split("=", 1)
            pairs[key.strip()] = raw.strip()
    return pairs
