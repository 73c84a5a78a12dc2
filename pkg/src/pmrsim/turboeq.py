"""Iterative detection/decoding: BCJR and BP exchanging extrinsic LLRs.

One global bit/bipolar convention is used everywhere: code bit 1 is
bipolar +1 is positive LLR.  Saturated override positions bypass the
extrinsic subtraction in both directions so a pinned coordinate stays
pinned for the whole loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ldpc import BpConfig, DecodeResult, ParityCheckMatrix, bp_decode
from .llr import saturated_mask
from .trellis import DetectorConfig, TrellisSpec, bcjr

BIT_CONVENTION = "bit1-positive"


@dataclass
class LoopConfig:
    """Detector/decoder pairing and outer-iteration budget."""

    trellis: TrellisSpec
    detector: DetectorConfig
    bp: BpConfig = field(default_factory=BpConfig)
    outer_iters: int = 10
    convention: str = BIT_CONVENTION

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")
        if self.convention != BIT_CONVENTION:
            raise ValueError(f"unsupported bit mapping convention {self.convention!r}")


@dataclass
class LoopResult:
    """Final decoder output plus the detector-side soft information."""

    decode: DecodeResult
    detector_app: np.ndarray
    reliability: np.ndarray
    bp_posterior: np.ndarray
    trace: list

    @property
    def is_codeword(self) -> bool:
        return self.decode.is_codeword


def run(
    z,
    H: ParityCheckMatrix,
    cfg: LoopConfig,
    llr_override=None,
) -> LoopResult:
    """Run the turbo loop until BP emits a codeword or outer_iters is spent.

    llr_override, when given, is a length-n vector whose saturated entries
    pin the corresponding channel-side LLR fed to BP on every pass; other
    entries are ignored.  The function is stateless: identical inputs give
    identical results.
    """
    z = np.asarray(z, dtype=float)
    n = H.n
    if (len(z) - n) % 2 != 0 or len(z) < n:
        raise ValueError(f"z length {len(z)} incompatible with code length {n}")
    n_pad = (len(z) - n) // 2

    pinned = None
    override = None
    if llr_override is not None:
        override = np.asarray(llr_override, dtype=float)
        if override.shape != (n,):
            raise ValueError(f"llr_override must have length {n}")
        pinned = saturated_mask(override)
        if not pinned.any():
            pinned = None

    to_detector = np.zeros(n)
    if pinned is not None:
        to_detector = np.where(pinned, override, to_detector)

    app = None
    dec = None
    trace: list[int] = []
    for _ in range(cfg.outer_iters):
        app, det_ext = bcjr(cfg.trellis, z, to_detector, cfg.detector, n_pad=n_pad)
        bp_in = det_ext if pinned is None else np.where(pinned, override, det_ext)
        dec = bp_decode(H, bp_in, cfg.bp)
        trace.append(int(H.syndrome(dec.hard_bits).sum()))
        if dec.is_codeword:
            break
        to_detector = dec.soft_llr - bp_in
        if pinned is not None:
            to_detector = np.where(pinned, override, to_detector)

    return LoopResult(
        decode=dec,
        detector_app=app,
        reliability=app,
        bp_posterior=dec.soft_llr,
        trace=trace,
    )
