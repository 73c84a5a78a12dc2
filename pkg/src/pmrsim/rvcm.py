"""Received-vector-coordinate-modification list decoding.

When the iterative decoder fails (or always, with early exit disabled),
each of the i_max least-reliable coordinates is pinned to -inf and then
+inf, the iterative decoder is restarted from scratch for each pin, and
the winner is the candidate whose noiseless target-domain reconstruction
is closest to the equalized samples in squared Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equalize import PrTarget, target_output
from .ldpc import DecodeResult, ParityCheckMatrix, bp_decode
from .llr import LLR_INF, pin
from .turboeq import LoopConfig, run
from .waveform import pad_bipolar


@dataclass
class RvcmConfig:
    """Search breadth and selection policy.

    i_max = None means all n coordinates.  restart chooses whether each pin
    reruns the full turbo loop or only the BP decoder on the baseline's
    detector extrinsic.
    """

    i_max: int | None = 10
    selection_source: str = "detector"  # "detector" APP or "bp" posterior
    include_baseline: bool = True
    distance_domain: str = "target"
    early_exit: bool = True
    restart: str = "loop"  # "loop" or "bp"

    def __post_init__(self):
        if self.i_max is not None and self.i_max < 0:
            raise ValueError("i_max must be >= 0 (or None for all coordinates)")
        if self.selection_source not in ("detector", "bp"):
            raise ValueError(f"unknown selection_source {self.selection_source!r}")
        if self.distance_domain != "target":
            raise ValueError("only target-domain Euclidean distance is implemented")
        if self.restart not in ("loop", "bp"):
            raise ValueError(f"unknown restart mode {self.restart!r}")


@dataclass
class Candidate:
    """One decoded vector with its provenance and distance metric."""

    bits: np.ndarray
    position: int  # -1 for the baseline decode
    sign: int      # 0 for the baseline decode
    is_codeword: bool
    metric: float
    selected: bool = False


@dataclass
class CandidateSet:
    entries: list

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def baseline(self) -> Candidate | None:
        for e in self.entries:
            if e.position < 0:
                return e
        return None

    @property
    def selected(self) -> Candidate:
        for e in self.entries:
            if e.selected:
                return e
        raise LookupError("no candidate marked selected")


def select_critical(reliability, i_max: int) -> np.ndarray:
    """Positions of the i_max smallest |reliability|, ascending, ties by index."""
    reliability = np.asarray(reliability)
    if i_max > len(reliability):
        raise ValueError(f"i_max {i_max} exceeds vector length {len(reliability)}")
    order = np.argsort(np.abs(reliability), kind="stable")
    return order[:i_max]


def euclidean_metric(candidate_bits, z, target: PrTarget, n_pad: int = 0) -> float:
    """Squared distance between z and the candidate's target-domain readback.

    The candidate is surrounded by the known pad symbols so the metric
    covers the pad positions carried in z as well.
    """
    z = np.asarray(z, dtype=float)
    bits = np.asarray(candidate_bits, dtype=float)
    if len(z) != len(bits) + 2 * n_pad:
        raise ValueError("z length must equal candidate length plus padding")
    bipolar = pad_bipolar(2.0 * bits - 1.0, n_pad) if n_pad else 2.0 * bits - 1.0
    recon = target_output(target, bipolar)
    diff = z - recon
    return float(diff @ diff)


def rvcm_decode(
    z,
    H: ParityCheckMatrix,
    loop_cfg: LoopConfig,
    cfg: RvcmConfig = RvcmConfig(),
) -> tuple[DecodeResult, CandidateSet]:
    """List decode around the least-reliable coordinates of the baseline run.

    The candidate pool for selection is every codeword-valid restart plus
    (with include_baseline) the baseline decode regardless of its syndrome;
    if nothing in the pool is a codeword the minimum-distance non-codeword
    is returned with is_codeword False.  Candidate order is deterministic,
    so ties in the metric resolve identically on every run.
    """
    z = np.asarray(z, dtype=float)
    n = H.n
    n_pad = (len(z) - n) // 2
    target = loop_cfg.trellis.target
    i_max = n if cfg.i_max is None else min(cfg.i_max, n)

    baseline = run(z, H, loop_cfg)
    base_entry = Candidate(
        bits=baseline.decode.hard_bits,
        position=-1,
        sign=0,
        is_codeword=baseline.decode.is_codeword,
        metric=euclidean_metric(baseline.decode.hard_bits, z, target, n_pad),
    )

    if baseline.decode.is_codeword and cfg.early_exit:
        base_entry.selected = True
        return baseline.decode, CandidateSet([base_entry])

    reliability = (
        baseline.reliability if cfg.selection_source == "detector"
        else baseline.bp_posterior
    )
    reliability_snapshot = reliability.copy()  # Step-1 store; restored by construction

    entries = [base_entry]
    results = {-1: baseline.decode}
    positions = select_critical(reliability, i_max)
    for p in positions:
        for sign in (-1, +1):
            if cfg.restart == "loop":
                override = np.zeros(n)
                override[p] = sign * LLR_INF
                res = run(z, H, loop_cfg, llr_override=override)
                dec = res.decode
            else:
                # BP-only restart on the baseline detector extrinsic
                bp_in = pin(baseline.detector_app, int(p), sign)
                dec = bp_decode(H, bp_in, loop_cfg.bp)
            entry = Candidate(
                bits=dec.hard_bits,
                position=int(p),
                sign=sign,
                is_codeword=dec.is_codeword,
                metric=euclidean_metric(dec.hard_bits, z, target, n_pad),
            )
            entries.append(entry)
            results[len(entries) - 1] = dec

    assert np.array_equal(reliability, reliability_snapshot)

    pool = [
        (e.metric, i) for i, e in enumerate(entries)
        if e.is_codeword and e.position >= 0
    ]
    if cfg.include_baseline:
        pool.append((base_entry.metric, 0))
    if not pool:
        pool = [(e.metric, i) for i, e in enumerate(entries)]
    _, best_idx = min(pool)
    entries[best_idx].selected = True

    chosen = entries[best_idx]
    source = results.get(best_idx if chosen.position >= 0 else -1, baseline.decode)
    best = DecodeResult(
        hard_bits=chosen.bits,
        soft_llr=source.soft_llr,
        is_codeword=chosen.is_codeword,
        iterations_used=source.iterations_used,
    )
    return best, CandidateSet(entries)
