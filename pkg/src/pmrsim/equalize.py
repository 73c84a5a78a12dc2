"""FIR equalization of the readback channel onto a partial-response target.

The design is least-squares on a simulated training frame: the exact
channel (including dibit truncation and the configured noise mix) is run
once, and taps plus output delay are fit to minimize the mean squared
error against the target-domain reference 0.5*b convolved with the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveform import (
    DEFAULT_SPAN,
    PAD_SYMBOL,
    BipolarFrame,
    NoiseConfig,
    ReadbackFrame,
    StepParams,
    pad_bipolar,
    simulate_readback,
)


@dataclass(frozen=True)
class PrTarget:
    """Short FIR polynomial the equalized channel is shaped to."""

    coefficients: tuple = (4.0, 6.0, 4.0, 2.0)
    label: str = ""

    def __post_init__(self):
        if len(self.coefficients) < 1 or not any(self.coefficients):
            raise ValueError("target needs at least one nonzero coefficient")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.label:
            pretty = ",".join(f"{c:g}" for c in self.coefficients)
            object.__setattr__(self, "label", f"PR({pretty})")

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def taps(self) -> np.ndarray:
        return np.asarray(self.coefficients)


@dataclass
class EqualizerDesign:
    """FIR taps, output delay, and the achieved design-criterion MSE."""

    taps: np.ndarray
    delay: int
    residual_mse: float


def target_output(target: PrTarget, bipolar, pad_value: int = PAD_SYMBOL) -> np.ndarray:
    """Target-domain reference d_j = sum_l g_l * 0.5 * b_{j-l}, same length as b.

    Symbols before the start of `bipolar` are taken to be the pad value.
    """
    g = target.taps
    b = np.asarray(bipolar, dtype=float)
    lead = np.full(len(g) - 1, float(pad_value))
    return np.convolve(0.5 * np.concatenate([lead, b]), g, mode="valid")


def design_mmse_from_training(
    r, d, n_taps: int, delays=None
) -> EqualizerDesign:
    """Least-squares taps from one (received, desired) training pair.

    Scans candidate output delays and keeps the minimum-MSE fit; raises on
    singular normal equations (degenerate training data).
    """
    r = np.asarray(r, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(r) != len(d):
        raise ValueError("training vectors must have equal length")
    if len(r) < 10 * n_taps:
        raise ValueError(f"training length {len(r)} too short for {n_taps} taps")
    if delays is None:
        delays = range(n_taps)

    windows = np.lib.stride_tricks.sliding_window_view(r, n_taps)
    gram = windows.T @ windows
    n_win = len(windows)

    best = None
    for delay in delays:
        # window starting at i covers r[i .. i+n_taps-1]; the output it
        # produces is aligned with d[i + n_taps - 1 - delay]
        lo = n_taps - 1 - delay
        target = d[lo : lo + n_win]
        usable = min(len(target), n_win)
        if usable < n_win:
            w_view = windows[:usable]
            g_mat = w_view.T @ w_view
        else:
            w_view = windows
            g_mat = gram
        cross = w_view.T @ target[:usable]
        try:
            sol = np.linalg.solve(g_mat, cross)
        except np.linalg.LinAlgError:
            raise ValueError("singular normal equations: degenerate training data")
        resid = target[:usable] - w_view @ sol
        mse = float(resid @ resid) / usable
        if best is None or mse < best[2]:
            best = (sol, delay, mse)

    taps = best[0][::-1].copy()  # stored newest-sample-first
    return EqualizerDesign(taps=taps, delay=int(best[1]), residual_mse=best[2])


def design_mmse(
    params: StepParams,
    noise: NoiseConfig,
    target: PrTarget,
    n_taps: int = 21,
    training_len: int = 100_000,
    seed: int = 0,
    span: int = DEFAULT_SPAN,
) -> EqualizerDesign:
    """Design taps against a random training frame through the full channel."""
    if n_taps < len(target):
        raise ValueError("n_taps must be at least the target length")
    if training_len < 10 * n_taps:
        raise ValueError("training_len must be at least 10 * n_taps")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=training_len).astype(np.uint8)
    frame = BipolarFrame.from_code_bits(bits)
    rb = simulate_readback(frame, params, noise, span=span, rng=rng)
    d = target_output(target, pad_bipolar(frame.bipolar, span))
    # drop the pad-adjacent edges so the fit sees steady-state data only
    edge = span + n_taps
    return design_mmse_from_training(rb.samples[edge:-edge], d[edge:-edge], n_taps)


def apply(design: EqualizerDesign, frame: ReadbackFrame, extra: int = 0) -> np.ndarray:
    """Equalize a readback frame; codeword-aligned output of length n + 2*extra.

    extra > 0 keeps that many pad-position samples on each side (used to
    terminate the detector trellis); it may not exceed the frame's span.
    """
    if not 0 <= extra <= frame.span:
        raise ValueError(f"extra must be in [0, span={frame.span}]")
    taps = np.asarray(design.taps, dtype=float)
    n_taps = len(taps)
    if len(frame.samples) <= n_taps:
        raise ValueError("frame shorter than the equalizer")
    pad = n_taps
    rp = np.pad(frame.samples, pad, mode="edge")
    # z_j = sum_q taps[q] * r[j + delay - q]
    full = np.convolve(rp, taps)
    start = frame.span - extra + design.delay + pad
    return full[start : start + frame.n_data + 2 * extra]


def equalize_mse(z: np.ndarray, reference: np.ndarray) -> float:
    """Mean squared distance between equalized output and reference."""
    z = np.asarray(z, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return float(np.mean((z - reference) ** 2))


def save_design(design: EqualizerDesign, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"delay {design.delay}\n")
        fh.write(" ".join(repr(float(t)) for t in design.taps) + "\n")


def load_design(path) -> EqualizerDesign:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or not lines[0].startswith("delay "):
        raise ValueError(f"{path}: not an equalizer design file")
    delay = int(lines[0].split()[1])
    taps = np.array([float(tok) for tok in lines[1].split()])
    return EqualizerDesign(taps=taps, delay=delay, residual_mse=float("nan"))
