"""Log-likelihood-ratio conventions shared across detector and decoder.

Convention: llr_i = log(Pr(. | +1) / Pr(. | -1)); positive favors bipolar
+1, which is code bit 1.  Saturation ("set to +-infinity") is realized as
a large finite constant so arithmetic never produces NaN; anything at or
beyond SATURATION_THRESHOLD is treated as a hard pin.
"""

from __future__ import annotations

import numpy as np

LLR_INF = 1e30
SATURATION_THRESHOLD = 1e15


def saturated_mask(llr) -> np.ndarray:
    """Boolean mask of positions currently pinned to +-infinity."""
    return np.abs(np.asarray(llr)) >= SATURATION_THRESHOLD


def pin(llr, position: int, sign: int) -> np.ndarray:
    """Copy of llr with one coordinate saturated to sign * LLR_INF."""
    out = np.array(llr, dtype=float, copy=True)
    out[position] = float(sign) * LLR_INF
    return out


def hard_bits(llr) -> np.ndarray:
    """Hard decisions under the convention positive-llr -> bit 1."""
    return (np.asarray(llr) > 0).astype(np.uint8)
