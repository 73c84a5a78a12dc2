"""MAP (BCJR) detection over the partial-response trellis.

The trellis state is the history of the last L-1 input bits (bit == 1
maps to bipolar +1); branch outputs are the target-domain levels
0.5 * sum_l g_l * b_{k-l}.  Known pad symbols around the codeword pin the
boundary states.  SNR mismatch enters only through the noise variance
assumed in the branch metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equalize import PrTarget
from .llr import LLR_INF, saturated_mask

# Pad symbols are code bit 0 (bipolar -1) everywhere in the pipeline.
PAD_BIT = 0

_MAX_TARGET_LEN = 16


@dataclass(frozen=True)
class TrellisSpec:
    """State machine derived from a PR target."""

    target: PrTarget
    n_states: int
    next_state: np.ndarray  # (n_states, 2)
    output: np.ndarray      # (n_states, 2) expected level for (state, input)
    in_prev: np.ndarray     # (n_states, 2) predecessor state of each incoming branch
    in_bit: np.ndarray      # (n_states, 2) input bit carried by that branch

    @property
    def memory(self) -> int:
        return len(self.target) - 1


@dataclass
class DetectorConfig:
    """Branch-metric noise model; mismatch_db offsets the assumed variance."""

    assumed_sigma2: float
    mismatch_db: float = 0.0
    recursion: str = "exact"  # "exact" log-sum-exp or "max" approximation

    def __post_init__(self):
        if self.assumed_sigma2 <= 0:
            raise ValueError("assumed_sigma2 must be > 0")
        if self.recursion not in ("exact", "max"):
            raise ValueError(f"unknown recursion {self.recursion!r}")

    @property
    def effective_sigma2(self) -> float:
        return self.assumed_sigma2 * 10.0 ** (self.mismatch_db / 10.0)


def build_trellis(target: PrTarget) -> TrellisSpec:
    """Branch tables for a PR target; 2^(L-1) states."""
    L = len(target)
    if L > _MAX_TARGET_LEN:
        raise ValueError(f"target length {L} exceeds the table guard ({_MAX_TARGET_LEN})")
    memory = L - 1
    n_states = 1 << memory
    g = target.taps

    next_state = np.zeros((n_states, 2), dtype=np.int64)
    output = np.zeros((n_states, 2), dtype=float)
    for s in range(n_states):
        # state bit i-1 holds input bit b_{k-i}
        history = np.array([(s >> i) & 1 for i in range(memory)], dtype=float)
        for u in (0, 1):
            bits = np.concatenate([[u], history])
            output[s, u] = 0.5 * float(g @ (2.0 * bits - 1.0))
            next_state[s, u] = ((s << 1) | u) & (n_states - 1)

    in_prev = np.zeros((n_states, 2), dtype=np.int64)
    in_bit = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            ns = next_state[s, u]
            in_prev[ns, fill[ns]] = s
            in_bit[ns, fill[ns]] = u
            fill[ns] += 1
    assert np.all(fill == 2), "every state must have exactly 2 incoming branches"

    return TrellisSpec(target=target, n_states=n_states, next_state=next_state,
                       output=output, in_prev=in_prev, in_bit=in_bit)


def _prior_log_probs(priors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # stable log p(bit) from an LLR favoring bit 1 when positive
    logp1 = -np.logaddexp(0.0, -priors)
    logp0 = -np.logaddexp(0.0, priors)
    return logp0, logp1


def bcjr(
    spec: TrellisSpec,
    z,
    priors=None,
    cfg: DetectorConfig | None = None,
    n_pad: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior and extrinsic LLRs of the data bits given equalized samples.

    z covers n data positions plus n_pad known pad symbols on each side;
    priors (length n) default to zero.  Returns (app, extrinsic) where
    extrinsic = app - priors except at saturated priors, which pass
    through unchanged.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("equalized samples must be finite")
    if cfg is None:
        raise ValueError("a DetectorConfig is required")
    T = len(z)
    n = T - 2 * n_pad
    if n <= 0:
        raise ValueError("z shorter than its padding")
    if priors is None:
        priors = np.zeros(n)
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (n,):
        raise ValueError(f"priors must have length {n}, got {priors.shape}")

    sigma2 = cfg.effective_sigma2
    exact = cfg.recursion == "exact"
    S = spec.n_states
    memory = spec.memory

    logp0, logp1 = _prior_log_probs(priors)
    # per-time additive input term, pads forced to the pad bit
    bias = np.full((T, 2), -np.inf)
    bias[:n_pad, PAD_BIT] = 0.0
    bias[T - n_pad :, PAD_BIT] = 0.0
    bias[n_pad : n_pad + n, 0] = logp0
    bias[n_pad : n_pad + n, 1] = logp1

    # gamma[t, s, u] = -(z_t - out(s,u))^2 / (2 sigma^2) + bias[t, u]
    gamma = -((z[:, None, None] - spec.output[None, :, :]) ** 2) / (2.0 * sigma2)
    gamma += bias[:, None, :]

    def reduce2(a, b):
        return np.logaddexp(a, b) if exact else np.maximum(a, b)

    alpha = np.full((T + 1, S), -np.inf)
    if n_pad > 0:
        alpha[0, 0] = 0.0  # frame embedded in a pad run: all-pad history
    else:
        alpha[0, :] = 0.0  # no pad context supplied: uniform start
    for t in range(T):
        inc0 = alpha[t, spec.in_prev[:, 0]] + gamma[t, spec.in_prev[:, 0], spec.in_bit[:, 0]]
        inc1 = alpha[t, spec.in_prev[:, 1]] + gamma[t, spec.in_prev[:, 1], spec.in_bit[:, 1]]
        a = reduce2(inc0, inc1)
        alpha[t + 1] = a - a.max()

    beta = np.full((T + 1, S), -np.inf)
    known = min(n_pad, memory) if memory else 0
    end_mask = (np.arange(S) & ((1 << known) - 1)) == 0
    beta[T, end_mask] = 0.0
    for t in range(T - 1, -1, -1):
        out0 = gamma[t, :, 0] + beta[t + 1, spec.next_state[:, 0]]
        out1 = gamma[t, :, 1] + beta[t + 1, spec.next_state[:, 1]]
        b = reduce2(out0, out1)
        beta[t] = b - b.max()

    app = np.empty(n)
    for i in range(n):
        t = n_pad + i
        m1 = alpha[t] + gamma[t, :, 1] + beta[t + 1, spec.next_state[:, 1]]
        m0 = alpha[t] + gamma[t, :, 0] + beta[t + 1, spec.next_state[:, 0]]
        if exact:
            num = np.logaddexp.reduce(m1)
            den = np.logaddexp.reduce(m0)
        else:
            num = m1.max()
            den = m0.max()
        app[i] = num - den
    app = np.clip(app, -LLR_INF, LLR_INF)

    pinned = saturated_mask(priors)
    extrinsic = np.where(pinned, priors, app - priors)
    return app, extrinsic
