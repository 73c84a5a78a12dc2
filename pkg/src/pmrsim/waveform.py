"""Symbol-rate readback synthesis for a perpendicular recording channel.

The single-transition step response is a hyperbolic tangent; a frame of
bipolar write symbols is turned into noiseless readback samples by
convolving the half-scaled symbol sequence with the dibit response.
Electronic, media (saturation-scaled), and timing-jitter noise are added
on top, each individually retrievable from the resulting ReadbackFrame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LN3 = math.log(3.0)

# Dibit truncation span, in symbol periods, on each side of t = 0.
# The tanh tail decays like 2*exp(-2*ln3*t/pw50); 15T keeps the truncated
# mass below 1e-10 for pw50 = 1.4.
DEFAULT_SPAN = 15

# Pad symbol written before and after every frame (bipolar value).
PAD_SYMBOL = -1

# Highest supported analytic derivative order of the step response.
MAX_DERIVATIVE_ORDER = 12


@dataclass(frozen=True)
class StepParams:
    """Transition response shape: saturation amplitude and PW50 width."""

    amplitude: float = 1.0
    pw50: float = 1.4

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError(f"amplitude must be > 0, got {self.amplitude}")
        if self.pw50 <= 0:
            raise ValueError(f"pw50 must be > 0, got {self.pw50}")


@dataclass(frozen=True)
class NoiseConfig:
    """Noise mix for one simulated frame.

    sigma_e / sigma_m are standard deviations in amplitude units;
    jitter_max bounds the uniform per-sample timing offset (fraction of T).
    """

    sigma_e: float = 0.0
    sigma_m: float = 0.0
    jitter_max: float = 0.0
    taylor_order: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.sigma_e < 0 or self.sigma_m < 0:
            raise ValueError("noise standard deviations must be >= 0")
        if not 0 <= self.jitter_max < 0.5:
            raise ValueError(f"jitter_max must be in [0, 0.5), got {self.jitter_max}")
        if not 1 <= self.taylor_order <= MAX_DERIVATIVE_ORDER:
            raise ValueError(f"taylor_order must be in [1, {MAX_DERIVATIVE_ORDER}]")


@dataclass(frozen=True)
class BipolarFrame:
    """User bits, code bits, and the bipolar write sequence b = 2c - 1."""

    user_bits: np.ndarray
    code_bits: np.ndarray
    bipolar: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.code_bits)
        b = np.asarray(self.bipolar)
        if c.shape != b.shape or not np.array_equal(2 * c.astype(int) - 1, b.astype(int)):
            raise ValueError("bipolar sequence must equal 2*code_bits - 1")

    @classmethod
    def from_code_bits(cls, code_bits, user_bits=None) -> "BipolarFrame":
        c = np.asarray(code_bits, dtype=np.uint8)
        a = np.asarray([] if user_bits is None else user_bits, dtype=np.uint8)
        return cls(user_bits=a, code_bits=c, bipolar=(2 * c.astype(np.int8) - 1))

    def __len__(self) -> int:
        return len(self.code_bits)


@dataclass(frozen=True)
class ReadbackFrame:
    """Noisy readback samples with their additive decomposition.

    samples = noiseless + media_noise + jitter_noise + electronic_noise,
    elementwise.  All vectors cover the padded frame: n_data codeword
    samples plus `span` pad samples on each side.
    """

    samples: np.ndarray
    noiseless: np.ndarray
    media_noise: np.ndarray
    jitter_noise: np.ndarray
    electronic_noise: np.ndarray
    n_data: int
    span: int
    tail_bound: float

    def __post_init__(self):
        n = len(self.samples)
        for v in (self.noiseless, self.media_noise, self.jitter_noise, self.electronic_noise):
            if len(v) != n:
                raise ValueError("all readback component vectors must share one length")
        if n != self.n_data + 2 * self.span:
            raise ValueError("sample count must equal n_data + 2*span")


def step_response(t, params: StepParams = StepParams()):
    """Voltage of a single magnetic transition at time t (in symbol periods)."""
    t = np.asarray(t, dtype=float)
    return params.amplitude * np.tanh(LN3 * t / params.pw50)


@lru_cache(maxsize=None)
def _tanh_derivative_poly(order: int) -> tuple:
    """Coefficients (ascending, in u = tanh) of d^order/dtau^order tanh(tau)."""
    poly = np.array([0.0, 1.0])
    for _ in range(order):
        # d/dtau P(u) = P'(u) * (1 - u^2)
        poly = np.polynomial.polynomial.polymul(
            np.polynomial.polynomial.polyder(poly), [1.0, 0.0, -1.0]
        )
    return tuple(poly)


def step_derivative(t, order: int, params: StepParams = StepParams()):
    """Analytic d^order s / dt^order, via the tanh' = 1 - tanh^2 recurrence."""
    if not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be in [1, {MAX_DERIVATIVE_ORDER}], got {order}")
    t = np.asarray(t, dtype=float)
    k = LN3 / params.pw50
    u = np.tanh(k * t)
    poly = np.asarray(_tanh_derivative_poly(order))
    return params.amplitude * k**order * np.polynomial.polynomial.polyval(u, poly)


def dibit_response(t, params: StepParams = StepParams()):
    """Response to two adjacent opposite transitions: s(t) - s(t-1)."""
    t = np.asarray(t, dtype=float)
    return step_response(t, params) - step_response(t - 1.0, params)


def tail_bound(params: StepParams, span: int) -> float:
    """Upper bound on |dibit_response| beyond the truncation span."""
    # |A - A*tanh(x)| <= 2A*exp(-2x) for x >= 0; the dibit inherits it.
    return 4.0 * params.amplitude * math.exp(-2.0 * LN3 * (span - 1) / params.pw50)


def _dibit_taps(params: StepParams, span: int, order: int = 0) -> np.ndarray:
    """Dibit response (or its analytic derivative) sampled at t = -span..span."""
    t = np.arange(-span, span + 1, dtype=float)
    if order == 0:
        return dibit_response(t, params)
    return step_derivative(t, order, params) - step_derivative(t - 1.0, order, params)


def pad_bipolar(bipolar, span: int, pad_value: int = PAD_SYMBOL) -> np.ndarray:
    """Surround a bipolar sequence with `span` pad symbols on each side."""
    b = np.asarray(bipolar, dtype=float)
    pad = np.full(span, float(pad_value))
    return np.concatenate([pad, b, pad])


def _convolve_padded(bipolar, taps: np.ndarray, span: int, pad_value: int) -> np.ndarray:
    """Convolve 0.5*b with symbol-rate taps over the padded frame support.

    The frame is conceptually embedded in an infinite run of pad symbols;
    extending by one extra span on each side makes every retained sample
    exact under that assumption.
    """
    b_padded = pad_bipolar(bipolar, span, pad_value)
    b_ext = pad_bipolar(b_padded, span, pad_value)
    full = np.convolve(0.5 * b_ext, taps)
    return full[2 * span : 2 * span + len(b_padded)]


def synthesize_noiseless(
    frame: BipolarFrame,
    params: StepParams = StepParams(),
    span: int = DEFAULT_SPAN,
    pad_value: int = PAD_SYMBOL,
) -> np.ndarray:
    """Noiseless symbol-rate readback of a frame, length n + 2*span."""
    if span < 1:
        raise ValueError(f"span must be >= 1, got {span}")
    if len(frame) == 0:
        raise ValueError("cannot synthesize an empty frame")
    return _convolve_padded(frame.bipolar, _dibit_taps(params, span), span, pad_value)


def synthesize_transition_form(
    frame: BipolarFrame,
    params: StepParams = StepParams(),
    span: int = DEFAULT_SPAN,
    pad_value: int = PAD_SYMBOL,
) -> np.ndarray:
    """Equivalent synthesis: transitions (b_k - b_{k-1})/2 through the step response.

    Unlike the dibit, s(t) does not decay (it plateaus at +-A), so every
    transition in the window contributes at every sample and the kernel is
    evaluated exactly rather than truncated.  The telescoped form also
    carries the boundary constant 0.5*A*(b_left + b_right) from the
    run-in/run-out pad levels.  Agrees with synthesize_noiseless to within
    the dibit truncation tail bound.
    """
    if len(frame) == 0:
        raise ValueError("cannot synthesize an empty frame")
    b_padded = pad_bipolar(frame.bipolar, span, pad_value)
    b_ext = pad_bipolar(b_padded, span, pad_value)
    transitions = np.diff(b_ext, prepend=b_ext[0]) / 2.0
    positions = np.arange(len(b_ext), dtype=float) - span  # padded-frame indices
    sample_at = np.arange(len(b_padded), dtype=float)
    kernel = step_response(sample_at[:, None] - positions[None, :], params)
    boundary = params.amplitude * float(pad_value)
    return kernel @ transitions + boundary


def signal_derivatives(
    frame: BipolarFrame,
    params: StepParams = StepParams(),
    span: int = DEFAULT_SPAN,
    max_order: int = 6,
    pad_value: int = PAD_SYMBOL,
) -> np.ndarray:
    """Per-sample time derivatives of the noiseless readback.

    Returns shape (max_order, n + 2*span); row m-1 holds d^m x / dt^m,
    assembled by the same superposition as synthesize_noiseless.
    """
    rows = [
        _convolve_padded(frame.bipolar, _dibit_taps(params, span, order), span, pad_value)
        for order in range(1, max_order + 1)
    ]
    return np.vstack(rows)


def apply_noise(
    x: np.ndarray,
    cfg: NoiseConfig,
    params: StepParams = StepParams(),
    derivatives: np.ndarray | None = None,
    span: int = DEFAULT_SPAN,
    rng: np.random.Generator | None = None,
) -> ReadbackFrame:
    """Add electronic, media, and jitter noise to a noiseless readback vector.

    Media noise is amplitude-scaled by sqrt(1 - (x/A)^2), so it vanishes at
    full saturation and peaks at transitions.  Jitter perturbs the sampling
    instant by a uniform offset, realized through a Taylor expansion whose
    derivative stack must be supplied when jitter_max > 0 (rows 1..order of
    `derivatives`, as produced by signal_derivatives).
    """
    x = np.asarray(x, dtype=float)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n = len(x)

    electronic = cfg.sigma_e * rng.standard_normal(n)

    saturation = 1.0 - (x / params.amplitude) ** 2
    media = cfg.sigma_m * rng.standard_normal(n) * np.sqrt(np.clip(saturation, 0.0, None))

    if cfg.jitter_max > 0:
        if derivatives is None:
            raise ValueError("jitter_max > 0 requires the signal derivative stack")
        if derivatives.shape[0] < cfg.taylor_order:
            raise ValueError(
                f"need {cfg.taylor_order} derivative rows, got {derivatives.shape[0]}"
            )
        delta = rng.uniform(-cfg.jitter_max, cfg.jitter_max, size=n)
        jitter = np.zeros(n)
        term = np.ones(n)
        for order in range(1, cfg.taylor_order + 1):
            term = term * delta / order
            jitter += term * derivatives[order - 1]
    else:
        jitter = np.zeros(n)

    return ReadbackFrame(
        samples=x + media + jitter + electronic,
        noiseless=x,
        media_noise=media,
        jitter_noise=jitter,
        electronic_noise=electronic,
        n_data=n - 2 * span,
        span=span,
        tail_bound=tail_bound(params, span),
    )


def simulate_readback(
    frame: BipolarFrame,
    params: StepParams = StepParams(),
    cfg: NoiseConfig = NoiseConfig(),
    span: int = DEFAULT_SPAN,
    rng: np.random.Generator | None = None,
) -> ReadbackFrame:
    """Full channel: synthesize the noiseless frame, then add the noise mix."""
    x = synthesize_noiseless(frame, params, span)
    derivs = None
    if cfg.jitter_max > 0:
        derivs = signal_derivatives(frame, params, span, cfg.taylor_order)
    return apply_noise(x, cfg, params, derivatives=derivs, span=span, rng=rng)


def snr_to_sigma(snr_db: float, media_fraction: float = 0.0) -> tuple[float, float]:
    """Split a channel SNR into (sigma_e, sigma_m) by media-noise share.

    The SNR convention is 10*log10(1 / (2*(sigma_e^2 + sigma_m^2))).
    """
    if not 0.0 <= media_fraction <= 1.0:
        raise ValueError(f"media_fraction must be in [0, 1], got {media_fraction}")
    total_var = 10.0 ** (-snr_db / 10.0) / 2.0
    sigma_m2 = media_fraction * total_var
    sigma_e2 = total_var - sigma_m2
    return math.sqrt(sigma_e2), math.sqrt(sigma_m2)


def sigma_to_snr(sigma_e: float, sigma_m: float = 0.0) -> float:
    """Inverse of snr_to_sigma: channel SNR in dB from the noise mix."""
    total_var = sigma_e**2 + sigma_m**2
    if total_var <= 0:
        raise ValueError("total noise variance must be > 0 to define an SNR")
    return 10.0 * math.log10(1.0 / (2.0 * total_var))
