"""Perpendicular magnetic recording simulator and decoding toolkit.

Pipeline: tanh-step readback synthesis with electronic/media/jitter noise
(`waveform`), MMSE equalization to a PR target (`equalize`), BCJR MAP
detection (`trellis`), LDPC sum-product decoding (`ldpc`), their turbo
loop (`turboeq`), coordinate-saturation list decoding (`rvcm`), and a
seeded Monte Carlo BER/FER harness with CLI (`harness`, `cli`).
"""

from .equalize import EqualizerDesign, PrTarget, design_mmse
from .harness import BerRecord, ExperimentConfig, run_point, run_sweep
from .ldpc import (
    BpConfig,
    DecodeResult,
    ParityCheckMatrix,
    bp_decode,
    encode,
    load_alist,
    save_alist,
)
from .llr import LLR_INF
from .rvcm import CandidateSet, RvcmConfig, euclidean_metric, rvcm_decode, select_critical
from .trellis import DetectorConfig, TrellisSpec, bcjr, build_trellis
from .turboeq import LoopConfig, LoopResult, run
from .waveform import (
    BipolarFrame,
    NoiseConfig,
    ReadbackFrame,
    StepParams,
    apply_noise,
    dibit_response,
    simulate_readback,
    snr_to_sigma,
    step_derivative,
    step_response,
    synthesize_noiseless,
)

__version__ = "0.1.0"
