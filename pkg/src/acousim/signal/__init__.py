from .chirp import ChirpSpec, generate_chirp
from .compression import CompressedEnvelope, agc, envelope, fixed_size_downsample, matched_filter
from .estimators import (
    EnvelopeDetector,
    FixedLengthDownsampler,
    NoiseInjector,
    PulseCompressor,
    make_ranging_pipeline,
)
from .montecarlo import monte_carlo_noise_sweep, noise_seed
from .noise import active_power, add_awgn, add_interference
from .resample import resample

__all__ = [
    "ChirpSpec", "generate_chirp", "CompressedEnvelope", "agc", "envelope", "fixed_size_downsample",
    "matched_filter", "EnvelopeDetector", "FixedLengthDownsampler", "NoiseInjector", "PulseCompressor",
    "make_ranging_pipeline", "monte_carlo_noise_sweep", "noise_seed", "active_power", "add_awgn",
    "add_interference", "resample",
]
