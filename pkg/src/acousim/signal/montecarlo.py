"""Monte-Carlo noise sweeps over already simulated received signals."""

import numpy as np

from ..exceptions import ValidationError
from .noise import add_awgn


def noise_seed(master_seed, snr_index, run, signal_index=0):
    """Independent RNG stream for one (SNR level, run, signal) triple."""
    return np.random.SeedSequence([int(master_seed), int(snr_index), int(run), int(signal_index)])


def monte_carlo_noise_sweep(clean_signals, snr_list, runs, seed=0, process=None):
    """Re-noise clean receptions for every SNR and run without re-simulating.

    ``clean_signals`` is a sequence of 1-D arrays (or a 2-D array, one row per
    signal). ``process`` maps a noisy signal to features; identity if omitted.
    Returns ``{(snr_db, run): [features per signal]}``.
    """
    if runs < 1:
        raise ValidationError("runs must be at least 1", "postprocess.monte_carlo_runs")
    process = process or (lambda x: x)
    out = {}
    for si, snr in enumerate(snr_list):
        for run in range(runs):
            feats = []
            for k, clean in enumerate(clean_signals):
                noisy = add_awgn(clean, snr, np.random.default_rng(noise_seed(seed, si, run, k)))
                feats.append(process(noisy))
            out[(snr, run)] = feats
    return out
