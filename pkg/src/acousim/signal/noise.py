"""Calibrated additive noise and interference."""

import numpy as np

from ..exceptions import ZeroPowerInterferer, ZeroPowerSignal

ACTIVE_THRESHOLD = 0.01


def active_power(x, threshold=ACTIVE_THRESHOLD):
    """Mean power over samples whose magnitude exceeds ``threshold`` x peak."""
    x = np.asarray(x, dtype=float)
    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak == 0:
        return 0.0
    active = np.abs(x) > threshold * peak
    return float(np.mean(x[active] ** 2))


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def add_awgn(signal, snr_db, seed=None, reference=None):
    """Add white Gaussian noise at ``snr_db`` relative to the active signal power.

    ``reference`` (defaults to ``signal``) is the clean signal whose power
    defines the SNR. ``snr_db`` of ``None`` or ``inf`` returns a copy.
    """
    x = np.asarray(signal, dtype=float)
    if snr_db is None or np.isposinf(snr_db):
        return x.copy()
    p = active_power(x if reference is None else reference)
    if p == 0:
        raise ZeroPowerSignal("cannot set an SNR on a zero-power signal")
    sigma = np.sqrt(p / 10.0 ** (snr_db / 10.0))
    return x + sigma * _rng(seed).standard_normal(x.shape)


def add_interference(signal, interferer, sir_db):
    """Scale ``interferer`` to ``sir_db`` below the signal power and add it."""
    x = np.asarray(signal, dtype=float)
    if sir_db is None or np.isposinf(sir_db):
        return x.copy()
    i = np.asarray(interferer, dtype=float)[: len(x)]
    i = np.pad(i, (0, len(x) - len(i)))
    p_i = active_power(i)
    if p_i == 0:
        raise ZeroPowerInterferer("interferer has zero power")
    p_s = active_power(x)
    if p_s == 0:
        raise ZeroPowerSignal("cannot set an SIR on a zero-power signal")
    return x + i * np.sqrt(p_s / 10.0 ** (sir_db / 10.0) / p_i)
