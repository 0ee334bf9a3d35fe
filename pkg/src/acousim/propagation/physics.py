"""Closed-form propagation physics: sound speed, air and wall attenuation."""

import numpy as np

from ..exceptions import BandOutOfRange, ValidationError

F_MIN = 125.0 / np.sqrt(2.0)
F_MAX = 50_000.0

_T0 = 293.15  # reference temperature, K
_T01 = 273.16  # triple point of water, K
_NEPER_PER_DB = 1.0 / (20.0 * np.log10(np.e))


def speed_of_sound(temperature_c):
    """Speed of sound in air (m/s): ``331.3 sqrt((273.15 + theta) / 273.15)``."""
    t = np.asarray(temperature_c, dtype=float)
    if np.any(t <= -273.15):
        raise ValidationError("temperature below absolute zero", "temperature_c")
    v = 331.3 * np.sqrt((273.15 + t) / 273.15)
    return float(v) if v.ndim == 0 else v


def air_absorption_coefficient(band_hz, temperature_c=20.0, humidity=0.5, pressure_kpa=101.325):
    """Atmospheric amplitude attenuation in Np/m (ISO 9613-1 pure-tone model).

    Classical absorption plus the oxygen and nitrogen vibrational relaxation
    terms. ``humidity`` is relative humidity as a fraction.
    """
    f = np.asarray(band_hz, dtype=float)
    if np.any(f < F_MIN) or np.any(f > F_MAX):
        raise BandOutOfRange(f"frequency outside [{F_MIN:.1f}, {F_MAX:.0f}] Hz", "band_hz")
    if not (0.0 <= humidity <= 1.0):
        raise ValidationError("humidity must lie in [0, 1]", "humidity")
    T = 273.15 + float(temperature_c)
    pa = pressure_kpa / 101.325

    c_sat = -6.8346 * (_T01 / T) ** 1.261 + 4.6151
    h = 100.0 * humidity * 10.0**c_sat / pa  # molar water-vapour concentration, %
    fr_o = pa * (24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h))
    fr_n = pa * (T / _T0) ** -0.5 * (9.0 + 280.0 * h * np.exp(-4.170 * ((T / _T0) ** (-1.0 / 3.0) - 1.0)))

    db_per_m = 8.686 * f**2 * (
        1.84e-11 / pa * (T / _T0) ** 0.5
        + (T / _T0) ** -2.5
        * (
            0.01275 * np.exp(-2239.1 / T) / (fr_o + f**2 / fr_o)
            + 0.1068 * np.exp(-3352.0 / T) / (fr_n + f**2 / fr_n)
        )
    )
    alpha = db_per_m * _NEPER_PER_DB
    return float(alpha) if alpha.ndim == 0 else alpha


def air_absorption_factor(alpha_abs, distance):
    """Amplitude factor ``exp(-alpha_abs * d)`` for ``alpha_abs`` in Np/m."""
    a = np.asarray(alpha_abs, dtype=float)
    d = np.asarray(distance, dtype=float)
    if np.any(a < 0) or np.any(d < 0):
        raise ValidationError("absorption and distance must be non-negative")
    out = np.exp(-a * d)
    return float(out) if out.ndim == 0 else out


def reflection_amplitude(a_incident, alpha_material):
    """Reflected amplitude ``a_incident * sqrt(1 - alpha)`` for energy absorption ``alpha``."""
    alpha = np.asarray(alpha_material, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise ValidationError("absorption must lie in [0, 1]", "alpha_material")
    out = np.asarray(a_incident, dtype=float) * np.sqrt(1.0 - alpha)
    return float(out) if out.ndim == 0 else out
