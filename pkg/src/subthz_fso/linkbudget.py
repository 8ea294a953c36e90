"""Deterministic path gains and instantaneous SNR composition.

Received SNR is split into a deterministic mean (transmit SNR times path gain)
and the unit-mean random factors of :mod:`subthz_fso.channels`. Noise power is
folded into the transmit SNR, so only relative levels are meaningful.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .channels import ChannelDraw
from .scenario import FsoLinkParams, MmWaveLinkParams, SubThzLinkParams

__all__ = [
    "Technology",
    "LinkBudget",
    "db_to_linear",
    "linear_to_db",
    "kim_extinction",
    "fso_path_gain",
    "water_vapour_density",
    "oxygen_specific_attenuation",
    "water_specific_attenuation",
    "gaseous_specific_attenuation",
    "free_space_gain",
    "subthz_path_gain",
    "mmwave_path_gain",
    "fso_budget",
    "subthz_budget",
    "mmwave_budget",
    "instantaneous_snr",
    "fso_snr",
    "rf_snr",
]

MIN_RF_DISTANCE = 1.0  # m; far-field guard for the free-space term


class Technology(str, enum.Enum):
    FSO = "fso"
    SUBTHZ = "subthz"
    MMWAVE = "mmwave"


@dataclass(frozen=True)
class LinkBudget:
    mean_snr_linear: float
    technology: Technology

    def __post_init__(self) -> None:
        if not self.mean_snr_linear >= 0:
            raise ValueError("mean_snr_linear must be >= 0")


def db_to_linear(x):
    out = np.power(10.0, np.asarray(x, dtype=float) / 10.0)
    return out if out.ndim else float(out)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def _positive(**params: float) -> None:
    for name, value in params.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value!r}")


# --------------------------------------------------------------------------
# FSO
# --------------------------------------------------------------------------

def _kim_exponent(visibility_km: float) -> float:
    v = visibility_km
    if v > 50:
        return 1.6
    if v > 6:
        return 1.3
    if v > 1:
        return 0.16 * v + 0.34
    if v > 0.5:
        return v - 0.5
    return 0.0


def kim_extinction(visibility_km: float, wavelength_m: float) -> float:
    """Kim-model extinction coefficient in 1/m."""
    _positive(visibility_km=visibility_km, wavelength_m=wavelength_m)
    q = _kim_exponent(visibility_km)
    return 3.91 / (visibility_km * 1e3) * (wavelength_m / 550e-9) ** (-q)


def fso_path_gain(visibility_km: float, wavelength_m: float, distance_m: float) -> float:
    """Beer-Lambert transmittance exp(-sigma L) of a clear-line-of-sight FSO path."""
    _positive(distance_m=distance_m)
    return math.exp(-kim_extinction(visibility_km, wavelength_m) * distance_m)


# --------------------------------------------------------------------------
# Gaseous absorption (oxygen + water vapour), 1-350 GHz
# --------------------------------------------------------------------------

GASEOUS_MODEL_RANGE_HZ = (1e9, 350e9)


def water_vapour_density(temperature_k: float, humidity: float) -> float:
    """Water-vapour density in g/m^3 from temperature and relative humidity (0-1)."""
    t_c = temperature_k - 273.15
    e_sat = 6.1121 * math.exp(17.502 * t_c / (t_c + 240.97))  # hPa, over water
    return 216.7 * humidity * e_sat / temperature_k


def oxygen_specific_attenuation(f_ghz: float, pressure_hpa: float, temperature_k: float) -> float:
    """Dry-air specific attenuation in dB/km (60 GHz complex and the 118.75 GHz line)."""
    rp = pressure_hpa / 1013.0
    rt = 288.0 / temperature_k

    def below57(f: float) -> float:
        return (7.27 * rt / (f * f + 0.351 * rp**2 * rt**2)
                + 7.5 / ((f - 57.0) ** 2 + 2.44 * rp**2 * rt**5)) * f * f * rp**2 * rt**2 * 1e-3

    def above63(f: float) -> float:
        return (2e-4 * rt**1.5 * (1.0 - 1.2e-5 * f**1.5)
                + 4.0 / ((f - 63.0) ** 2 + 1.5 * rp**2 * rt**5)
                + 0.28 * rt**2 / ((f - 118.75) ** 2 + 2.84 * rp**2 * rt**2)) * f * f * rp**2 * rt**2 * 1e-3

    f = f_ghz
    if f <= 57.0:
        return below57(f)
    if f <= 63.0:
        return ((f - 60.0) * (f - 63.0) / 18.0 * below57(57.0)
                - 1.66 * rp**2 * rt**8.5 * (f - 57.0) * (f - 63.0)
                + (f - 57.0) * (f - 60.0) / 18.0 * above63(63.0))
    return above63(f)


def water_specific_attenuation(f_ghz: float, pressure_hpa: float, temperature_k: float,
                               rho: float) -> float:
    """Water-vapour specific attenuation in dB/km (22.2, 183.3, 325.2 GHz lines)."""
    rp = pressure_hpa / 1013.0
    rt = 288.0 / temperature_k
    f = f_ghz
    return (3.27e-2 * rt
            + 1.67e-3 * rho * rt**7 / rp
            + 7.7e-4 * math.sqrt(f)
            + 3.79 / ((f - 22.235) ** 2 + 9.81 * rp**2 * rt)
            + 11.73 * rt / ((f - 183.31) ** 2 + 11.85 * rp**2 * rt)
            + 4.01 * rt / ((f - 325.153) ** 2 + 10.44 * rp**2 * rt)) * f * f * rho * rp * rt * 1e-4


def gaseous_specific_attenuation(frequency_hz: float, pressure_pa: float,
                                 temperature_k: float, humidity: float) -> float:
    """Total oxygen + water-vapour attenuation in dB/km."""
    lo, hi = GASEOUS_MODEL_RANGE_HZ
    if not lo <= frequency_hz <= hi:
        raise ValueError(f"frequency {frequency_hz:g} Hz outside gaseous model range "
                         f"[{lo:g}, {hi:g}] Hz")
    _positive(pressure_pa=pressure_pa, temperature_k=temperature_k)
    if not 0 <= humidity <= 1:
        raise ValueError("humidity must lie in [0, 1]")
    f_ghz = frequency_hz / 1e9
    p_hpa = pressure_pa / 100.0
    rho = water_vapour_density(temperature_k, humidity)
    return (oxygen_specific_attenuation(f_ghz, p_hpa, temperature_k)
            + water_specific_attenuation(f_ghz, p_hpa, temperature_k, rho))


# --------------------------------------------------------------------------
# RF links
# --------------------------------------------------------------------------

def free_space_gain(frequency_hz: float, distance_m: float) -> float:
    """Friis term (c / (4 pi f L))^2."""
    return (speed_of_light / (4.0 * math.pi * frequency_hz * distance_m)) ** 2


def _check_rf(frequency_hz: float, distance_m: float) -> None:
    _positive(frequency_hz=frequency_hz)
    if not distance_m >= MIN_RF_DISTANCE:
        raise ValueError(f"RF link distance must be >= {MIN_RF_DISTANCE} m, got {distance_m!r}")


def subthz_path_gain(frequency_hz: float, distance_m: float, tx_gain_db: float,
                     rx_gain_db: float, pressure_pa: float, temperature_k: float,
                     humidity: float) -> float:
    _check_rf(frequency_hz, distance_m)
    kappa_db_per_m = gaseous_specific_attenuation(frequency_hz, pressure_pa, temperature_k,
                                                  humidity) / 1e3
    gains = 10.0 ** ((tx_gain_db + rx_gain_db) / 10.0)
    return gains * free_space_gain(frequency_hz, distance_m) * 10.0 ** (-kappa_db_per_m * distance_m / 10.0)


def mmwave_path_gain(frequency_hz: float, distance_m: float, tx_gain_db: float,
                     rx_gain_db: float, oxygen_db_per_km: float,
                     rain_db_per_km: float) -> float:
    _check_rf(frequency_hz, distance_m)
    if oxygen_db_per_km < 0 or rain_db_per_km < 0:
        raise ValueError("specific attenuations must be >= 0")
    gains = 10.0 ** ((tx_gain_db + rx_gain_db) / 10.0)
    absorption_db = (oxygen_db_per_km + rain_db_per_km) * distance_m / 1e3
    return gains * free_space_gain(frequency_hz, distance_m) * 10.0 ** (-absorption_db / 10.0)


# --------------------------------------------------------------------------
# Budgets and SNR composition
# --------------------------------------------------------------------------

def fso_budget(params: FsoLinkParams, distance_m: float, tx_snr_db: float) -> LinkBudget:
    # IM/DD: electrical SNR scales with the square of the optical channel gain
    h_l = fso_path_gain(params.visibility, params.wavelength, distance_m)
    return LinkBudget(10.0 ** (tx_snr_db / 10.0) * h_l * h_l, Technology.FSO)


def subthz_budget(params: SubThzLinkParams, distance_m: float, tx_snr_db: float) -> LinkBudget:
    g = subthz_path_gain(params.frequency, distance_m, params.tx_gain_db, params.rx_gain_db,
                         params.pressure, params.temperature, params.humidity)
    return LinkBudget(10.0 ** (tx_snr_db / 10.0) * g, Technology.SUBTHZ)


def mmwave_budget(params: MmWaveLinkParams, distance_m: float, tx_snr_db: float) -> LinkBudget:
    g = mmwave_path_gain(params.frequency, distance_m, params.tx_gain_db, params.rx_gain_db,
                         params.oxygen_atten_db_per_km, params.rain_atten_db_per_km)
    return LinkBudget(10.0 ** (tx_snr_db / 10.0) * g, Technology.MMWAVE)


def fso_snr(mean_snr, irradiance, hp, conversion_coeff: float = 1.0):
    """IM/DD electrical SNR: mean_snr * (eta I hp)^2."""
    x = conversion_coeff * np.asarray(irradiance) * hp
    return mean_snr * x * x


def rf_snr(mean_snr, envelopes, hp=1.0, combining: str = "mrc"):
    """RF SNR from per-path envelopes (last axis = antenna path).

    ``mrc`` sums the path powers, ``single`` uses only the first path. The
    pointing gain applies once to the aggregate (one dish per link end).
    """
    env = np.asarray(envelopes, dtype=float)
    if env.shape[-1] == 0:
        raise ValueError("at least one antenna path is required")
    if combining == "mrc":
        power = np.sum(env * env, axis=-1)
    elif combining == "single":
        power = env[..., 0] ** 2
    else:
        raise ValueError(f"unknown combining {combining!r}")
    hp = np.asarray(hp)
    return mean_snr * hp * hp * power


def instantaneous_snr(budget: LinkBudget, draw: ChannelDraw, combining: str = "mrc",
                      conversion_coeff: float = 1.0) -> float:
    """SNR of one link realization."""
    if not draw.envelopes:
        raise ValueError("channel draw has no envelopes")
    if budget.technology is Technology.FSO:
        if len(draw.envelopes) != 1:
            raise ValueError("an FSO draw carries exactly one irradiance value")
        return float(fso_snr(budget.mean_snr_linear, draw.envelopes[0], draw.pointing_gain,
                             conversion_coeff))
    return float(rf_snr(budget.mean_snr_linear, np.asarray(draw.envelopes), draw.pointing_gain,
                        combining))
