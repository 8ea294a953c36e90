"""Random-variate generators for turbulence, small-scale fading and pointing error.

Every fading sampler is normalized to unit mean power (E[I] = 1 for the
optical irradiance, E[R**alpha] = 1 for alpha-mu, E[R**2] = omega for
Nakagami); deterministic path gains live in :mod:`subthz_fso.linkbudget`.
All samplers take a :class:`numpy.random.Generator` and an optional ``size``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

__all__ = [
    "PointingGeometry",
    "ChannelDraw",
    "sample_gamma_gamma",
    "gg_shapes_from_rytov",
    "rytov_variance",
    "sample_alpha_mu",
    "sample_nakagami",
    "pointing_geometry",
    "pointing_gain",
    "sample_displacement",
    "sample_pointing",
]


def _positive(**params: float) -> None:
    for name, value in params.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class PointingGeometry:
    """Collected-power model of a Gaussian beam on a circular aperture.

    a0 is the fraction collected at zero offset, w_eq the equivalent
    beamwidth and xi = w_eq / (2 * jitter_sigma).
    """

    a0: float
    w_eq: float
    xi: float


@dataclass(frozen=True)
class ChannelDraw:
    """One realization of a link's random factors.

    ``envelopes`` holds one fading magnitude per antenna path (a single entry,
    the irradiance, for FSO).
    """

    envelopes: tuple[float, ...]
    pointing_gain: float = 1.0

    def __post_init__(self) -> None:
        if any(e < 0 for e in self.envelopes):
            raise ValueError("fading envelopes must be non-negative")
        if not 0 < self.pointing_gain <= 1:
            raise ValueError("pointing gain must lie in (0, 1]")


def sample_gamma_gamma(alpha_f: float, beta_f: float, rng: np.random.Generator,
                       size=None):
    """Gamma-Gamma irradiance I = X * Y with unit-mean Gamma factors."""
    _positive(alpha_f=alpha_f, beta_f=beta_f)
    large = rng.gamma(alpha_f, 1.0 / alpha_f, size)
    small = rng.gamma(beta_f, 1.0 / beta_f, size)
    return large * small


def rytov_variance(cn2: float, wavelength: float, distance: float) -> float:
    """Plane-wave Rytov variance 1.23 Cn2 k^(7/6) L^(11/6)."""
    _positive(cn2=cn2, wavelength=wavelength, distance=distance)
    k = 2.0 * math.pi / wavelength
    return 1.23 * cn2 * k ** (7.0 / 6.0) * distance ** (11.0 / 6.0)


def gg_shapes_from_rytov(cn2: float, wavelength: float, distance: float) -> tuple[float, float]:
    """Gamma-Gamma (alpha_f, beta_f) for plane-wave propagation over ``distance``.

    >>> a, b = gg_shapes_from_rytov(1e-12, 1550e-9, 200.0)
    >>> round(a, 2), round(b, 2)
    (4.35, 2.5)
    """
    s2 = rytov_variance(cn2, wavelength, distance)
    s125 = s2 ** 1.2  # sigma_R^(12/5)
    alpha = 1.0 / math.expm1(0.49 * s2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return alpha, beta


def sample_alpha_mu(alpha: float, mu: float, rng: np.random.Generator, size=None):
    """Envelope R with R**alpha ~ Gamma(mu, scale 1/mu)."""
    _positive(alpha=alpha, mu=mu)
    return rng.gamma(mu, 1.0 / mu, size) ** (1.0 / alpha)


def sample_nakagami(m: float, omega: float, rng: np.random.Generator, size=None):
    """Nakagami-m envelope with E[R**2] = omega."""
    if not m >= 0.5:
        raise ValueError(f"Nakagami shape m must be >= 0.5, got {m!r}")
    _positive(omega=omega)
    return np.sqrt(rng.gamma(m, omega / m, size))


def pointing_geometry(receiver_radius: float, beamwidth: float,
                      jitter_sigma: float) -> PointingGeometry:
    """Aperture/beam constants of the zero-boresight Rayleigh pointing model.

    ``jitter_sigma == 0`` is accepted and yields ``xi = inf`` (perfect tracking).
    """
    _positive(receiver_radius=receiver_radius, beamwidth=beamwidth)
    if jitter_sigma < 0:
        raise ValueError("jitter_sigma must be >= 0")
    v = math.sqrt(math.pi / 2.0) * receiver_radius / beamwidth
    erf_v = float(erf(v))
    a0 = erf_v ** 2
    # w_eq^2 = w^2 sqrt(pi) erf(v) / (2 v exp(-v^2)), evaluated in logs; it
    # overflows to inf for beams far narrower than the aperture (then hp == a0)
    log_ratio = 0.5 * math.log(math.pi) + math.log(erf_v) + v * v - math.log(2.0 * v)
    w_eq = beamwidth * math.exp(0.5 * log_ratio) if log_ratio < 1400 else math.inf
    xi = math.inf if jitter_sigma == 0 else w_eq / (2.0 * jitter_sigma)
    return PointingGeometry(a0=a0, w_eq=w_eq, xi=xi)


def pointing_gain(geom: PointingGeometry, displacement):
    """Collected fraction hp = a0 exp(-2 r^2 / w_eq^2) at radial offset ``displacement``."""
    d = np.asarray(displacement, dtype=float)
    out = geom.a0 * np.exp(-2.0 * d * d / (geom.w_eq * geom.w_eq))
    return out if out.ndim else float(out)


def sample_displacement(jitter_sigma: float, rng: np.random.Generator, size=None):
    """Radial beam offset, Rayleigh with per-axis standard deviation ``jitter_sigma``."""
    if jitter_sigma < 0:
        raise ValueError("jitter_sigma must be >= 0")
    if jitter_sigma == 0:
        return np.zeros(size) if size is not None else 0.0
    return rng.rayleigh(jitter_sigma, size)


def sample_pointing(geom: PointingGeometry, jitter_sigma: float,
                    rng: np.random.Generator, size=None):
    """Random pointing gain in (0, a0]."""
    return pointing_gain(geom, sample_displacement(jitter_sigma, rng, size))
