"""Per-chunk fading draws shared by every strategy evaluated on the same trials.

Each random component (FSO irradiance, FSO beam offset, sub-THz envelopes,
sub-THz beam offset, access envelopes) of each backhaul slot comes from its own
substream keyed by ``(seed, chunk, slot, component)``. A component therefore
has the same values whether or not other components are drawn, which makes
strategy subsets reproduce supersets and lets strategies be compared on
identical channel realizations.
"""

from __future__ import annotations

import numpy as np

from . import channels
from .linkbudget import fso_budget, fso_snr, mmwave_budget, rf_snr, subthz_budget
from .scenario import Scenario

__all__ = ["DrawSet", "fso_shapes", "fso_link_snr", "subthz_link_snr", "access_link_snr"]

ACCESS_SLOT = 1000
_FSO_IRRADIANCE, _FSO_OFFSET, _THZ_ENVELOPE, _THZ_OFFSET, _ACCESS_ENVELOPE = range(5)


class DrawSet:
    """Lazily drawn unit-mean fading variates for ``n`` trials of one chunk."""

    def __init__(self, seed: int, chunk: int, n: int):
        if n < 1:
            raise ValueError("a draw set needs at least one trial")
        self.seed = int(seed)
        self.chunk = int(chunk)
        self.n = int(n)
        self._cache: dict[tuple, np.ndarray] = {}

    def _rng(self, slot: int, component: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.chunk, slot, component]))

    def irradiance(self, slot: int, alpha_f: float, beta_f: float) -> np.ndarray:
        key = ("irr", slot, alpha_f, beta_f)
        if key not in self._cache:
            rng = self._rng(slot, _FSO_IRRADIANCE)
            self._cache[key] = channels.sample_gamma_gamma(alpha_f, beta_f, rng, self.n)
        return self._cache[key]

    def offset(self, slot: int, optical: bool, jitter_sigma: float) -> np.ndarray:
        key = ("off", slot, optical, jitter_sigma)
        if key not in self._cache:
            rng = self._rng(slot, _FSO_OFFSET if optical else _THZ_OFFSET)
            self._cache[key] = channels.sample_displacement(jitter_sigma, rng, self.n)
        return self._cache[key]

    def alpha_mu(self, slot: int, alpha: float, mu: float, paths: int) -> np.ndarray:
        key = ("amu", slot, alpha, mu, paths)
        if key not in self._cache:
            rng = self._rng(slot, _THZ_ENVELOPE)
            self._cache[key] = channels.sample_alpha_mu(alpha, mu, rng, (self.n, paths))
        return self._cache[key]

    def nakagami(self, m: float, paths: int) -> np.ndarray:
        key = ("nak", m, paths)
        if key not in self._cache:
            rng = self._rng(ACCESS_SLOT, _ACCESS_ENVELOPE)
            self._cache[key] = channels.sample_nakagami(m, 1.0, rng, (self.n, paths))
        return self._cache[key]


def fso_shapes(scenario: Scenario, distance: float) -> tuple[float, float]:
    p = scenario.fso
    if p.shapes_from_cn2:
        return channels.gg_shapes_from_rytov(p.cn2, p.wavelength, distance)
    return p.alpha_f, p.beta_f


def fso_link_snr(scenario: Scenario, distance: float, draws: DrawSet, slot: int = 0) -> np.ndarray:
    p = scenario.fso
    budget = fso_budget(p, distance, scenario.service.tx_snr_db)
    geom = channels.pointing_geometry(p.receiver_radius, p.beamwidth, p.jitter_sigma)
    hp = channels.pointing_gain(geom, draws.offset(slot, True, p.jitter_sigma))
    irr = draws.irradiance(slot, *fso_shapes(scenario, distance))
    return fso_snr(budget.mean_snr_linear, irr, hp, p.conversion_coeff)


def subthz_link_snr(scenario: Scenario, distance: float, draws: DrawSet, slot: int = 0) -> np.ndarray:
    p = scenario.subthz
    budget = subthz_budget(p, distance, scenario.service.tx_snr_db)
    geom = channels.pointing_geometry(p.receiver_radius, p.beamwidth, p.jitter_sigma)
    hp = channels.pointing_gain(geom, draws.offset(slot, False, p.jitter_sigma))
    env = draws.alpha_mu(slot, p.alpha, p.mu, p.n_tx * p.n_rx)
    return rf_snr(budget.mean_snr_linear, env, hp)


def access_link_snr(scenario: Scenario, slant_distance: float, draws: DrawSet) -> np.ndarray:
    """mmWave access SNR; misalignment is not modelled on the access link."""
    p = scenario.mmwave
    budget = mmwave_budget(p, slant_distance, scenario.service.tx_snr_db)
    return rf_snr(budget.mean_snr_linear, draws.nakagami(p.m, p.n_tx * p.n_rx))
