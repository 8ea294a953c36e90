"""Pinned parameter sets for the four figure studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .montecarlo import SweepSpec
from .scenario import MODERATE_TURBULENCE, STRONG_TURBULENCE, Scenario, with_overrides

__all__ = ["Study", "STUDIES", "OUTAGE_TRIALS", "RATE_TRIALS", "turbulence", "study_spec"]

OUTAGE_TRIALS = 10_000_000
RATE_TRIALS = 100_000


def turbulence(level: tuple[float, float, float]) -> dict:
    cn2, alpha_f, beta_f = level
    return {"fso.cn2": cn2, "fso.alpha_f": alpha_f, "fso.beta_f": beta_f,
            "fso.shapes_from_cn2": False}


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step)) + 1
    return tuple(float(np.round(start + k * step, 10)) for k in range(n))


@dataclass(frozen=True)
class Study:
    name: str
    axis: str
    points: tuple[float, ...]
    strategies: tuple[str, ...]
    metric: str
    overrides: dict

    def scenario(self, base: Scenario) -> Scenario:
        return with_overrides(base, self.overrides)

    @property
    def default_trials(self) -> int:
        return OUTAGE_TRIALS if self.metric == "outage" else RATE_TRIALS


_FIG5_POINTING = {"fso.receiver_radius": 0.1, "fso.jitter_sigma": 0.12,
                  "subthz.receiver_radius": 0.1, "subthz.jitter_sigma": 0.12}

STUDIES = {
    "fig2-distance": Study(
        "fig2-distance", "ue_distance", _grid(0.0, 400.0, 25.0),
        tuple(f"mode{m}" for m in range(1, 8)), "outage", turbulence(STRONG_TURBULENCE)),
    "fig3-power": Study(
        "fig3-power", "tx_snr_db", _grid(0.0, 50.0, 2.0),
        ("fso", "subthz", "hard", "soft", "mrc"), "outage", turbulence(MODERATE_TURBULENCE)),
    "fig4-visibility": Study(
        "fig4-visibility", "visibility_km",
        (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0),
        ("fso", "subthz", "hard", "soft", "mrc"), "rate",
        {**turbulence(STRONG_TURBULENCE), "service.tx_snr_db": 30.0}),
    # the Gaussian-beam capture approximation needs w >= r, so the axis starts at r
    "fig5-beamwidth": Study(
        "fig5-beamwidth", "beamwidth_m", _grid(0.10, 1.20, 0.05),
        tuple(f"{s}@{d}" for d in (200, 400) for s in ("fso", "subthz", "hard", "mrc")),
        "outage",
        {**turbulence(MODERATE_TURBULENCE), **_FIG5_POINTING, "service.tx_snr_db": 30.0}),
}


def study_spec(study: Study, trials: int | None = None, seed: int = 0,
               strategies: tuple[str, ...] | None = None) -> SweepSpec:
    return SweepSpec(study.axis, study.points, trials or study.default_trials, seed,
                     strategies or study.strategies, study.metric)
