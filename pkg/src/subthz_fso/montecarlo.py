"""Monte Carlo estimators and sweep drivers.

Work is cut into fixed-size chunks of trials. Chunk ``j`` of an estimate with
seed ``s`` draws from substreams keyed by ``(s, j, ...)`` (see
:mod:`subthz_fso.fading`), and chunk results are reduced in chunk order, so the
estimate depends only on ``(inputs, seed, trials)`` and never on how many
worker processes evaluated the chunks.

Within one estimate every strategy sees the same channel draws.
"""

from __future__ import annotations

import hashlib
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fading, hybrid, network
from .network import Topology
from .scenario import Scenario, with_overrides

__all__ = [
    "CHUNK_TRIALS",
    "LOW_CONFIDENCE_EVENTS",
    "McEstimate",
    "SweepSpec",
    "SweepRow",
    "AXES",
    "wilson_interval",
    "parse_strategy",
    "estimate",
    "estimate_outage",
    "estimate_ergodic_rate",
    "estimate_switch_rate",
    "switch_rate_of_trace",
    "derive_point_seed",
    "scenario_at",
    "run_sweep",
]

CHUNK_TRIALS = 1 << 16
LOW_CONFIDENCE_EVENTS = 20
Z95 = 1.959963984540054

LINK_STRATEGIES = ("fso", "subthz", "hard", "soft", "mrc")
AXES = ("ue_distance", "tx_snr_db", "visibility_km", "beamwidth_m")


@dataclass(frozen=True)
class McEstimate:
    value: float
    trials: int
    std_error: float
    ci95: tuple[float, float]
    events: int | None = None  # outage count; None for expectations

    @property
    def is_probability(self) -> bool:
        return self.events is not None

    @property
    def flags(self) -> str:
        if self.is_probability and self.events < LOW_CONFIDENCE_EVENTS:
            return "low-confidence"
        return ""


def wilson_interval(events: int, trials: int, z: float = Z95) -> tuple[float, float]:
    p = events / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


def _probability(events: int, trials: int) -> McEstimate:
    p = events / trials
    return McEstimate(p, trials, math.sqrt(p * (1 - p) / trials), wilson_interval(events, trials),
                      events=events)


def _mean(count: int, mean: float, m2: float) -> McEstimate:
    var = m2 / (count - 1) if count > 1 else 0.0
    se = math.sqrt(var / count)
    return McEstimate(mean, count, se, (mean - Z95 * se, mean + Z95 * se))


# --------------------------------------------------------------------------
# Strategies
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkStrategy:
    """A single hop of the given length decoded with ``name``."""

    name: str
    distance: float | None = None  # None: scenario hop length


@dataclass(frozen=True)
class ModeStrategy:
    mode: int


@dataclass(frozen=True)
class TopologyStrategy:
    topology: Topology


_STRATEGY_RE = re.compile(r"^(fso|subthz|hard|soft|mrc)(?:@([0-9.eE+]+))?$")


def parse_strategy(text: str):
    """``fso``, ``subthz``, ``hard``, ``soft``, ``mrc`` (optionally ``@<metres>``) or ``mode1``..``mode7``."""
    text = text.strip().lower()
    m = re.fullmatch(r"mode([1-7])", text)
    if m:
        return ModeStrategy(int(m.group(1)))
    m = _STRATEGY_RE.match(text)
    if not m:
        raise ValueError(f"unknown strategy {text!r}")
    distance = float(m.group(2)) if m.group(2) else None
    if distance is not None and not distance > 0:
        raise ValueError(f"strategy distance must be > 0 in {text!r}")
    return LinkStrategy(m.group(1), distance)


def _link_values(strategies: Sequence[LinkStrategy], scenario: Scenario, draws: fading.DrawSet,
                 metric: str) -> list[np.ndarray]:
    threshold = 10.0 ** (scenario.service.link_threshold_db / 10.0)
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    out = []
    for s in strategies:
        d = s.distance if s.distance is not None else scenario.geometry.hop_length
        if d not in cache:
            cache[d] = (fading.fso_link_snr(scenario, d, draws), fading.subthz_link_snr(scenario, d, draws))
        g_f, g_t = cache[d]
        soft_outage = None
        if s.name == "fso":
            eff = g_f
        elif s.name == "subthz":
            eff = g_t
        elif s.name == "hard":
            eff = np.maximum(g_f, g_t)
        elif s.name == "mrc":
            eff = hybrid.mrc_combine(g_f, g_t)
        else:
            _, eff, soft_outage = hybrid.soft_trace_flat(g_f, g_t, scenario.switching)
        if metric == "rate":
            out.append(np.log2(1.0 + eff))
        elif soft_outage is not None:
            out.append(soft_outage)
        else:
            out.append(eff < threshold)
    return out


@dataclass(frozen=True)
class _Job:
    scenario: Scenario
    strategies: tuple
    metric: str
    ue_position: float
    seed: int


def _chunk_values(job: _Job, chunk: int, n: int) -> list[np.ndarray]:
    draws = fading.DrawSet(job.seed, chunk, n)
    values: list[np.ndarray | None] = [None] * len(job.strategies)
    links = [(i, s) for i, s in enumerate(job.strategies) if isinstance(s, LinkStrategy)]
    if links:
        for (i, _), v in zip(links, _link_values([s for _, s in links], job.scenario, draws, job.metric)):
            values[i] = v
    for i, s in enumerate(job.strategies):
        if isinstance(s, LinkStrategy):
            continue
        if job.metric != "outage":
            raise ValueError("end-to-end strategies support the outage metric only")
        topo = (network.build_mode(s.mode, job.scenario.geometry, job.scenario)
                if isinstance(s, ModeStrategy) else s.topology)
        values[i] = network.e2e_outage(topo, job.scenario, job.ue_position, draws)
    return values


def _chunk_summary(args) -> list[tuple]:
    job, chunk, n = args
    out = []
    for v in _chunk_values(job, chunk, n):
        if job.metric == "outage":
            out.append((n, int(np.count_nonzero(v))))
        else:
            v = np.asarray(v, dtype=float)
            mean = float(v.mean())
            out.append((n, mean, float(np.sum((v - mean) ** 2))))
    return out


def chunk_plan(trials: int, chunk_trials: int = CHUNK_TRIALS) -> list[int]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    full, rest = divmod(trials, chunk_trials)
    return [chunk_trials] * full + ([rest] if rest else [])


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _run(job: _Job, trials: int, workers: int) -> list[McEstimate]:
    plan = chunk_plan(trials)
    summaries = _map(_chunk_summary, [(job, j, n) for j, n in enumerate(plan)], workers)
    results = []
    for i in range(len(job.strategies)):
        parts = [s[i] for s in summaries]
        if job.metric == "outage":
            results.append(_probability(sum(p[1] for p in parts), trials))
            continue
        # Chan et al. pairwise update, applied in chunk order
        count, mean, m2 = 0, 0.0, 0.0
        for n_b, mean_b, m2_b in parts:
            total = count + n_b
            delta = mean_b - mean
            mean += delta * n_b / total
            m2 += m2_b + delta * delta * count * n_b / total
            count = total
        results.append(_mean(count, mean, m2))
    return results


def _as_strategy(target, strategy):
    if isinstance(target, Topology):
        return TopologyStrategy(target)
    if isinstance(strategy, (LinkStrategy, ModeStrategy, TopologyStrategy)):
        return strategy
    parsed = parse_strategy(strategy)
    if isinstance(parsed, LinkStrategy) and target is not None:
        parsed = LinkStrategy(parsed.name, float(target))
    return parsed


def estimate(scenario: Scenario, strategies: Sequence, metric: str, trials: int, seed: int,
             ue_position: float | None = None, workers: int = 1) -> list[McEstimate]:
    """Estimate ``metric`` ('outage' or 'rate') for several strategies on shared draws."""
    if metric not in ("outage", "rate"):
        raise ValueError(f"unknown metric {metric!r}")
    if ue_position is None:
        ue_position = scenario.geometry.ue_horizontal_distance
    parsed = tuple(parse_strategy(s) if isinstance(s, str) else s for s in strategies)
    return _run(_Job(scenario, parsed, metric, float(ue_position), int(seed)), trials, workers)


def estimate_outage(scenario: Scenario, target, strategy=None, trials: int = 100_000,
                    seed: int = 0, ue_position: float | None = None,
                    workers: int = 1) -> McEstimate:
    """Outage probability of a link (``target`` = hop length in m) or a topology.

    For a link, ``strategy`` is one of fso/subthz/hard/soft/mrc and the outage
    threshold is ``service.link_threshold_db``, except for soft switching
    which reports its own hysteresis outage flag.
    """
    s = _as_strategy(target, strategy)
    return estimate(scenario, [s], "outage", trials, seed, ue_position, workers)[0]


def estimate_ergodic_rate(scenario: Scenario, link, strategy: str, trials: int = 100_000,
                          seed: int = 0, workers: int = 1) -> McEstimate:
    """Mean of log2(1 + effective SNR) in bps/Hz."""
    return estimate(scenario, [_as_strategy(link, strategy)], "rate", trials, seed,
                    workers=workers)[0]


# --------------------------------------------------------------------------
# Switching frequency
# --------------------------------------------------------------------------

def switch_rate_of_trace(gamma_fso, gamma_thz, mode: str, thresholds) -> np.ndarray:
    """Switches per step (changes / (steps - 1)) of explicit SNR traces."""
    g_f = np.asarray(gamma_fso, dtype=float)
    if g_f.shape[-1] < 2:
        raise ValueError("trace_length must be >= 2")
    if mode == "hard":
        active, _ = hybrid.hard_trace(g_f, gamma_thz)
    elif mode == "soft":
        active, _, _ = hybrid.soft_trace(g_f, gamma_thz, thresholds)
    else:
        raise ValueError(f"switch mode must be 'hard' or 'soft', got {mode!r}")
    return hybrid.count_switches(active) / (g_f.shape[-1] - 1)


def _switch_chunk(args) -> tuple:
    scenario, distance, mode, length, seed, chunk, traces = args
    draws = fading.DrawSet(seed, chunk, traces * length)
    g_f = fading.fso_link_snr(scenario, distance, draws).reshape(traces, length)
    g_t = fading.subthz_link_snr(scenario, distance, draws).reshape(traces, length)
    rates = switch_rate_of_trace(g_f, g_t, mode, scenario.switching)
    mean = float(rates.mean())
    return traces, mean, float(np.sum((rates - mean) ** 2))


def estimate_switch_rate(scenario: Scenario, link: float | None, mode: str,
                         trace_length: int = 10_000, trials: int = 1, seed: int = 0,
                         workers: int = 1) -> McEstimate:
    """Mean switches per step over ``trials`` independent block-fading traces."""
    if trace_length < 2:
        raise ValueError("trace_length must be >= 2")
    distance = scenario.geometry.hop_length if link is None else float(link)
    per_chunk = max(1, CHUNK_TRIALS // trace_length)
    plan = chunk_plan(trials, per_chunk)
    parts = _map(_switch_chunk, [(scenario, distance, mode, trace_length, int(seed), j, n)
                                 for j, n in enumerate(plan)], workers)
    count, mean, m2 = 0, 0.0, 0.0
    for n_b, mean_b, m2_b in parts:
        total = count + n_b
        delta = mean_b - mean
        mean += delta * n_b / total
        m2 += m2_b + delta * delta * count * n_b / total
        count = total
    return _mean(count, mean, m2)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    axis: str
    points: tuple[float, ...]
    trials_per_point: int
    seed: int
    strategies: tuple[str, ...]
    metric: str = "outage"

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if not self.points:
            raise ValueError("a sweep needs at least one point")
        diffs = np.diff(self.points)
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep points must be strictly monotone")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if not self.strategies:
            raise ValueError("a sweep needs at least one strategy")
        if self.metric not in ("outage", "rate"):
            raise ValueError(f"unknown metric {self.metric!r}")
        for s in self.strategies:
            parse_strategy(s)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    strategy: str
    estimate: McEstimate
    seconds: float = field(default=0.0, compare=False)


def derive_point_seed(master_seed: int, axis: str, value: float) -> int:
    """Seed of one sweep point; depends on the axis value, not its index."""
    digest = hashlib.sha256(f"{int(master_seed)}|{axis}|{float(value)!r}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def scenario_at(scenario: Scenario, axis: str, value: float) -> Scenario:
    """Scenario with the swept parameter set to ``value``."""
    if axis == "tx_snr_db":
        return with_overrides(scenario, {"service.tx_snr_db": float(value)})
    if axis == "visibility_km":
        return with_overrides(scenario, {"fso.visibility": float(value)})
    if axis == "beamwidth_m":
        return with_overrides(scenario, {"fso.beamwidth": float(value),
                                         "subthz.beamwidth": float(value)})
    if axis == "ue_distance":
        return with_overrides(scenario, {"geometry.ue_horizontal_distance": float(value)})
    raise ValueError(f"unknown axis {axis!r}")


def run_sweep(spec: SweepSpec, scenario: Scenario, workers: int = 1,
              progress: Callable[[float, float], None] | None = None) -> list[SweepRow]:
    """One estimate per (point, strategy), ordered by point then declared strategy."""
    import time

    rows: list[SweepRow] = []
    for value in spec.points:
        started = time.perf_counter()
        point = scenario_at(scenario, spec.axis, value)
        estimates = estimate(point, spec.strategies, spec.metric, spec.trials_per_point,
                             derive_point_seed(spec.seed, spec.axis, value),
                             ue_position=point.geometry.ue_horizontal_distance, workers=workers)
        elapsed = time.perf_counter() - started
        rows.extend(SweepRow(float(value), s, e, elapsed) for s, e in zip(spec.strategies, estimates))
        if progress is not None:
            progress(float(value), elapsed)
    return rows
