"""Acceptance criteria 1-10, each at its stated sample size and tolerance.

Every criterion records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

from __future__ import annotations

import functools
import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from subthz_fso import channels, cli, fading, hybrid, linkbudget as lb, montecarlo as mc
from subthz_fso.scenario import MODERATE_TURBULENCE, table1_defaults, with_overrides
from subthz_fso.studies import STUDIES, study_spec, turbulence

RESULTS: dict[int, tuple[bool, str]] = {}
SEED = 2024


def record(number: int, checks: list[tuple[str, bool]], detail: str = "") -> None:
    ok = all(passed for _, passed in checks)
    failed = [name for name, passed in checks if not passed]
    text = detail if ok else f"failed: {'; '.join(failed)}" + (f" | {detail}" if detail else "")
    RESULTS[number] = (ok, text)
    assert ok, text


def summary_lines() -> list[str]:
    return [f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}"
            for n, (ok, text) in sorted(RESULTS.items())]


def within(est: float, truth: float, se: float, k: float = 3.0) -> bool:
    return abs(est - truth) < k * se


# --------------------------------------------------------------------------
# shared sweeps
# --------------------------------------------------------------------------

def _sweep_table(study_name: str, trials: int, seed: int = SEED):
    study = STUDIES[study_name]
    rows = mc.run_sweep(study_spec(study, trials, seed), study.scenario(table1_defaults()))
    table: dict[str, dict[float, mc.McEstimate]] = {}
    for row in rows:
        table.setdefault(row.strategy, {})[row.axis_value] = row.estimate
    return table


@functools.lru_cache(maxsize=None)
def fig3_table():
    started = time.perf_counter()
    table = _sweep_table("fig3-power", 10**6)
    return table, time.perf_counter() - started


@functools.lru_cache(maxsize=None)
def fig2_table():
    return _sweep_table("fig2-distance", 10**6)


@functools.lru_cache(maxsize=None)
def fig5_table():
    return _sweep_table("fig5-beamwidth", 10**6)


@functools.lru_cache(maxsize=None)
def fig4_table():
    return _sweep_table("fig4-visibility", STUDIES["fig4-visibility"].default_trials)


def crossing(curve: dict[float, mc.McEstimate], level: float) -> float:
    """Axis value where a decreasing outage curve first drops below ``level``.

    Log-linear interpolation between the last grid point at or above ``level``
    and the first one below it; zero estimates are floored at half an event.
    """
    xs = sorted(curve)
    logp = [math.log10(max(curve[x].value, 0.5 / curve[x].trials)) for x in xs]
    target = math.log10(level)
    for k in range(1, len(xs)):
        if curve[xs[k]].value < level <= curve[xs[k - 1]].value:
            frac = (logp[k - 1] - target) / (logp[k - 1] - logp[k])
            return xs[k - 1] + frac * (xs[k] - xs[k - 1])
    return math.nan


# --------------------------------------------------------------------------
# 1. distribution oracles
# --------------------------------------------------------------------------

def test_criterion_01_distribution_oracles():
    started = time.perf_counter()
    n = 10**6
    rng = np.random.default_rng(SEED)
    checks = []

    def moments(name, x, m1, m2):
        se1 = x.std() / math.sqrt(n)
        se2 = (x**2).std() / math.sqrt(n)
        checks.append((f"{name} mean", within(x.mean(), m1, se1)))
        checks.append((f"{name} second moment", within(np.mean(x**2), m2, se2)))

    for a, b in [(4.343, 2.492), (5.838, 4.249)]:
        moments(f"GG({a},{b})", channels.sample_gamma_gamma(a, b, rng, n), 1.0, (1 + 1 / a) * (1 + 1 / b))
    for alpha, mu in [(2.0, 3.0), (3.0, 1.5), (1.5, 0.8)]:
        m1 = math.gamma(mu + 1 / alpha) / (mu ** (1 / alpha) * math.gamma(mu))
        m2 = math.gamma(mu + 2 / alpha) / (mu ** (2 / alpha) * math.gamma(mu))
        moments(f"alpha-mu({alpha},{mu})", channels.sample_alpha_mu(alpha, mu, rng, n), m1, m2)
    for m, omega in [(1.0, 1.0), (3.0, 1.0), (2.0, 2.0)]:
        m1 = math.gamma(m + 0.5) / math.gamma(m) * math.sqrt(omega / m)
        moments(f"Nakagami({m},{omega})", channels.sample_nakagami(m, omega, rng, n), m1, omega)

    for mu in (1.0, 3.0):
        p = stats.ks_2samp(channels.sample_alpha_mu(2.0, mu, rng, 10**5),
                           channels.sample_nakagami(mu, 1.0, rng, 10**5)).pvalue
        checks.append((f"alpha-mu(2,{mu}) vs Nakagami({mu}) p={p:.3f}", p > 0.01))
    p = stats.ks_2samp(channels.sample_nakagami(1.0, 1.0, rng, 10**5),
                       rng.rayleigh(math.sqrt(0.5), 10**5)).pvalue
    checks.append((f"Nakagami(1) vs Rayleigh p={p:.3f}", p > 0.01))
    elapsed = time.perf_counter() - started
    checks.append((f"runtime {elapsed:.1f} s < 30 s", elapsed < 30))
    record(1, checks, f"{len(checks) - 1} moment/identity checks in {elapsed:.1f} s")


# --------------------------------------------------------------------------
# 2. pointing oracle
# --------------------------------------------------------------------------

def test_criterion_02_pointing_cdf():
    n = 10**5
    rng = np.random.default_rng(SEED)
    checks, worst = [], 0.0
    geometries = [(0.2, 0.4, 0.05)] + [(0.1, w, 0.12) for w in (0.2, 0.4, 0.6, 1.0)]
    for r, w, sigma in geometries:
        g = channels.pointing_geometry(r, w, sigma)
        hp = channels.sample_pointing(g, sigma, rng, n)
        d = stats.kstest(hp, lambda h: np.clip(h / g.a0, 0.0, 1.0) ** (g.xi**2)).statistic
        limit = 3 * 0.5 / math.sqrt(n)  # three standard errors of an ECDF at its widest
        worst = max(worst, d / limit)
        checks.append((f"r={r} w={w} sigma={sigma}: sup {d:.4f} vs {limit:.4f}", d < limit))
    record(2, checks, f"worst sup-distance {worst:.2f} of the 3-SE bound over {len(geometries)} geometries")


# --------------------------------------------------------------------------
# 3. closed-form Rayleigh outage
# --------------------------------------------------------------------------

def test_criterion_03_rayleigh_outage():
    base = with_overrides(table1_defaults(), {"subthz.alpha": 2.0, "subthz.mu": 1.0, "subthz.n_tx": 1,
                                               "subthz.n_rx": 1, "subthz.jitter_sigma": 0.0})
    a0 = channels.pointing_geometry(base.subthz.receiver_radius, base.subthz.beamwidth, 0.0).a0
    offset_db = lb.linear_to_db(lb.subthz_budget(base.subthz, 200.0, 0.0).mean_snr_linear * a0**2)
    gamma_th = 10 ** (base.service.link_threshold_db / 10)
    checks, zs = [], []
    for gbar_db in (0.0, 10.0, 20.0, 30.0):
        s = with_overrides(base, {"service.tx_snr_db": gbar_db - offset_db})
        est = mc.estimate_outage(s, 200.0, "subthz", trials=10**6, seed=SEED)
        truth = 1 - math.exp(-gamma_th / 10 ** (gbar_db / 10))
        z = (est.value - truth) / est.std_error
        zs.append(f"{gbar_db:.0f} dB z={z:+.2f}")
        checks.append((f"gbar={gbar_db} dB: {est.value:.5g} vs {truth:.5g}", abs(z) < 3))
    record(3, checks, ", ".join(zs))


# --------------------------------------------------------------------------
# 4. per-sample dominance
# --------------------------------------------------------------------------

def test_criterion_04_dominance():
    violations = 0
    cases = 0
    for tx in (10.0, 20.0, 25.0, 30.0):
        for cn2 in ("strong", "moderate"):
            s = table1_defaults()
            if cn2 == "moderate":
                s = with_overrides(s, turbulence(MODERATE_TURBULENCE))
            s = with_overrides(s, {"service.tx_snr_db": tx})
            draws = fading.DrawSet(SEED, cases, 10**5)
            g_f = fading.fso_link_snr(s, 200.0, draws)
            g_t = fading.subthz_link_snr(s, 200.0, draws)
            thr = 10 ** (s.service.link_threshold_db / 10)
            hard = hybrid.hard_trace(g_f, g_t)[1]
            mrc = hybrid.mrc_combine(g_f, g_t)
            o_f, o_t, o_h, o_m = (hybrid.outage_decision(x, thr) for x in (g_f, g_t, hard, mrc))
            violations += np.count_nonzero(o_m & ~o_h)
            violations += np.count_nonzero(o_h & ~(o_f & o_t))
            r_f, r_t, r_h, r_m = (np.log2(1 + x) for x in (g_f, g_t, hard, mrc))
            violations += np.count_nonzero(r_m < r_h) + np.count_nonzero(r_h < np.maximum(r_f, r_t))
            cases += 1
    record(4, [(f"{violations} violations", violations == 0)],
           f"0 violations over {cases} scenarios x 1e5 shared draws")


# --------------------------------------------------------------------------
# 5. Fig. 3 orderings and gains
# --------------------------------------------------------------------------

FIG3_GAIN_TARGETS = {"hard over subthz": 5.3, "hard over fso": 1.4, "mrc over hard": 2.5}


def test_criterion_05_fig3_gains():
    table, elapsed = fig3_table()
    snr = {s: crossing(table[s], 1e-4) for s in ("fso", "subthz", "hard", "mrc")}
    gains = {"hard over subthz": snr["subthz"] - snr["hard"],
             "hard over fso": snr["fso"] - snr["hard"],
             "mrc over hard": snr["hard"] - snr["mrc"]}
    checks = [(f"runtime {elapsed:.0f} s < 300 s", elapsed < 300)]
    for name, gain in gains.items():
        checks.append((f"{name} sign ({gain:+.2f} dB)", gain > 0))
        target = FIG3_GAIN_TARGETS[name]
        checks.append((f"{name} {gain:.2f} dB vs target {target} +/- 2", abs(gain - target) <= 2.0))
    detail = "SNR at 1e-4: " + ", ".join(f"{k} {v:.2f} dB" for k, v in snr.items())
    record(5, checks, detail)


# --------------------------------------------------------------------------
# 6. Fig. 2 structure
# --------------------------------------------------------------------------

def test_criterion_06_fig2_structure():
    table = fig2_table()
    xs = sorted(table["mode1"])
    p = {m: [table[f"mode{m}"][x].value for x in xs] for m in range(1, 8)}
    checks = []
    m1 = p[1]
    checks.append(("mode 1 non-decreasing", all(a <= b for a, b in zip(m1, m1[1:]))))
    resolved = [v for v in m1 if v > 0]
    checks.append(("mode 1 strictly increasing where resolved",
                   all(a < b for a, b in zip(resolved, resolved[1:])) and m1[-1] > m1[0]))
    peak = xs[int(np.argmax(p[4]))]
    checks.append((f"mode 4 peaks at {peak:g} m (near 200)", abs(peak - 200.0) <= 25.0))
    bad = [x for x, a, b in zip(xs, p[2], p[3]) if a > b]
    checks.append((f"mode 2 <= mode 3 everywhere (violations at {bad})", not bad))
    k = xs.index(200.0)
    p4, p2, p3 = p[4][k], p[2][k], p[3][k]
    checks.append((f"mode 4 resolved at 200 m ({p4:.1e})", p4 > 0))
    checks.append((f"mode 2 >= 10x better than mode 4 at 200 m ({p2:.1e})", p2 * 10 <= p4 and p4 > 0))
    checks.append((f"mode 3 >= 10x better than mode 4 at 200 m ({p3:.1e})", p3 * 10 <= p4 and p4 > 0))
    events = {m: table[f"mode{m}"][200.0].events for m in (2, 3, 4)}
    record(6, checks, f"at 200 m: events mode2={events[2]}, mode3={events[3]}, mode4={events[4]} of 1e6")


# --------------------------------------------------------------------------
# 7. Fig. 5 structure
# --------------------------------------------------------------------------

def test_criterion_07_fig5_structure():
    table = fig5_table()
    checks = []
    minima = []
    for strategy, curve in table.items():
        xs = sorted(curve)
        values = [curve[x].value for x in xs]
        k = int(np.argmin(values))
        minima.append(f"{strategy}@w={xs[k]:g}")
        checks.append((f"{strategy} interior minimum (argmin w={xs[k]:g})", 0 < k < len(xs) - 1))

    def complete(strategy):
        curve = table[strategy]
        return next((x for x in sorted(curve) if curve[x].value >= 0.99), math.inf)

    w400, w200 = complete("subthz@400"), complete("subthz@200")
    checks.append((f"subthz@400 complete outage at {w400} < subthz@200 at {w200}", w400 < w200))
    checks.append((f"subthz@400 complete outage {w400} within 0.4 +/- 0.2", abs(w400 - 0.4) <= 0.2 + 1e-9))
    checks.append((f"subthz@200 complete outage {w200} within 0.6 +/- 0.2", abs(w200 - 0.6) <= 0.2 + 1e-9))
    record(7, checks, f"complete outage: 400 m at {w400} m, 200 m at {w200} m; minima {', '.join(minima)}")


# --------------------------------------------------------------------------
# 8. Fig. 4 structure
# --------------------------------------------------------------------------

def test_criterion_08_fig4_structure():
    table = fig4_table()
    xs = sorted(table["fso"])
    fso = [table["fso"][x].value for x in xs]
    thz = [table["subthz"][x].value for x in xs]
    checks = [("fso rate non-decreasing in visibility", all(a <= b for a, b in zip(fso, fso[1:])))]
    diff = np.sign(np.subtract(fso, thz))
    cross = [xs[k + 1] for k in range(len(xs) - 1) if diff[k] < 0 < diff[k + 1]]
    checks.append((f"fso overtakes subthz (at {cross} km)", bool(cross)))
    shortfalls = []
    for strategy in ("hard", "soft", "mrc"):
        bad = [x for x, f, t in zip(xs, fso, thz)
               if table[strategy][x].value < max(f, t) - table[strategy][x].std_error]
        if bad:
            worst = max(bad, key=lambda x: max(table["fso"][x].value, table["subthz"][x].value)
                        - table[strategy][x].value)
            gap = max(table["fso"][worst].value, table["subthz"][worst].value) - table[strategy][worst].value
            shortfalls.append(f"{strategy} worst {gap:.3f} bps/Hz at {worst} km")
        checks.append((f"{strategy} >= max(single) - 1 SE at every visibility (violations at {bad} km)",
                       not bad))
    record(8, checks, "; ".join(shortfalls) if shortfalls else f"crossing near {cross} km")


# --------------------------------------------------------------------------
# 9. soft vs hard switching
# --------------------------------------------------------------------------

def test_criterion_09_soft_vs_hard():
    study = STUDIES["fig3-power"]
    base = study.scenario(table1_defaults())
    checks = []
    notes = []
    for tx in (20.0, 25.0, 30.0):
        s = with_overrides(base, {"service.tx_snr_db": tx})
        wins = 0
        for seed in range(30):
            hard = mc.estimate_switch_rate(s, 200.0, "hard", trace_length=10**4, trials=1, seed=seed)
            soft = mc.estimate_switch_rate(s, 200.0, "soft", trace_length=10**4, trials=1, seed=seed)
            wins += soft.value < hard.value
        p = stats.binomtest(wins, 30, 0.5, alternative="greater").pvalue
        notes.append(f"{tx:.0f} dB soft<hard in {wins}/30")
        checks.append((f"sign test at {tx} dB: {wins}/30, p={p:.2g}", p < 0.01))

    table, _ = fig3_table()
    gaps = []
    for level in (1e-1, 1e-2, 1e-3, 1e-4):
        gap = crossing(table["hard"], level) - crossing(table["soft"], level)
        gaps.append(gap)
        checks.append((f"soft/hard gap {gap:+.2f} dB at outage {level:g}", abs(gap) < 0.5))
    notes.append("equivalent-SNR gaps " + ", ".join(f"{g:+.2f}" for g in gaps) + " dB")
    record(9, checks, "; ".join(notes))


# --------------------------------------------------------------------------
# 10. reproducibility
# --------------------------------------------------------------------------

def test_criterion_10_reproducible_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.CONFIG_ENV, raising=False)
    trials = mc.CHUNK_TRIALS + 5000  # spans two chunks so workers split real work
    checks = []
    for name in STUDIES:
        outs = []
        for tag, workers in (("a", 1), ("b", 1), ("c", 3)):
            code = cli.main([name, "--trials", str(trials), "--seed", "11", "--workers", str(workers),
                             "--out", f"{name}-{tag}"])
            outs.append((tmp_path / f"{name}-{tag}.csv").read_bytes() if code == 0 else b"")
        checks.append((f"{name} identical across runs/workers", outs[0] != b"" and outs[0] == outs[1] == outs[2]))
    record(10, checks, f"{len(STUDIES)} figure commands x 3 runs (workers 1, 1, 3) byte-identical")


if __name__ == "__main__":
    # pytest imports this file under its own module name; read results from there
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
