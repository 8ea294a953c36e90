"""Receiver strategies for a parallel sub-THz + FSO hop.

Hard switching decodes the link with the larger instantaneous SNR. Soft
switching is a hysteresis controller: it holds the FSO link until its SNR
falls below a lower threshold and only returns to it once the SNR climbs back
above an upper one. MRC adds the two branch SNRs.

All SNR arguments are linear; thresholds in :class:`SwitchThresholds` are dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linkbudget import Technology
from .scenario import SwitchThresholds

__all__ = [
    "SwitchThresholds",
    "HybridState",
    "hard_select",
    "soft_step",
    "mrc_combine",
    "outage_decision",
    "hard_trace",
    "soft_trace",
    "soft_trace_flat",
    "count_switches",
]

FSO = Technology.FSO
SUBTHZ = Technology.SUBTHZ


@dataclass(frozen=True)
class HybridState:
    active: Technology = FSO
    switch_count: int = 0

    def __post_init__(self) -> None:
        if self.active not in (FSO, SUBTHZ):
            raise ValueError("active link must be FSO or SubTHz")


def _lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def hard_select(gamma_fso: float, gamma_thz: float) -> tuple[Technology, float]:
    """Pick the stronger link; ties go to FSO."""
    if gamma_fso >= gamma_thz:
        return FSO, gamma_fso
    return SUBTHZ, gamma_thz


def soft_step(state: HybridState, gamma_fso: float, gamma_thz: float,
              th: SwitchThresholds) -> tuple[HybridState, float, bool]:
    """Advance the hysteresis controller by one fading block.

    Returns ``(new_state, effective_snr, outage)``. The effective SNR is always
    that of the (possibly new) active link.
    """
    upper, lower, thz_min = _lin(th.fso_upper_db), _lin(th.fso_lower_db), _lin(th.subthz_db)
    count = state.switch_count
    if state.active is FSO:
        if gamma_fso >= lower:
            return state, gamma_fso, False
        if gamma_thz >= thz_min:
            return HybridState(SUBTHZ, count + 1), gamma_thz, False
        return state, gamma_fso, True
    if gamma_fso >= upper:
        return HybridState(FSO, count + 1), gamma_fso, False
    return state, gamma_thz, gamma_thz < thz_min


def mrc_combine(gamma_fso, gamma_thz):
    """Maximum-ratio combining of the two branches: SNRs add."""
    return gamma_fso + gamma_thz


def outage_decision(effective_snr, threshold_snr):
    """True where the effective SNR is strictly below the threshold."""
    if np.any(np.asarray(threshold_snr) <= 0):
        raise ValueError("threshold_snr must be > 0")
    out = np.asarray(effective_snr) < threshold_snr
    return out if out.ndim else bool(out)


# --------------------------------------------------------------------------
# Vectorized traces. Time runs along the last axis; leading axes are
# independent chains.
# --------------------------------------------------------------------------

def hard_trace(gamma_fso, gamma_thz):
    """Per-step hard selection: returns ``(fso_active, effective_snr)`` arrays."""
    g_f = np.asarray(gamma_fso, dtype=float)
    g_t = np.asarray(gamma_thz, dtype=float)
    fso_active = g_f >= g_t
    return fso_active, np.where(fso_active, g_f, g_t)


def soft_trace(gamma_fso, gamma_thz, th: SwitchThresholds, fso_active0=True):
    """Run :func:`soft_step` along the last axis for every chain at once.

    ``fso_active0`` is the state before the first step. Returns
    ``(fso_active, effective_snr, outage)``, each shaped like the inputs.
    """
    g_f = np.asarray(gamma_fso, dtype=float)
    g_t = np.asarray(gamma_thz, dtype=float)
    if g_f.shape != g_t.shape:
        raise ValueError("SNR traces must have the same shape")
    upper, lower, thz_min = _lin(th.fso_upper_db), _lin(th.fso_lower_db), _lin(th.subthz_db)

    f_ok_lo = g_f >= lower
    f_ok_hi = g_f >= upper
    t_ok = g_t >= thz_min
    active = np.empty(g_f.shape, dtype=bool)
    outage = np.empty(g_f.shape, dtype=bool)
    state = np.broadcast_to(np.asarray(fso_active0, dtype=bool), g_f.shape[:-1]).copy()
    for k in range(g_f.shape[-1]):
        lo, hi, tk = f_ok_lo[..., k], f_ok_hi[..., k], t_ok[..., k]
        # on FSO: stay unless below lower and sub-THz usable; on sub-THz: return once above upper
        state = np.where(state, lo | ~tk, hi)
        active[..., k] = state
        outage[..., k] = np.where(state, ~lo & ~tk, ~tk)
    return active, np.where(active, g_f, g_t), outage


def count_switches(fso_active) -> np.ndarray:
    """Number of active-link changes along the last axis."""
    a = np.asarray(fso_active, dtype=bool)
    return np.count_nonzero(a[..., 1:] != a[..., :-1], axis=-1)


def soft_trace_flat(gamma_fso, gamma_thz, th: SwitchThresholds, chain_length: int = 256):
    """Soft switching over 1-D block sequences cut into consecutive chains.

    Trials ``[0, chain_length)`` form the first chain, and so on; the last
    chain may be shorter. Every chain starts on the FSO link.
    """
    g_f = np.asarray(gamma_fso, dtype=float).ravel()
    g_t = np.asarray(gamma_thz, dtype=float).ravel()
    n = g_f.size
    rows = -(-n // chain_length)
    pad = rows * chain_length - n
    g_f = np.pad(g_f, (0, pad)).reshape(rows, chain_length)
    g_t = np.pad(g_t, (0, pad)).reshape(rows, chain_length)
    active, eff, outage = soft_trace(g_f, g_t, th)
    return active.ravel()[:n], eff.ravel()[:n], outage.ravel()[:n]
