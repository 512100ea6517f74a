"""Event-driven network simulation over continuous time.

Every device alternates random charging intervals with fixed-airtime
transmissions. A transmission only starts if the capacitor is at or above the
operating threshold; if the voltage falls below the threshold before the
packet ends, the cycle counts as an energy outage and the packet is neither
decoded nor does it interfere. Completed packets are checked at the gateway
against the SNR floor and against summed co-ring interference.

Determinism: every device owns two counter-based RNG streams (charging times
and fading) keyed by (seed, device index), so results are bit-identical for a
fixed seed regardless of batching.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .capacitor import build_model
from .errors import StatisticsError
from .geometry import NetworkRealization, path_gain
from .phy import AIRTIMES_S, ChargingScheme, N_RINGS, PhyConfig, SNR_THRESHOLDS

_CHUNK = 2048


@dataclass(frozen=True)
class DeviceStats:
    """Per-device counters; attempts = successes + snr_fails + sir_fails."""

    ring: np.ndarray
    distance: np.ndarray
    cycles: np.ndarray
    energy_skips: np.ndarray
    energy_aborts: np.ndarray
    attempts: np.ndarray
    snr_fails: np.ndarray
    sir_fails: np.ndarray
    successes: np.ndarray
    duty_sum: np.ndarray  # sum of airtime/(nu+airtime) over counted cycles


@dataclass(frozen=True)
class SimReport:
    """Per-ring empirical success decomposition with binomial confidence intervals."""

    duration: float
    warmup: float
    seed: int
    overlap: str
    mode: str
    n_devices: np.ndarray  # per ring
    cycles: np.ndarray
    energy_skips: np.ndarray
    energy_aborts: np.ndarray
    attempts: np.ndarray
    snr_fails: np.ndarray
    sir_fails: np.ndarray
    successes: np.ndarray
    energy_avail: np.ndarray  # attempts / cycles
    conn_rate: np.ndarray  # successes / attempts
    overall_rate: np.ndarray  # successes / cycles
    ci_half_width: np.ndarray  # 95% binomial half-width on overall_rate
    duty_mean: np.ndarray  # mean of airtime/(nu+airtime) over cycles
    tx_time_fraction: np.ndarray  # completed airtime over counted wall time
    devices: DeviceStats | None = None
    traces: list | None = field(default=None, repr=False)


def _ratio(num, den):
    den = np.asarray(den, dtype=float)
    return np.where(den > 0, np.asarray(num, dtype=float) / np.where(den > 0, den, 1.0), 0.0)


def run_simulation(
    net: NetworkRealization,
    cfg: PhyConfig,
    scheme: ChargingScheme,
    duration: float,
    seed: int = 0,
    mode: str = "thevenin",
    overlap: str = "full",
    warmup: float | None = None,
    collect_devices: bool = True,
    collect_traces: bool = False,
) -> SimReport:
    """Simulate the sampled network for `duration` seconds of model time.

    overlap "full" charges an interferer's whole received power to any packet
    it overlaps; "fractional" scales it by the overlapped fraction of the
    victim packet. Statistics start after the warm-up (default 100 mean
    charging times, capped at half the duration).
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if overlap not in ("full", "fractional"):
        raise ValueError(f"unknown overlap mode {overlap!r}")
    if warmup is None:
        warmup = min(100.0 * scheme.mean(), 0.5 * duration)
    n = net.n_devices
    m = build_model(cfg, mode)
    rings = net.ring.astype(int)
    airtimes = net.airtimes
    gains = np.array([path_gain(d, cfg) for d in net.distances]) if n else np.empty(0)

    retention = np.exp(-airtimes / m.tau_on) if n else np.empty(0)

    streams = np.random.SeedSequence(seed).spawn(2 * n) if n else []
    nu_gens = [np.random.Generator(np.random.PCG64(streams[2 * i])) for i in range(n)]
    h_gens = [np.random.Generator(np.random.PCG64(streams[2 * i + 1])) for i in range(n)]

    v_init_lo = min(cfg.v_operating, m.v_limit_off)
    v = np.array([g.uniform(v_init_lo, m.v_limit_off) for g in nu_gens]) if n else np.empty(0)
    t = np.zeros(n)
    cycles = np.zeros(n, dtype=np.int64)
    skips = np.zeros(n, dtype=np.int64)
    aborts = np.zeros(n, dtype=np.int64)
    completed_counted = np.zeros(n, dtype=np.int64)
    duty_sum = np.zeros(n)
    rec_dev: list[np.ndarray] = []
    rec_start: list[np.ndarray] = []
    rec_counted: list[np.ndarray] = []
    traces: list[list[np.ndarray]] | None = [[] for _ in range(n)] if collect_traces else None

    while n and (t < duration).any():
        nu_chunk = np.stack([g.uniform(0.0, 1.0, _CHUNK) for g in nu_gens])
        if scheme.kind == "uniform":
            nu_chunk = scheme.a + (scheme.b - scheme.a) * nu_chunk
        else:
            nu_chunk = scheme.w * (-np.log1p(-nu_chunk)) ** (1.0 / scheme.k)
        for j in range(_CHUNK):
            active = t < duration
            if not active.any():
                break
            nu = nu_chunk[:, j]
            w = m.v_limit_off + (v - m.v_limit_off) * np.exp(-nu / m.tau_off)
            attempt = (w >= cfg.v_operating) & active
            v_next = np.where(attempt, m.v_limit_on + (w - m.v_limit_on) * retention, w)
            done = attempt & (v_next >= cfg.v_operating)
            start = t + nu
            counted = active & (start > warmup)
            cycles += counted
            skips += counted & ~attempt
            aborts += counted & attempt & ~done
            completed_counted += counted & done
            duty_sum += np.where(counted, airtimes / (nu + airtimes), 0.0)
            sel = done  # all completed packets interfere, counted or not
            if sel.any():
                rec_dev.append(np.flatnonzero(sel).astype(np.int32))
                rec_start.append(start[sel])
                rec_counted.append(counted[sel])
            if collect_traces:
                for d in np.flatnonzero(active):
                    traces[d].append(v_next[d])
            v = np.where(active, v_next, v)
            t = np.where(active, t + nu + np.where(attempt, airtimes, 0.0), t)

    if rec_dev:
        dev = np.concatenate(rec_dev)
        start = np.concatenate(rec_start)
        counted = np.concatenate(rec_counted)
    else:
        dev = np.empty(0, dtype=np.int32)
        start = np.empty(0)
        counted = np.empty(0, dtype=bool)

    # fading draws in per-device packet order (records are time-ordered per device)
    h2 = np.empty(dev.size)
    order = np.lexsort((start, dev))
    bincounts = np.bincount(dev, minlength=n) if n else np.empty(0, dtype=int)
    pos = 0
    for d in range(n):
        k = int(bincounts[d])
        if k:
            h2[order[pos : pos + k]] = h_gens[d].exponential(1.0, k)
            pos += k

    success = np.zeros(dev.size, dtype=bool)
    snr_fail = np.zeros(dev.size, dtype=bool)
    for ring in range(N_RINGS):
        mask = rings[dev] == ring if dev.size else np.empty(0, dtype=bool)
        if not mask.any():
            continue
        idx = np.flatnonzero(mask)
        sub = idx[np.argsort(start[idx], kind="stable")]
        s = start[sub]
        pw = cfg.p_tx * h2[sub] * gains[dev[sub]]
        tau = AIRTIMES_S[ring]
        lo = np.searchsorted(s, s - tau, side="right")
        hi = np.searchsorted(s, s + tau, side="left")
        cp = np.concatenate([[0.0], np.cumsum(pw)])
        if overlap == "full":
            interference = cp[hi] - cp[lo] - pw
        else:
            csp = np.concatenate([[0.0], np.cumsum(pw * s)])
            rank = np.arange(s.size)
            sum_l = cp[rank] - cp[lo]
            sum_ls = csp[rank] - csp[lo]
            sum_r = cp[hi] - cp[rank + 1]
            sum_rs = csp[hi] - csp[rank + 1]
            interference = (sum_l - (s * sum_l - sum_ls) / tau) + (sum_r - (sum_rs - s * sum_r) / tau)
        ok_snr = h2[sub] >= cfg.noise * SNR_THRESHOLDS[ring] / (cfg.p_tx * gains[dev[sub]])
        ok_sir = pw >= cfg.sir_threshold * interference
        success[sub] = ok_snr & ok_sir
        snr_fail[sub] = ~ok_snr

    eval_mask = counted
    succ_dev = np.bincount(dev[eval_mask & success], minlength=n) if dev.size else np.zeros(n, dtype=int)
    snrf_dev = np.bincount(dev[eval_mask & snr_fail], minlength=n) if dev.size else np.zeros(n, dtype=int)
    attempts_dev = completed_counted
    sirf_dev = attempts_dev - succ_dev - snrf_dev

    def per_ring(arr):
        return np.array([arr[rings == r].sum() if n else 0 for r in range(N_RINGS)])

    r_ndev = np.array([(rings == r).sum() if n else 0 for r in range(N_RINGS)])
    r_cycles = per_ring(cycles)
    r_skips = per_ring(skips)
    r_aborts = per_ring(aborts)
    r_attempts = per_ring(attempts_dev)
    r_succ = per_ring(succ_dev)
    r_snrf = per_ring(snrf_dev)
    r_sirf = per_ring(sirf_dev)
    r_duty = per_ring(duty_sum)
    q_hat = _ratio(r_succ, r_cycles)
    ci = 1.96 * np.sqrt(_ratio(q_hat * (1.0 - q_hat), r_cycles))
    window = max(duration - warmup, 1e-300)
    tx_frac = _ratio(r_attempts * AIRTIMES_S, r_ndev * window)

    devices = None
    if collect_devices:
        devices = DeviceStats(
            ring=rings.copy(),
            distance=net.distances.copy(),
            cycles=cycles,
            energy_skips=skips,
            energy_aborts=aborts,
            attempts=attempts_dev,
            snr_fails=snrf_dev,
            sir_fails=sirf_dev,
            successes=succ_dev,
            duty_sum=duty_sum,
        )
    trace_arrays = [np.array(tr) for tr in traces] if collect_traces else None

    return SimReport(
        duration=duration,
        warmup=warmup,
        seed=seed,
        overlap=overlap,
        mode=mode,
        n_devices=r_ndev,
        cycles=r_cycles,
        energy_skips=r_skips,
        energy_aborts=r_aborts,
        attempts=r_attempts,
        snr_fails=r_snrf,
        sir_fails=r_sirf,
        successes=r_succ,
        energy_avail=_ratio(r_attempts, r_cycles),
        conn_rate=_ratio(r_succ, r_attempts),
        overall_rate=q_hat,
        ci_half_width=ci,
        duty_mean=_ratio(r_duty, r_cycles),
        tx_time_fraction=tx_frac,
        devices=devices,
        traces=trace_arrays,
    )


def empirical_collision_fraction(report: SimReport, min_attempts: int = 100) -> np.ndarray:
    """Per-ring estimate of the co-SF transmitting fraction.

    Estimated as measured availability times the sample mean of
    airtime/(nu+airtime) over cycles, mirroring the analytical product form.
    Rings with zero attempts are dead (0.0); rings with too few attempts for
    a stable estimate raise.
    """
    out = np.zeros(N_RINGS)
    for r in range(N_RINGS):
        if report.attempts[r] == 0:
            out[r] = 0.0
            continue
        if report.attempts[r] < min_attempts:
            raise StatisticsError(
                f"ring {r + 1}: only {report.attempts[r]} attempts (< {min_attempts})", ring=r
            )
        out[r] = report.energy_avail[r] * report.duty_mean[r]
    return out
