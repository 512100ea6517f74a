import dataclasses
import math

import numpy as np
import pytest

from loraeh.capacitor import build_model
from loraeh.errors import StatisticsError
from loraeh.geometry import NetworkRealization, sample_network
from loraeh.montecarlo import empirical_collision_fraction, run_simulation
from loraeh.phy import AIRTIMES_S, ChargingScheme


def fixed_network(distances):
    distances = np.asarray(distances, dtype=float)
    rings = np.minimum((distances // 1000).astype(int), 5)
    return NetworkRealization(
        distances=distances,
        angles=np.zeros(distances.size),
        ring=rings,
        airtimes=AIRTIMES_S[rings],
        seed=0,
    )


def report_fields(rep):
    return (
        rep.n_devices,
        rep.cycles,
        rep.energy_skips,
        rep.energy_aborts,
        rep.attempts,
        rep.snr_fails,
        rep.sir_fails,
        rep.successes,
        rep.overall_rate,
    )


class TestSingleDevice:
    def test_noiseless_lone_device(self, fig2, ud, steady_cache):
        cfg = dataclasses.replace(fig2.phy, noise=0.0)
        net = fixed_network([3500.0])
        rep = run_simulation(net, cfg, ud, duration=2.5e5, seed=4)
        assert rep.conn_rate[3] == 1.0  # no noise, no interferers
        markov_avail = 1.0 - steady_cache("ud", 0.204).outage(fig2.phy.v_operating)
        n = rep.cycles[3]
        se = math.sqrt(markov_avail * (1 - markov_avail) / n)
        # gating (skip without discharge) biases availability slightly upward
        assert abs(rep.energy_avail[3] - markov_avail) < 3 * se + 0.01

    def test_huge_charging_time_never_skips(self, fig2):
        scheme = ChargingScheme.uniform(1e4, 2e4)
        net = fixed_network([3500.0, 3600.0])
        rep = run_simulation(net, fig2.phy, scheme, duration=3e6, seed=1)
        assert rep.energy_skips.sum() == 0
        assert rep.energy_aborts.sum() == 0
        assert empirical_collision_fraction(rep, min_attempts=10)[3] < 2e-5


class TestAccounting:
    def test_counter_identity(self, fig2, ud):
        net = sample_network(fig2.phy, seed=2, n_devices=150)
        rep = run_simulation(net, fig2.phy, ud, duration=5e4, seed=2)
        assert np.array_equal(rep.attempts, rep.successes + rep.snr_fails + rep.sir_fails)
        dv = rep.devices
        assert np.array_equal(dv.attempts, dv.successes + dv.snr_fails + dv.sir_fails)
        per_ring_cycles = np.array([dv.cycles[dv.ring == r].sum() for r in range(6)])
        assert np.array_equal(per_ring_cycles, rep.cycles)
        # a cycle is a skip, an abort, or an evaluated attempt
        assert np.array_equal(rep.cycles, rep.energy_skips + rep.energy_aborts + rep.attempts)

    def test_overall_identity(self, fig2, ud):
        net = sample_network(fig2.phy, seed=3, n_devices=100)
        rep = run_simulation(net, fig2.phy, ud, duration=5e4, seed=3)
        mask = rep.cycles > 0
        assert np.allclose(rep.overall_rate[mask], (rep.energy_avail * rep.conn_rate)[mask], atol=1e-12)

    def test_empty_network(self, fig2, ud):
        net = fixed_network([])
        rep = run_simulation(net, fig2.phy, ud, duration=1e4, seed=0)
        assert rep.cycles.sum() == 0 and rep.successes.sum() == 0


class TestDeterminism:
    def test_bit_identical_reports(self, fig2, ud):
        net = sample_network(fig2.phy, seed=11, n_devices=120)
        a = run_simulation(net, fig2.phy, ud, duration=4e4, seed=11)
        b = run_simulation(net, fig2.phy, ud, duration=4e4, seed=11)
        for x, y in zip(report_fields(a), report_fields(b)):
            assert np.array_equal(x, y)

    def test_seed_changes_results(self, fig2, ud):
        net = sample_network(fig2.phy, seed=11, n_devices=120)
        a = run_simulation(net, fig2.phy, ud, duration=4e4, seed=11)
        b = run_simulation(net, fig2.phy, ud, duration=4e4, seed=12)
        assert not np.array_equal(a.successes, b.successes)


class TestEnergyBookkeeping:
    def test_standalone_replay_matches(self, fig2, ud):
        # replay device 1's voltage sequence from its own stream through the
        # closed-form steps; the simulator must agree cycle by cycle
        net = fixed_network([3500.0, 4500.0, 2500.0])
        duration, seed = 3e4, 6
        rep = run_simulation(net, fig2.phy, ud, duration=duration, seed=seed, collect_traces=True)
        m = build_model(fig2.phy, "thevenin")
        dev = 1
        streams = np.random.SeedSequence(seed).spawn(6)
        gen = np.random.Generator(np.random.PCG64(streams[2 * dev]))
        v = gen.uniform(fig2.phy.v_operating, m.v_limit_off)
        airtime = net.airtimes[dev]
        trace = rep.traces[dev]
        t = 0.0
        replayed = []
        while t < duration:
            u = gen.uniform(0.0, 1.0, 2048)
            nu_block = ud.a + (ud.b - ud.a) * u
            for nu in nu_block:
                if t >= duration:
                    break
                w = m.v_limit_off + (v - m.v_limit_off) * np.exp(-nu / m.tau_off)
                if w >= fig2.phy.v_operating:
                    v = m.v_limit_on + (w - m.v_limit_on) * np.exp(-airtime / m.tau_on)
                    t += nu + airtime
                else:
                    v = w
                    t += nu
                replayed.append(v)
        assert len(replayed) == trace.size
        assert np.max(np.abs(np.asarray(replayed) - trace)) < 1e-12

    def test_skip_does_not_discharge(self, fig2):
        # threshold above the charge ceiling: the device can never transmit
        cfg = dataclasses.replace(fig2.phy, v_operating=3.25)
        scheme = ChargingScheme.uniform(0.0, 5.0)
        net = fixed_network([5500.0])
        rep = run_simulation(net, cfg, scheme, duration=2e3, seed=3, warmup=0.0, collect_traces=True)
        assert rep.attempts.sum() == 0
        assert rep.energy_skips[5] == rep.cycles[5]
        assert np.all(np.diff(rep.traces[0]) >= 0)  # only charging; a discharge would drop strictly

    def test_voltage_stays_in_range(self, fig2, ud):
        net = fixed_network([3500.0])
        m = build_model(fig2.phy, "thevenin")
        rep = run_simulation(net, fig2.phy, ud, duration=5e4, seed=9, collect_traces=True)
        tr = rep.traces[0]
        assert tr.min() >= m.v_limit_on - 1e-12 and tr.max() <= m.v_limit_off + 1e-12


class TestInterference:
    def test_fractional_weighting_never_exceeds_full(self, fig2, ud):
        net = sample_network(fig2.phy, seed=14, n_devices=300)
        full = run_simulation(net, fig2.phy, ud, duration=5e4, seed=14, overlap="full")
        frac = run_simulation(net, fig2.phy, ud, duration=5e4, seed=14, overlap="fractional")
        assert np.array_equal(full.attempts, frac.attempts)  # energy side identical
        assert np.all(frac.successes >= full.successes)

    def test_denser_network_more_interference(self, fig2, ud):
        rates = []
        for n in (100, 250, 500):
            net = sample_network(fig2.phy, seed=15, n_devices=n)
            rep = run_simulation(net, fig2.phy, ud, duration=4e4, seed=15)
            rates.append(rep.conn_rate[2])  # ring 3: fully energy-available
        assert rates[0] > rates[1] > rates[2]

    def test_ci_shrinks_with_duration(self, fig2, ud):
        net = sample_network(fig2.phy, seed=16, n_devices=60)
        short = run_simulation(net, fig2.phy, ud, duration=5e4, seed=16)
        long = run_simulation(net, fig2.phy, ud, duration=2e5, seed=16)
        for r in range(4):
            if short.cycles[r] and long.cycles[r]:
                ratio = long.ci_half_width[r] / max(short.ci_half_width[r], 1e-12)
                assert ratio < 0.75  # roughly duration^(-1/2)


class TestCollisionEstimate:
    def test_dead_ring_zero(self, fig2, ud):
        net = fixed_network([5500.0])  # SF12 is always in outage at these parameters
        rep = run_simulation(net, fig2.phy, ud, duration=5e4, seed=2)
        assert empirical_collision_fraction(rep)[5] == 0.0

    def test_insufficient_samples_raises(self, fig2, ud):
        net = fixed_network([500.0])
        rep = run_simulation(net, fig2.phy, ud, duration=2e3, seed=2, warmup=0.0)
        assert 0 < rep.attempts[0] < 100
        with pytest.raises(StatisticsError) as exc:
            empirical_collision_fraction(rep)
        assert exc.value.ring == 0
