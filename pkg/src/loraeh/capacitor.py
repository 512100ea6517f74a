"""Two-phase RC voltage dynamics: charge toward a rest level, discharge during transmit.

Each cycle charges the capacitor for a random time nu toward the radio-off
rest voltage, then discharges it for one packet airtime toward the radio-on
rest voltage, both as first-order exponentials. End-of-phase voltages are
always evaluated in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .phy import ChargingScheme, PhyConfig


@dataclass(frozen=True)
class CapacitorModel:
    """Per-state asymptote/time-constant pairs of the storage capacitor."""

    v_limit_off: float  # charge asymptote, radio off [V]
    tau_off: float  # charge time constant [s]
    v_limit_on: float  # discharge asymptote, radio on [V]
    tau_on: float  # discharge time constant [s]
    mode: str  # "thevenin" | "literal"

    def __post_init__(self):
        if not self.v_limit_on < self.v_limit_off:
            raise ConfigError("discharge asymptote must lie below the charge asymptote")
        if not 0 < self.tau_on < self.tau_off:
            raise ConfigError("time constants must satisfy 0 < tau_on < tau_off")


def build_model(cfg: PhyConfig, mode: str = "thevenin") -> CapacitorModel:
    """Reduce the harvester/capacitor/load circuit to per-state RC constants.

    "literal" uses v = R_L*V_H/R_H and tau = R_L*C per load state. With a
    large off-load this puts the charge asymptote far above the source
    voltage (unbounded storage), so the physically consistent "thevenin"
    reduction (divider asymptote, parallel-resistance time constant) is the
    default.
    """
    rh = cfg.r_harvest
    if mode == "literal":
        pairs = [(rl * cfg.v_harvest / rh, rl * cfg.capacitance) for rl in (cfg.r_load_off, cfg.r_load_on)]
    elif mode == "thevenin":
        pairs = [
            (cfg.v_harvest * rl / (rh + rl), (rh * rl / (rh + rl)) * cfg.capacitance)
            for rl in (cfg.r_load_off, cfg.r_load_on)
        ]
    else:
        raise ConfigError(f"unknown capacitor model mode {mode!r}")
    (v_off, t_off), (v_on, t_on) = pairs
    return CapacitorModel(v_limit_off=v_off, tau_off=t_off, v_limit_on=v_on, tau_on=t_on, mode=mode)


def step_charge(v0, nu, m: CapacitorModel):
    """Voltage after charging for nu seconds from v0."""
    return m.v_limit_off + (v0 - m.v_limit_off) * np.exp(-np.asarray(nu, dtype=float) / m.tau_off)


def step_discharge(v0, airtime, m: CapacitorModel):
    """Voltage after transmitting for airtime seconds from v0."""
    return m.v_limit_on + (v0 - m.v_limit_on) * np.exp(-np.asarray(airtime, dtype=float) / m.tau_on)


@dataclass(frozen=True)
class CycleConstants:
    """Affine one-cycle voltage map v' = v_after_full + retention*decay*(v - ceiling).

    decay = exp(-nu/tau_off) is the random charge-phase factor; retention is
    the deterministic discharge survival exp(-airtime/tau_on); ceiling is the
    charge asymptote, and v_after_full is where a fully charged capacitor
    lands after one transmission.
    """

    v_after_full: float  # [V]
    retention: float  # in (0, 1)
    ceiling: float  # [V]
    airtime: float  # [s]

    @classmethod
    def from_model(cls, m: CapacitorModel, airtime: float) -> "CycleConstants":
        retention = float(np.exp(-airtime / m.tau_on))
        ceiling = m.v_limit_off
        return cls(
            v_after_full=m.v_limit_on + (ceiling - m.v_limit_on) * retention,
            retention=retention,
            ceiling=ceiling,
            airtime=airtime,
        )

    def apply(self, v, decay):
        """End-of-cycle voltage given start voltage v and charge-phase decay factor."""
        return self.v_after_full + self.retention * np.asarray(decay, dtype=float) * (v - self.ceiling)


@dataclass(frozen=True)
class VoltageTrajectory:
    """Sampled capacitor voltage over charge/transmit cycles."""

    times: np.ndarray  # [s]
    voltages: np.ndarray  # [V]
    phases: np.ndarray  # "charge" | "tx" per sample
    cycle_index: np.ndarray


def simulate_trajectory(
    v0: float,
    scheme: ChargingScheme,
    airtime: float,
    n_cycles: int,
    m: CapacitorModel,
    seed: int = 0,
    samples_per_phase: int = 20,
) -> VoltageTrajectory:
    """Sample a voltage trajectory over n_cycles random charge/transmit cycles.

    Intra-phase points are cosmetic subdivisions of the closed-form curve;
    end-of-phase voltages are exact. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    times = [0.0]
    volts = [float(v0)]
    phases = ["charge"]
    cyc = [0]
    t = 0.0
    v = float(v0)
    for j in range(n_cycles):
        nu = float(scheme.sample(rng))
        for frac in np.linspace(1.0 / samples_per_phase, 1.0, samples_per_phase):
            times.append(t + frac * nu)
            volts.append(float(step_charge(v, frac * nu, m)))
            phases.append("charge")
            cyc.append(j)
        v = float(step_charge(v, nu, m))
        t += nu
        for frac in np.linspace(1.0 / samples_per_phase, 1.0, samples_per_phase):
            times.append(t + frac * airtime)
            volts.append(float(step_discharge(v, frac * airtime, m)))
            phases.append("tx")
            cyc.append(j)
        v = float(step_discharge(v, airtime, m))
        t += airtime
    return VoltageTrajectory(
        times=np.asarray(times),
        voltages=np.asarray(volts),
        phases=np.asarray(phases, dtype=object),
        cycle_index=np.asarray(cyc),
    )


def cycle_voltages(
    v0,
    scheme: ChargingScheme,
    airtime: float,
    n_cycles: int,
    m: CapacitorModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """End-of-cycle voltages for one or many parallel chains (rows: chains)."""
    v = np.atleast_1d(np.asarray(v0, dtype=float)).copy()
    out = np.empty((n_cycles, v.size))
    cc = CycleConstants.from_model(m, airtime)
    for j in range(n_cycles):
        decay = np.exp(-scheme.sample(rng, v.size) / m.tau_off)
        v = cc.apply(v, decay)
        out[j] = v
    return out


def estimate_mean_voltage(cc: CycleConstants, mean_decay: float) -> float:
    """Fixed point of the mean one-cycle map: the stationary mean voltage.

    mean_decay is E[exp(-nu/tau_off)] for the charging-time distribution.
    """
    denom = cc.retention * mean_decay - 1.0
    if abs(denom) < 1e-12:
        raise NumericalError("mean-voltage estimator degenerate: retention * E[decay] == 1")
    return (cc.retention * cc.ceiling * mean_decay - cc.v_after_full) / denom
