"""Radio/electrical constants, SF table, charging-time distributions and duty cycles.

All quantities are SI internally: meters, seconds, watts, ohms, farads.
dB/dBm values are converted once when a config is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import ConfigError, NumericalError


@dataclass(frozen=True)
class SfEntry:
    """One spreading factor of the 25-byte-payload link table."""

    sf: int
    bitrate_kbps: float
    airtime_s: float
    snr_threshold_db: float  # demodulation floor, dB (negative: below noise)

    @property
    def snr_threshold(self) -> float:
        """Linear SNR demodulation threshold."""
        return 10.0 ** (self.snr_threshold_db / 10.0)


# 25-byte message at BW = 125 kHz; airtime = payload bits / bitrate.
SF_TABLE: tuple[SfEntry, ...] = (
    SfEntry(7, 5.47, 0.0366, -6.0),
    SfEntry(8, 3.13, 0.064, -9.0),
    SfEntry(9, 1.76, 0.113, -12.0),
    SfEntry(10, 0.98, 0.204, -15.0),
    SfEntry(11, 0.54, 0.372, -17.5),
    SfEntry(12, 0.29, 0.682, -20.0),
)

N_RINGS = len(SF_TABLE)

AIRTIMES_S = np.array([e.airtime_s for e in SF_TABLE])
SNR_THRESHOLDS = np.array([e.snr_threshold for e in SF_TABLE])


@dataclass(frozen=True)
class ChargingScheme:
    """Random inter-transmission (= capacitor charging) time distribution.

    kind "uniform": support [a, b] seconds.
    kind "weibull": shape k, scale w seconds (k=1 is exponential).
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    k: float = 1.0
    w: float = 0.0

    def __post_init__(self):
        if self.kind == "uniform":
            if not (0.0 <= self.a < self.b):
                raise ConfigError(f"uniform scheme requires 0 <= a < b, got a={self.a}, b={self.b}")
        elif self.kind == "weibull":
            if self.k <= 0.0 or self.w <= 0.0:
                raise ConfigError(f"weibull scheme requires k, w > 0, got k={self.k}, w={self.w}")
        else:
            raise ConfigError(f"unknown scheme kind {self.kind!r}")

    @classmethod
    def uniform(cls, a: float, b: float) -> "ChargingScheme":
        return cls("uniform", a=a, b=b)

    @classmethod
    def weibull(cls, k: float, w: float) -> "ChargingScheme":
        return cls("weibull", k=k, w=w)

    def pdf(self, x):
        """Density at x (scalar or array); zero outside the support."""
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            out = np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)
        else:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                r = np.where(x > 0, x, 1.0) / self.w
                val = (self.k / self.w) * r ** (self.k - 1.0) * np.exp(-(r**self.k))
            if self.k == 1.0:
                at_zero = 1.0 / self.w
            else:
                at_zero = 0.0 if self.k > 1.0 else np.inf
            out = np.where(x > 0, val, np.where(x == 0, at_zero, 0.0))
        return out if out.ndim else float(out)

    def survival(self, x):
        """P[nu > x]."""
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            out = np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)
            out = np.where(x < self.a, 1.0, out)
        else:
            out = np.where(x > 0, np.exp(-((np.maximum(x, 0.0) / self.w) ** self.k)), 1.0)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        """E[nu] in seconds."""
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        return self.w * math.gamma(1.0 + 1.0 / self.k)

    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return (self.a, self.b)
        return (0.0, math.inf)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size)
        return self.w * rng.weibull(self.k, size)


def _thermal_noise_w(bandwidth_hz: float, noise_figure_db: float) -> float:
    # -174 dBm/Hz floor plus receiver noise figure
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class PhyConfig:
    """Electrical, radio and deployment constants (SI units)."""

    v_harvest: float  # harvester open-circuit voltage [V]
    p_harvest: float  # harvest rate [W]
    capacitance: float  # [F]
    r_load_off: float  # load resistance, radio off [ohm]
    r_load_on: float  # load resistance, radio on [ohm]
    v_operating: float  # radio operating threshold [V]
    p_tx: float  # transmit power [W]
    p_overhead: float  # transmit-chain overhead [W]
    bandwidth: float  # [Hz]
    eta: float  # path-loss exponent, >= 2
    wavelength: float  # carrier wavelength [m]
    noise: float  # receiver noise power [W]
    sir_threshold: float  # co-SF capture threshold, linear
    radius: float  # deployment disk radius [m]
    density: float  # device intensity [1/m^2]
    ring_radii: tuple[float, ...]  # l0..l6 [m], nondecreasing, l6 = radius

    def __post_init__(self):
        if self.p_harvest <= 0 or self.v_harvest <= 0:
            raise ConfigError("harvester voltage and power must be positive")
        if not self.r_load_on < self.r_load_off:
            raise ConfigError("r_load_on must be smaller than r_load_off (discharge faster than charge)")
        if not self.v_operating < self.v_harvest:
            raise ConfigError("operating threshold must lie below the harvester voltage")
        if self.eta < 2.0:
            raise ConfigError("path-loss exponent must be >= 2")
        if len(self.ring_radii) != N_RINGS + 1:
            raise ConfigError(f"ring_radii needs {N_RINGS + 1} values, got {len(self.ring_radii)}")
        r = np.asarray(self.ring_radii)
        if r[0] < 0 or np.any(np.diff(r) < 0):
            raise ConfigError("ring radii must be nondecreasing with l0 >= 0")
        if not math.isclose(r[-1], self.radius, rel_tol=1e-12):
            raise ConfigError("outermost ring radius must equal the deployment radius")

    @property
    def r_harvest(self) -> float:
        """Harvester series resistance V_H^2 / P_H [ohm]."""
        return self.v_harvest**2 / self.p_harvest


def ring_index(d: float, cfg: PhyConfig) -> int:
    """Ring 0..5 containing distance d [m]; d in (l_{n-1}, l_n], d=0 maps to ring 0."""
    if d < 0 or d > cfg.ring_radii[-1]:
        raise ValueError(f"distance {d} m outside deployment range (0, {cfg.ring_radii[-1]} m]")
    idx = int(np.searchsorted(cfg.ring_radii, d, side="left")) - 1
    return max(idx, 0)


def sf_for_distance(d: float, cfg: PhyConfig) -> SfEntry:
    """Spreading-factor table entry for a device d meters from the gateway."""
    return SF_TABLE[ring_index(d, cfg)]


def charging_pdf(scheme: ChargingScheme, x) -> float:
    """Charging-time density at x seconds (0 outside support)."""
    return scheme.pdf(x)


def mean_charging_time(scheme: ChargingScheme) -> float:
    """E[nu] in seconds."""
    return scheme.mean()


class DutyCycle(NamedTuple):
    expected_ratio: float  # E[tau / (nu + tau)]
    simple_ratio: float  # tau / (E[nu] + tau), the ETSI-style figure


def duty_cycle(scheme: ChargingScheme, airtime: float, rel_tol: float = 1e-8) -> DutyCycle:
    """Transmit-time fractions for a given airtime.

    expected_ratio is the exact per-cycle expectation computed by adaptive
    quadrature against the scheme pdf; simple_ratio is the conventional
    airtime over mean-period figure used for the 1% ETSI check.
    """
    if airtime <= 0:
        if airtime == 0:
            return DutyCycle(0.0, 0.0)
        raise ValueError("airtime must be positive")
    lo, hi = scheme.support()
    f = lambda x: scheme.pdf(x) * airtime / (x + airtime)
    val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rel_tol * 1e-2, limit=500)
    if not math.isfinite(val) or err > max(rel_tol * abs(val), 1e-300):
        raise NumericalError(f"duty-cycle quadrature did not converge (err={err:.2e})")
    return DutyCycle(val, airtime / (scheme.mean() + airtime))


def collision_fraction(
    energy_avail: float,
    scheme: ChargingScheme,
    airtime: float,
    variant: str = "expected",
) -> float:
    """Fraction of co-SF devices modeled as concurrently transmitting.

    variant "expected": energy_avail * E[tau/(nu+tau)] (exact quadrature).
    variant "simple":   energy_avail * tau/(E[nu]+tau) (long-run transmit-time
                        fraction of an always-available device).
    variant "overlap":  2*energy_avail*tau / (E[nu] + energy_avail*tau), the
                        intensity consistent with any-overlap collision counting
                        in the event simulator (window 2*tau per transmission).
    """
    if not 0.0 <= energy_avail <= 1.0:
        raise ValueError("energy_avail must lie in [0, 1]")
    if variant == "expected":
        return energy_avail * duty_cycle(scheme, airtime).expected_ratio
    if variant == "simple":
        return energy_avail * duty_cycle(scheme, airtime).simple_ratio
    if variant == "overlap":
        if airtime == 0:
            return 0.0
        return 2.0 * energy_avail * airtime / (scheme.mean() + energy_avail * airtime)
    raise ValueError(f"unknown collision variant {variant!r}")
